"""Steering of a bipartite qubit state by a noisy measurement pair.

Alice's binary measurements, pushed through the shared state rho, leave Bob
with an assemblage of conditional states.  Sandwiching with the inverse
square root of Bob's marginal turns the assemblage into a POVM pair on Bob's
side, so the whole scenario is summarized by one unital CP transfer matrix
(the resource map) acting on Alice's effect 4-vectors.  The steering
robustness of a pulse sequence is the incompatibility robustness of the two
transported effects

    y_i = R @ M(c) @ x_i,

where M(c) is the Heisenberg transfer matrix of the controlled dynamics.
Because the dynamics enters only through M(c), the exact gradient in the
pulse amplitudes follows from the incompatibility gradient and the
propagator Jacobian by the chain rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import compat
from .errors import (
    DegenerateRootError,
    InternalConsistencyError,
    InvalidEffectError,
    NotDifferentiableError,
    UnsupportedStateError,
)
from .lindblad import (
    ControlHamiltonian,
    DriftGenerator,
    PulseSequence,
    TransferMatrix,
    _propagate_from,
    _propagate_with_jacobian_from,
    control_matrix,
    drift_matrix,
)
from .qubit_algebra import (
    PAULI_BASIS,
    BipartiteState,
    FourVector,
    HermitianMatrix2,
    complement,
    effect_to_matrix,
    validate_effect,
)

#: Bob marginals with an eigenvalue below this are treated as rank-deficient.
_RANK_TOL = 1e-12

_ASSEMBLAGE_TOL = 1e-10


def bob_marginal(rho: BipartiteState) -> HermitianMatrix2:
    """Bob's reduced state: partial trace of rho over Alice's factor."""
    r4 = rho.matrix.reshape(2, 2, 2, 2)
    return np.einsum("abad->bd", r4)


def _trace_out_alice(rho: BipartiteState, x: np.ndarray) -> np.ndarray:
    """tr_A[rho (X (x) Id)] for a 2x2 matrix X on Alice's side."""
    r4 = rho.matrix.reshape(2, 2, 2, 2)
    return np.einsum("abcd,ca->bd", r4, x)


@dataclass(frozen=True, eq=False)
class Assemblage:
    """Conditional states sigma_{a|i} indexed [measurement, outcome, :, :].

    Outcome 0 is the effect itself, outcome 1 its complement.  Both
    measurements sum to the same marginal, which each does by construction.
    """

    conditionals: np.ndarray

    def __post_init__(self) -> None:
        sig = np.asarray(self.conditionals, dtype=complex)
        if sig.shape != (2, 2, 2, 2):
            raise ValueError(f"expected shape (2, 2, 2, 2), got {sig.shape}")
        for i in range(2):
            for a in range(2):
                block = sig[i, a]
                if np.max(np.abs(block - block.conj().T)) > _ASSEMBLAGE_TOL:
                    raise ValueError(f"sigma_{'+-'[a]}|{i + 1} is not Hermitian")
                if np.linalg.eigvalsh(block)[0] < -_ASSEMBLAGE_TOL:
                    raise ValueError(f"sigma_{'+-'[a]}|{i + 1} is not PSD")
        sums = sig.sum(axis=1)
        if np.max(np.abs(sums[0] - sums[1])) > _ASSEMBLAGE_TOL:
            raise ValueError("the two measurements do not share a marginal")
        sig = sig.copy()
        sig.setflags(write=False)
        object.__setattr__(self, "conditionals", sig)

    def conditional(self, i: int, a: int) -> np.ndarray:
        return self.conditionals[i, a]

    @property
    def marginal(self) -> np.ndarray:
        return self.conditionals[0].sum(axis=0)


def assemblage(rho: BipartiteState, x1: FourVector, x2: FourVector) -> Assemblage:
    """Conditional states tr_A[rho (A (x) Id)] for both outcomes of both effects."""
    blocks = np.empty((2, 2, 2, 2), dtype=complex)
    for i, x in enumerate((x1, x2)):
        if not validate_effect(x):
            raise InvalidEffectError(f"measurement {i + 1} is not a valid effect")
        blocks[i, 0] = _trace_out_alice(rho, effect_to_matrix(x))
        blocks[i, 1] = _trace_out_alice(rho, effect_to_matrix(complement(x)))
    return Assemblage(blocks)


def resource_map(rho: BipartiteState) -> TransferMatrix:
    """Pauli transfer matrix of A -> rho_B^{-1/2} tr_A[rho (A^T (x) Id)] rho_B^{-1/2}.

    The transpose makes the maximally entangled state give the identity
    matrix.  The output is unital for every valid state.

    Raises:
        UnsupportedStateError: if Bob's marginal is rank-deficient; such a
            state is a product state on Bob's side and never steerable.
    """
    marginal = bob_marginal(rho)
    eigvals, eigvecs = np.linalg.eigh(marginal)
    if eigvals[0] < _RANK_TOL:
        raise UnsupportedStateError(
            f"Bob marginal eigenvalue {eigvals[0]:.3e} below {_RANK_TOL}; "
            "rank-deficient marginals are not supported"
        )
    inv_sqrt = (eigvecs / np.sqrt(np.clip(eigvals, _RANK_TOL, None))) @ eigvecs.conj().T
    out = np.empty((4, 4))
    for j, pj in enumerate(PAULI_BASIS):
        image = inv_sqrt @ _trace_out_alice(rho, pj.T) @ inv_sqrt
        for i, pi in enumerate(PAULI_BASIS):
            out[i, j] = 0.5 * np.trace(pi @ image).real
    return out


@dataclass(frozen=True, eq=False)
class SteeringScenario:
    """Shared state, Alice's two effects, dynamics, and the monotone bias."""

    rho: BipartiteState
    x1: FourVector
    x2: FourVector
    drift: DriftGenerator
    control: ControlHamiltonian
    b: float = 0.0

    def __post_init__(self) -> None:
        rho = self.rho
        if not isinstance(rho, BipartiteState):
            rho = BipartiteState(np.asarray(rho))
            object.__setattr__(self, "rho", rho)
        for name, x in (("x1", self.x1), ("x2", self.x2)):
            if not validate_effect(x):
                raise InvalidEffectError(f"{name} = {x} is not a valid effect")
        b = float(self.b)
        if not -1.0 < b < 1.0:
            raise ValueError(f"bias must lie in (-1, 1), got {b!r}")
        object.__setattr__(self, "b", b)
        if np.linalg.eigvalsh(bob_marginal(rho))[0] < _RANK_TOL:
            raise UnsupportedStateError(
                "Bob marginal is rank-deficient; the scenario is a never-steerable "
                "product state"
            )


def _check_transported_effect(y: np.ndarray) -> None:
    # CPTP dynamics and the resource map preserve validity; anything else
    # indicates a broken transfer matrix.
    if not validate_effect(FourVector.from_array(y)):
        raise InternalConsistencyError(
            f"transported effect {y} is invalid; a transfer matrix is not positive"
        )


class ScenarioEvaluator:
    """Precomputed pieces of one scenario, for repeated cost evaluations.

    Holds the resource map, the drift and control generator matrices, and
    the measurement 4-vectors as arrays.  All methods are pure; instances
    are safe to share across threads.
    """

    def __init__(self, scenario: SteeringScenario):
        self.scenario = scenario
        self.resource = resource_map(scenario.rho)
        self.drift_generator = drift_matrix(scenario.drift)
        self.control_generator = control_matrix(scenario.control)
        self._x1 = scenario.x1.as_array()
        self._x2 = scenario.x2.as_array()
        self._b = scenario.b

    def channel_value(self, channel: TransferMatrix) -> float:
        """Robustness of the effects transported by a Heisenberg channel matrix."""
        y1 = self.resource @ (channel @ self._x1)
        y2 = self.resource @ (channel @ self._x2)
        _check_transported_effect(y1)
        _check_transported_effect(y2)
        return compat._robustness_tuples(tuple(y1), tuple(y2), self._b)

    def pulse_value(self, dt: float, amplitudes: Sequence[float]) -> float:
        channel = _propagate_from(
            self.drift_generator, self.control_generator, dt, amplitudes
        )
        return self.channel_value(channel)

    def pulse_value_and_gradient(
        self, dt: float, amplitudes: Sequence[float]
    ) -> tuple[float, np.ndarray]:
        """Cost and its exact amplitude gradient; zero gradient off the slopes.

        The gradient is zero on the non-steerable plateau (value 0) and at
        non-differentiable points (sharp transported effects, which only
        occur under noiseless dynamics where the cost is locally constant).
        """
        m = len(amplitudes)
        channel, jac = _propagate_with_jacobian_from(
            self.drift_generator, self.control_generator, dt, amplitudes
        )
        y1 = self.resource @ (channel @ self._x1)
        y2 = self.resource @ (channel @ self._x2)
        _check_transported_effect(y1)
        _check_transported_effect(y2)
        value = compat._robustness_tuples(tuple(y1), tuple(y2), self._b)
        if not 0.0 < value < 0.5:
            return value, np.zeros(m)
        try:
            g1, g2 = compat._gradient_at_root(y1, y2, self._b, value)
        except (NotDifferentiableError, DegenerateRootError):
            return value, np.zeros(m)
        a1 = self.resource.T @ g1
        a2 = self.resource.T @ g2
        grad = np.array(
            [float(a1 @ (dm @ self._x1) + a2 @ (dm @ self._x2)) for dm in jac]
        )
        return value, grad


def steering_robustness(s: SteeringScenario, p: PulseSequence) -> float:
    """Robustness of the scenario's effect pair after the pulsed dynamics.

    Nonzero iff the noisy setting is steerable.

    Raises:
        InternalConsistencyError: if a transported effect is invalid, which
            cannot happen for CPTP dynamics.
    """
    return ScenarioEvaluator(s).pulse_value(p.dt, p.amplitudes)


def steering_value_and_gradient(
    s: SteeringScenario, p: PulseSequence
) -> tuple[float, np.ndarray]:
    """Steering robustness and its exact gradient in the pulse amplitudes.

    A zero value flags the non-steerable plateau, where the gradient is
    zero by convention.
    """
    return ScenarioEvaluator(s).pulse_value_and_gradient(p.dt, p.amplitudes)


def steering_gradient(s: SteeringScenario, p: PulseSequence) -> list[float]:
    """Exact gradient df/dc_k; the zero vector on the non-steerable plateau."""
    _, grad = steering_value_and_gradient(s, p)
    return [float(g) for g in grad]
