"""Heisenberg-picture Markovian dynamics as 4x4 Pauli transfer matrices.

The duration-T evolution under piecewise-constant control amplitudes
(c_1, ..., c_m) factorizes into per-slot exponentials.  In the Schrodinger
picture the latest slot acts last (leftmost); the Heisenberg adjoint used
here reverses that order, so

    M = exp(dt*L_{c_1}) @ exp(dt*L_{c_2}) @ ... @ exp(dt*L_{c_m}),

with L_c = drift_matrix + c * control_matrix acting on effect 4-vectors.
Exact derivatives of M with respect to the amplitudes come from Frechet
derivatives of the matrix exponential via an augmented block matrix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .qubit_algebra import PAULI_BASIS, SIGMA_X, SIGMA_Y, SIGMA_Z

#: 4x4 real matrices in the (Id, sigma_x, sigma_y, sigma_z) basis.
TransferMatrix = np.ndarray

_UNITAL_TOL = 1e-12


class DriftKind(enum.Enum):
    AMPLITUDE_DAMPING = "amplitude_damping"
    DEPHASING = "dephasing"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class DriftGenerator:
    """Uncontrolled Heisenberg generator, built-in or a custom Pauli matrix.

    Custom generators must annihilate the identity direction (zero first
    column), which is unitality of the dual channel.
    """

    kind: DriftKind
    gamma: float = 0.0
    custom_matrix: np.ndarray | None = None

    def __post_init__(self) -> None:
        kind = DriftKind(self.kind)
        object.__setattr__(self, "kind", kind)
        gamma = float(self.gamma)
        if not np.isfinite(gamma) or gamma < 0.0:
            raise ValueError(f"rate gamma must be finite and >= 0, got {gamma!r}")
        object.__setattr__(self, "gamma", gamma)
        if kind is DriftKind.CUSTOM:
            if self.custom_matrix is None:
                raise ValueError("custom drift requires a 4x4 generator matrix")
            mat = np.asarray(self.custom_matrix, dtype=float)
            if mat.shape != (4, 4):
                raise ValueError(f"custom generator must be 4x4, got shape {mat.shape}")
            if np.max(np.abs(mat[:, 0])) > _UNITAL_TOL:
                raise ValueError(
                    "custom generator must annihilate the identity direction "
                    "(first column zero)"
                )
            mat = mat.copy()
            mat.setflags(write=False)
            object.__setattr__(self, "custom_matrix", mat)
        elif self.custom_matrix is not None:
            raise ValueError("custom_matrix is only allowed with the custom kind")

    @classmethod
    def amplitude_damping(cls, gamma: float) -> "DriftGenerator":
        """Decay toward the sigma_z = -1 ground state at rate gamma."""
        return cls(DriftKind.AMPLITUDE_DAMPING, gamma)

    @classmethod
    def dephasing(cls, gamma: float) -> "DriftGenerator":
        """Dephasing in the sigma_y basis at rate gamma."""
        return cls(DriftKind.DEPHASING, gamma)

    @classmethod
    def custom(cls, matrix: np.ndarray) -> "DriftGenerator":
        return cls(DriftKind.CUSTOM, 0.0, matrix)


@dataclass(frozen=True)
class ControlHamiltonian:
    """Control Hamiltonian h[0]*sigma_x + h[1]*sigma_y + h[2]*sigma_z."""

    h: tuple[float, float, float]

    def __post_init__(self) -> None:
        h = tuple(float(v) for v in self.h)
        if len(h) != 3 or not all(np.isfinite(v) for v in h):
            raise ValueError(f"h must be a finite 3-vector, got {self.h!r}")
        object.__setattr__(self, "h", h)

    def as_matrix(self) -> np.ndarray:
        return self.h[0] * SIGMA_X + self.h[1] * SIGMA_Y + self.h[2] * SIGMA_Z


@dataclass(frozen=True)
class PulseSequence:
    """Piecewise-constant amplitudes, one per slot of duration dt."""

    dt: float
    amplitudes: tuple[float, ...]

    def __post_init__(self) -> None:
        dt = float(self.dt)
        if not np.isfinite(dt) or dt <= 0.0:
            raise ValueError(f"slot duration dt must be finite and > 0, got {dt!r}")
        amps = tuple(float(c) for c in self.amplitudes)
        if len(amps) < 1:
            raise ValueError("a pulse sequence needs at least one slot")
        if not all(np.isfinite(c) for c in amps):
            raise ValueError("pulse amplitudes must be finite")
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, m: int, total_time: float) -> "PulseSequence":
        """m slots of zero amplitude spanning total_time."""
        if m < 1:
            raise ValueError("m must be >= 1")
        return cls(float(total_time) / m, (0.0,) * m)

    @property
    def m(self) -> int:
        return len(self.amplitudes)

    @property
    def total_time(self) -> float:
        return self.dt * len(self.amplitudes)

    def as_array(self) -> np.ndarray:
        return np.array(self.amplitudes)


def pauli_transfer_matrix(apply_map: Callable[[np.ndarray], np.ndarray]) -> TransferMatrix:
    """4x4 Pauli-basis matrix of a Hermiticity-preserving linear map on 2x2 matrices."""
    out = np.empty((4, 4))
    for j, pj in enumerate(PAULI_BASIS):
        image = np.asarray(apply_map(pj), dtype=complex)
        for i, pi in enumerate(PAULI_BASIS):
            out[i, j] = 0.5 * np.trace(pi @ image).real
    return out


def drift_matrix(g: DriftGenerator) -> TransferMatrix:
    """Pauli-basis matrix of the Heisenberg drift generator.

    Amplitude damping (lowering operator |g><e|, sigma_z|e> = +|e>) damps
    sigma_x and sigma_y at rate gamma and sends sigma_z to
    -2*gamma*(Id + sigma_z); dephasing in the sigma_y basis damps sigma_x
    and sigma_z at rate 2*gamma and leaves sigma_y fixed.
    """
    if g.kind is DriftKind.CUSTOM:
        return np.array(g.custom_matrix)
    gm = g.gamma
    if g.kind is DriftKind.AMPLITUDE_DAMPING:
        return np.array(
            [
                [0.0, 0.0, 0.0, -2.0 * gm],
                [0.0, -gm, 0.0, 0.0],
                [0.0, 0.0, -gm, 0.0],
                [0.0, 0.0, 0.0, -2.0 * gm],
            ]
        )
    return np.diag([0.0, -2.0 * gm, 0.0, -2.0 * gm])


def control_matrix(h: ControlHamiltonian) -> TransferMatrix:
    """Pauli-basis matrix of A -> i[H, A], the Heisenberg control generator.

    Generates rotations of the Bloch part: zero first row and column,
    antisymmetric 3x3 block.
    """
    hm = h.as_matrix()
    return pauli_transfer_matrix(lambda a: 1j * (hm @ a - a @ hm))


def _slot_generators(
    l0: np.ndarray, k: np.ndarray, dt: float, amplitudes: Sequence[float]
) -> np.ndarray:
    amps = np.asarray(amplitudes, dtype=float)
    return dt * (l0[None, :, :] + amps[:, None, None] * k[None, :, :])


def _propagate_factors(factors: np.ndarray) -> np.ndarray:
    return reduce(np.matmul, factors)


def _propagate_from(
    l0: np.ndarray, k: np.ndarray, dt: float, amplitudes: Sequence[float]
) -> TransferMatrix:
    return _propagate_factors(scipy.linalg.expm(_slot_generators(l0, k, dt, amplitudes)))


def propagate(
    g: DriftGenerator, h: ControlHamiltonian, p: PulseSequence
) -> TransferMatrix:
    """Heisenberg transfer matrix of the full pulse sequence.

    Slot factors multiply in pulse order from the left: the first slot acts
    first on the effect, which is the reverse of the Schrodinger order.
    """
    return _propagate_from(drift_matrix(g), control_matrix(h), p.dt, p.amplitudes)


def propagate_schrodinger(
    g: DriftGenerator, h: ControlHamiltonian, p: PulseSequence
) -> TransferMatrix:
    """Schrodinger transfer matrix: transposed slot generators, last slot leftmost."""
    gens = _slot_generators(drift_matrix(g), control_matrix(h), p.dt, p.amplitudes)
    factors = scipy.linalg.expm(np.transpose(gens, (0, 2, 1)))
    return _propagate_factors(factors[::-1])


def expm_frechet(a: TransferMatrix, e: TransferMatrix) -> tuple[TransferMatrix, TransferMatrix]:
    """(exp(A), directional derivative of exp at A along E).

    Both come out of one exponential of the block matrix [[A, E], [0, A]]:
    the top-left block is exp(A) and the top-right block is the derivative.
    """
    a = np.asarray(a, dtype=float)
    e = np.asarray(e, dtype=float)
    n = a.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = a
    block[:n, n:] = e
    block[n:, n:] = a
    f = scipy.linalg.expm(block)
    return f[:n, :n], f[:n, n:]


def _propagate_with_jacobian_from(
    l0: np.ndarray, k: np.ndarray, dt: float, amplitudes: Sequence[float]
) -> tuple[TransferMatrix, list[TransferMatrix]]:
    """Transfer matrix and its exact derivative per amplitude, shared work.

    All m augmented 8x8 exponentials are evaluated in one batched call; the
    per-slot derivative of the product is prefix @ frechet_block @ suffix.
    """
    gens = _slot_generators(l0, k, dt, amplitudes)
    m = gens.shape[0]
    aug = np.zeros((m, 8, 8))
    aug[:, :4, :4] = gens
    aug[:, 4:, 4:] = gens
    aug[:, :4, 4:] = dt * k
    f = scipy.linalg.expm(aug)
    factors = f[:, :4, :4]
    frechet = f[:, :4, 4:]
    left = np.empty((m, 4, 4))
    left[0] = np.eye(4)
    for j in range(1, m):
        left[j] = left[j - 1] @ factors[j - 1]
    right = np.empty((m, 4, 4))
    right[m - 1] = np.eye(4)
    for j in range(m - 2, -1, -1):
        right[j] = factors[j + 1] @ right[j + 1]
    total = left[m - 1] @ factors[m - 1]
    jac = [left[j] @ frechet[j] @ right[j] for j in range(m)]
    return total, jac


def propagator_jacobian(
    g: DriftGenerator, h: ControlHamiltonian, p: PulseSequence
) -> list[TransferMatrix]:
    """Exact derivatives dM/dc_k of the Heisenberg transfer matrix, k = 1..m."""
    return _propagate_with_jacobian_from(
        drift_matrix(g), control_matrix(h), p.dt, p.amplitudes
    )[1]


def propagate_with_jacobian(
    g: DriftGenerator, h: ControlHamiltonian, p: PulseSequence
) -> tuple[TransferMatrix, list[TransferMatrix]]:
    """propagate and propagator_jacobian in one pass over the slot exponentials."""
    return _propagate_with_jacobian_from(
        drift_matrix(g), control_matrix(h), p.dt, p.amplitudes
    )


def is_unital(m: TransferMatrix, tol: float = 1e-10) -> bool:
    """True iff the transfer matrix fixes the identity effect (2,0,0,0)."""
    m = np.asarray(m, dtype=float)
    return bool(
        abs(m[0, 0] - 1.0) <= tol and np.max(np.abs(m[1:, 0])) <= tol
    )
