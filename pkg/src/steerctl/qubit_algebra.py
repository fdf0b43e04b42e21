"""Qubit effects in the Minkowski 4-vector representation.

A binary-POVM effect A with 0 <= A <= Id is encoded as the real 4-vector
x = (x0, x1, x2, x3) through A = (x0*Id + x.sigma)/2.  Effect validity is
membership of x and its complement x_perp = (2 - x0, -x_vec) in the forward
cone of the Minkowski form <x|y> = x0*y0 - x1*y1 - x2*y2 - x3*y3.

The Pauli basis order (Id, sigma_x, sigma_y, sigma_z) is fixed here and is
used by every 4x4 transfer matrix in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidEffectError

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

#: Fixed basis order; index 0 is the identity.
PAULI_BASIS = (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z)

#: Tolerance on Minkowski norms when deciding effect validity.
EFFECT_TOL = 1e-10

_HERMITIAN_TOL = 1e-12
_STATE_TOL = 1e-10

# 2x2 Hermitian matrices and 4x4 real transfer matrices are plain ndarrays;
# these aliases only name the roles they play in signatures.
HermitianMatrix2 = np.ndarray


@dataclass(frozen=True)
class FourVector:
    """Effect A = (x0*Id + x.sigma)/2 as its Pauli coefficients."""

    x0: float
    x1: float
    x2: float
    x3: float

    def __post_init__(self) -> None:
        for name in ("x0", "x1", "x2", "x3"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise InvalidEffectError(f"non-finite component {name}={value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, arr: Iterable[float]) -> "FourVector":
        a = np.asarray(arr, dtype=float).reshape(4)
        return cls(a[0], a[1], a[2], a[3])

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2, self.x3])

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.x1, self.x2, self.x3)


def minkowski(x: FourVector, y: FourVector) -> float:
    """Minkowski form <x|y> = x0*y0 - x1*y1 - x2*y2 - x3*y3."""
    return x.x0 * y.x0 - x.x1 * y.x1 - x.x2 * y.x2 - x.x3 * y.x3


def complement(x: FourVector) -> FourVector:
    """4-vector of Id - A: (2 - x0, -x1, -x2, -x3).  An involution."""
    return FourVector(2.0 - x.x0, -x.x1, -x.x2, -x.x3)


def effect_to_matrix(x: FourVector) -> HermitianMatrix2:
    """Hermitian 2x2 form (x0*Id + x.sigma)/2 of the effect."""
    return 0.5 * (
        x.x0 * SIGMA_0 + x.x1 * SIGMA_X + x.x2 * SIGMA_Y + x.x3 * SIGMA_Z
    )


def effect_from_matrix(a: HermitianMatrix2) -> FourVector:
    """Pauli coefficients x0 = tr(A), xk = tr(A sigma_k) of a Hermitian A.

    Raises:
        InvalidEffectError: if A is not Hermitian within 1e-12 or not 2x2.
    """
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise InvalidEffectError(f"expected a 2x2 matrix, got shape {a.shape}")
    if np.max(np.abs(a - a.conj().T)) > _HERMITIAN_TOL:
        raise InvalidEffectError("matrix is not Hermitian within tolerance")
    return FourVector(
        float(np.trace(a).real),
        float(np.trace(a @ SIGMA_X).real),
        float(np.trace(a @ SIGMA_Y).real),
        float(np.trace(a @ SIGMA_Z).real),
    )


def validate_effect(x: FourVector, tol: float = EFFECT_TOL) -> bool:
    """True iff x and its complement lie in the forward cone.

    Equivalent to 0 <= A <= Id on the matrix form; boundary (sharp)
    effects count as valid.
    """
    v = x.x1 * x.x1 + x.x2 * x.x2 + x.x3 * x.x3
    if x.x0 < -tol or 2.0 - x.x0 < -tol:
        return False
    if x.x0 * x.x0 - v < -tol:
        return False
    if (2.0 - x.x0) * (2.0 - x.x0) - v < -tol:
        return False
    return True


def sharp_effect(axis: Iterable[float]) -> FourVector:
    """Rank-one projector effect (1, n) for the unit vector n along axis."""
    n = np.asarray(axis, dtype=float).reshape(3)
    norm = float(np.linalg.norm(n))
    if norm == 0.0 or not np.isfinite(norm):
        raise InvalidEffectError("axis must be a nonzero finite 3-vector")
    n = n / norm
    return FourVector(1.0, n[0], n[1], n[2])


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Two-qubit density matrix in the product basis |00>,|01>,|10>,|11>."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > _STATE_TOL:
            raise ValueError("state matrix is not Hermitian within tolerance")
        if abs(np.trace(rho).real - 1.0) > _STATE_TOL or abs(np.trace(rho).imag) > _STATE_TOL:
            raise ValueError("state matrix does not have unit trace")
        eigs = np.linalg.eigvalsh(rho)
        if eigs[0] < -_STATE_TOL:
            raise ValueError(f"state matrix is not positive semidefinite (min eig {eigs[0]:.3e})")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def max_entangled(cls) -> "BipartiteState":
        """(|00> + |11>)/sqrt(2) as a density matrix."""
        psi = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def werner(cls, v: float) -> "BipartiteState":
        """Isotropic mixture v*|Phi+><Phi+| + (1 - v)*Id/4."""
        v = float(v)
        return cls(v * cls.max_entangled().matrix + (1.0 - v) * np.eye(4) / 4.0)

    @classmethod
    def product(cls, rho_a: np.ndarray, rho_b: np.ndarray) -> "BipartiteState":
        """Tensor product of two single-qubit density matrices."""
        return cls(np.kron(np.asarray(rho_a, dtype=complex), np.asarray(rho_b, dtype=complex)))
