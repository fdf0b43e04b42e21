"""Joint measurability of qubit effect pairs and the noise-robustness monotone.

A pair of effects (x1, x2) is jointly measurable iff the functional

    C(x1, x2) = sqrt(<x1|x1><x1p|x1p><x2|x2><x2p|x2p>)
                - <x1|x1p><x2|x2p> + <x1|x2p><x1p|x2> + <x1|x2><x1p|x2p>

(all forms Minkowski, p marking complements) is nonnegative.  Mixing each
effect with biased classical noise,

    N_{lam,b}(x) = ((1-lam)*x0 + 2*lam*p, (1-lam)*x_vec),  p = (1+b)/2,

restores compatibility at some weight lam; the smallest such lam in (0, 1/2]
is the incompatibility robustness, zero for compatible pairs.  Its gradient
with respect to the effects follows from implicit differentiation of
C(N_lam(x1), N_lam(x2)) = 0 at the root.

C depends on a pair only through five scalars (the two identity coefficients,
the two Bloch norms, and the Bloch overlap), and classical noise acts on those
scalars directly; the root finder below exploits this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRootError,
    InvalidEffectError,
    NoiseInsufficientError,
    NotDifferentiableError,
)
from .qubit_algebra import FourVector, validate_effect

#: C(x1, x2) >= -COMPAT_TOL counts as jointly measurable.
COMPAT_TOL = 1e-12

#: Absolute tolerance guaranteed for the located root of C along the noise
#: weight.  The bisection below tightens the bracket two orders further so
#: that finite differences of the robustness stay flat-noise free.
ROOT_TOL = 1e-12

_BISECT_WIDTH = 1e-14

#: Number of equispaced scan points on [0, 1/2] used to bracket the root.
_SCAN_POINTS = 64

#: Radicands in [-RADICAND_TOL, 0) are treated as rounding noise.
_RADICAND_TOL = 1e-12

#: Minkowski norms at the root must exceed this for differentiability.
_UNSHARP_TOL = 1e-9

#: |dC/dlam| below this at the root counts as a degenerate root.
_DEGENERATE_TOL = 1e-10

_ETA = np.array([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class NoiseParams:
    """Classical noise with mixing weight lam in [0,1] and bias b in (-1,1)."""

    lam: float
    b: float = 0.0

    def __post_init__(self) -> None:
        lam = float(self.lam)
        b = float(self.b)
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"mixing weight must lie in [0, 1], got {lam!r}")
        if not -1.0 < b < 1.0:
            raise ValueError(f"bias must lie in (-1, 1), got {b!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "b", b)

    @property
    def p(self) -> float:
        """Outcome probability (1 + b)/2 of the noise coin."""
        return 0.5 * (1.0 + self.b)


def _pair_scalars(
    x1: tuple[float, float, float, float], x2: tuple[float, float, float, float]
) -> tuple[float, float, float, float, float]:
    """The five scalars (a0, |a|^2, b0, |b|^2, a.b) determining C."""
    a0, a1, a2, a3 = x1
    b0, b1, b2, b3 = x2
    va = a1 * a1 + a2 * a2 + a3 * a3
    vb = b1 * b1 + b2 * b2 + b3 * b3
    d = a1 * b1 + a2 * b2 + a3 * b3
    return a0, va, b0, vb, d


def _c_scalar(a0: float, va: float, b0: float, vb: float, d: float) -> float:
    """C from the five pair scalars.  Raises on a radicand below -1e-12."""
    ta = 2.0 - a0
    tb = 2.0 - b0
    rad = (a0 * a0 - va) * (ta * ta - va) * (b0 * b0 - vb) * (tb * tb - vb)
    if rad < 0.0:
        if rad < -_RADICAND_TOL:
            raise InvalidEffectError(
                f"negative product {rad:.3e} under the square root; inputs are not valid effects"
            )
        rad = 0.0
    return (
        math.sqrt(rad)
        - (a0 * ta + va) * (b0 * tb + vb)
        + (a0 * tb + d) * (ta * b0 + d)
        + (a0 * b0 - d) * (ta * tb - d)
    )


def _noisy_c(
    lam: float, p: float, a0: float, va: float, b0: float, vb: float, d: float
) -> float:
    """C of the pair after mixing both effects with weight-lam noise."""
    u = 1.0 - lam
    shift = 2.0 * lam * p
    u2 = u * u
    return _c_scalar(u * a0 + shift, u2 * va, u * b0 + shift, u2 * vb, u2 * d)


def c_functional(x1: FourVector, x2: FourVector) -> float:
    """Compatibility functional C; the pair is jointly measurable iff C >= 0."""
    return _c_scalar(*_pair_scalars(x1.as_tuple(), x2.as_tuple()))


def is_jointly_measurable(x1: FourVector, x2: FourVector) -> bool:
    """True iff c_functional(x1, x2) >= -1e-12."""
    return c_functional(x1, x2) >= -COMPAT_TOL


def apply_noise(x: FourVector, n: NoiseParams) -> FourVector:
    """Mix an effect with classical noise: shrink the Bloch part, shift x0."""
    u = 1.0 - n.lam
    return FourVector(
        u * x.x0 + 2.0 * n.lam * n.p, u * x.x1, u * x.x2, u * x.x3
    )


def _smallest_root(
    a0: float, va: float, b0: float, vb: float, d: float, p: float
) -> float:
    """Smallest lam in (0, 1/2] with C = 0, or 0.0 if already compatible."""
    if _c_scalar(a0, va, b0, vb, d) >= -COMPAT_TOL:
        return 0.0
    step = 0.5 / (_SCAN_POINTS - 1)
    lo = 0.0
    hi = None
    # Scan upward; the first sign change brackets the smallest root.
    for i in range(1, _SCAN_POINTS):
        lam = i * step
        if _noisy_c(lam, p, a0, va, b0, vb, d) >= 0.0:
            hi = lam
            break
        lo = lam
    if hi is None:
        raise NoiseInsufficientError(
            "C is still negative at lam = 1/2; classical noise cannot restore compatibility"
        )
    while hi - lo > _BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        if _noisy_c(mid, p, a0, va, b0, vb, d) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _robustness_tuples(
    x1: tuple[float, float, float, float],
    x2: tuple[float, float, float, float],
    b: float,
) -> float:
    """Root finder entry for callers that already hold raw components."""
    a0, va, b0, vb, d = _pair_scalars(x1, x2)
    return _smallest_root(a0, va, b0, vb, d, 0.5 * (1.0 + b))


def robustness(x1: FourVector, x2: FourVector, b: float = 0.0) -> float:
    """Incompatibility robustness of a valid effect pair under bias-b noise.

    Returns 0 for jointly measurable pairs, otherwise the smallest noise
    weight in (0, 1/2] restoring compatibility, located to 1e-12.

    Raises:
        InvalidEffectError: if either input is not a valid effect.
        NoiseInsufficientError: if C stays negative on all of [0, 1/2].
    """
    if not -1.0 < b < 1.0:
        raise ValueError(f"bias must lie in (-1, 1), got {b!r}")
    for name, x in (("x1", x1), ("x2", x2)):
        if not validate_effect(x):
            raise InvalidEffectError(f"{name} = {x} is not a valid effect")
    return _robustness_tuples(x1.as_tuple(), x2.as_tuple(), b)


def _c_value_and_grads(
    y1: np.ndarray, y2: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """C and its total derivatives with respect to each effect 4-vector.

    The totals include the chain through each complement (d y_perp / d y is
    minus the identity).  Requires all four Minkowski norms positive.
    """
    y1p = np.array([2.0 - y1[0], -y1[1], -y1[2], -y1[3]])
    y2p = np.array([2.0 - y2[0], -y2[1], -y2[2], -y2[3]])
    e1, e1p, e2, e2p = _ETA * y1, _ETA * y1p, _ETA * y2, _ETA * y2p
    n1 = float(e1 @ y1)
    n1p = float(e1p @ y1p)
    n2 = float(e2 @ y2)
    n2p = float(e2p @ y2p)
    m11p = float(e1 @ y1p)
    m22p = float(e2 @ y2p)
    m12p = float(e1 @ y2p)
    m1p2 = float(e1p @ y2)
    m12 = float(e1 @ y2)
    m1p2p = float(e1p @ y2p)
    s = math.sqrt(n1 * n1p * n2 * n2p)
    c = s - m11p * m22p + m12p * m1p2 + m12 * m1p2p
    # Partials of C with the four slots (y1, y1p, y2, y2p) independent.
    d_y1 = (n1p * n2 * n2p / s) * e1 - m22p * e1p + m1p2 * e2p + m1p2p * e2
    d_y1p = (n1 * n2 * n2p / s) * e1p - m22p * e1 + m12p * e2 + m12 * e2p
    d_y2 = (n1 * n1p * n2p / s) * e2 - m11p * e2p + m12p * e1p + m1p2p * e1
    d_y2p = (n1 * n1p * n2 / s) * e2p - m11p * e2 + m1p2 * e1 + m12 * e1p
    return c, d_y1 - d_y1p, d_y2 - d_y2p


def _gradient_at_root(
    x1: np.ndarray, x2: np.ndarray, b: float, lam: float
) -> tuple[np.ndarray, np.ndarray]:
    """(dI/dx1, dI/dx2) given the root lam in (0, 1/2) for the pair.

    Raises:
        NotDifferentiableError: if a noisy effect at the root is sharp.
        DegenerateRootError: if C is stationary in lam at the root.
    """
    p = 0.5 * (1.0 + b)
    u = 1.0 - lam
    shift = 2.0 * lam * p
    y1 = np.array([u * x1[0] + shift, u * x1[1], u * x1[2], u * x1[3]])
    y2 = np.array([u * x2[0] + shift, u * x2[1], u * x2[2], u * x2[3]])
    for y in (y1, y2):
        n = y[0] * y[0] - y[1] * y[1] - y[2] * y[2] - y[3] * y[3]
        t = 2.0 - y[0]
        npp = t * t - y[1] * y[1] - y[2] * y[2] - y[3] * y[3]
        if n <= _UNSHARP_TOL or npp <= _UNSHARP_TOL:
            raise NotDifferentiableError(
                "a noisy effect at the root is sharp; the square root in C is not differentiable"
            )
    _, g1, g2 = _c_value_and_grads(y1, y2)
    # dN/dlam at fixed x, for each input.
    u1 = np.array([2.0 * p - x1[0], -x1[1], -x1[2], -x1[3]])
    u2 = np.array([2.0 * p - x2[0], -x2[1], -x2[2], -x2[3]])
    dc_dlam = float(g1 @ u1 + g2 @ u2)
    if abs(dc_dlam) < _DEGENERATE_TOL:
        raise DegenerateRootError(
            f"dC/dlam = {dc_dlam:.3e} at the root; implicit differentiation is ill-posed"
        )
    scale = -u / dc_dlam
    return scale * g1, scale * g2


def robustness_gradient(
    x1: FourVector, x2: FourVector, b: float = 0.0
) -> tuple[FourVector, FourVector]:
    """Exact gradient (dI/dx1, dI/dx2) of the robustness by implicit differentiation.

    Requires the robustness to lie strictly inside (0, 1/2) and both noisy
    effects at the root to be strictly unsharp.

    Raises:
        NotDifferentiableError: preconditions violated (compatible pairs
            included; callers treat the flat compatible region as gradient zero).
        DegenerateRootError: C stationary in the noise weight at the root.
    """
    lam = robustness(x1, x2, b)
    if not 0.0 < lam < 0.5:
        raise NotDifferentiableError(
            f"robustness {lam!r} is not in the open interval (0, 1/2)"
        )
    g1, g2 = _gradient_at_root(x1.as_array(), x2.as_array(), b, lam)
    return FourVector.from_array(g1), FourVector.from_array(g2)
