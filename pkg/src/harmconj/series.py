"""Analytic and harmonic functions on the unit disc.

Analytic functions are stored as finite power series (polynomials).  A
harmonic function ``u`` is carried by its analytic completion ``f`` with
``u = Re f``; the conjugate ``v = Im f`` is normalised so that ``v(0) = 0``.

All evaluators accept scalars or numpy arrays of complex points.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import roots_legendre

# Radius factors (times delta_b(z)/2) of the rings sampled by ``local_sup``.
RING_FACTORS = (0.25, 0.5, 0.75, 0.9, 0.99)
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class PowerSeries:
    """Finite power series ``f(z) = sum_n coeffs[n] z**n``."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("a power series needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.flags.writeable = False
        self._coeffs = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree(self) -> int:
        return self._coeffs.size - 1

    def __call__(self, z):
        return P.polyval(np.asarray(z, dtype=complex), self._coeffs)

    def derivative(self) -> "PowerSeries":
        if self.degree == 0:
            return PowerSeries([0.0])
        return PowerSeries(P.polyder(self._coeffs))

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        return PowerSeries(P.polyadd(self._coeffs, other.coeffs))

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        return PowerSeries(P.polysub(self._coeffs, other.coeffs))

    def __mul__(self, scalar) -> "PowerSeries":
        return PowerSeries(self._coeffs * complex(scalar))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return np.array_equal(self._coeffs, other.coeffs)

    def __hash__(self):
        return hash(self._coeffs.tobytes())

    def __repr__(self):
        return f"PowerSeries({self._coeffs.tolist()!r})"

    def recentered(self) -> "PowerSeries":
        """Return ``f - f(0)``."""
        c = self._coeffs.copy()
        c[0] = 0.0
        return PowerSeries(c)


def evaluate(ps: PowerSeries, z):
    """Evaluate ``ps`` at ``z`` (Horner)."""
    return ps(z)


def derivative(ps: PowerSeries) -> PowerSeries:
    return ps.derivative()


@dataclass(frozen=True)
class HarmonicFunction:
    """Harmonic ``u = Re f`` given by its completion ``f``.

    The completion must satisfy ``Im f(0) = 0`` so that the conjugate
    vanishes at the origin; use :meth:`from_completion` to normalise an
    arbitrary ``f``.
    """

    completion: PowerSeries

    def __post_init__(self):
        if abs(self.completion.coeffs[0].imag) > 0.0:
            raise ValueError("completion must have a real constant term (v(0) = 0)")

    @classmethod
    def from_completion(cls, f: PowerSeries) -> "HarmonicFunction":
        c = f.coeffs.copy()
        c[0] = c[0].real
        return cls(PowerSeries(c))

    @classmethod
    def from_coeffs(cls, coeffs) -> "HarmonicFunction":
        return cls.from_completion(PowerSeries(coeffs))

    def __call__(self, z):
        return np.real(self.completion(z))

    def conjugate_values(self, z):
        return np.imag(self.completion(z))

    @property
    def value_at_origin(self) -> float:
        return float(self.completion.coeffs[0].real)


def harmonic_conjugate(u: HarmonicFunction) -> HarmonicFunction:
    """Return the conjugate ``v`` (with ``v(0) = 0``) as a harmonic function.

    ``Re(-i f) = Im f``; subtracting the constant keeps the normalisation, so
    conjugating twice gives ``-(u - u(0))``.
    """
    f = u.completion.recentered()
    return HarmonicFunction(PowerSeries(-1j * f.coeffs))


def boundary_distance(z):
    """``1 - |z|``, the distance to the unit circle."""
    return 1.0 - np.abs(z)


class ShiftKind(enum.Enum):
    RADIAL = "radial"
    ROTATED = "rotated"


def _unit_direction(z):
    # np.angle(0) = 0, matching the convention arg(0) = 0; also safe for subnormal z
    return np.exp(1j * np.angle(np.asarray(z, dtype=complex)))


def shifted_points(z, kind: ShiftKind, eta: float):
    """Points ``z + e^{i arg z} eta delta_b(z)`` (or rotated by ``i``)."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("points must lie in the open unit disc")
    step = _unit_direction(z) * eta * boundary_distance(z)
    if kind is ShiftKind.ROTATED:
        step = 1j * step
    return z + step


def shift_eval(u: HarmonicFunction, kind: ShiftKind, eta: float, z):
    return u(shifted_points(z, kind, eta))


def local_sample_offsets(samples: int) -> np.ndarray:
    """Unit-scale offsets of the ``local_sup`` sample set.

    The center plus ``samples`` points on each ring.  Ring angles follow a
    golden-ratio sequence so the set for ``samples`` contains the set for
    any smaller count.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    angles = 2.0 * np.pi * np.mod(np.arange(samples) * _GOLDEN, 1.0)
    ring = np.exp(1j * angles)
    parts = [np.zeros(1, dtype=complex)]
    parts.extend(fac * ring for fac in RING_FACTORS)
    return np.concatenate(parts)


def local_sup(g, z, samples: int = 16):
    """Sampled ``M_c g(z) = sup{|g(w)| : |w - z| < delta_b(z)/2}``.

    ``g`` must accept complex arrays.  Vectorised over ``z``.  The sample
    set is deterministic and nested in ``samples``, so the result is a
    lower bound of the true supremum that is nondecreasing in ``samples``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("local_sup needs |z| < 1 (the local disc is empty otherwise)")
    offsets = local_sample_offsets(samples)
    radius = boundary_distance(z) / 2.0
    pts = z[..., None] + radius[..., None] * offsets
    return np.max(np.abs(g(pts)), axis=-1)


@lru_cache(maxsize=16)
def _unit_interval_rule(n: int):
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


def taylor_remainder_residual(f: PowerSeries, z: complex, w: complex, quad_points: int = 64) -> float:
    """Residual of the second-order Taylor identity for ``u = Re f``.

    Computes ``|u(w) - u(z) - Re[f'(z)(w-z)] - int_0^1 Re[f''(z+s(w-z))(w-z)^2](1-s) ds|``
    with a ``quad_points`` Gauss-Legendre rule on [0, 1].
    """
    if quad_points < 2:
        raise ValueError("quad_points must be >= 2")
    if abs(z) >= 1.0 or abs(w) >= 1.0:
        # convexity: both endpoints inside implies the whole segment is
        raise ValueError("segment leaves the open unit disc")
    fp = f.derivative()
    fpp = fp.derivative()
    s, wts = _unit_interval_rule(quad_points)
    step = w - z
    integrand = np.real(fpp(z + s * step) * step**2) * (1.0 - s)
    lhs = np.real(f(w)) - np.real(f(z))
    rhs = np.real(fp(z) * step) + float(np.dot(wts, integrand))
    return float(abs(lhs - rhs))
