"""Area quadrature on the unit disc and weighted L^p quasi-norms.

The default grid uses Gauss-Legendre nodes in ``t`` mapped by
``r = 1 - (1 - t)**3`` so nodes cluster toward the unit circle, and the
trapezoid rule in the angle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import roots_legendre

TWO_PI = 2.0 * np.pi


def _legendre01(n: int):
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


def clustered_radial_rule(n: int, r_lo: float = 0.0, r_hi: float = 1.0):
    """Nodes and ``dr`` weights on ``[r_lo, r_hi]`` clustered toward ``r_hi``.

    Uses ``r = r_hi - (r_hi - r_lo)(1 - t)**3``, which absorbs integrable
    endpoint behaviour like ``(1 - r)**alpha`` with ``alpha > -1``.
    """
    t, wt = _legendre01(n)
    span = r_hi - r_lo
    r = r_hi - span * (1.0 - t) ** 3
    dr = 3.0 * span * (1.0 - t) ** 2 * wt
    return r, dr


def plain_radial_rule(n: int, r_lo: float, r_hi: float):
    t, wt = _legendre01(n)
    return r_lo + (r_hi - r_lo) * t, (r_hi - r_lo) * wt


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Product rule on the disc: radial nodes times uniform angles.

    ``radial_weights`` already include the ``r dr`` Jacobian, so the area
    weight of node ``(i, k)`` is ``radial_weights[i] * 2 pi / angular_count``.
    """

    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    angular_count: int
    refinement: str = "cubic"

    def __post_init__(self):
        r = np.asarray(self.radial_nodes, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise ValueError("radial_nodes must be a non-empty 1-D array")
        if np.any(r <= 0.0) or np.any(r >= 1.0) or np.any(np.diff(r) <= 0.0):
            raise ValueError("radial nodes must be strictly increasing in (0, 1)")
        if self.angular_count < 1:
            raise ValueError("angular_count must be positive")

    @classmethod
    def gauss(cls, n_radial: int = 128, n_angular: int = 512) -> "PolarGrid":
        r, dr = clustered_radial_rule(n_radial)
        return cls(r, r * dr, n_angular, "cubic")

    @classmethod
    def midpoint(cls, n_radial: int = 2048, n_angular: int = 256) -> "PolarGrid":
        """Uniform midpoint rings; suited to indicator (distribution) sums."""
        edges = np.linspace(0.0, 1.0, n_radial + 1)
        r = 0.5 * (edges[1:] + edges[:-1])
        # exact ring areas / 2pi, so sum of weights is exactly pi
        w = 0.5 * (edges[1:] ** 2 - edges[:-1] ** 2)
        return cls(r, w, n_angular, "none")

    @cached_property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.angular_count) / self.angular_count

    @cached_property
    def points(self) -> np.ndarray:
        """Complex nodes, shape ``(n_radial, n_angular)``."""
        return self.radial_nodes[:, None] * np.exp(1j * self.angles)[None, :]

    @cached_property
    def weights(self) -> np.ndarray:
        w = self.radial_weights[:, None] * (TWO_PI / self.angular_count)
        return np.broadcast_to(w, (self.radial_nodes.size, self.angular_count))

    @property
    def shape(self):
        return (self.radial_nodes.size, self.angular_count)


DEFAULT_GRID = PolarGrid.gauss()


def _unit_weight(z):
    return np.ones(np.shape(z))


@dataclass(frozen=True)
class NormSpec:
    """``L^p(w dA)`` with ``0 < p < inf``; ``weight=None`` means ``w = 1``."""

    p: float
    weight: object = field(default=None)

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p > 0):
            raise ValueError("p must be > 0")

    def weight_values(self, z):
        return _unit_weight(z) if self.weight is None else self.weight(z)


def integrate(fn, grid: PolarGrid = DEFAULT_GRID) -> float:
    """Sum ``fn(node) * area_weight`` over the grid."""
    vals = np.asarray(fn(grid.points), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand is not finite at every grid node")
    return float(np.sum(vals * grid.weights))


def weighted_p_norm(g, spec: NormSpec, grid: PolarGrid = DEFAULT_GRID) -> float:
    """``(int |g|^p w dA)^(1/p)``; a quasi-norm when ``p < 1``."""
    z = grid.points
    vals = np.abs(np.asarray(g(z))) ** spec.p * spec.weight_values(z)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite values in weighted norm integrand")
    return float(np.sum(vals * grid.weights)) ** (1.0 / spec.p)


def weighted_p_norm_values(values, spec: NormSpec, grid: PolarGrid = DEFAULT_GRID, weight_values=None) -> float:
    """Same as :func:`weighted_p_norm` for values precomputed on ``grid.points``."""
    w = spec.weight_values(grid.points) if weight_values is None else weight_values
    vals = np.abs(values) ** spec.p * w
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite values in weighted norm integrand")
    return float(np.sum(vals * grid.weights)) ** (1.0 / spec.p)


def integral_mean(f, r: float, p: float, angular_points: int = 1024) -> float:
    """Unnormalised integral mean ``(int_0^{2pi} |f(r e^{it})|^p dt)^(1/p)``."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    if p <= 0:
        raise ValueError("p must be > 0")
    theta = TWO_PI * np.arange(angular_points) / angular_points
    vals = np.abs(f(r * np.exp(1j * theta))) ** p
    return float(TWO_PI * np.mean(vals)) ** (1.0 / p)


def distribution_function(g, lam: float, measure=None, grid: PolarGrid | None = None) -> float:
    """``mu{z : g(z) >= lam}`` by node-membership counting.

    ``measure`` is anything with ``weight`` and ``grid`` attributes (see
    :class:`harmconj.weights.MeasureSpec`); ``None`` means Lebesgue area on
    ``grid``.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if grid is None:
        grid = measure.grid if measure is not None else DEFAULT_GRID
    z = grid.points
    w = grid.weights if measure is None else grid.weights * measure.weight(z)
    mask = np.asarray(g(z)) >= lam
    return float(np.sum(np.where(mask, w, 0.0)))


def sector_rule(r_lo: float, r_hi: float, theta_edges, n_r: int = 48, n_theta: int = 8):
    """Quadrature for annular sectors sharing one radial range.

    ``theta_edges`` holds ``m + 1`` increasing angles delimiting ``m``
    sectors.  Returns ``(points, weights)`` of shape ``(m, n_r * n_theta)``.
    The radial rule clusters toward ``r_hi`` when ``r_hi == 1``.
    """
    edges = np.asarray(theta_edges, dtype=float)
    if r_hi >= 1.0:
        r, dr = clustered_radial_rule(n_r, r_lo, 1.0)
    else:
        r, dr = plain_radial_rule(n_r, r_lo, r_hi)
    s, ws = _legendre01(n_theta)
    lo = edges[:-1, None]
    width = np.diff(edges)[:, None]
    th = lo + width * s[None, :]
    wth = width * ws[None, :]
    pts = r[None, :, None] * np.exp(1j * th[:, None, :])
    wts = (r * dr)[None, :, None] * wth[:, None, :]
    m = edges.size - 1
    return pts.reshape(m, -1), wts.reshape(m, -1)
