"""Weights on the disc, Bekolle-Bonami quotients and the maximal function."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .quadrature import DEFAULT_GRID, PolarGrid, _legendre01, sector_rule

# A quotient that grows by more than this factor between consecutive
# resolutions of the ladder is reported as divergent.
DIVERGENCE_GROWTH = 10.0
RESOLUTION_STEP = 4


class DivergenceError(ArithmeticError):
    """A weight integral does not converge under grid refinement."""


class WeightFamily(enum.Enum):
    UNIT = "unit"
    POWER = "power"
    RADIAL_TABLE = "table"
    ANGULAR_PERTURBED = "perturbed"


@dataclass(frozen=True)
class WeightSpec:
    """Positive weight ``w`` on the unit disc.

    Build instances with the ``unit``/``power``/``radial_table``/
    ``angular_perturbed`` constructors; calling the spec evaluates ``w``.
    """

    family: WeightFamily
    alpha: float = 0.0
    table: tuple = ()
    base: "WeightSpec | None" = None
    amplitude: float = 0.0
    frequency: int = 0
    label: str = field(default="", compare=False)

    @classmethod
    def unit(cls) -> "WeightSpec":
        return cls(WeightFamily.UNIT, label="unit")

    @classmethod
    def power(cls, alpha: float) -> "WeightSpec":
        """``(1 - |z|)**alpha``."""
        return cls(WeightFamily.POWER, alpha=float(alpha), label=f"power:{float(alpha):g}")

    @classmethod
    def radial_table(cls, radii, values, label: str = "table") -> "WeightSpec":
        r = np.asarray(radii, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size == 0:
            raise ValueError("radial table needs matching 1-D radii and values")
        if np.any(r <= 0) or np.any(r >= 1) or np.any(np.diff(r) <= 0):
            raise ValueError("table radii must be strictly increasing in (0, 1)")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ValueError("table values must be positive and finite")
        return cls(WeightFamily.RADIAL_TABLE, table=(tuple(r), tuple(v)), label=label)

    @classmethod
    def angular_perturbed(cls, base: "WeightSpec", amplitude: float, frequency: int) -> "WeightSpec":
        """``base(z) * (1 + amplitude * cos(frequency * arg z))``."""
        if not 0.0 <= amplitude < 1.0:
            raise ValueError("amplitude must lie in [0, 1) to keep the weight positive")
        return cls(
            WeightFamily.ANGULAR_PERTURBED,
            base=base,
            amplitude=float(amplitude),
            frequency=int(frequency),
            label=f"perturbed({base.label}):{amplitude:g}:{int(frequency)}",
        )

    @property
    def is_radial(self) -> bool:
        return self.family is not WeightFamily.ANGULAR_PERTURBED or self.amplitude == 0.0

    def radial_part(self, r):
        if self.family is WeightFamily.UNIT:
            return np.ones(np.shape(r))
        if self.family is WeightFamily.POWER:
            with np.errstate(divide="ignore"):
                return (1.0 - r) ** self.alpha
        if self.family is WeightFamily.RADIAL_TABLE:
            radii, values = self.table
            return np.interp(r, radii, values)
        return self.base.radial_part(r)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        w = self.radial_part(np.abs(z))
        if self.family is WeightFamily.ANGULAR_PERTURBED:
            w = w * (1.0 + self.amplitude * np.cos(self.frequency * np.angle(z)))
        return w


def load_radial_table(path) -> WeightSpec:
    """Read a ``RADIAL_TABLE`` weight from lines ``"r value"``."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns 'r value'")
    return WeightSpec.radial_table(data[:, 0], data[:, 1], label=f"table:{path}")


def parse_weight(text: str) -> WeightSpec:
    """Parse ``unit``, ``power:A``, ``table:PATH`` or ``perturbed:A:EPS:K``."""
    parts = text.strip().split(":")
    kind = parts[0].lower()
    if kind == "unit" and len(parts) == 1:
        return WeightSpec.unit()
    if kind == "power" and len(parts) == 2:
        return WeightSpec.power(float(parts[1]))
    if kind == "table" and len(parts) >= 2:
        return load_radial_table(":".join(parts[1:]))
    if kind == "perturbed" and len(parts) == 4:
        return WeightSpec.angular_perturbed(WeightSpec.power(float(parts[1])), float(parts[2]), int(parts[3]))
    raise ValueError(f"unrecognised weight {text!r}")


@dataclass(frozen=True)
class BoundaryDisc:
    """Euclidean disc whose closure meets the unit circle."""

    center: complex
    radius: float

    def __post_init__(self):
        c = abs(self.center)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if c + self.radius < 1.0 - 1e-12:
            raise ValueError("disc closure must intersect the unit circle")
        if c - self.radius >= 1.0:
            raise ValueError("disc must meet the open unit disc")

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius


@dataclass(frozen=True)
class MeasureSpec:
    """``mu = w dA`` with an attached grid for pointwise quadrature."""

    weight: WeightSpec
    grid: PolarGrid = DEFAULT_GRID

    def __call__(self, z):
        return self.weight(z)

    def sector_masses(self, r_lo: float, r_hi: float, theta_edges, n_r: int = 48, n_theta: int = 8) -> np.ndarray:
        """``mu`` of each annular sector ``[r_lo, r_hi) x [theta_k, theta_{k+1})``."""
        if self.weight.is_radial:
            # one sector suffices; the mass scales with the angular width
            edges = np.asarray(theta_edges, dtype=float)
            pts, wts = sector_rule(r_lo, r_hi, [0.0, 1.0], n_r, 1)
            per_radian = float(np.sum(self.weight(pts) * wts))
            return per_radian * np.diff(edges)
        pts, wts = sector_rule(r_lo, r_hi, theta_edges, n_r, n_theta)
        return np.sum(self.weight(pts) * wts, axis=1)

    def total_mass(self) -> float:
        return float(self.sector_masses(0.0, 1.0, [0.0, 2 * np.pi], n_r=96, n_theta=32)[0])


def _smooth_rule(n: int, lo: float, hi: float):
    # smoothstep map: endpoint behaviour like sqrt(r - lo) is flattened
    t, wt = _legendre01(n)
    s = t * t * (3.0 - 2.0 * t)
    return lo + (hi - lo) * s, (hi - lo) * 6.0 * t * (1.0 - t) * wt


def disc_rule(disc: BoundaryDisc, resolution: int = 32):
    """Quadrature nodes and area weights for ``disc`` intersected with the unit disc.

    Polar coordinates about the origin: for each radius the disc cuts an
    arc of the circle, integrated with Gauss-Legendre in the angle.
    """
    c0 = abs(disc.center)
    rho = disc.radius
    phase = np.angle(disc.center) if c0 > 0 else 0.0
    r_hi = min(1.0, c0 + rho)
    segments = []
    if rho > c0:
        # full circles up to rho - c0
        segments.append((0.0, min(rho - c0, r_hi), True))
    r_lo = abs(c0 - rho)
    if rho <= c0 or rho - c0 < r_hi:
        segments.append((r_lo, r_hi, False))
    t, wt = _legendre01(resolution)
    pts_all, wts_all = [], []
    for lo, hi, full in segments:
        if hi <= lo:
            continue
        r, dr = _smooth_rule(resolution, lo, hi)
        if full:
            half = np.full_like(r, np.pi)
        else:
            cos_half = (r * r + c0 * c0 - rho * rho) / (2.0 * r * c0)
            half = np.arccos(np.clip(cos_half, -1.0, 1.0))
        theta = phase + half[:, None] * (2.0 * t[None, :] - 1.0)
        w_theta = 2.0 * half[:, None] * wt[None, :]
        pts_all.append((r[:, None] * np.exp(1j * theta)).ravel())
        wts_all.append(((r * dr)[:, None] * w_theta).ravel())
    return np.concatenate(pts_all), np.concatenate(wts_all)


def _quotient_at(w: WeightSpec, q: float, disc: BoundaryDisc, resolution: int) -> float:
    pts, wts = disc_rule(disc, resolution)
    area = np.sum(wts)
    wv = w(pts)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        avg_w = np.sum(wv * wts) / area
        avg_dual = np.sum(wv ** (-1.0 / (q - 1.0)) * wts) / area
        return float(avg_w * avg_dual ** (q - 1.0))


def bb_quotient(w: WeightSpec, q: float, disc: BoundaryDisc, resolution: int = 32, check: bool = True) -> float:
    """Bekolle-Bonami quotient ``<w>_B <w^{-1/(q-1)}>_B^{q-1}`` over ``B`` cut to the disc.

    With ``check`` the quotient is also computed at ``RESOLUTION_STEP`` times
    the resolution; a jump by more than ``DIVERGENCE_GROWTH`` (or a
    non-finite value) raises :class:`DivergenceError`.
    """
    if q <= 1:
        raise ValueError("q must be > 1")
    value = _quotient_at(w, q, disc, resolution)
    if check:
        finer = _quotient_at(w, q, disc, RESOLUTION_STEP * resolution)
        if not (np.isfinite(value) and np.isfinite(finer)) or finer > DIVERGENCE_GROWTH * value:
            raise DivergenceError(
                f"Bekolle-Bonami quotient of {w.label or w.family.value} diverges on {disc}: "
                f"{value:.4g} -> {finer:.4g}"
            )
        return finer
    if not np.isfinite(value):
        raise DivergenceError(f"non-finite Bekolle-Bonami quotient on {disc}")
    return value


def boundary_disc_family(family_depth: int):
    """Dyadic family: centers ``(1-2^-n) e^{2 pi i j 2^-n}``, radii ``2^-n {1, 2}``."""
    if family_depth < 0:
        raise ValueError("family_depth must be >= 0")
    for n in range(family_depth + 1):
        s = 2.0**-n
        for j in range(2**n):
            center = (1.0 - s) * np.exp(2j * np.pi * j * s)
            for mult in (1.0, 2.0):
                yield BoundaryDisc(complex(center), mult * s)


def bb_constant(w: WeightSpec, q: float, family_depth: int = 6, resolution: int = 24) -> float:
    """Max of :func:`bb_quotient` over the dyadic boundary-disc family.

    A lower bound for the Bekolle-Bonami constant of ``w``.  Raises
    :class:`DivergenceError` if any quotient diverges.
    """
    if family_depth < 1:
        raise ValueError("family_depth must be >= 1")
    best = 0.0
    for disc in boundary_disc_family(family_depth):
        best = max(best, bb_quotient(w, q, disc, resolution))
    return best


def bb_maximal(g, z, family_depth: int = 6, resolution: int = 24) -> float:
    """Sampled Bekolle-Bonami maximal function at ``z``.

    The maximum, over family discs containing ``z``, of the average of
    ``|g|`` over the disc (cut to the unit disc).
    """
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError("z must lie in the open unit disc")
    best = 0.0
    for disc in boundary_disc_family(family_depth):
        if not disc.contains(z):
            continue
        pts, wts = disc_rule(disc, resolution)
        avg = float(np.sum(np.abs(g(pts)) * wts) / np.sum(wts))
        best = max(best, avg)
    return best


def essential_constancy(w: WeightSpec, tree_depth: int, samples: int = 8) -> float:
    """Max over top halves (levels ``0..tree_depth``) of sampled ``sup w / inf w``."""
    if tree_depth < 0:
        raise ValueError("tree_depth must be >= 0")
    worst = 1.0
    frac = np.linspace(0.0, 1.0, samples)
    for n in range(tree_depth + 1):
        r_lo = 1.0 - 2.0**-n
        r_hi = 1.0 - 2.0 ** (-n - 1)
        count = 2**n
        width = 2 * np.pi / count
        r = r_lo + (r_hi - r_lo) * frac
        th = (np.arange(count)[:, None] + frac[None, :]) * width
        pts = r[None, :, None] * np.exp(1j * th[:, None, :])
        vals = w(pts).reshape(count, -1)
        ratios = vals.max(axis=1) / vals.min(axis=1)
        worst = max(worst, float(ratios.max()))
    return worst
