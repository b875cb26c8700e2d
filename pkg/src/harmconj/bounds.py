"""Pointwise derivative bound, quasi-norm probes and empirical operator constants.

Boundedness of an operator is measured as the largest ratio
``||T f|| / ||f||`` over a reproducible test family, together with its
drift when the family's polynomial degree doubles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import DEFAULT_GRID, NormSpec, PolarGrid, weighted_p_norm_values
from .series import HarmonicFunction, PowerSeries, ShiftKind, local_sup, shifted_points
from .weights import bb_constant

DEFAULT_ETA = 0.25
ETA_SWEEP = (0.05, 0.1, 0.25, 0.4)
DRIFT_LIMIT = 0.20


def lemma2_coefficient(eta: float) -> float:
    """``10 eta / (2 (1 - eta^2))``."""
    return 10.0 * eta / (2.0 * (1.0 - eta * eta))


@dataclass(frozen=True)
class Lemma2Config:
    a: complex
    sigma: float
    eta: float
    z: complex
    h: complex

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if self.sigma <= 0 or abs(self.a) + self.sigma >= 1.0:
            raise ValueError("the closed disc |w - a| <= sigma must lie in the unit disc")
        target = self.eta * self.sigma
        if not math.isclose(abs(self.h), target, rel_tol=1e-12):
            raise ValueError("|h| must equal eta * sigma")
        if abs(self.z - self.a) >= target:
            raise ValueError("need |z - a| < |h|")


def random_lemma2_config(rng, eta: float, max_center: float = 0.9) -> Lemma2Config:
    a = max_center * math.sqrt(rng.random()) * complex(np.exp(2j * np.pi * rng.random()))
    sigma = (1.0 - abs(a)) * (0.01 + 0.98 * rng.random())
    step = eta * sigma
    h = step * complex(np.exp(2j * np.pi * rng.random()))
    z = a + step * 0.999 * math.sqrt(rng.random()) * complex(np.exp(2j * np.pi * rng.random()))
    return Lemma2Config(a, sigma, eta, z, h)


def lemma2_margin(f: PowerSeries, cfg: Lemma2Config, sup_samples: int = 4096) -> float:
    """RHS minus LHS of the pointwise bound

    ``|f'(z)| sigma <= (|u(a+h)| + |u(a+ih)| + 2|u(a)|)/eta + c(eta) sigma M``

    where ``u = Re f``, ``c(eta) = 10 eta / (2(1 - eta^2))`` and ``M`` is the
    maximum of ``|f'|`` on ``|w - a| = sigma``, sampled at ``sup_samples``
    equispaced points (a lower bound, so the margin can only shrink).
    """
    fp = f.derivative()
    theta = 2.0 * np.pi * np.arange(sup_samples) / sup_samples
    M = float(np.max(np.abs(fp(cfg.a + cfg.sigma * np.exp(1j * theta)))))
    u = lambda w: float(np.real(f(w)))  # noqa: E731
    lhs = abs(complex(fp(cfg.z))) * cfg.sigma
    rhs = (abs(u(cfg.a + cfg.h)) + abs(u(cfg.a + 1j * cfg.h)) + 2.0 * abs(u(cfg.a))) / cfg.eta
    rhs += lemma2_coefficient(cfg.eta) * cfg.sigma * M
    return rhs - lhs


def lemma2_sampling_slack(f: PowerSeries, cfg: Lemma2Config, sup_samples: int) -> float:
    """Upper bound on how much circle sampling of ``M`` can lower the margin.

    Adjacent samples are ``2 pi sigma / N`` apart along the circle, so the
    true maximum exceeds the sampled one by at most half that arc times
    ``max |f''|``, bounded here by the coefficient majorant on ``|w| <= |a| + sigma``.
    """
    c = np.abs(f.coeffs)
    n = np.arange(c.size)
    rad = abs(cfg.a) + cfg.sigma
    fpp_bound = float(np.sum(c[2:] * n[2:] * (n[2:] - 1) * rad ** (n[2:] - 2))) if c.size > 2 else 0.0
    arc = np.pi * cfg.sigma / sup_samples
    return lemma2_coefficient(cfg.eta) * cfg.sigma * fpp_bound * arc


class FamilyKind(enum.Enum):
    RANDOM_POLY = "random_poly"
    PEAK_TRUNCATED = "peak_truncated"


@dataclass(frozen=True)
class TestFamily:
    """Reproducible family of polynomials, each recentred to ``f(0) = 0``.

    ``RANDOM_POLY``: complex Gaussian coefficients with standard deviation
    ``2^-n``; the last ``hard_fraction`` of members use standard deviation 1.
    Member ``i`` draws from ``default_rng([seed, i])`` so families of
    different degree share leading coefficients.

    ``PEAK_TRUNCATED``: Taylor truncations of ``(1 - conj(a) z)^(-s)`` with
    ``|a| = rho`` and ``a`` at ``count`` equispaced angles.
    """

    __test__ = False  # not a pytest class

    kind: FamilyKind = FamilyKind.RANDOM_POLY
    max_degree: int = 8
    count: int = 16
    seed: int = 0
    hard_fraction: float = 0.25
    rho: float = 0.9
    power: float = 2.0

    def with_degree(self, degree: int) -> "TestFamily":
        return TestFamily(self.kind, degree, self.count, self.seed, self.hard_fraction, self.rho, self.power)

    def members(self) -> list:
        if self.kind is FamilyKind.RANDOM_POLY:
            return [self._random_member(i) for i in range(self.count)]
        return [self._peak_member(i) for i in range(self.count)]

    def _random_member(self, i: int) -> PowerSeries:
        rng = np.random.default_rng([self.seed, i])
        draws = rng.standard_normal((self.max_degree + 1, 2))
        c = (draws[:, 0] + 1j * draws[:, 1]) / math.sqrt(2.0)
        hard = i >= self.count - round(self.count * self.hard_fraction)
        if not hard:
            c = c * 2.0 ** -np.arange(self.max_degree + 1)
        c[0] = 0.0
        return PowerSeries(c)

    def _peak_member(self, i: int) -> PowerSeries:
        abar = self.rho * np.exp(-2j * np.pi * i / self.count)
        n = np.arange(1, self.max_degree + 1)
        # binomial series of (1 - x)^(-s): c_n = c_{n-1} (s + n - 1)/n
        c = np.concatenate([[1.0], np.cumprod((self.power + n - 1) / n)]) * abar ** np.arange(self.max_degree + 1)
        c[0] = 0.0
        return PowerSeries(c)


@dataclass
class DeltaNormProbe:
    p: float
    triangle_constant: float
    a_exp: float
    b_exp: float
    triangle_bound: float = field(init=False)

    def __post_init__(self):
        self.triangle_bound = max(1.0, 2.0 ** (1.0 / self.p - 1.0))

    @property
    def ok(self) -> bool:
        return (
            self.triangle_constant <= self.triangle_bound + 1e-9
            and abs(self.a_exp - 1.0) <= 1e-9
            and abs(self.b_exp - 1.0) <= 1e-9
        )


def delta_norm_probe(p: float, family: TestFamily, grid: PolarGrid = DEFAULT_GRID, weight=None) -> DeltaNormProbe:
    """Worst ``||f + g|| / (||f|| + ||g||)`` over member pairs and log-log scaling slopes."""
    spec = NormSpec(p, weight)
    wvals = spec.weight_values(grid.points)
    vals = [m(grid.points) for m in family.members()]
    norms = [weighted_p_norm_values(v, spec, grid, wvals) for v in vals]
    worst = 0.0
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            den = norms[i] + norms[j]
            if den > 0:
                worst = max(worst, weighted_p_norm_values(vals[i] + vals[j], spec, grid, wvals) / den)
    base = next(v for v, n in zip(vals, norms) if n > 0)
    up = np.array([1.0, 2.0, 4.0, 8.0])
    down = 1.0 / up
    def slope(scales):
        ns = [weighted_p_norm_values(s * base, spec, grid, wvals) for s in scales]
        return float(np.polyfit(np.log(scales), np.log(ns), 1)[0])
    return DeltaNormProbe(p, worst, slope(up), slope(down))


class OperatorKind(enum.Enum):
    U_TO_DERIV = "u_to_deriv"
    DERIV_TO_F = "deriv_to_f"
    U_TO_V = "u_to_v"
    SHIFT_RADIAL = "shift_radial"
    SHIFT_ROTATED = "shift_rotated"
    MC_COMPOSITE = "mc_composite"


def _operator_pair(kind: OperatorKind, f: PowerSeries, z, eta: float, mc_samples: int):
    """(input values, output values) of the operator on points ``z``."""
    u = HarmonicFunction.from_completion(f.recentered())
    delta = 1.0 - np.abs(z)
    if kind is OperatorKind.U_TO_DERIV:
        return u(z), delta * f.derivative()(z)
    if kind is OperatorKind.DERIV_TO_F:
        return delta * f.derivative()(z), f.recentered()(z)
    if kind is OperatorKind.U_TO_V:
        return u(z), u.conjugate_values(z)
    if kind is OperatorKind.SHIFT_RADIAL:
        return u(z), u(shifted_points(z, ShiftKind.RADIAL, eta))
    if kind is OperatorKind.SHIFT_ROTATED:
        return u(z), u(shifted_points(z, ShiftKind.ROTATED, eta))
    if kind is OperatorKind.MC_COMPOSITE:
        fp = f.derivative()
        g = lambda w: (1.0 - np.abs(w)) * fp(w)  # noqa: E731
        return g(z), local_sup(g, z, mc_samples)
    raise ValueError(f"unknown operator {kind}")


def operator_ratios(kind, family: TestFamily, spec: NormSpec, grid: PolarGrid = DEFAULT_GRID,
                    eta: float = DEFAULT_ETA, mc_samples: int = 8) -> np.ndarray:
    """Per-member ``||output|| / ||input||``; NaN marks skipped zero-input members."""
    kind = OperatorKind(kind)
    z = grid.points
    wvals = spec.weight_values(z)
    out = []
    for f in family.members():
        x, y = _operator_pair(kind, f, z, eta, mc_samples)
        den = weighted_p_norm_values(x, spec, grid, wvals)
        out.append(np.nan if den == 0 else weighted_p_norm_values(y, spec, grid, wvals) / den)
    return np.array(out)


def estimate_operator_constant(kind, family: TestFamily, spec: NormSpec, grid: PolarGrid = DEFAULT_GRID,
                               eta: float = DEFAULT_ETA, mc_samples: int = 8) -> float:
    """Family maximum of :func:`operator_ratios`."""
    ratios = operator_ratios(kind, family, spec, grid, eta, mc_samples)
    if np.all(np.isnan(ratios)):
        raise ValueError("every family member has a zero input norm")
    return float(np.nanmax(ratios))


def degree_drift(kind, family: TestFamily, spec: NormSpec, degrees=(8, 16, 32), grid: PolarGrid = DEFAULT_GRID,
                 eta: float = DEFAULT_ETA, mc_samples: int = 8):
    """Family-max ratios at each degree and relative drift between consecutive degrees."""
    maxima = [
        estimate_operator_constant(kind, family.with_degree(d), spec, grid, eta, mc_samples) for d in degrees
    ]
    drifts = [abs(b - a) / a for a, b in zip(maxima, maxima[1:])]
    return maxima, drifts


@dataclass
class PipelineReport:
    weight_constant: float
    shift_radial: float
    shift_rotated: float
    u_to_deriv: float
    deriv_to_f: float
    u_to_v: float

    @property
    def product(self) -> float:
        return self.u_to_deriv * self.deriv_to_f

    @property
    def consistent(self) -> bool:
        return self.u_to_v <= self.product * (1.0 + 1e-9)

    def as_dict(self) -> dict:
        return {
            "weight_constant": self.weight_constant,
            "shift_radial": self.shift_radial,
            "shift_rotated": self.shift_rotated,
            "u_to_deriv": self.u_to_deriv,
            "deriv_to_f": self.deriv_to_f,
            "product": self.product,
            "u_to_v": self.u_to_v,
            "consistent": self.consistent,
        }


def theorem_pipeline_report(family: TestFamily, spec: NormSpec, grid: PolarGrid = DEFAULT_GRID,
                            eta: float = DEFAULT_ETA, q: float = 2.0, bb_depth: int = 4) -> PipelineReport:
    """Measure the two intermediate constants, their product and the direct one.

    ``u -> delta_b f'`` then ``delta_b f' -> f - f(0)`` bound ``u -> v``
    member by member because ``|v| <= |f - f(0)|`` pointwise.  The weight is
    first checked to have a finite sampled Bekolle-Bonami constant;
    :class:`~harmconj.weights.DivergenceError` propagates otherwise.
    """
    weight = spec.weight
    wc = 1.0 if weight is None else bb_constant(weight, q, bb_depth)
    est = lambda k: estimate_operator_constant(k, family, spec, grid, eta)  # noqa: E731
    return PipelineReport(
        wc,
        est(OperatorKind.SHIFT_RADIAL),
        est(OperatorKind.SHIFT_ROTATED),
        est(OperatorKind.U_TO_DERIV),
        est(OperatorKind.DERIV_TO_F),
        est(OperatorKind.U_TO_V),
    )
