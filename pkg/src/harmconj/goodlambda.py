"""Good-lambda machinery on a :class:`~harmconj.carleson.CarlesonTree`.

Everything here works on the per-node arrays of a tree.  Because ``b``,
``d``, ``B`` and ``D`` are constant on top halves, set measures and
integrals reduce to sums of ``value * mu(T)`` over nodes, which are exact
up to the quadrature of the top-half masses.  The boundary annulus below
the deepest level is not resolved; its mass is reported as the truncation
term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .carleson import FLOAT_GUARD, CarlesonTree, square_masses, top_half_masses
from .report import CheckReport, node_label

ALPHAS = (1.5, 2.0, 4.0)
GAMMAS = (0.1, 0.25, 0.5)
LAMBDA_POINTS = 32
LAMBDA_RANGE = 1e3
# Relative quadrature tolerance for comparisons between measured masses.
MASS_RTOL = 1e-9


@dataclass(frozen=True)
class GoodLambdaParams:
    alpha: float
    gamma: float
    lam: float
    tau: float = 0.25

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("alpha must be > 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.lam > 0:
            raise ValueError("lambda must be > 0")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")


def level_gap(alpha: float, gamma: float) -> int:
    """``ceil((alpha - 1)/gamma) - 1``, the descendant depth of the containment.

    Computed in exact rationals from the decimal forms of the arguments so
    that e.g. ``(1.5 - 1)/0.1`` gives exactly 5.
    """
    if not alpha > 1 or not gamma > 0:
        raise ValueError("need alpha > 1 and gamma > 0")
    ratio = (Fraction(repr(float(alpha))) - 1) / Fraction(repr(float(gamma)))
    return math.ceil(ratio) - 1


def lambda_grid(top: float, points: int = LAMBDA_POINTS, span: float = LAMBDA_RANGE) -> np.ndarray:
    """Geometric grid from ``top/span`` to ``top``; empty when ``top <= 0``."""
    if top <= 0:
        return np.empty(0)
    return np.geomspace(top / span, top, points)


def _max(levels) -> float:
    return float(max(np.max(x) for x in levels))


def chain_bound_check(tree: CarlesonTree, depth: int | None = None) -> CheckReport:
    """``B_{k+n} <= B_k + n D_{k+n}`` along every chain, every ``k, n``.

    ``n >= 1``; ``k = -1`` is included with ``B_{-1} = 0``.  Pure arithmetic on stored
    values; a rounding guard of a few ulps is applied.
    """
    depth = tree.depth if depth is None else depth
    if depth > tree.depth:
        raise ValueError("tree is shallower than the requested depth")
    B, D = tree.B, tree.D
    worst = np.inf
    worst_row = None
    rows = []
    for L in range(depth + 1):
        j = np.arange(2**L)
        for k in range(-1, L):
            n = L - k
            base = np.zeros(j.size) if k < 0 else B[k][j >> n]
            rhs = base + n * D[L]
            margin = rhs - B[L]
            i = int(np.argmin(margin))
            if margin[i] < worst:
                worst = float(margin[i])
                worst_row = ("chain_bound", node_label(L, i), float("nan"), float(k), float(n), float(B[L][i]), float(rhs[i]), worst)
            for t in np.nonzero(margin < -FLOAT_GUARD * np.maximum(rhs, 1.0))[0]:
                rows.append(("chain_bound", node_label(L, int(t)), float("nan"), float(k), float(n), float(B[L][t]), float(rhs[t]), float(margin[t])))
    passed = not rows
    if passed and worst_row is not None:
        rows.append(worst_row)
    return CheckReport("chain_bound", passed, worst, rows, {"depth": depth})


def _first_hit_levels(B, lam: float):
    """Per level, the level of the shallowest ancestor-or-self with ``B >= lam`` (-1 if none)."""
    out = []
    prev = np.array([-1])
    for L, BL in enumerate(B):
        inherited = prev if L == 0 else np.repeat(prev, 2)
        hit = np.where(BL >= lam, np.where(inherited >= 0, inherited, L), -1)
        out.append(hit)
        prev = hit
    return out


def containment_check(tree: CarlesonTree, lambdas=None, alphas=ALPHAS, gammas=GAMMAS) -> CheckReport:
    """Every node with ``B >= alpha lam`` and ``D <= gamma lam`` lies at least
    ``level_gap(alpha, gamma)`` levels below its first-hit square ``C``.

    ``C`` is the square where ``B >= lam`` on the top half while the parent
    top half has ``B < lam``.  Exhaustive over all nodes.
    """
    B, D = tree.B, tree.D
    if lambdas is None:
        lambdas = lambda_grid(_max(B))
    rows = []
    worst = np.inf
    worst_row = None
    checked = 0
    for lam in lambdas:
        hits = _first_hit_levels(B, lam)
        for alpha in alphas:
            for gamma in gammas:
                gap = level_gap(alpha, gamma)
                for L in range(tree.depth + 1):
                    sel = (B[L] >= alpha * lam) & (D[L] <= gamma * lam)
                    if not sel.any():
                        continue
                    idx = np.nonzero(sel)[0]
                    below = L - hits[L][idx]
                    margin = below - gap
                    checked += idx.size
                    i = int(np.argmin(margin))
                    if margin[i] < worst:
                        worst = float(margin[i])
                        worst_row = ("containment", node_label(L, int(idx[i])), float(lam), alpha, gamma, float(gap), float(below[i]), worst)
                    for t in np.nonzero(margin < 0)[0]:
                        rows.append(("containment", node_label(L, int(idx[t])), float(lam), alpha, gamma, float(gap), float(below[t]), float(margin[t])))
    if not rows and worst_row is not None:
        rows.append(worst_row)
    passed = not any(r[-1] < 0 for r in rows)
    return CheckReport("containment", passed, worst, rows, {"lambdas": len(lambdas), "checked_nodes": checked})


@lru_cache(maxsize=64)
def tree_masses(measure, depth: int):
    """Top-half and square masses for levels ``0..depth`` (cached per measure)."""
    top = tuple(top_half_masses(measure, n) for n in range(depth + 1))
    sq = tuple(square_masses(measure, n) for n in range(depth + 1))
    return top, sq


def tau_from_masses(top, sq) -> float:
    return float(min(np.min(t / s) for t, s in zip(top, sq)))


def measure_decay_check(tree: CarlesonTree, measure, lambdas=None, alphas=ALPHAS, gammas=GAMMAS, tau=None) -> CheckReport:
    """``mu{z in C : B >= alpha lam, D <= gamma lam} <= (1 - tau)^gap mu(C)``.

    Checked for every first-hit square ``C``; the left side sums resolved
    top halves, the right side uses the full square mass.  The report's
    ``values['worst_ratio']`` is the largest LHS/RHS.
    """
    top, sq = tree_masses(measure, tree.depth)
    if tau is None:
        tau = tau_from_masses(top, sq)
    B, D = tree.B, tree.D
    if lambdas is None:
        lambdas = lambda_grid(_max(B))
    offsets = [2**m - 1 for m in range(tree.depth + 1)]
    heap_sq = np.concatenate(sq)
    heap_level = np.concatenate([np.full(2**m, m) for m in range(tree.depth + 1)])
    worst_ratio = 0.0
    rows = []
    worst_row = None
    for lam in lambdas:
        hits = _first_hit_levels(B, lam)
        for alpha in alphas:
            for gamma in gammas:
                gap = level_gap(alpha, gamma)
                lhs = np.zeros(heap_sq.size)
                for L in range(tree.depth + 1):
                    sel = (B[L] >= alpha * lam) & (D[L] <= gamma * lam)
                    if not sel.any():
                        continue
                    idx = np.nonzero(sel)[0]
                    m = hits[L][idx]
                    key = ((1 << m) - 1) + (idx >> (L - m))
                    np.add.at(lhs, key, top[L][idx])
                used = np.nonzero(lhs > 0)[0]
                if used.size == 0:
                    continue
                rhs = (1.0 - tau) ** gap * heap_sq[used]
                ratio = lhs[used] / rhs
                i = int(np.argmax(ratio))
                lvl = int(heap_level[used[i]])
                row = ("measure_decay", node_label(lvl, int(used[i] - offsets[lvl])), float(lam), alpha, gamma, float(lhs[used[i]]), float(rhs[i]), float(rhs[i] - lhs[used[i]]))
                if ratio[i] > worst_ratio:
                    worst_ratio = float(ratio[i])
                    worst_row = row
                for t in np.nonzero(ratio > 1.0 + MASS_RTOL)[0]:
                    lv = int(heap_level[used[t]])
                    rows.append(("measure_decay", node_label(lv, int(used[t] - offsets[lv])), float(lam), alpha, gamma, float(lhs[used[t]]), float(rhs[t]), float(rhs[t] - lhs[used[t]])))
    if not rows and worst_row is not None:
        rows.append(worst_row)
    passed = worst_ratio <= 1.0 + MASS_RTOL
    margin = 1.0 - worst_ratio
    return CheckReport("measure_decay", passed, margin, rows, {"tau": tau}, {"worst_ratio": worst_ratio, "tau": tau})


def _layer_sums(values, top, p):
    return float(sum(np.sum(v**p * t) for v, t in zip(values, top)))


def _level_set_mass(values, top, lam):
    return float(sum(np.sum(np.where(v >= lam, t, 0.0)) for v, t in zip(values, top)))


def layer_cake_check(tree: CarlesonTree, p: float, measure, tau=None, lambdas=None) -> CheckReport:
    """``tau int D^p dmu <= int d^p dmu`` and ``tau mu{D >= lam} <= mu{d >= lam}``.

    Integrals are over the resolved top halves.  ``values`` carries
    ``lhs = int D^p``, ``rhs = int d^p``, ``tau`` and the truncation bound
    ``mu(unresolved annulus) * max(D)^p``.
    """
    if p <= 0:
        raise ValueError("p must be > 0")
    top, sq = tree_masses(measure, tree.depth)
    if tau is None:
        tau = tau_from_masses(top, sq)
    lhs = _layer_sums(tree.D, top, p)
    rhs = _layer_sums(tree.d, top, p)
    maxD = _max(tree.D)
    annulus = float(np.sum(square_masses(measure, tree.depth + 1)))
    rows = []
    integral_margin = rhs * (1.0 + MASS_RTOL) - tau * lhs
    rows.append(("layer_cake_integral", "all", float("nan"), float("nan"), float("nan"), tau * lhs, rhs, integral_margin))
    if lambdas is None:
        lambdas = lambda_grid(maxD)
    worst = integral_margin
    for lam in lambdas:
        left = tau * _level_set_mass(tree.D, top, lam)
        right = _level_set_mass(tree.d, top, lam)
        margin = right * (1.0 + MASS_RTOL) - left
        worst = min(worst, margin)
        if margin < 0:
            rows.append(("layer_cake_lambda", "all", float(lam), float("nan"), float("nan"), left, right, margin))
    passed = worst >= 0
    return CheckReport(
        "layer_cake",
        passed,
        worst,
        rows,
        {"p": p, "tau": tau},
        {"lhs": lhs, "rhs": rhs, "tau": tau, "truncation": annulus * maxD**p},
    )


def norm_domination_estimate(tree: CarlesonTree, p: float, measure):
    """Empirical ``(||B|| / ||D||, ||B|| / ||d||)`` in ``L^p(mu)`` over resolved top halves.

    0/0 gives NaN; a positive ``||B||`` over a zero denominator raises
    :class:`ZeroDivisionError`.
    """
    top, _ = tree_masses(measure, tree.depth)
    nB = _layer_sums(tree.B, top, p) ** (1.0 / p)
    nD = _layer_sums(tree.D, top, p) ** (1.0 / p)
    nd = _layer_sums(tree.d, top, p) ** (1.0 / p)

    def ratio(num, den):
        if den == 0.0:
            if num == 0.0:
                return float("nan")
            raise ZeroDivisionError("||d|| = 0 while ||B|| > 0")
        return num / den

    return ratio(nB, nD), ratio(nB, nd)
