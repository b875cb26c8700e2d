"""Dyadic Carleson squares of the unit disc and per-top-half data.

Square ``(n, j)`` is ``{1 - 2^-n <= |z| < 1, arg z in [2 pi j 2^-n, 2 pi (j+1) 2^-n)}``;
its top half is the inner radial half ``1 - 2^-n <= |z| < 1 - 2^-n-1``.
Each square has two children (angular halving), and the root is the disc.

A :class:`CarlesonTree` stores one ``b`` and one ``d`` per top half, level
by level, as numpy arrays; ``B`` and ``D`` are the running maxima over
ancestors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi
# Rounding guard for comparisons of sums of stored floats.
FLOAT_GUARD = 16 * np.finfo(float).eps


@dataclass(frozen=True, order=True)
class SquareId:
    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.index < 2**self.level:
            raise ValueError(f"invalid square id ({self.level}, {self.index})")

    @property
    def theta_bounds(self):
        width = TWO_PI * 2.0**-self.level
        return self.index * width, (self.index + 1) * width

    def square_bounds(self):
        """``(r_min, r_max, theta_min, theta_max)`` of the square."""
        return (1.0 - 2.0**-self.level, 1.0, *self.theta_bounds)

    def top_half_bounds(self):
        return (1.0 - 2.0**-self.level, 1.0 - 2.0 ** (-self.level - 1), *self.theta_bounds)

    def parent(self) -> "SquareId":
        if self.level == 0:
            raise ValueError("the root square has no parent")
        return SquareId(self.level - 1, self.index // 2)

    def ancestors(self) -> list:
        """Chain of strict ancestors, nearest first, ending at the root."""
        return [SquareId(k, self.index >> (self.level - k)) for k in range(self.level - 1, -1, -1)]

    def children(self) -> list:
        return [SquareId(self.level + 1, 2 * self.index), SquareId(self.level + 1, 2 * self.index + 1)]

    def descendants_at_depth(self, n: int) -> list:
        if n < 0:
            raise ValueError("n must be >= 0")
        base = self.index << n
        return [SquareId(self.level + n, base + i) for i in range(2**n)]

    def contains(self, z):
        r, theta = polar(z)
        lo, hi = self.theta_bounds
        return (r >= 1.0 - 2.0**-self.level) & (r < 1.0) & (theta >= lo) & (theta < hi)

    def top_half_contains(self, z):
        r, theta = polar(z)
        r_lo, r_hi, lo, hi = self.top_half_bounds()
        return (r >= r_lo) & (r < r_hi) & (theta >= lo) & (theta < hi)


def square_bounds(sq: SquareId):
    return sq.square_bounds()


def top_half_bounds(sq: SquareId):
    return sq.top_half_bounds()


def parent(sq: SquareId) -> SquareId:
    return sq.parent()


def ancestors(sq: SquareId) -> list:
    return sq.ancestors()


def descendants_at_depth(sq: SquareId, n: int) -> list:
    return sq.descendants_at_depth(n)


def polar(z):
    """``(|z|, arg z)`` with the angle in ``[0, 2 pi)``."""
    z = np.asarray(z, dtype=complex)
    theta = np.mod(np.angle(z), TWO_PI)
    theta = np.where(theta >= TWO_PI, 0.0, theta)
    return np.abs(z), theta


def top_half_level(r):
    """Level ``n`` with ``1 - 2^-n <= r < 1 - 2^-n-1``."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        n = np.floor(-np.log2(1.0 - r)).astype(int)
    n = np.maximum(n, 0)
    # repair floating-point misplacement at the dyadic radii
    n = np.where(r < 1.0 - 2.0**-n, n - 1, n)
    n = np.where(r >= 1.0 - 2.0 ** (-n - 1), n + 1, n)
    return np.maximum(n, 0)


def locate(z):
    """Level and index of the top half containing each ``z`` (``|z| < 1``)."""
    r, theta = polar(z)
    if np.any(r >= 1.0):
        raise ValueError("points must lie in the open unit disc")
    level = top_half_level(r)
    index = np.floor(theta / TWO_PI * 2.0**level).astype(np.int64)
    index = np.minimum(index, 2**level - 1)
    return level, index


def shaded_set_contains(region, z, ray_samples: int = 4096):
    """Membership of ``z`` in the shaded set of ``region``.

    ``region`` is an iterable of :class:`SquareId` standing for their top
    halves, or a callable predicate on complex arrays; for a predicate the
    segment from the origin to ``z`` is sampled.
    """
    z = np.asarray(z, dtype=complex)
    if callable(region):
        t = np.linspace(0.0, 1.0, ray_samples)
        pts = z[..., None] * t
        return np.any(region(pts), axis=-1)
    r, theta = polar(z)
    out = np.zeros(r.shape, dtype=bool)
    for sq in region:
        r_lo, _, lo, hi = sq.top_half_bounds()
        out |= (theta >= lo) & (theta < hi) & (r >= r_lo)
    return out


def _ancestor_max(values):
    out = [np.asarray(values[0], dtype=float).copy()]
    for level in values[1:]:
        out.append(np.maximum(np.asarray(level, dtype=float), np.repeat(out[-1], 2)))
    return out


class CarlesonTree:
    """Per-top-half scalars ``b``, ``d`` on the dyadic tree up to ``depth``.

    ``b[n]`` and ``d[n]`` are arrays of length ``2**n``.  The tree is
    immutable after construction.
    """

    def __init__(self, b, d):
        if len(b) != len(d) or len(b) == 0:
            raise ValueError("b and d need the same, positive number of levels")
        bl, dl = [], []
        for n, (bn, dn) in enumerate(zip(b, d)):
            bn = np.array(bn, dtype=float).ravel()
            dn = np.array(dn, dtype=float).ravel()
            if bn.size != 2**n or dn.size != 2**n:
                raise ValueError(f"level {n} needs {2**n} values")
            if np.any(bn < 0) or np.any(dn < 0) or not (np.all(np.isfinite(bn)) and np.all(np.isfinite(dn))):
                raise ValueError("b and d must be finite and nonnegative")
            bn.flags.writeable = False
            dn.flags.writeable = False
            bl.append(bn)
            dl.append(dn)
        self._b = tuple(bl)
        self._d = tuple(dl)

    @property
    def depth(self) -> int:
        return len(self._b) - 1

    @property
    def b(self):
        return self._b

    @property
    def d(self):
        return self._d

    @cached_property
    def B(self):
        return tuple(_ancestor_max(self._b))

    @cached_property
    def D(self):
        return tuple(_ancestor_max(self._d))

    def node(self, sq: SquareId):
        n, j = sq.level, sq.index
        return self._b[n][j], self._d[n][j], self.B[n][j], self.D[n][j]

    def nodes(self):
        for n in range(self.depth + 1):
            for j in range(2**n):
                yield SquareId(n, j)

    def truncated(self, depth: int) -> "CarlesonTree":
        return CarlesonTree(self._b[: depth + 1], self._d[: depth + 1])

    def scaled(self, c: float) -> "CarlesonTree":
        return CarlesonTree([c * x for x in self._b], [c * x for x in self._d])

    def values_at(self, z, which: str = "B"):
        """Value of ``b``/``d``/``B``/``D`` at points ``z``; NaN beyond the depth."""
        table = {"b": self._b, "d": self._d, "B": self.B, "D": self.D}[which]
        level, index = locate(z)
        out = np.full(level.shape, np.nan)
        for n in range(self.depth + 1):
            mask = level == n
            out[mask] = table[n][index[mask]]
        return out

    def dump(self) -> str:
        """Text lines ``"n j b d B D"``, one per node."""
        lines = []
        for n in range(self.depth + 1):
            for j in range(2**n):
                vals = (self._b[n][j], self._d[n][j], self.B[n][j], self.D[n][j])
                lines.append(f"{n} {j} " + " ".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "CarlesonTree":
        """Parse the dump format; ``B D`` columns are optional and recomputed."""
        rows = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (4, 6):
                raise ValueError(f"line {lineno}: expected 'n j b d [B D]'")
            sq = SquareId(int(parts[0]), int(parts[1]))
            rows[sq] = (float(parts[2]), float(parts[3]))
        if not rows:
            raise ValueError("empty tree table")
        depth = max(sq.level for sq in rows)
        b = [np.zeros(2**n) for n in range(depth + 1)]
        d = [np.zeros(2**n) for n in range(depth + 1)]
        for n in range(depth + 1):
            for j in range(2**n):
                try:
                    b[n][j], d[n][j] = rows[SquareId(n, j)]
                except KeyError:
                    raise ValueError(f"tree table is missing node ({n}, {j})") from None
        return cls(b, d)


def top_half_samples(level: int, samples: int):
    """Closed product sample grids for every top half of ``level``.

    Returns complex points of shape ``(2**level, n_r * (m + 1))``.  Angular
    samples are ``m + 1`` equispaced points per node including both ends,
    and the level ``n + 1`` angles refine those of level ``n``; radii include
    both ends of the radial range.
    """
    n_r = max(2, int(np.sqrt(samples)) // 3)
    m = max(1, samples // n_r - 1)
    r = np.linspace(1.0 - 2.0**-level, 1.0 - 2.0 ** (-level - 1), n_r)
    count = 2**level
    width = TWO_PI / count
    th = (np.arange(count)[:, None] + np.linspace(0.0, 1.0, m + 1)[None, :]) * width
    pts = r[None, :, None] * np.exp(1j * th[:, None, :])
    return pts.reshape(count, -1)


def assign_from_function(f, depth: int, samples: int = 256) -> CarlesonTree:
    """Tree with ``b = sup_T |f|`` and ``d = 2^{-k-1} sup_T |f'|`` (sampled).

    Requires ``f(0) = 0``.  Suprema are maxima over :func:`top_half_samples`
    and therefore lower bounds.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if abs(f(0.0)) > 1e-12:
        raise ValueError("assign_from_function requires f(0) = 0")
    fp = f.derivative()
    b, d = [], []
    for k in range(depth + 1):
        pts = top_half_samples(k, samples)
        b.append(np.max(np.abs(f(pts)), axis=1))
        d.append(2.0 ** (-k - 1) * np.max(np.abs(fp(pts)), axis=1))
    return CarlesonTree(b, d)


@dataclass
class BDReport:
    violations: list  # (SquareId, amount)
    max_violation: float
    slack: float

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_bd_inequality(tree: CarlesonTree, slack: float = 0.0) -> BDReport:
    """Check ``b(T) <= b(parent top half) + d(T)`` at every node.

    The root's parent term is 0.  A node is reported when the excess is
    larger than ``slack`` plus a float rounding guard.
    """
    violations = []
    worst = -np.inf
    for n in range(tree.depth + 1):
        prev = np.zeros(1) if n == 0 else np.repeat(tree.b[n - 1], 2)
        bound = prev + tree.d[n]
        excess = tree.b[n] - bound
        worst = max(worst, float(excess.max()))
        guard = slack + FLOAT_GUARD * np.maximum(bound, 1.0)
        for j in np.nonzero(excess > guard)[0]:
            violations.append((SquareId(n, int(j)), float(excess[j])))
    return BDReport(violations, worst, slack)


def synthetic_tree(rng, depth: int, scale: int = 2**20, max_units: int = 64, drop_prob: float = 0.3) -> CarlesonTree:
    """Random tree satisfying ``b(T) <= b(parent) + d(T)`` exactly.

    Values are integer multiples of ``1/scale`` so every sum involved in
    the chain checks is exact in floating point.
    """
    b, d = [], []
    parent_b = np.zeros(1, dtype=np.int64)
    for n in range(depth + 1):
        count = 2**n
        dn = rng.integers(0, max_units, size=count)
        zero = rng.random(count) < 0.1
        dn = np.where(zero, 0, dn)
        pb = parent_b if n == 0 else np.repeat(parent_b, 2)
        ceiling = pb + dn
        drop = np.where(rng.random(count) < drop_prob, rng.integers(0, 2 * max_units, size=count), 0)
        bn = np.maximum(ceiling - drop, 0)
        b.append(bn / scale)
        d.append(dn / scale)
        parent_b = bn
    return CarlesonTree(b, d)


def top_half_ratio(measure, depth: int, n_r: int = 48) -> float:
    """``tau``: the minimum of ``mu(T) / mu(C)`` over squares up to ``depth``."""
    return float(min(level_ratios(measure, depth, n_r)))


def level_ratios(measure, depth: int, n_r: int = 48) -> list:
    """Per-level minimum of ``mu(T) / mu(C)``."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    out = []
    for n in range(depth + 1):
        top = top_half_masses(measure, n, n_r)
        sq = square_masses(measure, n, n_r)
        if np.any(sq <= 0) or not np.all(np.isfinite(sq)):
            raise ValueError(f"level {n}: square with zero or non-finite measure")
        out.append(float(np.min(top / sq)))
    return out


def _edges(level: int):
    return TWO_PI * np.arange(2**level + 1) / 2**level


def top_half_masses(measure, level: int, n_r: int = 48) -> np.ndarray:
    return measure.sector_masses(1.0 - 2.0**-level, 1.0 - 2.0 ** (-level - 1), _edges(level), n_r)


def square_masses(measure, level: int, n_r: int = 48) -> np.ndarray:
    return measure.sector_masses(1.0 - 2.0**-level, 1.0, _edges(level), n_r)


def lebesgue_top_half_ratio(level: int) -> float:
    """Closed form ``(1/2)(2 - 3 s/2)/(2 - s)`` with ``s = 2^-level``."""
    s = 2.0**-level
    return 0.5 * (2.0 - 1.5 * s) / (2.0 - s)
