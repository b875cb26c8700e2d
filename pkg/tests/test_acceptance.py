"""Acceptance gate: one test per criterion, each at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from harmconj import cli
from harmconj.bounds import (
    ETA_SWEEP,
    OperatorKind,
    TestFamily,
    degree_drift,
    lemma2_margin,
    operator_ratios,
    random_lemma2_config,
)
from harmconj.carleson import (
    assign_from_function,
    level_ratios,
    synthetic_tree,
    top_half_ratio,
    verify_bd_inequality,
)
from harmconj.goodlambda import chain_bound_check, containment_check, layer_cake_check, measure_decay_check
from harmconj.quadrature import DEFAULT_GRID, NormSpec, weighted_p_norm
from harmconj.series import PowerSeries, taylor_remainder_residual
from harmconj.weights import DivergenceError, MeasureSpec, WeightSpec, bb_constant

LEBESGUE = MeasureSpec(WeightSpec.unit())
SQRT_WEIGHT = MeasureSpec(WeightSpec.power(0.5))


def disc_point(rng, radius=0.9):
    return complex(radius * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))


def random_poly(rng, max_degree):
    deg = int(rng.integers(0, max_degree + 1))
    return PowerSeries(rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1))


@pytest.fixture(scope="module")
def deep_trees():
    """20 function-derived and 100 synthetic trees of depth 12."""
    family = TestFamily(max_degree=12, count=20, seed=7, hard_fraction=0.0)
    functions = [assign_from_function(f, 12, 256) for f in family.members()]
    rng = np.random.default_rng(12)
    synthetic = [synthetic_tree(rng, 12, drop_prob=(0.0, 0.3, 0.6)[i % 3]) for i in range(100)]
    trees = functions + synthetic
    assert all(verify_bd_inequality(t).ok for t in trees)
    return trees


@pytest.fixture(scope="module")
def depth10_trees(deep_trees):
    return [t.truncated(10) for t in deep_trees[:20]] + [t.truncated(10) for t in deep_trees[20:50]]


def test_01_taylor_identity(record_property):
    rng = np.random.default_rng(101)
    polys = [random_poly(rng, 12) for _ in range(100)]
    pairs = [(disc_point(rng), disc_point(rng)) for _ in range(100)]
    start = time.perf_counter()
    worst = max(taylor_remainder_residual(f, z, w, 64) for f in polys for z, w in pairs)
    elapsed = time.perf_counter() - start
    record_property("detail", f"max residual {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-10
    assert elapsed < 5.0


def test_02_derivative_bound_sweep(record_property):
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    worst = np.inf
    for i in range(10**4):
        f = random_poly(rng, 10)
        cfg = random_lemma2_config(rng, ETA_SWEEP[i % len(ETA_SWEEP)])
        worst = min(worst, lemma2_margin(f, cfg, 4096))
    elapsed = time.perf_counter() - start
    record_property("detail", f"min margin {worst:.3e}, {elapsed:.2f}s")
    assert worst >= -1e-9
    assert elapsed < 30.0


def test_03_quadrature_oracles(record_property):
    one = weighted_p_norm(lambda z: np.ones(z.shape), NormSpec(2.0))
    ident = weighted_p_norm(lambda z: z, NormSpec(2.0))
    weighted = weighted_p_norm(lambda z: z, NormSpec(2.0, WeightSpec.power(1.0)))
    errors = [abs(one - np.sqrt(np.pi)), abs(ident - np.sqrt(np.pi / 2)), abs(weighted - np.sqrt(np.pi / 10))]
    record_property("detail", f"max error {max(errors):.2e}")
    assert max(errors) <= 1e-6


def test_04_chain_bound(deep_trees, record_property):
    start = time.perf_counter()
    reports = [chain_bound_check(t) for t in deep_trees]
    elapsed = time.perf_counter() - start
    violations = sum(len(r.violations) for r in reports)
    record_property("detail", f"{len(reports)} trees, {violations} violations, {elapsed:.2f}s")
    assert violations == 0
    assert elapsed < 10.0


def test_05_containment(deep_trees, record_property):
    start = time.perf_counter()
    reports = [containment_check(t) for t in deep_trees]
    elapsed = time.perf_counter() - start
    violations = sum(len(r.violations) for r in reports)
    checked = sum(r.params["checked_nodes"] for r in reports)
    record_property("detail", f"{checked} node checks, {violations} violations, {elapsed:.2f}s")
    assert violations == 0
    assert elapsed < 60.0


def test_06_measure_decay(depth10_trees, record_property):
    worst = {}
    for name, measure in (("lebesgue", LEBESGUE), ("sqrt", SQRT_WEIGHT)):
        worst[name] = max(measure_decay_check(t, measure).values["worst_ratio"] for t in depth10_trees)
    record_property("detail", ", ".join(f"{k} worst ratio {v:.4f}" for k, v in worst.items()))
    assert max(worst.values()) <= 1.01


def test_07_lebesgue_tau(record_property):
    root = top_half_ratio(LEBESGUE, 0)
    ratios = np.array(level_ratios(LEBESGUE, 8))
    n = np.arange(9)
    closed = 0.5 * (2 - 3 * 2.0 ** (-n - 1)) / (2 - 2.0**-n)
    err = float(np.max(np.abs(ratios - closed)))
    record_property("detail", f"root {root:.6f}, max level error {err:.2e}")
    assert abs(root - 0.25) <= 2e-3
    assert err <= 2e-3


def test_08_layer_cake(depth10_trees, record_property):
    failures = 0
    runs = 0
    for p in (0.5, 1.0, 2.0):
        for measure in (LEBESGUE, SQRT_WEIGHT):
            for t in depth10_trees:
                failures += not layer_cake_check(t, p, measure).passed
                runs += 1
    record_property("detail", f"{runs} runs, {failures} failures")
    assert failures == 0


def test_09_conjugation_isometry(record_property):
    family = TestFamily(count=50, seed=9)
    ratios = operator_ratios(OperatorKind.U_TO_V, family, NormSpec(2.0))
    # independent oracle: int |Re f|^2 dA = sum |a_n|^2 pi / (2(n+1)) = int |Im f|^2 dA
    oracle_err = 0.0
    for f in family.members():
        c = f.coeffs
        n = np.arange(c.size)
        moment = np.sum(np.abs(c[1:]) ** 2 * np.pi / (2 * (n[1:] + 1)))
        num = weighted_p_norm(lambda z: f(z).imag, NormSpec(2.0)) ** 2
        oracle_err = max(oracle_err, abs(num / moment - 1))
    dev = float(np.max(np.abs(ratios - 1)))
    record_property("detail", f"max |ratio - 1| {dev:.2e}, oracle rel err {oracle_err:.2e}")
    assert dev <= 1e-6
    assert oracle_err <= 1e-6


def test_10_boundedness_stability(record_property):
    start = time.perf_counter()
    worst = 0.0
    for p in (0.5, 1.0, 2.0):
        for alpha in (0.0, 0.5, 1.0):
            spec = NormSpec(p, WeightSpec.power(alpha))
            _, drifts = degree_drift(OperatorKind.U_TO_V, TestFamily(), spec, (8, 16, 32), DEFAULT_GRID)
            worst = max(worst, max(drifts))
    elapsed = time.perf_counter() - start
    record_property("detail", f"max drift {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 0.20
    assert elapsed < 300.0


def test_11_bb_sanity(record_property):
    unit = bb_constant(WeightSpec.unit(), 2.0, 6)
    with pytest.raises(DivergenceError):
        bb_constant(WeightSpec.power(-1.5), 2.0, 6)
    record_property("detail", f"unit constant {unit!r}, divergence raised for alpha=-1.5")
    assert abs(unit - 1.0) <= 1e-9


def test_12_determinism(tmp_path, record_property):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = cli.main(["--command", "full-report", "--seed", "42", "--output", str(out)])
        assert code == cli.EXIT_OK
        outputs.append(out)
    same = all((outputs[0] / f).read_bytes() == (outputs[1] / f).read_bytes() for f in ("checks.csv", "constants.csv"))
    record_property("detail", "checks.csv and constants.csv byte-identical" if same else "CSV outputs differ")
    assert same
