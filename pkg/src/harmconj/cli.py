"""Command-line driver.

Configuration is a line-based ``key = value`` file with ``#`` comments;
every key can also be given as a ``--key value`` flag, which wins over the
file.  Exit codes: 0 all checks pass, 1 some check failed, 2 configuration
or input error, 3 a weight diverged (outside the supported range).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, carleson, goodlambda
from .carleson import CarlesonTree, assign_from_function, synthetic_tree, verify_bd_inequality
from .quadrature import NormSpec, PolarGrid
from .report import GOODLAMBDA_COLUMNS, CheckReport, node_label
from .series import taylor_remainder_residual
from .weights import DivergenceError, MeasureSpec, WeightSpec, bb_constant, essential_constancy, parse_weight

log = logging.getLogger("harmconj")

COMMANDS = ("check-weight", "verify-lemmas", "verify-goodlambda", "estimate-constants", "full-report")
RANDOMIZED = {"verify-lemmas", "verify-goodlambda", "estimate-constants", "full-report"}
OUTPUT_ENV = "HARMCONJ_OUTPUT_DIR"
CONSTANTS_COLUMNS = ("op_kind", "p", "weight_family", "weight_param", "eta", "degree", "ratio_max", "drift")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DIVERGENT = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _positive(name):
    def check(v):
        if not v > 0:
            raise ValueError(f"{name} must be > 0")
        return v
    return check


def _int_range(name, lo, hi):
    def check(v):
        if not lo <= v <= hi:
            raise ValueError(f"{name} must lie in [{lo}, {hi}]")
        return v
    return check


def _q_check(v):
    if not v > 1:
        raise ValueError("q must be > 1")
    return v


def _etas(text):
    vals = tuple(float(x) for x in text.split(",") if x.strip())
    if not vals or any(not 0 < e < 1 for e in vals):
        raise ValueError("eta values must lie in (0, 1)")
    return vals


def _command(text):
    if text not in COMMANDS:
        raise ValueError(f"command must be one of {', '.join(COMMANDS)}")
    return text


# key -> (parser, validator, default)
KEYS = {
    "command": (str, _command, None),
    "p": (float, _positive("p"), 2.0),
    "q": (float, _q_check, 2.0),
    "weight": (str, None, "unit"),
    "tree_depth": (int, _int_range("tree_depth", 0, 14), 8),
    "bb_depth": (int, _int_range("bb_depth", 1, 8), 4),
    "radial_nodes": (int, _int_range("radial_nodes", 8, 1024), 96),
    "angular_nodes": (int, _int_range("angular_nodes", 16, 4096), 256),
    "eta": (str, _etas, "0.25"),
    "seed": (int, _int_range("seed", 0, 2**63 - 1), None),
    "output": (str, None, None),
    "max_degree": (int, _int_range("max_degree", 1, 64), 16),
    "family_count": (int, _int_range("family_count", 1, 500), 12),
    "lemma_draws": (int, _int_range("lemma_draws", 1, 10**6), 2000),
    "synthetic_trees": (int, _int_range("synthetic_trees", 0, 10**4), 20),
    "samples": (int, _int_range("samples", 4, 10**5), 256),
    "tree_table": (str, None, None),
}


@dataclass
class RunConfig:
    command: str
    p: float = 2.0
    q: float = 2.0
    weight: str = "unit"
    tree_depth: int = 8
    bb_depth: int = 4
    radial_nodes: int = 96
    angular_nodes: int = 256
    eta: tuple = (0.25,)
    seed: int | None = None
    output: str | None = None
    max_degree: int = 16
    family_count: int = 12
    lemma_draws: int = 2000
    synthetic_trees: int = 20
    samples: int = 256
    tree_table: str | None = None
    weight_spec: WeightSpec = field(default=None, repr=False)

    @property
    def grid(self) -> PolarGrid:
        return PolarGrid.gauss(self.radial_nodes, self.angular_nodes)

    def output_dir(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV) or "harmconj-report")


def read_config_lines(text: str):
    """``{key: (raw value, line number)}`` from ``key = value`` lines."""
    raw, errors = {}, []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            errors.append(f"line {lineno}: unknown key: {key}")
            continue
        raw[key] = (value, lineno)
    return raw, errors


def validate(raw: dict, errors=()) -> RunConfig:
    errors = list(errors)
    values = {}
    for key, (value, lineno) in raw.items():
        conv, check, _ = KEYS[key]
        where = f"line {lineno}: " if lineno else ""
        try:
            v = conv(value)
        except ValueError:
            errors.append(f"{where}{key}: invalid value {value!r}")
            continue
        if check is not None:
            try:
                v = check(v)
            except ValueError as exc:
                errors.append(f"{where}{exc}")
                continue
        values[key] = v
    if "command" not in raw:
        errors.append("missing required key: command")
    if values.get("command") in RANDOMIZED and "seed" not in raw:
        errors.append("missing required key: seed")
    weight_spec = None
    try:
        weight_spec = parse_weight(values.get("weight", KEYS["weight"][2]))
    except (ValueError, OSError) as exc:
        lineno = raw.get("weight", ("", 0))[1]
        errors.append((f"line {lineno}: " if lineno else "") + f"weight: {exc}")
    if errors:
        raise ConfigError(errors)
    return RunConfig(weight_spec=weight_spec, **values)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration file; raises :class:`ConfigError`."""
    raw, errors = read_config_lines(text)
    return validate(raw, errors)


# --------------------------------------------------------------------------- checks


def _merge(name: str, tagged, params=None) -> CheckReport:
    """Combine per-item reports of one check; node labels get the item tag."""
    rows, passed, worst = [], True, np.inf
    for tag, rep in tagged:
        passed &= rep.passed
        worst = min(worst, rep.worst_margin)
        for r in rep.rows:
            rows.append((name, f"{tag}/{r[1]}", *r[2:]))
    return CheckReport(name, passed, worst, rows, params or {})


def _scalar_check(name, item, lhs, rhs, params=None) -> CheckReport:
    """Single-item check ``lhs <= rhs``."""
    margin = rhs - lhs
    nan = float("nan")
    return CheckReport(name, margin >= 0, margin, [(name, item, nan, nan, nan, lhs, rhs, margin)], params or {})


def weight_checks(cfg: RunConfig) -> list:
    w = cfg.weight_spec
    const = bb_constant(w, cfg.q, cfg.bb_depth)
    reports = [_scalar_check("bb_constant", w.label, 1.0 - 1e-9, const, {"q": cfg.q, "depth": cfg.bb_depth})]
    ec = essential_constancy(w, cfg.tree_depth)
    reports.append(_scalar_check("essential_constancy", w.label, 1.0, ec, {"depth": cfg.tree_depth}))
    tau = carleson.top_half_ratio(MeasureSpec(w, cfg.grid), cfg.tree_depth)
    reports.append(_scalar_check("top_half_ratio", w.label, 0.0, tau, {"depth": cfg.tree_depth}))
    return reports


def _sweep(name: str, items, params=None) -> CheckReport:
    """One check over many ``(label, lhs, rhs)`` items; keeps failures or the tightest item."""
    nan = float("nan")
    rows = [(name, label, nan, nan, nan, lhs, rhs, rhs - lhs) for label, lhs, rhs in items]
    worst = min(r[-1] for r in rows)
    bad = [r for r in rows if r[-1] < 0]
    return CheckReport(name, not bad, worst, bad or [min(rows, key=lambda r: r[-1])], params or {})


def lemma_checks(cfg: RunConfig) -> list:
    rng = np.random.default_rng([cfg.seed, 1])
    fam = bounds.TestFamily(max_degree=cfg.max_degree, count=cfg.family_count, seed=cfg.seed)
    taylor = []
    for i, f in enumerate(fam.members()):
        for k in range(4):
            z, w = (complex(0.9 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())) for _ in range(2))
            taylor.append((f"{i}.{k}", taylor_remainder_residual(f, z, w, 64), 1e-10))
    reports = [_sweep("taylor_identity", taylor, {"quad_points": 64})]
    lem = []
    for i in range(cfg.lemma_draws):
        eta = cfg.eta[i % len(cfg.eta)]
        deg = int(rng.integers(0, 11))
        f = bounds.PowerSeries(rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1))
        margin = bounds.lemma2_margin(f, bounds.random_lemma2_config(rng, eta))
        lem.append((f"{i}@eta={eta}", -margin, 1e-9))
    reports.append(_sweep("lemma2_margin", lem, {"draws": cfg.lemma_draws}))
    probe = bounds.delta_norm_probe(cfg.p, fam, cfg.grid, cfg.weight_spec)
    reports.append(_scalar_check("delta_norm_triangle", f"p={cfg.p}", probe.triangle_constant, probe.triangle_bound + 1e-9))
    reports.append(_scalar_check("delta_norm_scaling", f"p={cfg.p}", abs(probe.a_exp - 1) + abs(probe.b_exp - 1), 1e-9))
    return reports


def _trees(cfg: RunConfig):
    if cfg.tree_table:
        text = Path(cfg.tree_table).read_text()
        return [("table", CarlesonTree.loads(text))]
    out = []
    fam = bounds.TestFamily(max_degree=min(cfg.max_degree, 12), count=cfg.family_count, seed=cfg.seed, hard_fraction=0.0)
    for i, f in enumerate(fam.members()):
        out.append((f"f{i}", assign_from_function(f, cfg.tree_depth, cfg.samples)))
    rng = np.random.default_rng([cfg.seed, 2])
    for i in range(cfg.synthetic_trees):
        drop = (0.0, 0.3, 0.6)[i % 3]
        out.append((f"s{i}", synthetic_tree(rng, cfg.tree_depth, drop_prob=drop)))
    return out


def goodlambda_checks(cfg: RunConfig) -> list:
    trees = _trees(cfg)
    nan = float("nan")
    bd, valid = [], []
    for tag, tree in trees:
        rep = verify_bd_inequality(tree)
        rows = [("bd_inequality", node_label(sq.level, sq.index), nan, nan, nan, nan, nan, -amt) for sq, amt in rep.violations]
        bd.append((tag, CheckReport("bd_inequality", rep.ok, -rep.max_violation, rows)))
        if rep.ok:
            valid.append((tag, tree))
    reports = [_merge("bd_inequality", bd, {"trees": len(trees)})]
    measures = {"lebesgue": MeasureSpec(WeightSpec.unit(), cfg.grid)}
    if cfg.weight_spec.label != "unit":
        measures[cfg.weight_spec.label] = MeasureSpec(cfg.weight_spec, cfg.grid)
    reports.append(_merge("chain_bound", [(t, goodlambda.chain_bound_check(tr)) for t, tr in valid]))
    reports.append(_merge("containment", [(t, goodlambda.containment_check(tr)) for t, tr in valid]))
    for mname, m in measures.items():
        reports.append(_merge(f"measure_decay[{mname}]", [(t, goodlambda.measure_decay_check(tr, m)) for t, tr in valid]))
        reports.append(_merge(f"layer_cake[{mname}]", [(t, goodlambda.layer_cake_check(tr, cfg.p, m)) for t, tr in valid], {"p": cfg.p}))
        ratios = []
        for _, tr in valid:
            try:
                ratios.append(goodlambda.norm_domination_estimate(tr, cfg.p, m))
            except ZeroDivisionError:
                ratios.append((float("inf"), float("inf")))
        arr = np.array(ratios) if ratios else np.zeros((0, 2))
        finite = bool(np.all(np.isfinite(arr[~np.isnan(arr)]))) if arr.size else True
        kmax = float(np.nanmax(arr[:, 0])) if arr.size and not np.all(np.isnan(arr[:, 0])) else float("nan")
        kpmax = float(np.nanmax(arr[:, 1])) if arr.size and not np.all(np.isnan(arr[:, 1])) else float("nan")
        name = f"norm_domination[{mname}]"
        rows = [] if finite else [(name, "all", nan, nan, nan, kpmax, nan, -np.inf)]
        reports.append(CheckReport(name, finite, 0.0 if finite else -np.inf, rows, {"K_max": kmax, "K_prime_max": kpmax, "p": cfg.p}))
    return reports


def constant_checks(cfg: RunConfig):
    fam = bounds.TestFamily(max_degree=cfg.max_degree, count=cfg.family_count, seed=cfg.seed)
    spec = NormSpec(cfg.p, cfg.weight_spec)
    grid = cfg.grid
    degrees = (cfg.max_degree, 2 * cfg.max_degree)
    wfam = cfg.weight_spec.family.value
    wparam = cfg.weight_spec.label
    rows, reports = [], []
    for kind in bounds.OperatorKind:
        etas = cfg.eta if kind in (bounds.OperatorKind.SHIFT_RADIAL, bounds.OperatorKind.SHIFT_ROTATED) else cfg.eta[:1]
        for eta in etas:
            maxima, drifts = bounds.degree_drift(kind, fam, spec, degrees, grid, eta, mc_samples=4)
            for deg, val, dr in zip(degrees, maxima, [float("nan"), *drifts]):
                rows.append((kind.value, cfg.p, wfam, wparam, eta, deg, val, dr))
            reports.append((f"{kind.value}@eta={eta}", max(drifts), bounds.DRIFT_LIMIT))
    merged = _sweep("boundedness_drift", reports, {"degrees": list(degrees)})
    pipe = bounds.theorem_pipeline_report(fam, spec, grid, cfg.eta[0], cfg.q, cfg.bb_depth)
    pipeline = _scalar_check("pipeline_consistency", wparam, pipe.u_to_v, pipe.product * (1 + 1e-9), pipe.as_dict())
    return [merged, pipeline], rows


# --------------------------------------------------------------------------- output


def _fmt(x):
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report_rows(reports):
    rows = []
    for rep in reports:
        for r in rep.rows:
            # passing checks keep only informative non-negative rows
            if rep.passed and r[-1] < 0:
                continue
            rows.append(r)
    return rows


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; write ``checks.csv``, ``summary.json`` (and ``constants.csv``)."""
    reports, const_rows = [], None
    try:
        if cfg.command in ("check-weight", "full-report"):
            reports += weight_checks(cfg)
        if cfg.command in ("verify-lemmas", "full-report"):
            reports += lemma_checks(cfg)
        if cfg.command in ("verify-goodlambda", "full-report"):
            reports += goodlambda_checks(cfg)
        if cfg.command in ("estimate-constants", "full-report"):
            more, const_rows = constant_checks(cfg)
            reports += more
    except DivergenceError as exc:
        log.error("divergent weight: %s", exc)
        out = cfg.output_dir()
        write_atomic(out / "summary.json", json.dumps({"divergence": {"pass": False, "worst_margin": None, "params": {"message": str(exc)}}}, indent=2, sort_keys=True) + "\n")
        return EXIT_DIVERGENT
    except (OSError, ValueError) as exc:
        log.error("input error: %s", exc)
        return EXIT_CONFIG
    out = cfg.output_dir()
    write_atomic(out / "checks.csv", _csv_text(GOODLAMBDA_COLUMNS, _report_rows(reports)))
    if const_rows is not None:
        write_atomic(out / "constants.csv", _csv_text(CONSTANTS_COLUMNS, const_rows))
    summary = {rep.name: rep.summary() for rep in reports}
    write_atomic(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    failed = [rep.name for rep in reports if not rep.passed]
    for name in failed:
        log.warning("check failed: %s", name)
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harmconj", description="Verify harmonic-conjugation bounds on weighted Bergman spaces.")
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    parser.add_argument("-v", "--verbose", action="store_true")
    for key in KEYS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar="VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text = args.config.read_text() if args.config else ""
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raw, errors = read_config_lines(text)
    for key in KEYS:
        value = getattr(args, key)
        if value is not None:
            raw[key] = (value, 0)
    try:
        cfg = validate(raw, errors)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    code = run(cfg)
    print(f"{cfg.command}: exit {code} (reports in {cfg.output_dir()})")
    return code


if __name__ == "__main__":
    sys.exit(main())
