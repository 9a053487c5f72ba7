"""Command-line entry point.

    kirchhoff check CONFIG
    kirchhoff simulate CONFIG
    kirchhoff equilibria CONFIG
    kirchhoff probe {absorbing,splitting,quasistab,determining,dimension} CONFIG
    kirchhoff oracle-compare CONFIG
    kirchhoff sweep CONFIG

CONFIG is a YAML file; see README.md for the schema.  Outputs go to
``--output-dir``, else ``run.output_dir``, else ``$KIRCHHOFF_OUTPUT_DIR``,
else ``./kirchhoff-out``.  Exit codes: 0 success, 2 assumption gate refused,
3 numerical failure, 4 malformed config.
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import outputs
from .dynamics import ModalState, StepperConfig, simulate
from .equilibria import EquilibriumLibrary
from .errors import AssumptionGateError, ConfigError, KirchhoffError, NumericalError
from .longtime import (absorbing_probe, determining_probe, dimension_probe, quasi_stability_probe,
                       sample_attractor, splitting_probe)
from .model import PHI_FAMILIES, SIGMA_FAMILIES, SOURCE_FAMILIES, CoefficientSet, check_assumptions
from .oracle import cross_method_gap
from .spectral import Basis, Domain

logger = logging.getLogger("kirchhoff")

ENV_OUTPUT_DIR = "KIRCHHOFF_OUTPUT_DIR"
EXIT_OK, EXIT_GATE, EXIT_NUMERICAL, EXIT_CONFIG = 0, 2, 3, 4
PROBES = ("absorbing", "splitting", "quasistab", "determining", "dimension")

# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------

LEAF = None
MODAL = "modal"  # mapping of 1-based mode number -> value


def _family(registry):
    return ("family", registry)


SCHEMA = {
    "domain": {"kind": LEAF, "lengths": LEAF, "N": LEAF},
    "coefficients": {
        "sigma": _family(SIGMA_FAMILIES),
        "phi": _family(PHI_FAMILIES),
        "f": _family(SOURCE_FAMILIES),
        "h": MODAL,
    },
    "stepper": {k: LEAF for k in ("dt", "scheme", "newton_tol", "newton_max_iters", "dealias", "max_halvings")},
    "run": {k: LEAF for k in ("T", "stride", "seed", "output_dir", "plots", "workers")},
    "initial": {"u": MODAL, "v": MODAL},
    "equilibria": {k: LEAF for k in ("scales", "random_starts", "amplitude", "tol", "max_iters")},
    "oracle": {"fd_nodes": LEAF},
    "sweep": {"parameter": LEAF, "values": LEAF, "workers": LEAF},
    "probe": {
        "absorbing": {k: LEAF for k in ("members", "amplitude", "radii", "settle_fraction")},
        "splitting": {"nu": LEAF},
        "quasistab": {k: LEAF for k in ("mode", "pairs", "amplitude", "delta", "slack")},
        "determining": {k: LEAF for k in ("n_low", "window", "pairs", "amplitude", "delta")},
        "dimension": {k: LEAF for k in ("embed_modes", "extra_modes", "scales", "trajectories", "radius",
                                        "burn_in", "sample_time", "lh_modes")},
    },
}
REQUIRED = ("domain", "coefficients")


def _line(node) -> int:
    return node.start_mark.line + 1


def _validate(node, schema, path):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"line {_line(node)}: '{path or '<root>'}' must be a mapping")
    seen = set()
    for key_node, value_node in node.value:
        key = key_node.value
        where = f"{path}.{key}" if path else key
        if key in seen:
            raise ConfigError(f"line {_line(key_node)}: duplicate key '{where}'")
        seen.add(key)
        if key not in schema:
            raise ConfigError(f"line {_line(key_node)}: unknown key '{where}'; expected one of {sorted(schema)}")
        sub = schema[key]
        if isinstance(sub, dict):
            _validate(value_node, sub, where)
        elif isinstance(sub, tuple):
            _validate_family(value_node, sub[1], where)
        elif sub == MODAL:
            if not isinstance(value_node, yaml.MappingNode):
                raise ConfigError(f"line {_line(value_node)}: '{where}' must map mode numbers to values")


def _validate_family(node, registry, path):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"line {_line(node)}: '{path}' must be a mapping with a 'family' key")
    entries = {k.value: (k, v) for k, v in node.value}
    if "family" not in entries:
        raise ConfigError(f"line {_line(node)}: '{path}' is missing 'family'")
    tag = entries["family"][1].value
    if tag not in registry:
        raise ConfigError(f"line {_line(entries['family'][1])}: '{path}.family' = {tag!r} is not one of "
                          f"{sorted(registry)}")
    allowed = {f.name for f in dataclasses.fields(registry[tag])} | {"family"}
    for key, (k_node, _) in entries.items():
        if key not in allowed:
            raise ConfigError(f"line {_line(k_node)}: unknown parameter '{path}.{key}' for family {tag!r}; "
                              f"expected {sorted(allowed - {'family'})}")


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    domain: Domain
    coeffs: CoefficientSet
    stepper: StepperConfig
    T: float = 1.0
    stride: int = 1
    seed: int = 0
    output_dir: str | None = None
    plots: bool = False
    workers: int = 1
    initial: dict = field(default_factory=dict)
    blocks: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    sha256: str = ""

    def basis(self) -> Basis:
        return Basis(self.domain, self.stepper.dealias)

    def block(self, *path) -> dict:
        out = self.blocks
        for p in path:
            out = out.get(p) or {}
        return out


def _modal(mapping, n, where) -> np.ndarray:
    out = np.zeros(n)
    for k, val in (mapping or {}).items():
        try:
            k, val = int(k), float(val)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: entries must be 'mode: value' numbers, got {k!r}: {val!r}") from None
        if not 1 <= k <= n:
            raise ConfigError(f"{where}: mode {k} outside 1..{n}")
        out[k - 1] = val
    return out


def build_config(raw: dict, sha256: str = "") -> RunConfig:
    """Turn an already schema-checked mapping into typed objects."""
    for key in REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required block '{key}'")
    d = raw["domain"] or {}
    kind = d.get("kind", "interval")
    lengths = d.get("lengths", [math.pi] if kind == "interval" else [math.pi, math.pi])
    if not isinstance(lengths, list):
        lengths = [lengths]
    if "N" not in d:
        raise ConfigError("domain: missing 'N'")
    try:
        domain = Domain(kind, tuple(float(x) for x in lengths), d["N"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"domain: {exc}") from None
    c = dict(raw["coefficients"] or {})
    c["h"] = {int(k): v for k, v in (c.get("h") or {}).items()}
    coeffs = CoefficientSet.from_dict(c)
    try:
        stepper = StepperConfig(**(raw.get("stepper") or {}))
    except TypeError as exc:
        raise ConfigError(f"stepper: {exc}") from None
    run = raw.get("run") or {}
    cfg = RunConfig(
        domain=domain, coeffs=coeffs, stepper=stepper,
        T=float(run.get("T", 1.0)), stride=int(run.get("stride", 1)), seed=int(run.get("seed", 0)),
        output_dir=run.get("output_dir"), plots=bool(run.get("plots", False)), workers=int(run.get("workers", 1)),
        initial=raw.get("initial") or {},
        blocks={k: raw.get(k) or {} for k in ("equilibria", "oracle", "sweep", "probe")},
        raw=raw, sha256=sha256,
    )
    if coeffs.h and max(k for k, _ in coeffs.h) > domain.n_modes:
        raise ConfigError(f"coefficients.h: mode exceeds the {domain.n_modes} available modes")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        if node is None:
            raise ConfigError("config file is empty")
        _validate(node, SCHEMA, "")
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{where}YAML syntax error: {getattr(exc, 'problem', exc)}") from None
    return build_config(raw, outputs.sha256_text(text))


def initial_state(cfg: RunConfig) -> ModalState:
    n = cfg.domain.n_modes
    if not cfg.initial:
        u = np.zeros(n)
        u[0] = 1.0
        return ModalState(0.0, u, np.zeros(n))
    return ModalState(0.0, _modal(cfg.initial.get("u"), n, "initial.u"), _modal(cfg.initial.get("v"), n, "initial.v"))


def random_state(rng, lam, amplitude: float) -> ModalState:
    """Random modal state with smooth decay: u_k ~ a/lam_k, v_k ~ a/sqrt(lam_k)."""
    g = rng.standard_normal((2, len(lam)))
    return ModalState(0.0, amplitude * g[0] / lam, amplitude * g[1] / np.sqrt(lam))


def random_pairs(rng, lam, count, amplitude, delta):
    pairs = []
    for _ in range(count):
        a = random_state(rng, lam, amplitude)
        b = random_state(rng, lam, delta)
        pairs.append((a, ModalState(0.0, a.u + b.u, a.v + b.v)))
    return pairs


def output_dir(cfg: RunConfig, override: str | None) -> Path:
    out = override or cfg.output_dir or os.environ.get(ENV_OUTPUT_DIR) or "kirchhoff-out"
    return Path(out)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _meta(cfg: RunConfig) -> dict:
    return {"config_sha256": cfg.sha256}


def _write_timing(cfg: RunConfig, out: Path, name: str, seconds: float):
    # wall time is kept apart so the other outputs stay byte-identical across reruns
    outputs.write_json(out / "timing.json", {**_meta(cfg), "command": name, "wall_time_seconds": seconds})


def cmd_check(cfg: RunConfig, out: Path) -> int:
    report = check_assumptions(cfg.coeffs, cfg.domain.dim, lambda1=cfg.domain.lambda1)
    data = {**_meta(cfg), "assumptions": report.to_dict()}
    outputs.write_json(out / "check.json", data)
    for name, verdict in report.verdicts.items():
        print(f"{name:22s} {verdict.status:12s} {verdict.note}")
    return EXIT_OK if report.passes("A1(i)", "A1(ii)") else EXIT_GATE


def _gate_wellposed(cfg: RunConfig):
    report = check_assumptions(cfg.coeffs, cfg.domain.dim, lambda1=cfg.domain.lambda1)
    bad = report.failed("A1(i)", "A1(ii)")
    if bad:
        raise AssumptionGateError(f"refusing to simulate: {', '.join(bad)} not satisfied", report, bad)


def run_simulation(cfg: RunConfig, out: Path) -> dict:
    _gate_wellposed(cfg)
    basis = cfg.basis()
    traj = simulate(basis, initial_state(cfg), cfg.T, cfg.coeffs, cfg.stepper, cfg.stride)
    meta = _meta(cfg)
    header, rows = outputs.trajectory_rows(basis, traj)
    outputs.write_csv(out / "trajectory.csv", header, rows, meta)
    header, rows = outputs.ledger_rows(traj.ledger)
    outputs.write_csv(out / "ledger.csv", header, rows, meta)
    led = traj.ledger.arrays()
    summary = {
        **meta,
        "config": cfg.raw,
        "domain": cfg.domain.to_dict(),
        "stepper": cfg.stepper.to_dict(),
        "newton": traj.stats.to_dict(),
        "final_time": float(traj.t[-1]),
        "final_energy": float(led["E"][-1]),
        "terminal_residual": float(led["residual"][-1]),
        "max_abs_residual": traj.ledger.max_abs_residual,
        "lyapunov_violations": int(len(traj.ledger.lyapunov_violations())),
    }
    outputs.write_json(out / "summary.json", summary)
    if cfg.plots:
        outputs.atomic_write(out / "energy.svg", outputs.svg_line_chart({"E": (led["t"], led["E"])}, "energy", meta=meta))
        outputs.atomic_write(out / "residual.svg", outputs.svg_line_chart(
            {"|E + D - E(0)|": (led["t"], np.abs(led["residual"]))}, "energy identity residual", logy=True, meta=meta))
    return summary


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    summary = run_simulation(cfg, out)
    print(f"T={summary['final_time']:g}  E={summary['final_energy']:.6e}  "
          f"max|residual|={summary['max_abs_residual']:.3e}")
    return EXIT_OK


def cmd_equilibria(cfg: RunConfig, out: Path) -> int:
    block = cfg.block("equilibria")
    basis = cfg.basis()
    lib = EquilibriumLibrary(basis, cfg.coeffs)
    rng = np.random.default_rng(cfg.seed)
    extra = [random_state(rng, basis.lam, float(block.get("amplitude", 1.0))).u
             for _ in range(int(block.get("random_starts", 0)))]
    lib.multistart(tuple(block.get("scales", (0.5, 1.0, 2.0))), extra)
    if not cfg.coeffs.h:
        # every supported source is odd, so h = 0 makes the equilibrium set symmetric
        lib.close_under_negation()
    data = {**_meta(cfg), "equilibria": [m.to_dict() for m in lib]}
    outputs.write_json(out / "equilibria.json", data)
    print(f"{len(lib)} equilibria")
    for m in lib:
        print(f"  S={m.S:.6e}  residual={m.residual:.2e}  min_eig={m.min_eig:.4e}")
    return EXIT_OK


def _series_csv(report, path: Path, meta: dict):
    s = report.series
    t = s.get("t")
    if t is None:
        header = ["scale", "count", "count_extra_modes"]
        rows = zip(report.params["scales"], report.diagnostics["counts"], report.diagnostics["counts_extra_modes"])
        outputs.write_csv(path, header, [[float(a), int(b), int(c)] for a, b, c in rows], meta)
        return
    cols, header = [np.asarray(t, dtype=float)], ["t"]
    for name, val in s.items():
        if name == "t":
            continue
        val = np.asarray(val, dtype=float)
        if val.ndim == 1:
            val = val[None, :] if len(val) == len(t) else None
        if val is None:
            continue
        for i, row in enumerate(val):
            # windowed series are shorter than t; pad with nan at the end
            col = np.full(len(t), np.nan)
            col[:len(row)] = row
            cols.append(col)
            header.append(f"{name}_{i}" if len(val) > 1 else name)
    outputs.write_csv(path, header, np.column_stack(cols).tolist(), meta)


def run_probe(kind: str, cfg: RunConfig):
    basis = cfg.basis()
    block = cfg.block("probe", kind)
    rng = np.random.default_rng(cfg.seed)
    amp = float(block.get("amplitude", 1.0))
    if kind == "absorbing":
        ics = [random_state(rng, basis.lam, amp) for _ in range(int(block.get("members", 8)))]
        radii = block.get("radii")
        if radii is not None:
            radii = np.geomspace(float(radii["min"]), float(radii["max"]), int(radii["count"])) \
                if isinstance(radii, dict) else np.asarray(radii, dtype=float)
        return absorbing_probe(basis, ics, cfg.coeffs, cfg.stepper, cfg.T, radii,
                               float(block.get("settle_fraction", 0.5)), cfg.stride, cfg.workers)
    if kind == "splitting":
        return splitting_probe(basis, initial_state(cfg), cfg.coeffs, cfg.stepper, cfg.T,
                               float(block.get("nu", 2.0)))
    if kind == "quasistab":
        pairs = random_pairs(rng, basis.lam, int(block.get("pairs", 5)), amp, float(block.get("delta", 0.1)))
        return quasi_stability_probe(basis, pairs, cfg.coeffs, cfg.stepper, cfg.T, block.get("mode", "strong"),
                                     cfg.stride, slack=float(block.get("slack", 0.05)), workers=cfg.workers)
    if kind == "determining":
        pairs = random_pairs(rng, basis.lam, int(block.get("pairs", 3)), amp, float(block.get("delta", 1e-2)))
        return determining_probe(basis, pairs, cfg.coeffs, cfg.stepper, cfg.T, int(block.get("n_low", 3)),
                                 float(block.get("window", 1.0)), cfg.stride, cfg.workers)
    if kind == "dimension":
        u, v = sample_attractor(basis, cfg.coeffs, cfg.stepper, int(block.get("trajectories", 20)),
                                float(block.get("radius", 1.0)), float(block.get("burn_in", 10.0)),
                                float(block.get("sample_time", cfg.T)), cfg.stride, cfg.seed,
                                int(block.get("lh_modes", 4)))
        scales = block.get("scales", {"min": 2.0**-10, "max": 2.0**-2, "count": 9})
        scales = np.geomspace(float(scales["min"]), float(scales["max"]), int(scales["count"])) \
            if isinstance(scales, dict) else np.asarray(scales, dtype=float)
        return dimension_probe(u, v, basis.lam, int(block.get("embed_modes", 2)), scales,
                               int(block.get("extra_modes", 2)))
    raise ConfigError(f"unknown probe {kind!r}; expected one of {PROBES}")


def cmd_probe(kind: str, cfg: RunConfig, out: Path) -> int:
    report = run_probe(kind, cfg)
    meta = _meta(cfg)
    series_name = f"probe_{kind}_series.csv"
    _series_csv(report, out / series_name, meta)
    outputs.write_json(out / f"probe_{kind}.json", {**meta, **report.to_dict(series_name)})
    print(f"{kind}: {report.status}")
    for k, val in report.constants.items():
        print(f"  {k} = {val}")
    return EXIT_OK


def cmd_oracle_compare(cfg: RunConfig, out: Path) -> int:
    if cfg.domain.kind != "interval":
        raise ConfigError("oracle-compare supports the interval domain only")
    m = int(cfg.block("oracle").get("fd_nodes", 256))
    res = cross_method_gap(cfg.domain.lengths[0], cfg.domain.n, m, initial_state(cfg), cfg.coeffs,
                           cfg.stepper, cfg.T, cfg.stride)
    outputs.write_json(out / "oracle_compare.json", {**_meta(cfg), **res})
    print(json.dumps(res, indent=2, sort_keys=True))
    return EXIT_OK


def _set_path(raw: dict, dotted: str, value):
    keys = dotted.split(".")
    node = raw
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"sweep.parameter {dotted!r} does not name a config block")
    node[keys[-1]] = value


def _sweep_member(args):
    raw, sha, out = args
    try:
        cfg = build_config(raw, sha)
        summary = run_simulation(cfg, Path(out))
        return EXIT_OK, summary["final_energy"], summary["max_abs_residual"], summary["terminal_residual"]
    except AssumptionGateError:
        return EXIT_GATE, math.nan, math.nan, math.nan
    except NumericalError:
        return EXIT_NUMERICAL, math.nan, math.nan, math.nan


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    block = cfg.block("sweep")
    if "parameter" not in block or "values" not in block:
        raise ConfigError("sweep needs 'parameter' and 'values'")
    dotted, values = str(block["parameter"]), list(block["values"])
    jobs = []
    for i, val in enumerate(values):
        raw = copy.deepcopy(cfg.raw)
        raw.pop("sweep", None)
        _set_path(raw, dotted, val)
        sha = outputs.sha256_text(cfg.sha256 + f"\n{dotted}={val!r}")
        build_config(raw, sha)  # fail fast on a bad value
        jobs.append((raw, sha, str(out / f"run_{i:03d}")))
    workers = int(block.get("workers", cfg.workers))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_member, jobs))
    else:
        results = [_sweep_member(j) for j in jobs]
    rows = [[i, float(val), code, e, r, tr] for i, (val, (code, e, r, tr)) in enumerate(zip(values, results))]
    outputs.write_csv(out / "aggregate.csv",
                      ["run", dotted, "exit_code", "final_energy", "max_abs_residual", "terminal_residual"],
                      rows, {**_meta(cfg), "parameter": dotted})
    print(f"{len(values)} runs; exit codes {[r[0] for r in results]}")
    return max((r[0] for r in results), default=EXIT_OK)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kirchhoff", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("check", "simulate", "equilibria", "oracle-compare", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("config")
        sp.add_argument("-o", "--output-dir")
    sp = sub.add_parser("probe")
    sp.add_argument("kind", choices=PROBES)
    sp.add_argument("config")
    sp.add_argument("-o", "--output-dir")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    started = time.perf_counter()
    try:
        cfg = load_config(args.config)
        out = output_dir(cfg, args.output_dir)
        if args.command == "probe":
            code = cmd_probe(args.kind, cfg, out)
        else:
            handler = {"check": cmd_check, "simulate": cmd_simulate, "equilibria": cmd_equilibria,
                       "oracle-compare": cmd_oracle_compare, "sweep": cmd_sweep}[args.command]
            code = handler(cfg, out)
        name = args.command if args.command != "probe" else f"probe {args.kind}"
        _write_timing(cfg, out, name, time.perf_counter() - started)
        return code
    except AssumptionGateError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        if exc.report is not None:
            for name in exc.failed:
                v = exc.report.verdicts[name]
                print(f"  {name}: witness={v.witness!r} {v.note}", file=sys.stderr)
        return EXIT_GATE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KirchhoffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
