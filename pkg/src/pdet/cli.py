"""Command line front end: ``pdet {exact,bounds,strobe,trajectories,sweep,report}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import STRATEGIES
from .detection import exact_pdet_details
from .graphs import (
    GraphError,
    GraphSpec,
    Hamiltonian,
    State,
    add_disorder,
    build_hamiltonian,
    load_graph,
    make_state,
    nodes_at_distance,
)
from .report import EPS_ZERO, BoundReport, ReportOptions, bound_report, comparison_table, strategy_table
from .spectral import eigendecompose, is_exceptional_tau, propagator
from .stroboscopic import detection_statistics, first_detection_amplitudes, sample_trajectories

OUTPUT_DIR_ENV = "PDET_OUTPUT_DIR"
EXIT_CONFIG, EXIT_COMPUTE, EXIT_SANDWICH = 2, 3, 4
METHODS = ("uncertainty", "path-count", "shell")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class RunConfig:
    command: str
    graph: GraphSpec
    detect: str
    inits: list[str]
    taus: list[float] = field(default_factory=list)
    n: int = 10_000
    trials: int = 100_000
    seed: int = 0
    disorder: float = 0.0
    disorder_seed: int = 0
    s_range: str | tuple[int, int] = "auto"
    strategies: tuple[str, ...] = ()
    methods: tuple[str, ...] = METHODS
    opt_pair: tuple[int, int] | None = None
    r_b: str | None = None
    fmt: str = "json"
    output: str | None = None


def parse_state(h: Hamiltonian, spec: str) -> State:
    """``node:L``, ``uniform``, ``uniform:a,b``, ``amps:a=1,b=-1j`` or a bare label."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "node":
            return make_state(h, rest)
        if kind == "uniform":
            return make_state(h, "uniform" if not rest else {"uniform": rest.split(",")})
        if kind == "amps":
            pairs = []
            for item in rest.split(","):
                lab, _, amp = item.partition("=")
                pairs.append((lab, complex(amp.replace("i", "j"))))
            return make_state(h, pairs)
        return make_state(h, spec)
    except ValueError as exc:
        raise ConfigError(f"bad state spec {spec!r}: {exc}") from None


def _s_range(text: str):
    if text in ("auto", "full"):
        return text
    try:
        a, b = (int(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"--s-range must be auto, full or LO:HI, got {text!r}") from None
    if a > b:
        raise ConfigError("--s-range LO must not exceed HI")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pdet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("exact", "bounds", "strobe", "trajectories", "sweep", "report"):
        c = sub.add_parser(name)
        g = c.add_argument_group("graph")
        g.add_argument("--family", choices=["ring", "hypercube", "path", "complete", "star", "binary-tree"])
        g.add_argument("--L", type=int)
        g.add_argument("--B", type=int)
        g.add_argument("--depth", type=int)
        g.add_argument("--graph", help="graph JSON file")
        g.add_argument("--disorder", type=float, default=0.0, help="uniform on-site disorder strength W")
        g.add_argument("--disorder-seed", type=int, default=0)
        c.add_argument("--detect", default=None, help="detection state (default node:<first label>)")
        c.add_argument("--init", action="append", default=[], help="initial state; repeatable")
        c.add_argument("--init-distance", type=int, help="start on the smallest label at this distance")
        c.add_argument("--tau", type=float, action="append", default=[])
        c.add_argument("--n", type=int, default=None, help="number of detection attempts")
        c.add_argument("--trials", type=int, default=100_000)
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--s-range", default="auto", help="auto, full or LO:HI")
        c.add_argument("--methods", default=",".join(METHODS), help="comma list of single-state bound methods")
        c.add_argument("--strategies", default=None, help="comma list from reg,alt,opp,opt")
        c.add_argument("--opt-pair", default=None, help="S1,S2 for the opt strategy")
        c.add_argument("--r-b", default=None, help="bright seed node for the opp strategy")
        c.add_argument("--format", dest="fmt", choices=["json", "csv", "table"], default="json")
        c.add_argument("--output", default=None)
    return p


def config_from_args(ns) -> RunConfig:
    if ns.graph:
        if ns.family:
            raise ConfigError("give either --family or --graph, not both")
        try:
            spec = load_graph(ns.graph)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read graph file: {exc}") from None
    elif ns.family:
        size = {"hypercube": ns.B, "binary-tree": ns.depth}.get(ns.family, ns.L)
        spec = GraphSpec(family=ns.family, size=size)
    else:
        raise ConfigError("need --family or --graph")
    strategies = tuple(ns.strategies.split(",")) if ns.strategies else ()
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r}")
    methods = tuple(m for m in ns.methods.split(",") if m)
    if not methods and not strategies:
        raise ConfigError("need at least one bound method or strategy")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}")
    opt_pair = None
    if ns.opt_pair:
        try:
            opt_pair = tuple(int(x) for x in ns.opt_pair.split(","))
        except ValueError:
            raise ConfigError("--opt-pair must be S1,S2") from None
    if ns.command in ("strobe", "trajectories"):
        if not ns.tau:
            raise ConfigError("--tau is required for stroboscopic runs")
        if any(t <= 0 for t in ns.tau):
            raise ConfigError("tau must be positive")
    n = ns.n if ns.n is not None else (1000 if ns.command == "trajectories" else 10_000)
    if n < 0 or ns.trials < 1:
        raise ConfigError("--n must be >= 0 and --trials >= 1")
    inits = list(ns.init)
    if ns.init_distance is not None:
        inits.append(f"@distance:{ns.init_distance}")
    return RunConfig(
        command=ns.command,
        graph=spec,
        detect=ns.detect,
        inits=inits,
        taus=list(ns.tau),
        n=n,
        trials=ns.trials,
        seed=ns.seed,
        disorder=ns.disorder,
        disorder_seed=ns.disorder_seed,
        s_range=_s_range(ns.s_range),
        strategies=strategies,
        methods=methods,
        opt_pair=opt_pair,
        r_b=ns.r_b,
        fmt=ns.fmt,
        output=ns.output,
    )


def _setup(cfg: RunConfig):
    h = build_hamiltonian(cfg.graph)
    if cfg.disorder < 0:
        raise ConfigError("--disorder must be non-negative")
    h = add_disorder(h, cfg.disorder_seed, cfg.disorder)
    detect = cfg.detect or f"node:{h.labels[0]}"
    d = parse_state(h, detect)
    inits = []
    for spec in cfg.inits:
        if spec.startswith("@distance:"):
            xi = int(spec.split(":")[1])
            nz = np.flatnonzero(np.abs(d.amplitudes) > 1e-12)
            if nz.size != 1:
                raise ConfigError("--init-distance needs a localized detection state")
            nodes = nodes_at_distance(h, int(nz[0]), xi)
            if not nodes:
                raise ConfigError(f"no node at distance {xi}")
            inits.append((nodes[0], parse_state(h, f"node:{nodes[0]}")))
        else:
            inits.append((spec, parse_state(h, spec)))
    return h, detect, d, inits


def _provenance(cfg: RunConfig, detect: str, init: str) -> dict:
    return {
        "graph": cfg.graph.to_dict(),
        "detect": detect,
        "init": init,
        "disorder": cfg.disorder,
        "disorder_seed": cfg.disorder_seed,
    }


def _require_inits(inits, h):
    if not inits:
        raise ConfigError("need --init or --init-distance")
    return inits


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _report_options(cfg: RunConfig, strategies_default=STRATEGIES) -> ReportOptions:
    return ReportOptions(
        s_range=cfg.s_range,
        strategies=cfg.strategies or strategies_default,
        methods=cfg.methods,
        opt_pairs=None if cfg.opt_pair is None else (cfg.opt_pair,),
        r_b=cfg.r_b,
    )


def run_exact(cfg: RunConfig) -> tuple[str, int]:
    h, detect, d, inits = _setup(cfg)
    decomp = eigendecompose(h)
    rows = []
    for label, psi in _require_inits(inits, h):
        res = exact_pdet_details(decomp, d, psi)
        rows.append({"init": label, "p_det": res.value, "raw": res.raw})
    if cfg.fmt == "csv":
        return _csv([["init", "p_det", "raw"]] + [[r["init"], r["p_det"], r["raw"]] for r in rows]), 0
    if cfg.fmt == "table":
        return "\n".join(f"{r['init']}\t{r['p_det']:.4f}" for r in rows) + "\n", 0
    doc = {"p_det": rows[0]["p_det"]} if len(rows) == 1 else {"results": rows}
    doc["provenance"] = {"graph": cfg.graph.to_dict(), "detect": detect}
    return _json(doc), 0


def _reports(cfg: RunConfig, strategies_default):
    h, detect, d, inits = _setup(cfg)
    if not inits:
        inits = [(lab, parse_state(h, f"node:{lab}")) for lab in h.labels]
    decomp = eigendecompose(h)
    opts = _report_options(cfg, strategies_default)
    out = []
    for label, psi in inits:
        out.append((label, bound_report(h, d, psi, opts, decomp, _provenance(cfg, detect, label))))
    return out


def _report_doc(rep: BoundReport, include_exact=True) -> dict:
    doc = _plain(rep.to_dict())
    if not include_exact:
        for k in ("exact", "delta", "violations", "aus_residual"):
            doc.pop(k)
        for sb in doc["strategy_best"].values():
            sb.pop("delta")
    return doc


def run_bounds(cfg: RunConfig) -> tuple[str, int]:
    reps = _reports(cfg, ())
    if cfg.fmt == "csv":
        rows = [["init", "method", "lower"]]
        for label, r in reps:
            rows += [[label, k, float(v)] for k, v in r.lower.items()]
            rows.append([label, "upper", float(r.upper)])
        return _csv(rows), 0
    if cfg.fmt == "table":
        lines = [f"{label}\tlower={r.best_lower:.4f}\tupper={r.upper:.4f}\tnu={r.nu}" for label, r in reps]
        return "\n".join(lines) + "\n", 0
    return _json({"reports": [_report_doc(r, include_exact=False) for _, r in reps]}), 0


def run_report(cfg: RunConfig) -> tuple[str, int]:
    reps = _reports(cfg, cfg.strategies)
    status = EXIT_SANDWICH if any(r.violations for _, r in reps) else 0
    if cfg.fmt == "table":
        text = comparison_table(reps)
        for label, r in reps:
            if r.strategy_best:
                text += f"\n\nstrategies for init {label}:\n" + strategy_table(r)
        return text + "\n", status
    if cfg.fmt == "csv":
        rows = [["init", "best_lower", "exact", "upper", "nu", "delta"]]
        rows += [[lab, float(r.best_lower), float(r.exact), float(r.upper), r.nu, r.delta] for lab, r in reps]
        return _csv(rows), status
    return _json({"reports": [_report_doc(r) for _, r in reps]}), status


def run_sweep(cfg: RunConfig) -> tuple[str, int]:
    """Lower bound and Delta versus s for each method (plot-ready)."""
    reps = _reports(cfg, cfg.strategies or STRATEGIES)
    rows = [["init", "method", "params", "lower", "delta"]]
    for label, r in reps:
        for key, val in r.lower.items():
            method, _, params = key.partition("(")
            delta = (r.upper - val) / r.exact if r.exact > EPS_ZERO else ""
            rows.append([label, method, params.rstrip(")"), float(val), delta])
    if cfg.fmt == "json":
        return _json({"columns": rows[0], "rows": _plain(rows[1:])}), 0
    return _csv(rows), 0


def run_strobe(cfg: RunConfig) -> tuple[str, int]:
    h, detect, d, inits = _setup(cfg)
    _, psi = _require_inits(inits, h)[0]
    decomp = eigendecompose(h)
    runs = []
    csv_rows = [["tau", "n", "re_phi", "im_phi", "p_n", "S_n"]]
    for tau in cfg.taus:
        rec = first_detection_amplitudes(propagator(decomp, tau), d, psi, cfg.n)
        stats = detection_statistics(rec)
        runs.append(
            {
                "tau": tau,
                "n": cfg.n,
                "exceptional": rec.exceptional,
                "exceptional_pairs": [list(p) for p in rec.exceptional_pairs],
                "phis": [[float(z.real), float(z.imag)] for z in rec.phis],
                "S": [float(x) for x in stats.curve],
                "S_final": stats.final,
                "undetected": stats.undetected,
            }
        )
        for n, (z, p, s) in enumerate(zip(rec.phis, rec.probabilities, stats.curve), 1):
            csv_rows.append([tau, n, float(z.real), float(z.imag), float(p), float(s)])
    if cfg.fmt == "csv":
        return _csv(csv_rows), 0
    if cfg.fmt == "table":
        return "\n".join(f"tau={r['tau']}\tS_{r['n']}={r['S_final']:.4f}" for r in runs) + "\n", 0
    return _json({"runs": runs, "provenance": {"graph": cfg.graph.to_dict(), "detect": detect}}), 0


def run_trajectories(cfg: RunConfig) -> tuple[str, int]:
    h, detect, d, inits = _setup(cfg)
    _, psi = _require_inits(inits, h)[0]
    decomp = eigendecompose(h)
    runs = []
    for tau in cfg.taus:
        est = sample_trajectories(propagator(decomp, tau), d, psi, cfg.n, cfg.trials, cfg.seed)
        doc = est.to_dict()
        doc["tau"] = tau
        doc["exceptional"] = is_exceptional_tau(decomp, tau)[0]
        runs.append(doc)
    if cfg.fmt == "csv":
        cols = ["tau", "detected_fraction", "stderr", "trials", "n_max", "seed"]
        return _csv([cols] + [[r[c] for c in cols] for r in runs]), 0
    if cfg.fmt == "table":
        return "\n".join(f"tau={r['tau']}\t{r['detected_fraction']:.4f} +- {r['stderr']:.4f}" for r in runs) + "\n", 0
    return _json({"runs": runs}), 0


COMMANDS = {
    "exact": run_exact,
    "bounds": run_bounds,
    "report": run_report,
    "sweep": run_sweep,
    "strobe": run_strobe,
    "trajectories": run_trajectories,
}


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _write_atomic(path: str, text: str) -> None:
    target = Path(path)
    if not target.is_absolute() and os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / target
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, target)


def run_command(argv: list[str] | None = None) -> tuple[int, str]:
    """Run one subcommand; returns (exit status, output document)."""
    try:
        cfg = config_from_args(build_parser().parse_args(argv))
        text, status = COMMANDS[cfg.command](cfg)
    except (ConfigError, GraphError) as exc:
        return EXIT_CONFIG, _json({"error": str(exc), "kind": "config"})
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable document
        return EXIT_COMPUTE, _json({"error": f"{type(exc).__name__}: {exc}", "kind": "computation"})
    if cfg.output:
        _write_atomic(cfg.output, text)
    return status, text


def main(argv: list[str] | None = None) -> int:
    status, text = run_command(argv)
    (sys.stdout if status in (0, EXIT_SANDWICH) else sys.stderr).write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
