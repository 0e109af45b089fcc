"""Consolidated bound reports: exact value, every lower bound, the symmetry bound, and Delta."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import bounds as bd
from .detection import EPS_BRIGHT, EPS_RANK, exact_pdet
from .graphs import DarkDisconnected, Hamiltonian, State, distance, scaled_powers
from .spectral import SpectralDecomposition, eigendecompose

SANDWICH_TOL = 1e-9
EPS_ZERO = 1e-12  # exact values below this count as zero when forming Delta


@dataclass
class ReportOptions:
    s_range: str | tuple[int, int] = "auto"
    strategies: tuple[str, ...] = bd.STRATEGIES
    methods: tuple[str, ...] = ("uncertainty", "path-count", "shell")
    opt_pairs: tuple[tuple[int, int], ...] | None = None  # explicit (s1, s2) grid for opt
    r_b: str | None = None
    eps_bright: float = EPS_BRIGHT
    eps_rank: float = EPS_RANK
    eps_eq: float = bd.EPS_EQ
    eps_var: float = bd.EPS_VAR


@dataclass
class StrategyBest:
    value: float
    params: dict[str, int]
    delta: float | None


@dataclass
class BoundReport:
    exact: float
    lower: dict[str, float]
    upper: float
    nu: int
    best_lower: float
    best_method: str | None
    delta: float | None
    strategy_best: dict[str, StrategyBest] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)
    aus_residual: float | None = None
    violations: list[str] = field(default_factory=list)
    provenance: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def shell_index(h: Hamiltonian, d: State, rel_zero: float = 1e-10) -> np.ndarray:
    """Distance of every basis node from |d>; -1 for nodes never reached."""
    out = np.full(h.dim, -1)
    for s, w in enumerate(scaled_powers(h, d.amplitudes, h.dim)):
        hit = (np.abs(w) > rel_zero) & (out < 0)
        out[hit] = s
        if np.all(out >= 0):
            break
    return out


def _localized(psi: State) -> int | None:
    nz = np.flatnonzero(np.abs(psi.amplitudes) > 1e-12)
    return int(nz[0]) if nz.size == 1 else None


def sweep_ranges(h: Hamiltonian, d: State, xi: int, s_range, far: int | None = None) -> dict[str, list]:
    """Parameter grids per method.

    ``auto``: with ecc the largest node distance from |d>, the single-power
    methods scan s = xi .. xi + ecc//2, the alternative strategy scans its extra
    power over 0 .. ecc//2, opp scans 0 .. dist(r_B), and opt scans pairs
    s1 < s2 in xi .. xi + 3 ecc. Bipartite graphs with a localized |d> step
    by 2. ``full`` extends the single-power scans to 3 D.
    """
    ecc = int(shell_index(h, d).max())
    step = 2 if h.is_bipartite() and _localized(d) is not None else 1
    lo = max(xi, 1)
    if isinstance(s_range, tuple):
        a, b = s_range
        single = list(range(max(a, 1), b + 1))
        alt = list(range(max(a, 0), b + 1))
        pair_pool = list(range(max(a, 1), b + 1))
        opp = list(range(max(a, 0), min(b, far if far is not None else b) + 1))
    else:
        window = max(ecc // 2, 1)
        top = 3 * h.dim if s_range == "full" else lo + window
        single = list(range(lo, top + 1, step))
        alt = list(range(0, (3 * h.dim if s_range == "full" else window) + 1, step))
        pair_pool = list(range(xi if xi > 0 else step, xi + 3 * ecc + 1, step))
        opp = list(range(0, (far or 0) + 1))
    pairs = [(a, b) for i, a in enumerate(pair_pool) for b in pair_pool[i + 1 :]]
    return {"single": single, "alt": alt, "opp": opp, "opt": pairs}


def bound_report(
    h: Hamiltonian,
    d: State,
    psi_in: State,
    options: ReportOptions | None = None,
    decomp: SpectralDecomposition | None = None,
    provenance: dict[str, Any] | None = None,
) -> BoundReport:
    """Exact value, all requested lower bounds swept over s, and the 1/nu bound."""
    opts = options or ReportOptions()
    decomp = decomp or eigendecompose(h)
    exact = float(exact_pdet(decomp, d, psi_in, opts.eps_bright))
    lower: dict[str, float] = {}
    errors: dict[str, str] = {}

    try:
        xi = distance(h, psi_in, d)
    except DarkDisconnected as exc:
        xi = None
        errors["distance"] = str(exc)

    node = _localized(psi_in)
    dnode = _localized(d)
    ctx = bd.StrategyContext(h, d, psi_in, xi=xi, r_b=opts.r_b)
    far = None
    if "opp" in opts.strategies and xi is not None:
        try:
            far = ctx.opposite()[1]
        except (bd.StrategyError, DarkDisconnected) as exc:
            errors["opp"] = str(exc)
    grids = sweep_ranges(h, d, xi or 0, opts.s_range, far) if xi is not None else None

    if grids is not None:
        powers = ctx.powers_d()
        if "uncertainty" in opts.methods:
            for s in grids["single"]:
                lower[f"uncertainty(s={s})"] = float(bd.uncertainty_bound(h, d, psi_in, s, powers, opts.eps_var).value)
        if "path-count" in opts.methods and node is not None and dnode is not None:
            if h.is_adjacency():
                auto = sweep_ranges(h, d, xi, "auto")["single"] if opts.s_range == "full" else grids["single"]
                for s in auto:
                    lower[f"path-count(s={s})"] = bd.path_count_bound(h, node, dnode, s).value
            else:
                errors["path-count"] = "Hamiltonian is not a plain adjacency matrix"
        if "shell" in opts.methods:
            shells = bd.shell_states(h, d, xi, opts.eps_rank)
            if xi < len(shells.states):
                lower[f"shell(xi={xi})"] = float(bd.shell_bound(shells, psi_in, xi))
            else:
                errors["shell"] = f"shell construction terminated before xi={xi}"

    strategy_best: dict[str, StrategyBest] = {}
    for strat in opts.strategies:
        if grids is None or strat in errors:
            continue
        if strat == "reg":
            grid = [{"s": s} for s in grids["single"]]
        elif strat == "alt":
            grid = [{"s": s} for s in grids["alt"]]
        elif strat == "opp":
            grid = [{"s": s} for s in grids["opp"]]
        elif strat == "opt":
            pairs = opts.opt_pairs if opts.opt_pairs is not None else grids["opt"]
            grid = [{"s1": a, "s2": b} for a, b in pairs]
        else:
            errors[strat] = f"unknown strategy {strat!r}"
            continue
        best = None
        for params in grid:
            try:
                val = float(bd.strategy_bound(h, d, psi_in, strat, ctx, **params).value)
            except (bd.StrategyError, ValueError) as exc:
                errors[strat] = str(exc)
                break
            key = ",".join(f"{k}={v}" for k, v in params.items())
            lower[f"{strat}({key})"] = val
            if best is None or val > best[0]:
                best = (val, params)
        if best is not None:
            strategy_best[strat] = StrategyBest(best[0], best[1], None)

    nu, upper, aus_residual = 1, 1.0, None
    if node is not None:
        cls = bd.equivalent_states(h, d, node, opts.eps_eq)
        sym = bd.symmetry_bound(cls, decomp, d)
        nu, upper, aus_residual = sym.nu, sym.upper, sym.identity_residual
    else:
        errors["symmetry"] = "initial state is not a basis node; nu taken as 1"

    best_method = max(lower, key=lower.get) if lower else None
    best_lower = lower[best_method] if lower else 0.0
    delta = (upper - best_lower) / exact if exact > EPS_ZERO else None
    for sb in strategy_best.values():
        sb.delta = (upper - sb.value) / exact if exact > EPS_ZERO else None

    violations = [f"{k}={v:.12g} > exact={exact:.12g}" for k, v in lower.items() if v > exact + SANDWICH_TOL]
    if exact > upper + SANDWICH_TOL:
        violations.append(f"exact={exact:.12g} > upper={upper:.12g}")

    prov = {
        "dim": h.dim,
        "xi": xi,
        "s_range": list(opts.s_range) if isinstance(opts.s_range, tuple) else opts.s_range,
        "r_b": ctx.r_b,
        "tolerances": {
            "eps_bright": opts.eps_bright,
            "eps_rank": opts.eps_rank,
            "eps_eq": opts.eps_eq,
            "eps_var": opts.eps_var,
            "sandwich": SANDWICH_TOL,
        },
    }
    prov.update(provenance or {})
    return BoundReport(
        exact=exact,
        lower=lower,
        upper=upper,
        nu=nu,
        best_lower=best_lower,
        best_method=best_method,
        delta=delta,
        strategy_best=strategy_best,
        errors=errors,
        aus_residual=aus_residual,
        violations=violations,
        provenance=prov,
    )


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{round(x, 4) + 0.0:.4f}"


def comparison_table(rows: list[tuple[str, BoundReport]]) -> str:
    """Three-panel text table: best lower | exact | upper per initial node, 4 digits."""
    head = ("init", "lower", "exact", "upper", "nu", "delta")
    body = [
        (
            label,
            _fmt(r.best_lower),
            _fmt(r.exact),
            _fmt(r.upper),
            str(r.nu),
            _fmt(r.delta),
        )
        for label, r in rows
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(x.rjust(w) for x, w in zip(line, widths)) for line in [head, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def strategy_table(report: BoundReport) -> str:
    head = ("strategy", "best lower", "params", "delta")
    body = [
        (
            name,
            _fmt(sb.value),
            ",".join(f"{k}={v}" for k, v in sb.params.items()),
            _fmt(sb.delta),
        )
        for name, sb in report.strategy_best.items()
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(x.rjust(w) for x, w in zip(line, widths)) for line in [head, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
