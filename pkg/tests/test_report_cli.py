import json

import numpy as np
import pytest

from pdet import cli, report
from pdet.graphs import GraphSpec, add_disorder, basis_state, dump_graph, named_graph
from pdet.report import ReportOptions, bound_report, comparison_table, strategy_table, sweep_ranges


def run(*argv):
    return cli.run_command(list(argv))


def test_report_ring6_neighbour(ring6):
    h, d = ring6
    rep = bound_report(h, d, basis_state(h, 1), ReportOptions(strategies=()))
    assert rep.exact == pytest.approx(0.5, abs=1e-10)
    assert rep.best_lower == pytest.approx(0.5, abs=1e-10)
    assert rep.upper == 0.5 and rep.nu == 2
    assert rep.delta == pytest.approx(0.0, abs=1e-9)
    assert not rep.violations
    assert rep.aus_residual < 1e-9
    for key in ("dim", "xi", "s_range", "tolerances"):
        assert key in rep.provenance


def test_report_disordered_ring_is_tight():
    h = add_disorder(named_graph("ring", 8), seed=1, strength=1.0)
    d = basis_state(h, 0)
    rep = bound_report(h, d, basis_state(h, 3), ReportOptions(strategies=()))
    assert rep.nu == 1 and rep.upper == 1.0
    assert rep.exact == pytest.approx(1.0, abs=1e-9)
    assert "path-count" in rep.errors


def test_report_non_basis_initial_state(ring6):
    h, d = ring6
    psi = cli.parse_state(h, "amps:1=1,5=-1")
    rep = bound_report(h, d, psi, ReportOptions(strategies=()))
    # dark superposition: exact 0, no distance, nu falls back to 1
    assert rep.exact == pytest.approx(0.0, abs=1e-12)
    assert rep.nu == 1 and "symmetry" in rep.errors and "distance" in rep.errors
    assert rep.delta is None


def test_hypercube_reg_only():
    h = named_graph("hypercube", 8)
    d = basis_state(h, "0" * 8)
    rep = bound_report(h, d, basis_state(h, "1" * 7 + "0"), ReportOptions(strategies=("reg",), methods=()))
    assert rep.strategy_best["reg"].delta == pytest.approx(0.95, abs=0.02)


def test_sweep_ranges_shapes():
    h = named_graph("hypercube", 4)
    d = basis_state(h, "0000")
    grids = sweep_ranges(h, d, 2, "auto", far=4)
    assert grids["single"] == [2, 4]
    assert grids["opp"] == [0, 1, 2, 3, 4]
    assert all(a < b for a, b in grids["opt"])
    full = sweep_ranges(h, d, 2, "full", far=4)
    assert full["single"][-1] >= 3 * h.dim - 1
    explicit = sweep_ranges(h, d, 2, (1, 3), far=2)
    assert explicit["single"] == [1, 2, 3] and explicit["opp"] == [1, 2]


def test_tables_have_four_digits(ring6):
    h, d = ring6
    rep = bound_report(h, d, basis_state(h, 2))
    text = comparison_table([("2", rep)])
    assert "0.2500" in text or "0.5000" in text
    assert "-0.0000" not in text
    assert strategy_table(rep).splitlines()[0].split()[0] == "strategy"


def test_cli_exact_example():
    status, text = run("exact", "--family", "ring", "--L", "6", "--detect", "node:0", "--init", "node:1")
    assert status == 0
    assert json.loads(text)["p_det"] == pytest.approx(0.5, abs=1e-12)


def test_cli_exact_multiple_and_csv():
    status, text = run("exact", "--family", "ring", "--L", "6", "--init", "1", "--init", "3", "--format", "csv")
    assert status == 0
    lines = text.strip().split("\n")
    assert lines[0] == "init,p_det,raw" and len(lines) == 3


def test_cli_strobe_zero_length():
    status, text = run("strobe", "--family", "ring", "--L", "6", "--detect", "node:0", "--init", "node:1", "--tau", "1.0", "--n", "0")
    assert status == 0
    r = json.loads(text)["runs"][0]
    assert r["phis"] == [] and r["S_final"] == 0.0


def test_cli_strobe_csv_digits():
    status, text = run("strobe", "--family", "ring", "--L", "6", "--init", "node:1", "--tau", "1.0", "--n", "3", "--format", "csv")
    assert status == 0
    row = text.strip().split("\n")[1].split(",")
    assert len(row) == 6
    assert float(row[4]) > 0


def test_cli_trajectories_embed_seed():
    status, text = run("trajectories", "--family", "ring", "--L", "6", "--init", "node:1", "--tau", "1.0", "--n", "50", "--trials", "500", "--seed", "9")
    assert status == 0
    r = json.loads(text)["runs"][0]
    assert r["seed"] == 9 and r["trials"] == 500 and not r["exceptional"]


def test_cli_report_strategies_hypercube():
    status, text = run("report", "--family", "hypercube", "--B", "8", "--init-distance", "7", "--strategies", "reg,alt,opp,opt", "--s-range", "auto")
    assert status == 0
    doc = json.loads(text)["reports"][0]
    for key in ("exact", "best_lower", "upper", "delta", "provenance"):
        assert key in doc
    assert doc["provenance"]["init"] == "01111111"
    best = {k: v["delta"] for k, v in doc["strategy_best"].items()}
    for name, want in {"reg": 0.95, "alt": 0.77, "opp": 0.0, "opt": 0.66}.items():
        assert best[name] == pytest.approx(want, abs=0.02)


def test_cli_bounds_omits_exact():
    status, text = run("bounds", "--family", "ring", "--L", "8", "--init-distance", "3")
    assert status == 0
    doc = json.loads(text)["reports"][0]
    assert "exact" not in doc and doc["upper"] == 0.5
    assert doc["lower"]["path-count(s=3)"] == pytest.approx(1 / 20, abs=1e-12)


def test_cli_sweep_rows():
    status, text = run("sweep", "--family", "hypercube", "--B", "4", "--init-distance", "2", "--format", "csv")
    assert status == 0
    lines = text.strip().split("\n")
    assert lines[0] == "init,method,params,lower,delta"
    methods = {line.split(",")[1] for line in lines[1:]}
    assert {"uncertainty", "reg", "alt", "opt"} <= methods


def test_cli_json_byte_identical():
    argv = ["report", "--family", "ring", "--L", "8", "--init-distance", "2"]
    assert run(*argv) == run(*argv)
    argv = ["trajectories", "--family", "ring", "--L", "6", "--init", "1", "--tau", "0.7", "--n", "30", "--trials", "300"]
    assert run(*argv) == run(*argv)


def test_cli_graph_file(tmp_path):
    path = tmp_path / "g.json"
    dump_graph(GraphSpec(family="custom", nodes=("a", "b", "c"), edges=((0, 1, 1.0), (1, 2, 1.0))), path)
    status, text = run("exact", "--graph", str(path), "--detect", "node:b", "--init", "node:a")
    assert status == 0 and json.loads(text)["p_det"] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize(
    "argv",
    [
        ["exact", "--family", "ring", "--L", "2", "--init", "0"],
        ["exact", "--family", "ring", "--L", "6"],
        ["exact", "--family", "ring", "--L", "6", "--init", "node:9"],
        ["strobe", "--family", "ring", "--L", "6", "--init", "1"],
        ["strobe", "--family", "ring", "--L", "6", "--init", "1", "--tau", "-1"],
        ["report", "--family", "ring", "--L", "6", "--strategies", "zig"],
        ["report", "--family", "ring", "--L", "6", "--methods", "", "--init", "1"],
        ["report", "--family", "ring", "--L", "6", "--s-range", "5:2"],
        ["frobnicate"],
        ["exact"],
    ],
)
def test_cli_config_errors(argv):
    status, text = run(*argv)
    assert status == cli.EXIT_CONFIG
    assert json.loads(text)["kind"] == "config"


def test_cli_computation_error(monkeypatch):
    def boom(*a, **k):
        raise np.linalg.LinAlgError("eigensolver failed")

    monkeypatch.setattr(cli, "eigendecompose", boom)
    status, text = run("exact", "--family", "ring", "--L", "6", "--init", "1")
    assert status == cli.EXIT_COMPUTE
    assert "eigensolver failed" in json.loads(text)["error"]


def test_cli_sandwich_violation(monkeypatch):
    # a broken exact value must be caught by the sandwich check
    monkeypatch.setattr(report, "exact_pdet", lambda *a, **k: 0.0)
    status, text = run("report", "--family", "ring", "--L", "6", "--init", "1")
    assert status == cli.EXIT_SANDWICH
    assert json.loads(text)["reports"][0]["violations"]


def test_cli_output_file_and_env(tmp_path, monkeypatch):
    target = tmp_path / "out" / "r.json"
    status, text = run("exact", "--family", "ring", "--L", "6", "--init", "1", "--output", str(target))
    assert status == 0 and target.read_text() == text
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "env"))
    status, text = run("exact", "--family", "ring", "--L", "6", "--init", "1", "--output", "rel.json")
    assert (tmp_path / "env" / "rel.json").read_text() == text


def test_main_writes_stdout(capsys):
    assert cli.main(["exact", "--family", "ring", "--L", "6", "--init", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["p_det"] == pytest.approx(0.5)
