import csv
import dataclasses
import io
import json

import pytest

from conftest import g7
from cpds.bench import (
    CSV_FIELDS,
    ConfigError,
    RunConfig,
    cached_k_star,
    cross_check,
    parse_model_spec,
    read_results,
    run_benchmark,
    summarize,
)
from cpds.formulations import Formulation, Options
from cpds.instance import format_instance
from cpds.solver import solve_cpds


@pytest.fixture
def g7_file(tmp_path):
    path = tmp_path / "g7.txt"
    path.write_text(format_instance(g7(), "seven vertices"))
    return path


def write_config(tmp_path, text):
    cfg = tmp_path / "run.toml"
    cfg.write_text(text)
    return cfg


def test_model_specs():
    assert parse_model_spec("EFPS-IP-OutP-Init") == (Formulation.EFPS, Options(outp=True, init2=True))
    assert parse_model_spec("FPS-IP") == (Formulation.FPS, Options())
    assert parse_model_spec("BRI-IP") == (Formulation.BRI, Options())
    with pytest.raises(ConfigError):
        parse_model_spec("BRI-IP-OutP")
    with pytest.raises(ConfigError):
        parse_model_spec("XYZ-IP")


def test_config_parsing(tmp_path, g7_file):
    cfg = RunConfig.load(write_config(tmp_path, f"""
instances = ["{g7_file.name}"]
models = ["EFPS-IP-OutP-Init", "FORT-IP"]
k = [2, 0, 2]
runs = 2
time_limit = 30
output = "out/results.csv"
"""))
    assert cfg.instances == [g7_file]
    assert cfg.output == tmp_path / "out" / "results.csv"
    assert cfg.runs == 2 and cfg.time_limit == 30
    assert len(cfg.models) == 2


@pytest.mark.parametrize("text", [
    "runs = 0",
    "time_limit = -1",
    "k = 'sometimes'",
    "k = [1, -2]",
    "colour = 'blue'",
    "models = ['NOPE-IP']",
    "this is not toml",
])
def test_config_errors(tmp_path, text):
    with pytest.raises(ConfigError):
        RunConfig.load(write_config(tmp_path, text))


def test_benchmark_writes_complete_csv(tmp_path, g7_file):
    cfg = RunConfig.load(write_config(tmp_path, f"""
instances = ["{g7_file.name}"]
models = ["EFPS-IP-OutP-Init", "FPS-IP", "BRI-IP", "JOV-IP", "FORT-IP"]
k = [0, 1, 2]
runs = 2
time_limit = 60
backend = "scip-lite"
"""))
    out = io.StringIO()
    rows = run_benchmark(cfg, out)
    assert len(rows) == 3 * 5 * 2
    with open(cfg.output, newline="") as fh:
        raw = list(csv.reader(fh))
    assert raw[0] == CSV_FIELDS
    assert all(cell != "" for line in raw for cell in line)
    parsed = read_results(cfg.output)
    by_k = {}
    for r in parsed:
        assert r["status"] == "optimal" and r["verified"]
        by_k.setdefault(r["k"], set()).add(r["objective"])
    assert by_k == {0: {3}, 1: {2}, 2: {1}}
    assert {r["options"] for r in parsed} == {"OutP-Init", "none"}
    # the printed summary can be rebuilt from the CSV alone
    summary = cfg.summary_path.read_text()
    assert summary == out.getvalue()
    for s in summarize(parsed):
        assert s.runs == 6 and s.optimal_pct == 100.0
        assert f"{s.mean_time:.3f}" in summary


def test_empty_instance_list_gives_header_only(tmp_path):
    cfg = RunConfig.load(write_config(tmp_path, "instances = []\n"))
    assert run_benchmark(cfg, io.StringIO()) == []
    assert cfg.output.read_text().strip() == ",".join(CSV_FIELDS)


def test_kstar_cache(tmp_path, g7_file):
    assert cached_k_star(g7(), g7_file, backend="scip-lite") == 2
    cache = g7_file.with_name(g7_file.name + ".kstar.json")
    data = json.loads(cache.read_text())
    assert data["k_star"] == 2
    # a matching digest is trusted; a changed file recomputes
    cache.write_text(json.dumps({"sha256": data["sha256"], "k_star": 7}))
    assert cached_k_star(g7(), g7_file) == 7
    g7_file.write_text(g7_file.read_text() + "c edited\n")
    assert cached_k_star(g7(), g7_file, backend="scip-lite") == 2


def test_auto_k_sweeps_up_to_kstar(tmp_path, g7_file):
    cfg = RunConfig.load(write_config(tmp_path, f"""
instances = ["{g7_file.name}"]
models = ["EFPS-IP"]
backend = "scip-lite"
"""))
    rows = run_benchmark(cfg, io.StringIO())
    assert [r["k"] for r in rows] == ["0", "1", "2"]


def test_cross_check_catches_wrong_solver(tmp_path, g7_file):
    cfg = RunConfig.load(write_config(tmp_path, f"""
instances = ["{g7_file.name}"]
models = ["EFPS-IP", "FORT-IP"]
k = [0, 1, 2]
backend = "scip-lite"
"""))
    good = cross_check(cfg)
    assert good.ok and good.checked == 3 and good.oracle_checked == 3

    def off_by_one(inst, kind, *args, **kw):
        rep = solve_cpds(inst, kind, *args, **kw)
        if kind is Formulation.FORT and inst.capacity == 1:
            rep = dataclasses.replace(rep, objective=rep.objective + 1)
        return rep

    bad = cross_check(cfg, solve_fn=off_by_one)
    assert not bad.ok
    assert [(d.k, d.values["FORT-IP"]) for d in bad.disagreements] == [(1, 3)]
    assert "oracle=2" in str(bad.disagreements[0])


def test_failed_cell_is_recorded(tmp_path, g7_file, monkeypatch):
    import cpds.bench as bench

    def boom(*a, **kw):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(bench, "solve_cpds", boom)
    cfg = RunConfig.load(write_config(tmp_path, f"""
instances = ["{g7_file.name}"]
models = ["EFPS-IP"]
k = 1
"""))
    rows = run_benchmark(cfg, io.StringIO())
    assert rows[0]["status"] == "error" and rows[0]["objective"] == "NA"
