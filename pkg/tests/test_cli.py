import pytest

from conftest import g7
from cpds.cli import main
from cpds.instance import format_instance, parse_instance


@pytest.fixture
def g7_file(tmp_path):
    path = tmp_path / "g7.txt"
    path.write_text(format_instance(g7(), "seven vertices"))
    return path


def test_solve_prints_report(g7_file, capsys, tmp_path):
    lp = tmp_path / "m.lp"
    code = main(["solve", str(g7_file), "--k", "2", "--model", "EFPS-IP", "--outp", "--init2",
                 "--backend", "scip-lite", "--trace", "--lp-out", str(lp)])
    out = capsys.readouterr().out
    assert code == 0
    assert "model      EFPS-IP-OutP-Init" in out
    assert "status     optimal" in out
    assert "objective  1" in out
    assert "verified   yes" in out
    assert "DR " in out
    assert lp.read_text().startswith("\\ EFPS-IP-OutP-Init")


@pytest.mark.parametrize("model", ["FPS-IP", "BRI-IP", "JOV-IP", "FORT-IP"])
def test_solve_every_model(g7_file, capsys, model):
    assert main(["solve", str(g7_file), "--k", "1", "--model", model, "--backend", "scip-lite"]) == 0
    assert "objective  2" in capsys.readouterr().out


def test_usage_errors(g7_file, capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve", str(g7_file)])
    assert info.value.code == 1
    assert main(["solve", str(g7_file), "--k", "1", "--model", "NOPE-IP"]) == 1
    assert main(["solve", str(g7_file), "--k", "1", "--model", "BRI-IP", "--outp"]) == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_unreadable_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("p cpds 2 1\ne a a\n")
    assert main(["solve", str(bad), "--k", "0"]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.txt"), "--k", "0"]) == 2
    cfg = tmp_path / "run.toml"
    cfg.write_text("runs = 0\n")
    assert main(["bench", str(cfg)]) == 2


def test_oracle_and_kstar(g7_file, capsys):
    assert main(["oracle", str(g7_file), "--k", "0"]) == 0
    assert "optimum    3" in capsys.readouterr().out
    assert main(["oracle", str(g7_file)]) == 0
    assert "optimum    1" in capsys.readouterr().out
    assert main(["kstar", str(g7_file), "--oracle"]) == 0
    assert capsys.readouterr().out.strip() == "2"
    assert main(["oracle", str(g7_file), "--max-n", "3"]) == 1


def test_check_exit_codes(tmp_path, g7_file, capsys, monkeypatch):
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'instances = ["{g7_file.name}"]\nmodels = ["EFPS-IP", "FORT-IP"]\nk = [1]\n'
                   'backend = "scip-lite"\n')
    assert main(["check", str(cfg)]) == 0
    import dataclasses

    import cpds.bench as bench

    real = bench.solve_cpds

    def wrong(inst, kind, *a, **kw):
        rep = real(inst, kind, *a, **kw)
        return dataclasses.replace(rep, objective=rep.objective + 1)

    monkeypatch.setattr(bench, "solve_cpds", wrong)
    assert main(["check", str(cfg)]) == 4
    assert "MISMATCH" in capsys.readouterr().out


def test_bench_and_generate(tmp_path, g7_file, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'instances = ["{g7_file.name}"]\nmodels = ["EFPS-IP"]\nk = 2\nbackend = "scip-lite"\n')
    assert main(["bench", str(cfg), "--output", str(tmp_path / "r.csv")]) == 0
    assert (tmp_path / "r.csv").read_text().count("\n") == 2
    out = tmp_path / "grid.txt"
    assert main(["generate", "--rows", "3", "--cols", "4", "--seed", "1", "--out", str(out)]) == 0
    inst = parse_instance(out.read_text())
    assert inst.n >= 12 and inst.is_connected()
