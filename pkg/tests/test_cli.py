import json
import subprocess
import sys

import pytest

from probact import cli, oracle
from probact.cli import RunConfig, bundled_domain_path, main, run

TOMATO = bundled_domain_path()


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_project_fuel(capsys):
    code, out, _ = _run([ "project", TOMATO, "--action", "drive-home", "--query", "fuel@end = fuel@start - 8"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "0.700000"


def test_project_tautology_and_precision(capsys):
    code, out, _ = _run(["project", TOMATO, "--action", "drive-home", "--query", "TRUE", "--precision", "3"], capsys)
    assert code == 0 and out.splitlines()[0] == "1.000"


def test_project_abstract_interval_json(capsys):
    code, out, _ = _run(["project", TOMATO, "--action", "drive", "--query", "muddy = T", "--format", "json"], capsys)
    d = json.loads(out)
    assert code == 0 and (d["lo"], d["hi"]) == (0.0, 0.42)
    assert list(d) == sorted(d)


def test_project_trace(capsys):
    code, out, _ = _run(["project", TOMATO, "--action", "drive-home", "--query", "TRUE", "--trace"], capsys)
    assert code == 0 and sum(1 for line in out.splitlines() if "chronicle" in line) == 6


def test_abstract_command(capsys):
    code, out, _ = _run(["abstract", TOMATO, "--action", "mountain-road", "--method", "intra2",
                         "--grouping", "a,c;b,d"], capsys)
    assert code == 0 and out.count("branch ") == 2
    code, out, _ = _run(["abstract", TOMATO, "--action", "mountain-road,valley-road", "--method", "inter1",
                         "--grouping", "a,i;b;c,h;d,g"], capsys)
    assert code == 0 and out.count("branch ") == 4 and "FALSE" in out


def test_plan_matches_exhaustive(capsys, tomato, tomato_net):
    code, out, _ = _run(["plan", TOMATO, "--format", "json"], capsys)
    d = json.loads(out)
    _, winners, _ = oracle.exhaustive_optimum(tomato_net, tomato.initial, tomato.utility)
    assert code == 0 and [tuple(p["actions"]) for p in d["plans"]] == winners
    assert d["stats"]["narrowing_violations"] == 0


def test_plan_human(capsys):
    code, out, _ = _run(["plan", TOMATO], capsys)
    assert code == 0 and out.startswith("rank 1: mountain-road ; drive-home")


def test_verify_suite(capsys):
    code, out, _ = _run(["verify", "--cases", "5", "--seed", "3", "--format", "json"], capsys)
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "sound" and d["cases_run"] == 20


def test_verify_planner(capsys):
    code, out, _ = _run(["verify", TOMATO], capsys)
    assert code == 0 and out.startswith("verdict: sound")


def test_verify_unsound_exit(monkeypatch, capsys):
    def broken(methods, cases, seed):
        return oracle.VerificationReport(cases_run=1, failures=["forced"], seed=seed)
    monkeypatch.setattr(oracle, "run_suite", broken)
    code, out, _ = _run(["verify", "--cases", "1"], capsys)
    assert code == 3 and "unsound" in out


@pytest.mark.parametrize("argv,code", [
    ([], 1),
    (["project", TOMATO, "--action", "drive-home"], 1),
    (["verify", "--method", "intra7"], 1),
    (["plan", TOMATO, "--precision", "40"], 1),
    (["project", "/nonexistent.domain", "--action", "x", "--query", "TRUE"], 1),
    (["project", TOMATO, "--action", "nope", "--query", "TRUE"], 2),
    (["project", TOMATO, "--action", "drive-home", "--query", "fuel = sun"], 1),
])
def test_exit_codes(argv, code, capsys):
    assert _run(argv, capsys)[0] == code


def test_parse_error_exit(tmp_path, capsys):
    p = tmp_path / "x.domain"
    p.write_text("fluent x 0..3\nbogus line\n")
    code, _, err = _run(["plan", str(p)], capsys)
    assert code == 1 and "line 2" in err


def test_gen_network_round_trips(capsys, tmp_path):
    code, out, _ = _run(["gen-network", "--n", "2", "--p", "2", "--k", "1", "--seed", "4"], capsys)
    assert code == 0
    p = tmp_path / "net.domain"
    p.write_text(out)
    code, out, _ = _run(["verify", str(p)], capsys)
    assert code == 0


def test_gen_network_engineered(capsys, tmp_path):
    _, out, _ = _run(["gen-network", "--n", "3", "--p", "2", "--k", "2", "--engineered"], capsys)
    p = tmp_path / "eng.domain"
    p.write_text(out)
    _, out, _ = _run(["plan", str(p), "--format", "json"], capsys)
    assert json.loads(out)["stats"]["plans_examined"] == 18


def test_output_is_deterministic():
    cfg = RunConfig("verify", cases=10, seed=5, format="json")
    assert run(cfg) == run(RunConfig("verify", cases=10, seed=5, format="json"))
    a = subprocess.run([sys.executable, "-m", "probact", "plan", TOMATO], capture_output=True)
    b = subprocess.run([sys.executable, "-m", "probact", "plan", TOMATO], capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout


def test_bundled_name_fallback(capsys):
    code, out, _ = _run(["project", "tomato.domain", "--action", "drive-home", "--query", "TRUE"], capsys)
    assert code == 0


def test_run_config_validation():
    assert run(RunConfig("plan", path=TOMATO, format="xml"))[0] == 1
    assert run(RunConfig("nosuch"))[0] == 1
    assert cli.EXIT_UNSOUND == 3
