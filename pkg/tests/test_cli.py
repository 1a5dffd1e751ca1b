import csv
import io
import json
import subprocess
import sys

import pytest

from oqp import cli, schema
from oqp.dmt_models import MimoQuasiStatic, SisoFastFading
from oqp.optimizer import classify_and_bound, optimize_case1
from oqp.rate_models import CPE, ScalingRegime


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("flag,value,expected", [
    ("--x", "2", "0.5"),
    ("--theta", "0", "0"),
    ("--delta-r", "0.75", "0.333333"),
    ("--burstiness", "8", "0.707107"),
])
def test_rate(capsys, flag, value, expected):
    code, out, _ = run(capsys, "rate", "--cpe", "0.5,1", flag, value)
    assert code == 0
    assert out.strip() == expected


def test_rate_json(capsys):
    code, out, _ = run(capsys, "rate", "--cpe", "0.5,1", "--theta", "1.5", "--x", "2", "--format", "json")
    assert code == 0
    _, recs = schema.loads(out)
    assert recs[0][1] == pytest.approx({"log_mgf(1.5)": float("inf"), "conjugate(2)": 0.5}, abs=1e-15)


def test_optimize_siso_summary(capsys):
    code, out, _ = run(capsys, "optimize", "--siso", "--cpe", "0.5,0.5", "--gamma", "1", "--D", "21")
    assert code == 0
    assert out.splitlines()[0] == ",".join(cli.OPT_HEADER)
    (row,) = rows(out)
    assert float(row["d_ir"]) == 1.375
    assert (float(row["t_ir"]), float(row["r_ir"])) == (5.5, 0.75)
    assert row["t_star"] == "6"


def test_optimize_relaxed_flag(capsys):
    _, out, _ = run(capsys, "optimize", "--siso", "--cpe", "0.5,0.5", "--D", "21", "--relaxed")
    assert rows(out)[0]["t_star"] == "5"


def test_optimize_mimo_fixed_T(capsys):
    _, out, _ = run(capsys, "optimize", "--mimo", "2,2", "--cpe", "0.5,1", "--D", "11", "--fixed-T", "2")
    assert rows(out)[0]["r_ir"] == "0.727272727"


def test_optimize_coop(capsys):
    _, out, _ = run(capsys, "optimize", "--coop", "10", "--cpe", "0.25,0.5", "--gamma", "1", "--D", "43")
    (row,) = rows(out)
    assert row["v_star"] in ("4", "5")
    assert float(row["v_ir"]) == 4.5


def test_optimize_table(capsys):
    _, out, _ = run(capsys, "optimize", "--siso", "--cpe", "0.5,1", "--D", "21", "--table")
    table = rows(out)
    assert [int(r["T"]) for r in table] == list(range(1, 11))
    for r in table:
        assert float(r["bracket_hi"]) - float(r["bracket_lo"]) <= 1e-10


def test_optimize_pwl_file(capsys, tmp_path):
    path = tmp_path / "mimo.json"
    path.write_text(json.dumps({"points": [[0, 4], [1, 1], [2, 0]], "t_dependence": "independent"}))
    _, a, _ = run(capsys, "optimize", "--pwl", str(path), "--cpe", "0.5,1", "--D", "11", "--fixed-T", "2")
    _, b, _ = run(capsys, "optimize", "--mimo", "2,2", "--cpe", "0.5,1", "--D", "11", "--fixed-T", "2")
    ra, rb = rows(a)[0], rows(b)[0]
    assert ra["d_star"] == rb["d_star"] and ra["r_ir"] == rb["r_ir"]


def test_optimize_json_round_trip(capsys):
    code, out, _ = run(capsys, "optimize", "--siso", "--cpe", "0.5,0.5", "--D", "21", "--format", "json")
    assert code == 0
    command, recs = schema.loads(out)
    assert command == "optimize"
    inputs, result = recs[0]
    assert inputs["channel"] == "siso" and inputs["D"] == 21
    assert result == optimize_case1(CPE(0.5, 0.5), SisoFastFading(), 1.0, 21)


def test_sweep_order_independent_of_jobs(capsys, monkeypatch):
    argv = ["optimize", "--siso", "--cpe", "0.5,0.5", "--D", "21", "--sweep", "lambda=0.75,0.25,0.5"]
    _, serial, _ = run(capsys, *argv, "--jobs", "1")
    _, parallel, _ = run(capsys, *argv, "--jobs", "3")
    assert serial == parallel
    assert [r["lambda"] for r in rows(serial)] == ["0.75", "0.25", "0.5"]
    monkeypatch.setenv("OQP_JOBS", "2")
    assert cli.build_parser().parse_args(argv).jobs == 2


def test_sweep_D_and_v(capsys):
    _, out, _ = run(capsys, "optimize", "--coop", "10", "--cpe", "0.25,0.5", "--D", "43", "--sweep", "v=2,4")
    assert [r["channel"] for r in rows(out)] == ["coop(v=2)", "coop(v=4)"]
    code, _, err = run(capsys, "optimize", "--siso", "--cpe", "0.5,1", "--D", "21", "--sweep", "D=11.5")
    assert code == 2 and "integer" in err


@pytest.mark.parametrize("regime,expected", [("superlinear", 5.0)])
def test_classify_bounds(capsys, regime, expected):
    _, out, _ = run(capsys, "classify", "--regime", regime, "--siso", "--cpe", "0.5,1", "--D", "21")
    assert float(rows(out)[0]["bound"]) == expected


def test_classify_sublinear_and_linear(capsys):
    _, out, _ = run(capsys, "classify", "--regime", "sublinear", "--siso", "--cpe", "0.5,1", "--D", "21")
    ref = classify_and_bound(CPE(0.5, 1.0), SisoFastFading(), ScalingRegime("sublinear"), 21)
    assert float(rows(out)[0]["bound"]) == pytest.approx(ref.case_bound, rel=1e-8)
    _, lin, _ = run(capsys, "classify", "--regime", "linear:1", "--siso", "--cpe", "0.5,1", "--D", "21")
    _, opt, _ = run(capsys, "optimize", "--siso", "--cpe", "0.5,1", "--D", "21")
    assert lin == opt
    _, js, _ = run(capsys, "classify", "--regime", "superlinear", "--mimo", "2,2", "--cpe", "1,1",
                   "--D", "21", "--format", "json")
    (_, res), = schema.loads(js)[1]
    assert res == classify_and_bound(CPE(1, 1), MimoQuasiStatic(2, 2), ScalingRegime("superlinear"), 21)


SIM = ["simulate", "--cpe", "0.5,1", "--N", "10", "--g", "linear", "--r", "0.6", "--T", "1", "--D", "4",
       "--slots", "2e5", "--seed", "7", "--replications", "4"]


def test_simulate_deterministic_bytes(capsys):
    _, a, _ = run(capsys, *SIM)
    _, b, _ = run(capsys, *SIM)
    assert a == b
    _, recs = schema.loads(a)
    rep = recs[0][1]
    assert rep.slots_observed == 200_000
    assert rep.predicted_exponent == pytest.approx(0.3, abs=1e-3)


def test_simulate_csv(capsys):
    code, out, _ = run(capsys, *SIM, "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "N,r,T,D,p_delay_hat,ci95,emp_exp,pred_exp,slots"
    assert lines[1].startswith("10,0.6,1,4,")


def test_simulate_infinite_ci_round_trips(capsys):
    _, out, _ = run(capsys, *SIM[:-2], "--replications", "1")
    assert '"inf"' in out
    json.loads(out)  # strict JSON, no bare Infinity
    rep = schema.loads(out)[1][0][1]
    assert rep.ci95_half_width == float("inf")


def test_simulate_unresolved_exit_code(capsys):
    argv = list(SIM)
    argv[argv.index("--D") + 1] = "1000000"
    code, out, err = run(capsys, *argv, "--format", "csv")
    assert code == 4
    assert "SimulationUnresolved" in err
    assert rows(out)[0]["p_delay_hat"] == "0"


def test_simulate_oracle(capsys):
    code, out, _ = run(capsys, "simulate", "--oracle", "--pmf", "0:0.75,2:0.25", "--R", "1", "--T", "1", "--D", "4")
    assert code == 0
    assert out == "p_exact,0.037037037\n"


@pytest.mark.parametrize("argv,code", [
    (["optimize", "--siso", "--cpe", "1.5,1", "--D", "21"], 2),
    (["optimize", "--coop", "10", "--cpe", "0.25,0.5", "--D", "5"], 3),
    (["optimize", "--mimo", "4,4", "--cpe", "0.5,1", "--D", "7"], 3),
    (["rate", "--cpe", "0.5,1", "--delta-r", "0.2"], 2),
    (["rate", "--cpe", "0.5,1", "--x", "-1"], 2),
    (["optimize", "--siso", "--cpe", "0.5,1", "--D", "21", "--sweep", "r=0.6"], 2),
    (["simulate", "--cpe", "0.5,1", "--N", "10", "--r", "0.4", "--T", "1", "--D", "4"], 2),
    (["simulate", "--oracle", "--pmf", "0:0.5,3:0.5", "--R", "1", "--T", "1", "--D", "4"], 2),
])
def test_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert err.startswith("oqp: ") and err.count("\n") == 1


def test_bad_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["optimize", "--siso", "--mimo", "2,2", "--cpe", "0.5,1", "--D", "21"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["classify", "--regime", "cubic", "--siso", "--cpe", "0.5,1", "--D", "21"])


def test_validate_command(capsys, tmp_path):
    path = tmp_path / "out.json"
    run(capsys, "optimize", "--siso", "--cpe", "0.5,0.5", "--D", "21", "--format", "json", "-o", str(path))
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 0 and out.startswith("ok: optimize")
    doc = json.loads(path.read_text())
    doc["records"][0]["result"]["t_star"] = "six"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "validate", str(path))
    assert code == 2 and "six" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "oqp", "rate", "--cpe", "0.5,1", "--x", "2"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "0.5"
