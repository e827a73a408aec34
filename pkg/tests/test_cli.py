import io
import json

import pytest

from muntz_sector import cli


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_density_dense():
    code, out, _ = invoke("density", "--seq", "arithmetic:0:1")
    assert code == 0
    assert out.splitlines()[0] == "dense"


def test_density_incomplete_and_inconclusive():
    assert invoke("density", "--seq", "power:2")[1].splitlines()[0] == "incomplete"
    assert invoke("density", "--seq", "list:1.1,2.7,3.9")[1].splitlines()[0] == "inconclusive"


def test_bogus_point_is_usage_error():
    code, _, err = invoke("fuchs-eval", "--seq", "power:2", "--z", "bogus")
    assert code == 2
    assert "--z" in err


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["density"],
    ["density", "--seq", "bogus:1"],
    ["witness", "--seq", "power:2", "--alpha", "4"],
    ["fuchs-eval", "--seq", "power:2", "--z", "1", "--quad", "wobble=3"],
    ["density", "--seq", "power:2", "--unknown-flag", "1"],
])
def test_usage_errors(argv):
    assert invoke(*argv)[0] == 2


def test_numerical_error_is_reported_verbatim():
    code, _, err = invoke("fuchs-eval", "--seq", "power:1", "--z", "-1.001")
    assert code == 1
    assert "PoleError" in err


def test_fuchs_eval_values():
    code, out, _ = invoke("fuchs-eval", "--seq", "power:1", "--z", "0,2+1j", "--k", "2")
    assert code == 0
    assert "G(0+0j): 1 0" in out
    assert "psi_2(2+1j)" in out


def test_fuchs_verify_passes():
    code, out, _ = invoke("fuchs-verify", "--seq", "power:2")
    assert code == 0
    assert "check.finite_constants: pass" in out


def test_surgery_checks_and_determinism(tmp_path):
    argv = ["surgery", "--seq", "power:2", "--b", "0.5", "--horizon", "500", "--seed", "4"]
    code1, out1, _ = invoke(*argv, "--out", str(tmp_path / "a"))
    code2, out2, _ = invoke(*argv, "--out", str(tmp_path / "b"))
    assert code1 == code2 == 0
    assert out1 == out2
    for name in ("surgery_residuals.csv", "surgery_summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "surgery_residuals.csv").read_text().splitlines()[0]
    assert header == "x,lambda[computed],lambda_star[computed],lambda_prime[computed],residual[computed]"


def test_surgery_requires_b():
    assert invoke("surgery", "--seq", "power:2")[0] == 2


def test_output_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    assert invoke("density", "--seq", "power:2", "--horizon", "30")[0] == 0
    rows = (tmp_path / "density_table.csv").read_text().splitlines()
    assert rows[0] == "t,lambda_t[computed],count_t[computed]"
    # 17 significant digits
    assert rows[1].split(",")[0] == f"{0.6:.17g}"


def test_config_file_and_echo(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"seq": "power:2", "horizon": 20}))
    code, out, _ = invoke("density", "--config", str(cfg))
    assert code == 0
    assert '"seq": "power:2"' in out and '"horizon": 20' in out
    # flags override the file
    code, out, _ = invoke("density", "--config", str(cfg), "--seq", "power:3")
    assert '"seq": "power:3"' in out
    cfg.write_text(json.dumps({"seq": "power:2", "colour": "red"}))
    assert invoke("density", "--config", str(cfg))[0] == 2


def test_witness_example():
    code, out, _ = invoke("witness", "--seq", "power:2", "--alpha", "0.7854", "--mu", "2.5", "--terms", "6")
    assert code == 0
    assert "consistent: true" in out
    lower = float(next(l for l in out.splitlines() if l.startswith("lower_bound:")).split(":")[1])
    assert lower > 0
