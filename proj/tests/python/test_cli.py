import json
import subprocess

REFERENCE = ["--spectrum", "1,-1", "--probabilities", "0.8,0.2", "--delta-p", "10"]


def run(cli, *args, check=True):
    return subprocess.run([cli, *args], capture_output=True, text=True, check=check)


def test_empty_config_is_a_validation_error(cli, tmp_path):
    cfg = tmp_path / "empty.json"
    cfg.write_text("{}")
    proc = run(cli, "ensemble", "-c", str(cfg), check=False)
    assert proc.returncode == 2
    assert "spectrum" in proc.stderr


def test_degenerate_spectrum_is_rejected(cli):
    proc = run(cli, "trajectory", "--spectrum", "1,1", "--probabilities", "0.5,0.5",
               "--delta-p", "1", check=False)
    assert proc.returncode == 2
    assert "non-degenerate" in proc.stderr


def test_seeded_runs_are_byte_identical(cli):
    args = ["ensemble", *REFERENCE, "-M", "40", "-R", "300", "--early-stop", "false"]
    a = run(cli, *args, "--seed", "11").stdout
    b = run(cli, *args, "--seed", "11").stdout
    c = run(cli, *args, "--seed", "12").stdout
    assert a == b
    assert a != c


def test_thread_count_does_not_change_output(cli):
    args = ["ensemble", *REFERENCE, "-M", "40", "-R", "300", "--seed", "3", "--early-stop", "false"]
    assert run(cli, *args, "-j", "1").stdout == run(cli, *args, "-j", "4").stdout


def test_seed_environment_fallback(cli):
    import os

    args = [cli, "trajectory", *REFERENCE, "--format", "json"]
    env = dict(os.environ, SEED="77")
    a = subprocess.run(args, capture_output=True, text=True, env=env, check=True).stdout
    b = subprocess.run([*args, "--seed", "77"], capture_output=True, text=True, check=True).stdout
    assert a == b


def test_saturation_rows(cli):
    lines = run(cli, "saturation", "--f", "0,1,2").stdout.strip().splitlines()
    assert lines[0] == "f,r_sat"
    values = dict(tuple(map(float, line.split(","))) for line in lines[1:])
    assert values[0.0] == 0.0
    assert abs(values[2.0] - 0.953988) < 1e-6


def test_json_summary(cli):
    out = run(cli, "ensemble", *REFERENCE, "-M", "20", "-R", "50", "--format", "json").stdout
    summary = json.loads(out)
    assert summary["config"]["trajectories"] == 50
    assert summary["ensemble"]["trajectories"] == 50
