from ssmd.cli import main

SMALL = """regime = compact
instance = inline
n = 4
cap = 1.0
budget = 1.5
a = 0.5, 1.0
iterations = 10
runs = 3
seed = 11
"""

SC = """regime = strongly_convex
instance = inline
n = 4
cap = 1.0
budget = 1.5
lambda = 50
iterations = 10
runs = 3
seed = 11
"""


def test_experiment_compact_sweep(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(SMALL)
    out = tmp_path / "out"
    code = main(["experiment", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert (out / "experiment_a0.csv").exists()
    assert (out / "experiment_a1.csv").exists()
    assert (out / "experiment_a0.csv.meta").exists()
    assert "a = 0.5" in capsys.readouterr().out


def test_experiment_strongly_convex(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(SC)
    out = tmp_path / "out"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "experiment.csv").exists()


def test_experiment_rerun_byte_identical(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(SC)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["experiment", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["experiment", "--config", str(cfg), "--out", str(out2)]) == 0
    assert (out1 / "experiment.csv").read_bytes() == (out2 / "experiment.csv").read_bytes()


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.txt"
    cfg.write_text("regime = compact\nruns = 0\n")
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "runs must be >= 1" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path):
    assert main(["experiment", "--config", str(tmp_path / "nope.txt"),
                 "--out", str(tmp_path)]) == 1


def test_usage_error_exit_code():
    assert main(["experiment"]) == 1  # missing required flags


def test_verify_command(capsys):
    assert main(["verify", "--kmax", "2000"]) == 0
    out = capsys.readouterr().out
    assert "PASS step_condition[tseng]" in out
    assert "FAIL" not in out


def test_reference_command(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(SC)
    assert main(["reference", "--config", str(cfg), "--tol", "1e-6"]) == 0
    val = float(capsys.readouterr().out.strip())
    assert val < 1.0  # utility minimum sits below the flat envelope level


def test_bounds_command(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(SMALL)
    assert main(["bounds", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "# a = 0.5" in out
    assert "k,bound" in out
    rows = [line for line in out.splitlines() if line and line[0].isdigit()]
    assert len(rows) == 2 * 11  # two a values, k = 0..10 each
