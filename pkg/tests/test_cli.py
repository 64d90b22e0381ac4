import csv

import numpy as np
import pytest

from leadfollow import (
    Gains,
    SwitchingSchedule,
    SystemState,
    Topology,
    simulate,
)
from leadfollow.cli import emit_csv, main
from leadfollow.config import preset_path
from leadfollow.dynamics import LeaderPolicy
from leadfollow.waveforms import Constant

MINIMAL = """
[run]
h = 0.01
t_final = 1.0

[[topology]]
weights = [[0.0, 1.0], [1.0, 0.0]]
leader_weights = [1.0, 1.0]

[schedule]
entries = [[0, 0.5]]
dwell = 0.5

[gains]
k = {k}
l = 2.0

[leader]
x0 = [0.0]
v0 = [0.0]
[leader.u0]
kind = "constant"
value = 0.0

[followers]
x = [[1.0], [2.0]]
v = [[0.0], [0.0]]
vhat = [[0.0], [0.0]]
"""


def scenario(tmp_path, k=10.0, extra=""):
    p = tmp_path / "scenario.toml"
    p.write_text(MINIMAL.format(k=k) + extra)
    return str(p)


def toy_trajectory(n_steps=2):
    topo = Topology(n=1, weights=np.zeros((1, 1)), leader_weights=np.ones(1))
    lp = LeaderPolicy(u0=(Constant(0.0),), x0=np.zeros(1), v0=np.zeros(1))
    s0 = SystemState(t=0.0, x0=[0.0], v0=[0.0], x=[[1.0]], v=[[0.0]], vhat=[[0.0]])
    sched = SwitchingSchedule(entries=((0, 10.0),), dwell=10.0, cycle=True)
    return simulate(s0, sched, [topo], Gains(l=2.0, k=6.0), lp,
                    h=0.5, t_final=0.5 * n_steps)


class TestEmitCsv:
    def test_toy_run_has_header_plus_one_row_per_sample(self, tmp_path):
        traj = toy_trajectory(n_steps=2)
        out = tmp_path / "t.csv"
        emit_csv(traj, out)
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 1 + 3  # header + initial sample + 2 steps
        assert lines[0] == (
            "t,x0_1,v0_1,x_1_1,v_1_1,vhat_1_1,err_x_1,err_v_1,V"
        )

    def test_round_trip_preserves_12_significant_digits(self, tmp_path):
        traj = toy_trajectory(n_steps=4)
        out = tmp_path / "t.csv"
        emit_csv(traj, out)
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        for s, row in enumerate(rows):
            for i in range(traj.n):
                back = float(row[f"x_{i + 1}_1"])
                ref = traj.x[s, i, 0]
                assert abs(back - ref) <= 1e-11 * max(1.0, abs(ref))

    def test_error_columns_hold_tracking_error_magnitudes(self, tmp_path):
        traj = toy_trajectory(n_steps=3)
        out = tmp_path / "t.csv"
        emit_csv(traj, out)
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        for s, row in enumerate(rows):
            expect = abs(traj.x[s, 0, 0] - traj.x0[s, 0])
            assert abs(float(row["err_x_1"]) - expect) <= 1e-11 * max(1.0, expect)

    def test_lyapunov_column_is_nan_without_certificate(self, tmp_path):
        traj = toy_trajectory()
        out = tmp_path / "t.csv"
        emit_csv(traj, out)
        row = out.read_text().strip().split("\n")[1]
        assert row.endswith(",nan")


class TestSimulateCommand:
    def test_writes_artifacts_and_exits_zero(self, tmp_path):
        code = main(["simulate", "--config", scenario(tmp_path),
                     "--out", str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "trajectory.csv").exists()
        report = (tmp_path / "out" / "run_report.txt").read_text()
        assert "final_max_err_x:" in report
        assert "noise_mode: off" in report

    def test_identical_config_gives_byte_identical_csv(self, tmp_path):
        cfg = scenario(
            tmp_path,
            extra="\n[noise]\nmode = \"random\"\ndelta = 0.2\nseed = 99\n",
        )
        main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["simulate", "--config", cfg, "--out", str(tmp_path / "b")])
        a = (tmp_path / "a" / "trajectory.csv").read_bytes()
        b = (tmp_path / "b" / "trajectory.csv").read_bytes()
        assert a == b

    def test_step_dwell_conflict_exits_one_naming_constraint(self, tmp_path, capsys):
        bad = scenario(tmp_path).replace("scenario.toml", "scenario.toml")
        p = tmp_path / "bad.toml"
        p.write_text(MINIMAL.format(k=10.0).replace("h = 0.01", "h = 0.2"))
        code = main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "dwell/4" in capsys.readouterr().err

    def test_missing_file_exits_one(self, tmp_path, capsys):
        code = main(["simulate", "--config", str(tmp_path / "nope.toml"),
                     "--out", str(tmp_path / "o")])
        assert code == 1

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergent_run_exits_two(self, tmp_path, capsys):
        p = tmp_path / "stiff.toml"
        p.write_text(
            MINIMAL.format(k=1e9)
            .replace("h = 0.01", "h = 0.125")
            .replace("t_final = 1.0", "t_final = 50.0")
        )
        code = main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "diverged" in capsys.readouterr().err


class TestCertifyCommand:
    def test_valid_certificate_exits_zero(self, tmp_path, capsys):
        code = main(["certify", "--config", scenario(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "verdict: valid" in out
        assert "beta:" in out

    def test_unit_damping_exits_three(self, tmp_path, capsys):
        code = main(["certify", "--config", scenario(tmp_path, k=1.0)])
        assert code == 3
        assert "invalid" in capsys.readouterr().out


class TestGainsCommand:
    def test_passing_gains_exit_zero(self, tmp_path, capsys):
        code = main(["gains", "--config", scenario(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "overall: pass" in out
        assert "slack=" in out

    def test_failing_gains_exit_three(self, tmp_path, capsys):
        code = main(["gains", "--config", scenario(tmp_path, k=4.5)])
        assert code == 3
        assert "overall: fail" in capsys.readouterr().out


class TestBoundCommand:
    def test_connected_scenario_is_contractive(self, tmp_path, capsys):
        code = main(["bound", "--config", scenario(tmp_path), "--T", "1.0"])
        assert code == 0
        out = capsys.readouterr().out
        assert "contractive: true" in out
        assert "epsilon:" in out

    def test_mostly_disconnected_exits_three(self, tmp_path, capsys):
        extra = """
[[topology]]
weights = [[0.0, 0.0], [0.0, 0.0]]
leader_weights = [0.0, 0.0]
"""
        p = tmp_path / "disc.toml"
        p.write_text(
            MINIMAL.format(k=10.0).replace(
                "entries = [[0, 0.5]]", "entries = [[0, 0.05], [1, 0.95]]"
            ).replace("dwell = 0.5", "dwell = 0.05") + extra
        )
        code = main(["bound", "--config", str(p), "--T", "1.0"])
        assert code == 3
        out = capsys.readouterr().out
        assert "contractive: false" in out
        assert "not contractive" in out


class TestPaperCommand:
    def test_noise_free_benchmark_passes_end_to_end(self, tmp_path, capsys):
        code = main(["paper", "--out", str(tmp_path / "paper")])
        assert code == 0
        out = capsys.readouterr().out
        assert "verdict: valid" in out
        assert "decay_check: pass" in out
        for name in ("trajectory.csv", "run_report.txt", "certificate.txt",
                      "decay_check.txt"):
            assert (tmp_path / "paper" / name).exists()

    def test_noisy_benchmark_reports_bound(self, tmp_path, capsys):
        code = main(["paper", "--noise", "--out", str(tmp_path / "paper")])
        assert code == 0
        out = capsys.readouterr().out
        assert "c_delta:" in out
        assert (tmp_path / "paper" / "bound.txt").exists()
