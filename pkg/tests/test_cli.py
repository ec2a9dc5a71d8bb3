import math
import subprocess
import sys

import pytest

from cyclestab.cli import (ExperimentConfig, main, parse_config_text,
                           serialize_config)


def run_cli(args):
    return main(args)


class TestDesign:
    def test_depth3_table(self, tmp_path, capsys):
        out = tmp_path / "design.csv"
        assert run_cli(["design", "--N", "3", "--out", str(out)]) == 0
        text = out.read_text()
        lines = text.strip().split("\n")
        assert lines[0] == "j,a_j,eps_j,gamma_j"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[2].startswith("0.4444444444444444")
        second = lines[2].split(",")
        assert second[2].startswith("0.1111111111111111")
        console = capsys.readouterr().out
        assert "mu* = N^2 = 9" in console
        assert "N* = 2(N-1) = 4" in console

    def test_depth1_has_no_strengths(self, tmp_path, capsys):
        out = tmp_path / "d1.csv"
        assert run_cli(["design", "--N", "1", "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[1] == "1,1,,1"
        assert "mu* = N^2 = 1" in capsys.readouterr().out

    def test_depth2_quarter(self, tmp_path):
        out = tmp_path / "d2.csv"
        assert run_cli(["design", "--N", "2", "--out", str(out)]) == 0
        assert ",0.25," in out.read_text()

    def test_invalid_depth_is_usage_error(self, capsys):
        assert run_cli(["design", "--N", "0"]) == 2
        assert "N must be" in capsys.readouterr().err


class TestStability:
    def test_depth2_both_methods(self, tmp_path, capsys):
        out = tmp_path / "stab.csv"
        code = run_cli(["stability", "--N", "2", "--resolution", "20000",
                        "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "method,mu_star_abs,detail,censored"
        sweep = lines[1].split(",")
        hodo = lines[2].split(",")
        assert sweep[0] == "RootSweep" and hodo[0] == "Hodograph"
        assert float(sweep[1]) == pytest.approx(4.0, abs=1e-5)
        assert float(hodo[1]) == pytest.approx(4.0, abs=1e-5)

    def test_depth1(self, capsys):
        assert run_cli(["stability", "--N", "1", "--resolution", "5000"]) == 0
        out = capsys.readouterr().out
        assert "mu* by root sweep" in out

    def test_eps_override(self, capsys):
        code = run_cli(["stability", "--eps", "0.9", "--resolution", "20000"])
        assert code == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if "mu*" in l]
        vals = [float(l.split(":")[1].strip().split()[0]) for l in lines]
        assert abs(vals[0] - vals[1]) / max(vals) < 1e-3


class TestHodograph:
    def test_full_curve_csv(self, tmp_path):
        out = tmp_path / "curve.csv"
        assert run_cli(["hodograph", "--N", "4", "--resolution", "2001",
                        "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "t,x,y"
        assert len(lines) == 2002
        t0, x0, y0 = (float(v) for v in lines[1].split(","))
        assert (t0, x0, y0) == (0.0, pytest.approx(1.0, abs=1e-12),
                                pytest.approx(0.0, abs=1e-12))
        t_last = float(lines[-1].split(",")[0])
        assert t_last == pytest.approx(2 * math.pi, abs=1e-12)

    def test_windowed_export(self, tmp_path):
        out = tmp_path / "win.csv"
        assert run_cli(["hodograph", "--N", "4", "--resolution", "5000",
                        "--t-min", "0.7", "--t-max", "2.4", "--out", str(out)]) == 0
        rows = out.read_text().strip().split("\n")[1:]
        ts = [float(r.split(",")[0]) for r in rows]
        assert min(ts) >= 0.7 and max(ts) <= 2.4
        assert len(ts) > 1000

    def test_byte_stability(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(["hodograph", "--N", "3", "--resolution", "500", "--out", str(a)])
        run_cli(["hodograph", "--N", "3", "--resolution", "500", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_seventeen_significant_digits(self, tmp_path):
        out = tmp_path / "c.csv"
        run_cli(["hodograph", "--N", "2", "--resolution", "50", "--out", str(out)])
        row = out.read_text().strip().split("\n")[2].split(",")
        # 17 significant digits means the mantissa carries 16 digits after
        # the leading one for a generic float
        assert any(len(f.replace("-", "").replace(".", "").split("e")[0]) >= 16
                   for f in row[1:])


class TestSimulate:
    def test_stabilizing_run_summary(self, tmp_path, capsys):
        out = tmp_path / "traj.csv"
        code = run_cli(["simulate", "--h", "3.95", "--eps", "0.25", "--x0", "0.3",
                        "--steps", "6000", "--burn-in", "3000", "--out", str(out)])
        assert code == 0
        summary = capsys.readouterr().out
        assert "converged=True" in summary
        assert "escaped=False" in summary
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "n,x,u"
        assert len(lines) == 6000 + 3 + 1
        n0, x0, u0 = lines[1].split(",")
        assert (n0, float(x0), float(u0)) == ("0", 0.3, 0.0)

    def test_chaotic_open_loop_analog(self, tmp_path, capsys):
        out = tmp_path / "chaos.csv"
        code = run_cli(["simulate", "--h", "4.0", "--N", "1", "--x0", "0.3",
                        "--steps", "2000", "--burn-in", "1000", "--out", str(out)])
        assert code == 0
        assert "converged=False" in capsys.readouterr().out

    def test_boundary_neighborhood_run(self, tmp_path, capsys):
        out = tmp_path / "h4.csv"
        code = run_cli(["simulate", "--h", "4.0", "--eps", "0.25", "--x0", "0.3",
                        "--steps", "20000", "--burn-in", "10000", "--out", str(out)])
        assert code == 0
        summary = capsys.readouterr().out
        assert "converged=False" in summary
        assert "max_dist_to_cycle=" in summary
        dist = float(summary.split("max_dist_to_cycle=")[1].split()[0])
        assert dist < 0.1

    def test_explicit_seed_policy(self, capsys, tmp_path):
        out = tmp_path / "seeded.csv"
        code = run_cli(["simulate", "--h", "3.95", "--eps", "0.25",
                        "--seed-policy", "explicit", "--seed", "0.3,0.5,0.7",
                        "--steps", "200", "--burn-in", "100", "--out", str(out)])
        assert code == 0
        rows = out.read_text().strip().split("\n")[1:4]
        assert [float(r.split(",")[1]) for r in rows] == [0.3, 0.5, 0.7]

    def test_explicit_seed_wrong_length(self, capsys):
        code = run_cli(["simulate", "--eps", "0.25", "--seed-policy", "explicit",
                        "--seed", "0.3,0.5", "--steps", "200", "--burn-in", "100"])
        assert code == 2
        assert "exactly 3" in capsys.readouterr().err


class TestVerify:
    def test_small_suite_passes(self, tmp_path, capsys):
        out = tmp_path / "verify.csv"
        code = run_cli(["verify", "--n-max", "3", "--resolution", "20000",
                        "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "N,J,mu_star_sweep,mu_star_hodograph,status"
        assert len(lines) == 4
        for i, row in enumerate(lines[1:], start=1):
            fields = row.split(",")
            assert int(fields[0]) == i
            assert float(fields[1]) == pytest.approx(1.0 / i, abs=1e-8)
            assert fields[4] == "pass"
        assert "all 3 rows pass" in capsys.readouterr().out

    def test_depth_cap(self, capsys):
        assert run_cli(["verify", "--n-max", "11"]) == 2


class TestConfig:
    def test_round_trip_idempotent(self):
        cfg = ExperimentConfig(command="simulate", h=3.95, N=2, eps=(0.25,),
                               x0=0.3, steps=5000, burn_in=2000)
        text = serialize_config(cfg)
        parsed = parse_config_text(text)
        rebuilt = ExperimentConfig(**parsed)
        assert rebuilt == cfg
        assert serialize_config(rebuilt) == text

    def test_file_plus_flag_override(self, tmp_path, capsys):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("h=3.95\neps=0.25\nsteps=400\nburn_in=100\nx0=0.4\n")
        out = tmp_path / "t.csv"
        code = run_cli(["simulate", "--config", str(cfg_file), "--steps", "300",
                        "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 300 + 3 + 1

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("frobnicate=1\n")
        assert run_cli(["simulate", "--config", str(cfg_file)]) == 2
        assert "unknown key" in capsys.readouterr().err

    def test_steps_must_exceed_burn_in(self, capsys):
        code = run_cli(["simulate", "--steps", "100", "--burn-in", "100"])
        assert code == 2
        assert "must exceed" in capsys.readouterr().err

    def test_comments_and_blanks_ignored(self):
        parsed = parse_config_text("# comment\n\nh=3.9 # trailing\n")
        assert parsed == {"h": 3.9}

    def test_missing_config_file(self, capsys):
        assert run_cli(["simulate", "--config", "/nonexistent/x.cfg"]) == 2

    def test_unwritable_output(self, capsys):
        code = run_cli(["design", "--N", "2", "--out", "/nonexistent-dir/x.csv"])
        assert code == 1
        assert "cannot write" in capsys.readouterr().err


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "cyclestab.cli", "design", "--N", "2"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "0.25" in proc.stdout
