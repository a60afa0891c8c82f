import json
import math

import numpy as np
import pytest

from sirlab.cli import run, write_csv


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestCsvFormat:
    def test_layout(self, tmp_path):
        path = str(tmp_path / "out.csv")
        write_csv(path, ("a", "b"), [[1.0, 1.0 / 3.0], [2.0, math.pi]])
        text = read(path).decode()
        lines = text.split("\n")
        assert lines[0] == "a,b"
        assert lines[1] == "1,2"
        assert lines[2] == "0.33333333333333331,3.1415926535897931"
        assert text.endswith("\n")
        assert "\r" not in text
        assert all(line == line.rstrip() for line in lines)

    def test_column_length_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(str(tmp_path / "x.csv"), ("a", "b"), [[1.0], [1.0, 2.0]])


class TestClassicCommand:
    def test_csv_contract_and_determinism(self, tmp_path):
        out = str(tmp_path / "traj.csv")
        argv = ["classic", "--lambda", "1", "--gamma", "0.5", "--s0", "0.99",
                "--i0", "0.01", "--t-max", "2", "--dt", "0.01", "--out", out]
        assert run(argv) == 0
        first = read(out)
        assert first.decode().splitlines()[0] == "t,S,I,R"
        assert run(argv) == 0
        assert read(out) == first

    def test_seed_accepted_and_ignored(self, tmp_path):
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        base = ["classic", "--t-max", "1", "--dt", "0.01"]
        assert run(base + ["--seed", "1", "--out", out1]) == 0
        assert run(base + ["--seed", "99", "--out", out2]) == 0
        assert read(out1) == read(out2)


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        assert run(["classic", "--frobnicate", "1"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_kernel(self):
        assert run(["nonlocal", "--kernel", "magic:x=1", "--t-max", "1",
                    "--h", "0.01"]) == 1

    def test_invalid_params(self):
        assert run(["classic", "--s0", "0", "--t-max", "1",
                    "--dt", "0.01"]) == 1

    def test_numerical_failure(self):
        argv = ["classic", "--lambda", "50", "--gamma", "0.1", "--s0", "0.5",
                "--i0", "0.5", "--t-max", "10", "--dt", "1.0"]
        assert run(argv) == 2


class TestOtherCommands:
    def test_tau_csv_columns(self, tmp_path):
        out = str(tmp_path / "tau.csv")
        assert run(["tau", "--n-nodes", "50", "--out", out]) == 0
        lines = read(out).decode().splitlines()
        assert lines[0] == "tau,t,S1,I1"
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == 0.0
        assert float(first[2]) == 0.99

    def test_sis(self, tmp_path):
        out = str(tmp_path / "sis.csv")
        assert run(["sis", "--mu", "0.1", "--tau-max", "5",
                    "--n-nodes", "20", "--out", out]) == 0
        lines = read(out).decode().splitlines()
        assert lines[0] == "tau,S,I"
        s, i = (float(x) for x in lines[1].split(",")[1:])
        assert s + i == 1.0

    def test_nonlocal_with_csv_kernel(self, tmp_path):
        kern = tmp_path / "kern.csv"
        t = np.linspace(0.0, 40.0, 2000)
        with open(kern, "w") as fh:
            fh.write("t,G\n")
            for tk in t:
                fh.write(f"{float(tk)!r},{1.0 - math.exp(-0.5 * float(tk))!r}\n")
        out_file = str(tmp_path / "file.csv")
        out_exp = str(tmp_path / "exp.csv")
        base = ["nonlocal", "--h", "0.01", "--t-max", "5"]
        assert run(base + ["--kernel", f"file:{kern}",
                           "--out", out_file]) == 0
        assert run(base + ["--kernel", "exponential:gamma=0.5",
                           "--out", out_exp]) == 0
        a = np.genfromtxt(out_file, delimiter=",", names=True)
        b = np.genfromtxt(out_exp, delimiter=",", names=True)
        assert np.max(np.abs(a["S"] - b["S"])) < 1e-4

    def test_sdomain_profile_and_map(self, tmp_path):
        out = str(tmp_path / "f.csv")
        assert run(["sdomain", "--profile", "case3-g", "--map", "forward",
                    "--beta", "2", "--s-max", "10", "--n", "100",
                    "--out", out]) == 0
        data = np.genfromtxt(out, delimiter=",", names=True)
        assert tuple(data.dtype.names) == ("s", "value")
        _, f = __import__("sirlab.s_domain", fromlist=["case3_profiles"]) \
            .case3_profiles()
        k = np.argmin(np.abs(data["s"] - 3.0))
        assert data["value"][k] == pytest.approx(f.value(float(data["s"][k])),
                                                 abs=1e-9)

    def test_tau_model_command(self, tmp_path):
        out = str(tmp_path / "tm.csv")
        assert run(["tau-model", "--s0", "0.9", "--i0", "0.1",
                    "--kernel", "exp-tau:A=0.5", "--tau-max", "3",
                    "--n-nodes", "30", "--out", out]) == 0
        lines = read(out).decode().splitlines()
        assert lines[0] == "tau,t,S1,I1"


class TestPeaksCommand:
    def test_precise_report(self, tmp_path):
        out = str(tmp_path / "prof.csv")
        rep = str(tmp_path / "rep.txt")
        assert run(["peaks", "precise", "--beta", "2", "--window", "2:6",
                    "--at", "3,4.5", "--s-max", "60", "--out", out,
                    "--report", rep]) == 0
        text = read(rep).decode()
        fields = dict(line.split("=", 1) for line in text.splitlines())
        assert float(fields["inequality_margin"]) < 0
        assert float(fields["g_monotone_margin"]) < 0
        assert fields["peak_count"] == "2"
        data = np.genfromtxt(out, delimiter=",", names=True)
        assert tuple(data.dtype.names) == ("s", "value")

    def test_rough_runs(self, tmp_path):
        rep = str(tmp_path / "rough.txt")
        assert run(["peaks", "rough", "--beta", "2", "--m0", "1",
                    "--report", rep]) == 0
        assert b"inequality_margin=" in read(rep)


class TestVerifyCommand:
    def test_scenario_file(self, tmp_path):
        scenario = tmp_path / "ref.json"
        scenario.write_text(json.dumps({
            "lambda": 1.0, "gamma": 0.5, "s0": 0.99, "i0": 0.01,
            "t_max": 8.0, "dt": 1e-3, "h": 2e-3,
        }))
        assert run(["verify", "--scenario", str(scenario)]) == 0

    def test_flag_overrides_file(self, tmp_path, capsys):
        scenario = tmp_path / "ref.json"
        scenario.write_text(json.dumps({"gamma": 0.5, "t_max": 8.0}))
        assert run(["verify", "--scenario", str(scenario),
                    "--gamma", "0.4"]) == 0
        assert "gamma=0.4" in capsys.readouterr().out

    def test_unknown_scenario_key_rejected(self, tmp_path):
        scenario = tmp_path / "bad.json"
        scenario.write_text(json.dumps({"gama": 0.5}))
        assert run(["verify", "--scenario", str(scenario)]) == 1


class TestExportDispatcher:
    def test_trajectory_and_profile(self, tmp_path):
        from sirlab.classic_sir import SirParams, simulate_rk4
        from sirlab.cli import export_csv
        from sirlab.s_domain import case3_profiles

        traj = simulate_rk4(SirParams(1.0, 0.5, 0.99, 0.01), 1.0, 0.01)
        t_path = str(tmp_path / "t.csv")
        export_csv(traj, t_path)
        assert read(t_path).decode().splitlines()[0] == "t,S,I,R"

        _, f = case3_profiles()
        p_path = str(tmp_path / "p.csv")
        export_csv(f, p_path, np.linspace(1.0, 5.0, 10))
        assert read(p_path).decode().splitlines()[0] == "s,value"
        with pytest.raises(ValueError, match="grid"):
            export_csv(f, p_path)
        with pytest.raises(TypeError):
            export_csv(42, p_path)
