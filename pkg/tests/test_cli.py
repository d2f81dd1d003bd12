import json
import subprocess
import sys

import pytest

from ivpkit.cli import COMMANDS, JobConfig, InputError, run_capture

# one fast invocation per subcommand
INVOCATIONS = {
    "factorial": ["factorial", "--ring", "Z", "--n", "5"],
    "pordering": ["pordering", "--ring", "Z", "--set", "0,1,2,3,4,5,6,7,8", "--p", "2"],
    "energy": ["energy", "--ring", "d=-1", "--set", "0,1,w"],
    "check-aue": ["check-aue", "--ring", "Z", "--set", "0,1,3"],
    "check-universal": ["check-universal", "--ring", "Z", "--set", "0,2,4", "--n", "1"],
    "check-optimal": ["check-optimal", "--ring", "d=-1", "--set", "0,1,w"],
    "check-newton": ["check-newton", "--ring", "Z", "--set", "0,1,2,3"],
    "search-optimal": ["search-optimal", "--ring", "d=-1", "--n", "2", "--radius", "2"],
    "construct-universal": ["construct-universal", "--ring", "d=-1", "--n", "3", "--seed", "4"],
    "collapse": ["collapse", "--ring", "d=-1", "--set", "0,3*w,-2*w", "--direction", "horizontal",
                 "--offset", "0"],
    "ff-order": ["ff-order", "--q", "2", "--n", "5"],
    "ff-verify": ["ff-verify", "--q", "2", "--length", "40", "--max-deg", "2"],
    "schinzel-check": ["schinzel-check", "--ring", "Z", "--set", "0,1,3"],
    "schinzel-search": ["schinzel-search", "--ring", "d=-1", "--max-len", "10"],
    "ek-estimate": ["ek-estimate", "--ring", "d=-1", "--n-max", "500", "--terms", "20000"],
    "residues": ["residues", "--ring", "d=-1", "--ideal", "hnf(2,1,1)"],
    "ideals": ["ideals", "--ring", "d=-1", "--norm", "5"],
}


def test_every_subcommand_covered():
    assert set(INVOCATIONS) == set(COMMANDS)


@pytest.mark.parametrize("name", sorted(INVOCATIONS))
def test_deterministic_output(name):
    first = run_capture(INVOCATIONS[name])
    second = run_capture(INVOCATIONS[name])
    assert first == second
    assert first[0] == 0
    json.loads(first[1])


@pytest.mark.parametrize("name", ["factorial", "pordering", "collapse", "ff-order", "residues", "ideals",
                                  "ek-estimate"])
def test_csv_deterministic(name):
    argv = INVOCATIONS[name] + ["--format", "csv"]
    a, b = run_capture(argv), run_capture(argv)
    assert a == b and a[0] == 0 and len(a[1].splitlines()) >= 2


class TestPayloads:
    def test_factorial(self):
        code, out = run_capture(INVOCATIONS["factorial"])
        assert json.loads(out) == {"factorization": [[2, 3], [3, 1], [5, 1]]}

    def test_check_optimal(self):
        payload = json.loads(run_capture(INVOCATIONS["check-optimal"])[1])
        assert payload["verdict"] is True and payload["n"] == 2

    def test_ff_order(self):
        assert json.loads(run_capture(INVOCATIONS["ff-order"])[1]) == "t^2+1"

    def test_false_verdict_exits_zero(self):
        code, out = run_capture(INVOCATIONS["check-universal"])
        payload = json.loads(out)
        assert code == 0 and payload["verdict"] is False and payload["witness"]["kind"] == "polynomial"

    def test_collapse_packing(self):
        payload = json.loads(run_capture(INVOCATIONS["collapse"])[1])
        assert sorted(payload["after"]) == sorted(["0", "w", "-w"])
        assert payload["energy"]["relation"] == "<"

    def test_plot_points(self):
        code, out = run_capture(INVOCATIONS["collapse"] + ["--format", "plot-points"])
        lines = out.strip().splitlines()
        assert len(lines) == 6 and lines[0].split(",")[2] == "before"

    def test_no_wall_time_by_default(self):
        payload = json.loads(run_capture(INVOCATIONS["construct-universal"])[1])
        assert "wall_time" not in payload and payload["verdict"] is True
        payload = json.loads(run_capture(INVOCATIONS["construct-universal"] + ["--timings"])[1])
        assert "wall_time" in payload


class TestErrors:
    @pytest.mark.parametrize("argv,fragment", [
        (["factorial", "--ring", "d=4", "--n", "3"], "unknown ring"),
        (["search-optimal", "--ring", "Z", "--n", "2", "--radius", "2", "--budget", "-1"], "budget"),
        (["energy", "--ring", "Z", "--set", "0,1,x"], "malformed element"),
        (["factorial", "--ring", "Z", "--n", "-1"], "non-negative"),
        (["energy", "--ring", "Z", "--set", "0,0"], "distinct"),
        (["ff-order", "--q", "4", "--n", "3"], "prime"),
        (["collapse", "--ring", "d=-1", "--set", "0", "--direction", "k0"], "direction"),
        (["nonsense"], "invalid choice"),
        ([], "subcommand"),
    ])
    def test_input_errors(self, argv, fragment, capsys):
        code, out = run_capture(argv)
        assert code == 2 and out == ""
        assert fragment in capsys.readouterr().err

    def test_distinct_messages(self, capsys):
        msgs = []
        for argv in (["factorial", "--ring", "d=4", "--n", "3"], ["energy", "--ring", "Z", "--set", "0,1,x"],
                     ["factorial", "--ring", "Z", "--n", "-1"]):
            run_capture(argv)
            msgs.append(capsys.readouterr().err)
        assert len(set(msgs)) == 3

    def test_budget_exhaustion(self):
        code, out = run_capture(["search-optimal", "--ring", "d=-1", "--n", "8", "--radius", "6",
                                 "--budget", "0"])
        assert code == 3 and json.loads(out)["exhausted"] is False

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("IVPKIT_THREADS", "zero")
        assert run_capture(INVOCATIONS["factorial"])[0] == 2
        monkeypatch.setenv("IVPKIT_THREADS", "4")
        assert run_capture(INVOCATIONS["factorial"])[0] == 0


class TestConfig:
    def test_round_trip(self):
        job = JobConfig("factorial", "Z", {"n": 5}, "json", 3, 10.0)
        assert JobConfig.from_json(job.to_json()) == job

    def test_rejects_unknown_keys(self):
        with pytest.raises(InputError):
            JobConfig.from_json('{"command": "factorial", "colour": 1}')
        with pytest.raises(InputError):
            JobConfig.from_json("[1]")

    def test_config_file_and_override(self, tmp_path):
        path = tmp_path / "job.json"
        path.write_text(JobConfig("factorial", "Z", {"n": 5}).to_json())
        assert run_capture(["--config", str(path)]) == run_capture(INVOCATIONS["factorial"])
        code, out = run_capture(["--config", str(path), "--n", "4"])
        assert json.loads(out) == {"factorization": [[2, 3], [3, 1]]}

    def test_config_flags(self, tmp_path):
        path = tmp_path / "job.json"
        path.write_text(JobConfig("ff-order", None, {"q": 3, "n": 8, "table": True}, "csv").to_json())
        code, out = run_capture(["--config", str(path)])
        assert code == 0 and out.splitlines()[-1] == "8,2*t+2"

    def test_bad_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run_capture(["--config", str(path)])[0] == 2
        assert run_capture(["--config", str(tmp_path / "missing.json")])[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ivpkit", *INVOCATIONS["ff-order"]],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == '"t^2+1"\n'
