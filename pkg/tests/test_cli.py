import csv
import io
import json
import re
import subprocess
import sys
from decimal import Decimal

import pytest

from vaxchain import bench
from vaxchain.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, OUTPUT_DIR_ENV, demo_transcript, main
from vaxchain.scenario import default_scenario_data

from .conftest import SCENARIOS

VACCINATION = str(SCENARIOS / "vaccination.scn")


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestRun:
    def test_writes_reports(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "run", "--scenario", VACCINATION, "--output-dir", str(tmp_path))
        assert code == EXIT_OK
        assert "10/10 trials ok" in out and "full_cycle" in out
        report = bench.from_structured((tmp_path / "vaccination-private.report").read_text())
        assert report.repetitions == 10
        assert (tmp_path / "vaccination-private.csv").read_text().startswith("scenario,profile,op,trial,latency_ms\n")

    def test_outputs_are_byte_identical(self, capsys, tmp_path):
        texts = []
        for i in range(2):
            run_cli(capsys, "run", "--scenario", VACCINATION, "--output-dir", str(tmp_path / str(i)))
            texts.append((tmp_path / str(i) / "vaccination-private.report").read_bytes())
        assert texts[0] == texts[1]

    def test_profile_and_seed_flags(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "run", "--scenario", VACCINATION, "--profile", "Main", "--seed", "3",
                               "--output-dir", str(tmp_path), "--format", "structured")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["profile"] == "main" and doc["seed"] == 3
        assert (tmp_path / "vaccination-main.csv").exists()

    def test_csv_format(self, capsys, tmp_path):
        _, out, _ = run_cli(capsys, "run", "--scenario", VACCINATION, "--output-dir", str(tmp_path), "--format", "csv")
        assert len(list(csv.reader(io.StringIO(out)))) == 71

    def test_env_output_dir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
        assert run_cli(capsys, "run", "--scenario", VACCINATION)[0] == EXIT_OK
        assert (tmp_path / "env" / "vaccination-private.report").exists()

    def test_missing_scenario(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "run", "--scenario", str(tmp_path / "nope.scn"))
        assert code == EXIT_USAGE and "scenario not found" in err

    def test_parse_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.scn"
        bad.write_text('{\n  "name": "x"\n  "script": []\n}')
        code, _, err = run_cli(capsys, "run", "--scenario", str(bad))
        assert code == EXIT_USAGE and "line 3, column 3" in err

    def test_invalid_scenario_is_a_violation(self, capsys, tmp_path):
        data = default_scenario_data()
        data["script"][0]["op"] = "mint"
        path = tmp_path / "s.scn"
        path.write_text(json.dumps(data))
        code, _, err = run_cli(capsys, "run", "--scenario", str(path), "--output-dir", str(tmp_path))
        assert code == EXIT_VIOLATION and "unknown op" in err

    def test_contract_failure_exit_code(self, capsys, tmp_path):
        data = default_scenario_data(repetitions=2)
        data["script"].append({"op": "partner_checkout", "actor": "pharmacy", "label": "again"})
        path = tmp_path / "s.scn"
        path.write_text(json.dumps(data))
        code, out, err = run_cli(capsys, "run", "--scenario", str(path), "--output-dir", str(tmp_path))
        assert code == EXIT_VIOLATION
        assert "trial 0 failed" in out and "contract error" in err

    def test_stamp(self, capsys, tmp_path):
        _, out, _ = run_cli(capsys, "run", "--scenario", VACCINATION, "--output-dir", str(tmp_path), "--stamp")
        assert re.match(r"# generated \d{4}-\d\d-\d\dT", out)


class TestCost:
    def test_main_table(self, capsys):
        code, out, _ = run_cli(capsys, "cost", "--profile", "main")
        assert code == EXIT_OK
        assert "Checkin                   0.000739 ETH (~US$0.123413)" in out
        assert out.splitlines()[-1].split() == ["Infrastructure", "(Monthly)", "-"]

    def test_private_table(self, capsys):
        _, out, _ = run_cli(capsys, "cost", "--profile", "private")
        rows = out.splitlines()[2:]
        assert all(r.endswith("-") for r in rows[:-1])
        assert rows[-1].endswith("US$123.75")

    def test_both_columns_by_default(self, capsys):
        _, out, _ = run_cli(capsys, "cost")
        assert "Ethereum (Main)" in out and "Private Instance" in out

    def test_double_quote_doubles_usd(self, capsys):
        _, out, _ = run_cli(capsys, "cost", "--profile", "main", "--eth-usd", "334", "--format", "csv")
        assert "main,full_cycle,0.000776,0.259184" in out

    def test_structured(self, capsys):
        _, out, _ = run_cli(capsys, "cost", "--profile", "private", "--nodes", "10", "--format", "structured")
        doc = json.loads(out)
        assert Decimal(doc["infra_monthly_usd"]) == Decimal("247.5")
        assert doc["break_even_cycles"] == 1909

    @pytest.mark.parametrize("argv", [["--eth-usd", "0"], ["--eth-usd", "abc"], ["--profile", "rinkeby"], ["--nodes", "0"]])
    def test_bad_input(self, capsys, argv):
        assert run_cli(capsys, "cost", *argv)[0] == EXIT_USAGE


class TestCompare:
    def test_default_profiles(self, capsys):
        code, out, _ = run_cli(capsys, "compare", "--scenario", VACCINATION)
        assert code == EXIT_OK
        assert out.splitlines()[0].split()[:3] == ["op", "private", "ms"]
        assert "full_cycle" in out

    def test_structured(self, capsys):
        _, out, _ = run_cli(capsys, "compare", "--scenario", VACCINATION, "--profiles", "private,main",
                            "--format", "structured")
        doc = json.loads(out)
        row = next(r for r in doc["rows"] if r["op"] == "full_cycle")
        assert doc["profile_b"] == "main" and row["ratio"] > 1

    def test_needs_two_profiles(self, capsys):
        assert run_cli(capsys, "compare", "--scenario", VACCINATION, "--profiles", "main")[0] == EXIT_USAGE


class TestDemo:
    def test_transcript(self, capsys):
        code, out, _ = run_cli(capsys, "demo")
        lines = out.splitlines()
        assert code == EXIT_OK and len(lines) == 9
        assert lines[-1].endswith("cycle Completed")
        assert "sum 1000 of 1000 minted" in lines[-1]

    def test_deterministic(self):
        assert demo_transcript("ropsten", 9) == demo_transcript("ropsten", 9)
        assert demo_transcript("ropsten", 9) != demo_transcript("ropsten", 10)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vaxchain", "cost", "--profile", "main", "--format", "csv"],
                          capture_output=True, text=True, check=True)
    assert "main,checkin,0.000739,0.123413" in proc.stdout


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["run"])
    assert info.value.code == EXIT_USAGE
