import json
import math

import pytest

from subpois.cli import main
from subpois.tableio import parse_paths_jsonl, parse_table


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestPmfCommand:
    def test_csv_values(self, capsys):
        code, out, _ = run_cli(
            ["pmf", "--family", "gamma", "--lambda", "1", "--t", "1", "--kmax", "4"], capsys
        )
        assert code == 0
        columns, rows = parse_table(out)
        assert columns[0] == "k"
        assert rows[0]["p_bell"] == pytest.approx(0.5, rel=1e-15)

    def test_stable_k2_row(self, capsys):
        code, out, _ = run_cli(
            ["pmf", "--family", "stable", "--alpha", "0.5", "--lambda", "1", "--t", "1", "--kmax", "4"],
            capsys,
        )
        _, rows = parse_table(out)
        assert rows[2]["p_bell"] == pytest.approx(0.25 * math.exp(-1.0), rel=1e-12)

    def test_linear_poisson_column(self, capsys):
        code, out, _ = run_cli(
            ["pmf", "--family", "linear", "--lambda", "2", "--t", "1", "--kmax", "6"], capsys
        )
        _, rows = parse_table(out)
        for row in rows:
            k = row["k"]
            assert row["p_bell"] == pytest.approx(
                math.exp(-2.0) * 2.0**k / math.factorial(k), rel=1e-12
            )


class TestRoundTrip:
    def test_csv_roundtrip_is_exact(self, tmp_path, capsys):
        out_file = tmp_path / "table.csv"
        code, _, _ = run_cli(
            ["hitting", "--family", "gamma", "--lambda", "1", "--k", "2", "--out", str(out_file)],
            capsys,
        )
        assert code == 0
        text = out_file.read_text()
        _, rows = parse_table(text)
        from subpois import BernsteinSpec, ProcessParams, hitting_density

        params = ProcessParams(BernsteinSpec.gamma(), 1.0)
        for row in rows:
            assert row["density"] == hitting_density(params, 2, row["s"])  # bitwise

    def test_json_roundtrip(self, tmp_path, capsys):
        out_file = tmp_path / "table.json"
        code, _, _ = run_cli(
            [
                "pmf", "--family", "tempered", "--alpha", "0.5", "--theta", "1", "--lambda", "3",
                "--t", "1", "--kmax", "3", "--format", "json", "--out", str(out_file),
            ],
            capsys,
        )
        assert code == 0
        columns, rows = parse_table(out_file.read_text())
        reparsed = parse_table(out_file.read_text())
        assert (columns, rows) == reparsed


class TestSimulateCommand:
    def test_seed_fixes_output(self, capsys):
        args = ["simulate", "--family", "gamma", "--lambda", "1", "--t", "1",
                "--samples", "3000", "--seed", "9", "--method", "timechange"]
        _, out1, _ = run_cli(args, capsys)
        _, out2, _ = run_cli(args, capsys)
        assert out1 == out2

    def test_paths_jsonl(self, capsys):
        code, out, _ = run_cli(
            ["simulate", "--family", "linear", "--lambda", "2", "--t", "1",
             "--samples", "20", "--seed", "3", "--paths"],
            capsys,
        )
        assert code == 0
        records = parse_paths_jsonl(out)
        assert len(records) == 20
        assert all(set(r) == {"t", "events", "seed", "method"} for r in records)
        assert all(size == 1 for r in records for _, size in r["events"])


class TestValidateCommand:
    def test_pass_exit_zero(self, capsys):
        code, out, err = run_cli(
            ["validate", "--suite", "pmf", "--family", "gamma", "--lambda", "1",
             "--samples", "200000", "--seed", "11"],
            capsys,
        )
        assert code == 0
        assert "PASS" in err

    def test_fail_exit_one(self, capsys):
        code, _, err = run_cli(
            ["validate", "--suite", "pmf", "--family", "gamma", "--lambda", "1",
             "--samples", "20000", "--seed", "4", "--tv-threshold", "1e-12"],
            capsys,
        )
        assert code == 1
        assert "FAIL" in err

    def test_moments_stable_refusal_passes(self, capsys):
        code, _, err = run_cli(
            ["validate", "--suite", "moments", "--family", "stable", "--alpha", "0.5",
             "--samples", "1000"],
            capsys,
        )
        assert code == 0

    def test_json_report(self, capsys):
        code, out, _ = run_cli(
            ["validate", "--suite", "pmf", "--family", "linear", "--lambda", "1",
             "--samples", "200000", "--seed", "11", "--format", "json"],
            capsys,
        )
        body = json.loads(out)
        assert body["all_pass"] is True


class TestConfiguration:
    def test_usage_error_exit_two(self, capsys):
        code, _, err = run_cli(
            ["pmf", "--family", "stable", "--lambda", "1"], capsys  # missing alpha
        )
        assert code == 2
        assert "error" in err

    def test_env_override(self, capsys, monkeypatch):
        monkeypatch.setenv("SUBPOIS_LAMBDA", "2.0")
        code, out, _ = run_cli(["pmf", "--family", "linear", "--t", "1", "--kmax", "2"], capsys)
        assert code == 0
        _, rows = parse_table(out)
        assert rows[0]["p_bell"] == pytest.approx(math.exp(-2.0), rel=1e-12)

    def test_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv("SUBPOIS_LAMBDA", "2.0")
        code, out, _ = run_cli(
            ["pmf", "--family", "linear", "--lambda", "1", "--t", "1", "--kmax", "2"], capsys
        )
        _, rows = parse_table(out)
        assert rows[0]["p_bell"] == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_config_file_merged_under_flags(self, tmp_path, capsys):
        config = tmp_path / "run.conf"
        config.write_text("family=linear\nlambda=3.0\nkmax=2\n# comment\n")
        code, out, _ = run_cli(["pmf", "--config", str(config), "--t", "1"], capsys)
        assert code == 0
        _, rows = parse_table(out)
        assert rows[0]["p_bell"] == pytest.approx(math.exp(-3.0), rel=1e-12)

    def test_unknown_config_key_exits_two(self, tmp_path, capsys):
        config = tmp_path / "bad.conf"
        config.write_text("nonsense=1\n")
        with pytest.raises(SystemExit):
            main(["pmf", "--config", str(config)])

    def test_conditional_requires_s(self, capsys):
        with pytest.raises(SystemExit):
            main(["conditional", "--family", "gamma", "--k", "2"])


class TestConditionalAndJumptimes:
    def test_conditional_row(self, capsys):
        code, out, _ = run_cli(
            ["conditional", "--family", "gamma", "--s", "1", "--t", "2", "--k", "2"], capsys
        )
        assert code == 0
        _, rows = parse_table(out)
        assert rows[1]["probability"] == pytest.approx(1.0 / 3.0, rel=1e-10)

    def test_jumptimes_row(self, capsys):
        code, out, _ = run_cli(
            ["jumptimes", "--family", "gamma", "--lambda", "1", "--t", "1.5", "--sizes", "2,1"],
            capsys,
        )
        assert code == 0
        _, rows = parse_table(out)
        assert rows[0]["k"] == 3 and rows[0]["r"] == 2


class TestPgfCommand:
    def test_identity_columns(self, capsys):
        code, out, _ = run_cli(
            ["pgf", "--family", "stable", "--alpha", "0.5", "--lambda", "4", "--t", "1",
             "--u", "0.25,0.75"],
            capsys,
        )
        assert code == 0
        _, rows = parse_table(out)
        assert rows[1]["pgf"] == pytest.approx(math.exp(-1.0), rel=1e-12)
        assert all(row["difference"] < 1e-8 for row in rows)


class TestCtrwCommand:
    def test_cutoff_flag(self, capsys):
        code, out, _ = run_cli(
            ["simulate", "--family", "stable", "--alpha", "0.5", "--lambda", "1", "--t", "1",
             "--samples", "5000", "--seed", "2", "--method", "ctrw", "--n", "2"],
            capsys,
        )
        assert code == 0
        _, rows = parse_table(out)
        # with steps of size >= 2 no path can show a count of exactly 1
        assert all(row["k"] != 1 for row in rows)


class TestMomentsCommand:
    def test_tempered_mean(self, capsys):
        code, out, _ = run_cli(
            ["moments", "--family", "tempered", "--alpha", "0.5", "--theta", "1",
             "--lambda", "2", "--t", "3"],
            capsys,
        )
        _, rows = parse_table(out)
        values = {row["quantity"]: row["value"] for row in rows}
        assert values["mean"] == pytest.approx(3.0)
