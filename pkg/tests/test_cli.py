"""Command-line front end: CSV output, manifests, exit codes, determinism."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from causalprobe import cli

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
ALL_FIXTURES = sorted(SCENARIOS.glob("*.json"))
SUBCOMMAND = {"spin": "spin", "oscillator": "ho", "field": "field"}


def run(argv):
    return cli.main(argv)


def read_rows(path: Path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestSpinCommand:
    def test_qndsv_quarter_value(self, tmp_path, capsys):
        code = run(["spin", "qndsv", "--target", "up,right",
                    "--alice", "rotate-y:1.5707963267948966",
                    "--obs", "sBz", "--out", str(tmp_path)])
        assert code == 0
        rows = read_rows(tmp_path / "spin_qndsv.csv")
        assert len(rows) == 1
        assert rows[0]["observable"] == "sBz"
        assert float(rows[0]["value"]) == pytest.approx(0.25, abs=1e-12)
        assert "sBz" in capsys.readouterr().out

    def test_flags_override_scenario(self, tmp_path):
        code = run(["spin", "s2-bell", "--scenario",
                    str(SCENARIOS / "spin_qndsv.json"), "--out", str(tmp_path)])
        assert code == 0
        rows = read_rows(tmp_path / "spin_qndsv.csv")
        assert all(abs(float(r["value"])) < 1e-10 for r in rows)


class TestFieldCommand:
    def test_naive_expectations_table(self, tmp_path):
        code = run(["field", "naive", "--d", "1", "--N", "8", "--a", "1",
                    "--mass", "1", "--x", "0", "--y", "3", "--p-index", "1",
                    "--lambda", "0.3", "--out", str(tmp_path)])
        assert code == 0
        rows = {r["observable"]: float(r["value"])
                for r in read_rows(tmp_path / "field_naive-np.csv")}
        from causalprobe.fieldtheory import KickSpec, naive_np_expectations
        from causalprobe.lattice import LatticeSpec, build_modes

        modes = build_modes(LatticeSpec(dim=1, n_sites=8, spacing=1.0, mass=1.0))
        want = naive_np_expectations(
            modes, KickSpec(0, 0.3), 3, modes.mode_index(1)).as_dict()
        for name, val in want.items():
            assert rows[name] == pytest.approx(val, abs=1e-14)


class TestHoCommand:
    def test_naive_momentum(self, tmp_path):
        code = run(["ho", "naive-nplus", "--p-a", "0.3", "--p-b", "-0.2",
                    "--trunc", "40", "--lambda", "0.5", "--obs", "PB",
                    "--out", str(tmp_path)])
        assert code == 0
        rows = read_rows(tmp_path / "ho_naive-nplus.csv")
        assert float(rows[0]["value"]) == pytest.approx(-0.5, abs=1e-8)


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self):
        assert run(["spin", "qndsv", "--frobnicate", "3"]) == 64

    def test_missing_subcommand_is_usage_error(self):
        assert run([]) == 64

    def test_bad_scenario_is_validation_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"version": 1, "system": "spin", "oops": True}))
        assert run(["validate", str(bad)]) == 2

    def test_malformed_json_is_validation_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["validate", str(bad)]) == 2

    def test_truncation_violation_is_numeric_error(self, tmp_path):
        # a kick far too large for the truncation trips the tail policy
        assert run(["ho", "naive-nplus", "--trunc", "6", "--lambda", "6.0",
                    "--out", str(tmp_path)]) == 3

    def test_validate_ok_on_shipped_corpus(self):
        assert ALL_FIXTURES, "fixture corpus missing"
        assert run(["validate"] + [str(p) for p in ALL_FIXTURES]) == 0


class TestManifest:
    def test_digest_stable_under_key_reordering(self):
        raw = json.loads((SCENARIOS / "spin_qndsv.json").read_text())
        reordered = dict(reversed(list(raw.items())))
        assert cli.scenario_digest(raw) == cli.scenario_digest(reordered)
        assert cli.scenario_digest(raw) != cli.scenario_digest(
            {**raw, "lambda_ref": 0.1})

    def test_manifest_written_with_policy(self, tmp_path):
        run(["spin", "qndsv", "--target", "up,right", "--out", str(tmp_path)])
        manifest = json.loads((tmp_path / "spin_qndsv.manifest.json").read_text())
        assert manifest["tool"] == "causal-probe"
        assert manifest["numeric_policy"]["structural_tol"] == 1e-10
        assert "spin_qndsv.csv" in manifest["outputs"]
        assert len(manifest["scenario_digest"]) == 64


class TestCsvFormat:
    def test_lf_endings_and_17_digits(self, tmp_path):
        run(["spin", "qndsv", "--target", "up,right",
             "--alice", "rotate-y:0.7853981633974483", "--out", str(tmp_path)])
        blob = (tmp_path / "spin_qndsv.csv").read_bytes()
        assert b"\r" not in blob
        text = blob.decode()
        assert "0.78539816339744828" in text  # 17 significant digits
        assert "," in text and ";" not in text

    def test_natural_units_flag(self, tmp_path):
        code = run(["spin", "qndsv", "--target", "up,right",
                    "--alice", "rotate-y:1.5707963267948966",
                    "--hbar", "2.0", "--natural-units", "--out", str(tmp_path)])
        assert code == 0
        rows = read_rows(tmp_path / "spin_qndsv.csv")
        assert float(rows[0]["value"]) == pytest.approx(0.25, abs=1e-12)


def _run_fixture(path: Path, out: Path) -> list[Path]:
    raw = json.loads(path.read_text())
    sub = SUBCOMMAND[raw["system"]]
    assert run([sub, "--scenario", str(path), "--out", str(out)]) == 0
    return sorted(p for p in out.iterdir() if p.suffix == ".csv")


class TestDeterminism:
    @pytest.mark.parametrize("fixture", ALL_FIXTURES, ids=lambda p: p.stem)
    def test_reruns_are_byte_identical(self, fixture, tmp_path):
        first = _run_fixture(fixture, tmp_path / "run1")
        second = _run_fixture(fixture, tmp_path / "run2")
        assert [p.name for p in first] == [p.name for p in second]
        for a, b in zip(first, second):
            assert a.read_bytes() == b.read_bytes(), a.name

    def test_sweep_rerun_byte_identical(self, tmp_path):
        args = ["sweep", "--scenario", str(SCENARIOS / "field_volume_sweep.json"),
                "--axis", "volume", "--values", "4,8,16"]
        assert run(args + ["--out", str(tmp_path / "a")]) == 0
        assert run(args + ["--out", str(tmp_path / "b")]) == 0
        for name in ("field_volume_sweep_sweep_volume.csv",
                     "field_volume_sweep_sweep_volume_fits.csv"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()

    def test_amplitude_sweep_csv(self, tmp_path):
        code = run(["sweep", "--scenario", str(SCENARIOS / "field_volume_sweep.json"),
                    "--axis", "spacing", "--values", "1.0,0.5,0.25",
                    "--measure", "amplitude", "--out", str(tmp_path)])
        assert code == 0
        rows = read_rows(tmp_path / "field_volume_sweep_sweep_spacing.csv")
        assert all(r["observable"] == "suppression_amplitude" for r in rows)
        vals = [float(r["measure"]) for r in rows]
        assert vals[0] > vals[1] > vals[2]

    def test_compare_rerun_byte_identical(self, tmp_path):
        args = ["compare", "--scenario", str(SCENARIOS / "spin_s2_ambiguity.json"),
                "--schemes", "s2-standard,s2-bell,sz-standard,sz-bell,none"]
        assert run(args + ["--out", str(tmp_path / "a")]) == 0
        assert run(args + ["--out", str(tmp_path / "b")]) == 0
        name = "spin_s2_ambiguity_compare.csv"
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


class TestCompareCommand:
    def test_ambiguity_table_values(self, tmp_path):
        run(["compare", "--scenario", str(SCENARIOS / "spin_s2_ambiguity.json"),
             "--schemes", "s2-standard,s2-bell", "--out", str(tmp_path)])
        rows = read_rows(tmp_path / "spin_s2_ambiguity_compare.csv")
        vals = {(r["scheme"], r["observable"]): float(r["after"]) for r in rows}
        assert vals[("s2-standard", "sBz")] == pytest.approx(0.25, abs=1e-12)
        assert vals[("s2-bell", "sBz")] == pytest.approx(0.0, abs=1e-12)
        assert vals[("s2-standard", "S2")] == pytest.approx(1.5, abs=1e-12)
        assert vals[("s2-bell", "S2")] == pytest.approx(1.5, abs=1e-12)
