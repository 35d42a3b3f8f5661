import csv
import json
from pathlib import Path

import jsonschema
import pytest

from qfci.cli import SEARCH_CAVEAT, load_scan_config, main
from qfci.resources import fci_dimension

from tests.conftest import FIXTURES, H2_SECTOR_11_EIGENVALUES

SCHEMA_DIR = Path(__file__).parent.parent / "src" / "qfci" / "schemas"


def write_config(tmp_path: Path, **changes) -> Path:
    cfg = {
        "ipea": {"e_max": 1.0, "e_min": -1.5, "bits": 12, "seed": 7},
        "repetition_counts": [1, 3, 5],
        "points": [
            {
                "label": "h2",
                "fcidump": str(FIXTURES / "h2_sto3g_r1.4011.fcidump"),
                "guess": {"kind": "hf"},
                "sector": [1, 1],
                "target": 0,
            }
        ],
        "outputs": {"csv": "scan.csv", "json": "scan.json"},
    }
    for key, value in changes.items():
        if value is None:
            cfg.pop(key, None)
        else:
            cfg[key] = value
    path = tmp_path / "scan_config.json"
    path.write_text(json.dumps(cfg, indent=1), encoding="utf-8")
    return path


def read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def validate(report: dict, schema_file: str):
    schema = json.loads((SCHEMA_DIR / schema_file).read_text())
    jsonschema.validate(report, schema)


class TestRunCommand:
    def test_single_point_outputs(self, tmp_path):
        cfg_path = write_config(tmp_path)
        assert main(["run", "--config", str(cfg_path)]) == 0

        rows = read_rows(tmp_path / "scan.csv")
        assert len(rows) == 1
        row = rows[0]
        assert row["label"] == "h2"
        assert float(row["fci_energy"]) == pytest.approx(
            H2_SECTOR_11_EIGENVALUES[0], abs=1e-10
        )
        ov = float(row["overlap_sq"])
        p_tot = float(row["p_tot"])
        assert 0.81 * ov < p_tot <= ov + 1e-12
        assert float(row["overlap_scaled"]) == pytest.approx(0.81 * ov)
        # sampled energy decodes onto the phase grid inside the window
        assert -1.5 <= float(row["sampled_energy"]) <= 1.0
        for col in ("b_success_r1", "b_success_r3", "b_success_r5"):
            assert 0.0 <= float(row[col]) <= 1.0

        report = json.loads((tmp_path / "scan.json").read_text())
        validate(report, "scan_report.schema.json")
        assert report["bits"] == 12
        assert report["points"][0]["status"] == "ok"

    def test_b_success_non_decreasing_in_repetitions(self, tmp_path):
        cfg_path = write_config(tmp_path, repetition_counts=[1, 3, 5, 11])
        assert main(["run", "--config", str(cfg_path)]) == 0
        row = read_rows(tmp_path / "scan.csv")[0]
        values = [float(row[f"b_success_r{r}"]) for r in (1, 3, 5, 11)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_empty_point_list(self, tmp_path):
        cfg_path = write_config(tmp_path, points=[])
        assert main(["run", "--config", str(cfg_path)]) == 0
        rows = read_rows(tmp_path / "scan.csv")
        assert rows == []
        report = json.loads((tmp_path / "scan.json").read_text())
        validate(report, "scan_report.schema.json")
        assert report["points"] == []

    def test_point_failure_does_not_abort_scan(self, tmp_path):
        bad = tmp_path / "broken.fcidump"
        bad.write_text("this is not an integral file\n")
        cfg_path = write_config(
            tmp_path,
            points=[
                {
                    "label": "bad",
                    "fcidump": str(bad),
                    "guess": {"kind": "hf"},
                    "sector": [1, 1],
                    "target": 0,
                },
                {
                    "label": "good",
                    "fcidump": str(FIXTURES / "h2_sto3g_r1.4011.fcidump"),
                    "guess": {"kind": "hf"},
                    "sector": [1, 1],
                    "target": 0,
                },
            ],
        )
        assert main(["run", "--config", str(cfg_path)]) == 0
        rows = read_rows(tmp_path / "scan.csv")
        by_label = {r["label"]: r for r in rows}
        assert by_label["bad"]["error"]
        assert by_label["bad"]["fci_energy"] == ""
        assert by_label["good"]["error"] == ""
        report = json.loads((tmp_path / "scan.json").read_text())
        validate(report, "scan_report.schema.json")
        statuses = {p["label"]: p["status"] for p in report["points"]}
        assert statuses == {"bad": "error", "good": "ok"}

    def test_same_seed_reproduces_outputs_byte_for_byte(self, tmp_path):
        cfg_path = write_config(tmp_path)
        outs = []
        for run in ("first", "second"):
            csv_path = tmp_path / run / "scan.csv"
            json_path = tmp_path / run / "scan.json"
            code = main(
                [
                    "run",
                    "--config",
                    str(cfg_path),
                    "--seed",
                    "123",
                    "--csv",
                    str(csv_path),
                    "--json",
                    str(json_path),
                ]
            )
            assert code == 0
            outs.append((csv_path.read_bytes(), json_path.read_bytes()))
        assert outs[0] == outs[1]

    def test_bits_override_wins_over_config(self, tmp_path):
        cfg_path = write_config(tmp_path)
        assert main(["run", "--config", str(cfg_path), "--bits", "8"]) == 0
        report = json.loads((tmp_path / "scan.json").read_text())
        assert report["bits"] == 8

    def test_random_guess_kind(self, tmp_path):
        cfg_path = write_config(
            tmp_path,
            points=[
                {
                    "label": "rand",
                    "fcidump": str(FIXTURES / "h2_sto3g_r1.4011.fcidump"),
                    "guess": {"kind": "random"},
                    "sector": [1, 1],
                    "target": 0,
                }
            ],
        )
        assert main(["run", "--config", str(cfg_path)]) == 0
        report = json.loads((tmp_path / "scan.json").read_text())
        point = report["points"][0]
        assert point["status"] == "ok"
        assert 0.0 < point["overlap_sq"] <= 1.0

    def test_search_runs_reported_with_caveat(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path)
        code = main(["run", "--config", str(cfg_path), "--search-runs", "5"])
        assert code == 0
        out = capsys.readouterr().out
        assert SEARCH_CAVEAT in out
        report = json.loads((tmp_path / "scan.json").read_text())
        assert report["search_caveat"] == SEARCH_CAVEAT
        search = report["points"][0]["search"]
        assert search["runs"] == 5
        assert 1 <= search["multiplicity"] <= 5
        assert -1.5 <= search["min_energy"] <= 1.0

    def test_electron_count_mismatch_warns(self, tmp_path, capsys):
        cfg_path = write_config(
            tmp_path,
            points=[
                {
                    "label": "cation",
                    "fcidump": str(FIXTURES / "h2_sto3g_r1.4011.fcidump"),
                    "guess": {"kind": "hf"},
                    "sector": [1, 0],
                    "target": 0,
                }
            ],
        )
        assert main(["run", "--config", str(cfg_path)]) == 0
        assert "differs from sector" in capsys.readouterr().err
        report = json.loads((tmp_path / "scan.json").read_text())
        assert report["points"][0]["status"] == "ok"
        assert len(report["warnings"]) == 1

    def test_even_repetition_count_rejected(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, repetition_counts=[2])
        assert main(["run", "--config", str(cfg_path)]) == 2
        assert "odd" in capsys.readouterr().err

    def test_missing_fcidump_rejected(self, tmp_path, capsys):
        cfg_path = write_config(
            tmp_path,
            points=[
                {
                    "label": "ghost",
                    "fcidump": "nowhere.fcidump",
                    "guess": {"kind": "hf"},
                    "sector": [1, 1],
                }
            ],
        )
        assert main(["run", "--config", str(cfg_path)]) == 2
        assert "no such file" in capsys.readouterr().err

    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        import shutil

        shutil.copy(
            FIXTURES / "h2_sto3g_r1.4011.fcidump", tmp_path / "local.fcidump"
        )
        cfg_path = write_config(
            tmp_path,
            points=[
                {
                    "label": "h2",
                    "fcidump": "local.fcidump",
                    "guess": {"kind": "hf"},
                    "sector": [1, 1],
                }
            ],
        )
        cfg = load_scan_config(cfg_path)
        assert cfg.points[0].fcidump == tmp_path / "local.fcidump"
        assert cfg.csv_path == tmp_path / "scan.csv"


class TestScalingCommand:
    def test_two_sizes(self, tmp_path, capsys):
        csv_path = tmp_path / "scaling.csv"
        json_path = tmp_path / "scaling.json"
        code = main(
            [
                "scaling",
                "--sizes",
                "4,8",
                "--seed",
                "3",
                "--csv",
                str(csv_path),
                "--json",
                str(json_path),
            ]
        )
        assert code == 0
        rows = read_rows(csv_path)
        assert [int(r["n_basis"]) for r in rows] == [4, 8]
        assert int(rows[0]["fci_dim"]) == fci_dimension(2, 1, 1) == 4
        assert int(rows[1]["gate_total"]) > int(rows[0]["gate_total"])

        report = json.loads(json_path.read_text())
        validate(report, "scaling_report.schema.json")
        assert "fitted_exponent" in report
        assert "fitted exponent" in capsys.readouterr().out

    def test_single_size_has_no_fit(self, tmp_path):
        code = main(
            [
                "scaling",
                "--sizes",
                "6",
                "--csv",
                str(tmp_path / "s.csv"),
                "--json",
                str(tmp_path / "s.json"),
            ]
        )
        assert code == 0
        report = json.loads((tmp_path / "s.json").read_text())
        validate(report, "scaling_report.schema.json")
        assert "fitted_exponent" not in report

    def test_odd_size_rejected(self, tmp_path, capsys):
        code = main(
            [
                "scaling",
                "--sizes",
                "5",
                "--csv",
                str(tmp_path / "s.csv"),
                "--json",
                str(tmp_path / "s.json"),
            ]
        )
        assert code == 2
        assert "even" in capsys.readouterr().err

    def test_scaling_deterministic(self, tmp_path):
        blobs = []
        for run in ("a", "b"):
            csv_path = tmp_path / run / "scaling.csv"
            json_path = tmp_path / run / "scaling.json"
            assert (
                main(
                    [
                        "scaling",
                        "--sizes",
                        "4,6",
                        "--seed",
                        "11",
                        "--csv",
                        str(csv_path),
                        "--json",
                        str(json_path),
                    ]
                )
                == 0
            )
            blobs.append((csv_path.read_bytes(), json_path.read_bytes()))
        assert blobs[0] == blobs[1]
