import json
import math

import pytest

from ptlattice.cli import main
from ptlattice.lattice import build_model_b, save_custom
from ptlattice.modes import type2_bic_closed_form


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return header, rows


class TestSpectrumCommand:
    def test_single_g_csv(self, tmp_path):
        out = tmp_path / "spec.csv"
        code = main(
            ["spectrum", "--model", "b", "--g", "0.5", "--sites", "40", "--output", str(out)]
        )
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["g", "index", "re_E", "im_E", "class", "loc_kind", "loc_param", "tail_mass"]
        assert len(rows) == 81
        assert any(r["class"] == "type2_bic" and abs(float(r["re_E"])) < 1e-8 for r in rows)

    def test_scan_grid_inclusive(self, tmp_path):
        out = tmp_path / "scan.csv"
        code = main(
            ["spectrum", "--model", "b", "--g-range", "0.4:0.8:0.2", "--sites", "30",
             "--output", str(out)]
        )
        assert code == 0
        _, rows = read_csv(out)
        assert sorted({float(r["g"]) for r in rows}) == pytest.approx([0.4, 0.6, 0.8])
        assert len(rows) == 3 * 61

    def test_missing_delta_for_model_a(self, capsys):
        assert main(["spectrum", "--model", "a", "--g", "0.2", "--sites", "30"]) == 1
        assert "delta" in capsys.readouterr().err

    def test_both_g_and_range_rejected(self):
        assert main(
            ["spectrum", "--model", "b", "--g", "0.5", "--g-range", "0.1:0.2:0.1",
             "--sites", "30"]
        ) == 1

    def test_stdout_output(self, capsys):
        assert main(["spectrum", "--model", "b", "--g", "0.5", "--sites", "30"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("g,index,re_E,im_E")

    def test_json_format(self, capsys):
        assert main(
            ["spectrum", "--model", "b", "--g", "0.5", "--sites", "30", "--format", "json"]
        ) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["points"][0]["n_type2_bic"] == 1


class TestThresholdCommand:
    def test_model_b_json(self, capsys):
        code = main(
            ["threshold", "--model", "b", "--sites", "60", "--bracket", "0.8:1.3",
             "--tol", "0.01", "--format", "json"]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert abs(body["g_th"] - 1.0) < 0.02
        assert body["N"] == 60
        assert body["tol"] == 0.01

    def test_csv_format(self, tmp_path):
        out = tmp_path / "th.csv"
        code = main(
            ["threshold", "--model", "b", "--sites", "40", "--bracket", "0.8:1.3",
             "--tol", "0.02", "--output", str(out)]
        )
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["g_th", "N", "tol"]
        assert abs(float(rows[0]["g_th"]) - 1.0) < 0.05

    def test_unbracketed_exits_2(self, capsys):
        code = main(
            ["threshold", "--model", "b", "--sites", "40", "--bracket", "1.5:2.0"]
        )
        assert code == 2
        assert "numerical failure" in capsys.readouterr().err

    def test_boc_target(self, capsys):
        code = main(
            ["threshold", "--model", "a", "--delta", "0.3", "--target", "boc",
             "--sites", "100", "--bracket", "0.3:0.6", "--tol", "0.01", "--format", "json"]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert abs(body["g_star"] - 0.458) < 0.02

    def test_boc_requires_model_a(self):
        assert main(["threshold", "--model", "b", "--target", "boc", "--sites", "40"]) == 1


class TestTransmitCommand:
    def test_analytic_columns_agree(self, tmp_path):
        out = tmp_path / "t.csv"
        code = main(
            ["transmit", "--model", "a", "--delta", "0.3", "--g", "0.4", "--sites", "30",
             "--q-range", "0.1:0.9:0.01", "--analytic", "--output", str(out)]
        )
        assert code == 0
        header, rows = read_csv(out)
        assert header[-3:] == ["T_analytic", "re_t_analytic", "im_t_analytic"]
        worst = max(
            abs(math.sqrt(float(r["T"])) - math.sqrt(float(r["T_analytic"]))) for r in rows
        )
        assert worst < 1e-8

    def test_empty_grid_exits_1(self, capsys):
        code = main(
            ["transmit", "--model", "b", "--g", "0.9", "--sites", "40",
             "--q-range", "0.5:0.4:0.1"]
        )
        assert code == 1
        assert "empty grid" in capsys.readouterr().err

    def test_feature_report(self, tmp_path):
        out = tmp_path / "curve.csv"
        feat = tmp_path / "feature.json"
        code = main(
            ["transmit", "--model", "b", "--g", "0.9", "--sites", "200",
             "--q-range", "0.1:0.9:0.005", "--output", str(out), "--feature", str(feat)]
        )
        assert code == 0
        body = json.loads(feat.read_text())
        assert body["kind"] == "dip"
        assert abs(body["q_loc_over_pi"] - 0.5) < 0.02


class TestPropagateCommand:
    def test_power_csv_and_growth_json(self, tmp_path):
        out = tmp_path / "power.csv"
        growth = tmp_path / "growth.json"
        code = main(
            ["propagate", "--model", "a", "--delta", "0.3", "--g", "0.2", "--sites", "60",
             "--z-max", "20", "--dz", "0.1", "--output", str(out), "--growth", str(growth)]
        )
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["z", "P", "P_over_P0"]
        assert len(rows) == 201
        assert float(rows[0]["P_over_P0"]) == 1.0
        body = json.loads(growth.read_text())
        assert body["kind"] == "bounded"

    def test_trace_artifact(self, tmp_path):
        trace = tmp_path / "trace.csv"
        code = main(
            ["propagate", "--model", "b", "--g", "0.5", "--sites", "30", "--z-max", "2",
             "--dz", "1.0", "--output", "-", "--trace", str(trace)]
        )
        assert code == 0
        header, rows = read_csv(trace)
        assert header == ["z", "n", "re_c", "im_c", "abs2"]
        assert len(rows) == 3 * 61

    def test_c0_file_matches_excite(self, tmp_path):
        N = 40
        c0 = [[0.0, 0.0]] * (2 * N + 1)
        c0[N] = [1.0, 0.0]
        c0_path = tmp_path / "c0.json"
        c0_path.write_text(json.dumps(c0))
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        base = ["propagate", "--model", "b", "--g", "0.7", "--sites", str(N),
                "--z-max", "5", "--dz", "0.5"]
        assert main(base + ["--excite", "0", "--output", str(out_a)]) == 0
        assert main(base + ["--c0-file", str(c0_path), "--output", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_rk_method(self, tmp_path):
        out = tmp_path / "rk.csv"
        code = main(
            ["propagate", "--model", "b", "--g", "0.5", "--sites", "30", "--z-max", "4",
             "--method", "rk", "--output", str(out)]
        )
        assert code == 0


class TestBicCommand:
    def test_mode_csv(self, tmp_path):
        out = tmp_path / "mode.csv"
        code = main(["bic", "--model", "b", "--g", "1", "--sites", "50", "--output", str(out)])
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["n", "re_c", "im_c", "abs_c"]
        mode = type2_bic_closed_form(1.0, 50)
        by_site = {int(r["n"]): complex(float(r["re_c"]), float(r["im_c"])) for r in rows}
        assert by_site[0] == mode.site(0)
        assert by_site[2] == mode.site(2)

    def test_report_with_exceptional_check(self, tmp_path):
        report = tmp_path / "report.json"
        code = main(
            ["bic", "--model", "b", "--g", "1", "--sites", "40", "--check-exceptional",
             "--output", "-", "--report", str(report)]
        )
        assert code == 0
        body = json.loads(report.read_text())
        assert body["residual"]["interior"] < 1e-12
        assert body["exceptional"]["passes"] is True

    def test_zero_strength_exits_1(self):
        assert main(["bic", "--model", "b", "--g", "0", "--sites", "40"]) == 1

    def test_requires_model_b(self):
        assert main(["bic", "--model", "a", "--delta", "0.3", "--g", "1", "--sites", "40"]) == 1


class TestCliContract:
    def test_unknown_argument_exits_1(self):
        with pytest.raises(SystemExit) as err:
            main(["spectrum", "--model", "b", "--g", "0.5", "--frobnicate"])
        assert err.value.code == 1

    def test_custom_model_selector(self, tmp_path, capsys):
        path = tmp_path / "custom.json"
        save_custom(build_model_b(0.5, 30), path)
        code = main(["spectrum", "--model", f"custom:{path}", "--sites", "30"])
        assert code == 0
        out = capsys.readouterr().out
        assert "type2_bic" in out

    def test_byte_identical_reruns(self, tmp_path):
        out1 = tmp_path / "run1.csv"
        out2 = tmp_path / "run2.csv"
        argv = ["transmit", "--model", "a", "--delta", "0.3", "--g", "0.5", "--sites", "40",
                "--q-range", "0.1:0.9:0.02"]
        assert main(argv + ["--output", str(out1)]) == 0
        assert main(argv + ["--output", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_grid_parser_endpoint_inclusion(self, tmp_path):
        out = tmp_path / "scan.csv"
        code = main(
            ["spectrum", "--model", "b", "--g-range", "0.1:1.2:0.05", "--sites", "20",
             "--output", str(out)]
        )
        assert code == 0
        _, rows = read_csv(out)
        gs = sorted({float(r["g"]) for r in rows})
        assert len(gs) == 23
        assert gs[0] == pytest.approx(0.1) and gs[-1] == pytest.approx(1.2)
