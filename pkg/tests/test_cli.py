import csv

import pytest

from sspmsrk.cli import (
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_UNCERTIFIED,
    EXIT_USAGE,
    EXIT_VALIDATION,
    main,
)
from sspmsrk.methods import ssprk33
from sspmsrk.msrkio import dumps_method, read_method, write_method
from sspmsrk.theory import r_sk2


@pytest.fixture()
def ssprk33_file(tmp_path):
    path = tmp_path / "ssprk33.msrk"
    write_method(ssprk33(), path)
    return str(path)


class TestGenSo2:
    def test_writes_valid_method_file(self, tmp_path, capsys):
        out = tmp_path / "so2.msrk"
        code = main(["gen-so2", "--stages", "3", "--steps", "2", "--out", str(out)])
        assert code == EXIT_OK
        method = read_method(out)
        assert (method.s, method.k) == (3, 2)
        assert "SO2(3,2)" in capsys.readouterr().out


class TestAnalyze:
    def test_ssprk33_report(self, ssprk33_file, capsys):
        assert main(["analyze", ssprk33_file]) == EXIT_OK
        out = capsys.readouterr().out
        assert "valid: yes" in out
        assert "C: 1.000000000" in out
        assert "oracle_order: 3" in out
        assert "stage_order: 1" in out
        assert "bound_C_le_s: ok" in out

    def test_invalid_method_exits_3(self, tmp_path, capsys):
        text = dumps_method(ssprk33()).replace(
            "theta = [1]", "theta = [0.5]"
        )
        path = tmp_path / "bad.msrk"
        path.write_text(text)
        assert main(["analyze", str(path)]) == EXIT_VALIDATION
        assert "valid: no" in capsys.readouterr().out

    def test_missing_file_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["analyze", str(tmp_path / "nope.msrk")])
        assert excinfo.value.code == EXIT_USAGE


class TestOptimize:
    def test_small_search_succeeds(self, tmp_path, capsys):
        out = tmp_path / "opt.msrk"
        code = main([
            "optimize", "--stages", "2", "--steps", "2", "--order", "2",
            "--starts", "8", "--seed", "11", "--r-tol", "1e-3",
            "--out", str(out), "--log", str(tmp_path / "log.csv"),
        ])
        assert code == EXIT_OK
        method = read_method(out)
        assert (method.s, method.k, method.claimed_order) == (2, 2, 2)
        assert "certified: yes" in capsys.readouterr().out
        assert (tmp_path / "log.csv").read_text().startswith("start,r,merit")

    def test_infeasible_exits_4(self, tmp_path, capsys):
        code = main([
            "optimize", "--stages", "1", "--steps", "1", "--order", "2",
            "--starts", "4", "--r-tol", "1e-2", "--out", str(tmp_path / "x.msrk"),
        ])
        assert code == EXIT_INFEASIBLE
        assert "infeasible" in capsys.readouterr().err


class TestRun:
    def test_advection_monitors_csv(self, tmp_path, ssprk33_file, capsys):
        out = tmp_path / "run.csv"
        code = main([
            "run", "--problem", "advection", "--method", ssprk33_file,
            "--dt", "0.005", "--tf", "0.05", "--out", str(out),
        ])
        assert code == EXIT_OK
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "min", "tv"]
        assert len(rows) > 2
        assert "final_error" in capsys.readouterr().out

    def test_unknown_problem_exits_2(self, ssprk33_file):
        with pytest.raises(SystemExit):
            main(["run", "--problem", "heat", "--method", ssprk33_file,
                  "--dt", "0.01", "--tf", "0.1", "--out", "x.csv"])


class TestStepsearch:
    def test_tvd_only(self, tmp_path, ssprk33_file, capsys):
        out = tmp_path / "search.csv"
        code = main([
            "stepsearch", "--problem", "advection", "--method", ssprk33_file,
            "--property", "tvd", "--resolution", "1e-4",
            "--out", str(out),
        ])
        assert code == EXIT_OK
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert float(rows[0]["dt_tvd/dx"]) == pytest.approx(1.0, abs=0.02)
        assert rows[0]["dt_pos/dx"] == ""


class TestConvergence:
    def test_non_vdp_rejected(self, ssprk33_file, capsys):
        code = main(["convergence", "--problem", "advection",
                     "--method", ssprk33_file, "--out", "x.csv"])
        assert code == EXIT_USAGE

    def test_vdp_slope(self, tmp_path, ssprk33_file, capsys):
        out = tmp_path / "conv.csv"
        code = main(["convergence", "--method", ssprk33_file,
                     "--tf", "2.0", "--out", str(out)])
        assert code == EXIT_OK
        printed = capsys.readouterr().out
        slope = float(printed.split("slope:")[1].split()[0])
        assert slope == pytest.approx(3.0, abs=0.3)


class TestTable1:
    def test_grid_values(self, tmp_path):
        out = tmp_path / "table1.csv"
        assert main(["table1", "--smax", "4", "--kmax", "3", "--out", str(out)]) == EXIT_OK
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["s", "k=2", "k=3"]
        assert rows[1][1] == f"{r_sk2(2, 2) / 2:.5f}"
        assert not any(cell.endswith("!") for row in rows[1:] for cell in row[1:])

    def test_oversized_grid_rejected(self, tmp_path, capsys):
        code = main(["table1", "--smax", "40", "--out", str(tmp_path / "t.csv")])
        assert code == EXIT_USAGE
