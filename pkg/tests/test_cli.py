import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from iidtest.cli import TEST_OUTPUT_SCHEMA, main, read_series_csv
from iidtest.exceptions import DataError
from iidtest.rand_models import GAUSSIAN, SeedSpec, draw_innovations

from oracles import chi2_sf_oracle, ljung_box_direct


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def series_file(tmp_path):
    x = draw_innovations(SeedSpec(3), GAUSSIAN, 200)
    path = tmp_path / "x.csv"
    path.write_text("value\n" + "\n".join(repr(v) for v in x.tolist()) + "\n")
    return path, x


class TestTestCommand:
    def test_text_output(self, series_file, capsys):
        path, _ = series_file
        code, out, _ = run(["test", "--input", str(path)], capsys)
        assert code == 0
        assert "whitened-l" in out and "df=20" in out

    def test_json_schema(self, series_file, capsys):
        path, _ = series_file
        code, out, _ = run(["test", "-i", str(path), "--json", "--variant", "plain-t", "--variant", "whitened-t"], capsys)
        assert code == 0
        payload = json.loads(out)
        jsonschema.validate(payload, TEST_OUTPUT_SCHEMA)
        assert [r["variant"]["kind"] for r in payload["results"]] == ["plain-t", "whitened-t"]

    def test_ljung_box_matches_oracle(self, series_file, capsys):
        path, x = series_file
        code, out, _ = run(["test", "-i", str(path), "--json", "--variant", "ljung", "--functions", "id", "--lags", "7"], capsys)
        res = json.loads(out)["results"][0]
        assert code == 0 and res["df"] == 7
        stat = ljung_box_direct(x.tolist(), 7)
        assert res["statistic"] == pytest.approx(stat, rel=1e-12)
        assert res["p_value"] == pytest.approx(chi2_sf_oracle(stat, 7), abs=1e-10)

    def test_skewness_warning(self, tmp_path, capsys):
        path = tmp_path / "e.csv"
        x = np.random.default_rng(1).exponential(size=500) - 1.0
        path.write_text("\n".join(repr(v) for v in x.tolist()))
        code, out, err = run(["test", "-i", str(path), "--json"], capsys)
        assert code == 0 and "skewness" in err
        assert json.loads(out)["warnings"]

    def test_constant_series_is_data_error(self, tmp_path, capsys):
        path = tmp_path / "c.csv"
        path.write_text("x\n" + "1.0\n" * 20)
        assert run(["test", "-i", str(path)], capsys)[0] == 2

    def test_non_numeric_row(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("x\n1.0\n2.0\noops\n3.0\n")
        code, _, err = run(["test", "-i", str(path)], capsys)
        assert code == 2 and ":4:" in err

    def test_missing_file(self, tmp_path, capsys):
        assert run(["test", "-i", str(tmp_path / "none.csv")], capsys)[0] == 2

    def test_too_many_lags(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        path.write_text("1\n2\n3\n4\n")
        assert run(["test", "-i", str(path), "--lags", "3"], capsys)[0] == 2

    def test_singular_whitening(self, tmp_path, capsys):
        # on {0, 1} data x and x^2 coincide, so the 2x2 matrix is singular
        path = tmp_path / "b.csv"
        x = np.random.default_rng(2).integers(0, 2, size=100).astype(float)
        path.write_text("\n".join(repr(v) for v in x.tolist()))
        assert run(["test", "-i", str(path), "--functions", "id-sq"], capsys)[0] == 3

    def test_plain_with_general_functions_is_usage_error(self, series_file, capsys):
        path, _ = series_file
        assert run(["test", "-i", str(path), "--functions", "id-sq", "--variant", "plain-t"], capsys)[0] == 1

    def test_bad_flag(self, capsys):
        assert run(["test", "--nope"], capsys)[0] == 1


class TestReadCsv:
    def test_comments_and_header(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("# note\nt,x\n\n1,0.5\n2,-0.5\n")
        assert np.array_equal(read_series_csv(p), [1.0, 2.0])

    def test_header_only(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("x\n")
        with pytest.raises(DataError):
            read_series_csv(p)


class TestSimulateCommand:
    def test_rows_and_reproducible(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["simulate", "--model", "ar1", "--a", "0.4", "--n", "100", "--seed", "5", "-o", str(a)], capsys)[0] == 0
        run(["simulate", "--model", "ar1", "--a", "0.4", "--n", "100", "--seed", "5", "-o", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()
        assert read_series_csv(a).size == 100

    def test_out_of_range(self, capsys):
        assert run(["simulate", "--model", "ar1", "--a", "1.5"], capsys)[0] == 1

    def test_garch_header(self, capsys):
        code, out, _ = run(["simulate", "--model", "garch", "--a", "0.3", "--n", "5"], capsys)
        assert code == 0 and "# garch_coeffs=0.1,0.1,0.1" in out

    def test_volatility_column(self, capsys):
        code, out, _ = run(["simulate", "--model", "sv", "--a", "0.3", "--n", "5", "--with-volatility"], capsys)
        lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
        assert code == 0 and lines[0] == "x,v" and len(lines) == 6
        assert run(["simulate", "--model", "ar1", "--a", "0.3", "--with-volatility"], capsys)[0] == 1

    def test_env_seed(self, monkeypatch, capsys):
        monkeypatch.setenv("IIDTEST_SEED", "17")
        _, env_out, _ = run(["simulate", "--model", "iid", "--n", "10"], capsys)
        _, flag_out, _ = run(["simulate", "--model", "iid", "--n", "10", "--seed", "17"], capsys)
        assert env_out == flag_out and "seed=17" in env_out


class TestExperimentCommand:
    def test_paper_tables(self, tmp_path, capsys):
        prefix = tmp_path / "run1"
        code, out, _ = run(["experiment", "--paper-tables", "--seed", "1", "-o", str(prefix)], capsys)
        assert code == 0 and out.count("p_O,G") == 4
        run(["experiment", "--paper-tables", "--seed", "1", "--workers", "3", "--quiet", "-o", str(tmp_path / "run2")], capsys)
        first = (tmp_path / "run1.csv").read_bytes()
        assert first == (tmp_path / "run2.csv").read_bytes()
        assert len(first.decode().strip().split("\n")) == 1 + 4 * 5 * 2 * 3
        assert json.loads((tmp_path / "run1.json").read_text())["seed"] == 1

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"families": ["iid"], "replications": 20, "tests": ["new"], "seed": 4}))
        code, out, _ = run(["experiment", "--config", str(cfg), "-o", str(tmp_path / "r")], capsys)
        assert code == 0 and "rate" in out

    def test_invalid_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"a_values": [2.0]}))
        code, _, err = run(["experiment", "--config", str(cfg)], capsys)
        assert code == 1 and "a_values[0]" in err

    def test_missing_config(self, tmp_path, capsys):
        assert run(["experiment"], capsys)[0] == 1
        assert run(["experiment", "--config", str(tmp_path / "none.json")], capsys)[0] == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "iidtest", "simulate", "--model", "ma1", "--a", "0.2", "--n", "3"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.splitlines()[-4] == "x"
