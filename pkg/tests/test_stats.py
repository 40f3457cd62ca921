"""Error-metric, slope-fit, and CSV round-trip tests."""

import numpy as np
import pytest

from fprqmc.stats import (averaged_rmse, build_record,
                          fit_slope, read_convergence_csv, records_from_rows,
                          rmse_field, slope_table, write_convergence_csv,
                          write_slopes_csv, write_trajectories_csv)


class TestRmseField:
    def test_single_repetition(self):
        bias, var, rmse = rmse_field(np.array([[2.0]]), np.array([1.5]))
        assert var[0] == 0.0
        assert rmse[0] == bias[0] == 0.5

    def test_runs_equal_reference(self):
        runs = np.full((5, 3), 2.0)
        _, _, rmse = rmse_field(runs, np.full(3, 2.0))
        assert np.all(rmse == 0.0)

    def test_hand_case(self):
        bias, var, rmse = rmse_field(np.array([[1.0], [3.0]]), np.array([1.0]))
        assert bias[0] == 1.0 and var[0] == 1.0
        assert rmse[0] == pytest.approx(np.sqrt(2.0))

    def test_population_variance(self):
        runs = np.array([[0.0], [1.0], [2.0]])
        _, var, _ = rmse_field(runs, np.array([1.0]))
        assert var[0] == pytest.approx(2.0 / 3.0)  # divide by R, not R-1

    def test_nan_runs_skipped(self):
        runs = np.array([[1.0], [np.nan], [3.0]])
        bias, var, rmse = rmse_field(runs, np.array([1.0]))
        assert bias[0] == 1.0 and var[0] == 1.0

    def test_bounds(self):
        rng = np.random.default_rng(0)
        runs = rng.standard_normal((20, 6))
        ref = rng.standard_normal(6)
        bias, var, rmse = rmse_field(runs, ref)
        assert np.all(rmse >= bias - 1e-15)
        assert np.all(rmse >= np.sqrt(var) - 1e-15)


class TestAveragedRmse:
    def test_constant_field(self):
        assert averaged_rmse(np.full((4, 5), 3.25)) == 3.25

    def test_two_by_two(self):
        assert averaged_rmse(np.array([[0.0, 0.0], [2.0, 2.0]])) == 1.0

    def test_single_point_identity(self):
        assert averaged_rmse(np.array([[0.7]])) == pytest.approx(0.7)

    def test_linear_and_permutation_invariant(self):
        rng = np.random.default_rng(1)
        f = rng.uniform(size=(6, 7))
        assert averaged_rmse(3.0 * f) == pytest.approx(3.0 * averaged_rmse(f))
        assert averaged_rmse(f.ravel()[rng.permutation(42)].reshape(6, 7)) == \
            pytest.approx(averaged_rmse(f))


class TestFitSlope:
    def test_exact_powers(self):
        assert fit_slope([64, 256, 1024], [1.0, 0.25, 0.0625]) == pytest.approx(-1.0)

    def test_half_power(self):
        ns = [2**p for p in range(6, 12)]
        errs = [3.0 * n**-0.5 for n in ns]
        assert fit_slope(ns, errs) == pytest.approx(-0.5)

    def test_constant(self):
        assert fit_slope([8, 16, 32], [2.0, 2.0, 2.0]) == pytest.approx(0.0)

    def test_scale_invariance(self):
        ns = [64, 128, 256, 512]
        errs = [n**-0.7 for n in ns]
        a = fit_slope(ns, errs)
        b = fit_slope(ns, [17.0 * e for e in errs])
        assert a == pytest.approx(b)

    def test_nonpositive_excluded_with_warning(self):
        with pytest.warns(UserWarning):
            s = fit_slope([8, 16, 32, 64], [1.0, 0.5, 0.0, 0.25])
        assert np.isfinite(s)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_slope([8, 16], [1.0, 0.5])


class TestBuildRecord:
    def test_exact_marker(self):
        r = build_record("s", "vy", [64, 128, 256], [1e-14, 2e-14, 5e-15])
        assert r.exact and r.slope is None

    def test_asymptotic_window(self):
        ns = [2**p for p in range(6, 12)]
        errs = [n**-0.5 if n < 512 else 10 * n**-1.0 for n in ns]
        full = build_record("s", "q", ns, errs, window="full")
        asym = build_record("s", "q", ns, errs, window="asymptotic")
        assert asym.fit_window[0] > full.fit_window[0]
        assert asym.slope == pytest.approx(-1.0, abs=1e-9)

    def test_short_series_has_no_slope(self):
        r = build_record("s", "q", [64, 128], [1.0, 0.4])
        assert r.slope is None and not r.exact


class TestCsv:
    def _records(self):
        return [build_record("pseudo", "energy", [64, 256, 1024],
                             [0.5, 0.25, 0.125]),
                build_record("array-rqmc", "vy", [64, 256, 1024],
                             [1e-14, 1e-14, 1e-14])]

    def test_convergence_roundtrip(self, tmp_path):
        path = tmp_path / "c.csv"
        meta = {"scenario": "test", "seed": 1}
        write_convergence_csv(path, self._records(), meta)
        meta2, rows = read_convergence_csv(path)
        assert meta2 == meta
        assert rows[0] == ("pseudo", "energy", 64, 0.5)
        rebuilt = records_from_rows(rows)
        assert rebuilt[0].slope == pytest.approx(self._records()[0].slope, abs=1e-12)
        assert rebuilt[1].exact

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_convergence_csv(a, self._records(), {"k": 1})
        write_convergence_csv(b, self._records(), {"k": 1})
        assert a.read_bytes() == b.read_bytes()

    def test_slopes_csv(self, tmp_path):
        path = tmp_path / "s.csv"
        write_slopes_csv(path, self._records(), {})
        text = path.read_text()
        assert "pseudo,energy," in text
        assert ",1," in text  # exact flag for the rqmc row

    def test_trajectories_csv(self, tmp_path):
        runs = np.arange(2 * 2 * 1 * 2, dtype=float).reshape(2, 2, 1, 2)
        path = tmp_path / "t.csv"
        write_trajectories_csv(path, runs, ("a", "b"), {"m": 0})
        lines = path.read_text().strip().splitlines()
        assert lines[1] == "step,cell,quantity,repetition,value"
        assert lines[2] == "1,0,a,0,0.0"
        assert len(lines) == 2 + 8

    def test_slope_table_render(self):
        table = slope_table(self._records(), ["energy", "vy"])
        assert "pseudo" in table and "array-rqmc" in table
        lines = table.splitlines()
        assert len(lines) == 3
        assert lines[2].split()[-1] == "0"  # exact marker rendered as 0
