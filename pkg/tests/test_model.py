import numpy as np
import pytest

from mdreg import DataError, RegressionData, default_weights, load_csv, simulate, write_csv
from mdreg.model import FitResult, load_weights_csv, validate_params, validate_weights


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_three_row_file(self, tmp_path):
        f = _write(tmp_path / "d.csv", "x1,x2,y\n1,2,3\n4,5,6\n7,8,9\n")
        data = load_csv(f, "y")
        assert (data.n, data.p) == (3, 2)
        np.testing.assert_array_equal(data.x, [[1, 2], [4, 5], [7, 8]])
        np.testing.assert_array_equal(data.y, [3, 6, 9])

    def test_response_by_index(self, tmp_path):
        f = _write(tmp_path / "d.csv", "a,b\n1,2\n3,4\n")
        data = load_csv(f, 0)
        np.testing.assert_array_equal(data.y, [1, 3])
        np.testing.assert_array_equal(data.x, [[2], [4]])

    def test_non_numeric_cell_names_row(self, tmp_path):
        f = _write(tmp_path / "d.csv", "x1,y\n1,2\nabc,4\n5,6\n")
        with pytest.raises(DataError, match="row 2"):
            load_csv(f, "y")

    def test_single_row(self, tmp_path):
        f = _write(tmp_path / "d.csv", "x1,y\n2.5,7\n")
        data = load_csv(f, "y")
        assert (data.n, data.p) == (1, 1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "nope.csv", "y")

    def test_empty_file(self, tmp_path):
        f = _write(tmp_path / "d.csv", "")
        with pytest.raises(DataError, match="empty"):
            load_csv(f, "y")

    def test_header_only(self, tmp_path):
        f = _write(tmp_path / "d.csv", "x1,y\n")
        with pytest.raises(DataError, match="no data rows"):
            load_csv(f, "y")

    def test_response_absent(self, tmp_path):
        f = _write(tmp_path / "d.csv", "x1,y\n1,2\n")
        with pytest.raises(DataError, match="'z'"):
            load_csv(f, "z")

    def test_non_finite_cell_rejected(self, tmp_path):
        f = _write(tmp_path / "d.csv", "x1,y\nnan,2\n")
        with pytest.raises(DataError, match="row 1"):
            load_csv(f, "y")

    def test_round_trip_identity(self, tmp_path):
        data = simulate(23, 3, [0.5, -1.25, 2.0], seed=11)
        f = tmp_path / "rt.csv"
        write_csv(data, f)
        back = load_csv(f, "y")
        np.testing.assert_array_equal(back.x, data.x)
        np.testing.assert_array_equal(back.y, data.y)


class TestSimulate:
    def test_shape_and_determinism(self):
        a = simulate(100, 4, [1, 2, 3, 4], error="normal", scale=1.0, seed=7)
        b = simulate(100, 4, [1, 2, 3, 4], error="normal", scale=1.0, seed=7)
        assert a.x.shape == (100, 4)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)

    def test_different_seeds_differ(self):
        a = simulate(20, 2, [1, 1], seed=0)
        b = simulate(20, 2, [1, 1], seed=1)
        assert not np.array_equal(a.y, b.y)

    @pytest.mark.parametrize("error", ["normal", "laplace", "uniform"])
    def test_zero_scale_is_noiseless(self, error):
        beta = np.array([2.0, -3.0])
        data = simulate(50, 2, beta, error=error, scale=0.0, seed=3)
        np.testing.assert_array_equal(data.y, data.x @ beta)

    def test_validation(self):
        with pytest.raises(DataError):
            simulate(0, 2, [1, 1])
        with pytest.raises(DataError):
            simulate(5, 2, [1, 2, 3])
        with pytest.raises(DataError):
            simulate(5, 2, [1, 1], error="cauchy")
        with pytest.raises(DataError):
            simulate(5, 2, [1, 1], scale=-1.0)


class TestTypesAndWeights:
    def test_default_weights_equal_design(self):
        data = RegressionData(x=[[1.0], [1.0]], y=[1.0, 3.0])
        w = default_weights(data)
        np.testing.assert_array_equal(w, data.x)

    def test_default_weights_copy_semantics(self):
        data = simulate(4, 2, [1, 1], seed=0)
        w = default_weights(data)
        assert w is not data.x
        assert not w.flags.writeable

    def test_wrong_shape_weights_rejected(self):
        data = simulate(5, 2, [1, 1], seed=0)
        with pytest.raises(DataError, match="shape"):
            validate_weights(data, np.ones((5, 3)))

    def test_data_validation(self):
        with pytest.raises(DataError):
            RegressionData(x=[[1.0], [2.0]], y=[1.0, 2.0, 3.0])
        with pytest.raises(DataError):
            RegressionData(x=[[np.inf]], y=[1.0])
        with pytest.raises(DataError):
            RegressionData(x=np.empty((0, 1)), y=np.empty(0))

    def test_stored_arrays_read_only(self):
        data = simulate(3, 1, [1.0], seed=0)
        with pytest.raises(ValueError):
            data.x[0, 0] = 5.0

    def test_params_validation(self):
        with pytest.raises(DataError):
            validate_params([1.0, 2.0], 3)
        with pytest.raises(DataError):
            validate_params([np.nan], 1)

    def test_fit_result_mean_candidates_empty(self):
        r = FitResult(estimate=np.zeros(1), loss=0.0, sweeps=0, converged=True, elapsed=0.0)
        assert np.isnan(r.mean_candidates)


class TestWeightsCsv:
    def test_load_weights(self, tmp_path):
        data = simulate(3, 2, [1, 1], seed=0)
        f = _write(tmp_path / "w.csv", "w1,w2\n1,2\n3,4\n5,6\n")
        w = load_weights_csv(f, data)
        np.testing.assert_array_equal(w, [[1, 2], [3, 4], [5, 6]])

    def test_wrong_shape(self, tmp_path):
        data = simulate(3, 2, [1, 1], seed=0)
        f = _write(tmp_path / "w.csv", "w1\n1\n2\n3\n")
        with pytest.raises(DataError, match="shape"):
            load_weights_csv(f, data)
