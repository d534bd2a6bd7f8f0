# tests/test_data_loader.py

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal

from data_loader import (
    Dataset, add_white_noise, apply_l1_scale, concat_features, fit_l1_scale,
    load_csv, load_features, make_folds, make_holdout, make_synthetic_lupi,
    normalize_l1, one_hot, signed_targets, split_privileged, take_rows,
)
from errors import DataError

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:

    def test_sorted_label_one_hot(self, tmp_path):
        path = _write(tmp_path, "f1,f2,label\n1,2,a\n3,4,b\n5,6,a\n")
        d = load_csv(path)
        assert_array_equal(d.y, [[1, 0], [0, 1], [1, 0]])
        assert d.class_labels == ("a", "b")
        assert_array_equal(d.x, [[1, 2], [3, 4], [5, 6]])
        assert d.x_priv is None

    def test_single_row_regression(self, tmp_path):
        path = _write(tmp_path, "x,target\n1.0,2.5\n")
        d = load_csv(path, task="regression")
        assert_array_equal(d.y, [[2.5]])
        assert d.class_labels is None

    def test_iris_shape(self, iris_like_csv):
        d = load_csv(iris_like_csv, label_column="species")
        assert d.n_rows == 150
        assert d.n_features == 4
        assert d.n_outputs == 3
        assert_array_equal(d.y.sum(axis=1), np.ones(150))

    def test_numeric_labels_sorted_numerically(self, tmp_path):
        path = _write(tmp_path, "f,label\n0,10\n1,9\n2,2\n")
        d = load_csv(path)
        assert d.class_labels == ("2", "9", "10")
        assert_array_equal(d.y, [[0, 0, 1], [0, 1, 0], [1, 0, 0]])

    def test_label_by_index_without_header(self, tmp_path):
        path = _write(tmp_path, "a,1,2\nb,3,4\n")
        d = load_csv(path, label_column=0, header=False)
        assert_array_equal(d.x, [[1, 2], [3, 4]])
        assert d.class_labels == ("a", "b")

    def test_binary_signed_and_one_hot(self, tmp_path):
        path = _write(tmp_path, "f,label\n1,neg\n2,pos\n3,pos\n")
        signed = load_csv(path, task="binary")
        assert_array_equal(signed.y, [[-1], [1], [1]])
        one_hot_d = load_csv(path, task="binary", binary_one_hot=True)
        assert one_hot_d.y.shape == (3, 2)

    def test_binary_needs_two_classes(self, tmp_path):
        path = _write(tmp_path, "f,label\n1,a\n2,b\n3,c\n")
        with pytest.raises(DataError):
            load_csv(path, task="binary")

    def test_short_row_reports_index(self, tmp_path):
        path = _write(tmp_path, "a,b,c\n1,2,x\n1,2\n")
        with pytest.raises(DataError, match="row 1"):
            load_csv(path)

    def test_short_row_before_valid_rows(self, tmp_path):
        path = _write(tmp_path, "a,b,c\n1,2,x\n1,2\n3,4,y\n")
        with pytest.raises(DataError, match="malformed row 1"):
            load_csv(path)

    def test_empty_label_is_malformed(self, tmp_path):
        path = _write(tmp_path, "a,b,c\n1,2,x\n3,4,\n")
        with pytest.raises(DataError, match="row 1"):
            load_csv(path)

    def test_long_row_is_malformed(self, tmp_path):
        path = _write(tmp_path, "a,b,c\n1,2,x\n1,2,3,4\n")
        with pytest.raises(DataError, match="malformed"):
            load_csv(path)

    def test_non_numeric_feature(self, tmp_path):
        path = _write(tmp_path, "a,b,label\n1,2,p\n1,oops,q\n")
        with pytest.raises(DataError, match="non-numeric"):
            load_csv(path)

    def test_non_numeric_regression_target(self, tmp_path):
        path = _write(tmp_path, "a,target\n1,2\n1,x\n")
        with pytest.raises(DataError, match="row 1"):
            load_csv(path, task="regression")

    def test_unknown_label_column(self, tmp_path):
        path = _write(tmp_path, "a,b\n1,x\n")
        with pytest.raises(DataError, match="label column"):
            load_csv(path, label_column="nope")
        with pytest.raises(DataError):
            load_csv(path, label_column=5)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "missing.csv")

    def test_load_features(self, tmp_path):
        path = _write(tmp_path, "a,b\n1,2\n3,4\n")
        assert_array_equal(load_features(path), [[1, 2], [3, 4]])


class TestTargets:

    def test_one_hot_rows_sum_to_one(self):
        y, classes = one_hot(["c", "a", "b", "a"])
        assert classes == ["a", "b", "c"]
        assert_array_equal(y.sum(axis=1), np.ones(4))

    def test_unknown_label(self):
        with pytest.raises(DataError):
            one_hot(["a", "z"], classes=["a", "b"])

    def test_signed_targets(self):
        y, classes = signed_targets(["yes", "no", "yes"])
        assert classes == ["no", "yes"]
        assert_array_equal(y.ravel(), [1, -1, 1])


class TestDataset:

    def test_row_mismatch(self):
        with pytest.raises(DataError):
            Dataset(x=np.zeros((3, 2)), y=np.zeros((2, 1)))

    def test_privileged_row_mismatch(self):
        with pytest.raises(DataError):
            Dataset(x=np.zeros((3, 2)), y=np.zeros((3, 1)), x_priv=np.zeros((2, 2)))

    def test_arrays_are_read_only(self):
        d = Dataset(x=np.zeros((2, 2)), y=np.zeros((2, 1)), task="regression")
        with pytest.raises(ValueError):
            d.x[0, 0] = 1.0


class TestNormalizeL1:

    def _one_column(self, values):
        d = Dataset(x=np.array(values, dtype=float).reshape(-1, 1),
                    y=np.zeros((len(values), 1)), task="regression")
        return normalize_l1(d).x.ravel()

    def test_examples(self):
        assert_allclose(self._one_column([1, 3]), [0.25, 0.75])
        assert_array_equal(self._one_column([0, 0]), [0, 0])
        assert_allclose(self._one_column([-1, 1]), [-0.5, 0.5])

    def test_privileged_normalized_and_y_unchanged(self):
        d = Dataset(x=[[1.0], [3.0]], x_priv=[[2.0], [2.0]], y=[[5.0], [6.0]],
                    task="regression")
        out = normalize_l1(d)
        assert_allclose(out.x_priv, [[0.5], [0.5]])
        assert_array_equal(out.y, d.y)

    def test_train_scale_applied_to_test(self):
        scale = fit_l1_scale(np.array([[1.0, 0.0], [3.0, 0.0]]))
        assert_array_equal(scale, [4.0, 1.0])
        assert_allclose(apply_l1_scale(np.array([[8.0, 2.0]]), scale), [[2.0, 2.0]])

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 5)), elements=finite))
    def test_idempotent(self, x):
        d = Dataset(x=x, y=np.zeros((x.shape[0], 1)), task="regression")
        once = normalize_l1(d)
        twice = normalize_l1(once)
        assert_allclose(twice.x, once.x, rtol=0, atol=1e-12)
        sums = np.abs(once.x).sum(axis=0)
        nonzero = np.abs(x).sum(axis=0) > 0
        assert_allclose(sums[nonzero], 1.0, atol=1e-12)


class TestSplitPrivileged:

    def _dataset(self, n_attr, rows=4):
        x = np.arange(rows * n_attr, dtype=float).reshape(rows, n_attr)
        return Dataset(x=x, y=np.zeros((rows, 1)), task="regression")

    @pytest.mark.parametrize("n_attr, normal, d_priv", [(9, 5, 4), (4, 2, 2), (2, 1, 1)])
    def test_widths(self, n_attr, normal, d_priv):
        out = split_privileged(self._dataset(n_attr), normal)
        assert out.n_features == normal
        assert out.n_privileged == d_priv

    def test_default_gives_extra_column_to_normal_side(self):
        assert split_privileged(self._dataset(13)).n_features == 7

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 10), st.data())
    def test_concat_round_trip(self, n_attr, data):
        normal = data.draw(st.integers(1, n_attr - 1))
        d = self._dataset(n_attr)
        assert_array_equal(concat_features(split_privileged(d, normal)), d.x)

    @pytest.mark.parametrize("normal", [0, 4, 7])
    def test_out_of_range(self, normal):
        with pytest.raises(DataError):
            split_privileged(self._dataset(4), normal)

    def test_already_split(self):
        with pytest.raises(DataError):
            split_privileged(split_privileged(self._dataset(4), 2), 1)


class TestWhiteNoise:

    def _zeros(self):
        return Dataset(x=np.zeros((200, 100)), x_priv=np.ones((200, 2)),
                       y=np.zeros((200, 1)), task="regression")

    @pytest.mark.parametrize("dbw, variance", [(10.0, 10.0), (0.0, 1.0)])
    def test_variance(self, dbw, variance):
        noisy = add_white_noise(self._zeros(), dbw, seed=3)
        assert abs(noisy.x.var() - variance) < 0.05 * variance

    def test_deterministic_and_side_arrays_untouched(self):
        d = self._zeros()
        a = add_white_noise(d, 10.0, seed=1)
        b = add_white_noise(d, 10.0, seed=1)
        assert_array_equal(a.x, b.x)
        assert_array_equal(a.x_priv, d.x_priv)
        assert_array_equal(a.y, d.y)

    def test_vanishing_power(self, rng):
        d = Dataset(x=rng.normal(size=(20, 3)), y=np.zeros((20, 1)), task="regression")
        assert_allclose(add_white_noise(d, -300.0, seed=0).x, d.x, rtol=0, atol=1e-12)

    def test_non_finite_power(self):
        with pytest.raises(DataError):
            add_white_noise(self._zeros(), float("nan"))


class TestFolds:

    def test_even_split(self):
        assert_array_equal(make_folds(10, 5, seed=0).sizes(), [2, 2, 2, 2, 2])

    def test_near_even_split(self):
        assert sorted(make_folds(7, 2, seed=0).sizes()) == [3, 4]

    def test_deterministic(self):
        assert_array_equal(make_folds(50, 5, seed=9).assignments,
                           make_folds(50, 5, seed=9).assignments)

    @pytest.mark.parametrize("k", [1, 11])
    def test_k_out_of_range(self, k):
        with pytest.raises(DataError):
            make_folds(10, k)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 200), st.data(), st.integers(0, 2 ** 16))
    def test_fold_accounting(self, n_rows, data, seed):
        k = data.draw(st.integers(2, n_rows))
        plan = make_folds(n_rows, k, seed)
        sizes = plan.sizes()
        assert sizes.sum() == n_rows
        assert sizes.max() - sizes.min() <= 1
        tested = np.concatenate([plan.split(f)[1] for f in range(k)])
        assert_array_equal(np.sort(tested), np.arange(n_rows))

    def test_holdout_partition(self):
        train_idx, val_idx = make_holdout(10, 0.3, seed=0)
        assert len(val_idx) == 3
        assert_array_equal(np.sort(np.concatenate([train_idx, val_idx])), np.arange(10))


class TestSyntheticLupi:

    def test_privileged_is_clean_signal(self):
        d = make_synthetic_lupi(n_rows=100, noise_std=0.0, seed=2)
        assert_allclose(d.x, d.x_priv)
        assert_array_equal(d.y.sum(axis=1), np.ones(100))

    @pytest.mark.parametrize("task, m", [("binary", 1), ("multiclass", 3), ("regression", 1)])
    def test_tasks(self, task, m):
        d = make_synthetic_lupi(n_rows=30, task=task, seed=0)
        assert d.n_outputs == m
        assert d.task == task

    def test_take_rows_keeps_privileged(self):
        d = make_synthetic_lupi(n_rows=20, seed=0)
        part = take_rows(d, [0, 5])
        assert_array_equal(part.x_priv, d.x_priv[[0, 5]])
