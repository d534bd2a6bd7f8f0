# tests/test_experiments.py

from dataclasses import replace

import numpy as np
import pytest

from config import resolve_run_config
from data_loader import (
    drop_privileged, make_folds, make_synthetic_lupi, normalize_l1, take_rows,
)
from errors import ConfigError, DataError
from experiments import (
    LearnerConfig, RunReport, SearchSpace, ValidationSpec, draw_configs, evaluate_config,
    evaluate_split, fit_learner, format_table, prepare_split, random_search, reports_to_frame,
    run_cv, run_noise_experiment, run_trials, select_activation, sensitivity_grid, trial_seeds,
)


@pytest.fixture
def lupi_data():
    return make_synthetic_lupi(60, n_signal=3, n_classes=3, noise_std=0.3, seed=1)


SMALL = LearnerConfig(kind="rvfl-plus", P=10, C=10.0, gamma=100.0, u=1.0)


class TestLearnerConfig:

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            LearnerConfig(kind="svm-plus")

    def test_from_run_config_krvfl_gamma(self):
        cfg = LearnerConfig.from_run_config(resolve_run_config({"learner": "krvfl-plus"}))
        assert cfg.kind == "krvfl-plus"
        assert cfg.gamma == 5000.0

    def test_privileged_learner_needs_privileged_data(self, lupi_data):
        with pytest.raises(DataError):
            fit_learner(SMALL, drop_privileged(lupi_data))

    def test_plain_learner_ignores_privileged(self, lupi_data):
        cfg = replace(SMALL, kind="rvfl-ridge")
        a = fit_learner(cfg, lupi_data)
        b = fit_learner(cfg, drop_privileged(lupi_data))
        np.testing.assert_array_equal(a.w, b.w)


class TestSplits:

    def test_prepare_split_fits_on_train(self, lupi_data):
        train = take_rows(lupi_data, np.arange(40))
        test = take_rows(lupi_data, np.arange(40, 60))
        scaled_train, scaled_test = prepare_split(train, test)
        np.testing.assert_allclose(np.abs(scaled_train.x).sum(axis=0), 1.0)
        np.testing.assert_allclose(scaled_test.x * np.abs(train.x).sum(axis=0), test.x)

    def test_prepare_split_rejects_unknown_mode(self, lupi_data):
        with pytest.raises(ConfigError):
            prepare_split(lupi_data, lupi_data, normalize="zscore")

    def test_test_side_privileged_features_are_never_read(self, lupi_data):
        train = take_rows(lupi_data, np.arange(40))
        test = take_rows(lupi_data, np.arange(40, 60))
        poisoned = replace(test, x_priv=np.full_like(test.x_priv, np.nan))
        a, _ = evaluate_split(SMALL, train, test)
        b, _ = evaluate_split(SMALL, train, poisoned)
        assert a == b


class TestCrossValidation:

    def test_one_trial_per_fold(self, lupi_data):
        report = run_cv(lupi_data, SMALL, make_folds(60, 5, seed=0), name="synthetic")
        assert len(report.trials) == 5
        assert sum(t["n_test"] for t in report.trials) == 60
        assert all(0.0 <= v <= 100.0 for v in report.values)

    def test_deterministic(self, lupi_data):
        folds = make_folds(60, 4, seed=2)
        assert run_cv(lupi_data, SMALL, folds).values == run_cv(lupi_data, SMALL, folds).values

    def test_fold_plan_mismatch(self, lupi_data):
        with pytest.raises(DataError):
            run_cv(lupi_data, SMALL, make_folds(30, 3))

    def test_trial_seeds(self):
        seeds = trial_seeds(0, 5)
        assert seeds == trial_seeds(0, 5)
        assert len(set(seeds)) == 5
        assert seeds != trial_seeds(1, 5)

    def test_run_trials(self, lupi_data):
        report = run_trials(lupi_data, SMALL, [3, 4], k=3)
        assert report.seeds == [3, 4]
        assert len(report.values) == 2
        assert np.isclose(report.mean, np.mean(report.values))


class TestNoiseExperiment:

    def test_reports_per_learner(self, lupi_data):
        clean = drop_privileged(lupi_data)
        learners = [replace(SMALL, kind="rvfl-ridge"), SMALL, SMALL]
        reports = run_noise_experiment(clean, 0.0, learners, seeds=[0], k=3, name="syn")
        assert list(reports) == ["rvfl-ridge", "rvfl-plus", "rvfl-plus'"]
        for report in reports.values():
            assert report.noise_dbw == 0.0
            assert len(report.trials) == 1

    def test_rejects_privileged_dataset(self, lupi_data):
        with pytest.raises(DataError):
            run_noise_experiment(lupi_data, 10.0, [SMALL], seeds=[0], k=3)

    def test_negligible_noise_matches_clean_trials(self, lupi_data):
        clean = drop_privileged(lupi_data)
        ridge = replace(SMALL, kind="rvfl-ridge")
        seeds = [0, 5]
        reports = run_noise_experiment(clean, -300.0, [ridge, SMALL], seeds=seeds, k=3)

        plain = run_trials(clean, ridge, seeds, k=3)
        lupi = run_trials(replace(clean, x_priv=clean.x), SMALL, seeds, k=3)
        assert reports["rvfl-ridge"].values == pytest.approx(plain.values, abs=1e-9)
        assert reports["rvfl-plus"].values == pytest.approx(lupi.values, abs=1e-9)


class TestReports:

    def _report(self):
        report = RunReport(learner="rvfl-plus", dataset="iris", metric="accuracy",
                           config=SMALL.as_dict())
        report.add_trial(trial=0, seed=7, metric=90.0, time_s=0.5)
        report.add_trial(trial=1, seed=7, metric=94.0, time_s=0.25)
        return report

    def test_summary(self):
        row = self._report().summary()
        assert row["mean"] == 92.0
        assert row["std"] == 2.0
        assert row["time_s"] == 0.75
        assert row["seed"] == 7
        assert len(row["config_hash"]) == 12

    def test_frame_and_table(self):
        frame = reports_to_frame([self._report()])
        assert list(frame["learner"]) == ["rvfl-plus"]
        table = format_table([self._report()])
        assert "Acc." in table
        assert "92.00 ± 2.00" in table


class TestSearch:

    def test_exhaustive_grid(self):
        space = SearchSpace(kind="rvfl-ridge", C=[1.0, 2.0], u=[1.0, 4.0],
                            activation=["sigmoid", "sine"], budget=8)
        draws = draw_configs(space)
        assert len(draws) == 8
        assert len({tuple(sorted(d.items())) for d in draws}) == 8

    def test_random_draws_within_range(self):
        space = SearchSpace(kind="rvfl-plus", C=(1e-2, 1e2), gamma=(1.0, 1.0), budget=50)
        draws = draw_configs(space, seed=4)
        assert len(draws) == 50
        assert all(1e-2 <= d["C"] <= 1e2 for d in draws)
        assert all(d["gamma"] == 1.0 for d in draws)
        assert draws == draw_configs(space, seed=4)

    def test_pinv_has_no_regularization_axis(self):
        assert "C" not in SearchSpace(kind="rvfl-pinv").dimensions()
        assert SearchSpace(kind="krvfl-plus").dimensions() == ["C", "gamma", "tau"]

    @pytest.mark.parametrize("kwargs", [
        {"C": (10.0, 1.0)}, {"u": []}, {"activation": "sigmoid"}, {"budget": 0},
    ])
    def test_invalid_space(self, kwargs):
        with pytest.raises(ConfigError):
            SearchSpace(**kwargs)

    def test_random_search_keeps_first_best(self, lupi_data):
        space = SearchSpace(kind="rvfl-plus", C=(0.1, 10.0), gamma=[10.0, 100.0],
                            u=[1.0], P=10, budget=4)
        best, report = random_search(lupi_data, space,
                                     ValidationSpec(kind="holdout", seed=0), seed=1)
        values = report.values
        first = int(np.argmax(values))
        assert len(values) == 4
        assert best.C == report.trials[first]["C"]
        assert best.gamma == report.trials[first]["gamma"]
        assert best.P == 10

    def test_grid_search_finds_best_of_full_grid(self, lupi_data):
        space = SearchSpace(kind="rvfl-plus", C=[1e-3, 1.0, 1e3], gamma=[1000.0],
                            u=[1.0], P=10, budget=5)
        validation = ValidationSpec(kind="holdout", seed=3)
        best, report = random_search(lupi_data, space, validation)

        grid = [1e-3, 1.0, 1e3]
        assert [t["C"] for t in report.trials] == grid
        base = LearnerConfig(kind="rvfl-plus", gamma=1000.0, u=1.0, P=10)
        scores = [evaluate_config(lupi_data, replace(base, C=c), validation) for c in grid]
        assert report.values == scores
        assert best.C == grid[int(np.argmax(scores))]
        assert best.gamma == 1000.0

    def test_joint_normalization_in_holdout(self):
        data = make_synthetic_lupi(80, n_signal=3, noise_std=0.3, task="regression", seed=2)
        data = drop_privileged(replace(data, x=data.x * 1000.0))
        ridge = LearnerConfig(kind="rvfl-ridge", C=10.0, P=10, u=1.0)
        validation = ValidationSpec(kind="holdout", seed=0)

        joint = evaluate_config(data, ridge, validation, normalize="joint")
        scaled = evaluate_config(normalize_l1(data), ridge, validation, normalize="none")
        raw = evaluate_config(data, ridge, validation, normalize="none")
        assert joint == scaled
        assert joint != raw

    def test_select_activation(self, lupi_data):
        best, scores = select_activation(lupi_data, SMALL, ValidationSpec(kind="holdout"),
                                         activations=["sigmoid", "sine"])
        assert best in ("sigmoid", "sine")
        assert list(scores["activation"]) == ["sigmoid", "sine"]

    def test_sensitivity_grid_shape(self, lupi_data):
        table = sensitivity_grid(lupi_data, SMALL, ("C", [1.0, 10.0]), ("gamma", [10.0, 100.0, 1000.0]),
                                 ValidationSpec(kind="holdout"))
        assert table.shape == (2, 3)
        assert table.index.name == "C"
        assert not table.isna().any().any()

    def test_budget_one_returns_the_draw(self, lupi_data):
        space = SearchSpace(kind="rvfl-ridge", C=(0.5, 50.0), u=[1.0], P=10, budget=1)
        best, report = random_search(lupi_data, space, ValidationSpec(kind="holdout"), seed=9)
        assert len(report.trials) == 1
        assert best.C == report.trials[0]["C"]

    def test_point_space_returns_the_point(self, lupi_data):
        space = SearchSpace(kind="rvfl-plus", C=(2.0, 2.0), gamma=[300.0], u=[0.5],
                            activation=["sine"], P=10, budget=3)
        best, _ = random_search(lupi_data, space, ValidationSpec(kind="holdout"))
        assert (best.C, best.gamma, best.u, best.activation) == (2.0, 300.0, 0.5, "sine")
