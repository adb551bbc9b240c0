"""Tests for poisoning points, the attack engine and lambda selection."""

from __future__ import annotations

import math
from itertools import combinations
from typing import Sequence

import numpy as np
import pytest

from hyperpoison.attack import (
    PoisonSet,
    StepEvent,
    attack_step,
    cross_validate_lambda,
    grid_search_lambda,
    init_poison,
    poison_counts,
    project,
    run_attack,
    run_hyperlearn,
)
from hyperpoison.attack.selection import stratified_folds
from hyperpoison.core.config import AttackConfig
from hyperpoison.core.exceptions import ConfigError, NumericalError
from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.hypergrad import Hypergrad
from hyperpoison.models import ModelSpec, ParamVector, RegSpec, network
from hyperpoison.numerics import linalg

ORIGIN = Dataset(np.zeros((1, 1)), np.zeros(1))


def _point(x: float) -> Dataset:
    return Dataset(np.array([[x]]), np.zeros(1))


def _zero_hypergrad(
    spec: ModelSpec,
    train_poisoned: Dataset,
    poison_rows: Sequence[int] | np.ndarray,
    reg: RegSpec,
    val: Dataset,
    w0: ParamVector,
    eta: float,
    T: int,
    include_reg_outer: bool = False,
) -> tuple[Hypergrad, ParamVector]:
    rows = np.asarray(poison_rows)
    hg = Hypergrad(np.zeros((rows.size, train_poisoned.m)), np.zeros(reg.h), "zero", T)
    return hg, w0


def _nan_hypergrad(*args: object, **kwargs: object) -> tuple[Hypergrad, ParamVector]:
    hg, w0 = _zero_hypergrad(*args, **kwargs)  # type: ignore[arg-type]
    return Hypergrad(hg.d_poison + np.nan, hg.d_lambda, "nan", 0), w0


@pytest.fixture
def clean() -> Dataset:
    gen = RngStream(21, "attack/clean").generator
    return Dataset(gen.uniform(-1.0, 1.0, (100, 3)), np.arange(100) % 2, -1.0, 1.0)


@pytest.fixture
def small_attack() -> AttackConfig:
    return AttackConfig(
        T_mul=2,
        alpha=0.4,
        T=5,
        eta=0.3,
        poison_batch=5,
        fraction_schedule=[0.0, 0.1, 0.2],
        learn_lambda=False,
        seed=3,
    )


class TestPoisonSet:
    def test_init_flips_labels_and_clones_rows(self, train_set: Dataset) -> None:
        poison = init_poison(train_set, 4, RngStream(0, "init"))
        assert poison.n_p == 4
        assert len(set(poison.indices.tolist())) == 4
        np.testing.assert_array_equal(poison.Xp, train_set.X[poison.indices])
        np.testing.assert_array_equal(poison.yp, 1.0 - train_set.y[poison.indices])

    def test_zero_poisons(self, train_set: Dataset) -> None:
        poison = init_poison(train_set, 0, RngStream(0, "init"))
        assert poison.n_p == 0
        assert poison.apply(train_set) is train_set

    def test_too_many_poisons(self, train_set: Dataset) -> None:
        with pytest.raises(ValueError):
            init_poison(train_set, 21, RngStream(0, "init"))

    def test_excluded_rows_never_drawn(self, train_set: Dataset) -> None:
        banned = np.arange(15)
        poison = init_poison(train_set, 5, RngStream(0, "init"), exclude=banned)
        assert sorted(poison.indices.tolist()) == [15, 16, 17, 18, 19]

    def test_draws_cover_every_subset(self) -> None:
        data = Dataset(np.arange(10.0)[:, None], np.zeros(10))
        stream = RngStream(0, "uniformity")
        seen = {
            tuple(sorted(init_poison(data, 3, stream.derive(f"t{i}")).indices.tolist()))
            for i in range(3000)
        }
        assert seen == set(combinations(range(10), 3))

    def test_with_features_projects(self, train_set: Dataset) -> None:
        poison = init_poison(train_set, 2, RngStream(1, "init"))
        moved = poison.with_features(np.full((2, 3), 5.0))
        np.testing.assert_array_equal(moved.Xp, np.ones((2, 3)))
        np.testing.assert_array_equal(moved.yp, poison.yp)

    def test_apply_replaces_rows_and_labels(self, train_set: Dataset) -> None:
        poison = init_poison(train_set, 3, RngStream(2, "init")).with_features(np.zeros((3, 3)))
        out = poison.apply(train_set)
        np.testing.assert_array_equal(out.X[poison.indices], np.zeros((3, 3)))
        np.testing.assert_array_equal(out.y[poison.indices], poison.yp)
        untouched = np.setdiff1d(np.arange(20), poison.indices)
        np.testing.assert_array_equal(out.X[untouched], train_set.X[untouched])

    def test_project_is_idempotent(self) -> None:
        x = np.array([[-3.0, 0.2, 4.0]])
        once = project(x, -1.0, 1.0)
        np.testing.assert_array_equal(once, [[-1.0, 0.2, 1.0]])
        np.testing.assert_array_equal(project(once, -1.0, 1.0), once)

    def test_duplicate_indices_rejected(self) -> None:
        with pytest.raises(ValueError):
            PoisonSet(np.zeros((2, 1)), np.zeros(2), np.array([1, 1]), np.zeros(1), np.ones(1))


class TestAttackStep:
    def _toy(self, lo: float = -math.inf, hi: float = math.inf) -> tuple[Dataset, PoisonSet]:
        train = _point(2.0)
        poison = PoisonSet(
            np.array([[2.0]]), np.array([1.0]), np.array([0]), np.array([lo]), np.array([hi])
        )
        return poison.apply(train), poison

    def test_ascent_step(self, toy_spec: ModelSpec) -> None:
        train, poison = self._toy()
        config = AttackConfig(alpha=0.4, eta=0.5, T=1, normalize_xp_grad=False)
        out = attack_step(
            toy_spec, train, poison, RegSpec(), ORIGIN, config, ParamVector.zeros(toy_spec)
        )
        assert out.poison.Xp[0, 0] == pytest.approx(2.2)
        assert out.train.X[0, 0] == pytest.approx(2.2)
        assert out.info.val_loss == pytest.approx(0.5)
        assert out.info.grad_norm_x == pytest.approx(0.5)
        assert not out.info.normalized

    def test_normalized_step(self, toy_spec: ModelSpec) -> None:
        train, poison = self._toy()
        config = AttackConfig(alpha=0.4, eta=0.5, T=1)
        out = attack_step(
            toy_spec, train, poison, RegSpec(), ORIGIN, config, ParamVector.zeros(toy_spec)
        )
        assert out.poison.Xp[0, 0] == pytest.approx(2.4)
        assert out.info.normalized

    def test_step_stays_in_box(self, toy_spec: ModelSpec) -> None:
        train, poison = self._toy(lo=-1.0, hi=2.1)
        config = AttackConfig(alpha=0.4, eta=0.5, T=1)
        out = attack_step(
            toy_spec, train, poison, RegSpec(), ORIGIN, config, ParamVector.zeros(toy_spec)
        )
        assert out.poison.Xp[0, 0] == pytest.approx(2.1)

    def test_zero_hypergradient_changes_nothing(self, toy_spec: ModelSpec) -> None:
        train, poison = self._toy()
        reg = RegSpec(norm="l2", lambdas=(0.7,))
        out = attack_step(
            toy_spec,
            train,
            poison,
            reg,
            ORIGIN,
            AttackConfig(),
            ParamVector.zeros(toy_spec),
            hypergrad_fn=_zero_hypergrad,
        )
        np.testing.assert_array_equal(out.poison.Xp, poison.Xp)
        assert out.reg.lambdas == (0.7,)
        assert not out.info.normalized

    @pytest.mark.parametrize("sign_update, expected", [(True, 0.4), (False, 0.1)])
    def test_lambda_descent(self, toy_spec: ModelSpec, sign_update: bool, expected: float) -> None:
        train = _point(1.0)
        reg = RegSpec(norm="l2", lambdas=(math.log(0.5),))
        config = AttackConfig(alpha=0.4, eta=1.0, T=2, lambda_sign_update=sign_update)
        out = attack_step(
            toy_spec,
            train,
            PoisonSet.empty(train),
            reg,
            ORIGIN,
            config,
            ParamVector.zeros(toy_spec),
        )
        assert out.reg.lambdas[0] == pytest.approx(math.log(0.5) + expected)

    def test_lambda_held_fixed(self, toy_spec: ModelSpec) -> None:
        train = _point(1.0)
        reg = RegSpec(norm="l2", lambdas=(math.log(0.5),))
        out = attack_step(
            toy_spec,
            train,
            PoisonSet.empty(train),
            reg,
            ORIGIN,
            AttackConfig(eta=1.0, T=2),
            ParamVector.zeros(toy_spec),
            learn_lambda=False,
        )
        assert out.reg == reg

    def test_lambda_bounds(self, toy_spec: ModelSpec) -> None:
        train = _point(1.0)
        reg = RegSpec(norm="l2", lambdas=(math.log(0.5),))
        config = AttackConfig(eta=1.0, T=2, lambda_bounds=(None, math.log(0.5) + 0.1))
        empty = PoisonSet.empty(train)
        w0 = ParamVector.zeros(toy_spec)
        out = attack_step(toy_spec, train, empty, reg, ORIGIN, config, w0)
        assert out.reg.lambdas[0] == pytest.approx(math.log(0.5) + 0.1)

    def test_non_finite_hypergradient(self, toy_spec: ModelSpec) -> None:
        train, poison = self._toy()
        with pytest.raises(NumericalError):
            attack_step(
                toy_spec,
                train,
                poison,
                RegSpec(),
                ORIGIN,
                AttackConfig(),
                ParamVector.zeros(toy_spec),
                hypergrad_fn=_nan_hypergrad,
            )


class TestRunAttack:
    def test_bookkeeping(
        self, lr_spec: ModelSpec, clean: Dataset, val_set: Dataset, small_attack: AttackConfig
    ) -> None:
        events: list[StepEvent] = []
        result = run_attack(
            clean, val_set, lr_spec, RegSpec(), small_attack, callback=events.append
        )
        assert [fr.n_poison for fr in result.fractions] == [0, 10, 20]
        assert [len(fr.batches) for fr in result.fractions] == [0, 2, 2]
        assert len(events) == 4 * small_attack.T_mul

        idx = result.poison_indices
        assert idx.size == 20 and np.unique(idx).size == 20
        poisoned = result.poisoned
        rest = np.setdiff1d(np.arange(clean.n), idx)
        np.testing.assert_array_equal(poisoned.X[rest], clean.X[rest])
        np.testing.assert_array_equal(poisoned.y[rest], clean.y[rest])
        np.testing.assert_array_equal(poisoned.y[idx], 1.0 - clean.y[idx])
        assert np.all(poisoned.X >= -1.0) and np.all(poisoned.X <= 1.0)

    def test_earlier_batches_stay_frozen(
        self, lr_spec: ModelSpec, clean: Dataset, val_set: Dataset, small_attack: AttackConfig
    ) -> None:
        result = run_attack(clean, val_set, lr_spec, RegSpec(), small_attack)
        first = result.fractions[1].poisoned
        last = result.fractions[2].poisoned
        frozen = np.concatenate([p.indices for p in result.fractions[1].batches])
        np.testing.assert_array_equal(last.X[frozen], first.X[frozen])

    def test_deterministic(
        self, lr_spec: ModelSpec, clean: Dataset, val_set: Dataset, small_attack: AttackConfig
    ) -> None:
        a = run_attack(clean, val_set, lr_spec, RegSpec(), small_attack)
        b = run_attack(clean, val_set, lr_spec, RegSpec(), small_attack)
        np.testing.assert_array_equal(a.poisoned.X, b.poisoned.X)
        np.testing.assert_array_equal(a.poison_indices, b.poison_indices)

    def test_sequential_reduction_by_default(
        self,
        mlp_spec: ModelSpec,
        clean: Dataset,
        val_set: Dataset,
        small_attack: AttackConfig,
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        seen: set[str] = set()

        def recording_matmul(
            a: np.ndarray, b: np.ndarray, reduction: str = "sequential"
        ) -> np.ndarray:
            seen.add(reduction)
            return linalg.matmul(a, b, reduction)  # type: ignore[arg-type]

        monkeypatch.setattr(network, "matmul", recording_matmul)
        run_attack(clean, val_set, mlp_spec, RegSpec(), small_attack)
        assert seen == {"sequential"}

    def test_identical_across_blas_thread_counts(
        self, mlp_spec: ModelSpec, clean: Dataset, val_set: Dataset, small_attack: AttackConfig
    ) -> None:
        threadpoolctl = pytest.importorskip("threadpoolctl")
        reg = RegSpec(norm="l2", lambdas=(-1.0,))
        config = small_attack.model_copy(update={"learn_lambda": True})
        runs = []
        for threads in (1, 4):
            with threadpoolctl.threadpool_limits(limits=threads, user_api="blas"):
                runs.append(run_attack(clean, val_set, mlp_spec, reg, config))
        first, second = runs
        np.testing.assert_array_equal(first.poisoned.X, second.poisoned.X)
        assert [fr.lambdas for fr in first.fractions] == [fr.lambdas for fr in second.fractions]
        assert [fr.val_loss for fr in first.fractions] == [fr.val_loss for fr in second.fractions]

    def test_clean_only_schedule(
        self, lr_spec: ModelSpec, clean: Dataset, val_set: Dataset
    ) -> None:
        result = run_attack(clean, val_set, lr_spec, RegSpec(), AttackConfig(T_mul=1, T=3))
        assert len(result.fractions) == 1
        assert result.poisoned is clean
        assert result.poison_indices.size == 0

    def test_batch_must_divide_increment(
        self, lr_spec: ModelSpec, clean: Dataset, val_set: Dataset, small_attack: AttackConfig
    ) -> None:
        config = small_attack.model_copy(update={"poison_batch": 3})
        with pytest.raises(ConfigError) as exc:
            run_attack(clean, val_set, lr_spec, RegSpec(), config)
        assert exc.value.key == "attack.poison_batch"

    def test_lambda_learned_on_clean_data(
        self, lr_spec: ModelSpec, clean: Dataset, val_set: Dataset, small_attack: AttackConfig
    ) -> None:
        config = small_attack.model_copy(update={"learn_lambda": True})
        template = RegSpec(norm="l2", lambdas=(0.0,))
        result = run_attack(clean, val_set, lr_spec, template, config)
        zero = result.fractions[0]
        assert len(zero.val_loss) == config.T_mul + 1
        learned = run_hyperlearn(
            clean,
            val_set,
            lr_spec,
            template,
            config,
            rng=RngStream(config.seed, "attack").derive("clean"),
        )
        assert zero.lambdas == learned.lambdas
        for fr in result.fractions[1:]:
            assert abs(fr.lambdas[0]) <= config.alpha * config.T_mul + 1e-12

    def test_poison_counts(self) -> None:
        assert poison_counts(5000, [0.0, 0.07, 0.14]) == [0, 350, 700]


class TestHyperlearn:
    def test_needs_regularizer(
        self, lr_spec: ModelSpec, train_set: Dataset, val_set: Dataset
    ) -> None:
        with pytest.raises(ConfigError):
            run_hyperlearn(train_set, val_set, lr_spec, RegSpec(), AttackConfig(T_mul=1))

    def test_toy_lambda_moves_against_gradient(self, toy_spec: ModelSpec) -> None:
        config = AttackConfig(T_mul=1, alpha=0.4, eta=1.0, T=2, lambda_init=math.log(0.5))
        result = run_hyperlearn(
            _point(1.0), ORIGIN, toy_spec, RegSpec(norm="l2", lambdas=(0.0,)), config
        )
        assert result.lambda_trajectory[0][0] == pytest.approx(math.log(0.5))
        assert result.lambda_trajectory[1][0] == pytest.approx(math.log(0.5) + 0.4)
        assert len(result.val_loss) == 2
        # w(T) = 1 - e^lambda, A = w^2 / 2
        assert result.val_loss[0] == pytest.approx(0.125)

    def test_zero_hypergradient_is_flat(
        self, lr_spec: ModelSpec, train_set: Dataset, val_set: Dataset, l2_reg: RegSpec
    ) -> None:
        config = AttackConfig(T_mul=3, T=4, lambda_init=-1.5)
        result = run_hyperlearn(
            train_set, val_set, lr_spec, l2_reg, config, hypergrad_fn=_zero_hypergrad
        )
        assert result.lambdas == (-1.5,)
        assert all(lam == (-1.5,) for lam in result.lambda_trajectory)
        assert len(result.lambda_trajectory) == 4


class TestSelection:
    def test_grid_search_finds_toy_optimum(self, toy_spec: ModelSpec) -> None:
        reg = RegSpec(norm="l2", lambdas=(0.0,))
        grid = np.linspace(-1.0, 1.0, 21)
        result = grid_search_lambda(_point(1.0), ORIGIN, toy_spec, reg, grid, 1.0, 2)
        assert result.best_lambda == pytest.approx(0.0, abs=1e-12)
        assert len(result.table) == 21

    def test_single_value_grid(
        self, lr_spec: ModelSpec, train_set: Dataset, val_set: Dataset
    ) -> None:
        reg = RegSpec(norm="l2", lambdas=(0.0,))
        result = grid_search_lambda(train_set, val_set, lr_spec, reg, [2.5], 0.2, 5)
        assert result.best_lambda == 2.5

    def test_ties_go_to_smaller_lambda(self, toy_spec: ModelSpec) -> None:
        reg = RegSpec(norm="l2", lambdas=(0.0,))
        result = grid_search_lambda(
            _point(1.0), ORIGIN, toy_spec, reg, [1.0, 0.0, -1.0], 1.0, 2, criterion="error"
        )
        assert result.best_lambda == -1.0

    def test_needs_regularizer(
        self, lr_spec: ModelSpec, train_set: Dataset, val_set: Dataset
    ) -> None:
        with pytest.raises(ValueError):
            grid_search_lambda(train_set, val_set, lr_spec, RegSpec(), [0.0], 0.2, 5)

    def test_stratified_folds(self, train_set: Dataset) -> None:
        folds = stratified_folds(train_set.y, 5, RngStream(0, "folds"))
        joined = np.sort(np.concatenate(folds))
        np.testing.assert_array_equal(joined, np.arange(20))
        for fold in folds:
            assert fold.size == 4
            assert train_set.y[fold].sum() == 2

    def test_cross_validation(self, lr_spec: ModelSpec, train_set: Dataset) -> None:
        reg = RegSpec(norm="l2", lambdas=(0.0,))
        result = cross_validate_lambda(train_set, lr_spec, reg, [-2.0, 0.0], 0.2, 10, folds=4)
        assert result.best_lambda in (-2.0, 0.0)
        assert list(result.table["lambda"]) == [-2.0, 0.0]
        again = cross_validate_lambda(train_set, lr_spec, reg, [-2.0, 0.0], 0.2, 10, folds=4)
        assert again.table.equals(result.table)

    def test_too_many_folds(self, lr_spec: ModelSpec, train_set: Dataset) -> None:
        reg = RegSpec(norm="l2", lambdas=(0.0,))
        with pytest.raises(ValueError):
            cross_validate_lambda(train_set, lr_spec, reg, [0.0], 0.2, 5, folds=21)
