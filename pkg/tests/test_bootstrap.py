"""
Тесты для bootstrap
"""
import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.errors import DegenerateInputError, DomainError, InsufficientReplicatesError
from src.inference.bootstrap import (
    BootstrapEnsemble,
    accept_reject,
    bootstrap_p_value,
    bootstrap_rstar,
    interval,
    meboot_replicate,
    write_ensemble_csv,
)


def _ar1(n: int, phi: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    series = np.empty(n)
    series[0] = rng.standard_normal()
    for t in range(1, n):
        series[t] = phi * series[t - 1] + rng.standard_normal()
    return series


def _lag1(series: np.ndarray) -> float:
    return float(np.corrcoef(series[:-1], series[1:])[0, 1])


@pytest.fixture
def uniform_ensemble() -> BootstrapEnsemble:
    """999 значений 0.001, ..., 0.999 в перемешанном порядке"""
    values = np.arange(1, 1000) / 1000
    return BootstrapEnsemble(np.random.default_rng(3).permutation(values))


@settings(max_examples=50, deadline=None)
@given(
    series=arrays(
        np.int64,
        st.integers(min_value=4, max_value=60),
        elements=st.integers(min_value=-1000, max_value=1000),
        unique=True,
    ).map(lambda a: a.astype(float)),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_replicate_preserves_ranks(series, seed):
    """Ранги реплики совпадают с рангами исходного ряда"""
    replicate = meboot_replicate(series, seed)
    assert replicate.shape == series.shape
    np.testing.assert_array_equal(np.argsort(replicate, kind="stable"), np.argsort(series))


def test_replicate_near_constant_series(rng):
    """Почти константный ряд: ранги сохраняются"""
    series = 5.0 + 1e-6 * rng.standard_normal(50)
    replicate = meboot_replicate(series, 42)
    np.testing.assert_array_equal(np.argsort(replicate), np.argsort(series))


def test_replicate_deterministic(rng):
    """Одинаковый seed - одинаковая реплика"""
    series = rng.standard_normal(30)
    np.testing.assert_array_equal(meboot_replicate(series, 5), meboot_replicate(series, 5))
    assert not np.array_equal(meboot_replicate(series, 5), meboot_replicate(series, 6))


def test_replicate_support(rng):
    """Значения лежат в расширенном хвостами диапазоне"""
    series = rng.standard_normal(40)
    tail = np.abs(np.diff(series)).max()
    for seed in range(20):
        replicate = meboot_replicate(series, seed)
        assert replicate.min() >= series.min() - tail
        assert replicate.max() <= series.max() + tail


def test_replicate_keeps_autocorrelation():
    """AR(1), phi = 0.8: автокорреляция реплик близка к исходной"""
    series = _ar1(100, 0.8, seed=17)
    original = _lag1(series)
    lags = np.array([_lag1(meboot_replicate(series, seed)) for seed in range(200)])
    assert abs(lags.mean() - original) <= 0.15
    assert np.mean(np.abs(lags - original) <= 0.15) >= 0.9


def test_replicate_mean_close():
    """Среднее реплики в пределах 2 sigma / sqrt(n) от исходного"""
    series = _ar1(100, 0.3, seed=23)
    bound = 2 * series.std(ddof=1) / np.sqrt(series.size)
    means = np.array([meboot_replicate(series, seed).mean() for seed in range(400)])
    assert np.mean(np.abs(means - series.mean()) <= bound) >= 0.9


def test_replicate_validation():
    """Короткий, константный и неполный ряды"""
    with pytest.raises(DomainError):
        meboot_replicate([1.0, 2.0, 3.0], 0)
    with pytest.raises(DegenerateInputError):
        meboot_replicate([2.0] * 10, 0)
    with pytest.raises(DomainError):
        meboot_replicate([1.0, np.nan, 3.0, 4.0], 0)


def test_ensemble_order_statistics(uniform_ensemble):
    """sorted - упорядоченная перестановка реплик"""
    assert len(uniform_ensemble) == 999
    np.testing.assert_array_equal(uniform_ensemble.sorted, np.sort(uniform_ensemble.replicates))
    assert uniform_ensemble.order_statistic(1) == pytest.approx(0.001)
    assert uniform_ensemble.order_statistic(999) == pytest.approx(0.999)
    with pytest.raises(DomainError):
        uniform_ensemble.order_statistic(0)


def test_ensemble_validation():
    """Пустой ансамбль и значения вне [-1, 1]"""
    with pytest.raises(InsufficientReplicatesError):
        BootstrapEnsemble(np.array([]))
    with pytest.raises(DomainError):
        BootstrapEnsemble(np.array([0.5, 1.2]))


def test_left_interval_index(uniform_ensemble):
    """J = 999, 95%, левый хвост: 50-я порядковая статистика"""
    assert interval(uniform_ensemble, 0.95, "left") == (pytest.approx(0.050), 1.0)


def test_right_interval_index(uniform_ensemble):
    """Правый хвост зеркален левому"""
    assert interval(uniform_ensemble, 0.95, "right") == (-1.0, pytest.approx(0.950))


def test_two_tailed_interval_index(uniform_ensemble):
    """Двусторонний 95%: 25-я и 975-я порядковые статистики"""
    lo, up = interval(uniform_ensemble, 0.95, "two")
    assert lo == pytest.approx(0.025)
    assert up == pytest.approx(0.975)


def test_interval_constant_ensemble():
    """Ансамбль одинаковых значений"""
    ensemble = BootstrapEnsemble(np.full(199, 0.4))
    assert interval(ensemble, 0.9, "two") == (0.4, 0.4)
    assert interval(ensemble, 0.9, "left") == (0.4, 1.0)
    assert interval(ensemble, 0.9, "right") == (-1.0, 0.4)


def test_interval_nesting(rng):
    """99% интервал содержит 95%"""
    ensemble = BootstrapEnsemble(np.tanh(rng.standard_normal(999)))
    for tail in ("left", "right", "two"):
        lo95, up95 = interval(ensemble, 0.95, tail)
        lo99, up99 = interval(ensemble, 0.99, tail)
        assert lo99 <= lo95 and up95 <= up99


def test_interval_insufficient_replicates():
    """J * хвост < 1"""
    ensemble = BootstrapEnsemble(np.linspace(-0.5, 0.5, 99))
    with pytest.raises(InsufficientReplicatesError):
        interval(ensemble, 0.999, "two")


def test_interval_validation(uniform_ensemble):
    """Уровень и сторона"""
    with pytest.raises(DomainError):
        interval(uniform_ensemble, 1.0, "two")
    with pytest.raises(DomainError):
        interval(uniform_ensemble, 0.95, "upper")


@pytest.mark.parametrize(
    "bounds,rho0,expected",
    [
        ((0.39, 0.94), 0.0, "reject"),
        ((-0.58, 0.58), 0.0, "fail_to_reject"),
        ((0.0, 0.5), 0.0, "fail_to_reject"),
        ((-1.0, -0.5693), 0.0, "reject"),
    ],
)
def test_accept_reject(bounds, rho0, expected):
    """rho0 внутри интервала (границы включены)"""
    assert accept_reject(bounds, rho0) == expected


def test_accept_reject_order():
    """Границы по порядку"""
    with pytest.raises(DomainError):
        accept_reject((0.5, 0.1), 0.0)


def test_bootstrap_p_value():
    """Доля реплик по другую сторону от rho0"""
    negative = BootstrapEnsemble(np.linspace(-0.9, -0.1, 100))
    assert bootstrap_p_value(negative, 0.0, "left") == 1.0
    assert bootstrap_p_value(negative, 0.0, "right") == 0.0
    assert bootstrap_p_value(negative, 0.0, "two") == 0.0
    mixed = BootstrapEnsemble(np.linspace(-0.5, 0.5, 101))
    assert bootstrap_p_value(mixed, 0.0, "two") == pytest.approx(1.0, abs=0.02)


@pytest.mark.parametrize("tail", ["left", "right", "two"])
@pytest.mark.parametrize("level", [0.9, 0.95])
def test_p_value_agrees_with_interval(rng, tail, level):
    """При одной стороне p < 1 - level ровно тогда, когда интервал отвергает rho0"""
    ensemble = BootstrapEnsemble(np.tanh(rng.normal(0.3, 0.5, size=999)))
    bounds = interval(ensemble, level, tail)
    for rho0 in np.linspace(-0.9, 0.9, 37):
        rejected = accept_reject(bounds, rho0) == "reject"
        assert (bootstrap_p_value(ensemble, rho0, tail) < 1.0 - level) == rejected, rho0


def test_two_tailed_coverage():
    """25-я и 975-я статистики из 999 накрывают новое значение с вероятностью 0.95"""
    rng = np.random.default_rng(975)
    n_trials = 2000
    hits = below = 0
    for _ in range(n_trials):
        draws = rng.standard_normal(1000)
        lo, up = interval(BootstrapEnsemble(np.tanh(draws[:999])), 0.95, "two")
        fresh = np.tanh(draws[999])
        hits += lo <= fresh <= up
        below += fresh < lo
    assert hits / n_trials == pytest.approx(0.95, abs=0.02)
    assert below / n_trials == pytest.approx(0.025, abs=0.015)


@pytest.fixture
def curved_pair(rng):
    x = rng.uniform(0.0, 3.0, size=30)
    return x, np.exp(x) + 0.5 * rng.standard_normal(30)


def test_bootstrap_deterministic(curved_pair):
    """Одинаковые (данные, J, seed) - одинаковый ансамбль"""
    x, y = curved_pair
    first = bootstrap_rstar(x, y, J=99, seed=99)
    second = bootstrap_rstar(x, y, J=99, seed=99)
    np.testing.assert_array_equal(first.replicates, second.replicates)
    assert len(first) + first.excluded == 99


def test_bootstrap_parallel_matches(curved_pair):
    """Параллельная генерация совпадает с последовательной"""
    x, y = curved_pair
    sequential = bootstrap_rstar(x, y, J=99, seed=1)
    parallel = bootstrap_rstar(x, y, J=99, seed=1, workers=4)
    np.testing.assert_array_equal(sequential.replicates, parallel.replicates)


def test_bootstrap_directions(curved_pair):
    """Оба направления дают значения в [-1, 1] со знаком ковариации"""
    x, y = curved_pair
    for direction in ("i|j", "j|i"):
        ensemble = bootstrap_rstar(x, y, J=99, seed=2, direction=direction)
        assert np.all(ensemble.replicates > 0)
        assert np.all(ensemble.replicates <= 1.0)


def test_bootstrap_identical_series(rng):
    """y = x: все реплики равны 1"""
    x = rng.standard_normal(25)
    ensemble = bootstrap_rstar(x, x.copy(), J=99, seed=4)
    np.testing.assert_allclose(ensemble.replicates, 1.0, atol=0.01)
    assert interval(ensemble, 0.95, "two") == (pytest.approx(1.0), pytest.approx(1.0))


def test_bootstrap_validation(curved_pair):
    """J >= 99 и допустимое направление"""
    x, y = curved_pair
    with pytest.raises(DomainError):
        bootstrap_rstar(x, y, J=50)
    with pytest.raises(DomainError):
        bootstrap_rstar(x, y, J=99, direction="x|y")


def test_write_ensemble_csv(tmp_path, uniform_ensemble):
    """Выгрузка реплик одним столбцом"""
    path = write_ensemble_csv(uniform_ensemble, tmp_path / "ensemble.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["r_star"]
    np.testing.assert_allclose(frame["r_star"].to_numpy(), uniform_ensemble.replicates)
