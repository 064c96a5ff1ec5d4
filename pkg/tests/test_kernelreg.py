"""
Тесты для kernelreg
"""
import math

import numpy as np
import pytest

from src.dependence import kernelreg
from src.dependence.kernelreg import (
    PairedSample,
    cv_score,
    fit,
    ols_fit,
    r_squared_of_fit,
    select_bandwidth,
    silverman_bandwidth,
)
from src.errors import DegenerateInputError, DomainError


@pytest.fixture
def curved(rng) -> PairedSample:
    """y = sin(x) + шум, x в [0, 6]"""
    x = rng.uniform(0.0, 6.0, size=80)
    return PairedSample(x=x, y=np.sin(x) + 0.1 * rng.standard_normal(80))


def test_sample_validation():
    """Инварианты выборки"""
    with pytest.raises(DomainError):
        PairedSample(x=[1, 2, 3, 4, 5], y=[1, 2, 3, 4])
    with pytest.raises(DomainError):
        PairedSample(x=[1, 2, 3, 4], y=[1, 2, 3, 4])
    with pytest.raises(DomainError):
        PairedSample(x=[1, 2, 3, 4, math.nan], y=[1, 2, 3, 4, 5])
    with pytest.raises(DegenerateInputError):
        PairedSample(x=[2, 2, 2, 2, 2], y=[1, 2, 3, 4, 5])
    with pytest.raises(DegenerateInputError):
        PairedSample(x=[1, 1, 2, 2, 2], y=[1, 2, 3, 4, 5])


def test_sample_is_read_only():
    """Столбцы выборки неизменяемы"""
    sample = PairedSample(x=[1, 2, 3, 4, 5], y=[2, 4, 6, 8, 10])
    with pytest.raises(ValueError):
        sample.x[0] = 0.0
    assert sample.n == 5
    assert sample.flipped().x.tolist() == [2, 4, 6, 8, 10]


def test_linear_relation_explained():
    """y = 2x + 1 на равномерной сетке: R^2 >= 0.99"""
    x = np.linspace(0.0, 10.0, 50)
    result = fit(PairedSample(x=x, y=2 * x + 1))
    assert result.r_squared >= 0.99
    assert result.bandwidth > 0
    assert result.fitted.shape == (50,)


def test_independent_noise_explains_little(rng):
    """Независимая перестановка x: R^2 мал"""
    x = rng.standard_normal(100)
    y = rng.permutation(x)
    assert fit(PairedSample(x=x, y=y)).r_squared <= 0.15


def test_r_squared_examples():
    """Квадрат корреляции наблюдённых и подогнанных значений"""
    observed = np.array([1.0, 2.0, 3.0, 4.0])
    assert r_squared_of_fit(observed, observed) == pytest.approx(1.0)
    assert r_squared_of_fit(observed, -observed) == pytest.approx(1.0)
    assert r_squared_of_fit(observed, [1.0, 1.0, 2.0, 2.0]) == pytest.approx(0.8)


def test_r_squared_degenerate():
    """Константная последовательность"""
    with pytest.raises(DegenerateInputError):
        r_squared_of_fit([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])
    with pytest.raises(DomainError):
        r_squared_of_fit([1.0, 2.0], [1.0, 2.0])


def test_r_squared_matches_fit(curved):
    """R^2 подгонки равен квадрату корреляции y и fitted"""
    result = fit(curved)
    assert result.r_squared == pytest.approx(np.corrcoef(curved.y, result.fitted)[0, 1] ** 2)


def test_wide_bandwidth_gives_mean(curved):
    """h -> бесконечность: fitted -> mean(y), R^2 = 0"""
    h = 1e6 * np.ptp(curved.x)
    result = fit(curved, bandwidth=h)
    assert np.max(np.abs(result.fitted - curved.y.mean())) <= 1e-6
    assert result.r_squared == 0.0


def test_narrow_bandwidth_interpolates():
    """h -> 0 при различных x: fitted -> y"""
    x = np.arange(10, dtype=float) / 10
    y = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0])
    result = fit(PairedSample(x=x, y=y), bandwidth=1e-6)
    np.testing.assert_allclose(result.fitted, y, atol=1e-12)
    assert result.r_squared == pytest.approx(1.0)


def test_far_points_do_not_underflow():
    """Удалённая точка получает собственное значение, а не NaN"""
    x = np.array([0.0, 0.1, 0.2, 0.3, 1000.0])
    y = np.array([1.0, 2.0, 3.0, 4.0, 50.0])
    result = fit(PairedSample(x=x, y=y), bandwidth=0.1)
    assert np.all(np.isfinite(result.fitted))
    assert result.fitted[-1] == pytest.approx(50.0)


def test_permutation_equivariance(curved, rng):
    """Перестановка пар переставляет fitted и не меняет h и R^2"""
    base = fit(curved)
    perm = rng.permutation(curved.n)
    shuffled = fit(PairedSample(x=curved.x[perm], y=curved.y[perm]))
    assert shuffled.bandwidth == pytest.approx(base.bandwidth, rel=1e-12)
    assert shuffled.r_squared == pytest.approx(base.r_squared, abs=1e-12)
    np.testing.assert_allclose(shuffled.fitted, base.fitted[perm], rtol=1e-12)


def test_bandwidth_scales_with_x(curved):
    """Масштаб x в s раз масштабирует h в s раз"""
    h = select_bandwidth(curved)
    scaled = select_bandwidth(PairedSample(x=10.0 * curved.x, y=curved.y))
    assert scaled == pytest.approx(10.0 * h, rel=1e-3)


def test_bandwidth_ignores_affine_y(curved):
    """Аффинное преобразование y не меняет h"""
    h = select_bandwidth(curved)
    assert select_bandwidth(PairedSample(x=curved.x, y=3.0 * curved.y + 5.0)) == pytest.approx(
        h, rel=1e-3
    )


def test_selected_bandwidth_minimizes_cv(curved):
    """Выбранное h не хуже правила Сильвермана и близких значений"""
    h = select_bandwidth(curved)
    best = cv_score(curved, h)
    assert best <= cv_score(curved, silverman_bandwidth(curved)) + 1e-12
    assert best <= cv_score(curved, 1.01 * h) * (1 + 1e-9)
    assert best <= cv_score(curved, h / 1.01) * (1 + 1e-9)


def test_cv_score_validation(curved):
    """h > 0"""
    with pytest.raises(DomainError):
        cv_score(curved, 0.0)
    with pytest.raises(DomainError):
        fit(curved, bandwidth=-1.0)


def test_parallel_grid_matches_sequential(curved):
    """Параллельный просмотр сетки даёт тот же результат"""
    assert select_bandwidth(curved, workers=4) == select_bandwidth(curved, workers=1)


def test_blocked_smoothing_matches(curved, monkeypatch):
    """Разбиение матрицы ядра на блоки не меняет результат"""
    base = fit(curved, bandwidth=0.3)
    monkeypatch.setattr(kernelreg, "BLOCK_ENTRIES", 7 * curved.n)
    blocked = fit(curved, bandwidth=0.3)
    np.testing.assert_allclose(blocked.fitted, base.fitted, rtol=1e-13)


def test_ols_fit_line():
    """МНК восстанавливает прямую"""
    x = np.linspace(-1.0, 1.0, 21)
    result = ols_fit(PairedSample(x=x, y=3.0 - 2.0 * x))
    assert result.slope == pytest.approx(-2.0)
    assert result.intercept == pytest.approx(3.0)
    assert result.r_squared == pytest.approx(1.0)


def test_ols_r_squared_symmetric(rng):
    """Линейный путь: R^2(i|j) = R^2(j|i) на 100 случайных наборах"""
    for _ in range(100):
        x = rng.standard_normal(30)
        y = rng.uniform(-1, 1) * x + rng.standard_normal(30)
        sample = PairedSample(x=x, y=y)
        assert ols_fit(sample).r_squared == pytest.approx(
            ols_fit(sample.flipped()).r_squared, abs=1e-12
        )


def test_kernel_detects_direction(rng):
    """y = x^2 + шум: |r*(y|x)| заметно больше |r*(x|y)|"""
    x = rng.uniform(-1.0, 1.0, size=200)
    sample = PairedSample(x=x, y=x**2 + 0.05 * rng.standard_normal(200))
    forward = math.sqrt(fit(sample).r_squared)
    backward = math.sqrt(fit(sample.flipped()).r_squared)
    assert forward - backward > 0.1
