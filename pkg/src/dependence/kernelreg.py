"""
Двумерная ядерная регрессия Надарая-Уотсона с гауссовым ядром:
условное среднее E(Y|X), выбор ширины окна перекрёстной проверкой
с исключением по одному и коэффициент детерминации.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, special

from src.config import load_defaults
from src.errors import DegenerateInputError, DomainError

logger = logging.getLogger(__name__)

MIN_OBSERVATIONS = 5
MIN_DISTINCT_X = 3

# Правило Сильвермана: h0 = 1.06 * sigma_x * n^(-1/5)
SILVERMAN_FACTOR = 1.06

# Элементов ядерной матрицы в одном блоке строк (около 32 МБ)
BLOCK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class PairedSample:
    """Два выровненных числовых столбца: регрессор x и отклик y"""
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DomainError(f"x and y must have equal length, got {x.size} and {y.size}")
        if x.size < MIN_OBSERVATIONS:
            raise DomainError(f"at least {MIN_OBSERVATIONS} observations required, got {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("paired sample contains missing or non-finite values")
        distinct = np.unique(x).size
        if distinct == 1:
            raise DegenerateInputError("all x values are equal")
        if distinct < MIN_DISTINCT_X:
            raise DegenerateInputError(
                f"at least {MIN_DISTINCT_X} distinct x values required, got {distinct}"
            )
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.x.size)

    def flipped(self) -> "PairedSample":
        """Та же выборка с переставленными ролями регрессора и отклика"""
        return PairedSample(self.y, self.x)


@dataclass(frozen=True)
class KernelFit:
    """Результат ядерной регрессии"""
    fitted: np.ndarray
    bandwidth: float
    r_squared: float


@dataclass(frozen=True)
class LinearFit:
    """МНК-прямая y = intercept + slope * x"""
    fitted: np.ndarray
    slope: float
    intercept: float
    r_squared: float


def _canonical_order(sample: PairedSample) -> np.ndarray:
    """Порядок по (x, y): вычисления не зависят от порядка строк на входе"""
    return np.lexsort((sample.y, sample.x))


def _smooth(x: np.ndarray, y: np.ndarray, bandwidth: float, leave_one_out: bool) -> np.ndarray:
    """
    Сглаженные значения в точках x.

    Веса - softmax логарифмов гауссова ядра по строке: максимум показателя
    вычитается, так что сумма весов всегда положительна. Матрица ядра
    считается блоками строк.
    """
    n = x.size
    rows = max(1, BLOCK_ENTRIES // n)
    out = np.empty(n)
    for start in range(0, n, rows):
        stop = min(n, start + rows)
        u = (x[start:stop, None] - x[None, :]) / bandwidth
        log_k = -0.5 * u * u
        if leave_one_out:
            idx = np.arange(start, stop)
            log_k[idx - start, idx] = -np.inf
        out[start:stop] = special.softmax(log_k, axis=1) @ y
    return out


def r_squared_of_fit(observed: Sequence[float], fitted: Sequence[float]) -> float:
    """Квадрат корреляции Пирсона между наблюдёнными и подогнанными значениями"""
    observed = np.asarray(observed, dtype=float)
    fitted = np.asarray(fitted, dtype=float)
    if observed.shape != fitted.shape:
        raise DomainError("observed and fitted must have equal length")
    if observed.size < 3:
        raise DomainError(f"at least 3 values required, got {observed.size}")
    if np.ptp(observed) == 0 or np.ptp(fitted) == 0:
        raise DegenerateInputError("correlation with a constant sequence is undefined")
    r = np.corrcoef(observed, fitted)[0, 1]
    return float(min(1.0, max(0.0, r * r)))


def _fit_r_squared(y: np.ndarray, fitted: np.ndarray, flat_tol: float) -> float:
    """R^2 подгонки; плоская подгонка означает отсутствие объясняющей силы"""
    spread = np.ptp(y)
    if spread == 0 or np.ptp(fitted) <= flat_tol * spread:
        return 0.0
    return r_squared_of_fit(y, fitted)


def cv_score(sample: PairedSample, bandwidth: float) -> float:
    """Сумма квадратов ошибок прогноза с исключением по одному"""
    if not math.isfinite(bandwidth) or bandwidth <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")
    order = _canonical_order(sample)
    x, y = sample.x[order], sample.y[order]
    resid = y - _smooth(x, y, bandwidth, leave_one_out=True)
    return float(np.dot(resid, resid))


def _scale(sample: PairedSample) -> float:
    """sigma_x * n^(-1/5) по отсортированному x (не зависит от порядка строк)"""
    return float(np.std(np.sort(sample.x), ddof=1)) * sample.n ** (-0.2)


def silverman_bandwidth(sample: PairedSample) -> float:
    return SILVERMAN_FACTOR * _scale(sample)


def select_bandwidth(
    sample: PairedSample,
    grid_points: int | None = None,
    span_decades: float | None = None,
    workers: int = 1,
) -> float:
    """
    Ширина окна, минимизирующая CV-критерий.

    Просмотр лог-сетки на [10^-k, 10^k] * sigma_x * n^(-1/5) (k = span_decades)
    с правилом Сильвермана в качестве центра, затем уточнение золотым сечением
    (метод Брента) по log h между соседями лучшего узла.
    """
    defaults = load_defaults().kernel
    grid_points = grid_points or defaults.cv_grid_points
    span_decades = span_decades or defaults.cv_span_decades

    base = _scale(sample)
    center = math.log(silverman_bandwidth(sample))
    span = span_decades * math.log(10.0)
    log_grid = np.union1d(
        np.linspace(math.log(base) - span, math.log(base) + span, grid_points),
        [center],
    )

    def score(log_h: float) -> float:
        return cv_score(sample, math.exp(log_h))

    # Порядок результатов фиксирован независимо от числа потоков
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = np.array(list(pool.map(score, log_grid)))
    else:
        scores = np.array([score(h) for h in log_grid])

    best = int(np.argmin(scores))
    best_log_h, best_score = float(log_grid[best]), float(scores[best])

    if 0 < best < len(log_grid) - 1:
        refined = optimize.minimize_scalar(
            score,
            bounds=(float(log_grid[best - 1]), float(log_grid[best + 1])),
            method="bounded",
            options={"xatol": 1e-6},
        )
        if refined.success and refined.fun <= best_score:
            best_log_h, best_score = float(refined.x), float(refined.fun)

    bandwidth = math.exp(best_log_h)
    logger.debug(f"CV bandwidth {bandwidth:.6g} (score {best_score:.6g}, n={sample.n})")
    return bandwidth


def fit(
    sample: PairedSample,
    bandwidth: float | None = None,
    workers: int = 1,
) -> KernelFit:
    """
    Регрессия y на x: n значений условного среднего E(Y|X) и R^2.

    Args:
        sample: выборка (x - регрессор, y - отклик)
        bandwidth: ширина окна; если не задана, выбирается перекрёстной проверкой
        workers: потоки для просмотра сетки CV

    Returns:
        KernelFit с подогнанными значениями в исходном порядке строк
    """
    if bandwidth is None:
        bandwidth = select_bandwidth(sample, workers=workers)
    elif not math.isfinite(bandwidth) or bandwidth <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")

    order = _canonical_order(sample)
    x, y = sample.x[order], sample.y[order]
    smoothed = _smooth(x, y, bandwidth, leave_one_out=False)

    fitted = np.empty_like(smoothed)
    fitted[order] = smoothed
    fitted.setflags(write=False)

    flat_tol = load_defaults().kernel.flat_fit_tol
    return KernelFit(
        fitted=fitted,
        bandwidth=float(bandwidth),
        r_squared=_fit_r_squared(sample.y, fitted, flat_tol),
    )


def ols_fit(sample: PairedSample) -> LinearFit:
    """Линейная регрессия y на x методом наименьших квадратов"""
    slope, intercept = np.polyfit(sample.x, sample.y, 1)
    fitted = intercept + slope * sample.x
    return LinearFit(
        fitted=fitted,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=_fit_r_squared(sample.y, fitted, load_defaults().kernel.flat_fit_tol),
    )
