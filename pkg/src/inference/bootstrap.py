"""
Bootstrap максимальной энтропии (meboot) для зависимых рядов, ансамбли
реплик r* и доверительные интервалы по порядковым статистикам.

Каждая реплика пары строится из x и y по отдельности (meboot одномерен),
но с общим для реплики потоком случайных чисел: одинаковые ряды дают
одинаковые реплики.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from src.config import load_defaults
from src.dependence.gencorr import rstar_given
from src.dependence.kernelreg import PairedSample
from src.errors import (
    DegenerateInputError,
    DomainError,
    GencorrError,
    InsufficientReplicatesError,
)
from src.inference.taraldsen import TAILS, Tail

logger = logging.getLogger(__name__)

Direction = Literal["i|j", "j|i"]
Decision = Literal["reject", "fail_to_reject"]

MIN_REPLICATES = 99
MIN_SERIES_LENGTH = 4

SeedLike = int | np.random.SeedSequence | np.random.Generator


@dataclass(frozen=True)
class BootstrapEnsemble:
    """J значений r* по репликам и их порядковые статистики"""
    replicates: np.ndarray
    excluded: int = 0
    sorted: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.asarray(self.replicates, dtype=float).ravel()
        if values.size == 0:
            raise InsufficientReplicatesError("bootstrap ensemble is empty")
        if not np.all(np.isfinite(values)) or np.any(np.abs(values) > 1.0):
            raise DomainError("bootstrap replicates must lie in [-1, 1]")
        ordered = np.sort(values)
        values.setflags(write=False)
        ordered.setflags(write=False)
        object.__setattr__(self, "replicates", values)
        object.__setattr__(self, "sorted", ordered)

    def __len__(self) -> int:
        return int(self.replicates.size)

    def order_statistic(self, k: int) -> float:
        """k-я порядковая статистика, k с единицы"""
        if not 1 <= k <= len(self):
            raise DomainError(f"order statistic index must lie in [1, {len(self)}], got {k}")
        return float(self.sorted[k - 1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"r_star": self.replicates})


def meboot_replicate(
    series: Sequence[float],
    seed: SeedLike,
    trim: float | None = None,
) -> np.ndarray:
    """
    Одна реплика ряда методом максимальной энтропии.

    1. Сортировка ряда, промежуточные точки - середины соседних порядковых статистик.
    2. Хвосты: минимум и максимум сдвигаются на усечённое среднее |разностей| ряда.
    3. n равномерных чисел через кусочно-линейную квантильную функцию
       (равномерная плотность на каждом из n интервалов).
    4. Отсортированные значения расставляются по рангам исходного ряда.
    """
    trim = load_defaults().bootstrap.trim if trim is None else trim
    x = np.asarray(series, dtype=float).ravel()
    if x.size < MIN_SERIES_LENGTH:
        raise DomainError(f"meboot requires at least {MIN_SERIES_LENGTH} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("series contains missing or non-finite values")
    if np.ptp(x) == 0:
        raise DegenerateInputError("meboot requires a non-constant series")

    order = np.argsort(x, kind="stable")
    xs = x[order]
    tail = float(stats.trim_mean(np.abs(np.diff(x)), trim))
    knots = np.concatenate(([xs[0] - tail], (xs[:-1] + xs[1:]) / 2.0, [xs[-1] + tail]))
    levels = np.linspace(0.0, 1.0, x.size + 1)

    rng = np.random.default_rng(seed)
    drawn = np.interp(np.sort(rng.uniform(size=x.size)), levels, knots)

    replicate = np.empty_like(x)
    replicate[order] = drawn
    return replicate


def _paired_sample(x: np.ndarray, y: np.ndarray, direction: Direction) -> PairedSample:
    """r*(i|j) - регрессия x на y; r*(j|i) - регрессия y на x"""
    if direction == "i|j":
        return PairedSample(x=y, y=x)
    if direction == "j|i":
        return PairedSample(x=x, y=y)
    raise DomainError(f"direction must be 'i|j' or 'j|i', got {direction!r}")


def bootstrap_rstar(
    x: Sequence[float],
    y: Sequence[float],
    J: int | None = None,
    seed: int = 0,
    direction: Direction = "i|j",
    trim: float | None = None,
    max_excluded_share: float | None = None,
    workers: int = 1,
) -> BootstrapEnsemble:
    """
    Ансамбль из J реплик r*(x|y) (или r*(y|x) для direction="j|i").

    Реплика l получает собственный дочерний seed из SeedSequence(seed), поэтому
    результат не зависит от порядка и параллельности вычисления. Реплики с
    вырожденной подгонкой исключаются; доля исключённых выше порога - ошибка.
    """
    defaults = load_defaults().bootstrap
    J = defaults.replicates if J is None else J
    max_excluded_share = (
        defaults.max_excluded_share if max_excluded_share is None else max_excluded_share
    )
    if J < MIN_REPLICATES:
        raise DomainError(f"J must be at least {MIN_REPLICATES}, got {J}")

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    # Проверка инвариантов пары в обоих направлениях до генерации реплик
    _paired_sample(x, y, direction).flipped()

    children = np.random.SeedSequence(seed).spawn(J)

    def replicate(child: np.random.SeedSequence) -> float | None:
        try:
            x_rep = meboot_replicate(x, child, trim)
            y_rep = meboot_replicate(y, child, trim)
            return rstar_given(_paired_sample(x_rep, y_rep, direction))
        except GencorrError as e:
            logger.warning(f"Excluded bootstrap replicate: {e}")
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(replicate, children))
    else:
        results = [replicate(child) for child in children]

    values = [r for r in results if r is not None]
    excluded = J - len(values)
    if excluded > max_excluded_share * J:
        raise InsufficientReplicatesError(
            f"{excluded} of {J} bootstrap replicates degenerated "
            f"(limit {max_excluded_share:.0%})"
        )

    logger.info(
        f"Bootstrap ensemble r*({direction}): {len(values)} replicates, {excluded} excluded"
    )
    return BootstrapEnsemble(replicates=np.array(values), excluded=excluded)


def _tail_index(J: int, mass: float) -> int:
    """Индекс с единицы для порядковой статистики, оставляющей mass в хвосте"""
    if J * mass < 1.0 - 1e-9:
        raise InsufficientReplicatesError(
            f"{J} replicates cannot resolve a tail mass of {mass:g} (need J * mass >= 1)"
        )
    return max(1, math.ceil(J * mass - 1e-9))


def interval(ensemble: BootstrapEnsemble, level: float, tail: Tail) -> tuple[float, float]:
    """
    Доверительный интервал по порядковым статистикам.

    left: [r*_(k), 1], k = ceil(J * (1 - level)); при J=999 и level=0.95 это 50-я.
    right: [-1, r*_(J+1-k)].
    two: [r*_(k), r*_(J+1-k)], k = ceil(J * (1 - level) / 2): 25-я и 975-я при J=999.

    Новое значение из того же распределения попадает между k-й и (J+1-k)-й
    статистиками с вероятностью (J + 1 - 2k) / (J + 1): при J=999 это ровно 0.95
    (с 974-й было бы 0.949). Покрытие проверяется симуляцией гауссовых ансамблей.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    if tail not in TAILS:
        raise DomainError(f"tail must be one of {TAILS}, got {tail!r}")

    J = len(ensemble)
    alpha = 1.0 - level
    if tail == "two":
        k = _tail_index(J, alpha / 2.0)
        return ensemble.order_statistic(k), ensemble.order_statistic(J + 1 - k)

    k = _tail_index(J, alpha)
    if tail == "left":
        return ensemble.order_statistic(k), 1.0
    return -1.0, ensemble.order_statistic(J + 1 - k)


def accept_reject(bounds: tuple[float, float], rho0: float) -> Decision:
    """Нулевая гипотеза не отвергается, если rho0 внутри интервала (границы включены)"""
    lo, up = bounds
    if lo > up:
        raise DomainError(f"interval bounds out of order: {lo} > {up}")
    return "fail_to_reject" if lo <= rho0 <= up else "reject"


def bootstrap_p_value(ensemble: BootstrapEnsemble, rho0: float = 0.0, tail: Tail = "two") -> float:
    """
    Доля реплик по другую сторону от rho0.

    Стороны те же, что у interval: left - интервал [r*_(k), 1] и альтернатива
    rho > rho0, p = доля реплик <= rho0; right - интервал [-1, r*_(J+1-k)] и
    альтернатива rho < rho0, p = доля реплик >= rho0. Если J * (1 - level) не целое,
    p < 1 - level ровно тогда, когда interval(level) отвергает rho0.
    """
    if tail not in TAILS:
        raise DomainError(f"tail must be one of {TAILS}, got {tail!r}")
    values = ensemble.replicates
    at_or_above = float(np.mean(values >= rho0))
    at_or_below = float(np.mean(values <= rho0))
    if tail == "left":
        return at_or_below
    if tail == "right":
        return at_or_above
    return min(1.0, 2.0 * min(at_or_above, at_or_below))


def write_ensemble_csv(ensemble: BootstrapEnsemble, path: str | Path) -> Path:
    """Экспорт реплик одним столбцом"""
    path = Path(path)
    ensemble.to_frame().to_csv(path, index=False)
    logger.info(f"Wrote bootstrap ensemble ({len(ensemble)} values) to {path}")
    return path
