"""
Точная выборочная плотность коэффициента корреляции (двумерная нормальная
генеральная совокупность), её численная функция распределения по правилу
прямоугольников, квантили, p-значения и таблица критических значений.
"""
import logging
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from functools import lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
from scipy import special

from src.config import load_defaults
from src.errors import DomainError
from src.numerics.specfun import hyp2f1_array, log_gamma

logger = logging.getLogger(__name__)

Tail = Literal["left", "right", "two"]
TAILS: tuple[str, ...] = ("left", "right", "two")

# Допуск сравнения узлов сетки с границами интервала
GRID_TOL = 1e-12


@dataclass(frozen=True)
class TaraldsenParams:
    """Параметры плотности: гипотетическое rho и степени свободы v = n - 1"""
    rho: float
    v: float

    def __post_init__(self):
        if not math.isfinite(self.rho) or not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")
        if not math.isfinite(self.v) or self.v <= 1.0:
            raise DomainError(f"degrees of freedom v = n - 1 must exceed 1, got {self.v}")

    @classmethod
    def from_sample_size(cls, n: int, rho: float = 0.0) -> "TaraldsenParams":
        return cls(rho=rho, v=n - 1)

    @property
    def n(self) -> float:
        return self.v + 1


@dataclass(frozen=True)
class DensityGrid:
    """Высоты плотности на равномерной сетке r от -1 до 1 включительно"""
    step: float
    r: np.ndarray
    height: np.ndarray
    params: TaraldsenParams | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.r.shape != self.height.shape:
            raise DomainError("grid r and height must have equal length")
        if not np.all(np.isfinite(self.height)) or np.any(self.height < 0):
            raise DomainError("grid heights must be finite and nonnegative")
        self.r.setflags(write=False)
        self.height.setflags(write=False)

    def __len__(self) -> int:
        return len(self.r)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.r.tolist(), self.height.tolist()))

    @property
    def total(self) -> float:
        return float(self.height.sum())

    def running_share(self) -> np.ndarray:
        """Накопленные суммы высот, делённые на полную сумму (ширина сокращается)"""
        total = self.total
        if total <= 0:
            raise DomainError("density grid has zero total height")
        return np.cumsum(self.height) / total

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"r": self.r, "height": self.height})


@dataclass(frozen=True)
class FisherZ:
    z: float
    approx_sd: float


@dataclass(frozen=True)
class TaraldsenTest:
    """Результат проверки H0: rho = rho0 по точной плотности"""
    n: int
    rho0: float
    observed_r: float
    tail: str
    alpha: float
    p_value: float
    critical: tuple[float, float]
    reject: bool

    @property
    def decision(self) -> str:
        return "reject" if self.reject else "fail_to_reject"


def _log_constant(v: float) -> float:
    """ln[v(v-1)Γ(v-1) / (√(2π) Γ(v+1/2))]"""
    return (
        math.log(v) + math.log(v - 1.0) + log_gamma(v - 1.0)
        - 0.5 * math.log(2.0 * math.pi) - log_gamma(v + 0.5)
    )


def _density_array(rho: np.ndarray | float, v: float, r: np.ndarray | float) -> np.ndarray:
    """
    f(rho | r, v) с broadcasting по rho и r, вся арифметика в лог-пространстве.

    При |r| = 1 множитель (1 - r^2)^((v-1)/2) обнуляет плотность; такие точки
    возвращаются как точный ноль.
    """
    rho_arr, r_arr = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(r, dtype=float))
    out = np.zeros(rho_arr.shape)
    inner = np.abs(r_arr) < 1.0
    if not inner.any():
        return out

    rr, pp = r_arr[inner], rho_arr[inner]
    one_minus_rp = 1.0 - rr * pp
    log_f = (
        _log_constant(v)
        + 0.5 * (v - 1.0) * np.log1p(-rr * rr)
        + special.xlogy(0.5 * (v - 2.0), 1.0 - pp * pp)
        + 0.5 * (1.0 - 2.0 * v) * np.log(one_minus_rp)
        + np.log(hyp2f1_array(1.5, -0.5, v + 0.5, (1.0 + rr * pp) / 2.0))
    )
    values = np.exp(log_f)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"density is not finite for v={v} at |rho| = 1 (requires v >= 2)")
    out[inner] = values
    return out


def density(params: TaraldsenParams, r: float) -> float:
    """
    Точная плотность f(rho | r, v) при фиксированном rho как функция наблюдаемого r.
    """
    if not math.isfinite(r) or not -1.0 <= r <= 1.0:
        raise DomainError(f"r must lie in [-1, 1], got {r}")
    return float(_density_array(params.rho, params.v, r))


def grid_points(step: float) -> np.ndarray:
    """Узлы -1, -1+step, ..., 1; 2/step должно быть целым"""
    if not math.isfinite(step) or not 0.0 < step <= 0.5:
        raise DomainError(f"grid step must lie in (0, 0.5], got {step}")
    intervals = 2.0 / step
    n_intervals = round(intervals)
    if abs(intervals - n_intervals) > 1e-9 * intervals:
        raise DomainError(f"grid step {step} does not divide [-1, 1] evenly")
    return np.round(np.linspace(-1.0, 1.0, n_intervals + 1), 12)


@lru_cache(maxsize=64)
def _cached_grid(rho: float, v: float, step: float) -> DensityGrid:
    r = grid_points(step)
    params = TaraldsenParams(rho=rho, v=v)
    grid = DensityGrid(step=step, r=r, height=_density_array(rho, v, r), params=params)
    logger.debug(f"Built density grid rho={rho} v={v} step={step}: {len(grid)} points")
    return grid


def build_grid(params: TaraldsenParams, step: float = 0.001) -> DensityGrid:
    """
    Сетка высот плотности на r = seq(-1, 1, step).

    Сетки неизменяемы и кэшируются по (rho, v, step). Для расчётов шаг не
    крупнее 0.01; грубые сетки (0.5 даёт 5 точек) годятся только для проверок.
    """
    return _cached_grid(float(params.rho), float(params.v), float(step))


def _check_bound(name: str, value: float) -> None:
    if not math.isfinite(value) or not -1.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [-1, 1], got {value}")


def cumulative(
    grid: DensityGrid,
    r_lo: float,
    r_up: float,
    inclusive: bool = False,
) -> float:
    """
    Доля площади под кривой между r_lo и r_up: сумма высот узлов отрезка,
    делённая на сумму всех высот.

    По умолчанию узел, совпадающий с границей, входит с половинным весом, поэтому
    cumulative(-1, r) + cumulative(r, 1) = 1 для любого r. С inclusive=True граничные
    узлы входят целиком: cumulative(-1, r, inclusive=True) совпадает с накопленной
    долей, которую обращает quantile.
    """
    _check_bound("r_lo", r_lo)
    _check_bound("r_up", r_up)
    if r_lo > r_up:
        raise DomainError(f"bounds out of order: r_lo={r_lo} > r_up={r_up}")
    total = grid.total
    if total <= 0:
        raise DomainError("density grid has zero total height")
    if r_lo == -1.0 and r_up == 1.0:
        return 1.0

    r, h = grid.r, grid.height
    if inclusive:
        share = grid.running_share()
        lo = int(np.searchsorted(r, r_lo - GRID_TOL, side="left"))
        hi = int(np.searchsorted(r, r_up + GRID_TOL, side="right")) - 1
        if hi < lo:
            return 0.0
        below = share[lo - 1] if lo > 0 else 0.0
        return float(min(1.0, max(0.0, share[hi] - below)))

    inside = (r > r_lo + GRID_TOL) & (r < r_up - GRID_TOL)
    on_bound = (np.abs(r - r_lo) <= GRID_TOL) | (np.abs(r - r_up) <= GRID_TOL)
    mass = h[inside].sum() + 0.5 * h[on_bound].sum()
    if abs(r_up - r_lo) <= GRID_TOL:
        mass = 0.0
    return float(min(1.0, max(0.0, mass / total)))


def quantile_from_grid(grid: DensityGrid, c: float) -> float:
    """Наименьший узел r, у которого cumulative(-1, r, inclusive=True) >= c"""
    if not math.isfinite(c) or not 0.0 < c < 1.0:
        raise DomainError(f"cumulative probability c must lie in (0, 1), got {c}")
    share = grid.running_share()
    idx = int(np.searchsorted(share, c, side="left"))
    return float(grid.r[min(idx, len(grid) - 1)])


def quantile(params: TaraldsenParams, c: float, step: float = 0.001) -> float:
    """
    Обратная функция распределения F^{-1}(c | rho, v) с точностью до шага сетки.

    Накопленная доля в узле r включает прямоугольник самого узла (cumulative с
    inclusive=True), как в исходном правиле прямоугольников; на этом строится
    таблица критических значений.
    """
    return quantile_from_grid(build_grid(params, step), c)


def p_value(
    params: TaraldsenParams,
    observed_r: float,
    tail: Tail,
    step: float = 0.001,
) -> float:
    """Вероятность наблюдать r столь же или более экстремальный, чем observed_r"""
    _check_bound("observed_r", observed_r)
    if tail not in TAILS:
        raise DomainError(f"tail must be one of {TAILS}, got {tail!r}")
    grid = build_grid(params, step)
    left = cumulative(grid, -1.0, observed_r)
    right = cumulative(grid, observed_r, 1.0)
    if tail == "left":
        return left
    if tail == "right":
        return right
    return min(1.0, 2.0 * min(left, right))


def round_half_away(value: float, digits: int = 2) -> float:
    """Округление половин от нуля (Decimal, без артефактов двоичного представления)"""
    quant = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(round(value, 9))).quantize(quant, rounding=ROUND_HALF_UP))


def table1(
    sample_sizes: list[int] | None = None,
    probs: list[float] | None = None,
    step: float | None = None,
    rounded: bool = True,
) -> pd.DataFrame:
    """
    Критические значения для односторонних тестов при rho = 0:
    квантили F^{-1}(c | 0, n - 1) для каждой пары (n, c).

    Строки - объёмы выборки, столбцы - накопленные вероятности.

    Шесть округлённых ячеек расходятся с опубликованной таблицей на 0.01: сырой
    квантиль сетки лежит ровно на x.xx5 и округляется от нуля. Это (n=25, c=0.01/0.99)
    -> -0.45/0.45 вместо -0.44/0.44, (n=90, c=0.025/0.975) -> -0.21/0.21 вместо
    -0.20/0.20 и (n=150, c=0.1/0.9) -> -0.11/0.11 вместо -0.10/0.10. Сырые значения
    (rounded=False) отличаются от опубликованных не более чем на 0.005.
    """
    defaults = load_defaults().taraldsen
    sample_sizes = list(sample_sizes or defaults.table_sample_sizes)
    probs = list(probs or defaults.table_probs)
    step = step or defaults.step

    for n in sample_sizes:
        if int(n) != n or n < 3:
            raise DomainError(f"sample sizes must be integers >= 3, got {n}")

    rows = []
    for n in sample_sizes:
        grid = build_grid(TaraldsenParams.from_sample_size(int(n)), step)
        values = [quantile_from_grid(grid, c) for c in probs]
        rows.append([round_half_away(q) for q in values] if rounded else values)

    logger.info(f"Computed critical-value table: {len(sample_sizes)} sizes x {len(probs)} probs")
    return pd.DataFrame(
        rows,
        index=pd.Index([int(n) for n in sample_sizes], name="n"),
        columns=pd.Index(probs, name="c"),
    )


def fisher_z(r: float, n: int) -> FisherZ:
    """Преобразование Фишера z = atanh(r) и приближённое ст. отклонение 1/√n"""
    if not math.isfinite(r) or abs(r) >= 1.0:
        raise DomainError(f"fisher_z requires |r| < 1, got {r}")
    if n < 4:
        raise DomainError(f"fisher_z requires n >= 4, got {n}")
    return FisherZ(z=float(np.arctanh(r)), approx_sd=1.0 / math.sqrt(n))


def confidence_interval(
    params: TaraldsenParams,
    level: float = 0.95,
    step: float = 0.001,
) -> tuple[float, float]:
    """Двусторонний интервал из квантилей (1-level)/2 и (1+level)/2"""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    grid = build_grid(params, step)
    return (
        quantile_from_grid(grid, (1.0 - level) / 2.0),
        quantile_from_grid(grid, (1.0 + level) / 2.0),
    )


def critical_value(n: int, c: float, rho: float = 0.0, step: float = 0.001) -> float:
    """Критическое значение r для объёма выборки n (поиск по таблице без таблицы)"""
    return quantile(TaraldsenParams.from_sample_size(n, rho), c, step)


def tail_for_sign(cov_sign: int) -> Tail:
    """Известный знак ковариации разрешает односторонний тест"""
    if cov_sign > 0:
        return "right"
    if cov_sign < 0:
        return "left"
    return "two"


def _acceptance_bounds(grid: DensityGrid, tail: Tail, alpha: float) -> tuple[float, float]:
    """
    Крайние узлы сетки, где p_value ещё не меньше alpha.

    Границы считаются по тем же долям, что и p_value, поэтому наблюдаемое r в узле
    сетки отвергается ровно тогда, когда лежит вне [lower, upper].
    """
    r = grid.r
    left = np.array([cumulative(grid, -1.0, x) for x in r])
    right = np.array([cumulative(grid, x, 1.0) for x in r])
    if tail == "two":
        keep_left, keep_right = 2.0 * left >= alpha, 2.0 * right >= alpha
    else:
        keep_left, keep_right = left >= alpha, right >= alpha

    lower, upper = -1.0, 1.0
    if tail in ("left", "two"):
        lower = float(r[np.flatnonzero(keep_left)[0]])
    if tail in ("right", "two"):
        upper = float(r[np.flatnonzero(keep_right)[-1]])
    return lower, upper


def significance(
    n: int,
    observed_r: float,
    tail: Tail,
    alpha: float = 0.05,
    rho0: float = 0.0,
    step: float = 0.001,
) -> TaraldsenTest:
    """Проверка H0: rho = rho0 - p-значение, критические границы и решение"""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    params = TaraldsenParams.from_sample_size(n, rho0)
    grid = build_grid(params, step)
    pv = p_value(params, observed_r, tail, step)

    critical = _acceptance_bounds(grid, tail, alpha)
    return TaraldsenTest(
        n=int(n),
        rho0=rho0,
        observed_r=observed_r,
        tail=tail,
        alpha=alpha,
        p_value=pv,
        critical=critical,
        reject=pv < alpha,
    )


def analytic_mass(grid: DensityGrid) -> float:
    """Площадь step * сумма высот без самонормировки"""
    return grid.step * grid.total


def rho_mass(r: float, v: float, step: float = 1e-4) -> float:
    """
    Площадь под f(rho | r, v) как функцией rho при фиксированном r.

    Нормирующая константа формулы рассчитана именно на интегрирование по rho.
    """
    _check_bound("r", r)
    TaraldsenParams(rho=0.0, v=v)
    rho = grid_points(step)
    return float(step * _density_array(rho, v, r).sum())


def write_grid_csv(grid: DensityGrid, path: str | Path) -> Path:
    """Экспорт сетки (r, height) в CSV"""
    path = Path(path)
    grid.to_frame().to_csv(path, index=False)
    logger.info(f"Wrote density grid ({len(grid)} points) to {path}")
    return path
