"""
Обобщённые коэффициенты корреляции r*(i|j), асимметричная матрица R*,
корреляция Пирсона и знаковая мера зависимости MOD.

Соглашение: r*(i|j) - регрессия X_i на X_j; в матрице строка - отклик,
столбец - регрессор ("причина").
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np
import pandas as pd

from src.config import load_defaults
from src.dependence import kernelreg
from src.dependence.kernelreg import PairedSample
from src.errors import DegenerateInputError, DomainError, GencorrError, PairFitError
from src.inference.taraldsen import TaraldsenTest, significance, tail_for_sign

logger = logging.getLogger(__name__)

Dependence = Literal["independent", "positive", "negative", "mixed"]


@dataclass(frozen=True)
class GenCorrPair:
    """Пара обобщённых корреляций r*(i|j), r*(j|i) и знак ковариации"""
    r_star_i_given_j: float
    r_star_j_given_i: float
    cov_sign: int

    def __post_init__(self):
        if self.cov_sign not in (-1, 0, 1):
            raise DomainError(f"cov_sign must be -1, 0 or +1, got {self.cov_sign}")
        for value in (self.r_star_i_given_j, self.r_star_j_given_i):
            if not math.isfinite(value) or abs(value) > 1.0:
                raise DomainError(f"generalized correlation must lie in [-1, 1], got {value}")

    @property
    def sign_indeterminate(self) -> bool:
        """Ковариация практически нулевая: величины выданы без знака"""
        return self.cov_sign == 0


@dataclass(frozen=True)
class GenCorrMatrix:
    """
    Матрица R*: values[i][j] = r*(labels[i] | labels[j]).

    indeterminate[i][j] отмечает ячейки с нулевой ковариацией (величина без знака).
    """
    labels: tuple[str, ...]
    values: np.ndarray
    indeterminate: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        p = len(self.labels)
        if self.values.shape != (p, p):
            raise DomainError(f"values must be {p}x{p}, got {self.values.shape}")
        if self.indeterminate is None:
            object.__setattr__(self, "indeterminate", np.zeros((p, p), dtype=bool))
        self.values.setflags(write=False)

    def get(self, response: str, regressor: str) -> float:
        """r*(response | regressor)"""
        return float(self.values[self.labels.index(response), self.labels.index(regressor)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=list(self.labels), columns=list(self.labels))


def _columns(sample: PairedSample) -> tuple[np.ndarray, np.ndarray]:
    if np.ptp(sample.x) == 0 or np.ptp(sample.y) == 0:
        raise DegenerateInputError("correlation with a constant column is undefined")
    return sample.x, sample.y


def pearson(sample: PairedSample) -> float:
    """Линейный коэффициент корреляции Пирсона"""
    x, y = _columns(sample)
    r = float(np.corrcoef(x, y)[0, 1])
    return min(1.0, max(-1.0, r))


def covariance_sign(sample: PairedSample, tol: float | None = None) -> int:
    """Знак Cov(x, y); 0, если |Cov| < tol * sigma_x * sigma_y"""
    tol = load_defaults().dependence.zero_cov_tol if tol is None else tol
    x, y = _columns(sample)
    cov = float(np.cov(x, y)[0, 1])
    scale = float(np.std(x, ddof=1) * np.std(y, ddof=1))
    if abs(cov) < tol * scale:
        return 0
    return 1 if cov > 0 else -1


def conditional_magnitude(sample: PairedSample, workers: int = 1) -> float:
    """|r*(y|x)| = sqrt(R^2) ядерной регрессии y на x"""
    # Переменная полностью зависит от своей копии, как на диагонали R*
    if np.array_equal(sample.x, sample.y):
        return 1.0
    return math.sqrt(kernelreg.fit(sample, workers=workers).r_squared)


def rstar_given(sample: PairedSample, cov_sign: int | None = None, workers: int = 1) -> float:
    """
    r*(y|x) со знаком ковариации: отклик y, регрессор x.

    При нулевой ковариации возвращается величина без знака.
    """
    sign = covariance_sign(sample) if cov_sign is None else cov_sign
    magnitude = conditional_magnitude(sample, workers=workers)
    return magnitude if sign == 0 else sign * magnitude


def rstar(sample: PairedSample, workers: int = 1) -> GenCorrPair:
    """
    Обе обобщённые корреляции пары (X_i, X_j) = (sample.x, sample.y).

    r*(i|j) - регрессия x на y, r*(j|i) - регрессия y на x.
    """
    sign = covariance_sign(sample)
    if sign == 0:
        logger.warning("Covariance is practically zero: r* magnitudes reported without sign")
    return GenCorrPair(
        r_star_i_given_j=rstar_given(sample.flipped(), cov_sign=sign, workers=workers),
        r_star_j_given_i=rstar_given(sample, cov_sign=sign, workers=workers),
        cov_sign=sign,
    )


def dep_meas(sample: PairedSample, workers: int = 1) -> float:
    """MOD(i, j) = sgn(Cov) * max(|r*(i|j)|, |r*(j|i)|)"""
    pair = rstar(sample, workers=workers)
    magnitude = max(abs(pair.r_star_i_given_j), abs(pair.r_star_j_given_i))
    return magnitude if pair.cov_sign == 0 else pair.cov_sign * magnitude


def classify_dependence(pair: GenCorrPair, epsilon: float | None = None) -> Dependence:
    """
    Классификация зависимости по порогу "малого" значения epsilon.

    independent - обе |r*| < epsilon; positive/negative - все значения не ниже
    порога одного знака; mixed - иначе, в том числе при неопределённом знаке.
    """
    epsilon = load_defaults().dependence.epsilon if epsilon is None else epsilon
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    values = (pair.r_star_i_given_j, pair.r_star_j_given_i)
    exceeding = [v for v in values if abs(v) >= epsilon]
    if not exceeding:
        return "independent"
    if pair.sign_indeterminate:
        return "mixed"
    if all(v > 0 for v in exceeding):
        return "positive"
    if all(v < 0 for v in exceeding):
        return "negative"
    return "mixed"


def _as_frame(data: pd.DataFrame | Mapping[str, Sequence[float]]) -> pd.DataFrame:
    frame = data if isinstance(data, pd.DataFrame) else pd.DataFrame(dict(data))
    if frame.shape[1] < 2:
        raise DomainError(f"at least 2 columns required, got {frame.shape[1]}")
    if frame.columns.has_duplicates:
        raise DomainError("column labels must be unique")
    return frame


def gencorr_matrix(
    data: pd.DataFrame | Mapping[str, Sequence[float]],
    workers: int = 1,
) -> GenCorrMatrix:
    """
    Матрица R* для p столбцов: values[i][j] = r*(столбец i | столбец j), диагональ 1.

    Любая вырожденная пара проваливает всю матрицу (PairFitError с именами пары).
    """
    frame = _as_frame(data)
    labels = tuple(str(c) for c in frame.columns)
    columns = [frame[c].to_numpy(dtype=float) for c in frame.columns]
    p = len(labels)
    cells = [(i, j) for i in range(p) for j in range(p) if i != j]

    def compute(cell: tuple[int, int]) -> tuple[float, bool]:
        i, j = cell
        try:
            sample = PairedSample(x=columns[j], y=columns[i])
            sign = covariance_sign(sample)
            return rstar_given(sample, cov_sign=sign), sign == 0
        except GencorrError as e:
            raise PairFitError(labels[i], labels[j], e) from e

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(compute, cells))
    else:
        results = [compute(cell) for cell in cells]

    values = np.eye(p)
    indeterminate = np.zeros((p, p), dtype=bool)
    for (i, j), (value, flag) in zip(cells, results):
        values[i, j] = value
        indeterminate[i, j] = flag

    logger.info(f"Computed {p}x{p} generalized correlation matrix")
    return GenCorrMatrix(labels=labels, values=values, indeterminate=indeterminate)


def rstar_significance(
    sample: PairedSample,
    rho0: float = 0.0,
    alpha: float = 0.05,
) -> tuple[TaraldsenTest, TaraldsenTest]:
    """
    Тесты r*(i|j) и r*(j|i) по точной плотности; сторона теста - по знаку ковариации.
    """
    pair = rstar(sample)
    tail = tail_for_sign(pair.cov_sign)
    return (
        significance(sample.n, pair.r_star_i_given_j, tail, alpha=alpha, rho0=rho0),
        significance(sample.n, pair.r_star_j_given_i, tail, alpha=alpha, rho0=rho0),
    )
