"""
Специальные функции для точной плотности коэффициента корреляции:
логарифм гамма-функции и гипергеометрическая функция Гаусса 2F1.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from src.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# Относительный порог обрыва ряда и бюджет членов
SERIES_TOL = 1e-15
MAX_TERMS = 1_000_000

# При z > 1 - GAUSS_CROSSOVER ряд заменяется формулой Гаусса для z = 1
GAUSS_CROSSOVER = 1e-8


@dataclass(frozen=True)
class Hyp2F1Args:
    """Аргументы 2F1(a, b; c; z), z в [0, 1]"""
    a: float
    b: float
    c: float
    z: float

    def __post_init__(self):
        for name in ("a", "b", "c", "z"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"hyp2f1: {name} must be finite, got {getattr(self, name)}")
        if self.c <= 0 and float(self.c).is_integer():
            raise DomainError(f"hyp2f1: c must not be zero or a negative integer, got {self.c}")
        if not 0.0 <= self.z <= 1.0:
            raise DomainError(f"hyp2f1: z must lie in [0, 1], got {self.z}")


def log_gamma(x: float) -> float:
    """
    ln Γ(x) для x > 0.

    Нужен, чтобы отношение Γ(v-1)/Γ(v+1/2) не переполнялось при больших v.
    """
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"log_gamma: x must be a positive finite number, got {x}")
    return float(special.gammaln(x))


def _gauss_at_one(args: Hyp2F1Args) -> float:
    """Γ(c)Γ(c-a-b) / (Γ(c-a)Γ(c-b)) в лог-пространстве с учётом знаков"""
    a, b, c = args.a, args.b, args.c
    if c - a - b <= 0:
        raise DomainError(f"hyp2f1 at z=1 requires c - a - b > 0, got {c - a - b}")
    # 1/Γ от неположительного целого равна нулю
    for arg in (c - a, c - b):
        if arg <= 0 and float(arg).is_integer():
            return 0.0
    sign = (
        special.gammasgn(c) * special.gammasgn(c - a - b)
        * special.gammasgn(c - a) * special.gammasgn(c - b)
    )
    log_value = (
        special.gammaln(c) + special.gammaln(c - a - b)
        - special.gammaln(c - a) - special.gammaln(c - b)
    )
    return float(sign * math.exp(log_value))


def hyp2f1_series(args: Hyp2F1Args) -> tuple[float, int]:
    """
    Прямое суммирование ряда по рекуррентности членов.

    Returns:
        (значение, число просуммированных членов)
    """
    a, b, c, z = args.a, args.b, args.c, args.z
    term = 1.0
    total = 1.0
    for k in range(MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        if term == 0.0:
            # Полиномиальный случай или z = 0
            return total, k + 1
        total += term
        if abs(term) < SERIES_TOL * abs(total):
            return total, k + 2
    raise ConvergenceError(
        f"hyp2f1({a}, {b}; {c}; {z}) did not converge within {MAX_TERMS} terms"
    )


def hyp2f1(args: Hyp2F1Args) -> float:
    """
    Гипергеометрическая функция Гаусса 2F1(a, b; c; z) на [0, 1].

    Ряд для z <= 1 - 1e-8, иначе формула суммирования Гаусса при z = 1.
    """
    if args.z > 1.0 - GAUSS_CROSSOVER:
        return _gauss_at_one(args)
    value, n_terms = hyp2f1_series(args)
    logger.debug(f"hyp2f1({args.a}, {args.b}; {args.c}; {args.z}) summed {n_terms} terms")
    return value


def hyp2f1_array(a: float, b: float, c: float, z: np.ndarray) -> np.ndarray:
    """
    2F1(a, b; c; z) для массива z с общими a, b, c.

    Тот же критерий обрыва, что и у hyp2f1, но ряд ведётся сразу по всем z;
    используется при построении сеток плотности.
    """
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        return np.empty_like(z)
    Hyp2F1Args(a, b, c, float(z.min()))
    Hyp2F1Args(a, b, c, float(z.max()))

    result = np.empty_like(z)
    near_one = z > 1.0 - GAUSS_CROSSOVER
    if near_one.any():
        result[near_one] = _gauss_at_one(Hyp2F1Args(a, b, c, 1.0))

    zs = z[~near_one]
    term = np.ones_like(zs)
    total = np.ones_like(zs)
    active = np.ones(zs.shape, dtype=bool)
    for k in range(MAX_TERMS):
        if not active.any():
            break
        term[active] *= (a + k) * (b + k) / ((c + k) * (k + 1)) * zs[active]
        total[active] += term[active]
        active &= np.abs(term) >= SERIES_TOL * np.abs(total)
    else:
        raise ConvergenceError(
            f"hyp2f1({a}, {b}; {c}; z) did not converge within {MAX_TERMS} terms "
            f"for {int(active.sum())} of {zs.size} points"
        )
    result[~near_one] = total
    return result
