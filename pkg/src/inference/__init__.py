# Статистический вывод: точная плотность и bootstrap
from src.inference.taraldsen import (
    DensityGrid,
    TaraldsenParams,
    build_grid,
    cumulative,
    density,
    fisher_z,
    p_value,
    quantile,
    table1,
)

__all__ = [
    "DensityGrid",
    "TaraldsenParams",
    "build_grid",
    "cumulative",
    "density",
    "fisher_z",
    "p_value",
    "quantile",
    "table1",
]
