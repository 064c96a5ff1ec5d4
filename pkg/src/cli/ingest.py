"""
Чтение CSV в набор данных: только числовые ячейки, порядок строк сохраняется
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from pandas.errors import EmptyDataError, ParserError

from src.errors import (
    CsvParseError,
    DatasetError,
    DuplicateLabelError,
    EmptyDatasetError,
    RaggedRowError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """Прямоугольная таблица p именованных числовых столбцов длины n"""
    names: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    source_path: str

    def __post_init__(self):
        if len(self.names) != len(self.columns):
            raise DatasetError("number of labels and columns differ")
        if len({c.size for c in self.columns}) > 1:
            raise RaggedRowError("columns have unequal lengths")

    @property
    def n_rows(self) -> int:
        return int(self.columns[0].size) if self.columns else 0

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[self.names.index(name)]
        except ValueError:
            raise DatasetError(
                f"{self.source_path}: no column named {name!r} (available: {', '.join(self.names)})"
            ) from None

    def select(self, names: list[str] | None) -> "Dataset":
        """Подмножество столбцов в заданном порядке; None - все столбцы"""
        if not names:
            return self
        if len(set(names)) != len(names):
            raise DuplicateLabelError(f"column selection repeats a label: {names}")
        return Dataset(
            names=tuple(names),
            columns=tuple(self.column(name) for name in names),
            source_path=self.source_path,
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(dict(zip(self.names, self.columns)))


def _read_raw(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except EmptyDataError:
        raise EmptyDatasetError(f"{path}: file is empty") from None
    except ParserError as e:
        raise RaggedRowError(f"{path}: {e}") from None


def ingest_csv(path: str | Path, has_header: bool = True) -> Dataset:
    """
    Прочитать CSV (UTF-8, запятая) в Dataset.

    Args:
        path: путь к файлу
        has_header: первая строка - имена столбцов; иначе имена V1..Vp

    Returns:
        Dataset со столбцами float в порядке строк файла
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"{path}: file not found")

    raw = _read_raw(path)
    first_data_line = 2 if has_header else 1

    if has_header:
        names = [str(v).strip() if isinstance(v, str) else "" for v in raw.iloc[0]]
        body = raw.iloc[1:]
    else:
        names = [f"V{j + 1}" for j in range(raw.shape[1])]
        body = raw

    if any(not name for name in names):
        raise DuplicateLabelError(f"{path}: empty column label in header")
    if len(set(names)) != len(names):
        duplicates = sorted({name for name in names if names.count(name) > 1})
        raise DuplicateLabelError(f"{path}: duplicate column labels {duplicates}")
    if body.empty:
        raise EmptyDatasetError(f"{path}: no data rows")

    # Короткие строки pandas дополняет NaN
    missing = body.isna().to_numpy()
    if missing.any():
        row = int(np.argwhere(missing)[0][0])
        raise RaggedRowError(
            f"{path}: row {row + first_data_line} has fewer than {len(names)} fields"
        )

    columns = []
    for j, name in enumerate(names):
        cells = body.iloc[:, j].str.strip()
        values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=float)
        bad = ~np.isfinite(values)
        if bad.any():
            i = int(np.argmax(bad))
            raise CsvParseError(
                str(path), row=i + first_data_line, column=j + 1, value=cells.iloc[i]
            )
        columns.append(values)

    dataset = Dataset(names=tuple(names), columns=tuple(columns), source_path=str(path))
    logger.info(f"Loaded {path}: {dataset.n_rows} rows x {len(names)} columns")
    return dataset
