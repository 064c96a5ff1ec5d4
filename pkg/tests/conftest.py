"""
Pytest fixtures
"""
from pathlib import Path

import numpy as np
import pytest

from src.cli.ingest import Dataset, ingest_csv
from src.config import get_settings, load_defaults
from src.dependence.kernelreg import PairedSample

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture
def rng():
    """Генератор с фиксированным seed"""
    return np.random.default_rng(20240101)


@pytest.fixture
def mtcars() -> Dataset:
    """mtcars: 32 автомобиля, 11 числовых столбцов"""
    return ingest_csv(DATA_DIR / "mtcars.csv")


@pytest.fixture
def mpg_hp(mtcars) -> PairedSample:
    """Пара (X_i, X_j) = (mpg, hp)"""
    return PairedSample(x=mtcars.column("mpg"), y=mtcars.column("hp"))


def pytest_addoption(parser):
    parser.addoption(
        "--require-data",
        action="store_true",
        default=False,
        help="Отсутствующий снимок в data/ - ошибка, а не пропуск теста",
    )


def load_snapshot(name: str, required: bool, data_dir: Path = DATA_DIR) -> Dataset:
    """Снимок из data/; без него тест пропускается, с required=True падает"""
    path = data_dir / f"{name}.csv"
    if not path.exists():
        message = f"{path.name} not fetched (see scripts/fetch_fixtures.py)"
        if required:
            pytest.fail(message)
        pytest.skip(message)
    return ingest_csv(path)


@pytest.fixture
def snapshot(request):
    required = request.config.getoption("--require-data")
    return lambda name: load_snapshot(name, required)


@pytest.fixture
def write_csv(tmp_path):
    """Записать текст во временный CSV и вернуть путь"""

    def write(text: str, name: str = "data.csv") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write


@pytest.fixture
def clean_settings(monkeypatch):
    """Сброс кэша настроек вокруг теста с переменными окружения"""
    get_settings.cache_clear()
    load_defaults.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()
    load_defaults.cache_clear()
