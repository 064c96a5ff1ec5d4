#!/usr/bin/env python3
"""
Загрузка снимка CSV для примеров (рыбы/морские птицы, рождаемость/смертность).

Использование:
    python scripts/fetch_fixtures.py --url <csv-url> --name fish_seabirds \\
        --rename Fish=fish --rename Seabirds=seabirds --keep fish,seabirds
    python scripts/fetch_fixtures.py --file births_deaths_export.csv --name births_deaths \\
        --rename "Death rate=death" --rename "Birth rate=birth" --keep death,birth

Логика:
1. Скачать файл (httpx, повторы через tenacity) или прочитать локальный CSV (--file)
2. Переименовать и отобрать столбцы
3. Проверить через ingest_csv (числа, прямоугольность, уникальные имена)
4. Записать в data/<name>.csv; источник указывается в docs/DATA.md
"""
import argparse
import io
import logging
import sys
import tempfile
from pathlib import Path

import httpx
import pandas as pd
from tenacity import (
    retry,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

# Добавляем корень проекта в PYTHONPATH
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli.ingest import ingest_csv
from src.errors import GencorrError

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent.parent / "data"


@retry(
    retry=retry_if_exception_type(httpx.TransportError),
    stop=stop_after_attempt(4),
    wait=wait_exponential(multiplier=1, min=1, max=10),
    reraise=True,
)
def download(url: str, timeout: float = 30.0) -> str:
    """Текст CSV по URL"""
    with httpx.Client(timeout=timeout, follow_redirects=True) as client:
        response = client.get(url)
        response.raise_for_status()
        return response.text


def read_local(path: Path) -> str:
    """Текст локального CSV"""
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    return path.read_text(encoding="utf-8")


def parse_renames(pairs: list[str]) -> dict[str, str]:
    renames = {}
    for pair in pairs:
        old, sep, new = pair.partition("=")
        if not sep or not old.strip() or not new.strip():
            raise argparse.ArgumentTypeError(f"rename must look like old=new, got {pair!r}")
        renames[old.strip()] = new.strip()
    return renames


def build_snapshot(text: str, renames: dict[str, str], keep: list[str] | None) -> pd.DataFrame:
    frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
    frame = frame.rename(columns=renames)
    if keep:
        missing = [name for name in keep if name not in frame.columns]
        if missing:
            raise KeyError(f"columns not found after renaming: {missing}")
        frame = frame[keep]
    return frame


def validate_and_write(frame: pd.DataFrame, target: Path) -> Path:
    """Снимок записывается только после успешного ingest_csv"""
    with tempfile.TemporaryDirectory() as tmp:
        candidate = Path(tmp) / target.name
        frame.to_csv(candidate, index=False)
        dataset = ingest_csv(candidate)
    target.parent.mkdir(parents=True, exist_ok=True)
    dataset.to_frame().to_csv(target, index=False)
    logger.info(f"Saved {target}: {dataset.n_rows} rows, columns {', '.join(dataset.names)}")
    return target


def main():
    parser = argparse.ArgumentParser(description="Загрузка CSV-снимка данных в data/")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--url", help="Адрес CSV-файла")
    source.add_argument("--file", type=Path, help="Локальный CSV (например, выгрузка из R)")
    parser.add_argument("--name", required=True, help="Имя снимка (без .csv)")
    parser.add_argument(
        "--rename",
        action="append",
        default=[],
        help="Переименование столбца old=new (можно повторять)",
    )
    parser.add_argument("--keep", default=None, help="Оставить столбцы через запятую")
    parser.add_argument("--data-dir", type=Path, default=DATA_DIR, help="Каталог для снимков")
    args = parser.parse_args()

    keep = [name.strip() for name in args.keep.split(",")] if args.keep else None
    try:
        renames = parse_renames(args.rename)
        text = download(args.url) if args.url else read_local(args.file)
        frame = build_snapshot(text, renames, keep)
        validate_and_write(frame, args.data_dir / f"{args.name}.csv")
    except (argparse.ArgumentTypeError, KeyError, FileNotFoundError, GencorrError) as e:
        logger.error(f"Snapshot rejected: {e}")
        sys.exit(1)
    except httpx.HTTPError as e:
        logger.error(f"Download failed: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
