"""
Конфигурация: переменные окружения GENCORR_* и числовые умолчания из YAML
"""
from functools import lru_cache
from pathlib import Path

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

DEFAULTS_PATH = Path(__file__).parent.parent / "config" / "defaults.yaml"


class Settings(BaseSettings):
    """Настройки приложения"""

    model_config = SettingsConfigDict(
        env_prefix="GENCORR_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Seed по умолчанию для bootstrap (GENCORR_SEED)
    seed: int = 2024

    log_level: str = "INFO"

    # Размер пула потоков для CV и bootstrap
    workers: int = Field(default=1, ge=1)

    config_path: Path = DEFAULTS_PATH


class TaraldsenDefaults(BaseModel):
    step: float = Field(default=0.001, gt=0, le=0.01)
    table_sample_sizes: list[int] = [5, 10, 15, 20, 25, 30, 40, 70, 90, 100, 150]
    table_probs: list[float] = [0.01, 0.025, 0.05, 0.1, 0.9, 0.95, 0.975, 0.99]


class KernelDefaults(BaseModel):
    cv_grid_points: int = Field(default=41, ge=5)
    cv_span_decades: float = Field(default=3.0, gt=0)
    flat_fit_tol: float = Field(default=1e-9, gt=0)


class BootstrapDefaults(BaseModel):
    replicates: int = Field(default=999, ge=99)
    trim: float = Field(default=0.10, ge=0, lt=0.5)
    max_excluded_share: float = Field(default=0.05, ge=0, lt=1)


class DependenceDefaults(BaseModel):
    epsilon: float = Field(default=0.01, gt=0)
    zero_cov_tol: float = Field(default=1e-12, gt=0)


class Defaults(BaseModel):
    """Числовые умолчания (config/defaults.yaml)"""

    taraldsen: TaraldsenDefaults = TaraldsenDefaults()
    kernel: KernelDefaults = KernelDefaults()
    bootstrap: BootstrapDefaults = BootstrapDefaults()
    dependence: DependenceDefaults = DependenceDefaults()


@lru_cache()
def get_settings() -> Settings:
    """Получить настройки (кэшируется)"""
    return Settings()


@lru_cache()
def load_defaults(path: Path | None = None) -> Defaults:
    """Загрузить числовые умолчания из YAML; без файла - встроенные значения"""
    config_path = path or get_settings().config_path
    if not config_path.exists():
        return Defaults()
    with open(config_path, encoding="utf-8") as f:
        return Defaults.model_validate(yaml.safe_load(f) or {})
