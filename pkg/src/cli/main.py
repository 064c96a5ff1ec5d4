#!/usr/bin/env python3
"""
gencorr - обобщённые корреляции и точный вывод о коэффициенте корреляции.

Использование:
    gencorr pearson --input data/mtcars.csv --columns mpg,hp
    gencorr matrix --input data/mtcars.csv --columns mpg,hp --format json
    gencorr taraldsen pvalue --n 229 --obs-r -0.13 --tail left
    gencorr taraldsen table --out table1.csv
    gencorr boot ci --input data/fish_seabirds.csv --columns fish,seabirds --seed 99

Коды выхода: 0 - успех, 1 - ошибка вычисления или данных, 2 - ошибка использования.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.cli.ingest import Dataset, ingest_csv
from src.cli.report import FORMATS, OutputFormat, Report, TableData, render
from src.config import get_settings, load_defaults
from src.dependence.gencorr import (
    classify_dependence,
    dep_meas,
    gencorr_matrix,
    pearson,
    rstar,
    rstar_given,
)
from src.dependence.kernelreg import PairedSample
from src.errors import DatasetError, GencorrError
from src.inference import bootstrap, taraldsen
from src.inference.taraldsen import TaraldsenParams

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

Command = Literal[
    "pearson",
    "rstar",
    "matrix",
    "depmeas",
    "classify",
    "taraldsen pvalue",
    "taraldsen quantile",
    "taraldsen table",
    "taraldsen density",
    "taraldsen ci",
    "taraldsen test",
    "fisherz",
    "boot ci",
    "boot pvalue",
]

DATA_COMMANDS = {"pearson", "rstar", "matrix", "depmeas", "classify", "boot ci", "boot pvalue"}
PAIR_COMMANDS = DATA_COMMANDS - {"matrix"}

# Флаги, обязательные для команды (имя поля RunConfig -> флаг)
REQUIRED_FIELDS: dict[str, tuple[str, ...]] = {
    "taraldsen pvalue": ("n", "obs_r"),
    "taraldsen quantile": ("n", "c"),
    "taraldsen density": ("n",),
    "taraldsen ci": ("n",),
    "taraldsen test": ("n", "obs_r"),
    "fisherz": ("n", "obs_r"),
}


class RunConfig(BaseModel):
    """Проверенные параметры одного запуска"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    input: Path | None = None
    columns: list[str] | None = None
    has_header: bool = True
    n: int | None = Field(default=None, ge=3)
    rho: float = Field(default=0.0, ge=-1.0, le=1.0)
    obs_r: float | None = Field(default=None, ge=-1.0, le=1.0)
    c: float | None = Field(default=None, gt=0.0, lt=1.0)
    tail: taraldsen.Tail = "two"
    level: float = Field(default=0.95, gt=0.0, lt=1.0)
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    J: int = Field(default=999, ge=bootstrap.MIN_REPLICATES)
    seed: int = 0
    step: float = Field(default=0.001, gt=0.0, le=0.5)
    epsilon: float = Field(default=0.01, gt=0.0)
    direction: bootstrap.Direction = "i|j"
    sample_sizes: list[int] | None = None
    probs: list[float] | None = None
    workers: int = Field(default=1, ge=1)
    out: Path | None = None
    output_format: OutputFormat = "text"

    @model_validator(mode="after")
    def check_command_fields(self) -> "RunConfig":
        if self.command in DATA_COMMANDS and self.input is None:
            raise ValueError(f"{self.command} requires --input")
        if self.command in PAIR_COMMANDS and self.columns is not None and len(self.columns) != 2:
            raise ValueError(f"{self.command} takes exactly two columns, got {self.columns}")
        if self.command == "matrix" and self.columns is not None and len(self.columns) < 2:
            raise ValueError("matrix needs at least two columns")
        missing = [
            name for name in REQUIRED_FIELDS.get(self.command, ()) if getattr(self, name) is None
        ]
        if missing:
            flags = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise ValueError(f"{self.command} requires {flags}")
        if self.command == "fisherz" and abs(self.obs_r) >= 1.0:
            raise ValueError("fisherz requires |r| < 1")
        return self


# ============================================================================
# Команды
# ============================================================================


def _load(config: RunConfig) -> Dataset:
    return ingest_csv(config.input, has_header=config.has_header).select(config.columns)


def _load_pair(config: RunConfig) -> tuple[str, str, PairedSample]:
    """Пара (X_i, X_j) = (первый, второй) выбранный столбец"""
    dataset = _load(config)
    if len(dataset.names) != 2:
        raise DatasetError(
            f"{dataset.source_path} has {len(dataset.names)} columns; choose two with --columns"
        )
    i, j = dataset.names
    return i, j, PairedSample(x=dataset.column(i), y=dataset.column(j))


def _cmd_pearson(config: RunConfig) -> Report:
    i, j, sample = _load_pair(config)
    return Report(
        command=config.command,
        values={"i": i, "j": j, "n": sample.n, "pearson": pearson(sample)},
    )


def _cmd_rstar(config: RunConfig) -> Report:
    i, j, sample = _load_pair(config)
    pair = rstar(sample, workers=config.workers)
    return Report(
        command=config.command,
        values={
            "i": i,
            "j": j,
            "n": sample.n,
            "r_star_i_given_j": pair.r_star_i_given_j,
            "r_star_j_given_i": pair.r_star_j_given_i,
            "cov_sign": pair.cov_sign,
        },
    )


def _cmd_matrix(config: RunConfig) -> Report:
    dataset = _load(config)
    matrix = gencorr_matrix(dataset.to_frame(), workers=config.workers)
    frame = matrix.to_frame()
    report = Report(
        command=config.command,
        values={"n": dataset.n_rows, "p": len(matrix.labels)},
        table=TableData.from_frame(frame),
    )
    if config.out is not None:
        frame.to_csv(config.out)
        report.outputs.append(str(config.out))
    return report


def _cmd_depmeas(config: RunConfig) -> Report:
    i, j, sample = _load_pair(config)
    return Report(
        command=config.command,
        values={"i": i, "j": j, "n": sample.n, "dep_meas": dep_meas(sample, config.workers)},
    )


def _cmd_classify(config: RunConfig) -> Report:
    i, j, sample = _load_pair(config)
    pair = rstar(sample, workers=config.workers)
    return Report(
        command=config.command,
        values={
            "i": i,
            "j": j,
            "r_star_i_given_j": pair.r_star_i_given_j,
            "r_star_j_given_i": pair.r_star_j_given_i,
            "epsilon": config.epsilon,
            "dependence": classify_dependence(pair, config.epsilon),
        },
    )


def _params(config: RunConfig) -> TaraldsenParams:
    return TaraldsenParams.from_sample_size(config.n, config.rho)


def _cmd_pvalue(config: RunConfig) -> Report:
    pv = taraldsen.p_value(_params(config), config.obs_r, config.tail, config.step)
    return Report(
        command=config.command,
        values={
            "n": config.n,
            "rho": config.rho,
            "obs_r": config.obs_r,
            "tail": config.tail,
            "p_value": pv,
        },
    )


def _cmd_quantile(config: RunConfig) -> Report:
    q = taraldsen.quantile(_params(config), config.c, config.step)
    return Report(
        command=config.command,
        values={"n": config.n, "rho": config.rho, "c": config.c, "quantile": q},
    )


def _cmd_table(config: RunConfig) -> Report:
    table = taraldsen.table1(config.sample_sizes, config.probs, config.step)
    report = Report(command=config.command, table=TableData.from_frame(table))
    if config.out is not None:
        table.to_csv(config.out)
        report.outputs.append(str(config.out))
    return report


def _cmd_density(config: RunConfig) -> Report:
    grid = taraldsen.build_grid(_params(config), config.step)
    report = Report(
        command=config.command,
        values={
            "n": config.n,
            "rho": config.rho,
            "step": config.step,
            "points": len(grid),
            "analytic_mass": taraldsen.analytic_mass(grid),
        },
    )
    if config.out is not None:
        taraldsen.write_grid_csv(grid, config.out)
        report.outputs.append(str(config.out))
    else:
        report.table = TableData.from_frame(grid.to_frame().set_index("r"))
    return report


def _cmd_ci(config: RunConfig) -> Report:
    lo, up = taraldsen.confidence_interval(_params(config), config.level, config.step)
    return Report(
        command=config.command,
        values={"n": config.n, "rho": config.rho, "level": config.level, "lower": lo, "upper": up},
    )


def _cmd_test(config: RunConfig) -> Report:
    result = taraldsen.significance(
        config.n, config.obs_r, config.tail, alpha=config.alpha, rho0=config.rho, step=config.step
    )
    return Report(
        command=config.command,
        values={
            "n": result.n,
            "rho0": result.rho0,
            "obs_r": result.observed_r,
            "tail": result.tail,
            "alpha": result.alpha,
            "p_value": result.p_value,
            "critical_lower": result.critical[0],
            "critical_upper": result.critical[1],
            "decision": result.decision,
        },
    )


def _cmd_fisherz(config: RunConfig) -> Report:
    fz = taraldsen.fisher_z(config.obs_r, config.n)
    return Report(
        command=config.command,
        values={"r": config.obs_r, "n": config.n, "z": fz.z, "approx_sd": fz.approx_sd},
    )


def _ensemble(config: RunConfig) -> tuple[dict, bootstrap.BootstrapEnsemble]:
    i, j, sample = _load_pair(config)
    ensemble = bootstrap.bootstrap_rstar(
        sample.x,
        sample.y,
        J=config.J,
        seed=config.seed,
        direction=config.direction,
        workers=config.workers,
    )
    observed_sample = sample.flipped() if config.direction == "i|j" else sample
    values = {
        "i": i,
        "j": j,
        "n": sample.n,
        "direction": config.direction,
        "observed_r_star": rstar_given(observed_sample, workers=config.workers),
        "J": config.J,
        "seed": config.seed,
        "excluded": ensemble.excluded,
        "rho0": config.rho,
        "tail": config.tail,
    }
    return values, ensemble


def _write_ensemble(config: RunConfig, ensemble, report: Report) -> Report:
    if config.out is not None:
        bootstrap.write_ensemble_csv(ensemble, config.out)
        report.outputs.append(str(config.out))
    return report


def _cmd_boot_ci(config: RunConfig) -> Report:
    values, ensemble = _ensemble(config)
    bounds = bootstrap.interval(ensemble, config.level, config.tail)
    values.update(
        level=config.level,
        lower=bounds[0],
        upper=bounds[1],
        decision=bootstrap.accept_reject(bounds, config.rho),
    )
    return _write_ensemble(config, ensemble, Report(command=config.command, values=values))


def _cmd_boot_pvalue(config: RunConfig) -> Report:
    values, ensemble = _ensemble(config)
    values["p_value"] = bootstrap.bootstrap_p_value(ensemble, config.rho, config.tail)
    return _write_ensemble(config, ensemble, Report(command=config.command, values=values))


HANDLERS: dict[str, Callable[[RunConfig], Report]] = {
    "pearson": _cmd_pearson,
    "rstar": _cmd_rstar,
    "matrix": _cmd_matrix,
    "depmeas": _cmd_depmeas,
    "classify": _cmd_classify,
    "taraldsen pvalue": _cmd_pvalue,
    "taraldsen quantile": _cmd_quantile,
    "taraldsen table": _cmd_table,
    "taraldsen density": _cmd_density,
    "taraldsen ci": _cmd_ci,
    "taraldsen test": _cmd_test,
    "fisherz": _cmd_fisherz,
    "boot ci": _cmd_boot_ci,
    "boot pvalue": _cmd_boot_pvalue,
}


def run(config: RunConfig) -> tuple[int, str]:
    """
    Выполнить команду.

    Returns:
        (код выхода, текст): отчёт в выбранном формате либо сообщение об ошибке
    """
    try:
        report = HANDLERS[config.command](config)
    except GencorrError as e:
        logger.error(f"{config.command} failed: {e}")
        return 1, str(e)
    return 0, render(report, config.output_format)


# ============================================================================
# Разбор аргументов
# ============================================================================


def _csv_list(cast: Callable[[str], object]) -> Callable[[str], list]:
    def parse(text: str) -> list:
        items = [item.strip() for item in text.split(",") if item.strip()]
        try:
            return [cast(item) for item in items]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list: {text!r}") from None

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text", help="Формат отчёта")
    common.add_argument("--seed", type=int, default=None, help="Seed (по умолчанию GENCORR_SEED)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Подробный лог (DEBUG)")
    verbosity.add_argument("--quiet", action="store_true", help="Только предупреждения")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", type=Path, required=True, help="CSV-файл с данными")
    data.add_argument("--columns", type=_csv_list(str), default=None, help="Столбцы через запятую")
    data.add_argument("--no-header", action="store_true", help="В файле нет строки заголовка")
    data.add_argument("--workers", type=int, default=None, help="Потоки для подгонки")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", type=Path, default=None, help="Файл для выгрузки данных")

    exact = argparse.ArgumentParser(add_help=False)
    exact.add_argument("--n", type=int, required=True, help="Объём выборки")
    exact.add_argument("--rho", type=float, default=0.0, help="Гипотетическое rho")
    exact.add_argument("--step", type=float, default=None, help="Шаг сетки r")

    tail = argparse.ArgumentParser(add_help=False)
    tail.add_argument("--tail", choices=taraldsen.TAILS, default="two", help="Сторона теста")
    boot_tail = argparse.ArgumentParser(add_help=False)
    boot_tail.add_argument(
        "--tail",
        choices=taraldsen.TAILS,
        default="two",
        help="left: [r*_(k), 1], right: [-1, r*_(J+1-k)]; одинаково для ci и pvalue",
    )

    parser = argparse.ArgumentParser(
        prog="gencorr",
        description="Обобщённые корреляции r*, MOD и точный вывод о коэффициенте корреляции",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("pearson", parents=[common, data], help="Корреляция Пирсона")
    commands.add_parser("rstar", parents=[common, data], help="r*(i|j) и r*(j|i)")
    commands.add_parser("matrix", parents=[common, data, out], help="Матрица R*")
    commands.add_parser("depmeas", parents=[common, data], help="Мера зависимости MOD")
    classify = commands.add_parser("classify", parents=[common, data], help="Тип зависимости")
    classify.add_argument("--epsilon", type=float, default=None, help="Порог малого значения")

    fisherz = commands.add_parser("fisherz", parents=[common], help="Преобразование Фишера")
    fisherz.add_argument("--r", dest="obs_r", type=float, required=True)
    fisherz.add_argument("--n", type=int, required=True)

    exact_commands = commands.add_parser("taraldsen", help="Точная плотность r")
    actions = exact_commands.add_subparsers(dest="action", required=True)
    pvalue = actions.add_parser("pvalue", parents=[common, exact, tail], help="p-значение")
    pvalue.add_argument("--obs-r", type=float, required=True, help="Наблюдаемое r")
    quantile = actions.add_parser("quantile", parents=[common, exact], help="Квантиль")
    quantile.add_argument("--c", type=float, required=True, help="Накопленная вероятность")
    table = actions.add_parser("table", parents=[common, out], help="Таблица критических значений")
    table.add_argument("--step", type=float, default=None)
    table.add_argument("--sizes", dest="sample_sizes", type=_csv_list(int), default=None)
    table.add_argument("--probs", type=_csv_list(float), default=None)
    actions.add_parser("density", parents=[common, exact, out], help="Сетка плотности")
    ci = actions.add_parser("ci", parents=[common, exact], help="Двусторонний интервал")
    ci.add_argument("--level", type=float, default=0.95)
    test = actions.add_parser("test", parents=[common, exact, tail], help="Проверка H0: rho = rho0")
    test.add_argument("--obs-r", type=float, required=True)
    test.add_argument("--alpha", type=float, default=0.05)

    boot_commands = commands.add_parser("boot", help="Bootstrap максимальной энтропии для r*")
    boot_actions = boot_commands.add_subparsers(dest="action", required=True)
    for name, help_text in (("ci", "Интервал по порядковым статистикам"), ("pvalue", "p-значение")):
        boot = boot_actions.add_parser(name, parents=[common, data, out, boot_tail], help=help_text)
        boot.add_argument("--J", type=int, default=None, help="Число реплик")
        boot.add_argument("--rho0", dest="rho", type=float, default=0.0)
        boot.add_argument("--direction", choices=("i|j", "j|i"), default="i|j")
        if name == "ci":
            boot.add_argument("--level", type=float, default=0.95)

    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Флаги -> настройки и YAML -> значения по умолчанию"""
    settings = get_settings()
    defaults = load_defaults(settings.config_path)
    fields = vars(args).copy()

    action = fields.pop("action", None)
    command = f"{fields.pop('command')} {action}" if action else args.command
    fields.pop("verbose", None)
    fields.pop("quiet", None)

    config = {key: value for key, value in fields.items() if value is not None}
    config["command"] = command
    config["output_format"] = config.pop("format", "text")
    config["has_header"] = not config.pop("no_header", False)
    config.setdefault("seed", settings.seed)
    config.setdefault("workers", settings.workers)
    config.setdefault("step", defaults.taraldsen.step)
    config.setdefault("J", defaults.bootstrap.replicates)
    config.setdefault("epsilon", defaults.dependence.epsilon)
    return RunConfig(**config)


def configure_logging(args: argparse.Namespace) -> None:
    level = get_settings().log_level.upper()
    if getattr(args, "verbose", False):
        level = "DEBUG"
    elif getattr(args, "quiet", False):
        level = "WARNING"
    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT, level=level, force=True)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)

    try:
        config = build_config(args)
    except ValidationError as e:
        problems = "; ".join(err["msg"] for err in e.errors())
        parser.print_usage(sys.stderr)
        print(f"gencorr: error: {problems}", file=sys.stderr)
        return 2

    status, text = run(config)
    if status == 0:
        sys.stdout.write(text)
    else:
        print(f"gencorr: error: {text}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
