"""
Отчёты команд и их сериализация: text (6 значащих цифр), csv, json (полная точность)
"""
from typing import Literal

import pandas as pd
from pydantic import BaseModel, Field

OutputFormat = Literal["text", "csv", "json"]
FORMATS: tuple[str, ...] = ("text", "csv", "json")

Scalar = bool | int | float | str | None


class TableData(BaseModel):
    """Таблица с подписями строк и столбцов"""
    index_name: str | None = None
    index: list[str | int | float]
    columns: list[str | int | float]
    data: list[list[float]]

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "TableData":
        return cls(
            index_name=frame.index.name,
            index=frame.index.tolist(),
            columns=frame.columns.tolist(),
            data=frame.to_numpy(dtype=float).tolist(),
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            self.data,
            index=pd.Index(self.index, name=self.index_name),
            columns=self.columns,
        )


class Report(BaseModel):
    """Результат одной команды CLI"""
    command: str
    values: dict[str, Scalar] = Field(default_factory=dict)
    table: TableData | None = None
    outputs: list[str] = Field(default_factory=list)


def format_number(value: float) -> str:
    return f"{value:.6g}"


def _format_scalar(value: Scalar) -> str:
    if isinstance(value, float):
        return format_number(value)
    if value is None:
        return "NA"
    return str(value)


def to_text(report: Report) -> str:
    lines = [f"# {report.command}"]
    lines.extend(f"{key}: {_format_scalar(value)}" for key, value in report.values.items())
    if report.table is not None:
        lines.append(report.table.to_frame().to_string(float_format=format_number))
    lines.extend(f"wrote: {path}" for path in report.outputs)
    return "\n".join(lines) + "\n"


def to_csv(report: Report) -> str:
    """Таблица - как есть с подписями; иначе пары key,value"""
    if report.table is not None:
        return report.table.to_frame().to_csv()
    frame = pd.DataFrame(
        {
            "key": list(report.values),
            "value": [repr(v) if isinstance(v, float) else v for v in report.values.values()],
        }
    )
    return frame.to_csv(index=False)


def to_json(report: Report) -> str:
    return report.model_dump_json(indent=2) + "\n"


def render(report: Report, output_format: OutputFormat = "text") -> str:
    if output_format == "json":
        return to_json(report)
    if output_format == "csv":
        return to_csv(report)
    return to_text(report)
