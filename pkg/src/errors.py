"""
Иерархия исключений пакета
"""


class GencorrError(Exception):
    """Базовая ошибка вычислений; CLI отвечает кодом выхода 1"""


class DomainError(GencorrError, ValueError):
    """Нарушено предусловие операции"""


class DegenerateInputError(GencorrError, ValueError):
    """Вырожденные данные: константный столбец, мало различных значений"""


class ConvergenceError(GencorrError, ArithmeticError):
    """Ряд не сошёлся за отведённое число членов"""


class InsufficientReplicatesError(GencorrError):
    """Слишком мало bootstrap-реплик для интервала или слишком много исключённых"""


class PairFitError(GencorrError):
    """Ошибка подгонки для конкретной пары переменных матрицы R*"""

    def __init__(self, row_label: str, column_label: str, cause: Exception):
        self.row_label = row_label
        self.column_label = column_label
        self.cause = cause
        super().__init__(f"r*({row_label}|{column_label}) failed: {cause}")


class DatasetError(GencorrError, ValueError):
    """Ошибка чтения набора данных"""


class CsvParseError(DatasetError):
    """Ячейка не разобрана как число (row, column - с единицы)"""

    def __init__(self, path: str, row: int, column: int, value: str):
        self.path = path
        self.row = row
        self.column = column
        self.value = value
        super().__init__(
            f"{path}: cannot parse {value!r} as a number at row {row}, column {column}"
        )


class RaggedRowError(DatasetError):
    """Строка с неверным числом полей"""


class DuplicateLabelError(DatasetError):
    """Повторяющиеся или пустые имена столбцов"""


class EmptyDatasetError(DatasetError):
    """В файле нет строк с данными"""
