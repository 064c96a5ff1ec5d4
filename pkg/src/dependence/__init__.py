# Меры зависимости: ядерная регрессия и обобщённые корреляции
from src.dependence.kernelreg import KernelFit, LinearFit, PairedSample

__all__ = ["KernelFit", "LinearFit", "PairedSample"]
