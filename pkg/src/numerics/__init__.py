# Специальные функции
from src.numerics.specfun import Hyp2F1Args, hyp2f1, log_gamma

__all__ = ["Hyp2F1Args", "hyp2f1", "log_gamma"]
