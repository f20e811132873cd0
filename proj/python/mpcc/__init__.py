"""Interior-point solvers for QPs with complementarity constraints."""

from ._core import builtin_names, solve_builtin, solve_json, solve_qpcc

__all__ = ["builtin_names", "solve_builtin", "solve_json", "solve_qpcc"]
