"""Cubic integer programs and polyhedral checks for the unconstrained traveling tournament problem."""

from .instances import generate, parse_robinx, write_robinx
from .kernels import BACKEND
from .lp import Exact, Float, LpResult, Status, solve_external, solve_simplex
from .model import BuildOptions, Model, build, export_lp, export_mps, relax, size_report
from .schedule import Instance, Tournament, as_point, total_distance, validate_tournament

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BuildOptions", "Exact", "Float", "Instance", "LpResult", "Model", "Status", "Tournament",
    "as_point", "build", "export_lp", "export_mps", "generate", "parse_robinx", "relax", "size_report",
    "solve_external", "solve_simplex", "total_distance", "validate_tournament", "write_robinx",
]
