"""Configuration, orchestration and artifacts of the els command line."""

from .commands import cmd_analyze, cmd_run, cmd_sweep, cmd_verify, execute_run, expand_sweep
from .config import RunConfig, load_config, parse_config
from .main import build_parser, main
from .serialization import load_trajectory, write_trajectory
from .verification import checks_frame, run_checks

__all__ = [
    "cmd_analyze",
    "cmd_run",
    "cmd_sweep",
    "cmd_verify",
    "execute_run",
    "expand_sweep",
    "RunConfig",
    "load_config",
    "parse_config",
    "build_parser",
    "main",
    "load_trajectory",
    "write_trajectory",
    "checks_frame",
    "run_checks",
]
