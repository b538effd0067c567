"""Numerical laboratory for extended Ricci flow with boundary and mean curvature flow."""

from .flows import NumericalAbort
from .scenarios import ConfigError, build_scenario, builtin_spec, list_scenarios

__version__ = "0.1.0"

__all__ = ["ConfigError", "NumericalAbort", "build_scenario", "builtin_spec", "list_scenarios",
           "__version__"]
