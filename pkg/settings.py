"""
Runtime configuration for the Wilton ripple toolkit.

Defaults live in the Settings dataclass; any field can be overridden through
an environment variable named WILTON_<FIELD> (for example WILTON_NEWTON_TOL).
"""

import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Optional

from wilton_errors import InvalidParameterError

VERSION = "1.0.0"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


@dataclass(frozen=True)
class Settings:
    """Numeric defaults shared by every module"""
    invert_rel_tol: float = 1e-13
    near_resonance_tol: float = 1e-10
    kernel_residual_tol: float = 1e-11
    newton_tol: float = 1e-12
    newton_max_iters: int = 25
    newton_max_halvings: int = 8
    continuation_max_halvings: int = 4
    default_a_max: float = 0.05
    default_amplitude: float = 0.01
    resonance_tol: float = 1e-9
    spectral_tail_tol: float = 1e-13
    min_truncation: int = 32
    fd_step: float = 1e-6
    workers: int = 4


def load_settings(environ: Optional[dict] = None, **overrides) -> Settings:
    """Build Settings from defaults, WILTON_* variables and explicit overrides"""
    environ = os.environ if environ is None else environ
    values = {}
    for f in fields(Settings):
        key = f"WILTON_{f.name.upper()}"
        raw = environ.get(key)
        if raw is None:
            continue
        try:
            values[f.name] = int(raw) if f.type is int else float(raw)
        except ValueError:
            raise InvalidParameterError(
                f"Environment variable {key}={raw!r} is not a number",
                suggestions=[f"unset {key} or give it a numeric value"],
            )
    settings = replace(Settings(), **values)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(settings, **overrides) if overrides else settings


DEFAULT_SETTINGS = Settings()


def configure_logging(verbose: bool = False, quiet: bool = False):
    """Apply the toolkit log format; called once by the command-line entry point"""
    level = logging.INFO
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)
