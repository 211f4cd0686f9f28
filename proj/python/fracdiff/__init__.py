"""Time-fractional diffusion by contour-integral Laplace inversion."""

import json
import os

from ._core import (
    AdmissibilityError,
    ConfigError,
    FracdiffError,
    Kernel,
    KernelFamily,
    NumericalError,
    contour,
    inverse_laplace,
    mittag_leffler,
    suite_names,
)
from . import _core

__all__ = [
    "AdmissibilityError",
    "ConfigError",
    "FracdiffError",
    "Kernel",
    "KernelFamily",
    "NumericalError",
    "benchmark_config",
    "contour",
    "inverse_laplace",
    "mittag_leffler",
    "solve",
    "suite_names",
    "verify",
]


def _as_text(config):
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config) as f:
            return f.read(), os.path.dirname(os.path.abspath(config))
    if isinstance(config, str):
        return config, ""
    return json.dumps(config), ""


def benchmark_config():
    """The built-in constant-order benchmark as a dict."""
    return json.loads(_core.benchmark_config())


def solve(config):
    """Solve the problem described by `config` (dict, JSON text or path).

    Returns a dict with ``times``, ``values`` (times x nodes), ``coordinates``,
    ``diagnostics`` and the fully resolved config.
    """
    text, base = _as_text(config)
    out = _core.solve_json(text, base)
    out["resolved_config"] = json.loads(out["resolved_config"])
    return out


def verify(suite="all", config=None, flip_atom_sign=False):
    """Run a verification suite; returns one dict per check."""
    if config is None:
        return _core.verify_json(suite, "", "", flip_atom_sign)
    text, base = _as_text(config)
    return _core.verify_json(suite, text, base, flip_atom_sign)
