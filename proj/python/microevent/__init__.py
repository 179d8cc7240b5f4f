"""Release micro-event detection in developer forum messages.

Thin wrappers over the C++ core. Reports and sweep results come back as
plain dicts parsed from the JSON the core writes.
"""

import json
import os

from . import _core
from ._core import (
    ConfigError,
    Error,
    FitError,
    InputError,
    SeparationError,
    cliffs_delta,
    clean_tokens,
    fit_logistic,
    holm_bonferroni,
    permutation_test,
    pr_auc,
    pr_auc_mean,
    roc_auc,
    sentiment,
)

__version__ = _core.__version__


def _overrides(out, seed, formats, extra):
    doc = dict(extra or {})
    if out is not None:
        doc["output_dir"] = os.fspath(out)
    if seed is not None:
        doc["seed"] = int(seed)
    if formats is not None:
        doc.setdefault("report", {})["formats"] = list(formats)
    return json.dumps(doc) if doc else ""


def resolved_config(config="", **overrides):
    """Resolved config dict plus its hash."""
    return json.loads(_core.resolved_config(os.fspath(config), json.dumps(overrides) if overrides else ""))


def run(config, out=None, seed=None, formats=None, overrides=None):
    """Runs every stage and returns report.json as a dict (no run_info)."""
    return json.loads(_core.run_pipeline(os.fspath(config), _overrides(out, seed, formats, overrides)))


def sweep(config, out=None, seed=None, overrides=None):
    """Detectability sweep over synthetic instances."""
    return json.loads(_core.run_sweep(os.fspath(config), _overrides(out, seed, None, overrides)))


def render_markdown(report):
    return _core.render_markdown(json.dumps(report))


__all__ = [
    "ConfigError", "Error", "FitError", "InputError", "SeparationError",
    "cliffs_delta", "clean_tokens", "fit_logistic", "holm_bonferroni", "permutation_test",
    "pr_auc", "pr_auc_mean", "roc_auc", "sentiment",
    "resolved_config", "run", "sweep", "render_markdown",
]
