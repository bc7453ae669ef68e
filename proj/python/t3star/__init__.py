"""Type III* sums of squares, estimable functions and lagniappe df."""

import json
import os

from ._core import (
    Error,
    InputError,
    NumericalDegeneracyError,
    numerical_rank,
    subspace_distance,
    type3_effect,
)
from . import _core

__all__ = [
    "Error",
    "InputError",
    "NumericalDegeneracyError",
    "anova",
    "contrasts",
    "describe",
    "numerical_rank",
    "subspace_distance",
    "type3_effect",
    "verify",
]


def _path(data):
    return os.fspath(data)


def anova(data, model, method="type3star", intercept=False, factors=(), covariates=()):
    """ANOVA table for a CSV file as a dict (rows, error line, diagnostics)."""
    return json.loads(
        _core.anova_json(_path(data), model, method, intercept, list(factors), list(covariates))
    )


def contrasts(data, model, method="type3star", factors=(), covariates=()):
    """Tested cell-mean contrasts per effect."""
    return json.loads(_core.contrasts_json(_path(data), model, method, list(factors), list(covariates)))


def describe(data, model, factors=(), covariates=()):
    """Estimable/lagniappe split, span overlaps and unaccounted directions."""
    return json.loads(_core.describe_json(_path(data), model, list(factors), list(covariates)))


def verify(check="all", cases=500, seed=42):
    """Randomized identity checks; the report as a dict."""
    return json.loads(_core.verify_json(check, cases, seed))
