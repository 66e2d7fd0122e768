"""Sparse additive models fitted with penalized truncated-power splines.

The heavy lifting happens in the compiled ``_addsel`` extension. This module
adds a keyword-argument front end so a fit is one call::

    import addsel
    data = addsel.generate_example1(n=400, K=10, seed=1)
    fit = addsel.fit(data["y"], data["x"], method="pwlsm", two_stage=True)
    fit.selected            # covariate indices kept in the model
    addsel.predict(fit, data["x"])
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from ._addsel import (
    AllSaturated,
    BasisConfig,
    ComponentEstimate,
    Error,
    FitResult,
    InvalidArgument,
    KnotRule,
    Method,
    MissingFit,
    ModelSpec,
    NumericalFailure,
    ParseError,
    SolverConfig,
    Stage,
    TooFewDistinctValues,
    TuningConfig,
    WeightRule,
    deserialize_fit,
    evaluate_component,
    export_curves,
    generate_example1,
    generate_example2,
    mgcv_score,
    predict as _predict,
    serialize_fit,
    two_stage_refit,
)
from ._addsel import fit as _fit

__all__ = [
    "AllSaturated",
    "BasisConfig",
    "ComponentEstimate",
    "Error",
    "FitResult",
    "InvalidArgument",
    "KnotRule",
    "Method",
    "MissingFit",
    "ModelSpec",
    "NumericalFailure",
    "ParseError",
    "SolverConfig",
    "Stage",
    "TooFewDistinctValues",
    "TuningConfig",
    "WeightRule",
    "deserialize_fit",
    "evaluate_component",
    "export_curves",
    "fit",
    "generate_example1",
    "generate_example2",
    "make_spec",
    "mgcv_score",
    "predict",
    "serialize_fit",
    "two_stage_refit",
]

_METHODS = {"olsm": Method.OLSM, "wlsm": Method.WLSM, "pwlsm": Method.PWLSM}


def make_spec(
    method: str = "pwlsm",
    *,
    knots: int = 15,
    order: int = 3,
    gamma: float = 1.5,
    grid_size: int = 100,
    log10_min: float = -5.0,
    log10_max: float = 2.0,
    two_stage: bool = False,
    linear_terms: Iterable[int] = (),
    warm_start: bool = True,
    order_statistic_knots: bool = False,
    inverse_gram_weights: bool = False,
) -> ModelSpec:
    """Build a ModelSpec from keyword arguments; defaults match the C++ library."""
    try:
        chosen = _METHODS[method.lower()]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(_METHODS)}") from None
    spec = ModelSpec()
    spec.method = chosen
    basis = spec.basis
    basis.knot_count = knots
    basis.order = order
    basis.knot_rule = KnotRule.order_statistic if order_statistic_knots else KnotRule.interior_quantile
    basis.weight_rule = WeightRule.inverse_gram_diagonal if inverse_gram_weights else WeightRule.second_moment
    spec.basis = basis
    tuning = spec.tuning
    tuning.gamma = gamma
    tuning.grid_size = grid_size
    tuning.log10_min = log10_min
    tuning.log10_max = log10_max
    tuning.warm_start = warm_start
    spec.tuning = tuning
    spec.two_stage = two_stage
    spec.linear_terms = list(linear_terms)
    return spec


def fit(y, x, spec: Optional[ModelSpec] = None, **kwargs) -> FitResult:
    """Fit a sparse additive model of ``y`` on the columns of ``x``.

    Pass either a ready ``ModelSpec`` or keyword arguments accepted by
    :func:`make_spec`, not both.
    """
    if spec is not None and kwargs:
        raise TypeError("pass either spec or keyword arguments, not both")
    if spec is None:
        spec = make_spec(**kwargs)
    y = np.ascontiguousarray(y, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return _fit(y, x, spec)


def predict(fit_result: FitResult, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return _predict(fit_result, x)
