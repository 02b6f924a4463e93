"""Effect estimation by covariate adjustment.

Continuous outcomes use regression adjustment: the coefficient of the
treatment in an OLS fit of the outcome on treatment plus adjustment set.
Binary outcomes use standardized logistic regression (g-computation) and
report the log marginal causal odds ratio by default, with a risk-difference
scale available on request. Per-set estimates are aggregated by their
arithmetic mean.

All functions are pure over immutable data; per-set estimates may run
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .dataset import BINARY, Dataset
from .exceptions import EstimationError

DIFFERENCE = "difference"
LOG_ODDS_RATIO = "log_odds_ratio"
RISK_DIFFERENCE = "risk_difference"

CONTINUOUS_OUTCOME = "continuous"
BINARY_OUTCOME = "binary"

_IRLS_MAX_ITER = 50
_IRLS_TOL = 1e-8


@dataclass(frozen=True)
class EstimationResult:
    """Aggregated effect plus the per-set detail it was averaged from."""

    ace: Optional[float]
    per_set: Tuple[Tuple[frozenset, Optional[float]], ...]
    outcome_kind: str
    effect_scale: str
    diagnostics: Dict = field(default_factory=dict)


def _design(data: Dataset, w: str, z: Sequence[str]) -> np.ndarray:
    columns = [np.ones(data.n), data.column(w)]
    for name in z:
        columns.append(data.column(name))
    return np.column_stack(columns)


def _offending_columns(design: np.ndarray, names: Sequence[str]) -> List[str]:
    # A column is redundant when dropping it does not lower the rank.
    rank = np.linalg.matrix_rank(design)
    out = []
    for j in range(design.shape[1]):
        reduced = np.delete(design, j, axis=1)
        if np.linalg.matrix_rank(reduced) == rank:
            out.append(names[j])
    return out


def ace_linear(data: Dataset, w: str, y: str, z: Iterable[str] = ()) -> float:
    """OLS fit of y on (w, z); returns the coefficient of w.

    With a proper adjustment set this coefficient is the average causal
    effect for a linear outcome mechanism.
    """
    z = sorted(set(z) - {w, y})
    design = _design(data, w, z)
    if data.n <= len(z) + 2:
        raise EstimationError(f"need n > |z| + 2 (n={data.n}, |z|={len(z)})")
    rank = np.linalg.matrix_rank(design)
    if rank < design.shape[1]:
        names = ["(intercept)", w] + list(z)
        offending = _offending_columns(design, names)
        raise EstimationError(
            f"design matrix is rank deficient (rank {rank} of {design.shape[1]})",
            offending_columns=offending,
        )
    coef, _, _, _ = np.linalg.lstsq(design, data.column(y), rcond=None)
    return float(coef[1])


def _fit_logistic(design: np.ndarray, target: np.ndarray):
    """Logistic fit by iteratively reweighted least squares.

    Iterations are capped; running into the cap (perfect separation or other
    non-convergence) is reported through the `converged` flag rather than an
    exception.
    """
    beta = np.zeros(design.shape[1])
    converged = False
    for _ in range(_IRLS_MAX_ITER):
        eta = design @ beta
        eta = np.clip(eta, -30.0, 30.0)
        mu = 1.0 / (1.0 + np.exp(-eta))
        weight = mu * (1.0 - mu)
        weight = np.maximum(weight, 1e-10)
        # Newton step via the weighted normal equations.
        wx = design * weight[:, None]
        hessian = design.T @ wx
        gradient = design.T @ (target - mu)
        try:
            step = np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError:
            break
        beta = beta + step
        if float(np.max(np.abs(step))) < _IRLS_TOL:
            converged = True
            break
    return beta, converged


def ace_mcor(
    data: Dataset,
    w: str,
    y: str,
    z: Iterable[str] = (),
    scale: str = LOG_ODDS_RATIO,
) -> float:
    """Standardized logistic regression estimate for a binary outcome.

    Fits y on (w, z), averages the fitted probabilities over the empirical
    covariate distribution at w=1 and w=0, and returns either the log
    marginal causal odds ratio (default) or the risk difference.
    """
    if scale not in (LOG_ODDS_RATIO, RISK_DIFFERENCE):
        raise ValueError(f"unknown scale {scale!r}")
    z = sorted(set(z) - {w, y})
    target = data.column(y)
    if set(np.unique(target)) - {0.0, 1.0}:
        raise EstimationError(f"outcome {y!r} is not binary")
    treat = data.column(w)
    if set(np.unique(treat)) - {0.0, 1.0}:
        raise EstimationError(f"treatment {w!r} is not binary")
    if not (treat == 1.0).any() or not (treat == 0.0).any():
        raise EstimationError("one treatment arm is empty")
    design = _design(data, w, z)
    beta, converged = _fit_logistic(design, target)
    probs = {}
    for value in (1.0, 0.0):
        counterfactual = design.copy()
        counterfactual[:, 1] = value
        eta = np.clip(counterfactual @ beta, -30.0, 30.0)
        probs[value] = float(np.mean(1.0 / (1.0 + np.exp(-eta))))
    p1, p0 = probs[1.0], probs[0.0]
    if scale == RISK_DIFFERENCE:
        return p1 - p0
    eps = 1e-12
    p1 = min(max(p1, eps), 1 - eps)
    p0 = min(max(p0, eps), 1 - eps)
    value = math.log(p1 / (1 - p1)) - math.log(p0 / (1 - p0))
    if not converged:
        # Flagged through diagnostics upstream; the capped estimate is still
        # returned so multi-set averages keep their arity.
        return value
    return value


def aggregate(
    per_set: Sequence[Tuple[Iterable[str], Optional[float]]],
    outcome_kind: str = CONTINUOUS_OUTCOME,
    effect_scale: str = DIFFERENCE,
    diagnostics: Optional[Dict] = None,
) -> EstimationResult:
    """Arithmetic mean across per-set estimates, preserving the detail."""
    entries = tuple((frozenset(z), effect) for z, effect in per_set)
    if not entries:
        raise EstimationError("nothing to aggregate: no adjustment sets")
    effects = [effect for _, effect in entries if effect is not None]
    ace = float(np.mean(effects)) if len(effects) == len(entries) else None
    return EstimationResult(
        ace=ace,
        per_set=entries,
        outcome_kind=outcome_kind,
        effect_scale=effect_scale,
        diagnostics=dict(diagnostics or {}),
    )


def effect_estimator(data: Dataset, w: str, y: str, scale: str = "auto"):
    """Build the per-set effect function the search attaches to found sets.

    Returns (callable, outcome_kind, effect_scale); the callable maps an
    adjustment set to a point estimate. `auto` picks the difference scale for
    continuous outcomes and log marginal odds ratio for binary ones.
    """
    binary_outcome = data.kind(y) == BINARY
    if scale == "auto":
        scale = LOG_ODDS_RATIO if binary_outcome else DIFFERENCE
    if binary_outcome and scale in (LOG_ODDS_RATIO, RISK_DIFFERENCE):
        kind = BINARY_OUTCOME

        def fn(z):
            return ace_mcor(data, w, y, z, scale=scale)

    elif scale == DIFFERENCE:
        kind = BINARY_OUTCOME if binary_outcome else CONTINUOUS_OUTCOME

        def fn(z):
            return ace_linear(data, w, y, z)

    else:
        raise ValueError(
            f"scale {scale!r} is not available for a "
            f"{'binary' if binary_outcome else 'continuous'} outcome"
        )
    return fn, kind, scale
