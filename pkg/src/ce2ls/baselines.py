"""Comparison adjustment strategies.

NULL adjusts for nothing and PRE for every pretreatment covariate. The four
MASS criteria and the disjunctive cause criterion select learned causes of
the treatment and/or outcome; with only local CI information the learned
adjacency sets stand in for the cause sets, which matches how the criteria
behave when driven by a constraint-based learner. EHS scans every candidate
variable S and every conditioning set up to a size cap, keeping sets Z with
S dependent on Y given Z but independent given Z plus the treatment.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import itertools

from .citests import CiBackend
from .dataset import Dataset
from .discovery import DEFAULT_MAX_COND, learn_adjacency
from .estimation import aggregate, effect_estimator
from .exceptions import CapacityError

EHS_DEFAULT_MAX_COND = 6

_EHS_UNBOUNDED_LIMIT = 25


class BaselineKind(str, enum.Enum):
    NULL = "null"
    PRE = "pre"
    MASS_XW = "mass-xw"          # learned causes of W
    MASS_XY = "mass-xy"          # learned causes of Y
    MASS_QW = "mass-qw"          # causes of W excluding causes of Y
    MASS_ZY = "mass-zy"          # causes of Y excluding causes of W
    DISJUNCTIVE = "disjunctive"  # union of both cause sets
    EHS = "ehs"


@dataclass(frozen=True)
class BaselineSpec:
    kind: BaselineKind
    ehs_max_cond: Optional[int] = EHS_DEFAULT_MAX_COND
    max_cond: int = DEFAULT_MAX_COND


def _learned_adjacencies(backend, w, y, x, max_cond):
    adj_w = learn_adjacency(backend, w, sorted(x) + [y], max_cond=max_cond) - {y}
    adj_y = learn_adjacency(backend, y, sorted(x) + [w], max_cond=max_cond) - {w}
    return frozenset(adj_w), frozenset(adj_y)


def ehs_adjustment_sets(
    backend: CiBackend,
    w: str,
    y: str,
    x: Iterable[str],
    max_cond: Optional[int] = EHS_DEFAULT_MAX_COND,
) -> Tuple[frozenset, ...]:
    """Exhaustive rule-pair scan over the whole covariate space.

    For every S in x and every Z in x minus S with |Z| <= max_cond, Z is kept
    when S is dependent on Y given Z and independent given Z plus W. Returned
    sets are deduplicated and sorted by (size, members).
    """
    x = sorted(set(x))
    if max_cond is None:
        if len(x) > _EHS_UNBOUNDED_LIMIT:
            raise CapacityError(
                f"unbounded exhaustive scan over {len(x)} covariates; set max_cond"
            )
        max_cond = len(x) - 1
    found = set()
    for s in x:
        others = [v for v in x if v != s]
        for size in range(0, min(max_cond, len(others)) + 1):
            for combo in itertools.combinations(others, size):
                if backend.independent(s, y, combo):
                    continue
                if backend.independent(s, y, tuple(sorted(set(combo) | {w}))):
                    found.add(frozenset(combo))
    return tuple(sorted(found, key=lambda z: (len(z), tuple(sorted(z)))))


def baseline_adjustment_set(
    backend: CiBackend,
    w: str,
    y: str,
    x: Iterable[str],
    spec: BaselineSpec,
):
    """Adjustment set(s) for one strategy: a frozenset, or a tuple for EHS."""
    x = frozenset(x) - {w, y}
    kind = spec.kind
    if kind == BaselineKind.NULL:
        return frozenset()
    if kind == BaselineKind.PRE:
        return x
    if kind == BaselineKind.EHS:
        return ehs_adjustment_sets(backend, w, y, x, max_cond=spec.ehs_max_cond)
    adj_w, adj_y = _learned_adjacencies(backend, w, y, x, spec.max_cond)
    if kind == BaselineKind.MASS_XW:
        return adj_w
    if kind == BaselineKind.MASS_XY:
        return adj_y
    if kind == BaselineKind.MASS_QW:
        return adj_w - adj_y
    if kind == BaselineKind.MASS_ZY:
        return adj_y - adj_w
    if kind == BaselineKind.DISJUNCTIVE:
        return adj_w | adj_y
    raise ValueError(f"unknown baseline kind: {kind!r}")


def run_baseline(
    backend: CiBackend,
    data: Optional[Dataset],
    w: str,
    y: str,
    x: Iterable[str],
    spec: BaselineSpec,
    effect_scale: str = "auto",
):
    """Select the strategy's set(s) and estimate the effect on `data`.

    Multi-set strategies report the average of the per-set estimates. With
    no dataset (pure oracle runs) the sets are returned with effects omitted.
    """
    t0 = time.perf_counter()
    start = backend.test_count
    selected = baseline_adjustment_set(backend, w, y, x, spec)
    sets = selected if isinstance(selected, tuple) else (selected,)
    if data is not None:
        fn, outcome_kind, scale = effect_estimator(data, w, y, scale=effect_scale)
        per_set = [(z, fn(z)) for z in sets]
    else:
        outcome_kind, scale = "unknown", effect_scale
        per_set = [(z, None) for z in sets]
    diagnostics = {
        "strategy": spec.kind.value,
        "ci_test_count": backend.test_count - start,
        "n_sets": len(sets),
        "wall_time_s": time.perf_counter() - t0,
    }
    return aggregate(per_set, outcome_kind=outcome_kind, effect_scale=scale,
                     diagnostics=diagnostics)
