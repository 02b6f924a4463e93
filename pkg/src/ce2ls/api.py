"""High-level entry points tying backends, search and estimation together."""

from __future__ import annotations

from typing import Iterable, Optional, Tuple, Union

from .baselines import BaselineKind, BaselineSpec, run_baseline
from .citests import DEFAULT_ALPHA, CiBackend, OracleBackend, backend_for
from .dataset import Dataset
from .discovery import DEFAULT_MAX_COND
from .estimation import EstimationResult, aggregate, effect_estimator
from .exceptions import EstimationError
from .graphs import Dag, Mag, latent_project
from .search import DEFAULT_MAX_LEVEL, SearchOutcome, Verdict, run_ce2ls

CE2LS_STRATEGY = "ce2ls"

STRATEGIES = (CE2LS_STRATEGY,) + tuple(k.value for k in BaselineKind)


def oracle_for_graph(graph: Union[Dag, Mag], latents: Iterable[str] = ()) -> OracleBackend:
    """Exact CI oracle for a graph, projecting out `latents` first if given."""
    latents = frozenset(latents)
    if latents:
        if not isinstance(graph, Dag):
            raise ValueError("latent projection needs a DAG")
        graph = latent_project(graph, latents)
    return OracleBackend(graph)


def estimate_effect(
    *,
    data: Optional[Dataset] = None,
    backend: Optional[CiBackend] = None,
    treatment: str,
    outcome: str,
    covariates: Optional[Iterable[str]] = None,
    strategy: str = CE2LS_STRATEGY,
    alpha: float = DEFAULT_ALPHA,
    max_cond: int = DEFAULT_MAX_COND,
    max_level: int = DEFAULT_MAX_LEVEL,
    ehs_max_cond: Optional[int] = None,
    effect_scale: str = "auto",
    exhaustive: bool = False,
) -> Tuple[Optional[SearchOutcome], Optional[EstimationResult]]:
    """Run one strategy end to end.

    Exactly one of `data` (statistical tests) or `backend` (e.g. a graph
    oracle) must supply CI decisions; when both are given the backend decides
    independence and the data is used for effect estimation only. Returns
    (search outcome, estimation result); the search outcome is None for
    baseline strategies, and the estimation result is None when no effects
    are estimable (no data, or nothing identifiable).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; pick one of {STRATEGIES}")
    if backend is None:
        if data is None:
            raise ValueError("either data or a backend is required")
        backend = backend_for(data, alpha=alpha)
    if covariates is None:
        if data is not None:
            covariates = [c for c in data.names if c not in (treatment, outcome)]
        elif isinstance(backend, OracleBackend):
            covariates = [v for v in backend.graph.nodes if v not in (treatment, outcome)]
        else:
            raise ValueError("covariates are required with a custom backend")
    covariates = sorted(set(covariates) - {treatment, outcome})

    if strategy != CE2LS_STRATEGY:
        spec = BaselineSpec(
            kind=BaselineKind(strategy),
            ehs_max_cond=ehs_max_cond if ehs_max_cond is not None else BaselineSpec(BaselineKind.EHS).ehs_max_cond,
            max_cond=max_cond,
        )
        result = run_baseline(
            backend, data, treatment, outcome, covariates, spec,
            effect_scale=effect_scale,
        )
        return None, result

    effect_fn = None
    outcome_kind, scale = "unknown", effect_scale
    if data is not None:
        effect_fn, outcome_kind, scale = effect_estimator(
            data, treatment, outcome, scale=effect_scale
        )
    search = run_ce2ls(
        backend,
        treatment,
        outcome,
        covariates,
        max_cond=max_cond,
        max_level=max_level,
        effect_fn=effect_fn,
        exhaustive=exhaustive,
    )
    estimation = None
    if search.verdict == Verdict.IDENTIFIABLE and data is not None:
        try:
            estimation = aggregate(
                [(e.z, e.effect) for e in search.psi],
                outcome_kind=outcome_kind,
                effect_scale=scale,
                diagnostics={
                    "strategy": CE2LS_STRATEGY,
                    "omega": sorted(search.context.omega),
                    "adj_r": sorted(search.context.adj_r),
                    "ci_test_count": search.stats.ci_test_count,
                    "wall_time_s": search.stats.wall_time_s,
                },
            )
        except EstimationError:
            estimation = None
    return search, estimation
