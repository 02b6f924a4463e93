"""Local structure learning around the treatment and outcome.

Learns the adjacency sets Adj(W) and Adj(Y) from a CI backend with a
target-restricted PC-style sweep, refines their union by removing variables
marginally independent of the treatment, and extracts the candidate set of
treatment-only neighbours that drives the three-case classification.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import FrozenSet, Iterable

from .citests import CiBackend

DEFAULT_MAX_COND = 3


@dataclass(frozen=True)
class AdjacencyContext:
    """Learned local structure around (w, y).

    adj_w / adj_y exclude the treatment and outcome themselves; adj_union is
    their union; q_removed holds the members of Adj(Y) found marginally
    independent of W; adj_r is the refined search space; omega the
    treatment-only neighbours (adjacent to W but not to Y).
    """

    w: str
    y: str
    adj_w: FrozenSet[str]
    adj_y: FrozenSet[str]
    adj_union: FrozenSet[str]
    q_removed: FrozenSet[str]
    adj_r: FrozenSet[str]
    omega: FrozenSet[str]


def learn_adjacency(
    backend: CiBackend,
    target: str,
    candidates: Iterable[str],
    max_cond: int = DEFAULT_MAX_COND,
) -> frozenset:
    """PC-style adjacency sweep restricted to one target.

    Starting from all candidates, level l removes x as soon as some subset S
    of the current candidate set (|S| = l, x excluded) renders x independent
    of the target. Candidates are visited lexicographically and removals
    apply immediately, so the result is order-deterministic. An adjacent
    pair is never separable, so true neighbours always survive.
    """
    candidates = sorted(set(candidates))
    if target in candidates:
        raise ValueError("target cannot be its own candidate")
    if max_cond < 0:
        raise ValueError("max_cond must be non-negative")
    current = list(candidates)
    for level in range(max_cond + 1):
        if len(current) - 1 < level:
            break
        for x in list(current):
            others = [v for v in current if v != x]
            if len(others) < level:
                continue
            for subset in itertools.combinations(others, level):
                if backend.independent(x, target, subset):
                    current.remove(x)
                    break
    return frozenset(current)


def build_context(
    backend: CiBackend,
    w: str,
    y: str,
    x: Iterable[str],
    max_cond: int = DEFAULT_MAX_COND,
    strict_q: bool = False,
) -> AdjacencyContext:
    """Learn the full local context around the pair (w, y).

    The treatment sweep runs over x plus the outcome and vice versa; both
    results are reported with w and y stripped. The marginal-independence
    scan that builds Q covers Adj(Y) by default; `strict_q` widens it to the
    whole union (members of Adj(W) are never marginally independent of W
    under an exact oracle, so the default matches the narrower scan).
    """
    x = sorted(set(x))
    if w in x or y in x:
        raise ValueError("covariate set must exclude treatment and outcome")
    adj_w_raw = learn_adjacency(backend, w, x + [y], max_cond=max_cond)
    adj_y_raw = learn_adjacency(backend, y, x + [w], max_cond=max_cond)
    adj_w = frozenset(adj_w_raw - {y})
    adj_y = frozenset(adj_y_raw - {w})
    adj_union = adj_w | adj_y

    scan = adj_union if strict_q else adj_y
    q_removed = frozenset(
        v for v in sorted(scan) if backend.independent(v, w, ())
    )
    adj_r = adj_union - q_removed
    omega = adj_w - adj_y
    return AdjacencyContext(
        w=w,
        y=y,
        adj_w=adj_w,
        adj_y=adj_y,
        adj_union=adj_union,
        q_removed=q_removed,
        adj_r=adj_r,
        omega=omega,
    )
