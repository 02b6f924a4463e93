"""Three-case identifiability classification and minimal-adjustment-set search.

Given a CI backend and the learned local context, the search iterates over
the treatment-only neighbours S and runs a level-wise sweep over candidate
subsets of the refined neighbourhood, testing each candidate Z in order:

  (a) W independent of Y given Z        -> no treatment-outcome edge at all
  (b) S independent of Y given Z        -> hidden confounding, non-identifiable
  (c) S independent of Y given Z + {W}  -> Z is a minimal adjustment set

Candidate levels are generated with a frequent-itemset style join-and-prune
step, and any set recorded as a minimal adjustment set is removed from its
level so none of its supersets is ever generated (upward closure).

Verdict adjudication: an (a)-witness proves the no-edge case outright, so
the search stops there. A (b)-witness proves only that no directed
treatment-outcome edge exists; in a true no-edge graph a (b)-witness can
appear at a smaller level than any (a)-witness, so the search records it
and keeps scanning for an (a)-witness instead of stopping. Evidence of kind
(b) together with kind (c) is contradictory under faithfulness and raises
FaithfulnessConflict.
"""

from __future__ import annotations

import enum
import io
import itertools
import time
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from .citests import CiBackend
from .discovery import DEFAULT_MAX_COND, AdjacencyContext, build_context
from .exceptions import FaithfulnessConflict

DEFAULT_MAX_LEVEL = 5


class Verdict(str, enum.Enum):
    NO_EFFECT = "NoEffect"
    NON_IDENTIFIABLE = "NonIdentifiable"
    IDENTIFIABLE = "Identifiable"
    UNDETERMINED = "Undetermined"


class CaseRule(str, enum.Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"


@dataclass(frozen=True)
class Witness:
    """The conditional independence that settled a Case I/II verdict.

    `coso` is None when the witness came from the supplementary no-edge scan
    that conditions on sets containing every treatment-only neighbour.
    """

    rule: CaseRule
    z: FrozenSet[str]
    coso: Optional[str] = None


@dataclass(frozen=True)
class PsiEntry:
    z: FrozenSet[str]
    effect: Optional[float]
    level: int


@dataclass(frozen=True)
class CandidateLevel:
    """Level k of the search: sorted, duplicate-free k-subsets."""

    k: int
    sets: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("levels start at k = 1")
        seen = set()
        for s in self.sets:
            if len(s) != self.k:
                raise ValueError(f"set {s} does not have size {self.k}")
            if tuple(sorted(s)) != s:
                raise ValueError(f"set {s} is not sorted")
            if s in seen:
                raise ValueError(f"duplicate set {s}")
            seen.add(s)
        object.__setattr__(self, "sets", tuple(sorted(self.sets)))

    def __len__(self):
        return len(self.sets)


def candidate_gen(prev: CandidateLevel, k: int) -> CandidateLevel:
    """Join-and-prune candidate generation for level k.

    Pairs of (k-1)-sets sharing their first k-2 members are joined; a joined
    set survives only if every (k-1)-subset is still present in `prev`, so
    supersets of anything removed from `prev` are never produced.
    """
    if k < 2 or prev.k != k - 1:
        raise ValueError(f"cannot generate level {k} from level {prev.k}")
    prev_set = set(prev.sets)
    buckets: Dict[Tuple[str, ...], List[Tuple[str, ...]]] = {}
    for s in prev.sets:
        buckets.setdefault(s[: k - 2], []).append(s)
    out = []
    for group in buckets.values():
        for a, b in itertools.combinations(group, 2):
            joined = tuple(sorted(set(a) | set(b)))
            if len(joined) != k:
                continue
            if all(
                joined[:i] + joined[i + 1 :] in prev_set for i in range(k)
            ):
                out.append(joined)
    return CandidateLevel(k=k, sets=tuple(sorted(set(out))))


@dataclass(frozen=True)
class LevelTrace:
    """Candidates generated for one COSO variable at one level, pre-testing."""

    coso: str
    k: int
    sets: Tuple[Tuple[str, ...], ...]


@dataclass
class SearchStats:
    ci_test_count: int = 0
    levels_explored: int = 0
    supplementary_tests: int = 0
    wall_time_s: float = 0.0


@dataclass(frozen=True)
class SearchOutcome:
    """Result of one identifiability search.

    `psi` is ordered by (set size, lexicographic members) and its sets form
    an antichain under inclusion. `witness` is set for the NoEffect and
    NonIdentifiable verdicts. `undetermined_reason` distinguishes an empty
    COSO candidate set from a search that exhausted its budget without any
    witness.
    """

    verdict: Verdict
    psi: Tuple[PsiEntry, ...]
    witness: Optional[Witness]
    context: AdjacencyContext
    stats: SearchStats
    trace: Tuple[LevelTrace, ...] = ()
    undetermined_reason: Optional[str] = None

    @property
    def psi_sets(self) -> Tuple[FrozenSet[str], ...]:
        return tuple(entry.z for entry in self.psi)

    def to_text(self) -> str:
        """Deterministic human-readable report (timing deliberately omitted)."""
        out = io.StringIO()
        ctx = self.context
        print(f"verdict: {self.verdict.value}", file=out)
        if self.undetermined_reason:
            print(f"reason: {self.undetermined_reason}", file=out)
        print(f"treatment: {ctx.w}", file=out)
        print(f"outcome: {ctx.y}", file=out)
        print(f"adj_w: {_fmt(ctx.adj_w)}", file=out)
        print(f"adj_y: {_fmt(ctx.adj_y)}", file=out)
        print(f"q_removed: {_fmt(ctx.q_removed)}", file=out)
        print(f"adj_r: {_fmt(ctx.adj_r)}", file=out)
        print(f"omega: {_fmt(ctx.omega)}", file=out)
        if self.witness is not None:
            who = self.witness.coso or "-"
            print(
                f"witness: {self.witness.rule.value} coso={who} z={_fmt(self.witness.z)}",
                file=out,
            )
        print(f"ci_tests: {self.stats.ci_test_count}", file=out)
        print(f"levels_explored: {self.stats.levels_explored}", file=out)
        if self.psi:
            print("psi:", file=out)
            for entry in self.psi:
                effect = "-" if entry.effect is None else f"{entry.effect:.6g}"
                print(f"  {_fmt(entry.z)}  effect={effect}  level={entry.level}", file=out)
        else:
            print("psi: (empty)", file=out)
        return out.getvalue()

    def to_csv(self) -> str:
        """Machine-readable form: one row per psi entry."""
        lines = ["set,effect,level"]
        for entry in self.psi:
            effect = "" if entry.effect is None else f"{entry.effect:.10g}"
            lines.append(f"{' '.join(sorted(entry.z))},{effect},{entry.level}")
        return "\n".join(lines) + "\n"


def _fmt(values: Iterable[str]) -> str:
    values = sorted(values)
    return "{" + ", ".join(values) + "}" if values else "{}"


class _CaseIFound(Exception):
    def __init__(self, witness: Witness):
        self.witness = witness


def classify_and_search(
    backend: CiBackend,
    ctx: AdjacencyContext,
    w: str,
    y: str,
    max_level: int = DEFAULT_MAX_LEVEL,
    effect_fn: Optional[Callable[[FrozenSet[str]], Optional[float]]] = None,
    exhaustive: bool = False,
    record_trace: bool = True,
) -> SearchOutcome:
    """Run the three-case classification over an already-built context.

    `effect_fn` is called once per accepted minimal adjustment set to attach
    an effect estimate; leave it None (for example with a graph oracle) to
    record sets only. `exhaustive` disables early termination and witness
    caching so the literal per-candidate test sequence of the level-wise
    sweep can be observed; verdict adjudication is unchanged.
    """
    if max_level < 1:
        raise ValueError("max_level must be at least 1")
    t0 = time.perf_counter()
    start_count = backend.test_count
    stats = SearchStats()
    trace: List[LevelTrace] = []

    def finalize(verdict, psi_entries, witness, reason=None):
        stats.ci_test_count = backend.test_count - start_count
        stats.wall_time_s = time.perf_counter() - t0
        return SearchOutcome(
            verdict=verdict,
            psi=tuple(psi_entries),
            witness=witness,
            context=ctx,
            stats=stats,
            trace=tuple(trace),
            undetermined_reason=reason,
        )

    if not ctx.omega:
        return finalize(Verdict.UNDETERMINED, (), None, reason="no COSO candidate found")

    psi: List[PsiEntry] = []
    psi_index: Dict[FrozenSet[str], PsiEntry] = {}
    case1_witness: Optional[Witness] = None
    case2_witness: Optional[Witness] = None

    def record_case1(z: FrozenSet[str], coso: str):
        nonlocal case1_witness
        witness = Witness(CaseRule.CASE_I, z, coso=coso)
        if psi:
            raise FaithfulnessConflict(witness, psi)
        if case1_witness is None:
            case1_witness = witness
        if not exhaustive:
            raise _CaseIFound(witness)

    try:
        for s in sorted(ctx.omega):
            universe = sorted(ctx.adj_r - {s})
            level = CandidateLevel(1, tuple((v,) for v in universe))
            k = 1
            while level.sets and k <= max_level:
                if record_trace:
                    trace.append(LevelTrace(coso=s, k=k, sets=level.sets))
                stats.levels_explored = max(stats.levels_explored, k)
                kept = []
                for members in level.sets:
                    z = frozenset(members)
                    if z in psi_index:
                        # Already recorded through another COSO variable: skip
                        # the tests and drop it from the level so supersets
                        # are pruned exactly as for a fresh find.
                        continue
                    if backend.independent(w, y, members):
                        record_case1(z, s)
                        kept.append(members)
                    elif (exhaustive or case2_witness is None) and backend.independent(
                        s, y, members
                    ):
                        if case2_witness is None:
                            case2_witness = Witness(CaseRule.CASE_II, z, coso=s)
                        kept.append(members)
                    elif backend.independent(s, y, sorted(z | {w})):
                        conflicting = case2_witness or case1_witness
                        if conflicting is not None:
                            raise FaithfulnessConflict(
                                conflicting, psi + [PsiEntry(z, None, k)]
                            )
                        entry = PsiEntry(z, effect_fn(z) if effect_fn else None, k)
                        psi.append(entry)
                        psi_index[z] = entry
                    else:
                        kept.append(members)
                k += 1
                level = candidate_gen(CandidateLevel(k - 1, tuple(kept)), k)
    except _CaseIFound as found:
        return finalize(Verdict.NO_EFFECT, (), found.witness)

    if case1_witness is not None:
        return finalize(Verdict.NO_EFFECT, (), case1_witness)

    if not psi:
        # The main sweep never conditions on a set containing every COSO
        # variable; in rare graphs only such sets separate W from Y, so run a
        # no-edge-only scan over them before concluding anything else.
        witness = _supplementary_case1_scan(backend, ctx, w, y, max_level, stats)
        if witness is not None:
            return finalize(Verdict.NO_EFFECT, (), witness)

    if psi:
        ordered = sorted(psi, key=lambda e: (len(e.z), tuple(sorted(e.z))))
        return finalize(Verdict.IDENTIFIABLE, ordered, None)
    if case2_witness is not None:
        return finalize(Verdict.NON_IDENTIFIABLE, (), case2_witness)
    return finalize(
        Verdict.UNDETERMINED,
        (),
        None,
        reason="search exhausted without a witness (raise max_level or check assumptions)",
    )


def _supplementary_case1_scan(backend, ctx, w, y, max_level, stats) -> Optional[Witness]:
    omega = sorted(ctx.omega)
    rest = sorted(ctx.adj_r - ctx.omega)
    base = len(omega)
    if base > max_level:
        return None
    before = backend.test_count
    try:
        for extra in range(0, max_level - base + 1):
            for combo in itertools.combinations(rest, extra):
                z = tuple(sorted(set(omega) | set(combo)))
                if backend.independent(w, y, z):
                    return Witness(CaseRule.CASE_I, frozenset(z), coso=None)
        return None
    finally:
        stats.supplementary_tests += backend.test_count - before


def run_ce2ls(
    backend: CiBackend,
    w: str,
    y: str,
    x: Iterable[str],
    alpha: Optional[float] = None,
    max_cond: int = DEFAULT_MAX_COND,
    max_level: int = DEFAULT_MAX_LEVEL,
    effect_fn: Optional[Callable[[FrozenSet[str]], Optional[float]]] = None,
    exhaustive: bool = False,
    strict_q: bool = False,
    record_trace: bool = True,
) -> SearchOutcome:
    """End-to-end run: learn the local context, then classify and search.

    `alpha` is accepted for convenience and must match the backend's own
    significance level when both are given (the backend owns the tests).
    """
    if alpha is not None and getattr(backend, "alpha", alpha) != alpha:
        raise ValueError("backend was built with a different alpha")
    t0 = time.perf_counter()
    start_count = backend.test_count
    ctx = build_context(backend, w, y, x, max_cond=max_cond, strict_q=strict_q)
    outcome = classify_and_search(
        backend,
        ctx,
        w,
        y,
        max_level=max_level,
        effect_fn=effect_fn,
        exhaustive=exhaustive,
        record_trace=record_trace,
    )
    outcome.stats.ci_test_count = backend.test_count - start_count
    outcome.stats.wall_time_s = time.perf_counter() - t0
    return outcome
