"""Benchmark data generation: linear SEMs, discrete Bayesian networks,
latent-column masking, exact ground-truth effects, and the config grammar.

Sampling is ancestral in a canonical topological order and deterministic per
(model, seed); independent seeds may run concurrently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

import numpy as np

from .dataset import Dataset, mask_latents
from .exceptions import GraphError, ParseError
from .graphs import Dag, parse_graph_text

__all__ = [
    "LinearSem",
    "DiscreteBn",
    "sample_linear_sem",
    "sample_discrete_bn",
    "mask_latents",
    "true_ace_linear",
    "true_ace_discrete",
    "parse_model_config",
    "ModelConfig",
]


@dataclass(frozen=True)
class LinearSem:
    """Linear-Gaussian structural model with optional binary nodes.

    Continuous node: value = sum(weight * parent) + noise_sd * N(0, 1).
    Binary node: Bernoulli(expit(sum(weight * parent) + noise_sd * N(0, 1)));
    the noise enters inside the link, matching the usual logistic treatment
    assignment.
    """

    dag: Dag
    weights: Dict[Tuple[str, str], float]
    noise_sd: Dict[str, float]
    binary_nodes: FrozenSet[str] = frozenset()

    def __post_init__(self):
        if set(self.weights) != set(self.dag.edges):
            missing = set(self.dag.edges) - set(self.weights)
            extra = set(self.weights) - set(self.dag.edges)
            raise GraphError(
                f"weights must be keyed exactly by the DAG edges "
                f"(missing {sorted(missing)}, extra {sorted(extra)})"
            )
        if set(self.noise_sd) != set(self.dag.nodes):
            raise GraphError("noise_sd must cover every node")
        for v, sd in self.noise_sd.items():
            if not sd > 0:
                raise GraphError(f"noise_sd[{v!r}] must be positive")
        unknown = self.binary_nodes - set(self.dag.nodes)
        if unknown:
            raise GraphError(f"unknown binary nodes: {sorted(unknown)}")


def _expit(x):
    return 1.0 / (1.0 + np.exp(-x))


def sample_linear_sem(sem: LinearSem, n: int, seed: int) -> Dataset:
    """Draw `n` samples by ancestral sampling; byte-reproducible per seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    order = sem.dag.topological_order()
    values = {}
    for v in order:
        lin = np.zeros(n)
        for p in sorted(sem.dag.parents(v)):
            lin += sem.weights[(p, v)] * values[p]
        noise = sem.noise_sd[v] * rng.standard_normal(n)
        if v in sem.binary_nodes:
            values[v] = rng.binomial(1, _expit(lin + noise)).astype(float)
        else:
            values[v] = lin + noise
    names = tuple(sorted(sem.dag.nodes))
    return Dataset(names=names, values=np.column_stack([values[v] for v in names]))


def true_ace_linear(sem: LinearSem, w: str, y: str) -> float:
    """Total effect of w on y: sum over directed paths of edge-weight products.

    Exact for linear mechanisms; the treatment itself may be binary, but any
    intermediate node on a w -> ... -> y path must be continuous, since a
    binary mediator breaks path-product arithmetic.
    """
    sem.dag._require(w, y)
    if y in sem.binary_nodes:
        raise GraphError("true_ace_linear needs a continuous outcome")
    total = 0.0
    stack = [(w, 1.0)]
    while stack:
        v, prod = stack.pop()
        for c in sorted(sem.dag.children(v)):
            weight = prod * sem.weights[(v, c)]
            if c == y:
                total += weight
            else:
                if c in sem.binary_nodes:
                    raise GraphError(
                        f"binary mediator {c!r} on a causal path; path-sum rule does not apply"
                    )
                stack.append((c, weight))
    return total


@dataclass(frozen=True)
class DiscreteBn:
    """Discrete Bayesian network: per-node CPTs over parent configurations.

    ``cpts[v]`` maps a tuple of parent levels (parents in sorted name order)
    to a probability vector over the node's levels; every row must sum to 1
    within 1e-9.
    """

    dag: Dag
    cpts: Dict[str, Dict[Tuple[int, ...], Tuple[float, ...]]]
    levels: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        levels = dict(self.levels)
        for v in self.dag.nodes:
            if v not in self.cpts:
                raise GraphError(f"missing CPT for node {v!r}")
            rows = self.cpts[v]
            sizes = {len(row) for row in rows.values()}
            if len(sizes) != 1:
                raise GraphError(f"CPT rows for {v!r} have inconsistent arity")
            levels.setdefault(v, sizes.pop())
        for v in self.dag.nodes:
            parents = sorted(self.dag.parents(v))
            expected = list(itertools.product(*(range(levels[p]) for p in parents)))
            rows = self.cpts[v]
            if sorted(rows) != sorted(expected):
                raise GraphError(
                    f"CPT for {v!r} must have one row per parent configuration "
                    f"({len(expected)} expected, {len(rows)} given)"
                )
            for cfg, row in rows.items():
                if abs(sum(row) - 1.0) > 1e-9:
                    raise GraphError(f"CPT row {v!r}|{cfg} sums to {sum(row)!r}, not 1")
                if any(p < 0 for p in row):
                    raise GraphError(f"negative probability in CPT row {v!r}|{cfg}")
        object.__setattr__(self, "levels", levels)


def sample_discrete_bn(bn: DiscreteBn, n: int, seed: int) -> Dataset:
    """Ancestral sampling from the CPTs; deterministic per seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    order = bn.dag.topological_order()
    values: Dict[str, np.ndarray] = {}
    for v in order:
        parents = sorted(bn.dag.parents(v))
        out = np.empty(n, dtype=float)
        if not parents:
            row = np.asarray(bn.cpts[v][()])
            out[:] = rng.choice(len(row), size=n, p=row / row.sum())
        else:
            cfg_matrix = np.column_stack([values[p].astype(int) for p in parents])
            # Group rows by parent configuration and draw each group at once.
            for cfg, row in sorted(bn.cpts[v].items()):
                mask = np.all(cfg_matrix == np.asarray(cfg), axis=1)
                count = int(mask.sum())
                if count:
                    row = np.asarray(row)
                    out[mask] = rng.choice(len(row), size=count, p=row / row.sum())
        values[v] = out
    names = tuple(sorted(bn.dag.nodes))
    return Dataset(names=names, values=np.column_stack([values[v] for v in names]))


def _joint_distribution(bn: DiscreteBn, do: Optional[Dict[str, int]] = None):
    """Exact joint over all nodes, optionally with intervened values.

    Yields (assignment dict, probability); interventions cut the intervened
    node's CPT out of the product.
    """
    do = do or {}
    nodes = sorted(bn.dag.nodes)
    ranges = [range(bn.levels[v]) if v not in do else (do[v],) for v in nodes]
    for combo in itertools.product(*ranges):
        assignment = dict(zip(nodes, combo))
        prob = 1.0
        for v in nodes:
            if v in do:
                continue
            cfg = tuple(assignment[p] for p in sorted(bn.dag.parents(v)))
            prob *= bn.cpts[v][cfg][assignment[v]]
            if prob == 0.0:
                break
        if prob > 0.0:
            yield assignment, prob


def true_ace_discrete(bn: DiscreteBn, w: str, y: str, scale: str = "difference") -> float:
    """Ground-truth effect by exact enumeration of the truncated joint.

    ``difference`` returns E[Y|do(W=1)] - E[Y|do(W=0)]; ``log_odds_ratio``
    returns the log marginal causal odds ratio, which requires a binary
    outcome.
    """
    bn.dag._require(w, y)
    if bn.levels[w] != 2:
        raise GraphError("exact effect enumeration expects a binary treatment")
    means = {}
    p1 = {}
    for val in (0, 1):
        total = 0.0
        mean = 0.0
        prob_y1 = 0.0
        for assignment, prob in _joint_distribution(bn, do={w: val}):
            total += prob
            mean += prob * assignment[y]
            if assignment[y] == 1:
                prob_y1 += prob
        means[val] = mean / total
        p1[val] = prob_y1 / total
    if scale == "difference":
        return means[1] - means[0]
    if scale == "log_odds_ratio":
        if bn.levels[y] != 2:
            raise GraphError("log odds ratio needs a binary outcome")
        return math.log(p1[1] / (1 - p1[1])) - math.log(p1[0] / (1 - p1[0]))
    raise ValueError(f"unknown scale {scale!r}")


# ---------------------------------------------------------------------------
# Config grammar: the graph edge-list format extended with model lines.
#
#   A -> B                 directed edge
#   node C                 isolated node
#   weight A B 0.5         SEM edge coefficient
#   noise A 1.0            SEM noise standard deviation
#   binary A               SEM node drawn through a logistic link
#   latent A               column to drop for the masked variant
#   treatment W            designated treatment
#   outcome Y              designated outcome
#   cpt B | A C : 0 1 : 0.3 0.7    BN row: P(B | A=0, C=1)
#   cpt A : : 0.4 0.6              BN row for a parentless node
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelConfig:
    """Parsed simulation config: exactly one of `sem` or `bn` is set."""

    sem: Optional[LinearSem]
    bn: Optional[DiscreteBn]
    latents: FrozenSet[str]
    treatment: Optional[str]
    outcome: Optional[str]

    @property
    def dag(self) -> Dag:
        return (self.sem or self.bn).dag

    def sample(self, n: int, seed: int) -> Dataset:
        if self.sem is not None:
            data = sample_linear_sem(self.sem, n, seed)
        else:
            data = sample_discrete_bn(self.bn, n, seed)
        return data.with_designation(treatment=self.treatment, outcome=self.outcome)

    def true_ace(self) -> Optional[float]:
        if self.treatment is None or self.outcome is None:
            return None
        if self.sem is not None:
            return true_ace_linear(self.sem, self.treatment, self.outcome)
        return true_ace_discrete(self.bn, self.treatment, self.outcome)


def parse_model_config(text: str) -> ModelConfig:
    """Parse the extended grammar into a ModelConfig.

    A config is a SEM when it carries weight/noise lines and a BN when it
    carries cpt lines; mixing the two is an error.
    """
    graph_lines = []
    weights = {}
    noise = {}
    binary = set()
    latents = set()
    treatment = None
    outcome = None
    cpt_rows = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head in ("node",) or (len(parts) == 3 and parts[1] in ("->", "<->")):
            if "<->" in parts:
                raise ParseError("model configs must be DAGs (no <-> edges)", line_no)
            graph_lines.append(line)
        elif head == "weight":
            if len(parts) != 4:
                raise ParseError("expected `weight A B value`", line_no)
            try:
                weights[(parts[1], parts[2])] = float(parts[3])
            except ValueError:
                raise ParseError(f"bad weight value {parts[3]!r}", line_no) from None
        elif head == "noise":
            if len(parts) != 3:
                raise ParseError("expected `noise A value`", line_no)
            try:
                noise[parts[1]] = float(parts[2])
            except ValueError:
                raise ParseError(f"bad noise value {parts[2]!r}", line_no) from None
        elif head == "binary":
            if len(parts) != 2:
                raise ParseError("expected `binary A`", line_no)
            binary.add(parts[1])
        elif head == "latent":
            if len(parts) != 2:
                raise ParseError("expected `latent A`", line_no)
            latents.add(parts[1])
        elif head == "treatment":
            if len(parts) != 2:
                raise ParseError("expected `treatment A`", line_no)
            treatment = parts[1]
        elif head == "outcome":
            if len(parts) != 2:
                raise ParseError("expected `outcome A`", line_no)
            outcome = parts[1]
        elif head == "cpt":
            cpt_rows.append((line_no, line))
        else:
            raise ParseError(f"cannot parse config line: {raw.strip()!r}", line_no)

    try:
        graph = parse_graph_text("\n".join(graph_lines))
    except ParseError:
        raise
    if not isinstance(graph, Dag):
        raise ParseError("model configs must describe a DAG")

    if cpt_rows and (weights or noise or binary):
        raise ParseError("config mixes SEM lines (weight/noise/binary) with cpt lines")

    if treatment is not None and treatment not in graph:
        raise ParseError(f"treatment {treatment!r} is not a node")
    if outcome is not None and outcome not in graph:
        raise ParseError(f"outcome {outcome!r} is not a node")
    bad_latents = latents - set(graph.nodes)
    if bad_latents:
        raise ParseError(f"latent lines name unknown nodes: {sorted(bad_latents)}")
    if latents & {treatment, outcome}:
        raise ParseError("treatment and outcome cannot be latent")

    if cpt_rows:
        cpts = _parse_cpt_rows(graph, cpt_rows)
        bn = DiscreteBn(dag=graph, cpts=cpts)
        return ModelConfig(sem=None, bn=bn, latents=frozenset(latents),
                           treatment=treatment, outcome=outcome)

    for v in graph.nodes:
        noise.setdefault(v, 1.0)
    for e in graph.edges:
        if e not in weights:
            raise ParseError(f"missing `weight {e[0]} {e[1]} ...` line")
    sem = LinearSem(dag=graph, weights=weights, noise_sd=noise,
                    binary_nodes=frozenset(binary))
    return ModelConfig(sem=sem, bn=None, latents=frozenset(latents),
                       treatment=treatment, outcome=outcome)


def _parse_cpt_rows(graph: Dag, rows) -> Dict[str, Dict[Tuple[int, ...], Tuple[float, ...]]]:
    cpts: Dict[str, Dict[Tuple[int, ...], Tuple[float, ...]]] = {}
    for line_no, line in rows:
        body = line[len("cpt"):].strip()
        # Shapes: `NODE | P1 P2 : v1 v2 : p0 p1 ...` or `NODE : : p0 p1 ...`
        pieces = [p.strip() for p in body.split(":")]
        if len(pieces) != 3:
            raise ParseError("expected `cpt NODE | PARENTS : VALUES : PROBS`", line_no)
        head, values_part, probs_part = pieces
        if "|" in head:
            node, parents_part = (s.strip() for s in head.split("|", 1))
            parents = parents_part.split()
        else:
            node = head.strip()
            parents = []
        if node not in graph:
            raise ParseError(f"cpt for unknown node {node!r}", line_no)
        if sorted(parents) != sorted(graph.parents(node)):
            raise ParseError(
                f"cpt parents {parents} do not match DAG parents "
                f"{sorted(graph.parents(node))} for {node!r}",
                line_no,
            )
        try:
            raw_values = [int(v) for v in values_part.split()]
            probs = tuple(float(p) for p in probs_part.split())
        except ValueError:
            raise ParseError("bad number in cpt line", line_no) from None
        if len(raw_values) != len(parents):
            raise ParseError("one parent value per parent is required", line_no)
        # Rows are keyed by parent levels in sorted parent-name order.
        order = np.argsort(parents)
        cfg = tuple(raw_values[i] for i in order)
        cpts.setdefault(node, {})
        if cfg in cpts[node]:
            raise ParseError(f"duplicate cpt row for {node!r} | {cfg}", line_no)
        cpts[node][cfg] = probs
    return cpts
