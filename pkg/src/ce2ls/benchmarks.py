"""Shipped benchmark models: two synthetic ground-truth structures.

Group 1 is a sparse 12-variable model (treatment W, outcome Y, covariates
X1..X10) whose latent variables are {X2, X4, X6}; the masked data admits
exactly two minimal adjustment sets, {X3, X5} and {X5, X9}, and contains an
M-structure through X8 so that adjusting for everything is biased. Group 2
is a denser 15-variable model with latents {X7, X11, X12}, seven open
back-door paths, an M-structure through X9, and the single minimal
adjustment set {X5, X6}.

The true average causal effect is 0.5 for group 1 and 2.0 for group 2, both
carried entirely by the direct W -> Y edge; `true_ace_linear` reproduces the
values, which the test suite pins.
"""

from __future__ import annotations

from .datagen import LinearSem
from .graphs import Dag, Mag, latent_project

GROUP1_TRUE_ACE = 0.5
GROUP2_TRUE_ACE = 2.0

GROUP1_LATENTS = frozenset({"X2", "X4", "X6"})
GROUP2_LATENTS = frozenset({"X7", "X11", "X12"})

_GROUP1_NODES = ["W", "Y"] + [f"X{i}" for i in range(1, 11)]

_GROUP1_EDGES = [
    ("X1", "W"),
    ("X3", "W"),
    ("X3", "X5"),
    ("X5", "W"),
    ("X5", "Y"),
    ("X9", "X5"),
    ("X9", "Y"),
    ("X7", "Y"),
    ("W", "Y"),
    # latent confounding: X2 and X6 form the M-structure through X8
    ("X2", "W"),
    ("X2", "X8"),
    ("X6", "X8"),
    ("X6", "Y"),
    # latent X4 links X7 and X10
    ("X4", "X7"),
    ("X4", "X10"),
]

_GROUP2_NODES = ["W", "Y"] + [f"X{i}" for i in range(1, 14)]

_GROUP2_EDGES = [
    ("X1", "W"),
    ("X2", "X1"),
    ("X3", "X2"),
    ("X4", "W"),
    ("X4", "X5"),
    ("X4", "X6"),
    ("X5", "W"),
    ("X5", "X6"),
    ("X5", "Y"),
    ("X6", "W"),
    ("X6", "Y"),
    ("W", "Y"),
    # latent X7 makes X8 a spouse of W
    ("X7", "W"),
    ("X7", "X8"),
    # latents X11, X12 form the M-structure through X9
    ("X11", "W"),
    ("X11", "X9"),
    ("X12", "X9"),
    ("X12", "Y"),
    # padding variables away from W and Y
    ("X13", "X10"),
]


def group1_dag() -> Dag:
    """Full group-1 DAG over all 12 variables, latents included."""
    return Dag(_GROUP1_NODES, _GROUP1_EDGES)


def group2_dag() -> Dag:
    """Full group-2 DAG over all 15 variables, latents included."""
    return Dag(_GROUP2_NODES, _GROUP2_EDGES)


def group1_mag() -> Mag:
    """Ground-truth MAG of group 1 after masking {X2, X4, X6}."""
    observed = sorted(set(_GROUP1_NODES) - GROUP1_LATENTS)
    directed = [
        ("X1", "W"),
        ("X3", "W"),
        ("X3", "X5"),
        ("X5", "W"),
        ("X5", "Y"),
        ("X9", "X5"),
        ("X9", "Y"),
        ("X7", "Y"),
        ("W", "Y"),
    ]
    bidirected = [("W", "X8"), ("X8", "Y"), ("X10", "X7")]
    return Mag(observed, directed, bidirected)


def group2_mag() -> Mag:
    """Ground-truth MAG of group 2 after masking {X7, X11, X12}."""
    observed = sorted(set(_GROUP2_NODES) - GROUP2_LATENTS)
    directed = [
        ("X1", "W"),
        ("X2", "X1"),
        ("X3", "X2"),
        ("X4", "W"),
        ("X4", "X5"),
        ("X4", "X6"),
        ("X5", "W"),
        ("X5", "X6"),
        ("X5", "Y"),
        ("X6", "W"),
        ("X6", "Y"),
        ("W", "Y"),
        ("X13", "X10"),
    ]
    bidirected = [("W", "X8"), ("W", "X9"), ("X9", "Y")]
    return Mag(observed, directed, bidirected)


def group1_sem() -> LinearSem:
    """Data-generating model for group 1; W is a binary treatment.

    Weights are tuned so the treatment is roughly balanced, every local CI
    query the search issues is decidable at desk-scale sample sizes, and the
    M-bias induced by adjusting for X8 is large enough to separate the
    always-adjust baselines from the local search.
    """
    dag = group1_dag()
    weights = {
        ("X1", "W"): 0.9,
        ("X3", "W"): 0.9,
        ("X3", "X5"): 0.8,
        ("X5", "W"): 0.9,
        ("X5", "Y"): 0.9,
        ("X9", "X5"): 0.8,
        ("X9", "Y"): 0.8,
        ("X7", "Y"): 0.7,
        ("W", "Y"): GROUP1_TRUE_ACE,
        ("X2", "W"): 1.0,
        ("X2", "X8"): 1.1,
        ("X6", "X8"): 1.1,
        ("X6", "Y"): 1.1,
        ("X4", "X7"): 0.9,
        ("X4", "X10"): 0.9,
    }
    noise_sd = {v: 1.0 for v in dag.nodes}
    noise_sd.update({"X5": 0.8, "X8": 0.6, "X7": 0.8, "X10": 0.8, "W": 0.5})
    return LinearSem(dag=dag, weights=weights, noise_sd=noise_sd, binary_nodes=frozenset({"W"}))


def group2_sem() -> LinearSem:
    """Data-generating model for group 2; W is a binary treatment."""
    dag = group2_dag()
    weights = {
        ("X1", "W"): 0.8,
        ("X2", "X1"): 0.8,
        ("X3", "X2"): 0.8,
        ("X4", "W"): 0.8,
        ("X4", "X5"): 0.9,
        ("X4", "X6"): 0.7,
        ("X5", "W"): 0.8,
        ("X5", "X6"): 0.7,
        ("X5", "Y"): 0.9,
        ("X6", "W"): 0.8,
        ("X6", "Y"): 0.9,
        ("W", "Y"): GROUP2_TRUE_ACE,
        ("X7", "W"): 0.9,
        ("X7", "X8"): 0.9,
        ("X11", "W"): 0.9,
        ("X11", "X9"): 1.0,
        ("X12", "X9"): 1.0,
        ("X12", "Y"): 1.0,
        ("X13", "X10"): 0.9,
    }
    noise_sd = {v: 1.0 for v in dag.nodes}
    noise_sd.update({"X1": 0.8, "X5": 0.8, "X6": 0.8, "X8": 0.8, "X9": 0.6, "X10": 0.8, "W": 0.5})
    return LinearSem(dag=dag, weights=weights, noise_sd=noise_sd, binary_nodes=frozenset({"W"}))


def projected_group1_mag() -> Mag:
    """Latent projection of the group-1 DAG (should equal `group1_mag`)."""
    return latent_project(group1_dag(), GROUP1_LATENTS)


def projected_group2_mag() -> Mag:
    """Latent projection of the group-2 DAG (should equal `group2_mag`)."""
    return latent_project(group2_dag(), GROUP2_LATENTS)
