"""Causal effect estimation by local search over minimal adjustment sets."""

from .dataset import Dataset, mask_latents
from .graphs import (
    Dag,
    Mag,
    Path,
    d_separated,
    enumerate_minimal_gac_sets,
    forbidden_set,
    generalized_backdoor_paths,
    is_amenable,
    is_visible,
    latent_project,
    m_separated,
    parse_graph_text,
    satisfies_gac,
)

__version__ = "0.1.0"

__all__ = [
    "Dag",
    "Mag",
    "Path",
    "Dataset",
    "mask_latents",
    "d_separated",
    "m_separated",
    "is_visible",
    "is_amenable",
    "generalized_backdoor_paths",
    "forbidden_set",
    "satisfies_gac",
    "enumerate_minimal_gac_sets",
    "latent_project",
    "parse_graph_text",
    "__version__",
]
