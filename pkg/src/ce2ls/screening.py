"""Faithfulness screening for simulated seeds.

A simulated dataset is usable when every CI query the local search issues
agrees with the exact oracle of the masked model's true MAG. Disagreeing
seeds are retried with shifted seeds a bounded number of times; exhausting
the retries raises UnusableSeedError.
"""

from __future__ import annotations

from typing import Optional, Tuple

from .citests import DEFAULT_ALPHA, FisherZBackend, OracleBackend, RecordingBackend
from .dataset import Dataset, mask_latents
from .datagen import ModelConfig
from .discovery import DEFAULT_MAX_COND
from .exceptions import UnusableSeedError
from .graphs import latent_project
from .search import DEFAULT_MAX_LEVEL, run_ce2ls

MAX_RETRIES = 5

_RETRY_STRIDE = 100_003  # large odd stride keeps retry seeds disjoint across bases


def screened_sample(
    config: ModelConfig,
    n: int,
    seed: int,
    alpha: float = DEFAULT_ALPHA,
    max_cond: int = DEFAULT_MAX_COND,
    max_level: int = DEFAULT_MAX_LEVEL,
    max_retries: int = MAX_RETRIES,
) -> Tuple[Dataset, int]:
    """Draw a masked dataset whose search-relevant CI answers match the oracle.

    Returns (masked dataset, seed actually used). The config must carry a
    treatment, an outcome and a SEM (screening checks Fisher-z answers).
    """
    if config.treatment is None or config.outcome is None:
        raise ValueError("screening needs designated treatment and outcome")
    if config.sem is None:
        raise ValueError("screening is defined for SEM configs")
    mag = latent_project(config.dag, config.latents)
    oracle = OracleBackend(mag)
    last: Optional[list] = None
    for attempt in range(max_retries + 1):
        used = seed + attempt * _RETRY_STRIDE
        data = mask_latents(config.sample(n, used), config.latents)
        recorder = RecordingBackend(
            FisherZBackend(data, alpha=alpha), oracle
        )
        run_ce2ls(
            recorder,
            config.treatment,
            config.outcome,
            list(data.covariates()),
            max_cond=max_cond,
            max_level=max_level,
            record_trace=False,
        )
        if not recorder.disagreements:
            return data, used
        last = recorder.disagreements
    raise UnusableSeedError(
        f"seed {seed}: {len(last)} CI answers still disagree with the oracle "
        f"after {max_retries} retries (first: {last[0][0]})"
    )
