"""Column-typed sample matrix with named variables.

The on-disk format is a plain CSV: one header row of names, one sample per
row, binary columns as 0/1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from .exceptions import GraphError, ParseError

CONTINUOUS = "continuous"
BINARY = "binary"
DISCRETE = "discrete"

_MAX_DISCRETE_LEVELS = 8


def infer_kind(column: np.ndarray) -> str:
    """Classify a column as binary, discrete (small integer set) or continuous."""
    values = np.unique(column[~np.isnan(column)])
    if values.size <= 2 and np.all(np.isin(values, (0.0, 1.0))):
        return BINARY
    if values.size <= _MAX_DISCRETE_LEVELS and np.all(values == np.round(values)):
        return DISCRETE
    return CONTINUOUS


@dataclass(frozen=True)
class Dataset:
    """Immutable (n, p) float matrix with column names and kinds.

    `treatment` and `outcome` are optional designations carried along so that
    column-dropping operations can refuse to remove them.
    """

    names: Tuple[str, ...]
    values: np.ndarray
    kinds: Tuple[str, ...] = field(default=())
    treatment: Optional[str] = None
    outcome: Optional[str] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        if values.shape[1] != len(self.names):
            raise ValueError("column count does not match names")
        if len(set(self.names)) != len(self.names):
            raise ValueError("column names must be unique")
        object.__setattr__(self, "values", values)
        if not self.kinds:
            kinds = tuple(infer_kind(values[:, j]) for j in range(values.shape[1]))
            object.__setattr__(self, "kinds", kinds)
        elif len(self.kinds) != len(self.names):
            raise ValueError("kinds must match names")
        for v in (self.treatment, self.outcome):
            if v is not None and v not in self.names:
                raise ValueError(f"designated column {v!r} not in dataset")
        object.__setattr__(self, "_index", {n: j for j, n in enumerate(self.names)})

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self._index[name]]
        except KeyError:
            raise KeyError(f"no column named {name!r}") from None

    def columns(self, names: Iterable[str]) -> np.ndarray:
        idx = [self._index[n] for n in names]
        return self.values[:, idx]

    def kind(self, name: str) -> str:
        return self.kinds[self._index[name]]

    def covariates(self) -> Tuple[str, ...]:
        """All columns other than the designated treatment and outcome."""
        skip = {self.treatment, self.outcome}
        return tuple(n for n in self.names if n not in skip)

    def drop(self, names: Iterable[str]) -> "Dataset":
        names = set(names)
        unknown = names - set(self.names)
        if unknown:
            raise KeyError(f"no such columns: {sorted(unknown)}")
        keep = [j for j, n in enumerate(self.names) if n not in names]
        return Dataset(
            names=tuple(self.names[j] for j in keep),
            values=self.values[:, keep],
            kinds=tuple(self.kinds[j] for j in keep),
            treatment=self.treatment,
            outcome=self.outcome,
        )

    def with_designation(self, treatment=None, outcome=None) -> "Dataset":
        return replace(self, treatment=treatment or self.treatment,
                       outcome=outcome or self.outcome)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=list(self.names))

    def to_csv(self, path) -> None:
        # %.10g keeps files byte-identical for a given seed across platforms.
        self.to_frame().to_csv(path, index=False, float_format="%.10g")

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, treatment=None, outcome=None) -> "Dataset":
        bad = [c for c in frame.columns if not np.issubdtype(frame[c].dtype, np.number)]
        if bad:
            raise ParseError(f"non-numeric columns: {bad}")
        return cls(
            names=tuple(str(c) for c in frame.columns),
            values=frame.to_numpy(dtype=float),
            treatment=treatment,
            outcome=outcome,
        )

    @classmethod
    def from_csv(cls, path, treatment=None, outcome=None) -> "Dataset":
        try:
            frame = pd.read_csv(path)
        except Exception as exc:
            raise ParseError(f"cannot read dataset {path}: {exc}") from exc
        if frame.isna().any().any():
            rows = np.where(frame.isna().any(axis=1))[0]
            raise ParseError(
                f"dataset {path} has missing values (first bad row: {rows[0] + 2})"
            )
        return cls.from_frame(frame, treatment=treatment, outcome=outcome)


def mask_latents(data: Dataset, latents: Iterable[str]) -> Dataset:
    """Column-dropped copy of `data`; refuses to drop treatment or outcome."""
    latents = set(latents)
    protected = latents & {data.treatment, data.outcome}
    if protected:
        raise GraphError(f"cannot mask designated columns: {sorted(protected)}")
    if not latents:
        return data
    return data.drop(latents)
