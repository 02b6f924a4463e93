"""Conditional-independence backends behind one small contract.

Three interchangeable decision sources: a Fisher-z partial-correlation test
for continuous data, a G-squared likelihood-ratio test for discrete data,
and an exact graph oracle. Each backend answers `query(x, y, z)` with a
CiResult and keeps a running count of queries, which drives the efficiency
accounting downstream.

Backends are read-only over immutable inputs after a one-time cache build,
so concurrent queries are safe; the counter is a plain tally with no
ordering guarantees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy import stats

from .dataset import BINARY, CONTINUOUS, DISCRETE, Dataset
from .exceptions import GraphError, InsufficientDataError
from .graphs import Dag, Mag, d_separated, m_separated

DEFAULT_ALPHA = 0.05

_MAX_G2_LEVELS = 8


@dataclass(frozen=True)
class CiQuery:
    x: str
    y: str
    z: frozenset

    def __post_init__(self):
        if self.x == self.y:
            raise ValueError("query needs two distinct variables")
        if self.x in self.z or self.y in self.z:
            raise ValueError("conditioning set must not contain the query variables")
        object.__setattr__(self, "z", frozenset(self.z))


@dataclass(frozen=True)
class CiResult:
    independent: bool
    statistic: float
    p_value: float
    dof_or_n: float
    note: Optional[str] = None

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError(f"p-value out of range: {self.p_value}")


class CiBackend:
    """Base contract: `query` plus a test counter."""

    def __init__(self):
        self.test_count = 0

    def reset_count(self) -> None:
        self.test_count = 0

    def query(self, x: str, y: str, z: Iterable[str] = ()) -> CiResult:
        self.test_count += 1
        return self._decide(CiQuery(x, y, frozenset(z)))

    def independent(self, x: str, y: str, z: Iterable[str] = ()) -> bool:
        return self.query(x, y, z).independent

    def _decide(self, q: CiQuery) -> CiResult:  # pragma: no cover - abstract
        raise NotImplementedError


class OracleBackend(CiBackend):
    """Exact oracle: independence is graphical separation in the given graph."""

    def __init__(self, graph):
        super().__init__()
        if not isinstance(graph, (Dag, Mag)):
            raise GraphError("oracle needs a Dag or Mag")
        self.graph = graph
        self._sep = m_separated if isinstance(graph, Mag) else d_separated

    def _decide(self, q: CiQuery) -> CiResult:
        independent = self._sep(self.graph, q.x, q.y, q.z)
        return CiResult(
            independent=independent,
            statistic=0.0,
            p_value=1.0 if independent else 0.0,
            dof_or_n=0.0,
        )


class FisherZBackend(CiBackend):
    """Fisher-z test on the partial correlation of x and y given z.

    Columns are standardized once; each query computes the needed
    correlation submatrix from the raw columns (O(n) per test) and inverts
    it. The partial correlation r comes from the precision matrix, the
    statistic is sqrt(n - |z| - 3) * atanh(r), and the p-value is two-sided
    normal. A singular submatrix is reported as dependent with p = 0 and a
    collinearity note instead of raising, so searches degrade gracefully.
    """

    def __init__(self, data: Dataset, alpha: float = DEFAULT_ALPHA):
        super().__init__()
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        self.alpha = alpha
        self.data = data
        values = data.values
        centered = values - values.mean(axis=0)
        sd = centered.std(axis=0)
        self._degenerate = tuple(
            name for name, s in zip(data.names, sd) if not s > 0.0
        )
        sd = np.where(sd > 0.0, sd, 1.0)
        self._std = np.ascontiguousarray(centered / sd)
        self._col = {name: j for j, name in enumerate(data.names)}

    def _decide(self, q: CiQuery) -> CiResult:
        n = self.data.n
        z = sorted(q.z)
        if n <= len(z) + 3:
            raise InsufficientDataError(
                f"need n > |z| + 3 (n={n}, |z|={len(z)})"
            )
        names = [q.x, q.y] + z
        for name in names:
            if name not in self._col:
                raise KeyError(f"no column named {name!r}")
        if any(name in self._degenerate for name in names):
            return CiResult(False, math.inf, 0.0, float(n), note="collinear")
        block = self._std[:, [self._col[name] for name in names]]
        corr = block.T @ block / n
        try:
            precision = np.linalg.inv(corr)
        except np.linalg.LinAlgError:
            return CiResult(False, math.inf, 0.0, float(n), note="collinear")
        denom = precision[0, 0] * precision[1, 1]
        if denom <= 0 or not np.isfinite(denom):
            return CiResult(False, math.inf, 0.0, float(n), note="collinear")
        r = -precision[0, 1] / math.sqrt(denom)
        r = min(1.0 - 1e-12, max(-1.0 + 1e-12, r))
        statistic = math.sqrt(n - len(z) - 3) * math.atanh(r)
        p = 2.0 * stats.norm.sf(abs(statistic))
        return CiResult(p > self.alpha, statistic, p, float(n))


class GSquaredBackend(CiBackend):
    """G-squared likelihood-ratio test over contingency strata of z.

    All referenced columns must be discrete with at most 8 levels. Empty
    strata are skipped with a matching reduction in degrees of freedom; a
    non-positive dof is reported as independent with a note.
    """

    def __init__(self, data: Dataset, alpha: float = DEFAULT_ALPHA):
        super().__init__()
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        self.alpha = alpha
        self.data = data
        self._codes = {}
        self._levels = {}
        for j, name in enumerate(data.names):
            if data.kinds[j] == CONTINUOUS:
                continue
            column = data.values[:, j]
            values, codes = np.unique(column, return_inverse=True)
            self._codes[name] = codes.astype(np.int64)
            self._levels[name] = len(values)

    def _column(self, name: str) -> Tuple[np.ndarray, int]:
        if name not in self._codes:
            raise GraphError(
                f"column {name!r} is not discrete; the G-squared test needs "
                "binary or discrete columns"
            )
        levels = self._levels[name]
        if levels > _MAX_G2_LEVELS:
            raise GraphError(f"column {name!r} has {levels} levels (max {_MAX_G2_LEVELS})")
        return self._codes[name], levels

    def _decide(self, q: CiQuery) -> CiResult:
        xc, rx = self._column(q.x)
        yc, ry = self._column(q.y)
        n = self.data.n
        strata = np.zeros(n, dtype=np.int64)
        n_strata = 1
        for name in sorted(q.z):
            zc, rz = self._column(name)
            strata = strata * rz + zc
            n_strata *= rz
        # One (rx, ry) table per stratum, built with a single bincount.
        flat = (strata * rx + xc) * ry + yc
        counts = np.bincount(flat, minlength=n_strata * rx * ry).reshape(n_strata, rx, ry)
        g2 = 0.0
        nonempty = 0
        for table in counts:
            total = table.sum()
            if total == 0:
                continue
            nonempty += 1
            rows = table.sum(axis=1, keepdims=True)
            cols = table.sum(axis=0, keepdims=True)
            expected = rows * cols / total
            mask = table > 0
            g2 += 2.0 * float(np.sum(table[mask] * np.log(table[mask] / expected[mask])))
        dof = (rx - 1) * (ry - 1) * nonempty
        if dof <= 0:
            return CiResult(True, 0.0, 1.0, 0.0, note="no degrees of freedom")
        p = float(stats.chi2.sf(g2, dof))
        return CiResult(p > self.alpha, g2, p, float(dof))


def backend_for(data: Dataset, alpha: float = DEFAULT_ALPHA) -> CiBackend:
    """Pick the test for a dataset: G-squared when every column is discrete,
    Fisher-z otherwise (binary columns are then treated as numeric)."""
    if all(kind in (BINARY, DISCRETE) for kind in data.kinds):
        return GSquaredBackend(data, alpha=alpha)
    return FisherZBackend(data, alpha=alpha)


class RecordingBackend(CiBackend):
    """Answers from a primary backend while logging disagreements with a
    reference backend. Used for faithfulness screening of simulated seeds."""

    def __init__(self, primary: CiBackend, reference: CiBackend):
        super().__init__()
        self.primary = primary
        self.reference = reference
        self.disagreements = []

    def _decide(self, q: CiQuery) -> CiResult:
        result = self.primary.query(q.x, q.y, q.z)
        truth = self.reference.query(q.x, q.y, q.z)
        if result.independent != truth.independent:
            self.disagreements.append((q, result.independent, truth.independent))
        return result
