"""PointMap: a map from (a subset of) a finite metric space into R^m."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .metric_core import Subset


@dataclass(frozen=True, eq=False)
class PointMap:
    """Values of a map on ``domain``, one row per domain point.

    ``scale`` is the lower factor s and ``claimed_distortion`` the D in
    ``s*d <= |F(a) - F(b)| <= D*s*d``. ``verified`` is only set once those
    claims were checked on every pair of the domain.
    """

    domain: Subset
    values: np.ndarray
    scale: float = 1.0
    claimed_distortion: float = 1.0
    verified: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals.reshape(len(self.domain), -1)
        if vals.shape[0] != len(self.domain):
            raise ValueError(f"{vals.shape[0]} value rows for a domain of {len(self.domain)} points")
        if list(self.domain) != sorted(set(self.domain)):
            raise ValueError("domain must be strictly increasing")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "domain", tuple(int(p) for p in self.domain))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def row_of(self, point: int) -> int:
        pos = np.searchsorted(self.domain, point)
        if pos >= len(self.domain) or self.domain[pos] != point:
            raise KeyError(point)
        return int(pos)

    def value(self, point: int) -> np.ndarray:
        return self.values[self.row_of(point)]

    def restrict(self, subset: Sequence[int]) -> "PointMap":
        rows = [self.row_of(p) for p in subset]
        return replace(self, domain=tuple(subset), values=self.values[rows], verified=False)

    def with_claims(self, scale: float, claimed_distortion: float, verified: bool = False) -> "PointMap":
        return replace(self, scale=float(scale), claimed_distortion=float(claimed_distortion), verified=verified)

    def lipschitz_claim(self) -> float:
        return self.claimed_distortion * self.scale


def concat(first: PointMap, second: PointMap, **claims) -> PointMap:
    """Side-by-side concatenation of two maps on the same domain."""
    if first.domain != second.domain:
        raise ValueError("maps have different domains")
    vals = np.hstack([first.values, second.values])
    return PointMap(first.domain, vals, **claims)


def lift(values_by_point: PointMap, n: int) -> np.ndarray:
    """Dense (n, dim) array with zero rows outside the domain."""
    out = np.zeros((n, values_by_point.dim))
    out[list(values_by_point.domain)] = values_by_point.values
    return out


def embedding_to_csv(labels: Sequence, values: np.ndarray) -> str:
    """``label,c0,c1,...`` header, one row per point, 17 significant digits."""
    values = np.asarray(values, dtype=np.float64)
    lines = [",".join(["label"] + [f"c{i}" for i in range(values.shape[1])])]
    for label, row in zip(labels, values):
        lines.append(",".join([str(label)] + ["%.17g" % v for v in row]))
    return "\n".join(lines) + "\n"


def embedding_from_csv(text: str) -> tuple[list, np.ndarray]:
    """Inverse of :func:`embedding_to_csv`: (labels, values)."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows or rows[0][0] != "label":
        raise ValueError("embedding CSV must start with a 'label,c0,...' header")
    width = len(rows[0]) - 1
    labels, values = [], []
    for r in rows[1:]:
        if len(r) != width + 1:
            raise ValueError(f"row for {r[0]!r} has {len(r) - 1} coordinates, expected {width}")
        labels.append(r[0])
        values.append([float(v) for v in r[1:]])
    return labels, np.array(values, dtype=np.float64).reshape(len(labels), width)
