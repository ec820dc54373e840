"""Deterministic instance families.

Pseudorandom coordinates come from SplitMix64 evaluated at a counter:
value i of a stream with seed s is mix(s + (i + 1) * 0x9E3779B97F4A7C15)
mod 2^64, and its top 53 bits give a double in [0, 1). Any implementation
of that mixer reproduces the same instances bit for bit.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidSpec
from .metric_core import FiniteMetricSpace, validate_metric

FAMILIES = ("line", "snowflake_line", "euclidean_cloud", "grid_l1")

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(seed: int, index: int) -> int:
    z = (seed + (index + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def uniform_stream(seed: int, count: int, start: int = 0) -> np.ndarray:
    return np.array([(splitmix64(seed, start + i) >> 11) * 2.0**-53 for i in range(count)])


@dataclass(frozen=True)
class GenSpec:
    family: str
    n: int
    exponent: Optional[float] = None
    dim: Optional[int] = None
    seed: int = 0

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidSpec("n must be a positive integer")
        if self.family == "snowflake_line":
            if self.exponent is None or not 0 < self.exponent < 1:
                raise InvalidSpec("snowflake_line needs an exponent in (0, 1)")
        if self.family in ("euclidean_cloud", "grid_l1"):
            if self.dim is None or self.dim < 1:
                raise InvalidSpec(f"{self.family} needs dim >= 1")
        if not 0 <= self.seed <= _MASK:
            raise InvalidSpec("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, obj: dict) -> "GenSpec":
        try:
            spec = cls(
                family=obj["family"],
                n=obj["n"],
                exponent=obj.get("exponent"),
                dim=obj.get("dim", 2 if obj.get("family") in ("euclidean_cloud", "grid_l1") else None),
                seed=obj.get("seed", 0),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"bad generator spec: {exc}") from exc
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, text: str) -> "GenSpec":
        return cls.from_dict(json.loads(text))


def cloud_points(n: int, dim: int, seed: int) -> np.ndarray:
    """Coordinates of ``euclidean_cloud``: point i, axis c uses stream index i*dim + c."""
    return uniform_stream(seed, n * dim).reshape(n, dim)


def grid_points(n: int, dim: int) -> np.ndarray:
    """All points of {0, ..., n-1}^dim in lexicographic order."""
    return np.array(list(itertools.product(range(n), repeat=dim)), dtype=np.float64)


def generate_points(spec: GenSpec) -> Optional[np.ndarray]:
    """Underlying coordinates for the coordinate-based families, else None."""
    spec.validate()
    if spec.family == "euclidean_cloud":
        return cloud_points(spec.n, spec.dim, spec.seed)
    if spec.family == "grid_l1":
        return grid_points(spec.n, spec.dim)
    if spec.family == "line":
        return np.arange(spec.n, dtype=np.float64)[:, None]
    return None


def generate(spec: GenSpec) -> FiniteMetricSpace:
    """Build and validate the instance described by ``spec``."""
    spec.validate()
    if spec.family in ("line", "snowflake_line"):
        idx = np.arange(spec.n, dtype=np.float64)
        gaps = np.abs(idx[:, None] - idx[None, :])
        if spec.family == "snowflake_line":
            gaps = gaps**spec.exponent
        return validate_metric(gaps)
    pts = generate_points(spec)
    diff = pts[:, None, :] - pts[None, :, :]
    if spec.family == "euclidean_cloud":
        dist = np.sqrt((diff * diff).sum(axis=2))
    else:
        dist = np.abs(diff).sum(axis=2)
    return validate_metric(dist)


def line(n: int) -> FiniteMetricSpace:
    return generate(GenSpec("line", n))


def snowflake_line(n: int, exponent: float) -> FiniteMetricSpace:
    return generate(GenSpec("snowflake_line", n, exponent=exponent))


def euclidean_cloud(n: int, dim: int = 2, seed: int = 0) -> FiniteMetricSpace:
    return generate(GenSpec("euclidean_cloud", n, dim=dim, seed=seed))
