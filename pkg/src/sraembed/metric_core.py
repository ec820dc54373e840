"""Finite metric spaces: validation, balls, separated nets, doubling constants."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DuplicatePoint,
    NegativeDistance,
    NonFiniteDistance,
    NonzeroDiagonal,
    NotSquare,
    NotSymmetric,
    TriangleViolation,
)

TRIANGLE_RTOL = 1e-12

Subset = tuple  # strictly increasing tuple of point indices


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    labels: tuple
    dist: np.ndarray

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def index(self, label) -> int:
        return self.labels.index(label)

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def all_points(self) -> Subset:
        return tuple(range(self.n))

    def dist_to(self, subset: Sequence[int]) -> np.ndarray:
        """Distance from every point to the nearest member of ``subset``."""
        return self.dist[:, list(subset)].min(axis=1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)

    __hash__ = None


def as_subset(members: Iterable[int], n: Optional[int] = None) -> Subset:
    """Normalize to a sorted duplicate-free tuple, validating indices against ``n``."""
    out = tuple(sorted({int(m) for m in members}))
    if n is not None and out and (out[0] < 0 or out[-1] >= n):
        raise IndexError(f"subset {out} has indices outside [0, {n})")
    return out


def validate_metric(matrix, labels: Optional[Sequence] = None) -> FiniteMetricSpace:
    """Validate a distance matrix and wrap it as a :class:`FiniteMetricSpace`.

    Checks run in a fixed order (shape, finiteness, diagonal, sign, symmetry,
    distinctness, triangle inequality) and the first failure raises with the
    lexicographically smallest witness. The triangle inequality is checked up
    to a relative tolerance of 1e-12 of the left-hand side.
    """
    d = np.array(matrix, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotSquare(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if labels is None:
        labels = tuple(f"p{i}" for i in range(n))
    labels = tuple(labels)
    if len(labels) != n:
        raise NotSquare(f"{len(labels)} labels for a {n}x{n} matrix")
    if len(set(labels)) != n:
        raise DuplicatePoint("labels are not unique")

    bad = np.argwhere(~np.isfinite(d))
    if len(bad):
        i, j = map(int, bad[0])
        raise NonFiniteDistance(f"non-finite distance at ({i},{j})", (i, j))
    bad = np.flatnonzero(np.diag(d) != 0)
    if len(bad):
        i = int(bad[0])
        raise NonzeroDiagonal(f"d[{i}][{i}] = {d[i, i]!r} is not zero", (i,))
    bad = np.argwhere(d < 0)
    if len(bad):
        i, j = map(int, bad[0])
        raise NegativeDistance(f"d[{i}][{j}] = {d[i, j]!r} is negative", (i, j))
    bad = np.argwhere(d != d.T)
    if len(bad):
        i, j = map(int, bad[0])
        raise NotSymmetric(f"d[{i}][{j}] = {d[i, j]!r} but d[{j}][{i}] = {d[j, i]!r}", (i, j))
    off = d + np.eye(n)
    bad = np.argwhere(off == 0)
    if len(bad):
        i, j = map(int, bad[0])
        raise DuplicatePoint(f"points {i} and {j} are at distance zero", (i, j))

    for i in range(n):
        # through[k, j] = d(i,k) + d(k,j)
        through = d[i][:, None] + d
        viol = d[i][None, :] > through + TRIANGLE_RTOL * d[i][None, :]
        hits = np.argwhere(viol.T)  # rows are (j, k)
        if len(hits):
            j, k = map(int, hits[0])
            raise TriangleViolation(
                f"d({i},{j}) = {d[i, j]!r} > d({i},{k}) + d({k},{j}) = {through[k, j]!r}",
                (i, j, k),
            )

    d.setflags(write=False)
    return FiniteMetricSpace(labels, d)


def ball(space: FiniteMetricSpace, center: int, r: float, closed: bool = False) -> Subset:
    """Points within distance ``r`` of ``center``; open (``<``) unless ``closed``."""
    row = space.dist[center]
    mask = row <= r if closed else row < r
    return tuple(int(i) for i in np.flatnonzero(mask))


def greedy_maximal_separated(
    space: FiniteMetricSpace, candidates: Iterable[int], r: float
) -> Subset:
    """Maximal ``r``-separated subset of ``candidates``, scanning in ascending index order.

    A candidate is kept iff its distance to every point kept so far is ``>= r``;
    so each rejected candidate is within ``< r`` of some kept point.
    """
    if r <= 0:
        raise ValueError("separation radius must be positive")
    kept: list[int] = []
    for c in sorted(set(int(c) for c in candidates)):
        if not kept or space.dist[c, kept].min() >= r:
            kept.append(c)
    return tuple(kept)


def restrict(space: FiniteMetricSpace, subset: Iterable[int]) -> FiniteMetricSpace:
    idx = list(as_subset(subset, space.n))
    if not idx:
        raise ValueError("cannot restrict to an empty subset")
    sub = space.dist[np.ix_(idx, idx)].copy()
    sub.setflags(write=False)
    return FiniteMetricSpace(tuple(space.labels[i] for i in idx), sub)


# -- doubling constant -------------------------------------------------------


@dataclass(frozen=True)
class DoublingCertificate:
    """The worst ball found and a minimum cover of it by half-radius balls.

    ``constant`` equals ``len(cover)`` and no smaller cover of ``ball`` exists.
    """

    constant: int
    center: int
    radius: float
    ball: Subset
    cover: Subset


def _row_masks(bits: np.ndarray) -> list[int]:
    """Encode each boolean row as a Python int bitmask (bit i <-> column i)."""
    if bits.shape[1] == 0:
        return [0] * bits.shape[0]
    packed = np.packbits(bits, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _greedy_cover(masks: list[int], full: int) -> list[int]:
    uncovered = full
    chosen = []
    while uncovered:
        best_c, best_gain = -1, 0
        for c, m in enumerate(masks):
            gain = (m & uncovered).bit_count()
            if gain > best_gain:
                best_c, best_gain = c, gain
        chosen.append(best_c)
        uncovered &= ~masks[best_c]
    return chosen


def _exact_cover(masks: list[int], full: int, incumbent: list[int]) -> list[int]:
    """Branch-and-bound minimum set cover, seeded with an incumbent solution."""
    nbits = full.bit_length()
    covering = [[c for c, m in enumerate(masks) if m >> p & 1] for p in range(nbits)]
    shareable = [0] * nbits
    for p in range(nbits):
        for c in covering[p]:
            shareable[p] |= masks[c]

    best = list(incumbent)

    def packing_bound(uncovered: int) -> int:
        # points that pairwise share no center each need their own center
        count, free = 0, uncovered
        while free:
            p = (free & -free).bit_length() - 1
            count += 1
            free &= ~shareable[p]
        return count

    def search(uncovered: int, chosen: list[int]) -> None:
        if not uncovered:
            if len(chosen) < len(best):
                best[:] = chosen
            return
        if len(chosen) + packing_bound(uncovered) >= len(best):
            return
        pivot, pivot_opts = -1, None
        rest = uncovered
        while rest:
            p = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            if pivot_opts is None or len(covering[p]) < len(pivot_opts):
                pivot, pivot_opts = p, covering[p]
        order = sorted(pivot_opts, key=lambda c: (-(masks[c] & uncovered).bit_count(), c))
        for c in order:
            search(uncovered & ~masks[c], chosen + [c])

    search(full, [])
    return best


def doubling_certificate(space: FiniteMetricSpace) -> DoublingCertificate:
    """Exact doubling constant over closed balls, with its extremal certificate.

    Radii are restricted to the distances ``d(x, y)`` from each center: between
    two consecutive such values the ball is fixed while the half-balls only
    grow, so the cover number there is no larger than at the left endpoint.
    Balls are ranked by their greedy cover size and the exact minimum is
    computed only while it can still raise the maximum.
    """
    n = space.n
    if n == 1:
        return DoublingCertificate(1, 0, 0.0, (0,), (0,))
    D = space.dist
    cands = []
    for x in range(n):
        for R in np.unique(D[x][D[x] > 0]):
            members = np.flatnonzero(D[x] <= R)
            masks = _row_masks(D[:, members] <= R / 2)
            full = (1 << len(members)) - 1
            greedy = _greedy_cover(masks, full)
            cands.append((len(greedy), x, float(R), members, masks, full, greedy))
    cands.sort(key=lambda c: (-c[0], c[1], c[2]))

    best: Optional[DoublingCertificate] = None
    for g, x, R, members, masks, full, greedy in cands:
        if best is not None and g <= best.constant:
            break
        cover = _exact_cover(masks, full, greedy)
        if best is None or len(cover) > best.constant:
            best = DoublingCertificate(
                len(cover), x, R, tuple(int(m) for m in members), tuple(sorted(cover))
            )
    assert best is not None
    return best


def doubling_constant_estimate(space: FiniteMetricSpace) -> int:
    return doubling_certificate(space).constant


# -- file formats ------------------------------------------------------------


def space_to_json(space: FiniteMetricSpace) -> str:
    return json.dumps({"labels": list(space.labels), "matrix": space.dist.tolist()})


def space_from_json(text: str) -> FiniteMetricSpace:
    obj = json.loads(text)
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise ValueError('expected a JSON object with a "matrix" key')
    return validate_metric(obj["matrix"], obj.get("labels"))


def space_from_csv(text: str) -> FiniteMetricSpace:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ValueError("empty CSV")
    header, body = rows[0], rows[1:]
    if header and header[0].strip() == "" and all(len(r) == len(header) for r in body):
        # row-labelled layout: leading blank header cell, label in column 0
        header = header[1:]
        body = [r[1:] for r in body]
    matrix = [[float(v) for v in row] for row in body]
    return validate_metric(matrix, [h.strip() for h in header])


def load_space(path, fmt: Optional[str] = None) -> FiniteMetricSpace:
    path = Path(path)
    text = path.read_text()
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    if fmt == "csv":
        return space_from_csv(text)
    return space_from_json(text)


def save_space(space: FiniteMetricSpace, path) -> None:
    Path(path).write_text(space_to_json(space) + "\n")
