"""SRA(alpha) subsets, the SRA-free parameter, critical radii and core subsets.

A set satisfies SRA(alpha) when every triple obeys

    d(x,y) <= max(d(x,z) + alpha*d(z,y), alpha*d(x,z) + d(z,y)).

Triples with a repeated point always satisfy it, and the property is
hereditary, so a set is SRA iff each of its 3-point subsets is. All searches
below are clique searches in that 3-uniform hypergraph.
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .metric_core import FiniteMetricSpace, Subset, as_subset


class TieWarning(UserWarning):
    """An exact floating-point tie decided a strict comparison."""


@dataclass(frozen=True)
class SraParams:
    alpha: float
    k: int

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")


@dataclass(frozen=True)
class CriticalRadiusEntry:
    point: int
    radius: float
    witness: Optional[Subset] = None


def sra_triple_ok(space: FiniteMetricSpace, x: int, z: int, y: int, alpha: float) -> bool:
    d = space.dist
    return bool(d[x, y] <= max(d[x, z] + alpha * d[z, y], alpha * d[x, z] + d[z, y]))


def _ordered_ok(dist: np.ndarray, alpha: float) -> np.ndarray:
    """ok[x, z, y] for every ordered triple of rows of ``dist``."""
    xz = dist[:, :, None]
    zy = dist[None, :, :]
    xy = dist[:, None, :]
    return xy <= np.maximum(xz + alpha * zy, alpha * xz + zy)


def triple_table(space: FiniteMetricSpace, alpha: float) -> np.ndarray:
    """Symmetric table: ``t[a, b, c]`` is True iff {a, b, c} satisfies SRA(alpha)."""
    ok = _ordered_ok(space.dist, alpha)
    table = ok.copy()
    for perm in itertools.permutations(range(3)):
        table &= ok.transpose(perm)
    return table


def subset_is_sra(space: FiniteMetricSpace, subset: Sequence[int], alpha: float) -> bool:
    idx = list(subset)
    if not idx:
        raise ValueError("subset must be nonempty")
    sub = space.dist[np.ix_(idx, idx)]
    return bool(_ordered_ok(sub, alpha).all())


def _cliques(table: np.ndarray, size: int, pool: Sequence[int], prefix=()):
    """Yield SRA ``size``-sets in lexicographic order, each extending ``prefix``.

    ``pool`` lists the points allowed after the prefix; it must already be
    compatible with every pair inside the prefix.
    """
    need = size - len(prefix)
    if need == 0:
        yield tuple(prefix)
        return
    pool = np.asarray(pool, dtype=np.intp)
    for pos in range(len(pool) - need + 1):
        p = int(pool[pos])
        rest = pool[pos + 1 :]
        if len(prefix) and len(rest):
            # new triples (q, p, r) for q in prefix
            keep = table[np.asarray(prefix)[:, None], p, rest[None, :]].all(axis=0)
            rest = rest[keep]
        if len(rest) < need - 1:
            continue
        yield from _cliques(table, size, rest, prefix + (p,))


def find_sra_subspace(space: FiniteMetricSpace, params: SraParams) -> Optional[Subset]:
    """Lexicographically first ``k``-point SRA(alpha) subset, or None.

    Branch-and-prune: partial subsets are extended in index order and a branch
    is dropped as soon as a violating triple appears.
    """
    if params.k > space.n:
        return None
    if params.k <= 2:
        return tuple(range(params.k))
    table = triple_table(space, params.alpha)
    return next(_cliques(table, params.k, range(space.n)), None)


def find_sra_subspace_bruteforce(space: FiniteMetricSpace, params: SraParams) -> Optional[Subset]:
    """Reference enumeration of all k-subsets; used as an oracle."""
    for combo in itertools.combinations(range(space.n), params.k):
        if subset_is_sra(space, combo, params.alpha):
            return combo
    return None


def sra_free_parameter(space: FiniteMetricSpace, alpha: float) -> int:
    """Smallest k >= 3 such that the space has no k-point SRA(alpha) subset."""
    table = triple_table(space, alpha)
    for k in range(3, space.n + 1):
        if next(_cliques(table, k, range(space.n)), None) is None:
            return k
    return space.n + 1


def _min_pairwise(space: FiniteMetricSpace, subset: Sequence[int]) -> float:
    idx = list(subset)
    sub = space.dist[np.ix_(idx, idx)]
    return float(sub[np.triu_indices(len(idx), 1)].min())


def critical_radius(
    space: FiniteMetricSpace, x: int, params: SraParams, table: Optional[np.ndarray] = None
) -> CriticalRadiusEntry:
    """R(x): the largest minimum pairwise distance over SRA(alpha/2) sets of size k-1 through x.

    The witness is the lexicographically first set attaining the maximum.
    Returns radius 0 with no witness when no such set exists.
    """
    if params.k < 3:
        raise ValueError("critical radius needs k >= 3")
    size = params.k - 1
    if table is None:
        table = triple_table(space, params.alpha / 2)
    row = space.dist[x]
    others = [p for p in range(space.n) if p != x]
    if len(others) < size - 1:
        return CriticalRadiusEntry(x, 0.0, None)

    best_r, best_set = 0.0, None

    def search(members: tuple, pool: np.ndarray, cur_min: float) -> None:
        nonlocal best_r, best_set
        if len(members) == size:
            if cur_min > best_r:
                best_r, best_set = cur_min, tuple(sorted(members))
            return
        need = size - len(members)
        for pos in range(len(pool) - need + 1):
            p = int(pool[pos])
            new_min = min(cur_min, float(space.dist[p, list(members)].min()))
            if new_min <= best_r:
                continue
            rest = pool[pos + 1 :]
            if len(rest):
                mem = np.asarray(members)
                ok = table[mem[:, None], p, rest[None, :]].all(axis=0)
                near = space.dist[p, rest] > best_r
                rest = rest[ok & near]
            if len(rest) < need - 1:
                continue
            search(members + (p,), rest, new_min)

    pool = np.asarray([p for p in others if row[p] > 0], dtype=np.intp)
    search((x,), pool, float("inf"))
    if best_set is None:
        return CriticalRadiusEntry(x, 0.0, None)
    return CriticalRadiusEntry(x, best_r, best_set)


def critical_radius_bruteforce(space: FiniteMetricSpace, x: int, params: SraParams) -> CriticalRadiusEntry:
    best_r, best_set = 0.0, None
    others = [p for p in range(space.n) if p != x]
    for combo in itertools.combinations(others, params.k - 2):
        Y = tuple(sorted((x,) + combo))
        if not subset_is_sra(space, Y, params.alpha / 2):
            continue
        r = _min_pairwise(space, Y)
        if r > best_r:
            best_r, best_set = r, Y
    return CriticalRadiusEntry(x, best_r, best_set)


def critical_radii(space: FiniteMetricSpace, params: SraParams, threads: int = 1) -> list[CriticalRadiusEntry]:
    table = triple_table(space, params.alpha / 2)
    if threads == 1 or space.n < 2:
        return [critical_radius(space, x, params, table) for x in range(space.n)]

    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(lambda x: critical_radius(space, x, params, table), range(space.n)))


def build_core_subset(
    space: FiniteMetricSpace,
    params: SraParams,
    entries: Optional[Sequence[CriticalRadiusEntry]] = None,
) -> tuple[Subset, list[CriticalRadiusEntry]]:
    """Greedy maximal X' with d(x, y) > min(R(x), R(y)) for all distinct x, y in X'.

    Points are offered in ascending index order. Every excluded point x then
    has a kept x' with d(x, x') <= min(R(x), R(x')) <= R(x).
    """
    if params.k < 4:
        raise ValueError("core subsets are only used for k >= 4")
    if entries is None:
        entries = critical_radii(space, params)
    R = np.array([e.radius for e in entries])
    kept: list[int] = []
    ties = []
    for x in range(space.n):
        if kept:
            dk = space.dist[x, kept]
            bound = np.minimum(R[x], R[kept])
            blocking = dk <= bound
            if blocking.any():
                if (dk[blocking] == bound[blocking]).all():
                    ties.append(x)
                continue
        kept.append(x)
    if ties:
        warnings.warn(
            f"points {ties} were excluded from the core only through exact ties "
            "d(x, y) == min(R(x), R(y))",
            TieWarning,
            stacklevel=2,
        )
    return as_subset(kept), list(entries)


def verify_core_subset(space: FiniteMetricSpace, core: Subset, entries: Sequence[CriticalRadiusEntry]) -> bool:
    """Separation inside X' and the covering certificate d(x, X') <= R(x) outside it."""
    R = [e.radius for e in entries]
    for a, b in itertools.combinations(core, 2):
        if not space.dist[a, b] > min(R[a], R[b]):
            return False
    inside = set(core)
    for x in range(space.n):
        if x in inside:
            continue
        if not any(space.dist[x, y] <= R[x] for y in core):
            return False
    return True
