"""McShane extension and the far-pair co-Lipschitz guarantee for extended maps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .audit import CheckRecord, check_inequality, pair_ratios
from .errors import CoordinateNotLipschitz
from .maps import PointMap
from .metric_core import FiniteMetricSpace

LIP_RTOL = 1e-12


def check_coordinates_lipschitz(space: FiniteMetricSpace, fmap: PointMap, lip: float) -> None:
    """Raise CoordinateNotLipschitz unless every coordinate is ``lip``-Lipschitz on the domain."""
    dom = list(fmap.domain)
    P = fmap.values
    for r in range(len(dom) - 1):
        d = space.dist[dom[r], dom[r + 1 :]]
        gaps = np.abs(P[r + 1 :] - P[r])
        bad = gaps > (lip * d * (1 + LIP_RTOL))[:, None]
        if bad.any():
            row, coord = map(int, np.argwhere(bad)[0])
            a, b = dom[r], dom[r + 1 + row]
            raise CoordinateNotLipschitz(
                f"coordinate {coord} changes by {gaps[row, coord]!r} between points {a} and {b} "
                f"at distance {d[row]!r}, more than L = {lip!r} allows",
                (a, b, coord),
            )


def mcshane_extend(space: FiniteMetricSpace, partial: PointMap, lip: float, check: bool = True) -> PointMap:
    """Extend ``partial`` to every point by F_i(x) = min_y (f_i(y) + lip * d(x, y)).

    Each coordinate stays ``lip``-Lipschitz, so the vector map is
    sqrt(m)*lip-Lipschitz. Values on the original domain are copied verbatim.
    """
    if lip <= 0:
        raise ValueError("Lipschitz constant must be positive")
    if not partial.domain:
        raise ValueError("cannot extend a map with an empty domain")
    if check:
        check_coordinates_lipschitz(space, partial, lip)
    dom = list(partial.domain)
    P = partial.values
    weighted = lip * space.dist[:, dom]
    F = np.empty((space.n, partial.dim))
    for x in range(space.n):
        F[x] = (P + weighted[x][:, None]).min(axis=0)
    F[dom] = P
    return PointMap(
        tuple(range(space.n)),
        F,
        scale=partial.scale,
        claimed_distortion=partial.claimed_distortion,
    )


@dataclass(frozen=True)
class FarPairReport:
    pairs: int
    min_ratio: float
    witness: Optional[tuple]
    bound: float
    check: CheckRecord

    @property
    def passed(self) -> bool:
        return self.check.passed


def far_pair_colipschitz_report(
    space: FiniteMetricSpace,
    extended: PointMap,
    Y: Sequence[int],
    s: float,
    D: float,
    nu: float,
    K: float,
) -> FarPairReport:
    """Scan pairs with d(a,b) > K*nu*max(d(a,Y), d(b,Y)) and compare |dF|/(s*d) to
    1 - 2/(K*nu) - 2*D/K.
    """
    to_y = space.dist_to(Y)
    a, b, _, source, ratio = pair_ratios(space, extended)
    far = source > K * nu * np.maximum(to_y[a], to_y[b])
    bound = 1 - 2 / (K * nu) - 2 * D / K if K > 0 else -math.inf
    if not far.any():
        check = check_inequality("far-pair co-Lipschitz", bound, math.inf, ">=")
        return FarPairReport(0, math.inf, None, bound, check)
    scaled = ratio[far] / s
    i = int(np.argmin(scaled))
    witness = (int(a[far][i]), int(b[far][i]))
    check = check_inequality("far-pair co-Lipschitz", bound, float(scaled[i]), ">=")
    return FarPairReport(int(far.sum()), float(scaled[i]), witness, bound, check)
