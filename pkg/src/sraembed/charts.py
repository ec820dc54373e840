"""Chart providers that do not come from SRA configurations."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .assouad import LocalChart, ScaleFunction, zero_chart
from .audit import distortion_audit
from .maps import PointMap
from .metric_core import FiniteMetricSpace, ball


def coordinate_provider(space: FiniteMetricSpace, points: np.ndarray, f: ScaleFunction) -> Callable[[int], LocalChart]:
    """Isometric charts for spaces given by Euclidean coordinates (D = 1)."""
    points = np.asarray(points, dtype=np.float64)

    def provider(x: int) -> LocalChart:
        dom = ball(space, x, f(x), closed=True)
        fmap = PointMap(dom, points[list(dom)], scale=1.0, claimed_distortion=1.0)
        return LocalChart(x, f(x), points.shape[1], fmap, 1.0)

    return provider


def frechet_charts(space: FiniteMetricSpace, f: ScaleFunction) -> tuple[dict, int, float]:
    """Distance-to-ball-members charts for every point with f > 0.

    Each chart is non-contracting with its measured distortion at most
    sqrt(ball size). Charts are zero-padded to a common dimension. Returns
    (charts by point, common dimension, largest measured distortion).
    """
    balls = {x: ball(space, x, f(x), closed=True) for x in range(space.n) if f(x) > 0}
    nbar = max((len(b) for b in balls.values()), default=1)
    charts, worst = {}, 1.0
    for x, dom in balls.items():
        vals = np.zeros((len(dom), nbar))
        vals[:, : len(dom)] = space.dist[np.ix_(dom, dom)]
        fmap = PointMap(dom, vals)
        if len(dom) >= 2:
            report = distortion_audit(space, fmap)
            scale, dist = report.colipschitz, report.distortion
        else:
            scale, dist = 1.0, 1.0
        worst = max(worst, dist)
        charts[x] = LocalChart(x, f(x), nbar, fmap.with_claims(scale, dist), dist)
    return charts, nbar, worst


def table_provider(charts: dict, nbar: int) -> Callable[[int], LocalChart]:
    def provider(x: int) -> LocalChart:
        return charts[x] if x in charts else zero_chart(x, nbar)

    return provider


def frechet_map(space: FiniteMetricSpace, Y) -> PointMap:
    """Distances to every member of Y, restricted to Y, with measured claims."""
    Y = tuple(Y)
    fmap = PointMap(Y, space.dist[np.ix_(Y, Y)])
    if len(Y) < 2:
        return fmap
    report = distortion_audit(space, fmap)
    return fmap.with_claims(report.colipschitz, report.distortion)
