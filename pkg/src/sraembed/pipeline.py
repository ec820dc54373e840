"""Recursive embedding of SRA-free spaces and the extension step it relies on.

``embed(space, k, alpha)`` recurses on a core subset with (k-1, alpha/2),
down to the distance-map embedding at k = 3, and at each level extends the
core embedding to the whole space with the scale-net map Phi built from
distance charts around SRA configurations.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .assouad import AssouadResult, ChartProvider, LocalChart, build_assouad, build_scale_function, zero_chart
from .audit import claims_hold, distortion_audit
from .errors import ConfigNotSra, ConfigWrongSize, MapClaimViolated, NotSraFree
from .extension import mcshane_extend
from .maps import PointMap
from .metric_core import FiniteMetricSpace, Subset, as_subset, ball, greedy_maximal_separated, restrict
from .sra import CriticalRadiusEntry, SraParams, build_core_subset, critical_radii, find_sra_subspace, subset_is_sra


def _require_sra_free(space: FiniteMetricSpace, k: int, alpha: float, level: int = 0) -> None:
    witness = find_sra_subspace(space, SraParams(alpha, k))
    if witness is not None:
        names = [space.labels[i] for i in witness]
        raise NotSraFree(
            f"level {level}: {names} is a {k}-point SRA({alpha:g}) subset", witness, level
        )


# -- base case ---------------------------------------------------------------


def base_case_net(space: FiniteMetricSpace) -> Subset:
    if space.n == 1:
        return (0,)
    return greedy_maximal_separated(space, range(space.n), space.diameter() / 10)


def base_case_embed(space: FiniteMetricSpace, alpha: float, check: bool = True) -> PointMap:
    """Distances to a maximal diam/10-separated net.

    On a space without 3-point SRA(alpha) subsets every pair has a coordinate
    moving by at least min(1/10, alpha) * d, and the map is sqrt(net)-Lipschitz.
    """
    if check:
        _require_sra_free(space, 3, alpha)
    net = base_case_net(space)
    values = space.dist[:, list(net)]
    s = min(0.1, alpha)
    return PointMap(
        space.all_points(),
        values,
        scale=s,
        claimed_distortion=math.sqrt(len(net)) * max(10.0, 1 / alpha),
    )


# -- local charts --------------------------------------------------------------


def local_chart_from_config(
    space: FiniteMetricSpace,
    config: Sequence[int],
    x: int,
    alpha: float,
    k: Optional[int] = None,
) -> LocalChart:
    """Distance chart on the open ball of radius alpha*R/6 around ``x``.

    ``config`` is an SRA(alpha/2) set of k-1 points containing ``x`` and R is
    its minimum pairwise distance. Coordinates are the distances to the other
    k-2 members in index order; the chart has lower factor alpha and
    distortion sqrt(k-2)/alpha on spaces free of k-point SRA(alpha) subsets.
    """
    config = as_subset(config, space.n)
    if k is None:
        k = len(config) + 1
    if len(config) != k - 1 or len(config) < 2 or x not in config:
        raise ConfigWrongSize(f"need {k - 1} configuration points including {x}, got {config}", config)
    if not subset_is_sra(space, config, alpha / 2):
        raise ConfigNotSra(f"configuration {config} is not SRA({alpha / 2:g})", config)
    sub = space.dist[np.ix_(config, config)]
    R = float(sub[np.triu_indices(len(config), 1)].min())
    radius = alpha / 6 * R
    domain = ball(space, x, radius)
    others = [c for c in config if c != x]
    values = space.dist[np.ix_(domain, others)]
    nbar = k - 2
    fmap = PointMap(domain, values, scale=alpha, claimed_distortion=math.sqrt(nbar) / alpha)
    return LocalChart(x, radius, nbar, fmap, math.sqrt(nbar) / alpha)


def configuration_provider(
    space: FiniteMetricSpace,
    entries: Sequence[CriticalRadiusEntry],
    core: Subset,
    alpha: float,
    k: int,
) -> ChartProvider:
    """Charts from critical-radius witnesses; zero charts on the core, where f = 0."""
    inside = set(core)

    def provider(x: int) -> LocalChart:
        if x in inside:
            return zero_chart(x, k - 2)
        entry = entries[x]
        if entry.witness is None:
            raise ConfigWrongSize(f"point {x} lies outside the core but has no SRA configuration", (x,))
        return local_chart_from_config(space, entry.witness, x, alpha, k)

    return provider


# -- extension ---------------------------------------------------------------


def extension_bounds(
    s: float,
    dist_phi: float,
    n: int,
    theta: float,
    D: float,
    nbar: int,
    M: int,
    palette: int,
    degenerate: bool = False,
    zeta: Optional[float] = None,
) -> tuple[float, float, float]:
    """(lower factor, Lipschitz bound, distortion bound) of the extended map.

    The core map has lower factor s and distortion dist_phi in R^n. When the
    core is the whole space the extension only appends zeros.
    """
    if degenerate:
        return s, dist_phi * s, dist_phi
    lip_phi1 = math.sqrt(n) * dist_phi * s
    lip_big = s * 110 * D * math.sqrt((nbar + 1) * M * palette)
    lip = math.hypot(lip_phi1, lip_big)
    if zeta is None:
        near = 9 * theta * s / (200 * dist_phi * math.sqrt(n))
    else:
        near = 9 * s / (40 * zeta)
    low = min(s / 5, near)
    return low, lip, lip / low


@dataclass(eq=False)
class ExtensionResult:
    map: PointMap
    phi1: PointMap
    assouad: AssouadResult
    Y: Subset
    s: float
    dist_phi: float
    theta: float
    zeta: float

    @property
    def n(self) -> int:
        return self.phi1.dim


def build_extension(
    space: FiniteMetricSpace,
    Y: Sequence[int],
    phi: PointMap,
    provider: ChartProvider,
    theta: float,
    D: float,
    nbar: int,
    lam: Optional[int] = None,
    zeta: Optional[float] = None,
) -> ExtensionResult:
    """Extend ``phi`` from Y to the whole space as (phi_1, s * Phi).

    phi_1 is the McShane extension with L = dist(phi) * s, Phi the scale-net
    map for f = theta * d(., Y) and zeta = 5 * dist(phi) * sqrt(n) / theta
    (a larger ``zeta`` may be forced; a smaller one leaves pairs uncovered).
    Multiplying Phi by s makes the construction homogeneous in the scale of
    ``phi``; Phi vanishes on Y, so the result still equals (phi, 0) there.
    """
    Y = as_subset(Y, space.n)
    if tuple(phi.domain) != Y:
        raise ValueError("phi must be defined exactly on Y")
    if not claims_hold(space, phi):
        raise MapClaimViolated(
            f"phi does not satisfy s = {phi.scale!r}, distortion = {phi.claimed_distortion!r} on Y"
        )
    s, dist_phi, n = phi.scale, phi.claimed_distortion, phi.dim
    phi1 = mcshane_extend(space, phi, dist_phi * s)
    f = build_scale_function(space, Y, theta)
    zeta_min = 5 * dist_phi * math.sqrt(n) / theta
    if zeta is None:
        zeta = zeta_min
    elif zeta < zeta_min:
        raise ValueError(f"zeta = {zeta!r} is below 5 * dist(phi) * sqrt(n) / theta = {zeta_min!r}")
    big = build_assouad(space, f, provider, D, nbar, zeta, lam)
    values = np.hstack([phi1.values, s * big.phi.values])
    low, _, dist_new = extension_bounds(
        s, dist_phi, n, theta, D, nbar, big.M, big.palette,
        degenerate=len(Y) == space.n, zeta=None if zeta == zeta_min else zeta,
    )
    out = PointMap(space.all_points(), values, scale=low, claimed_distortion=dist_new)
    return ExtensionResult(out, phi1, big, Y, s, dist_phi, theta, zeta)


def extend_embedding(
    space: FiniteMetricSpace,
    Y: Sequence[int],
    phi: PointMap,
    provider: ChartProvider,
    theta: float,
    D: float,
    nbar: int,
    lam: Optional[int] = None,
) -> PointMap:
    return build_extension(space, Y, phi, provider, theta, D, nbar, lam).map


# -- recursion ---------------------------------------------------------------


@dataclass
class LevelRecord:
    depth: int
    k: int
    alpha: float
    kind: str
    points: int
    dim: int
    scale: float
    distortion_bound: float
    net_size: Optional[int] = None
    core_size: Optional[int] = None
    theta: Optional[float] = None
    zeta: Optional[float] = None
    nbar: Optional[int] = None
    chart_distortion: Optional[float] = None
    M: Optional[int] = None
    palette: Optional[int] = None
    dim_in: Optional[int] = None
    degenerate: Optional[bool] = None
    measured_lipschitz: Optional[float] = None
    measured_colipschitz: Optional[float] = None
    measured_distortion: Optional[float] = None


@dataclass
class PipelineConstants:
    k: int
    alpha: float
    levels: list = field(default_factory=list)  # ordered by depth, top level first

    @property
    def base(self) -> LevelRecord:
        return self.levels[-1]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": self.alpha,
            "theoretical_bound": theoretical_bounds(self),
            "levels": [asdict(lv) for lv in self.levels],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConstants":
        return cls(obj["k"], obj["alpha"], [LevelRecord(**lv) for lv in obj["levels"]])


def _measure(space: FiniteMetricSpace, fmap: PointMap, record: LevelRecord) -> None:
    if space.n < 2:
        return
    report = distortion_audit(space, fmap)
    record.measured_lipschitz = report.lipschitz
    record.measured_colipschitz = report.colipschitz
    record.measured_distortion = report.distortion


def _embed_level(space, k, alpha, depth, threads, levels):
    _require_sra_free(space, k, alpha, depth)
    if k == 3:
        fmap = base_case_embed(space, alpha, check=False)
        record = LevelRecord(
            depth, k, alpha, "base", space.n, fmap.dim, fmap.scale, fmap.claimed_distortion,
            net_size=fmap.dim,
        )
        _measure(space, fmap, record)
        levels.append(record)
        return fmap

    params = SraParams(alpha, k)
    entries = critical_radii(space, params, threads)
    core, _ = build_core_subset(space, params, entries)
    sub_map = _embed_level(restrict(space, core), k - 1, alpha / 2, depth + 1, threads, levels)
    phi = PointMap(core, sub_map.values, scale=sub_map.scale, claimed_distortion=sub_map.claimed_distortion)

    theta = alpha / 6
    nbar = k - 2
    D = math.sqrt(nbar) / alpha
    provider = configuration_provider(space, entries, core, alpha, k)
    ext = build_extension(space, core, phi, provider, theta, D, nbar)
    fmap = ext.map
    record = LevelRecord(
        depth, k, alpha, "extension", space.n, fmap.dim, fmap.scale, fmap.claimed_distortion,
        core_size=len(core), theta=theta, zeta=ext.zeta, nbar=nbar, chart_distortion=D,
        M=ext.assouad.M, palette=ext.assouad.palette, dim_in=phi.dim,
        degenerate=len(core) == space.n,
    )
    _measure(space, fmap, record)
    levels.append(record)
    return fmap


def embed(
    space: FiniteMetricSpace, k: int, alpha: float, threads: int = 1
) -> tuple[PointMap, PipelineConstants]:
    """Embed a space free of k-point SRA(alpha) subsets into Euclidean space.

    Returns the map (with its proved lower factor and distortion bound as
    claims) and the per-level constants.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    SraParams(alpha, k)
    levels: list[LevelRecord] = []
    fmap = _embed_level(space, k, alpha, 0, threads, levels)
    levels.sort(key=lambda lv: lv.depth)
    return fmap, PipelineConstants(k, alpha, levels)


def theoretical_bounds(
    constants: PipelineConstants,
    net_size: Optional[int] = None,
    palettes: Optional[Sequence[int]] = None,
) -> float:
    """Distortion bound from composing the proved constants level by level.

    Measured base net size and palette sizes stand in for the doubling-based
    bounds; ``net_size`` and ``palettes`` (listed top level first, one per
    extension level) override the recorded values.
    """
    base = constants.base
    net = base.net_size if net_size is None else net_size
    alpha = base.alpha
    s = min(0.1, alpha)
    dist = math.sqrt(net) * max(10.0, 1 / alpha)
    dim = net
    extensions = [lv for lv in constants.levels if lv.kind == "extension"]
    if palettes is not None and len(palettes) != len(extensions):
        raise ValueError(f"expected {len(extensions)} palette sizes, got {len(palettes)}")
    for idx in range(len(extensions) - 1, -1, -1):
        lv = extensions[idx]
        j = lv.palette if palettes is None else palettes[idx]
        s, _, dist = extension_bounds(s, dist, dim, lv.theta, lv.chart_distortion, lv.nbar, lv.M, j, lv.degenerate)
        dim += (lv.nbar + 1) * lv.M * j
    return dist
