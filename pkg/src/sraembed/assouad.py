"""Scale-net embedding: layered nets, bump charts, coloring and block assembly.

Given a 1-Lipschitz scale function f and, around every point x, a chart of
the ball of radius f(x) into R^nbar with distortion <= D, this builds a map
Phi into R^((nbar+1)*M*j) that vanishes where f does, is Lipschitz, and is
co-Lipschitz on pairs with d <= zeta * max f.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .audit import RTOL, CheckRecord, check_inequality, pair_ratios
from .errors import ChartDistortionExceeded, ChartNotNoncontracting, ChartTooSmall
from .extension import mcshane_extend
from .maps import PointMap
from .metric_core import FiniteMetricSpace, Subset, ball, greedy_maximal_separated

SUPPORT_FACTOR = 1.1


@dataclass(frozen=True, eq=False)
class ScaleFunction:
    values: np.ndarray
    gamma: float = 1.0

    def __call__(self, x: int) -> float:
        return float(self.values[x])


def make_scale_function(space: FiniteMetricSpace, values, gamma: float = 1.0) -> ScaleFunction:
    """Wrap ``values`` after checking they are nonnegative and ``gamma``-Lipschitz."""
    vals = np.array(values, dtype=np.float64)
    if vals.shape != (space.n,):
        raise ValueError(f"expected {space.n} values, got shape {vals.shape}")
    if (vals < 0).any():
        raise ValueError("scale function must be nonnegative")
    gaps = np.abs(vals[:, None] - vals[None, :])
    if (gaps > gamma * space.dist * (1 + 1e-12)).any():
        i, j = map(int, np.argwhere(gaps > gamma * space.dist * (1 + 1e-12))[0])
        raise ValueError(f"scale function is not {gamma}-Lipschitz at ({i}, {j})")
    vals.setflags(write=False)
    return ScaleFunction(vals, float(gamma))


def build_scale_function(space: FiniteMetricSpace, Y: Sequence[int], theta: float) -> ScaleFunction:
    """f(x) = theta * d(x, Y)."""
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    if not len(Y):
        raise ValueError("Y must be nonempty")
    return make_scale_function(space, theta * space.dist_to(Y), 1.0)


@dataclass(frozen=True)
class ScaleNet:
    k: int
    members: Subset


def _floor_log2(v: float) -> int:
    m, e = math.frexp(v)  # v = m * 2**e, 0.5 <= m < 1
    return e - 1


def _ceil_log2(v: float) -> int:
    m, e = math.frexp(v)
    return e - 1 if m == 0.5 else e


def scale_layer(f: ScaleFunction, k: int) -> Subset:
    lo, hi = math.ldexp(1.0, k), math.ldexp(1.0, k + 2)
    return tuple(int(i) for i in np.flatnonzero((f.values >= lo) & (f.values <= hi)))


def scale_window(f: ScaleFunction) -> range:
    pos = f.values[f.values > 0]
    if not len(pos):
        return range(0)
    return range(_floor_log2(float(pos.min())) - 2, _ceil_log2(float(pos.max())) + 1)


def build_scale_nets(space: FiniteMetricSpace, f: ScaleFunction) -> list[ScaleNet]:
    nets = []
    for k in scale_window(f):
        layer = scale_layer(f, k)
        if layer:
            nets.append(ScaleNet(k, greedy_maximal_separated(space, layer, math.ldexp(1.0, k) / 10)))
    return nets


@dataclass(frozen=True)
class ColoredScaleNets:
    nets: tuple
    color: dict  # (k, point) -> color in 1..palette
    palette: int


def palette_bound(lam: int, zeta: float) -> float:
    try:
        return math.ceil(lam ** (2 + math.log2(100 * zeta)))
    except OverflowError:
        return math.inf


def color_nets(
    space: FiniteMetricSpace,
    nets: Sequence[ScaleNet],
    zeta: float,
    lam: Optional[int] = None,
) -> ColoredScaleNets:
    """First-fit coloring of each net's conflict graph (edge iff d < 10 * 2^k * zeta).

    Nets are processed by ascending k and members by ascending index. The
    palette has at least one color so block dimensions never collapse to zero.
    """
    if zeta < 1:
        raise ValueError("zeta must be at least 1")
    color: dict = {}
    used = 0
    for net in sorted(nets, key=lambda t: t.k):
        threshold = 10 * math.ldexp(1.0, net.k) * zeta
        done: list[int] = []
        for p in net.members:
            taken = {color[(net.k, q)] for q in done if space.dist[p, q] < threshold}
            c = 1
            while c in taken:
                c += 1
            color[(net.k, p)] = c
            used = max(used, c)
            done.append(p)
    palette = max(used, 1)
    if lam is not None and palette > palette_bound(lam, zeta):
        warnings.warn(
            f"palette size {palette} exceeds the doubling bound {palette_bound(lam, zeta)} for lambda={lam}",
            stacklevel=2,
        )
    return ColoredScaleNets(tuple(sorted(nets, key=lambda t: t.k)), color, palette)


def modulus(D: float, nbar: int) -> int:
    """max(8, ceil(log2(440 * D * sqrt(nbar + 1))))."""
    if D < 1 or nbar < 1:
        raise ValueError("need D >= 1 and nbar >= 1")
    return max(8, math.ceil(math.log2(440 * D * math.sqrt(nbar + 1))))


@dataclass(frozen=True, eq=False)
class LocalChart:
    """A map of a ball around ``center`` into R^dim with distortion <= ``distortion``.

    ``map.scale`` is the chart's lower factor; values are divided by it before use.
    """

    center: int
    radius: float
    dim: int
    map: PointMap
    distortion: float


ChartProvider = Callable[[int], LocalChart]


def zero_chart(x: int, nbar: int) -> LocalChart:
    """Constant chart on the singleton {x}; used where f(x) = 0."""
    return LocalChart(x, 0.0, nbar, PointMap((x,), np.zeros((1, nbar))), 1.0)


def hyperplane_isometry(nbar: int) -> np.ndarray:
    """Orthonormal basis (as columns) of {y in R^(nbar+1) : sum(y) = 0}.

    Gram-Schmidt on e_i - e_(i+1), so the result is fixed for each nbar.
    """
    basis: list[np.ndarray] = []
    for i in range(nbar):
        v = np.zeros(nbar + 1)
        v[i], v[i + 1] = 1.0, -1.0
        for u in basis:
            v = v - (u @ v) * u
        basis.append(v / np.linalg.norm(v))
    if not basis:
        return np.zeros((nbar + 1, 0))
    return np.column_stack(basis)


def _check_chart_on(space: FiniteMetricSpace, psi: np.ndarray, pts: Sequence[int], D: float) -> None:
    for r in range(len(pts) - 1):
        diff = psi[r + 1 :] - psi[r]
        image = np.sqrt((diff * diff).sum(axis=1))
        d = space.dist[pts[r], list(pts[r + 1 :])]
        low = image < d * (1 - RTOL)
        if low.any():
            i = int(np.flatnonzero(low)[0])
            raise ChartNotNoncontracting(
                f"chart contracts the pair ({pts[r]}, {pts[r + 1 + i]}): {image[i]!r} < {d[i]!r}",
                (pts[r], pts[r + 1 + i]),
            )
        high = image > D * d * (1 + RTOL)
        if high.any():
            i = int(np.flatnonzero(high)[0])
            raise ChartDistortionExceeded(
                f"chart expands the pair ({pts[r]}, {pts[r + 1 + i]}) by more than D = {D!r}",
                (pts[r], pts[r + 1 + i]),
            )


def build_bump_chart(space: FiniteMetricSpace, x: int, k: int, chart: LocalChart, D: float) -> PointMap:
    """The bump map P_x at scale k, a total map into R^(nbar+1).

    On the closed ball of radius 2^(k-1) it is the normalized chart rotated
    into the hyperplane {sum = 2^k * sqrt(nbar+1)} with x sent to the point
    2^k/sqrt(nbar+1) * (1, ..., 1); it vanishes beyond 1.1 * 2^(k-1) and the
    annulus in between is filled coordinate-wise by McShane with constant 40*D.
    """
    inner_r = math.ldexp(1.0, k - 1)
    if chart.radius < inner_r:
        raise ChartTooSmall(f"chart radius {chart.radius!r} < 2^(k-1) = {inner_r!r}", (x, k))
    inner = ball(space, x, inner_r, closed=True)
    domain = set(chart.map.domain)
    missing = [z for z in inner if z not in domain]
    if missing:
        raise ChartTooSmall(f"chart around {x} does not cover point {missing[0]} of the inner ball", (x, missing[0]))
    nbar = chart.dim
    psi = np.array([chart.map.value(z) for z in inner]) / chart.map.scale
    _check_chart_on(space, psi, inner, D)

    A = hyperplane_isometry(nbar)
    offset = math.ldexp(1.0, k) / math.sqrt(nbar + 1) * np.ones(nbar + 1)
    origin = chart.map.value(x) / chart.map.scale
    inner_vals = offset + (psi - origin) @ A.T

    outer = tuple(int(z) for z in np.flatnonzero(space.dist[x] > SUPPORT_FACTOR * inner_r))
    dom = sorted(inner + outer)
    vals = np.zeros((len(dom), nbar + 1))
    pos = {z: i for i, z in enumerate(dom)}
    for row, z in enumerate(inner):
        vals[pos[z]] = inner_vals[row]
    partial = PointMap(tuple(dom), vals)
    full = mcshane_extend(space, partial, 40 * D)
    return full.with_claims(scale=1.0, claimed_distortion=40 * D * math.sqrt(nbar + 1))


@dataclass(frozen=True, eq=False)
class Bump:
    k: int
    center: int
    color: int
    block: int
    support: Subset  # closed ball of radius 1.1 * 2^(k-1)
    map: PointMap


@dataclass(eq=False)
class AssouadResult:
    phi: PointMap
    f: ScaleFunction
    colored: ColoredScaleNets
    M: int
    palette: int
    nbar: int
    D: float
    zeta: float
    bumps: list = field(default_factory=list)

    @property
    def blocks(self) -> int:
        return self.M * self.palette

    def block_index(self, k: int, color: int) -> int:
        return (k % self.M) * self.palette + (color - 1)

    def block_values(self, block: int) -> np.ndarray:
        w = self.nbar + 1
        return self.phi.values[:, block * w : (block + 1) * w]

    def lipschitz_bound(self) -> float:
        return 110 * self.D * math.sqrt((self.nbar + 1) * self.M * self.palette)

    def colipschitz_bound(self) -> float:
        return 9 * self.f.gamma / (40 * self.zeta)

    def debug_dump(self, labels: Sequence) -> dict:
        return {
            "M": self.M,
            "palette": self.palette,
            "nbar": self.nbar,
            "D": self.D,
            "zeta": self.zeta,
            "dim": self.phi.dim,
            "nets": [
                {
                    "k": net.k,
                    "members": [labels[p] for p in net.members],
                    "colors": [self.colored.color[(net.k, p)] for p in net.members],
                }
                for net in self.colored.nets
            ],
            "block_norms": {
                labels[z]: [float(np.linalg.norm(self.block_values(b)[z])) for b in range(self.blocks)]
                for z in range(len(labels))
            },
        }


def build_assouad(
    space: FiniteMetricSpace,
    f: ScaleFunction,
    provider: ChartProvider,
    D: float,
    nbar: int,
    zeta: float,
    lam: Optional[int] = None,
) -> AssouadResult:
    """Build Phi together with everything needed to audit it."""
    if f.gamma != 1.0:
        raise ValueError("rescale the metric so the scale function is 1-Lipschitz")
    nets = build_scale_nets(space, f)
    colored = color_nets(space, nets, zeta, lam)
    M = modulus(D, nbar)
    j = colored.palette
    w = nbar + 1
    values = np.zeros((space.n, w * M * j))
    result = AssouadResult(PointMap(space.all_points(), values), f, colored, M, j, nbar, D, zeta)

    charts: dict[int, LocalChart] = {}
    for net in colored.nets:
        for x in net.members:
            if x not in charts:
                chart = provider(x)
                if chart.dim != nbar:
                    raise ChartDistortionExceeded(f"chart at {x} has dimension {chart.dim}, expected {nbar}", (x,))
                if chart.distortion > D:
                    raise ChartDistortionExceeded(f"chart at {x} has distortion {chart.distortion!r} > D = {D!r}", (x,))
                if chart.radius < f(x):
                    raise ChartTooSmall(f"chart at {x} has radius {chart.radius!r} < f(x) = {f(x)!r}", (x,))
                charts[x] = chart
            color = colored.color[(net.k, x)]
            block = result.block_index(net.k, color)
            P = build_bump_chart(space, x, net.k, charts[x], D)
            values[:, block * w : (block + 1) * w] += P.values
            support = ball(space, x, SUPPORT_FACTOR * math.ldexp(1.0, net.k - 1), closed=True)
            result.bumps.append(Bump(net.k, x, color, block, support, P))

    # Phi vanishes on {f = 0}, so it carries no global lower factor of its own
    result.phi = PointMap(space.all_points(), values)
    return result


def assemble_phi(
    space: FiniteMetricSpace,
    f: ScaleFunction,
    provider: ChartProvider,
    D: float,
    nbar: int,
    zeta: float,
    lam: Optional[int] = None,
) -> PointMap:
    return build_assouad(space, f, provider, D, nbar, zeta, lam).phi


def support_separation(space: FiniteMetricSpace, result: AssouadResult) -> tuple[float, Optional[tuple]]:
    """Smallest value of d(supp P, supp Q) / 2^max(k_P, k_Q) over distinct bumps in one block.

    Returns (inf, None) when no block holds two bumps; otherwise the ratio and
    the witnessing pair of (k, center) keys.
    """
    by_block: dict[int, list[Bump]] = {}
    for b in result.bumps:
        by_block.setdefault(b.block, []).append(b)
    best, witness = math.inf, None
    for group in by_block.values():
        for i, p in enumerate(group):
            for q in group[i + 1 :]:
                gap = float(space.dist[np.ix_(p.support, q.support)].min())
                ratio = gap / math.ldexp(1.0, max(p.k, q.k))
                if ratio < best:
                    best, witness = ratio, ((p.k, p.center), (q.k, q.center))
    return best, witness


def audit_assouad(space: FiniteMetricSpace, result: AssouadResult, rtol: float = RTOL) -> list[CheckRecord]:
    """Measured counterparts of the guarantees on Phi.

    vanishing: the largest |Phi| on {f = 0}; lipschitz: Lip(Phi) on all pairs;
    near co-Lipschitz: min |dPhi|/d over pairs with d <= zeta * max(f(a), f(b));
    support separation: the ratio from :func:`support_separation`.
    """
    f = result.f.values
    zero = f == 0
    vanish = float(np.abs(result.phi.values[zero]).max()) if zero.any() and result.phi.dim else 0.0
    checks = [check_inequality("vanishes where f = 0", 0.0, vanish, "<=", rtol)]
    if space.n >= 2:
        a, b, _, source, ratio = pair_ratios(space, result.phi)
        checks.append(check_inequality("lipschitz", result.lipschitz_bound(), float(ratio.max()), "<=", rtol))
        near = source <= result.zeta * np.maximum(f[a], f[b])
        low = float(ratio[near].min()) if near.any() else math.inf
        checks.append(check_inequality("near-pair co-lipschitz", result.colipschitz_bound(), low, ">=", rtol))
    sep, _ = support_separation(space, result)
    checks.append(check_inequality("same-block support separation", 0.4, sep, ">=", rtol))
    return checks
