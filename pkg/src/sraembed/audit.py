"""Exact Lipschitz / co-Lipschitz / distortion measurement and bound checks."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateDomain
from .maps import PointMap
from .metric_core import FiniteMetricSpace

RTOL = 1e-9


@dataclass(frozen=True)
class CheckRecord:
    name: str
    bound: float
    measured: float
    direction: str
    passed: bool


def check_inequality(name: str, bound: float, measured: float, direction: str, rtol: float = RTOL) -> CheckRecord:
    """Compare ``measured`` against ``bound`` with relative slack ``rtol``.

    ``direction`` is ``"<="`` (measured must not exceed bound) or ``">="``.
    """
    slack = rtol * abs(bound)
    if direction == "<=":
        passed = measured <= bound + slack
    elif direction == ">=":
        passed = measured >= bound - slack
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return CheckRecord(name, float(bound), float(measured), direction, bool(passed))


@dataclass
class AuditReport:
    lipschitz: float
    colipschitz: float
    distortion: float
    witness_max: tuple
    witness_min: tuple
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.checks.append(record)
        return record

    def to_dict(self, labels: Optional[tuple] = None) -> dict:
        def name(pair):
            return [labels[p] for p in pair] if labels else list(pair)

        return {
            "lipschitz": self.lipschitz,
            "colipschitz": self.colipschitz,
            "distortion": self.distortion,
            "witness_max": name(self.witness_max),
            "witness_min": name(self.witness_min),
            "checks": [asdict(c) for c in self.checks],
            "passed": self.passed,
        }

    def to_json(self, labels: Optional[tuple] = None) -> str:
        return json.dumps(self.to_dict(labels), indent=2, allow_nan=True)


def pair_ratios(space: FiniteMetricSpace, fmap: PointMap):
    """All domain pairs (a < b) with image distance, source distance and ratio."""
    dom = np.asarray(fmap.domain, dtype=np.intp)
    V = fmap.values
    rows_a, rows_b, images = [], [], []
    for i in range(len(dom) - 1):
        diff = V[i + 1 :] - V[i]
        images.append(np.sqrt((diff * diff).sum(axis=1)))
        rows_a.append(np.full(len(dom) - i - 1, i))
        rows_b.append(np.arange(i + 1, len(dom)))
    if not images:
        empty = np.zeros(0)
        return np.zeros(0, np.intp), np.zeros(0, np.intp), empty, empty, empty
    ra = np.concatenate(rows_a)
    rb = np.concatenate(rows_b)
    image = np.concatenate(images)
    source = space.dist[dom[ra], dom[rb]]
    return dom[ra], dom[rb], image, source, image / source


def distortion_audit(space: FiniteMetricSpace, fmap: PointMap) -> AuditReport:
    """Max and min of |F(a)-F(b)| / d(a,b) over every domain pair.

    Witnesses are the first extremal pairs in lexicographic order.
    """
    if len(fmap.domain) < 2:
        raise DegenerateDomain("distortion needs at least two domain points")
    a, b, _, _, ratio = pair_ratios(space, fmap)
    imax = int(np.argmax(ratio))
    imin = int(np.argmin(ratio))
    lip = float(ratio[imax])
    colip = float(ratio[imin])
    distortion = lip / colip if colip > 0 else math.inf
    return AuditReport(lip, colip, distortion, (int(a[imax]), int(b[imax])), (int(a[imin]), int(b[imin])))


def lipschitz_constant(space: FiniteMetricSpace, fmap: PointMap) -> float:
    if len(fmap.domain) < 2:
        return 0.0
    return float(pair_ratios(space, fmap)[4].max())


def claims_hold(space: FiniteMetricSpace, fmap: PointMap, rtol: float = RTOL) -> bool:
    """True iff s*d <= |dF| <= D*s*d on all pairs, up to ``rtol``."""
    if len(fmap.domain) < 2:
        return True
    _, _, image, source, _ = pair_ratios(space, fmap)
    s = fmap.scale
    lower = image >= s * source * (1 - rtol)
    upper = image <= fmap.claimed_distortion * s * source * (1 + rtol)
    return bool(lower.all() and upper.all())
