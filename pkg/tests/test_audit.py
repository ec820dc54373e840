import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sraembed.audit import (
    check_inequality,
    claims_hold,
    distortion_audit,
    lipschitz_constant,
    pair_ratios,
)
from sraembed.errors import DegenerateDomain
from sraembed.maps import PointMap, embedding_from_csv, embedding_to_csv
from sraembed.metric_core import validate_metric

from _support import line_space, pairwise_ratios_loop, planar_spaces


def test_scaling_map_has_distortion_one():
    space = line_space([0, 1, 3, 7])
    fmap = PointMap(space.all_points(), [[0.0], [2.0], [6.0], [14.0]])
    rep = distortion_audit(space, fmap)
    assert (rep.lipschitz, rep.colipschitz, rep.distortion) == (2.0, 2.0, 1.0)


def test_three_point_example():
    space = line_space([0, 1, 2])
    rep = distortion_audit(space, PointMap((0, 1, 2), [[0.0], [1.0], [3.0]]))
    assert rep.lipschitz == 2.0 and rep.colipschitz == 1.0 and rep.distortion == 2.0
    assert rep.witness_max == (1, 2)
    assert rep.witness_min == (0, 1)


def test_identity_map():
    pts = np.array([[0.0, 0.0], [3.0, 4.0], [6.0, 0.0]])
    space = validate_metric(np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1)))
    rep = distortion_audit(space, PointMap((0, 1, 2), pts))
    assert rep.lipschitz == rep.colipschitz == rep.distortion == 1.0


def test_degenerate_domain():
    with pytest.raises(DegenerateDomain):
        distortion_audit(line_space([0, 1]), PointMap((0,), [[0.0]]))
    assert lipschitz_constant(line_space([0, 1]), PointMap((1,), [[0.0]])) == 0.0


def test_collapsing_map_has_infinite_distortion():
    rep = distortion_audit(line_space([0, 1, 2]), PointMap((0, 1, 2), [[0.0], [0.0], [1.0]]))
    assert rep.colipschitz == 0.0 and rep.distortion == math.inf


@given(planar_spaces(min_n=2, max_n=9), st.integers(1, 4), st.data())
def test_audit_matches_double_loop(sp, m, data):
    space, _ = sp
    vals = data.draw(
        st.lists(
            st.lists(st.floats(-50, 50), min_size=m, max_size=m), min_size=space.n, max_size=space.n
        )
    )
    fmap = PointMap(space.all_points(), vals)
    loop = pairwise_ratios_loop(space, fmap)
    rep = distortion_audit(space, fmap)
    _, _, _, _, ratio = pair_ratios(space, fmap)
    assert len(loop) == len(ratio)
    assert max(r for _, _, r in loop) == pytest.approx(rep.lipschitz, rel=1e-12, abs=1e-300)
    assert min(r for _, _, r in loop) == pytest.approx(rep.colipschitz, rel=1e-12, abs=1e-300)
    a, b = rep.witness_max
    assert np.linalg.norm(fmap.value(a) - fmap.value(b)) / space.dist[a, b] == pytest.approx(rep.lipschitz, rel=1e-14)
    a, b = rep.witness_min
    assert np.linalg.norm(fmap.value(a) - fmap.value(b)) / space.dist[a, b] == pytest.approx(rep.colipschitz, rel=1e-14, abs=1e-300)
    if rep.colipschitz > 0:
        assert rep.distortion >= 1.0


def test_check_inequality_examples():
    assert check_inequality("equal", 2.0, 2.0, "<=").passed
    assert check_inequality("equal", 2.0, 2.0, ">=").passed
    assert check_inequality("slack", 1.0, 1.0 + 5e-10, "<=").passed
    assert not check_inequality("over", 1.0, 1.0 + 2e-9, "<=").passed
    assert check_inequality("under", 1.0, 1.0 - 5e-10, ">=").passed
    assert not check_inequality("under", 1.0, 0.99, ">=").passed
    with pytest.raises(ValueError):
        check_inequality("bad", 1.0, 1.0, "<")


def test_claims_hold():
    space = line_space([0, 1, 2])
    fmap = PointMap((0, 1, 2), [[0.0], [1.0], [3.0]], scale=1.0, claimed_distortion=2.0)
    assert claims_hold(space, fmap)
    assert not claims_hold(space, fmap.with_claims(1.0, 1.5))
    assert not claims_hold(space, fmap.with_claims(1.1, 2.0))


def test_report_json_uses_labels():
    space = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]], ["a", "b", "c"])
    rep = distortion_audit(space, PointMap((0, 1, 2), [[0.0], [1.0], [3.0]]))
    rep.add(check_inequality("distortion", 3.0, rep.distortion, "<="))
    obj = json.loads(rep.to_json(space.labels))
    assert obj["witness_max"] == ["b", "c"]
    assert obj["checks"][0]["passed"] and obj["passed"]


def test_embedding_csv_round_trip():
    vals = np.array([[0.1, -2.0], [1 / 3, 1e-300]])
    text = embedding_to_csv(["a", "b"], vals)
    assert text.splitlines()[0] == "label,c0,c1"
    assert text.splitlines()[1] == "a,0.10000000000000001,-2"
    labels, back = embedding_from_csv(text)
    assert labels == ["a", "b"] and np.array_equal(back, vals)
    with pytest.raises(ValueError):
        embedding_from_csv("x,c0\na,1\n")
