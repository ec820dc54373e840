import math

import numpy as np
import pytest

from sraembed.assouad import build_scale_function
from sraembed.audit import distortion_audit
from sraembed.charts import coordinate_provider, frechet_map, table_provider
from sraembed.errors import ConfigNotSra, ConfigWrongSize, MapClaimViolated, NotSraFree
from sraembed.extension import far_pair_colipschitz_report
from sraembed.generators import cloud_points, euclidean_cloud, line, snowflake_line
from sraembed.maps import PointMap
from sraembed.metric_core import restrict, validate_metric
from sraembed.pipeline import (
    LevelRecord,
    PipelineConstants,
    base_case_embed,
    base_case_net,
    build_extension,
    embed,
    extend_embedding,
    local_chart_from_config,
    theoretical_bounds,
)
from sraembed.sra import SraParams, build_core_subset, critical_radii, sra_free_parameter

from _support import line_space, seeded_choice, simplex_configuration, space_of

pytestmark = pytest.mark.filterwarnings("ignore::sraembed.sra.TieWarning")


# -- base case ---------------------------------------------------------------


def test_base_case_single_point():
    fmap = base_case_embed(validate_metric([[0]]), 0.5)
    assert fmap.values.tolist() == [[0.0]]


def test_base_case_two_points():
    space = validate_metric([[0, 10], [10, 0]])
    fmap = base_case_embed(space, 0.5)
    assert fmap.values.tolist() == [[0.0, 10.0], [10.0, 0.0]]
    assert distortion_audit(space, fmap).distortion == 1.0


def test_base_case_line_colipschitz():
    space = line(5)
    fmap = base_case_embed(space, 0.5)
    assert fmap.scale == 0.1
    report = distortion_audit(space, fmap)
    assert report.colipschitz >= 0.1
    assert report.lipschitz <= math.sqrt(len(base_case_net(space)))


@pytest.mark.parametrize("n, alpha", [(7, 0.3), (12, 0.05), (20, 0.5)])
def test_base_case_coordinatewise_bound(n, alpha):
    space = line_space(np.arange(n) ** 1.3)
    fmap = base_case_embed(space, alpha)
    s = min(0.1, alpha)
    for a in range(n):
        for b in range(a + 1, n):
            assert np.abs(fmap.values[a] - fmap.values[b]).max() >= s * space.dist[a, b] * (1 - 1e-9)


def test_base_case_rejects_sra_triples():
    with pytest.raises(NotSraFree) as exc:
        base_case_embed(snowflake_line(4, 0.5), 0.5)
    assert exc.value.witness == (0, 1, 2)
    assert exc.value.level == 0


# -- local charts ------------------------------------------------------------


def test_chart_k3_on_a_line():
    space = line_space([0, 0.25, 0.5, 10])
    chart = local_chart_from_config(space, (0, 3), 0, 0.5)
    assert chart.radius == pytest.approx(10 / 12, rel=1e-15)
    assert chart.map.domain == (0, 1, 2)
    assert chart.map.values[:, 0].tolist() == [10.0, 9.75, 9.5]
    assert chart.dim == 1 and chart.distortion == 2.0
    assert distortion_audit(space, chart.map).distortion == 1.0


def test_chart_value_at_center():
    space, config, x = simplex_configuration(4, 0.5, 0)
    chart = local_chart_from_config(space, config, x, 0.5)
    assert chart.map.value(x).tolist() == [space.dist[x, c] for c in config if c != x]


@pytest.mark.parametrize("k", [3, 4, 5])
@pytest.mark.parametrize("alpha", [0.3, 0.5])
def test_chart_colipschitz_audit(k, alpha):
    checked = 0
    for seed in range(10):
        inst = simplex_configuration(k, alpha, seed)
        if inst is None:
            continue
        space, config, x = inst
        chart = local_chart_from_config(space, config, x, alpha)
        dom, V = chart.map.domain, chart.map.values
        assert len(dom) > 2
        for i in range(len(dom)):
            for j in range(i + 1, len(dom)):
                d = space.dist[dom[i], dom[j]]
                assert np.abs(V[i] - V[j]).max() >= alpha * d * (1 - 1e-9)
        assert distortion_audit(space, chart.map).distortion <= math.sqrt(k - 2) / alpha * (1 + 1e-9)
        checked += 1
    assert checked >= 5


def test_chart_errors():
    space = line(4)
    with pytest.raises(ConfigNotSra):
        local_chart_from_config(space, (0, 1, 2), 0, 0.5)
    with pytest.raises(ConfigWrongSize):
        local_chart_from_config(space, (0, 1), 2, 0.5)
    with pytest.raises(ConfigWrongSize):
        local_chart_from_config(space, (0, 1), 0, 0.5, k=4)


# -- extension ---------------------------------------------------------------


def _cloud(seed=2, n=18):
    pts = cloud_points(n, 2, seed) * 5
    return space_of(pts), pts


def test_extend_with_y_everything_appends_zeros():
    space, pts = _cloud()
    Y = tuple(range(space.n))
    phi = PointMap(Y, pts)
    ext = build_extension(space, Y, phi, table_provider({}, 2), 0.5, 1.0, 2)
    assert np.array_equal(ext.map.values[:, :2], pts)
    assert not ext.map.values[:, 2:].any()
    assert not ext.assouad.colored.nets


@pytest.mark.parametrize("seed", range(4))
def test_extension_contracts(seed):
    space, pts = _cloud(seed)
    Y = seeded_choice(seed, space.n, 4)
    phi = frechet_map(space, Y) if seed % 2 else PointMap(Y, pts[list(Y)])
    theta = 0.5
    f = build_scale_function(space, Y, theta)
    ext = build_extension(space, Y, phi, coordinate_provider(space, pts, f), theta, 1.0, 2)
    fmap = ext.map
    # agrees with (phi, 0) on Y
    assert np.array_equal(fmap.values[list(Y), : phi.dim], phi.values)
    assert not fmap.values[list(Y), phi.dim :].any()
    assert fmap.dim == phi.dim + 3 * ext.assouad.M * ext.assouad.palette
    # global lower factor
    s, dist, n = phi.scale, phi.claimed_distortion, phi.dim
    low = min(s / 5, 9 * theta * s / (200 * dist * math.sqrt(n)))
    assert fmap.scale == pytest.approx(low, rel=1e-15)
    report = distortion_audit(space, fmap)
    assert report.colipschitz >= low * (1 - 1e-9)
    assert report.distortion <= fmap.claimed_distortion * (1 + 1e-9)
    # far pairs are handled by the first block alone
    far = far_pair_colipschitz_report(space, ext.phi1, Y, s, dist, math.sqrt(n), 5 * dist)
    assert far.min_ratio >= 0.2 * (1 - 1e-9)


def test_extend_embedding_returns_map():
    space, pts = _cloud()
    Y = (0, 1, 2)
    phi = PointMap(Y, pts[list(Y)])
    f = build_scale_function(space, Y, 1.0)
    out = extend_embedding(space, Y, phi, coordinate_provider(space, pts, f), 1.0, 1.0, 2)
    assert out.domain == space.all_points()


def test_extension_rejects_false_claims():
    space, pts = _cloud()
    Y = (0, 1, 2)
    phi = PointMap(Y, pts[list(Y)], scale=2.0)
    with pytest.raises(MapClaimViolated):
        build_extension(space, Y, phi, table_provider({}, 2), 0.5, 1.0, 2)


def test_extension_rejects_small_zeta():
    space, pts = _cloud()
    Y = (0, 1)
    phi = PointMap(Y, pts[list(Y)])
    with pytest.raises(ValueError):
        build_extension(space, Y, phi, table_provider({}, 2), 0.5, 1.0, 2, zeta=1.0)


# -- recursion ---------------------------------------------------------------


def test_embed_k3_is_base_case():
    space = line(6)
    fmap, constants = embed(space, 3, 0.5)
    base = base_case_embed(space, 0.5)
    assert np.array_equal(fmap.values, base.values)
    assert len(constants.levels) == 1 and constants.base.kind == "base"


def test_embed_line_k4_appends_zero_block():
    space = line(7)
    fmap, constants = embed(space, 4, 0.5)
    lower, _ = embed(space, 3, 0.25)
    top = constants.levels[0]
    assert top.core_size == 7 and top.degenerate
    assert np.array_equal(fmap.values[:, : lower.dim], lower.values)
    assert not fmap.values[:, lower.dim :].any()
    assert theoretical_bounds(constants) == constants.base.distortion_bound


def test_embed_refuses_sra_witness():
    with pytest.raises(NotSraFree) as exc:
        embed(snowflake_line(5, 0.5), 4, 0.5)
    assert exc.value.witness == (0, 1, 2, 3)


def test_embed_with_proper_core():
    space = euclidean_cloud(10, seed=1)
    k, alpha = 4, 0.5
    params = SraParams(alpha, k)
    entries = critical_radii(space, params)
    core, _ = build_core_subset(space, params, entries)
    assert len(core) < space.n
    theta = alpha / 6
    for x in set(range(space.n)) - set(core):
        dx = space.dist[x, list(core)].min()
        assert dx <= entries[x].radius
        chart = local_chart_from_config(space, entries[x].witness, x, alpha, k)
        assert theta * dx <= chart.radius

    fmap, constants = embed(space, k, alpha)
    sub_map, _ = embed(restrict(space, core), k - 1, alpha / 2)
    # the output on the core is the recursive embedding padded with zeros
    assert np.array_equal(fmap.values[list(core), : sub_map.dim], sub_map.values)
    assert not fmap.values[list(core), sub_map.dim :].any()
    report = distortion_audit(space, fmap)
    assert math.isfinite(report.distortion)
    assert report.distortion <= theoretical_bounds(constants) * (1 + 1e-9)
    assert report.colipschitz >= fmap.scale * (1 - 1e-9)


def test_embed_rejects_bad_parameters():
    with pytest.raises(ValueError):
        embed(line(3), 2, 0.5)
    with pytest.raises(ValueError):
        embed(line(3), 3, 1.5)


# -- constants ---------------------------------------------------------------


def test_theoretical_bound_base_formula():
    base = LevelRecord(0, 3, 0.5, "base", 10, 4, 0.1, 20.0, net_size=4)
    assert theoretical_bounds(PipelineConstants(3, 0.5, [base])) == 20.0
    assert theoretical_bounds(PipelineConstants(3, 0.5, [base]), net_size=9) == 30.0


def test_theoretical_bound_monotone_in_palette():
    space = euclidean_cloud(14, seed=4)
    _, constants = embed(space, 5, 0.5)
    ext = [lv for lv in constants.levels if lv.kind == "extension"]
    base_pal = [lv.palette for lv in ext]
    b0 = theoretical_bounds(constants, palettes=base_pal)
    b1 = theoretical_bounds(constants, palettes=[p + 3 for p in base_pal])
    assert b0 == theoretical_bounds(constants)
    assert b1 >= b0
    with pytest.raises(ValueError):
        theoretical_bounds(constants, palettes=[1])


def test_constants_round_trip():
    _, constants = embed(euclidean_cloud(12, seed=6), 5, 0.5)
    obj = constants.to_dict()
    assert obj["theoretical_bound"] == theoretical_bounds(constants)
    again = PipelineConstants.from_dict(obj)
    assert again.to_dict() == obj
    assert [lv.depth for lv in constants.levels] == list(range(len(constants.levels)))
    for lv in constants.levels:
        if lv.kind == "extension":
            assert lv.theta == lv.alpha / 6 and lv.nbar == lv.k - 2
            assert lv.chart_distortion == math.sqrt(lv.k - 2) / lv.alpha
            assert lv.dim == lv.dim_in + (lv.nbar + 1) * lv.M * lv.palette


@pytest.mark.parametrize("seed", range(6))
def test_measured_distortion_within_bound(seed):
    space = euclidean_cloud(8 + 2 * seed, seed=seed)
    k = sra_free_parameter(space, 0.5)
    fmap, constants = embed(space, k, 0.5)
    report = distortion_audit(space, fmap)
    assert report.distortion <= theoretical_bounds(constants) * (1 + 1e-9)
