import itertools

import numpy as np
import pytest

from core.config import CurvatureVariant, MeasureMode
from core.curvature import build_calculator
from core.errors import GraphInputError
from core.graph_core import Graph, line_graph_weighted
from core.ollivier import (
    OllivierCalculator,
    jost_liu_weighted_upper,
    line_orc_approx,
    line_orc_approx_a1,
    line_orc_bounds_base,
    line_orc_bounds_weighted,
    line_orc_edge_exact,
    orc_approx,
    orc_approx_a1,
    orc_bounds,
    orc_bounds_unweighted,
    orc_bounds_weighted,
    orc_edge_exact,
    orc_edge_sinkhorn,
    orc_vertex,
)
from tests.conftest import complete_graph

UNIFORM = MeasureMode(kind="uniform")
DEGREE = MeasureMode(kind="degree_proportional")


def planted_graph(seed, sizes=(6, 6), p_in=0.7, p_out=0.15, weighted=False):
    rng = np.random.default_rng(seed)
    block = np.repeat(np.arange(len(sizes)), sizes)
    n = len(block)
    edges = []
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < (p_in if block[u] == block[v] else p_out):
            edges.append((u, v, float(rng.uniform(0.3, 2.5))) if weighted else (u, v))
    for u in range(n - 1):
        if not any(e[0] == u or e[1] == u for e in edges):
            edges.append((u, u + 1))
    return Graph(n, edges)


def line_pairs(g):
    for v in g.vertices():
        for a, b in itertools.combinations(sorted(g.neighbors(v)), 2):
            yield (a, v), (v, b)


def test_triangle_exact_and_bounds(k3):
    assert orc_edge_exact(k3, (0, 1)) == pytest.approx(0.5)
    bounds = orc_bounds(k3, (0, 1))
    assert bounds.lower == pytest.approx(0.5)
    assert bounds.upper == pytest.approx(0.5)
    assert orc_approx(k3, (0, 1)) == pytest.approx(0.5)


def test_single_edge_and_path(k2, p3):
    assert orc_edge_exact(k2, (0, 1)) == pytest.approx(0.0)
    assert orc_edge_exact(p3, (0, 1)) == pytest.approx(0.0)
    assert orc_bounds(p3, (0, 1)).upper == pytest.approx(0.0)
    lazy = MeasureMode(kind="exponential", alpha=0.5)
    assert orc_edge_exact(k2, (0, 1), lazy) == pytest.approx(1.0)


def test_degree_proportional_counterexample(counterexample):
    exact = orc_edge_exact(counterexample, (1, 3), DEGREE)
    assert exact == pytest.approx(2 / 5)
    assert jost_liu_weighted_upper(counterexample, (1, 3)) == pytest.approx(1 / 3)
    assert exact > jost_liu_weighted_upper(counterexample, (1, 3))
    bounds = orc_bounds(counterexample, (1, 3), DEGREE)
    assert bounds.lower - 1e-9 <= exact <= bounds.upper + 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_unweighted_bounds_sandwich_exact(seed):
    g = planted_graph(seed)
    for e in g.edges:
        bounds = orc_bounds_unweighted(g, e)
        exact = orc_edge_exact(g, e, UNIFORM)
        assert bounds.lower - 1e-9 <= exact <= bounds.upper + 1e-9


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("alpha", [0.0, 0.5])
def test_weighted_bounds_sandwich_exact(seed, alpha):
    g = planted_graph(seed, weighted=True)
    mode = MeasureMode(kind="exponential", alpha=alpha, p=1.0)
    for e in g.edges:
        bounds = orc_bounds(g, e, mode)
        exact = orc_edge_exact(g, e, mode)
        assert bounds.lower - 1e-9 <= exact <= bounds.upper + 1e-9


@pytest.mark.parametrize("kind", ["uniform", "degree_proportional", "lazy_uniform"])
def test_bounds_sandwich_other_measures(kind):
    g = planted_graph(7, weighted=True)
    mode = MeasureMode(kind=kind, alpha=0.3)
    for e in g.edges:
        bounds = orc_bounds(g, e, mode)
        exact = orc_edge_exact(g, e, mode)
        assert bounds.lower - 1e-9 <= exact <= bounds.upper + 1e-9


def test_unweighted_bounds_require_unit_weights(counterexample):
    with pytest.raises(GraphInputError):
        orc_bounds_unweighted(counterexample, (1, 3))


def test_approximations_are_defined_from_bounds(counterexample):
    for e in counterexample.edges:
        bounds = orc_bounds_weighted(counterexample, e, alpha=0.2, p=2.0)
        assert orc_approx(counterexample, e, 0.2, 2.0) == pytest.approx((bounds.lower + bounds.upper) / 2)
        assert orc_approx_a1(counterexample, e, 0.2, 2.0) == pytest.approx((1 + bounds.lower) / 2)


def test_sinkhorn_curvature_never_above_exact():
    g = planted_graph(2, weighted=True)
    for e in g.edges:
        assert orc_edge_sinkhorn(g, e) <= orc_edge_exact(g, e) + 1e-9


def test_vertex_curvature_sums_incident_edges(k4):
    assert orc_vertex(k4, 0) == pytest.approx(3 * orc_edge_exact(k4, (0, 1)))
    with pytest.raises(GraphInputError):
        orc_vertex(Graph(3, [(0, 1)]), 2)


def test_line_bounds_from_base_degrees(star4):
    bounds = line_orc_bounds_base(star4, (0, 1), (0, 2))
    exact = line_orc_edge_exact(line_graph_weighted(star4), (0, 1), (0, 2))
    assert bounds.lower - 1e-9 <= exact <= bounds.upper + 1e-9
    # 星图的线图是 K_4
    assert exact == pytest.approx(orc_edge_exact(complete_graph(4), (0, 1)))


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("weighted, alpha", [(False, 0.0), (True, 0.0), (True, 0.4)])
def test_line_bounds_sandwich_line_exact(seed, weighted, alpha):
    g = planted_graph(seed, sizes=(5, 5), p_in=0.6, p_out=0.1, weighted=weighted)
    lmap = line_graph_weighted(g)
    for e1, e2 in line_pairs(g):
        bounds = line_orc_bounds_weighted(g, e1, e2, alpha=alpha)
        exact = line_orc_edge_exact(lmap, e1, e2, alpha=alpha)
        assert bounds.lower - 1e-9 <= exact <= bounds.upper + 1e-9
        assert line_orc_approx(g, e1, e2, alpha) == pytest.approx(bounds.midpoint)
        assert line_orc_approx_a1(g, e1, e2, alpha) == pytest.approx((1 + bounds.lower) / 2)


def test_line_bounds_reject_disjoint_edges(k4):
    with pytest.raises(GraphInputError):
        line_orc_bounds_weighted(k4, (0, 1), (2, 3))


def test_calculator_report_columns(counterexample):
    report = build_calculator(CurvatureVariant.ORC_A).report(counterexample)
    frame = report.to_frame()
    assert list(frame.columns) == ["u", "v", "variant", "lower", "upper", "value"]
    assert len(frame) == counterexample.m
    assert (frame["lower"] <= frame["value"] + 1e-12).all()
    assert (frame["value"] <= frame["upper"] + 1e-12).all()
    assert report.metadata["measure"] == "exponential(alpha=0,p=1)"

    exact = build_calculator(CurvatureVariant.ORC_E).report(counterexample).to_frame()
    assert exact["lower"].isna().all()


def test_a1_calculator_uses_unit_upper(k4):
    calculator = build_calculator(CurvatureVariant.ORC_A1)
    bounds = orc_bounds(k4, (0, 1))
    assert calculator.edge_value(k4, (0, 1)) == pytest.approx((1 + bounds.lower) / 2)


def test_calculator_rejects_forman_variant():
    with pytest.raises(GraphInputError):
        OllivierCalculator(CurvatureVariant.FRC_2)


def test_parallel_matches_serial():
    g = planted_graph(1, weighted=True)
    serial = build_calculator(CurvatureVariant.ORC_E).values(g)
    parallel = build_calculator(CurvatureVariant.ORC_E, proc=2).values(g)
    assert np.allclose(serial, parallel)
