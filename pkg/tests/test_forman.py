import itertools
import math

import numpy as np
import pytest

from core.config import CurvatureVariant
from core.curvature import build_calculator
from core.errors import FaceWeightError, GraphInputError
from core.forman import (
    UNIT_TRIANGLE,
    CycleFaces,
    FaceIndex,
    FaceWeightScheme,
    FormanCalculator,
    frc1_edge,
    frc2_edge,
    frc3_edge,
    frc_2complex_edge,
    frc_edge,
    frc_vertex,
    heron_weight,
    line_face_index,
    line_face_sets,
    line_frc1_from_base,
    line_frc1_vertex_from_base,
    line_frc1_weighted_from_base,
    line_frc2_triangles_closed_form,
    line_frc3_edge,
    quad_weight,
)
from core.graph_core import Graph, line_graph, line_graph_product, line_graph_weighted, unweighted_degree


def random_graph(n, p, seed, weighted=False):
    rng = np.random.default_rng(seed)
    edges = []
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges.append((u, v, float(rng.uniform(0.5, 3.0))) if weighted else (u, v))
    return Graph(n, edges)


def line_pairs(g):
    for v in g.vertices():
        for a, b in itertools.combinations(sorted(g.neighbors(v)), 2):
            yield (a, v), (v, b)


def test_small_graph_values(k3, c4, p3):
    assert frc1_edge(k3, (0, 1)) == pytest.approx(0.0)
    assert frc2_edge(k3, (0, 1)) == pytest.approx(2 + 4 / math.sqrt(3))
    assert frc2_edge(p3, (0, 1)) == pytest.approx(1.0)
    assert frc3_edge(c4, (0, 1)) == pytest.approx(2.0)
    assert frc2_edge(c4, (0, 1)) == pytest.approx(frc1_edge(c4, (0, 1)))


@pytest.mark.parametrize("seed", range(3))
def test_frc1_unit_weights_is_degree_formula(seed):
    g = random_graph(12, 0.35, seed)
    for u, v in g.edges:
        assert frc1_edge(g, (u, v)) == pytest.approx(4 - unweighted_degree(g, u) - unweighted_degree(g, v))


def test_complete_graph_faces(k4):
    # K_4: 每条边 2 个三角形, 2 个四边形
    assert len(CycleFaces(2).faces(k4, (0, 1))) == 2
    assert len(CycleFaces(3).faces(k4, (0, 1))) == 4
    assert CycleFaces(1).faces(k4, (0, 1)) == []


def test_heron():
    assert heron_weight(3, 4, 5) == pytest.approx(6.0)
    assert heron_weight(1, 1, 1) == pytest.approx(UNIT_TRIANGLE)
    assert heron_weight(1, 1, 2) == 0.0
    with pytest.raises(FaceWeightError):
        heron_weight(1, 1, 3)
    with pytest.raises(FaceWeightError):
        heron_weight(0, 1, 1)


def test_quad_weight():
    assert quad_weight([2, 3, 2, 3]) == pytest.approx(6.0)
    assert quad_weight([1, 1, 1, 1]) == pytest.approx(1.0)
    # 平行边 5 与 3, 腰长 2 的等腰梯形
    assert quad_weight([5, 2, 3, 2]) == pytest.approx(4 * math.sqrt(3))
    assert quad_weight([3, 3, 2, 1]) == pytest.approx(heron_weight(1, 3, 3) * (1 + 2 * 1 / 1))
    with pytest.raises(FaceWeightError):
        quad_weight([4, 2, 1, 1])
    with pytest.raises(FaceWeightError):
        quad_weight([1, 1, 1])


def test_strict_and_lenient_face_schemes():
    g = Graph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)])
    with pytest.raises(FaceWeightError):
        frc2_edge(g, (0, 1), FaceWeightScheme(strict=True))
    lenient = FaceWeightScheme(strict=False)
    assert frc2_edge(g, (0, 1), lenient) == pytest.approx(frc1_edge(g, (0, 1)))
    assert lenient.skipped == 1
    lenient.reset()
    assert lenient.skipped == 0


def test_calculator_counts_skipped_faces(caplog):
    g = Graph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)])
    calculator = build_calculator(CurvatureVariant.FRC_2, strict_faces=False)
    with caplog.at_level("WARNING"):
        calculator.values(g)
    assert calculator.scheme.skipped == 3
    assert "退化面" in caplog.text


def test_face_must_contain_edge(k4):
    with pytest.raises(GraphInputError):
        frc_2complex_edge(k4, (0, 1), [(1, 2, 3)])


def test_frc_edge_dispatch(k4):
    assert frc_edge(k4, (0, 1), 1) == pytest.approx(frc1_edge(k4, (0, 1)))
    assert frc_edge(k4, (0, 1), 3) == pytest.approx(frc3_edge(k4, (0, 1)))
    with pytest.raises(GraphInputError):
        frc_edge(k4, (0, 1), 4)


def test_vertex_curvature(k4):
    assert frc_vertex(k4, 0, 2) == pytest.approx(3 * frc2_edge(k4, (0, 1)))
    assert frc_vertex(Graph(2), 0) == 0.0
    report = FormanCalculator(CurvatureVariant.FRC_1).report(k4)
    frame = report.vertex_frame(k4.n)
    assert list(frame["value"]) == pytest.approx([3 * -2.0] * 4)


IDENTITY_CASES = [(10 + seed, 0.5 if seed < 5 else 0.2, seed) for seed in range(20)]


def random_tree(n, seed):
    rng = np.random.default_rng(seed)
    return Graph(n, [(int(rng.integers(0, v)), v) for v in range(1, n)])


@pytest.mark.parametrize("seed", range(5))
def test_frc2_on_trees(seed):
    tree = random_tree(25, seed)
    for u, v in tree.edges:
        parallel = unweighted_degree(tree, u) + unweighted_degree(tree, v) - 2
        assert frc2_edge(tree, (u, v)) == pytest.approx(2 - parallel)
        assert frc3_edge(tree, (u, v)) == pytest.approx(2 - parallel)


@pytest.mark.parametrize("n, p, seed", IDENTITY_CASES)
def test_line_frc1_from_base(n, p, seed):
    g = random_graph(n, p, seed)
    lmap = line_graph(g)
    line = lmap.line_graph
    for e1, e2 in line_pairs(g):
        direct = frc1_edge(line, (lmap.vertex(e1), lmap.vertex(e2)))
        assert line_frc1_from_base(g, e1, e2) == direct
    for e in g.edges:
        assert line_frc1_vertex_from_base(g, e) == frc_vertex(line, lmap.vertex(e), 1)


@pytest.mark.parametrize("n, p, seed", IDENTITY_CASES[::4])
def test_line_frc1_weighted_from_base(n, p, seed):
    g = random_graph(n, p, seed, weighted=True)
    lmap = line_graph_product(g)
    for e1, e2 in line_pairs(g):
        direct = frc1_edge(lmap.line_graph, (lmap.vertex(e1), lmap.vertex(e2)))
        assert line_frc1_weighted_from_base(g, e1, e2) == pytest.approx(direct, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("n, p, seed", IDENTITY_CASES[::4])
def test_line_frc2_closed_form(n, p, seed):
    g = random_graph(n, p, seed)
    lmap = line_graph(g)
    for e1, e2 in line_pairs(g):
        direct = frc2_edge(lmap.line_graph, (lmap.vertex(e1), lmap.vertex(e2)))
        assert line_frc2_triangles_closed_form(g, e1, e2) == pytest.approx(direct)


def test_line_identities_require_unit_weights(counterexample):
    with pytest.raises(GraphInputError):
        line_frc1_from_base(counterexample, (0, 1), (1, 2))
    with pytest.raises(GraphInputError):
        line_frc2_triangles_closed_form(Graph(3, [(0, 1), (1, 2)]), (0, 1), (1, 2), tri_weight=0.0)


def test_line_face_sets(k4):
    triangles, quadrangles = line_face_sets(k4, (0, 1), (1, 2))
    # v=1 处的另一条边 {1, 3} 与闭合边 {0, 2}
    assert len(triangles) == 2
    # L(K_4) 是正八面体, 每条边经过 5 个 4-圈
    assert len(quadrangles) == 5
    assert ((0, 1), (1, 2), (2, 3), (0, 3)) in quadrangles


def test_line_face_sets_without_base_quadrangles(star4):
    # 星形的线图是 K_4
    _, quadrangles = line_face_sets(star4, (0, 1), (0, 2))
    assert len(quadrangles) == 2

    pendant = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2)])
    _, quadrangles = line_face_sets(pendant, (3, 0), (0, 1))
    assert quadrangles == [((0, 3), (0, 1), (1, 2), (0, 2))]
    assert line_frc3_edge(pendant, (3, 0), (0, 1)) == pytest.approx(2 + 4 / math.sqrt(3))


@pytest.mark.parametrize("n, seed, weighted", [(9, 0, False), (9, 1, False), (9, 2, True), (12, 3, True), (16, 4, False), (20, 5, True)])
def test_line_frc3_matches_materialized_line_graph(n, seed, weighted):
    g = random_graph(n, 0.45 if n < 12 else 0.3, seed, weighted=weighted)
    lmap = line_graph_weighted(g)
    line = lmap.line_graph
    index = line_face_index(g, lmap)
    for e1, e2 in line_pairs(g):
        i, j = lmap.vertex(e1), lmap.vertex(e2)
        materialized = frc3_edge(line, (i, j), FaceWeightScheme(strict=False))
        assert line_frc3_edge(g, e1, e2, FaceWeightScheme(strict=False)) == pytest.approx(materialized)
        assert len(index.faces(line, (i, j))) == len(CycleFaces(3).faces(line, (i, j)))
        indexed = frc_2complex_edge(line, (i, j), index.faces(line, (i, j)), FaceWeightScheme(strict=False))
        assert indexed == pytest.approx(materialized)


def test_face_index_restricted(c4):
    index = FaceIndex({(0, 1): [(0, 1, 2, 3)], (2, 3): [(2, 3, 0, 1)]})
    restricted = index.restricted([1, 0, 3, 2])
    assert restricted.faces(c4, (0, 1)) == [(1, 0, 3, 2)]
    dropped = index.restricted([0, 1, 2])
    assert dropped.faces(c4, (0, 1)) == []


def test_calculator_rejects_ollivier_variant():
    with pytest.raises(GraphInputError):
        FormanCalculator(CurvatureVariant.ORC_E)


def test_report_metadata(k4):
    report = build_calculator(CurvatureVariant.FRC_3).report(k4)
    assert report.metadata == {"variant": "FRC-3", "strict_faces": True, "faces": "CycleFaces"}
    assert report.to_frame()["lower"].isna().all()
