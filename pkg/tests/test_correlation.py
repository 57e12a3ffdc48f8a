import networkx as nx
import numpy as np
import pytest

from core.config import CurvatureVariant
from core.correlation import correlate, line_edge_vs_edge, run_study
from core.errors import GraphInputError
from core.graph_core import Graph, line_graph_weighted
from tests.conftest import star_graph


def gnp(n, p, seed):
    return Graph(n, nx.gnp_random_graph(n, p, seed=seed).edges())


def test_clustering_study_on_bridged_cliques(two_k5_bridge):
    result = run_study(two_k5_bridge, "clustering", CurvatureVariant.FRC_2)
    assert result.size == 10
    # 桥端点的聚类系数 0.6, 其余为 1
    assert sorted(set(result.frame["x"].round(6))) == [0.6, 1.0]
    assert result.pearson == pytest.approx(1.0)
    assert result.spearman == pytest.approx(1.0)
    summary = result.summary()
    assert summary["study"] == "clustering"
    assert summary["y"] == "FRC-2"


def test_clustering_study_on_exact_orc(two_k5_bridge):
    result = run_study(two_k5_bridge, "clustering", CurvatureVariant.ORC_E)
    assert result.spearman > 0.0


def test_constant_column_has_no_coefficients(caplog):
    result = run_study(star_graph(4), "clustering", CurvatureVariant.FRC_1)
    assert np.isnan(result.pearson)
    assert result.summary()["spearman"] is None
    assert "常数" in caplog.text


@pytest.mark.parametrize("seed", range(3))
def test_line_edge_study_is_exact_for_frc1(seed):
    g = gnp(15, 0.35, seed)
    result = line_edge_vs_edge(g, CurvatureVariant.FRC_1)
    assert result.size == line_graph_weighted(g).line_graph.m
    assert list(result.frame["x"]) == pytest.approx(list(result.frame["y"]))
    assert result.pearson == pytest.approx(1.0)
    assert result.ks == pytest.approx(0.0)


def test_line_vertex_study_pairs_every_base_edge():
    g = gnp(12, 0.4, 7)
    result = run_study(g, "line-vertex", CurvatureVariant.ORC_A)
    assert result.size == g.m
    u, v = g.edges[0]
    assert result.frame.loc[0, "item"] == f"{g.labels[u]}-{g.labels[v]}"


def test_variant_study():
    g = gnp(14, 0.4, 3)
    same = run_study(g, "variants", CurvatureVariant.FRC_2, other=CurvatureVariant.FRC_2)
    assert same.pearson == pytest.approx(1.0)
    assert same.ks == pytest.approx(0.0)

    on_line = run_study(g, "variants", CurvatureVariant.FRC_3, other=CurvatureVariant.ORC_A, substrate="line")
    assert on_line.size == line_graph_weighted(g).line_graph.m
    assert on_line.summary()["x"] == "FRC-3"


def test_study_errors(k4):
    with pytest.raises(GraphInputError):
        run_study(k4, "bogus", CurvatureVariant.FRC_1)
    with pytest.raises(GraphInputError):
        run_study(k4, "variants", CurvatureVariant.FRC_1)
    with pytest.raises(GraphInputError):
        run_study(k4, "variants", CurvatureVariant.FRC_1, other=CurvatureVariant.FRC_2, substrate="tree")
    with pytest.raises(GraphInputError):
        run_study(Graph(3), "clustering", CurvatureVariant.FRC_1)
    with pytest.raises(GraphInputError):
        correlate("x", ["a"], np.array([1.0]), np.array([1.0, 2.0]), "x", "y")
