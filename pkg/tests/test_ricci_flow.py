import itertools

import numpy as np
import pytest

from core.config import CurvatureVariant, FlowConfig
from core.errors import FlowWeightError, GraphInputError
from core.generators import BRIDGE, HUB_INTERNAL, INTERNAL, gen_g_ab, gen_l_ab
from core.graph_core import Graph
from core.ricci_flow import (
    FlowState,
    Labeling,
    adaptive_step,
    affiliation_from_edges,
    apply_flow_update,
    cluster_mixed,
    cluster_single,
    components_labeling,
    cut_and_select,
    cutoffs_frc,
    cutoffs_orc,
    edge_distances,
    flow_step,
    initial_state,
    modularity,
    run_flow,
)
from tests.conftest import complete_graph


def state_with(weights):
    w = np.asarray(weights, dtype=float)
    return FlowState(edges=[(0, i + 1) for i in range(len(w))], weights_t=[w])


def exact_config(**kwargs):
    return FlowConfig(curvature=CurvatureVariant.ORC_E, nu=1.0, **kwargs)


def test_update_renormalizes_to_edge_count():
    weights = np.array([1.0, 2.0, 3.0])
    updated = apply_flow_update(weights, np.array([0.5, -0.5, 0.0]), weights, 1.0, True, [(0, 1), (1, 2), (2, 3)])
    assert updated.sum() == pytest.approx(3.0)
    raw = apply_flow_update(weights, np.array([0.5, -0.5, 0.0]), weights, 1.0, False, [(0, 1), (1, 2), (2, 3)])
    assert list(raw) == pytest.approx([0.5, 3.0, 3.0])


def test_update_rejects_non_positive_weight():
    with pytest.raises(FlowWeightError) as info:
        apply_flow_update(np.ones(2), np.array([0.0, 1.0]), np.ones(2), 1.0, True, [(0, 1), (1, 2)])
    assert info.value.edge == (1, 2)
    assert info.value.code == 4


def test_adaptive_step():
    assert adaptive_step(np.array([2.0, -5.0, 1.0])) == pytest.approx(1 / 5.5)
    assert adaptive_step(np.zeros(3)) == 1.0


def test_edge_distances_use_shortest_paths():
    g = Graph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)])
    assert list(edge_distances(g)) == pytest.approx([1.0, 2.0, 1.0])


def test_flow_step_keeps_history(two_k5_bridge):
    cfg = FlowConfig(curvature=CurvatureVariant.ORC_A)
    state = flow_step(two_k5_bridge, initial_state(two_k5_bridge), cfg)
    assert state.iterations == 1
    assert len(state.curvature_t) == 1
    assert state.nu_t == [1.0]
    assert state.weights.sum() == pytest.approx(two_k5_bridge.m)
    summary = state.summary()
    assert summary[0]["t"] == 0 and "nu" not in summary[0]
    assert summary[1]["nu"] == 1.0


def test_orc_cutoffs():
    cuts = cutoffs_orc(state_with([1.0, 2.0]))
    assert len(cuts) == 41
    assert cuts[0] == 2.0
    assert cuts[-1] == pytest.approx(1.0)
    cuts = cutoffs_orc(state_with([1.26, 0.5]))
    assert cuts[-1] == pytest.approx(1.01)
    assert all(a > b for a, b in zip(cuts, cuts[1:]))
    assert cutoffs_orc(state_with([0.9, 0.5])) == [0.9]


def test_frc_cutoffs():
    cuts = cutoffs_frc(state_with([10.0, 9.0] + [1.0] * 1000))
    assert cuts[:2] == [10.0, 9.0]
    assert cuts[2] == pytest.approx(8.75)
    assert cuts[-1] == pytest.approx(1.25)
    assert len(cuts) == 33


def test_components_labeling_first_appearance_order():
    g = Graph(5, [(0, 3), (1, 2), (3, 4)])
    labeling = components_labeling(g, np.array([True, True, True]))
    assert list(labeling.labels) == [0, 1, 1, 0, 0]
    cut = components_labeling(g, np.array([True, False, False]))
    assert list(cut.labels) == [0, 1, 2, 0, 3]
    assert cut.k == 4


def test_modularity_two_cliques(two_k5_bridge):
    labeling = Labeling(np.array([0] * 5 + [1] * 5))
    assert modularity(two_k5_bridge, labeling) == pytest.approx(19 / 42)
    assert modularity(two_k5_bridge, Labeling(np.zeros(10, dtype=int))) == pytest.approx(0.0)
    with pytest.raises(GraphInputError):
        modularity(two_k5_bridge, Labeling(np.zeros(3, dtype=int)))


def test_cut_and_select_returns_none_without_gain(two_k5_bridge):
    state = initial_state(two_k5_bridge)
    labeling, q, cut = cut_and_select(two_k5_bridge, state, [1.0], FlowConfig())
    assert labeling is None and cut is None


@pytest.mark.parametrize("variant", [CurvatureVariant.ORC_A, CurvatureVariant.ORC_E, CurvatureVariant.ORC_A1])
def test_two_cliques_are_separated(two_k5_bridge, variant):
    result = cluster_single(two_k5_bridge, FlowConfig(curvature=variant))
    assert result is not None
    assert result.labeling.k == 2
    assert list(result.labeling.labels) == [0] * 5 + [1] * 5
    assert result.modularity == pytest.approx(19 / 42)


def test_clique_has_no_structure():
    assert cluster_single(complete_graph(6), FlowConfig()) is None


def test_forman_flow_stretches_bridge(two_k5_bridge):
    cfg = FlowConfig(curvature=CurvatureVariant.FRC_2, T=3)
    state = run_flow(two_k5_bridge, cfg)
    bridge = two_k5_bridge.edge_index(4, 5)
    assert int(np.argmax(state.weights)) == bridge
    assert all(0.0 < nu < 1.0 for nu in state.nu_t)


def test_components_are_clustered_separately():
    edges = list(itertools.combinations(range(6), 2)) + list(itertools.combinations(range(6, 12), 2))
    g = Graph(13, edges)
    result = cluster_single(g, FlowConfig())
    assert result is not None
    assert result.labeling.k == 3
    assert len(result.runs) == 3
    assert result.runs[2].state is None
    manifest = result.manifest(FlowConfig())
    assert manifest["communities"] == 3
    assert manifest["config"]["curvature"] == "ORC-A"
    assert [c["size"] for c in manifest["components"]] == [6, 6, 1]


def test_empty_graph_is_rejected():
    with pytest.raises(GraphInputError):
        cluster_single(Graph(0), FlowConfig())
    with pytest.raises(GraphInputError):
        cluster_mixed(Graph(3), FlowConfig())


def expected_gab_weights(a, b):
    w1 = (3 * a - 1) / (a + b - 1)
    if b == 2:
        w2 = 2 / (a + 1)
    else:
        w2 = (2 * a - 1) * (b - 1) / (a * (a + b - 1))
    return {BRIDGE: w1, HUB_INTERNAL: w2, INTERNAL: 1 / a}


@pytest.mark.parametrize("a, b", [(3, 2), (5, 2), (5, 3)])
def test_gab_first_iteration_closed_form(a, b):
    g, truth = gen_g_ab(a, b)
    state = run_flow(g, exact_config(T=1, renormalize=False))
    expected = expected_gab_weights(a, b)
    for edge, w in zip(g.edges, state.weights):
        assert w == pytest.approx(expected[truth.edge_types[edge]])
    assert expected[BRIDGE] > expected[HUB_INTERNAL] > expected[INTERNAL]
    assert expected[INTERNAL] < 1.0


@pytest.mark.parametrize("a, b", [(3, 2), (5, 3)])
def test_gab_weights_are_shortest_paths_during_flow(a, b):
    g, _ = gen_g_ab(a, b)
    state = run_flow(g, exact_config(T=3, renormalize=False))
    for w in state.weights_t[1:]:
        assert np.allclose(edge_distances(g.with_weights(w)), w)


def test_gab_single_clustering_recovers_blocks():
    g, truth = gen_g_ab(5, 3)
    result = cluster_single(g, FlowConfig(curvature=CurvatureVariant.ORC_E, T=1))
    assert result is not None
    assert result.labeling.k == 3
    for block in range(3):
        members = np.flatnonzero(truth.membership[:, block])
        assert len(set(result.labeling.labels[members])) == 1


def test_lab_center_joins_every_community():
    g, _ = gen_l_ab(3, 3)
    result = cluster_mixed(g, FlowConfig(curvature=CurvatureVariant.ORC_E))
    assert result is not None
    assert result.labeling.k == 3
    assert len(result.labeling.binary[0]) == 3
    assert result.labeling.y[0] == pytest.approx([1 / 3] * 3)
    assert all(len(members) == 1 for members in result.labeling.binary[1:])
    assert result.manifest(FlowConfig())["mode"] == "mixed"


def test_affiliation_from_edges():
    g = Graph(4, [(0, 1), (0, 2), (1, 2)])
    y = affiliation_from_edges(g, np.array([0, 1, 1]), 2)
    assert list(y[0]) == pytest.approx([0.5, 0.5])
    assert list(y[2]) == pytest.approx([0.0, 1.0])
    assert list(y[3]) == [0.0, 0.0]
