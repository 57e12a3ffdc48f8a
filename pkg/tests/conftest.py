"""
测试共用的小图
"""
import itertools

import pytest

from core.graph_core import Graph


def complete_graph(n: int) -> Graph:
    return Graph(n, itertools.combinations(range(n), 2))


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


@pytest.fixture
def k2():
    return complete_graph(2)


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture
def c4():
    return Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])


@pytest.fixture
def p3():
    return path_graph(3)


@pytest.fixture
def p4():
    return path_graph(4)


@pytest.fixture
def star4():
    return star_graph(4)


@pytest.fixture
def counterexample():
    """顶点 0=l, 1=x, 2=c, 3=y; 关注边 {x, y}"""
    return Graph(4, [(0, 1, 3.0), (1, 2, 2.0), (2, 3, 2.0), (0, 2, 0.2), (1, 3, 1.0)])


@pytest.fixture
def two_k5_bridge():
    """两个 K_5 由边 (4, 5) 相连"""
    edges = list(itertools.combinations(range(5), 2))
    edges += list(itertools.combinations(range(5, 10), 2))
    edges.append((4, 5))
    return Graph(10, edges)
