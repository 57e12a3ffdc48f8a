"""
带权无向简单图及其线图、邻域测度与局部结构统计
"""
import math
import logging
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from core.config import MeasureMode
from core.errors import GraphInputError

logger = logging.getLogger("graph_core")

# 不连通时的距离哨兵值
DISCONNECTED = math.inf

Edge = Tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    """无向边的规范表示 (小编号在前)"""
    return (u, v) if u < v else (v, u)


class Graph:
    """
    不可变的带权无向简单图

    顶点为 0..n-1 的稠密整数编号, 外部标签保存在 labels 中。
    构造完成后只读, 可在多个线程或进程之间共享。
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[Sequence] = (),
        vertex_weight: Optional[Sequence[float]] = None,
        labels: Optional[Sequence[str]] = None,
    ):
        """
        构造图

        Args:
            n: 顶点数
            edges: (u, v) 或 (u, v, w) 序列, w 默认 1.0
            vertex_weight: 顶点权重, 默认全为 1
            labels: 顶点的外部标签
        """
        if n < 0:
            raise GraphInputError(f"顶点数不能为负: {n}")
        adjacency: List[Dict[int, float]] = [dict() for _ in range(n)]
        raw_edges: List[Edge] = []
        raw_weights: List[float] = []
        for item in edges:
            if len(item) == 2:
                u, v = item
                w = 1.0
            else:
                u, v, w = item
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphInputError(f"边 ({u}, {v}) 的端点超出顶点范围 0..{n - 1}")
            if u == v:
                raise GraphInputError(f"不允许自环: {u}")
            if v in adjacency[u]:
                raise GraphInputError(f"不允许重复边: ({u}, {v})")
            if not (w > 0.0 and math.isfinite(w)):
                raise GraphInputError(f"边 ({u}, {v}) 的权重必须为有限正数: {w}")
            adjacency[u][v] = w
            adjacency[v][u] = w
            raw_edges.append(edge_key(u, v))
            raw_weights.append(w)

        order = sorted(range(len(raw_edges)), key=raw_edges.__getitem__)
        self._n = n
        self._adj = adjacency
        self._edges: List[Edge] = [raw_edges[i] for i in order]
        self._weights = np.array([raw_weights[i] for i in order], dtype=float)
        self._weights.setflags(write=False)
        self._index: Dict[Edge, int] = {e: i for i, e in enumerate(self._edges)}

        if vertex_weight is None:
            self._vertex_weight = np.ones(n, dtype=float)
        else:
            self._vertex_weight = np.asarray(vertex_weight, dtype=float).copy()
            if self._vertex_weight.shape != (n,):
                raise GraphInputError("顶点权重长度与顶点数不一致")
            if not np.all(self._vertex_weight > 0.0):
                raise GraphInputError("顶点权重必须为正数")
        self._vertex_weight.setflags(write=False)
        self._labels = list(labels) if labels is not None else None
        if self._labels is not None and len(self._labels) != n:
            raise GraphInputError("顶点标签数量与顶点数不一致")

    # 基本属性

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> List[Edge]:
        """按字典序排列的边列表, 与 weights 一一对应"""
        return self._edges

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def vertex_weights(self) -> np.ndarray:
        return self._vertex_weight

    @property
    def labels(self) -> List[str]:
        if self._labels is None:
            return [str(v) for v in range(self._n)]
        return self._labels

    def vertices(self) -> range:
        return range(self._n)

    def check_vertex(self, v: int) -> None:
        if not (isinstance(v, (int, np.integer)) and 0 <= v < self._n):
            raise GraphInputError(f"未知顶点: {v}")

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < self._n and v in self._adj[u]

    def edge_index(self, u: int, v: int) -> int:
        try:
            return self._index[edge_key(u, v)]
        except KeyError:
            raise GraphInputError(f"未知边: ({u}, {v})") from None

    def check_edge(self, e: Sequence[int]) -> Edge:
        """校验并返回规范化的边"""
        u, v = int(e[0]), int(e[1])
        self.check_vertex(u)
        self.check_vertex(v)
        if v not in self._adj[u]:
            raise GraphInputError(f"未知边: ({u}, {v})")
        return edge_key(u, v)

    def weight(self, u: int, v: int) -> float:
        try:
            return self._adj[u][v]
        except (KeyError, IndexError):
            raise GraphInputError(f"未知边: ({u}, {v})") from None

    def vertex_weight(self, v: int) -> float:
        return float(self._vertex_weight[v])

    def neighbors(self, v: int) -> Mapping[int, float]:
        """邻居到边权的映射 (只读)"""
        return self._adj[v]

    # 派生结构, 图不可变因此可以缓存

    @cached_property
    def is_unit_weighted(self) -> bool:
        return bool(np.all(self._weights == 1.0))

    @cached_property
    def nx_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self._n))
        graph.add_weighted_edges_from(
            (u, v, float(w)) for (u, v), w in zip(self._edges, self._weights)
        )
        return nx.freeze(graph)

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        if not self._edges:
            return sparse.csr_matrix((self._n, self._n))
        rows, cols = np.array(self._edges, dtype=np.int64).T
        data = np.concatenate([self._weights, self._weights])
        return sparse.csr_matrix(
            (data, (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
            shape=(self._n, self._n),
        )

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """全源最短路距离矩阵, 不连通为 inf"""
        logger.debug(f"计算全源最短路: n={self._n}, m={self.m}")
        return csgraph.shortest_path(self.csr, method="D", directed=False)

    # 变换

    def with_weights(self, weights: Sequence[float]) -> "Graph":
        """
        拓扑不变, 替换边权

        Args:
            weights: 与 self.edges 顺序一致的新边权

        Returns:
            新图
        """
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (self.m,):
            raise GraphInputError("边权数量与边数不一致")
        return Graph(
            self._n,
            ((u, v, w) for (u, v), w in zip(self._edges, weights)),
            vertex_weight=self._vertex_weight,
            labels=self._labels,
        )

    def subgraph(self, vertices: Iterable[int]) -> Tuple["Graph", List[int]]:
        """
        诱导子图, 顶点重新编号

        Returns:
            (子图, 新编号到原编号的列表)
        """
        original = sorted(set(int(v) for v in vertices))
        local = {v: i for i, v in enumerate(original)}
        sub_edges = [
            (local[u], local[v], w)
            for (u, v), w in zip(self._edges, self._weights)
            if u in local and v in local
        ]
        labels = [self.labels[v] for v in original]
        sub = Graph(
            len(original),
            sub_edges,
            vertex_weight=self._vertex_weight[original] if original else None,
            labels=labels,
        )
        return sub, original

    def connected_components(self) -> List[List[int]]:
        """连通分量, 按最小顶点编号排序"""
        count, labels = csgraph.connected_components(self.csr, directed=False)
        groups: List[List[int]] = [[] for _ in range(count)]
        for v, c in enumerate(labels):
            groups[c].append(v)
        return sorted(groups, key=lambda group: group[0])

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.m})"


@dataclass
class LineGraphMap:
    """线图及其与原图边的对应关系"""
    line_graph: Graph
    base: Graph
    edge_of_vertex: List[Edge]
    vertex_of_edge: Dict[Edge, int]
    edge_origin: Dict[Edge, int]
    scheme: str = "unit"

    def vertex(self, e: Sequence[int]) -> int:
        """原图边对应的线图顶点"""
        try:
            return self.vertex_of_edge[edge_key(int(e[0]), int(e[1]))]
        except KeyError:
            raise GraphInputError(f"未知边: {tuple(e)}") from None


@dataclass
class NeighborhoodMeasure:
    """闭邻域上的概率测度"""
    center: int
    mass: Dict[int, float] = field(default_factory=dict)
    alpha: float = 0.0
    p: float = 1.0

    def total(self) -> float:
        return float(sum(self.mass.values()))

    def support(self) -> List[int]:
        return [v for v, m in self.mass.items() if m > 0.0]


# 基本运算

def degree(g: Graph, v: int) -> float:
    """加权度: 关联边权之和"""
    g.check_vertex(v)
    return float(sum(g.neighbors(v).values()))


def unweighted_degree(g: Graph, v: int) -> int:
    g.check_vertex(v)
    return len(g.neighbors(v))


def shortest_path_distance(g: Graph, u: int, v: int) -> float:
    """
    加权最短路距离

    Returns:
        距离; 不连通时返回 DISCONNECTED
    """
    g.check_vertex(u)
    g.check_vertex(v)
    if u == v:
        return 0.0
    try:
        return float(nx.dijkstra_path_length(g.nx_graph, u, v, weight="weight"))
    except nx.NetworkXNoPath:
        return DISCONNECTED


def shared_vertex(g: Graph, e1: Sequence[int], e2: Sequence[int]) -> Tuple[int, int, int]:
    """
    两条相邻边的公共顶点

    Returns:
        (u, v, w) 满足 e1={u,v}, e2={v,w}
    """
    a = g.check_edge(e1)
    b = g.check_edge(e2)
    common = set(a) & set(b)
    if a == b or len(common) != 1:
        raise GraphInputError(f"边 {a} 与 {b} 不相邻")
    v = common.pop()
    u = a[0] if a[1] == v else a[1]
    w = b[0] if b[1] == v else b[1]
    return u, v, w


# 线图

def _build_line_graph(g: Graph, scheme: str) -> LineGraphMap:
    line_edges = []
    origin: Dict[Edge, int] = {}
    weights = g.weights
    for v in g.vertices():
        incident = sorted(g.edge_index(v, z) for z in g.neighbors(v))
        for i, j in itertools.combinations(incident, 2):
            if scheme == "sqrt":
                w = math.sqrt(weights[i] * weights[j])
            elif scheme == "product":
                w = weights[i] * weights[j]
            else:
                w = 1.0
            line_edges.append((i, j, w))
            origin[(i, j)] = v
    line = Graph(
        g.m,
        line_edges,
        vertex_weight=weights,
        labels=[f"{g.labels[u]}-{g.labels[v]}" for u, v in g.edges],
    )
    logger.debug(f"构造线图({scheme}): |V(L)|={line.n}, |E(L)|={line.m}")
    return LineGraphMap(
        line_graph=line,
        base=g,
        edge_of_vertex=list(g.edges),
        vertex_of_edge={e: i for i, e in enumerate(g.edges)},
        edge_origin=origin,
        scheme=scheme,
    )


def line_graph(g: Graph) -> LineGraphMap:
    """单位边权线图, 线图顶点权重继承原图边权"""
    return _build_line_graph(g, "unit")


def line_graph_weighted(g: Graph) -> LineGraphMap:
    """线图边权取 sqrt(w_e1 * w_e2)"""
    return _build_line_graph(g, "sqrt")


def line_graph_product(g: Graph) -> LineGraphMap:
    """线图边权取 w_e1 * w_e2"""
    return _build_line_graph(g, "product")


# 邻域测度

def measure_from_scores(center: int, neighbors: List[int], scores: np.ndarray, alpha: float, p: float) -> NeighborhoodMeasure:
    """scores 为非负权重 (未归一化), 邻居分得 1-alpha"""
    mass = {center: float(alpha)}
    total = scores.sum()
    for z, s in zip(neighbors, scores):
        mass[z] = float((1.0 - alpha) * s / total)
    return NeighborhoodMeasure(center=center, mass=mass, alpha=alpha, p=p)


def _isolated_measure(g: Graph, u: int, alpha: float, p: float) -> NeighborhoodMeasure:
    if alpha < 1.0:
        raise GraphInputError(f"孤立顶点 {u} 无法构造 alpha<1 的邻域测度")
    return NeighborhoodMeasure(center=u, mass={u: 1.0}, alpha=alpha, p=p)


def exponential_scores(exponents: np.ndarray) -> np.ndarray:
    # 平移指数避免下溢, 归一化后结果不变
    return np.exp(-(exponents - exponents.min()))


def node_measure(g: Graph, u: int, alpha: float = 0.0, p: float = 1.0) -> NeighborhoodMeasure:
    """
    指数型邻域测度: m(u)=alpha, m(z) ∝ (1-alpha) exp(-w_uz^p)

    Args:
        g: 图
        u: 中心顶点
        alpha: 停留概率
        p: 边权指数
    """
    g.check_vertex(u)
    nbrs = g.neighbors(u)
    if not nbrs:
        return _isolated_measure(g, u, alpha, p)
    ids = list(nbrs)
    weights = np.array([nbrs[z] for z in ids], dtype=float)
    return measure_from_scores(u, ids, exponential_scores(weights ** p), alpha, p)


def measure_for_mode(g: Graph, u: int, mode: MeasureMode) -> NeighborhoodMeasure:
    """按 MeasureMode 构造顶点 u 的邻域测度"""
    if mode.kind == "exponential":
        return node_measure(g, u, mode.alpha, mode.p)
    g.check_vertex(u)
    nbrs = g.neighbors(u)
    alpha = mode.alpha if mode.kind == "lazy_uniform" else 0.0
    if not nbrs:
        return _isolated_measure(g, u, alpha, mode.p)
    ids = list(nbrs)
    if mode.kind == "degree_proportional":
        scores = np.array([nbrs[z] for z in ids], dtype=float)
    else:
        scores = np.ones(len(ids))
    return measure_from_scores(u, ids, scores, alpha, mode.p)


def line_node_measure(lg: LineGraphMap, e, alpha: float = 0.0, p: float = 1.0) -> NeighborhoodMeasure:
    """
    线图顶点的邻域测度: 邻居 e' 的质量正比于 exp(-w_e'^{p/2} w_e^{p/2})

    Args:
        lg: 线图映射
        e: 线图顶点编号或原图边
        alpha: 停留概率
        p: 边权指数
    """
    line = lg.line_graph
    center = int(e) if isinstance(e, (int, np.integer)) else lg.vertex(e)
    line.check_vertex(center)
    nbrs = line.neighbors(center)
    if not nbrs:
        return _isolated_measure(line, center, alpha, p)
    ids = list(nbrs)
    own = line.vertex_weight(center) ** (p / 2.0)
    exponents = np.array([line.vertex_weight(z) ** (p / 2.0) * own for z in ids])
    return measure_from_scores(center, ids, exponential_scores(exponents), alpha, p)


# 局部结构

def triangle_count(g: Graph, e: Sequence[int]) -> int:
    """包含边 e 的三角形个数"""
    u, v = g.check_edge(e)
    return len(g.neighbors(u).keys() & g.neighbors(v).keys())


def triangles_through(g: Graph, e: Sequence[int]) -> List[Tuple[int, int, int]]:
    u, v = g.check_edge(e)
    common = sorted(g.neighbors(u).keys() & g.neighbors(v).keys())
    return [(u, v, z) for z in common]


def enumerate_quadrangles(g: Graph, e: Sequence[int]) -> List[Tuple[int, int, int, int]]:
    """
    经过边 e={u,v} 的所有顶点互异 4-圈 (u, v, w, x), 允许弦

    Returns:
        每个圈只出现一次
    """
    u, v = g.check_edge(e)
    cycles = []
    for w in sorted(g.neighbors(v)):
        if w == u:
            continue
        for x in sorted(g.neighbors(w).keys() & g.neighbors(u).keys()):
            if x != v and x != w:
                cycles.append((u, v, w, x))
    return cycles


def clustering_coefficient(g: Graph, u: int) -> float:
    """聚类系数, 度小于 2 时为 0"""
    d = unweighted_degree(g, u)
    if d < 2:
        return 0.0
    triangles = sum(triangle_count(g, (u, v)) for v in g.neighbors(u))
    return triangles / (d * (d - 1))


def face_statistics(g: Graph) -> Dict[str, np.ndarray]:
    """
    每条边上的三角形与四边形数目

    Returns:
        {"triangles": 数组, "quadrangles": 数组}, 与 g.edges 对齐
    """
    tri = np.array([triangle_count(g, e) for e in g.edges], dtype=int)
    quad = np.array([len(enumerate_quadrangles(g, e)) for e in g.edges], dtype=int)
    return {"triangles": tri, "quadrangles": quad}
