"""
Ollivier Ricci 曲率: 精确值、Sinkhorn 近似、组合上下界及其均值近似

上下界只依赖边的两跳邻域, 线图上的上下界直接在原图上按需展开线图邻接,
不需要构造整个线图。
"""
import heapq
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Sequence

import networkx as nx
import numpy as np

from core.config import CurvatureVariant, MeasureMode, SinkhornParams
from core.curvature import CurvatureCalculator, EdgeCurvature
from core.errors import GraphInputError
from core.graph_core import (
    Graph,
    LineGraphMap,
    NeighborhoodMeasure,
    exponential_scores,
    line_node_measure,
    measure_for_mode,
    measure_from_scores,
    shared_vertex,
    triangle_count,
    unweighted_degree,
)
from core.transport import TransportProblem, w1_exact, w1_sinkhorn

logger = logging.getLogger("ollivier")

DEFAULT_MEASURE = MeasureMode(kind="exponential", alpha=0.0, p=1.0)


@dataclass(frozen=True)
class OrcBounds:
    lower: float
    upper: float

    @property
    def midpoint(self) -> float:
        return (self.lower + self.upper) / 2.0


# 精确值

def orc_edge_exact(g: Graph, e: Sequence[int], mode: Optional[MeasureMode] = None) -> float:
    """
    精确 ORC: 1 - W1(m_x, m_y) / d_G(x, y)

    Args:
        g: 图
        e: 边 (x, y)
        mode: 邻域测度, 默认指数测度 alpha=0, p=1
    """
    x, y = g.check_edge(e)
    mode = mode or DEFAULT_MEASURE
    problem = TransportProblem.from_measures(g, measure_for_mode(g, x, mode), measure_for_mode(g, y, mode))
    return 1.0 - w1_exact(problem) / float(g.distance_matrix[x, y])


def orc_edge_sinkhorn(
    g: Graph,
    e: Sequence[int],
    mode: Optional[MeasureMode] = None,
    params: Optional[SinkhornParams] = None,
) -> float:
    """ORC-S: 以 Sinkhorn 估计替代精确 W1"""
    x, y = g.check_edge(e)
    mode = mode or DEFAULT_MEASURE
    params = params or SinkhornParams()
    problem = TransportProblem.from_measures(g, measure_for_mode(g, x, mode), measure_for_mode(g, y, mode))
    w1 = w1_sinkhorn(problem, reg=params.reg, max_iter=params.max_iter, tol=params.tol)
    return 1.0 - w1 / float(g.distance_matrix[x, y])


def orc_vertex(g: Graph, v: int, mode: Optional[MeasureMode] = None) -> float:
    """顶点 ORC: 关联边精确 ORC 之和"""
    g.check_vertex(v)
    if not g.neighbors(v):
        raise GraphInputError(f"孤立顶点 {v} 没有 ORC")
    return float(sum(orc_edge_exact(g, (v, z), mode) for z in g.neighbors(v)))


# 无权上下界

def _jost_liu(dx: float, dy: float, t: float) -> OrcBounds:
    low_deg, high_deg = min(dx, dy), max(dx, dy)
    base = 1.0 - 1.0 / dx - 1.0 / dy
    lower = -max(base - t / low_deg, 0.0) - max(base - t / high_deg, 0.0) + t / high_deg
    return OrcBounds(lower=lower, upper=t / high_deg)


def orc_bounds_unweighted(g: Graph, e: Sequence[int]) -> OrcBounds:
    """
    单位边权图上由度数与三角形个数给出的上下界
    """
    x, y = g.check_edge(e)
    if not g.is_unit_weighted:
        raise GraphInputError("无权上下界要求所有边权为 1")
    return _jost_liu(unweighted_degree(g, x), unweighted_degree(g, y), triangle_count(g, (x, y)))


# 带权上下界

class _GraphMetric:
    """图本身的局部度量"""

    def __init__(self, g: Graph):
        self.g = g

    def neighbors(self, v: int) -> Mapping[int, float]:
        return self.g.neighbors(v)

    def distances(self, sources: Iterable[int], cutoff: float) -> Dict[int, float]:
        return nx.multi_source_dijkstra_path_length(self.g.nx_graph, set(sources), cutoff=cutoff, weight="weight")


class _LineMetric:
    """
    原图边构成的线图度量, 边权 sqrt(w_e1 * w_e2)

    线图顶点编号即原图边序号, 邻接按需生成。
    """

    def __init__(self, g: Graph):
        self.g = g
        self._neighbors: Dict[int, Dict[int, float]] = {}

    def neighbors(self, i: int) -> Mapping[int, float]:
        cached = self._neighbors.get(i)
        if cached is not None:
            return cached
        a, b = self.g.edges[i]
        own = float(self.g.weights[i])
        result = {}
        for end, other in ((a, b), (b, a)):
            for z, w in self.g.neighbors(end).items():
                if z != other:
                    result[self.g.edge_index(end, z)] = math.sqrt(own * w)
        self._neighbors[i] = result
        return result

    def distances(self, sources: Iterable[int], cutoff: float) -> Dict[int, float]:
        settled: Dict[int, float] = {}
        frontier = [(0.0, s) for s in set(sources)]
        heapq.heapify(frontier)
        while frontier:
            dist, v = heapq.heappop(frontier)
            if v in settled:
                continue
            settled[v] = dist
            for z, w in self.neighbors(v).items():
                candidate = dist + w
                if z not in settled and candidate <= cutoff:
                    heapq.heappush(frontier, (candidate, z))
        return settled

    def measure(self, i: int, alpha: float, p: float) -> NeighborhoodMeasure:
        nbrs = self.neighbors(i)
        if not nbrs:
            if alpha < 1.0:
                raise GraphInputError(f"线图孤立顶点 {self.g.edges[i]} 无法构造 alpha<1 的邻域测度")
            return NeighborhoodMeasure(center=i, mass={i: 1.0}, alpha=alpha, p=p)
        ids = list(nbrs)
        weights = self.g.weights
        own = float(weights[i]) ** (p / 2.0)
        exponents = [float(weights[z]) ** (p / 2.0) * own for z in ids]
        return measure_from_scores(i, ids, exponential_scores(np.asarray(exponents, dtype=float)), alpha, p)


def _reach(s: int, center: int, nbrs_center: Mapping[int, float], nbrs_other: Mapping[int, float], dxy: float) -> float:
    """经由 center 到达 s 的一条路径长度 (s 位于两端点的闭邻域内)"""
    if s == center:
        return 0.0
    if s in nbrs_center:
        return nbrs_center[s]
    return dxy + nbrs_other[s]


def _potential_gain(metric, sources, targets, diff, x, y, nbrs_x, nbrs_y, dxy) -> float:
    """
    以截断距离 min(d(., sources), c) 为 1-Lipschitz 势函数给出 W1 的下界
    """
    if not sources or not targets:
        return 0.0
    cutoff = 0.0
    for v in targets:
        best = math.inf
        for n in sources:
            via_x = _reach(v, x, nbrs_x, nbrs_y, dxy) + _reach(n, x, nbrs_x, nbrs_y, dxy)
            via_y = _reach(v, y, nbrs_y, nbrs_x, dxy) + _reach(n, y, nbrs_y, nbrs_x, dxy)
            best = min(best, via_x, via_y)
        cutoff = max(cutoff, best)
    reached = metric.distances(sources, cutoff)
    return sum(min(reached.get(v, cutoff), cutoff) * abs(diff[v]) for v in targets)


def _bounds_on_metric(metric, x: int, y: int, mx: NeighborhoodMeasure, my: NeighborhoodMeasure) -> OrcBounds:
    nbrs_x = metric.neighbors(x)
    nbrs_y = metric.neighbors(y)
    w_xy = nbrs_x[y]
    dxy = metric.distances([x], w_xy).get(y, w_xy)

    support = set(mx.mass) | set(my.mass)
    diff = {v: mx.mass.get(v, 0.0) - my.mass.get(v, 0.0) for v in support}
    positive = [v for v in support if diff[v] > 0.0]
    negative = [v for v in support if diff[v] < 0.0]

    # 上界: 对偶可行势给出 W1 的下界
    gain = max(
        _potential_gain(metric, negative, positive, diff, x, y, nbrs_x, nbrs_y, dxy),
        _potential_gain(metric, positive, negative, diff, x, y, nbrs_x, nbrs_y, dxy),
    )
    upper = 1.0 - gain / dxy

    # 下界: 经由 x, y 中转的可行传输方案给出 W1 的上界
    mass_x, mass_y = mx.mass, my.mass
    left = [v for v in nbrs_x if v != y and v not in nbrs_y]
    right = [v for v in nbrs_y if v != x and v not in nbrs_x]
    common = [v for v in nbrs_x if v in nbrs_y]
    cost = sum(nbrs_x[v] * mass_x.get(v, 0.0) for v in left)
    cost += sum(nbrs_y[v] * mass_y.get(v, 0.0) for v in right)
    deficit = 0.0
    for c in common:
        surplus = mass_x.get(c, 0.0) - mass_y.get(c, 0.0)
        if surplus > 0.0:
            cost += nbrs_y[c] * surplus
        else:
            cost += nbrs_x[c] * -surplus
            deficit += -surplus
    residual = mass_x.get(x, 0.0) + sum(mass_x.get(v, 0.0) for v in left) - deficit - mass_y.get(x, 0.0)
    lower = 1.0 - cost / dxy - abs(residual)
    return OrcBounds(lower=lower, upper=upper)


def orc_bounds_for_measures(
    g: Graph, x: int, y: int, mx: NeighborhoodMeasure, my: NeighborhoodMeasure
) -> OrcBounds:
    """
    任意闭邻域测度下的 ORC 上下界

    Args:
        g: 图
        x, y: 边的两个端点
        mx, my: 分别支撑在 x, y 闭邻域上的概率测度
    """
    x, y = g.check_edge((x, y))
    return _bounds_on_metric(_GraphMetric(g), x, y, mx, my)


def _reduces_to_uniform(g: Graph, mode: MeasureMode) -> bool:
    if not g.is_unit_weighted:
        return False
    return mode.kind in ("uniform", "degree_proportional") or mode.alpha == 0.0


def orc_bounds(g: Graph, e: Sequence[int], mode: Optional[MeasureMode] = None) -> OrcBounds:
    """按测度方式选择上下界, 单位边权且测度退化为均匀测度时使用无权公式"""
    x, y = g.check_edge(e)
    mode = mode or DEFAULT_MEASURE
    if _reduces_to_uniform(g, mode):
        return orc_bounds_unweighted(g, (x, y))
    return orc_bounds_for_measures(g, x, y, measure_for_mode(g, x, mode), measure_for_mode(g, y, mode))


def orc_bounds_weighted(g: Graph, e: Sequence[int], alpha: float = 0.0, p: float = 1.0) -> OrcBounds:
    return orc_bounds(g, e, MeasureMode(kind="exponential", alpha=alpha, p=p))


def orc_approx(g: Graph, e: Sequence[int], alpha: float = 0.0, p: float = 1.0) -> float:
    """ORC-A: 上下界的算术平均"""
    return orc_bounds_weighted(g, e, alpha, p).midpoint


def orc_approx_a1(g: Graph, e: Sequence[int], alpha: float = 0.0, p: float = 1.0) -> float:
    """ORC-A1: 以 1 代替上界"""
    return (1.0 + orc_bounds_weighted(g, e, alpha, p).lower) / 2.0


def jost_liu_weighted_upper(g: Graph, e: Sequence[int]) -> float:
    """
    文献中带权上界 sum_c min(w_cx/d_x, w_cy/d_y), c 取遍公共邻居

    该式在度数比例测度下并不总是成立, 保留用于对照。
    """
    x, y = g.check_edge(e)
    nbrs_x, nbrs_y = g.neighbors(x), g.neighbors(y)
    dx, dy = sum(nbrs_x.values()), sum(nbrs_y.values())
    return float(sum(min(nbrs_x[c] / dx, nbrs_y[c] / dy) for c in nbrs_x.keys() & nbrs_y.keys()))


# 线图

def line_orc_bounds_base(g: Graph, e1: Sequence[int], e2: Sequence[int]) -> OrcBounds:
    """
    线图边 {e1, e2} 的无权上下界, 只用原图度数

    Args:
        g: 原图
        e1: 边 {u, v}
        e2: 边 {v, w}
    """
    u, v, w = shared_vertex(g, e1, e2)
    du, dv, dw = (unweighted_degree(g, z) for z in (u, v, w))
    common = dv - 2 + (1 if g.has_edge(u, w) else 0)
    return _jost_liu(du + dv - 2, dv + dw - 2, common)


def line_orc_bounds_weighted(
    g: Graph, e1: Sequence[int], e2: Sequence[int], alpha: float = 0.0, p: float = 1.0
) -> OrcBounds:
    """
    带权线图 (边权 sqrt(w_e1 w_e2)) 上线图边 {e1, e2} 的上下界
    """
    shared_vertex(g, e1, e2)
    if g.is_unit_weighted and alpha == 0.0:
        return line_orc_bounds_base(g, e1, e2)
    metric = _LineMetric(g)
    i, j = g.edge_index(*e1), g.edge_index(*e2)
    return _bounds_on_metric(metric, i, j, metric.measure(i, alpha, p), metric.measure(j, alpha, p))


def line_orc_approx(g: Graph, e1: Sequence[int], e2: Sequence[int], alpha: float = 0.0, p: float = 1.0) -> float:
    return line_orc_bounds_weighted(g, e1, e2, alpha, p).midpoint


def line_orc_approx_a1(g: Graph, e1: Sequence[int], e2: Sequence[int], alpha: float = 0.0, p: float = 1.0) -> float:
    return (1.0 + line_orc_bounds_weighted(g, e1, e2, alpha, p).lower) / 2.0


def line_orc_edge_exact(lg: LineGraphMap, e1: Sequence[int], e2: Sequence[int], alpha: float = 0.0, p: float = 1.0) -> float:
    """在已构造的线图上用线图测度计算精确 ORC"""
    line = lg.line_graph
    i, j = lg.vertex(e1), lg.vertex(e2)
    line.check_edge((i, j))
    problem = TransportProblem.from_measures(
        line, line_node_measure(lg, i, alpha, p), line_node_measure(lg, j, alpha, p)
    )
    return 1.0 - w1_exact(problem) / float(line.distance_matrix[i, j])


class OllivierCalculator(CurvatureCalculator):
    """ORC-E / ORC-S / ORC-A / ORC-A1 的逐边计算"""

    def __init__(
        self,
        variant: CurvatureVariant = CurvatureVariant.ORC_A,
        measure: Optional[MeasureMode] = None,
        sinkhorn: Optional[SinkhornParams] = None,
        proc: int = 1,
    ):
        if not variant.is_ollivier:
            raise GraphInputError(f"{variant.value} 不是 ORC 变体")
        super().__init__(variant, proc)
        self.measure = measure or DEFAULT_MEASURE
        self.sinkhorn = sinkhorn or SinkhornParams()

    def describe(self):
        info = super().describe()
        info["measure"] = self.measure.label()
        if self.variant == CurvatureVariant.ORC_S:
            info["sinkhorn"] = self.sinkhorn.model_dump()
        return info

    def edge_result(self, g: Graph, e: Sequence[int]) -> EdgeCurvature:
        if self.variant == CurvatureVariant.ORC_E:
            return EdgeCurvature(value=orc_edge_exact(g, e, self.measure))
        if self.variant == CurvatureVariant.ORC_S:
            return EdgeCurvature(value=orc_edge_sinkhorn(g, e, self.measure, self.sinkhorn))
        bounds = orc_bounds(g, e, self.measure)
        if self.variant == CurvatureVariant.ORC_A1:
            value = (1.0 + bounds.lower) / 2.0
        else:
            value = bounds.midpoint
        return EdgeCurvature(value=value, lower=bounds.lower, upper=bounds.upper)

    def compute(self, g: Graph):
        if self.variant in (CurvatureVariant.ORC_E, CurvatureVariant.ORC_S):
            # 子进程 fork 前先算好距离矩阵
            g.distance_matrix
        return super().compute(g)
