"""
Forman Ricci 曲率

FRC-1 只用顶点与边权; FRC-2 加入三角形面; FRC-3 再加入四边形面。
线图上的若干值可以直接由原图结构得到, 对应的恒等式也在这里实现。
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, PrivateAttr

from core.config import CurvatureVariant
from core.curvature import CurvatureCalculator, EdgeCurvature
from core.errors import FaceWeightError, GraphInputError
from core.graph_core import (
    Edge,
    Graph,
    LineGraphMap,
    edge_key,
    enumerate_quadrangles,
    line_graph_weighted,
    shared_vertex,
    triangles_through,
    unweighted_degree,
)

logger = logging.getLogger("forman")

# 单位边权下的面权重
UNIT_TRIANGLE = math.sqrt(3.0) / 4.0
UNIT_SQUARE = 1.0

Face = Tuple[int, ...]


def heron_weight(a: float, b: float, c: float) -> float:
    """
    三边长为 a, b, c 的三角形面积

    Returns:
        面积; 三角不等式取等号时为 0
    """
    if min(a, b, c) <= 0.0:
        raise FaceWeightError(f"三角形边长必须为正数: ({a}, {b}, {c})")
    longest, x, y = sorted((a, b, c), reverse=True)
    if longest > x + y and not math.isclose(longest, x + y, rel_tol=1e-12, abs_tol=0.0):
        raise FaceWeightError(f"边长 ({a:.6g}, {b:.6g}, {c:.6g}) 不满足三角不等式")
    s = (a + b + c) / 2.0
    return math.sqrt(max(s * (s - a) * (s - b) * (s - c), 0.0))


def _nondegenerate_heron(a: float, b: float, c: float) -> float:
    area = heron_weight(a, b, c)
    if area <= 0.0:
        raise FaceWeightError(f"边长 ({a:.6g}, {b:.6g}, {c:.6g}) 构成退化三角形")
    return area


def quad_weight(weights: Sequence[float]) -> float:
    """
    四边形面权重: 按降序 wi >= wj >= wk >= wl 视为梯形

    - wi > wj: 以 (wi-wj, wk, wl) 三角形面积按比例放大
    - wi = wj, wk > wl: 以 (wk-wl, wi, wj) 三角形面积按比例放大
    - 两组都相等: 矩形 wi * wk
    """
    if len(weights) != 4:
        raise FaceWeightError("四边形需要 4 条边的权重")
    wi, wj, wk, wl = sorted((float(w) for w in weights), reverse=True)
    if wl <= 0.0:
        raise FaceWeightError("四边形边长必须为正数")
    if not math.isclose(wi, wj, rel_tol=1e-12):
        gap = wi - wj
        return _nondegenerate_heron(gap, wk, wl) * (1.0 + 2.0 * wj / gap)
    if not math.isclose(wk, wl, rel_tol=1e-12):
        gap = wk - wl
        return _nondegenerate_heron(gap, wi, wj) * (1.0 + 2.0 * wl / gap)
    return wi * wk


class FaceWeightScheme(BaseModel):
    """面权重规则: 三角形用海伦公式, 四边形用梯形规则"""
    strict: bool = True
    _skipped: int = PrivateAttr(default=0)

    @property
    def skipped(self) -> int:
        return self._skipped

    def reset(self) -> None:
        self._skipped = 0

    def face_weight(self, edge_weights: Sequence[float]) -> Optional[float]:
        """
        计算面权重

        Returns:
            正的面权重; 非严格模式下退化面返回 None
        """
        try:
            if len(edge_weights) == 3:
                return _nondegenerate_heron(*edge_weights)
            if len(edge_weights) == 4:
                return quad_weight(edge_weights)
            raise FaceWeightError(f"不支持 {len(edge_weights)} 条边的面")
        except FaceWeightError as e:
            if self.strict:
                raise
            self._skipped += 1
            logger.debug(f"跳过退化面: {e.message}")
            return None


def _face_edges(face: Face) -> List[Edge]:
    return [edge_key(face[i], face[(i + 1) % len(face)]) for i in range(len(face))]


def frc_2complex_edge(
    g: Graph,
    e: Sequence[int],
    faces: Sequence[Face],
    fw: Optional[FaceWeightScheme] = None,
) -> float:
    """
    给定面集合的 2-复形 FRC

    Args:
        g: 图
        e: 边 (a, b)
        faces: 经过 e 的面, 每个面是顶点环, e 为其中相邻的两个顶点
        fw: 面权重规则

    Returns:
        曲率值。与 e 恰好共享一个顶点或恰好共享一个面 (二者不同时成立) 的边视为平行边。
    """
    fw = fw or FaceWeightScheme()
    a, b = g.check_edge(e)
    w_e = g.weight(a, b)
    total = (g.vertex_weight(a) + g.vertex_weight(b)) / w_e

    coface: Dict[Edge, List[float]] = {}
    for face in faces:
        edges = _face_edges(face)
        if (a, b) not in edges:
            raise GraphInputError(f"面 {face} 不包含边 {(a, b)}")
        weight = fw.face_weight([g.weight(*f) for f in edges])
        if weight is None:
            continue
        total += w_e / weight
        for f in edges:
            if f != (a, b):
                coface.setdefault(f, []).append(weight)

    covertex: Dict[Edge, int] = {}
    for end, other in ((a, b), (b, a)):
        for z in g.neighbors(end):
            if z != other:
                covertex[edge_key(end, z)] = end

    for other_edge in set(coface) | set(covertex):
        if (other_edge in coface) == (other_edge in covertex):
            continue
        w_other = g.weight(*other_edge)
        root = math.sqrt(w_e * w_other)
        term = sum(root / weight for weight in coface.get(other_edge, ()))
        if other_edge in covertex:
            term -= g.vertex_weight(covertex[other_edge]) / root
        total -= abs(term)
    return w_e * total


class CycleFaces:
    """直接在图上枚举经过边的三角形 (以及四边形)"""

    def __init__(self, order: int):
        self.order = order

    def faces(self, g: Graph, e: Sequence[int]) -> List[Face]:
        if self.order < 2:
            return []
        found: List[Face] = list(triangles_through(g, e))
        if self.order >= 3:
            found.extend(enumerate_quadrangles(g, e))
        return found

    def restricted(self, mapping: Sequence[int]) -> "CycleFaces":
        return self


class FaceIndex:
    """预先计算好的面集合, 以规范化的边为键"""

    def __init__(self, index: Dict[Edge, List[Face]]):
        self.index = index

    def faces(self, g: Graph, e: Sequence[int]) -> List[Face]:
        return self.index.get(edge_key(int(e[0]), int(e[1])), [])

    def restricted(self, mapping: Sequence[int]) -> "FaceIndex":
        """
        转换到诱导子图的编号

        Args:
            mapping: 子图编号到原编号的列表
        """
        local = {v: i for i, v in enumerate(mapping)}
        index = {}
        for (u, v), faces in self.index.items():
            if u in local and v in local:
                kept = [tuple(local[z] for z in face) for face in faces if all(z in local for z in face)]
                index[edge_key(local[u], local[v])] = kept
        return FaceIndex(index)


def frc1_edge(g: Graph, e: Sequence[int]) -> float:
    """FRC-1, 单位权重时为 4 - d_v1 - d_v2"""
    return frc_2complex_edge(g, e, [], FaceWeightScheme())


def frc2_edge(g: Graph, e: Sequence[int], fw: Optional[FaceWeightScheme] = None) -> float:
    """FRC-2: 面集合为经过 e 的三角形"""
    return frc_2complex_edge(g, e, CycleFaces(2).faces(g, e), fw)


def frc3_edge(g: Graph, e: Sequence[int], fw: Optional[FaceWeightScheme] = None, faces=None) -> float:
    """
    FRC-3: 面集合为三角形与四边形

    Args:
        faces: 面集合提供者 (CycleFaces / FaceIndex), 为空时直接在图上枚举
    """
    provider = faces or CycleFaces(3)
    return frc_2complex_edge(g, e, provider.faces(g, e), fw)


def frc_edge(g: Graph, e: Sequence[int], order: int, fw: Optional[FaceWeightScheme] = None, faces=None) -> float:
    if order not in (1, 2, 3):
        raise GraphInputError(f"FRC 阶数必须为 1, 2 或 3: {order}")
    if order == 1:
        return frc1_edge(g, e)
    provider = faces or CycleFaces(order)
    return frc_2complex_edge(g, e, provider.faces(g, e), fw)


def frc_vertex(g: Graph, v: int, order: int = 1, fw: Optional[FaceWeightScheme] = None, faces=None) -> float:
    """顶点 FRC: 关联边 FRC 之和, 孤立顶点为 0"""
    g.check_vertex(v)
    return float(sum(frc_edge(g, (v, z), order, fw, faces) for z in g.neighbors(v)))


# 线图

def _require_unit(g: Graph) -> None:
    if not g.is_unit_weighted or any(w != 1.0 for w in g.vertex_weights):
        raise GraphInputError("该恒等式要求单位顶点权重与单位边权")


def line_neighbors(g: Graph, e: Sequence[int]) -> List[Edge]:
    """与边 e 共享一个端点的其它边, 即 e 在线图中的邻居"""
    a, b = g.check_edge(e)
    found = {edge_key(a, z) for z in g.neighbors(a) if z != b}
    found |= {edge_key(b, z) for z in g.neighbors(b) if z != a}
    return sorted(found)


def line_face_sets(g: Graph, e1: Sequence[int], e2: Sequence[int]) -> Tuple[List[Tuple[Edge, ...]], List[Tuple[Edge, ...]]]:
    """
    线图边 {e1, e2} 上的面, 以原图的边表示

    三角形来自 v 处的其它边与可能存在的 {u, w}。四边形是线图中经过该边的
    全部顶点互异 4-圈: 除原图 4-圈 (u, v, w, x) 外, 还包括星形 (四条边共享 v)
    以及三角形加悬挂边产生的 4-圈。所涉及的边都与 u, v, w 之一关联。

    Returns:
        (三角形列表, 四边形列表), 四边形按圈的顺序 (e1, e2, e3, e4) 给出
    """
    u, v, w = shared_vertex(g, e1, e2)
    first, second = edge_key(u, v), edge_key(v, w)
    triangles = [
        (first, second, edge_key(v, z))
        for z in sorted(g.neighbors(v)) if z != u and z != w
    ]
    if g.has_edge(u, w):
        triangles.append((first, second, edge_key(u, w)))
    around_first = set(line_neighbors(g, first))
    quadrangles = []
    for third in line_neighbors(g, second):
        if third == first:
            continue
        for fourth in line_neighbors(g, third):
            if fourth in around_first and fourth != second:
                quadrangles.append((first, second, third, fourth))
    return triangles, quadrangles


def line_face_index(g: Graph, lg: LineGraphMap) -> FaceIndex:
    """为已构造的线图建立 FRC-3 面索引"""
    index: Dict[Edge, List[Face]] = {}
    for i, j in lg.line_graph.edges:
        triangles, quadrangles = line_face_sets(g, lg.edge_of_vertex[i], lg.edge_of_vertex[j])
        index[(i, j)] = [tuple(lg.vertex(f) for f in face) for face in triangles + quadrangles]
    logger.debug(f"线图面索引: {len(index)} 条线图边")
    return FaceIndex(index)


def line_frc3_edge(g: Graph, e1: Sequence[int], e2: Sequence[int], fw: Optional[FaceWeightScheme] = None) -> float:
    """
    线图边 {e1, e2} 的 FRC-3, 只构造 u, v, w 关联边组成的局部线图

    线图顶点权重取原图边权, 线图边权取 sqrt(w_e1 w_e2)。经过该边的面与
    其余共点边都落在这个局部线图里, 结果与完整线图上的 frc3_edge 一致。
    """
    u, v, w = shared_vertex(g, e1, e2)
    patch = sorted({g.edge_index(z, y) for z in (u, v, w) for y in g.neighbors(z)})
    local = Graph(
        g.n,
        [(*g.edges[i], g.weights[i]) for i in patch],
        vertex_weight=g.vertex_weights,
    )
    lg = line_graph_weighted(local)
    triangles, quadrangles = line_face_sets(g, e1, e2)
    faces = [tuple(lg.vertex(f) for f in face) for face in triangles + quadrangles]
    return frc_2complex_edge(lg.line_graph, (lg.vertex((u, v)), lg.vertex((v, w))), faces, fw)


def line_frc1_from_base(g: Graph, e1: Sequence[int], e2: Sequence[int]) -> float:
    """线图边的 FRC-1 等于两条原图边 FRC-1 之和"""
    _require_unit(g)
    shared_vertex(g, e1, e2)
    return frc1_edge(g, e1) + frc1_edge(g, e2)


def line_frc1_vertex_from_base(g: Graph, e: Sequence[int]) -> float:
    """线图顶点的 FRC-1: Ric(u) + Ric(v) - Ric(e)^2"""
    _require_unit(g)
    u, v = g.check_edge(e)
    return frc_vertex(g, u, 1) + frc_vertex(g, v, 1) - frc1_edge(g, (u, v)) ** 2


def line_frc1_weighted_from_base(g: Graph, e1: Sequence[int], e2: Sequence[int]) -> float:
    """
    线图边权取 w_e1 * w_e2 时线图边的 FRC-1, 由原图边权与原图 FRC-1 给出
    """
    if any(w != 1.0 for w in g.vertex_weights):
        raise GraphInputError("该恒等式要求单位顶点权重")
    shared_vertex(g, e1, e2)
    w1, w2 = g.weight(*e1), g.weight(*e2)
    ric1, ric2 = frc1_edge(g, e1), frc1_edge(g, e2)
    return w1 * (2.0 - math.sqrt(w2 / w1) * (2.0 - ric1)) + w2 * (2.0 - math.sqrt(w1 / w2) * (2.0 - ric2))


def line_frc2_triangles_closed_form(
    g: Graph, e1: Sequence[int], e2: Sequence[int], tri_weight: float = UNIT_TRIANGLE
) -> float:
    """单位权重线图上只含三角形面的 FRC 闭式"""
    u, v, w = shared_vertex(g, e1, e2)
    if tri_weight <= 0.0:
        raise GraphInputError("三角形面权重必须为正数")
    du, dv, dw = (unweighted_degree(g, z) for z in (u, v, w))
    indicator = 1.0 if g.has_edge(u, w) else 0.0
    return dv / tri_weight - du - dw + 4.0 - 2.0 / tri_weight + (1.0 / tri_weight + 2.0) * indicator


class FormanCalculator(CurvatureCalculator):
    """FRC-1 / FRC-2 / FRC-3 的逐边计算"""

    def __init__(
        self,
        variant: CurvatureVariant = CurvatureVariant.FRC_2,
        scheme: Optional[FaceWeightScheme] = None,
        faces=None,
        proc: int = 1,
    ):
        if variant.is_ollivier:
            raise GraphInputError(f"{variant.value} 不是 FRC 变体")
        super().__init__(variant, proc)
        self.order = variant.frc_order
        self.scheme = scheme or FaceWeightScheme()
        self.faces = faces or CycleFaces(self.order)

    def describe(self):
        info = super().describe()
        info["strict_faces"] = self.scheme.strict
        info["faces"] = type(self.faces).__name__
        return info

    def edge_result(self, g: Graph, e: Sequence[int]) -> EdgeCurvature:
        faces = self.faces.faces(g, e) if self.order > 1 else []
        return EdgeCurvature(value=frc_2complex_edge(g, e, faces, self.scheme))

    def compute(self, g: Graph):
        self.scheme.reset()
        results = super().compute(g)
        if self.scheme.skipped:
            self.logger.warning(f"跳过了 {self.scheme.skipped} 个退化面")
        return results
