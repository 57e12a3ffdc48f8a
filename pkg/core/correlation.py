"""
曲率相关性分析

把两组一一对应的量放在一起比较, 给出 Pearson / Spearman 相关系数,
以及标准化后两组分布的 KS 统计量:

- clustering: 顶点聚类系数 vs 顶点曲率
- line-vertex: 原图边曲率 vs 线图对应顶点的曲率
- line-edge: 线图边 {e1, e2} 两端原图边曲率之和 vs 线图边曲率
- variants: 同一底图上两种曲率变体的逐边值
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
from scipy import stats

from core.config import CurvatureVariant, MeasureMode
from core.curvature import build_calculator
from core.errors import GraphInputError
from core.graph_core import Graph, clustering_coefficient, line_graph_weighted, unweighted_degree

logger = logging.getLogger("correlation")

STUDIES = ("clustering", "line-vertex", "line-edge", "variants")


@dataclass
class CorrelationResult:
    """配对样本及其相关系数; 样本不足或某一列为常数时系数为 nan"""
    study: str
    x_label: str
    y_label: str
    frame: pd.DataFrame
    pearson: float
    pearson_p: float
    spearman: float
    spearman_p: float
    ks: float

    @property
    def size(self) -> int:
        return len(self.frame)

    def summary(self) -> Dict[str, Any]:
        values = {
            "pearson": self.pearson,
            "pearson_p": self.pearson_p,
            "spearman": self.spearman,
            "spearman_p": self.spearman_p,
            "ks": self.ks,
        }
        summary: Dict[str, Any] = {
            "study": self.study,
            "x": self.x_label,
            "y": self.y_label,
            "size": self.size,
        }
        summary.update({k: (None if np.isnan(v) else float(v)) for k, v in values.items()})
        return summary


def _standardize(values: np.ndarray) -> np.ndarray:
    sd = values.std()
    return (values - values.mean()) / sd if sd > 0 else values - values.mean()


def correlate(
    study: str, items: list, x: np.ndarray, y: np.ndarray, x_label: str, y_label: str
) -> CorrelationResult:
    """
    计算配对样本的相关系数

    Args:
        study: 分析名称
        items: 样本标识 (顶点或边的标签)
        x, y: 配对的数值

    Returns:
        相关性结果
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise GraphInputError(f"配对样本长度不一致: {x.size} vs {y.size}")
    frame = pd.DataFrame({"item": items, "x": x, "y": y})
    nan = float("nan")
    pearson = pearson_p = spearman = spearman_p = ks = nan
    if x.size >= 3 and np.ptp(x) > 0 and np.ptp(y) > 0:
        pearson, pearson_p = (float(v) for v in stats.pearsonr(x, y))
        spearman, spearman_p = (float(v) for v in stats.spearmanr(x, y))
    else:
        logger.warning(f"{study}: 样本数 {x.size} 或取值为常数, 不计算相关系数")
    if x.size >= 1:
        ks = float(stats.ks_2samp(_standardize(x), _standardize(y)).statistic)
    return CorrelationResult(study, x_label, y_label, frame, pearson, pearson_p, spearman, spearman_p, ks)


def _edge_values(g: Graph, variant: CurvatureVariant, measure: Optional[MeasureMode], proc: int) -> np.ndarray:
    # 线图与随机权重上会出现退化面, 相关性分析中跳过
    return build_calculator(variant, measure=measure, strict_faces=False, proc=proc).values(g)


def _vertex_totals(g: Graph, edge_values: np.ndarray) -> np.ndarray:
    totals = np.zeros(g.n)
    for (u, v), value in zip(g.edges, edge_values):
        totals[u] += value
        totals[v] += value
    return totals


def _edge_labels(g: Graph, sep: str = "-") -> list:
    labels = g.labels
    return [f"{labels[u]}{sep}{labels[v]}" for u, v in g.edges]


def clustering_vs_curvature(
    g: Graph, variant: CurvatureVariant, measure: Optional[MeasureMode] = None, proc: int = 1
) -> CorrelationResult:
    """
    顶点聚类系数与顶点曲率 (关联边曲率之和) 的相关性, 孤立顶点不参与
    """
    kept = [v for v in g.vertices() if unweighted_degree(g, v) > 0]
    vertex_values = _vertex_totals(g, _edge_values(g, variant, measure, proc))
    labels = g.labels
    return correlate(
        "clustering",
        [labels[v] for v in kept],
        np.array([clustering_coefficient(g, v) for v in kept]),
        vertex_values[kept],
        "clustering",
        variant.value,
    )


def line_vertex_vs_edge(
    g: Graph, variant: CurvatureVariant, measure: Optional[MeasureMode] = None, proc: int = 1
) -> CorrelationResult:
    """原图边曲率与线图中对应顶点曲率的相关性, 线图边权取 sqrt(w_e1 w_e2)"""
    lmap = line_graph_weighted(g)
    base = _edge_values(g, variant, measure, proc)
    line = _vertex_totals(lmap.line_graph, _edge_values(lmap.line_graph, variant, measure, proc))
    order = [lmap.vertex(e) for e in g.edges]
    return correlate(
        "line-vertex", _edge_labels(g), base, line[order], f"{variant.value}(G)", f"{variant.value}(L vertex)"
    )


def line_edge_vs_edge(
    g: Graph, variant: CurvatureVariant, measure: Optional[MeasureMode] = None, proc: int = 1
) -> CorrelationResult:
    """
    线图边曲率与其两端原图边曲率之和的相关性

    单位权重下 FRC-1 的两者恒等, 其它变体给出经验上的对应程度。
    """
    lmap = line_graph_weighted(g)
    base = _edge_values(g, variant, measure, proc)
    line = _edge_values(lmap.line_graph, variant, measure, proc)
    index = {e: i for i, e in enumerate(g.edges)}
    paired = np.array([
        base[index[lmap.edge_of_vertex[i]]] + base[index[lmap.edge_of_vertex[j]]]
        for i, j in lmap.line_graph.edges
    ])
    return correlate(
        "line-edge", _edge_labels(lmap.line_graph, "|"), paired, line, f"{variant.value}(G pair)", f"{variant.value}(L edge)"
    )


def variants_vs(
    g: Graph,
    x_variant: CurvatureVariant,
    y_variant: CurvatureVariant,
    measure: Optional[MeasureMode] = None,
    substrate: str = "graph",
    proc: int = 1,
) -> CorrelationResult:
    """
    两种曲率变体逐边值的相关性

    Args:
        substrate: graph 在原图上比较, line 在加权线图上比较
    """
    if substrate not in ("graph", "line"):
        raise GraphInputError(f"未知的底图: {substrate}")
    target = line_graph_weighted(g).line_graph if substrate == "line" else g
    return correlate(
        "variants",
        _edge_labels(target),
        _edge_values(target, x_variant, measure, proc),
        _edge_values(target, y_variant, measure, proc),
        x_variant.value,
        y_variant.value,
    )


def run_study(
    g: Graph,
    study: str,
    variant: CurvatureVariant,
    other: Optional[CurvatureVariant] = None,
    measure: Optional[MeasureMode] = None,
    substrate: str = "graph",
    proc: int = 1,
) -> CorrelationResult:
    """按名称执行一种相关性分析"""
    if g.m == 0:
        raise GraphInputError("图中没有边, 无法做相关性分析")
    if study == "clustering":
        result = clustering_vs_curvature(g, variant, measure, proc)
    elif study == "line-vertex":
        result = line_vertex_vs_edge(g, variant, measure, proc)
    elif study == "line-edge":
        result = line_edge_vs_edge(g, variant, measure, proc)
    elif study == "variants":
        if other is None:
            raise GraphInputError("variants 分析需要第二个曲率变体")
        result = variants_vs(g, variant, other, measure, substrate, proc)
    else:
        raise GraphInputError(f"未知的相关性分析: {study}, 可选 {', '.join(STUDIES)}")
    logger.info(f"{study} 分析完成: {result.size} 对样本, Spearman {result.spearman:.3f}")
    return result
