"""
邻域测度之间的 Wasserstein-1 距离

精确解使用 POT 的网络单纯形 (ot.emd), 近似解使用对数域 Sinkhorn,
并把近似传输方案投影回可行域后再计算代价。
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import ot

from core.errors import DisconnectedSupportError, GraphInputError, SinkhornConvergenceError
from core.graph_core import Graph, NeighborhoodMeasure

logger = logging.getLogger("transport")

MASS_TOLERANCE = 1e-12


@dataclass
class TransportProblem:
    """供给/需求两组带质量的顶点以及两者之间的代价矩阵"""
    supply: List[Tuple[int, float]]
    demand: List[Tuple[int, float]]
    cost: np.ndarray

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float)
        if cost.shape != (len(self.supply), len(self.demand)):
            raise GraphInputError("代价矩阵形状与供需点数不一致")
        rows = [i for i, (_, m) in enumerate(self.supply) if m > 0.0]
        cols = [j for j, (_, m) in enumerate(self.demand) if m > 0.0]
        self.supply = [self.supply[i] for i in rows]
        self.demand = [self.demand[j] for j in cols]
        self.cost = cost[np.ix_(rows, cols)]
        for name, side in (("supply", self.supply), ("demand", self.demand)):
            if any(m < 0.0 for _, m in side):
                raise GraphInputError(f"{name} 含有负质量")
            total = sum(m for _, m in side)
            if abs(total - 1.0) > MASS_TOLERANCE:
                raise GraphInputError(f"{name} 总质量必须为 1, 实际为 {total:.15f}")
        if not np.all(np.isfinite(self.cost)):
            raise DisconnectedSupportError("传输问题的支撑集之间不连通")
        if np.any(self.cost < 0.0):
            raise GraphInputError("代价矩阵含有负数")

    @property
    def a(self) -> np.ndarray:
        return np.array([m for _, m in self.supply], dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.array([m for _, m in self.demand], dtype=float)

    @classmethod
    def from_measures(cls, g: Graph, mx: NeighborhoodMeasure, my: NeighborhoodMeasure) -> "TransportProblem":
        """
        以图上最短路距离为代价构造传输问题

        Args:
            g: 图
            mx: 供给测度
            my: 需求测度
        """
        supply = [(v, m) for v, m in mx.mass.items() if m > 0.0]
        demand = [(v, m) for v, m in my.mass.items() if m > 0.0]
        distances = g.distance_matrix
        cost = distances[np.ix_([v for v, _ in supply], [v for v, _ in demand])]
        return cls(supply, demand, cost)


def w1_exact_with_duals(p: TransportProblem) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """
    精确最优传输

    Returns:
        (最优代价, 传输方案, 供给侧对偶势, 需求侧对偶势)
    """
    a, b = p.a, p.b
    # 浮点归一化误差交给 emd 之前先消掉
    a = a / a.sum()
    b = b / b.sum()
    plan, log = ot.emd(a, b, p.cost, log=True)
    if log.get("warning"):
        logger.warning(f"网络单纯形告警: {log['warning']}")
    return float(log["cost"]), plan, np.asarray(log["u"]), np.asarray(log["v"])


def w1_exact(p: TransportProblem) -> float:
    """精确 W1 距离"""
    cost, _, _, _ = w1_exact_with_duals(p)
    return cost


def round_to_feasible(plan: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    把近似传输方案投影到边际为 (a, b) 的传输多面体

    先按行、再按列缩放使边际不超过目标, 剩余质量用秩一修正补齐。
    """
    rounded = np.array(plan, dtype=float, copy=True)
    tiny = np.finfo(float).tiny
    row_scale = np.minimum(a / np.maximum(rounded.sum(axis=1), tiny), 1.0)
    rounded *= row_scale[:, None]
    col_scale = np.minimum(b / np.maximum(rounded.sum(axis=0), tiny), 1.0)
    rounded *= col_scale[None, :]
    err_a = a - rounded.sum(axis=1)
    err_b = b - rounded.sum(axis=0)
    total = err_a.sum()
    if total > 0.0:
        rounded += np.outer(err_a, err_b) / total
    return rounded


def default_regularization(cost: np.ndarray) -> float:
    """0.1 倍代价中位数, 中位数为 0 时退回 0.1 倍最大代价"""
    positive = cost[cost > 0.0]
    if positive.size == 0:
        return 1e-3
    median = float(np.median(cost))
    if median > 0.0:
        return 0.1 * median
    return 0.1 * float(positive.max())


def w1_sinkhorn(
    p: TransportProblem,
    reg: Optional[float] = None,
    max_iter: int = 10000,
    tol: float = 1e-6,
) -> float:
    """
    熵正则化近似 W1

    Args:
        p: 传输问题
        reg: 正则化系数, 为空时使用 default_regularization
        max_iter: 最大迭代次数
        tol: 边际误差阈值

    Returns:
        取整到可行域后传输方案的真实代价, 因此总不小于精确值
    """
    if reg is not None and reg <= 0.0:
        raise GraphInputError(f"reg 必须为正数: {reg}")
    a, b, cost = p.a, p.b, p.cost
    if not np.any(cost > 0.0):
        return 0.0
    if reg is None:
        reg = default_regularization(cost)
    plan, log = ot.sinkhorn(
        a, b, cost, reg,
        method="sinkhorn_log",
        numItermax=max_iter,
        stopThr=tol,
        log=True,
        warn=False,
    )
    errors = log.get("err", [])
    if errors and errors[-1] >= tol:
        raise SinkhornConvergenceError(int(log.get("niter", max_iter)), float(errors[-1]))
    logger.debug(f"Sinkhorn收敛: reg={reg:.4g}, 迭代{log.get('niter')}次")
    rounded = round_to_feasible(plan, a, b)
    return float((rounded * cost).sum())
