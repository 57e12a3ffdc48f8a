"""
带真实标签的随机图与理论图族生成器
"""
import hashlib
import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist

from core.config import PlantedParams
from core.errors import GraphInputError
from core.evaluation import BinaryMembership, affiliation_frame
from core.graph_core import Edge, Graph, edge_key
from core.ricci_flow import Labeling, modularity

logger = logging.getLogger("generators")

# G_{a,b} 的边类型
BRIDGE = 1
HUB_INTERNAL = 2
INTERNAL = 3


@dataclass
class GroundTruth:
    """真实隶属矩阵 (每行和为 1), 可选的边类型标记"""
    membership: np.ndarray
    edge_types: Optional[Dict[Edge, int]] = None

    @property
    def k(self) -> int:
        return self.membership.shape[1]

    def hard_labels(self) -> np.ndarray:
        """混合顶点取隶属度最大的社区"""
        return np.argmax(self.membership, axis=1)

    def labeling(self) -> Labeling:
        return Labeling(self.hard_labels())

    def memberships(self) -> List[frozenset]:
        return [frozenset(np.flatnonzero(row > 0.0).tolist()) for row in self.membership]

    def binary(self) -> BinaryMembership:
        return BinaryMembership.from_sets(self.memberships(), self.k)

    def is_single(self) -> bool:
        return bool(np.all(np.isclose(self.membership.max(axis=1), 1.0)))

    def to_frame(self, vertex_labels: List[str]) -> pd.DataFrame:
        """单隶属输出 vertex,block; 混合隶属输出 vertex,y_0..,members"""
        if self.is_single():
            return pd.DataFrame({"vertex": vertex_labels, "block": self.hard_labels()})
        return affiliation_frame(self.membership, self.memberships(), vertex_labels)


def _block_sizes(n: int, k: int) -> List[int]:
    base, extra = divmod(n, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def _block_membership(sizes: List[int]) -> np.ndarray:
    membership = np.zeros((sum(sizes), len(sizes)))
    start = 0
    for block, size in enumerate(sizes):
        membership[start:start + size, block] = 1.0
        start += size
    return membership


def gen_sbm(params: PlantedParams) -> Tuple[Graph, GroundTruth]:
    """
    种植划分随机块模型, 块内概率 p_in, 块间概率 p_out

    Returns:
        (单位边权图, 独热真实标签)
    """
    sizes = _block_sizes(params.n, params.k)
    probs = [[params.p_in if i == j else params.p_out for j in range(params.k)] for i in range(params.k)]
    graph = nx.stochastic_block_model(sizes, probs, seed=params.seed)
    g = Graph(params.n, graph.edges())
    logger.info(f"生成SBM: n={params.n}, k={params.k}, p_in={params.p_in}, p_out={params.p_out}, |E|={g.m}")
    return g, GroundTruth(membership=_block_membership(sizes))


def gen_mmb(params: PlantedParams) -> Tuple[Graph, GroundTruth]:
    """
    混合隶属块模型: E[A] = X B X^T, 上三角独立伯努利采样

    n_o 个混合顶点对每个块的隶属度均为 1/k。
    """
    rng = np.random.default_rng(params.seed)
    sizes = _block_sizes(params.n, params.k)
    membership = _block_membership(sizes)
    if params.n_o:
        mixed = rng.choice(params.n, size=params.n_o, replace=False)
        membership[mixed] = 1.0 / params.k
    block = np.full((params.k, params.k), params.p_out)
    np.fill_diagonal(block, params.p_in)
    probability = membership @ block @ membership.T
    rows, cols = np.triu_indices(params.n, k=1)
    hits = rng.random(rows.size) < probability[rows, cols]
    g = Graph(params.n, zip(rows[hits].tolist(), cols[hits].tolist()))
    logger.info(f"生成MMB: n={params.n}, k={params.k}, n_o={params.n_o}, |E|={g.m}")
    return g, GroundTruth(membership=membership)


def rgg_from_positions(positions: np.ndarray, r: float, weighted: bool = False) -> Graph:
    """
    距离小于 r 的顶点对连边

    Args:
        positions: n x dim 坐标
        r: 连边半径
        weighted: 为真时边权取欧氏距离
    """
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]
    if n < 2:
        return Graph(n)
    distances = pdist(positions)
    rows, cols = np.triu_indices(n, k=1)
    close = distances < r
    if weighted:
        edges = zip(rows[close].tolist(), cols[close].tolist(), distances[close].tolist())
    else:
        edges = zip(rows[close].tolist(), cols[close].tolist())
    return Graph(n, edges)


def gen_rgg(n: int, dim: int, r: float, seed: int = 0, weighted: bool = False) -> Graph:
    """单位立方体内均匀撒点的随机几何图"""
    if dim < 1:
        raise GraphInputError(f"维数必须至少为 1: {dim}")
    if not 0.0 < r < 1.0:
        raise GraphInputError(f"半径必须位于 (0, 1): {r}")
    rng = np.random.default_rng(seed)
    g = rgg_from_positions(rng.random((n, dim)), r, weighted)
    logger.info(f"生成RGG: n={n}, dim={dim}, r={r}, |E|={g.m}")
    return g


def _check_ab(a: int, b: int) -> None:
    if not a >= b >= 2:
        raise GraphInputError(f"要求 a >= b >= 2, 实际 a={a}, b={b}")


def gen_g_ab(a: int, b: int) -> Tuple[Graph, GroundTruth]:
    """
    b 个 K_{a+1} 通过中心 K_b 相连

    顶点 0..b-1 为中心团顶点, 第 i 个块的内部顶点为 b + i*a + j。
    边类型: 1 中心团内的桥, 2 中心顶点与块内顶点, 3 块内部。
    """
    _check_ab(a, b)
    n = b + a * b
    edges: List[Edge] = []
    types: Dict[Edge, int] = {}
    for i in range(b):
        for j in range(i + 1, b):
            types[(i, j)] = BRIDGE
    membership = np.zeros((n, b))
    for i in range(b):
        internal = [b + i * a + j for j in range(a)]
        membership[[i] + internal, i] = 1.0
        for x in internal:
            types[edge_key(i, x)] = HUB_INTERNAL
        for p, x in enumerate(internal):
            for y in internal[p + 1:]:
                types[edge_key(x, y)] = INTERNAL
    edges = sorted(types)
    return Graph(n, edges), GroundTruth(membership=membership, edge_types=types)


def gen_l_ab(a: int, b: int) -> Tuple[Graph, GroundTruth]:
    """
    中心顶点 0 连接 b 个星形中心 1..b, 每个星形中心再连 a 个叶子

    中心顶点对每个块的隶属度为 1/b, 其余顶点为独热。
    """
    _check_ab(a, b)
    n = 1 + b * (a + 1)
    edges: List[Edge] = []
    membership = np.zeros((n, b))
    membership[0] = 1.0 / b
    for i in range(b):
        hub = 1 + i
        edges.append((0, hub))
        membership[hub, i] = 1.0
        for j in range(a):
            leaf = 1 + b + i * a + j
            edges.append((hub, leaf))
            membership[leaf, i] = 1.0
    return Graph(n, edges), GroundTruth(membership=membership)


def is_admissible(g: Graph, truth: GroundTruth, threshold: float = 0.4) -> bool:
    """真实划分 (混合顶点取最大隶属) 的模块度是否超过阈值"""
    return modularity(g, truth.labeling()) > threshold


def derive_seed(base_seed: int, params: Dict[str, Any], index: int) -> int:
    """由基础种子、参数与序号派生确定性的子种子"""
    payload = json.dumps([base_seed, params, index], sort_keys=True, default=str)
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")
