"""
聚类质量评估: 经典 NMI、重叠社区的扩展 NMI, 以及标签文件读写
"""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import normalized_mutual_info_score

from core.errors import GraphInputError

logger = logging.getLogger("evaluation")


@dataclass
class BinaryMembership:
    """n x k 的 0/1 隶属矩阵, 列为社区"""
    z: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=bool)
        if self.z.ndim != 2:
            raise GraphInputError("隶属矩阵必须是二维的")
        if not self.z.any():
            raise GraphInputError("隶属矩阵至少要有一个非空社区")

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def k(self) -> int:
        return self.z.shape[1]

    @classmethod
    def from_sets(cls, memberships: Sequence[Iterable[int]], k: Optional[int] = None) -> "BinaryMembership":
        """由每个顶点所属社区集合构造"""
        memberships = [set(m) for m in memberships]
        if k is None:
            k = max((max(m) for m in memberships if m), default=-1) + 1
        z = np.zeros((len(memberships), k), dtype=bool)
        for v, members in enumerate(memberships):
            for label in members:
                z[v, label] = True
        return cls(z)

    def communities(self) -> List[FrozenSet[int]]:
        return [frozenset(np.flatnonzero(self.z[:, l]).tolist()) for l in range(self.k)]

    def memberships(self) -> List[FrozenSet[int]]:
        return [frozenset(np.flatnonzero(row).tolist()) for row in self.z]


def _as_labels(labeling) -> np.ndarray:
    return np.asarray(getattr(labeling, "labels", labeling))


def nmi_classic(a, b) -> float:
    """
    经典 NMI, 归一化取两边熵的算术平均

    Args:
        a, b: Labeling 或标签序列, 顶点顺序一致
    """
    left, right = _as_labels(a), _as_labels(b)
    if left.size == 0 or right.size == 0:
        raise GraphInputError("顶点集合为空, 无法计算 NMI")
    if left.shape != right.shape:
        raise GraphInputError(f"两组标签的顶点数不一致: {left.size} vs {right.size}")
    return float(normalized_mutual_info_score(left, right, average_method="arithmetic"))


def _h(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return -np.where(p > 0.0, p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)


def _normalized_conditional_entropy(z: np.ndarray, y: np.ndarray) -> float:
    """
    sum_l H(Z_l | Y) / H(Z_l) 的平均, H(Z_l | Y) 取最匹配的 Y_h

    只有当 h(P11) + h(P00) > h(P01) + h(P10) 时才接受 Y_h 作为 Z_l 的匹配,
    否则取 H(Z_l | Y) = H(Z_l)。包含全部顶点的社区 H(Z_l) = 0, 贡献 0;
    空社区在进入这里之前已被去掉。
    """
    n = z.shape[0]
    zf = z.astype(float)
    yf = y.astype(float)
    p11 = zf.T @ yf / n                       # k_z x k_y
    pz = zf.mean(axis=0)[:, None]
    py = yf.mean(axis=0)[None, :]
    p10 = pz - p11
    p01 = py - p11
    p00 = 1.0 - p11 - p10 - p01
    h11, h10, h01, h00 = _h(p11), _h(p10), _h(p01), _h(np.clip(p00, 0.0, 1.0))
    h_z = (_h(pz) + _h(1.0 - pz)).ravel()
    h_y = (_h(py) + _h(1.0 - py)).ravel()
    conditional = h11 + h10 + h01 + h00 - h_y[None, :]
    accepted = (h11 + h00) > (h01 + h10)
    candidates = np.where(accepted, conditional, h_z[:, None])
    best = np.minimum(candidates.min(axis=1), h_z)
    terms = np.divide(best, h_z, out=np.zeros_like(best), where=h_z > 0.0)
    return float(terms.mean())


def nmi_extended(a: BinaryMembership, b: BinaryMembership) -> float:
    """
    重叠社区的扩展 NMI: 1 - [H(Z|Y) + H(Y|Z)] / 2

    空社区 (没有任何成员的列) 不参与平均。
    """
    za, zb = np.asarray(getattr(a, "z", a), dtype=bool), np.asarray(getattr(b, "z", b), dtype=bool)
    if za.shape[0] == 0:
        raise GraphInputError("顶点集合为空, 无法计算扩展 NMI")
    if za.shape[0] != zb.shape[0]:
        raise GraphInputError(f"两组隶属的顶点数不一致: {za.shape[0]} vs {zb.shape[0]}")
    za, zb = za[:, za.any(axis=0)], zb[:, zb.any(axis=0)]
    if za.shape[1] == 0 or zb.shape[1] == 0:
        raise GraphInputError("社区族不能为空")
    return 1.0 - (_normalized_conditional_entropy(za, zb) + _normalized_conditional_entropy(zb, za)) / 2.0


def threshold_affiliation(row: np.ndarray, k: int) -> FrozenSet[int]:
    """按 2-范数归一化后以 0.8/k 为阈值取社区"""
    row = np.asarray(row, dtype=float)
    norm = np.linalg.norm(row)
    if norm == 0.0:
        raise GraphInputError("隶属向量为零向量")
    return frozenset(np.flatnonzero(row / norm > 0.8 / k).tolist())


def to_binary(m, k: Optional[int] = None) -> BinaryMembership:
    """
    把隶属向量 (MixedLabeling 或 n x k 数组) 阈值化为 0/1 隶属
    """
    y = np.asarray(getattr(m, "y", m), dtype=float)
    if k is None:
        k = y.shape[1]
    if y.shape[1] != k:
        raise GraphInputError(f"隶属向量长度 {y.shape[1]} 与 k={k} 不一致")
    return BinaryMembership.from_sets([threshold_affiliation(row, k) for row in y], k)


def labels_to_binary(labeling) -> BinaryMembership:
    """硬划分转换为独热隶属"""
    labels = _as_labels(labeling)
    return BinaryMembership.from_sets([{int(label)} for label in labels])


# 标签文件

def write_labels(path: str, labeling, vertex_labels: Sequence[str]) -> None:
    """写出 vertex,label CSV"""
    pd.DataFrame({"vertex": list(vertex_labels), "label": _as_labels(labeling)}).to_csv(path, index=False)
    logger.info(f"标签已写入 {path}")


def affiliation_frame(y: np.ndarray, memberships: Sequence[Iterable[int]], vertex_labels: Sequence[str]) -> pd.DataFrame:
    frame = pd.DataFrame(y, columns=[f"y_{l}" for l in range(y.shape[1])])
    frame.insert(0, "vertex", list(vertex_labels))
    frame["members"] = [";".join(str(l) for l in sorted(m)) for m in memberships]
    return frame


def write_affiliations(path: str, y: np.ndarray, memberships: Sequence[Iterable[int]], vertex_labels: Sequence[str]) -> None:
    """写出 vertex,y_0,...,y_{k-1},members CSV, members 以分号分隔"""
    affiliation_frame(y, memberships, vertex_labels).to_csv(path, index=False)
    logger.info(f"隶属向量已写入 {path}")


def read_labels(path: str) -> Dict[str, FrozenSet[int]]:
    """
    读取标签文件

    支持 vertex,label (或 vertex,block) 与 vertex,...,members 两种格式

    Returns:
        顶点标签到社区集合的映射
    """
    try:
        frame = pd.read_csv(path, dtype={"vertex": str, "members": str}, keep_default_na=False)
    except (OSError, pd.errors.ParserError) as e:
        raise GraphInputError(f"无法读取标签文件 {path}: {e}") from e
    if "vertex" not in frame.columns:
        raise GraphInputError(f"标签文件 {path} 缺少 vertex 列")
    if "members" in frame.columns:
        return {
            str(v): frozenset(int(x) for x in str(members).split(";") if x != "")
            for v, members in zip(frame["vertex"], frame["members"])
        }
    for column in ("label", "block"):
        if column in frame.columns:
            return {str(v): frozenset([int(label)]) for v, label in zip(frame["vertex"], frame[column])}
    raise GraphInputError(f"标签文件 {path} 缺少 label/block/members 列")


def align_memberships(
    truth: Dict[str, FrozenSet[int]], predicted: Dict[str, FrozenSet[int]]
) -> Tuple[BinaryMembership, BinaryMembership]:
    """按顶点对齐两份标签, 顶点集合必须一致"""
    if set(truth) != set(predicted):
        missing = len(set(truth) ^ set(predicted))
        raise GraphInputError(f"两份标签的顶点集合不一致 ({missing} 个顶点不匹配)")
    order = sorted(truth)
    return (
        BinaryMembership.from_sets([truth[v] for v in order]),
        BinaryMembership.from_sets([predicted[v] for v in order]),
    )


def is_single_membership(memberships: Dict[str, FrozenSet[int]]) -> bool:
    return all(len(m) == 1 for m in memberships.values())


def hard_labels(memberships: Dict[str, FrozenSet[int]], order: Sequence[str]) -> np.ndarray:
    return np.array([next(iter(memberships[v])) for v in order], dtype=int)
