"""
边列表文本格式的读写

格式: 每行 `u v [weight]`, 空白分隔, `#` 之后为注释, 权重默认 1.0。
写出时附带 `# vertices N` 头部以及 `# vertex <label>` 行 (数字标签只写孤立顶点,
其它标签按顺序写出全部顶点), 读入时据此恢复孤立顶点与顶点顺序。
"""
import logging
import re
import sys
from typing import Dict, Iterable, List, Optional, TextIO, Union

from core.errors import GraphInputError
from core.graph_core import Graph

logger = logging.getLogger("graph_io")

_HEADER_VERTICES = re.compile(r"^#\s*vertices\s+(\d+)\s*$")
_HEADER_VERTEX = re.compile(r"^#\s*vertex\s+(\S+)\s*$")
_INTEGER = re.compile(r"^-?\d+$")


def parse_edge_list(lines: Iterable[str]) -> Graph:
    """
    解析边列表

    Args:
        lines: 文本行

    Returns:
        Graph, 外部标签保存在 labels 中
    """
    declared: Optional[int] = None
    order: Dict[str, None] = {}
    raw_edges = []
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        header = _HEADER_VERTICES.match(line)
        if header:
            declared = int(header.group(1))
            continue
        isolated = _HEADER_VERTEX.match(line)
        if isolated:
            order.setdefault(isolated.group(1))
            continue
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        fields = content.split()
        if len(fields) not in (2, 3):
            raise GraphInputError("expected 2 or 3 fields", line=number)
        weight = 1.0
        if len(fields) == 3:
            try:
                weight = float(fields[2])
            except ValueError:
                raise GraphInputError(f"invalid weight {fields[2]!r}", line=number) from None
        u, v = fields[0], fields[1]
        order.setdefault(u)
        order.setdefault(v)
        raw_edges.append((number, u, v, weight))

    labels: List[str] = list(order)
    numeric = bool(labels) and all(_INTEGER.match(label) for label in labels)
    if numeric:
        ints = set(int(label) for label in labels)
        if declared is not None:
            ints.update(range(declared))
        labels = [str(i) for i in sorted(ints)]
    elif not labels and declared:
        labels = [str(i) for i in range(declared)]
    index = {label: i for i, label in enumerate(labels)}

    edges = []
    seen = set()
    for number, u, v, weight in raw_edges:
        if numeric:
            u, v = str(int(u)), str(int(v))
        iu, iv = index[u], index[v]
        key = (min(iu, iv), max(iu, iv))
        if iu == iv:
            raise GraphInputError(f"self loop on {u}", line=number)
        if key in seen:
            raise GraphInputError(f"duplicate edge {u} {v}", line=number)
        if not weight > 0.0:
            raise GraphInputError(f"non-positive weight {weight}", line=number)
        seen.add(key)
        edges.append((iu, iv, weight))

    identity = labels == [str(i) for i in range(len(labels))]
    graph = Graph(len(labels), edges, labels=None if identity else labels)
    logger.info(f"读入图: {graph.n} 个顶点, {graph.m} 条边")
    return graph


def read_edge_list(source: Union[str, TextIO]) -> Graph:
    """
    从文件路径或文本流读取边列表

    Args:
        source: 文件路径, 或 "-" 表示标准输入, 或已打开的文本流
    """
    if hasattr(source, "read"):
        return parse_edge_list(source)
    if source == "-":
        return parse_edge_list(sys.stdin)
    try:
        with open(source, "r", encoding="utf-8") as handle:
            return parse_edge_list(handle)
    except OSError as e:
        raise GraphInputError(f"无法读取输入文件 {source}: {e}") from e


def format_edge_list(g: Graph) -> str:
    """按边的字典序生成确定性的文本"""
    labels = g.labels
    numeric = all(_INTEGER.match(label) for label in labels)
    out = [f"# vertices {g.n}"]
    for v in g.vertices():
        if not numeric or not g.neighbors(v):
            out.append(f"# vertex {labels[v]}")
    for (u, v), w in zip(g.edges, g.weights):
        out.append(f"{labels[u]} {labels[v]} {float(w)!r}")
    return "\n".join(out) + "\n"


def write_edge_list(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_edge_list(g))
    logger.info(f"边列表已写入 {path}")
