"""
曲率与聚类工具集, 通过 JSON-RPC 分发器暴露
"""
import inspect
import logging
from typing import Any, Callable, Dict, List

import numpy as np

from core.config import CurvatureVariant, FlowConfig, MeasureMode, PlantedParams
from core.correlation import run_study
from core.curvature import build_calculator
from core.dispatcher import RpcTool, ToolDispatcher
from core.errors import GraphInputError, NoStructureError
from core.evaluation import align_memberships, hard_labels, is_single_membership, nmi_classic, nmi_extended
from core.generators import gen_g_ab, gen_l_ab, gen_mmb, gen_rgg, gen_sbm
from core.graph_core import Graph, face_statistics, line_graph, line_graph_product, line_graph_weighted
from core.graph_io import parse_edge_list, read_edge_list
from core.ricci_flow import cluster_mixed, cluster_single

logger = logging.getLogger("curvature_tools")

# 文档中的类型标记到 JSON Schema 类型
_TYPE_MARKS = {
    "(整数)": "integer",
    "(数值)": "number",
    "(布尔)": "boolean",
    "(列表)": "array",
    "(对象)": "object",
}


def parse_variant(text: str) -> CurvatureVariant:
    try:
        return CurvatureVariant.parse(text)
    except ValueError as e:
        raise GraphInputError(str(e)) from None


def parse_measure(kind: str = "exponential", alpha: float = 0.0, p: float = 1.0) -> MeasureMode:
    """构造邻域测度, 接受 degree-proportional 等连字符写法"""
    try:
        return MeasureMode(kind=kind.replace("-", "_"), alpha=alpha, p=p)
    except ValueError as e:
        raise GraphInputError(f"测度参数不合法: {e}") from None


def graph_from_params(params: Dict[str, Any]) -> Graph:
    """
    从请求参数中取图: path 为边列表文件, 或 edges 为 [u, v] / [u, v, w] 列表

    n 给出时补齐孤立顶点 0..n-1
    """
    if "path" in params:
        return read_edge_list(str(params["path"]))
    if "edges" not in params:
        raise GraphInputError("缺少图参数: 需要 path 或 edges")
    lines = [f"# vertices {int(params['n'])}"] if "n" in params else []
    for edge in params["edges"]:
        lines.append(" ".join(str(x) for x in edge))
    return parse_edge_list(lines)


def graph_payload(g: Graph) -> Dict[str, Any]:
    labels = g.labels
    return {
        "n": g.n,
        "edges": [[labels[u], labels[v], float(w)] for (u, v), w in zip(g.edges, g.weights)],
    }


class CurvatureTools:
    """曲率工具集"""

    def create_tools(self) -> List[RpcTool]:
        """
        创建工具列表

        Returns:
            以 tool_ 开头的方法对应的工具
        """
        tools = []
        for name, method in inspect.getmembers(self, predicate=inspect.ismethod):
            if not name.startswith("tool_"):
                continue
            docstring = inspect.getdoc(method) or ""
            description = docstring.split("\n")[0] if docstring else ""
            annotations = {}
            if "获取" in description or "计算" in description or "评估" in description:
                annotations["readOnlyHint"] = True
            tools.append(RpcTool(
                name=name[5:],
                description=description,
                handler=method,
                input_schema=self._build_input_schema(method),
                annotations=annotations,
            ))
        return tools

    def _build_input_schema(self, method: Callable) -> Dict[str, Any]:
        """
        从文档的 Args: 段构建参数 Schema

        每行形如 "name: 描述 (整数) (必填)", 类型标记缺省为字符串
        """
        properties: Dict[str, Any] = {}
        required: List[str] = []
        in_args = False
        for line in (inspect.getdoc(method) or "").split("\n"):
            stripped = line.strip()
            if stripped == "Args:":
                in_args = True
                continue
            if not in_args:
                continue
            if not stripped or stripped.endswith(":") and " " not in stripped:
                break
            if ":" not in stripped:
                continue
            name, description = (part.strip() for part in stripped.split(":", 1))
            param_type = "string"
            for mark, json_type in _TYPE_MARKS.items():
                if mark in description:
                    param_type = json_type
                    description = description.replace(mark, "").strip()
            if "(必填)" in description:
                required.append(name)
                description = description.replace("(必填)", "").strip()
            properties[name] = {"type": param_type, "description": description}
        schema: Dict[str, Any] = {"type": "object", "properties": properties}
        if required:
            schema["required"] = required
        return schema

    def tool_graph_summary(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        获取图的基本统计

        Args:
            path: 边列表文件路径
            edges: 边列表, 元素为 [u, v] 或 [u, v, w] (列表)
            n: 顶点数, 用于补齐孤立顶点 (整数)

        Returns:
            顶点数、边数、连通分量数及每条边的三角形/四边形计数汇总
        """
        g = graph_from_params(params)
        faces = face_statistics(g)
        return {
            "n": g.n,
            "m": g.m,
            "components": len(g.connected_components()),
            "unit_weighted": g.is_unit_weighted,
            "triangles": int(faces["triangles"].sum()) // 3,
            "mean_quadrangles_per_edge": float(faces["quadrangles"].mean()) if g.m else 0.0,
        }

    def tool_curvature(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        计算每条边的曲率

        Args:
            path: 边列表文件路径
            edges: 边列表 (列表)
            variant: 曲率变体, 如 orc-e, orc-a, frc2 (必填)
            measure: 邻域测度 uniform/degree_proportional/exponential/lazy_uniform
            alpha: 测度的懒惰参数 (数值)
            p: 指数测度的参数 (数值)

        Returns:
            逐边曲率表
        """
        g = graph_from_params(params)
        variant = parse_variant(str(params.get("variant", "orc-a")))
        measure = parse_measure(
            str(params.get("measure", "exponential")),
            float(params.get("alpha", 0.0)),
            float(params.get("p", 1.0)),
        )
        report = build_calculator(variant, measure=measure).report(g)
        frame = report.to_frame()
        return {
            "variant": variant.value,
            "metadata": report.metadata,
            "rows": frame.astype(object).where(frame.notna(), None).to_dict(orient="records"),
        }

    def tool_correlate(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        计算曲率与聚类系数或线图曲率之间的相关性

        Args:
            path: 边列表文件路径
            edges: 边列表 (列表)
            study: clustering/line-vertex/line-edge/variants (必填)
            variant: 曲率变体, 默认 orc-a
            other: variants 分析中的第二个曲率变体
            substrate: variants 分析的底图 graph/line
            measure: 邻域测度
            alpha: 测度的懒惰参数 (数值)
            p: 指数测度的参数 (数值)
            rows: 是否返回配对样本 (布尔)

        Returns:
            Pearson / Spearman 系数与 KS 统计量
        """
        g = graph_from_params(params)
        other = params.get("other")
        result = run_study(
            g,
            str(params.get("study", "")),
            parse_variant(str(params.get("variant", "orc-a"))),
            other=parse_variant(str(other)) if other else None,
            measure=parse_measure(
                str(params.get("measure", "exponential")),
                float(params.get("alpha", 0.0)),
                float(params.get("p", 1.0)),
            ),
            substrate=str(params.get("substrate", "graph")),
        )
        payload = result.summary()
        if params.get("rows"):
            payload["rows"] = result.frame.to_dict(orient="records")
        return payload

    def tool_line_graph(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        构造线图

        Args:
            path: 边列表文件路径
            edges: 边列表 (列表)
            scheme: 线图边权 unit/sqrt/product

        Returns:
            线图边列表, 顶点标签为 "u-v"
        """
        g = graph_from_params(params)
        scheme = str(params.get("scheme", "unit"))
        builders = {"unit": line_graph, "sqrt": line_graph_weighted, "product": line_graph_product}
        if scheme not in builders:
            raise GraphInputError(f"未知的线图权重方案: {scheme}")
        return graph_payload(builders[scheme](g).line_graph)

    def tool_cluster(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        执行 Ricci 流聚类

        Args:
            path: 边列表文件路径
            edges: 边列表 (列表)
            mode: single 或 mixed
            variant: 曲率变体, 默认 orc-a
            iters: 迭代次数 (整数)
            nu: 步长 (数值)
            seed: 生成输入图所用的种子, 只作记录 (整数)

        Returns:
            顶点标签或混合隶属, 以及模块度
        """
        g = graph_from_params(params)
        try:
            cfg = FlowConfig(
                curvature=parse_variant(str(params.get("variant", "orc-a"))),
                T=int(params.get("iters", 10)),
                nu=params.get("nu"),
                seed=int(params.get("seed", 0)),
            )
        except ValueError as e:
            raise GraphInputError(f"流配置不合法: {e}") from None
        labels = g.labels
        if params.get("mode", "single") == "mixed":
            mixed = cluster_mixed(g, cfg)
            if mixed is None:
                raise NoStructureError()
            return {
                "k": mixed.labeling.k,
                "modularity": mixed.line_result.modularity,
                "memberships": {labels[v]: sorted(m) for v, m in enumerate(mixed.labeling.binary)},
            }
        result = cluster_single(g, cfg)
        if result is None:
            raise NoStructureError()
        return {
            "k": result.labeling.k,
            "modularity": result.modularity,
            "labels": {labels[v]: int(label) for v, label in enumerate(result.labeling.labels)},
        }

    def tool_generate(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        生成合成图

        Args:
            model: sbm/mmb/rgg/gab/lab (必填)
            n: 顶点数 (整数)
            k: 块数 (整数)
            p_in: 块内连边概率 (数值)
            p_out: 块间连边概率 (数值)
            n_o: 混合顶点数 (整数)
            a: G_ab/L_ab 的块大小 (整数)
            b: G_ab/L_ab 的块数 (整数)
            dim: RGG 维数 (整数)
            r: RGG 半径 (数值)
            seed: 随机种子 (整数)

        Returns:
            边列表与真实隶属
        """
        model = str(params.get("model", ""))
        seed = int(params.get("seed", 0))
        truth = None
        if model in ("sbm", "mmb"):
            try:
                planted = PlantedParams(
                    n=int(params.get("n", 0)),
                    k=int(params.get("k", 2)),
                    p_in=float(params.get("p_in", 0.0)),
                    p_out=float(params.get("p_out", 0.0)),
                    n_o=int(params.get("n_o", 0)),
                    seed=seed,
                )
            except ValueError as e:
                raise GraphInputError(f"生成参数不合法: {e}") from None
            g, truth = (gen_sbm if model == "sbm" else gen_mmb)(planted)
        elif model == "rgg":
            g = gen_rgg(int(params.get("n", 0)), int(params.get("dim", 2)), float(params.get("r", 0.1)), seed)
        elif model in ("gab", "lab"):
            g, truth = (gen_g_ab if model == "gab" else gen_l_ab)(int(params.get("a", 3)), int(params.get("b", 2)))
        else:
            raise GraphInputError(f"未知的生成模型: {model}")
        payload = graph_payload(g)
        if truth is not None:
            payload["memberships"] = [sorted(m) for m in truth.memberships()]
        return payload

    def tool_evaluate(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        评估聚类结果与真实标签的一致性

        Args:
            truth: 顶点到社区编号列表的映射 (对象) (必填)
            predicted: 顶点到社区编号列表的映射 (对象) (必填)

        Returns:
            NMI 及所用的度量 (classic 或 extended)
        """
        if "truth" not in params or "predicted" not in params:
            raise GraphInputError("需要 truth 与 predicted 两份标签")
        truth = {str(v): frozenset(int(x) for x in np.atleast_1d(m)) for v, m in params["truth"].items()}
        predicted = {str(v): frozenset(int(x) for x in np.atleast_1d(m)) for v, m in params["predicted"].items()}
        a, b = align_memberships(truth, predicted)
        if is_single_membership(truth) and is_single_membership(predicted):
            order = sorted(truth)
            return {"measure": "classic", "nmi": nmi_classic(hard_labels(truth, order), hard_labels(predicted, order))}
        return {"measure": "extended", "nmi": nmi_extended(a, b)}


def register_curvature_tools(dispatcher: ToolDispatcher) -> CurvatureTools:
    """
    注册曲率工具

    Args:
        dispatcher: 分发器实例

    Returns:
        工具集实例
    """
    tools = CurvatureTools()
    for tool in tools.create_tools():
        dispatcher.register_tool(tool)
    logger.info(f"已注册 {len(dispatcher.tools) - 2} 个曲率工具")
    return tools
