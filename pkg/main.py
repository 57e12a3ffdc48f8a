#!/usr/bin/env python3
"""
ricci_cluster 主程序入口
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

from core.bench import load_bench_spec, run_bench, write_bench
from core.config import FlowConfig, PlantedParams
from core.correlation import STUDIES, run_study
from core.curvature import build_calculator
from core.dispatcher import ToolDispatcher
from core.errors import CurvatureError, GraphInputError, NoStructureError
from core.evaluation import (
    align_memberships, hard_labels, is_single_membership, nmi_classic, nmi_extended,
    read_labels, write_affiliations, write_labels,
)
from core.generators import gen_g_ab, gen_l_ab, gen_mmb, gen_rgg, gen_sbm
from core.graph_core import line_graph, line_graph_product, line_graph_weighted
from core.graph_io import format_edge_list, read_edge_list, write_edge_list
from core.ricci_flow import cluster_mixed, cluster_single
from tools.curvature_tools import parse_measure, parse_variant, register_curvature_tools

# 日志配置
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger("main")


def _add_measure_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--measure", default="exponential",
                        help="邻域测度: uniform/degree_proportional/exponential/lazy_uniform")
    parser.add_argument("--alpha", type=float, default=0.0, help="测度的懒惰参数")
    parser.add_argument("--p", type=float, default=1.0, help="指数测度的参数")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """解析命令行参数"""
    parser = argparse.ArgumentParser(description="ricci_cluster: 图曲率计算与 Ricci 流社区发现")
    parser.add_argument("--debug", action="store_true", help="开启调试日志")
    sub = parser.add_subparsers(dest="command", required=True)

    curvature = sub.add_parser("curvature", help="计算逐边曲率")
    curvature.add_argument("input", help="边列表文件, - 表示标准输入")
    curvature.add_argument("--variant", default="orc-a", help="曲率变体, 如 orc-e/orc-s/orc-a/orc-a1/frc1/frc2/frc3")
    _add_measure_flags(curvature)
    curvature.add_argument("--vertex", action="store_true", help="输出顶点曲率")
    curvature.add_argument("--proc", type=int, default=1, help="并行进程数")
    curvature.add_argument("--out", help="输出 CSV 路径, 默认标准输出")

    lg = sub.add_parser("linegraph", help="构造线图")
    lg.add_argument("input", help="边列表文件")
    lg.add_argument("--scheme", choices=["unit", "sqrt", "product"], default="unit", help="线图边权方案")
    lg.add_argument("--out", help="输出边列表路径, 默认标准输出")

    cluster = sub.add_parser("cluster", help="Ricci 流聚类")
    cluster.add_argument("input", help="边列表文件")
    cluster.add_argument("--mode", choices=["single", "mixed"], default="single", help="单隶属或混合隶属")
    cluster.add_argument("--variant", default="orc-a", help="曲率变体")
    _add_measure_flags(cluster)
    cluster.add_argument("--nu", type=float, help="步长, 默认 ORC 为 1, FRC 自适应")
    cluster.add_argument("--iters", type=int, default=10, help="流迭代次数")
    cluster.add_argument("--seed", type=int, default=0, help="生成输入图所用的种子, 记录到运行清单")
    cluster.add_argument("--proc", type=int, default=1, help="曲率计算进程数")
    cluster.add_argument("--no-renormalize", action="store_true", help="不做总权重归一化")
    cluster.add_argument("--out", help="标签 CSV 路径, 默认标准输出")
    cluster.add_argument("--manifest", help="运行清单 JSON 路径, 默认为 <out>.manifest.json")

    corr = sub.add_parser("correlate", help="曲率相关性分析")
    corr.add_argument("input", help="边列表文件")
    corr.add_argument("--study", choices=list(STUDIES), default="clustering", help="分析类型")
    corr.add_argument("--variant", default="orc-e", help="曲率变体")
    corr.add_argument("--other", help="variants 分析中的第二个曲率变体")
    corr.add_argument("--substrate", choices=["graph", "line"], default="graph", help="variants 分析的底图")
    _add_measure_flags(corr)
    corr.add_argument("--proc", type=int, default=1, help="曲率计算进程数")
    corr.add_argument("--out", help="配对样本 CSV 路径")

    gen = sub.add_parser("gen", help="生成合成图")
    gen.add_argument("model", choices=["sbm", "mmb", "rgg", "gab", "lab"], help="生成模型")
    gen.add_argument("--n", type=int, default=100, help="顶点数")
    gen.add_argument("--k", type=int, default=2, help="块数")
    gen.add_argument("--p-in", type=float, default=0.1, help="块内连边概率")
    gen.add_argument("--p-out", type=float, default=0.0, help="块间连边概率")
    gen.add_argument("--n-o", type=int, default=0, help="混合顶点数")
    gen.add_argument("--a", type=int, default=3, help="G_ab/L_ab 块大小")
    gen.add_argument("--b", type=int, default=2, help="G_ab/L_ab 块数")
    gen.add_argument("--dim", type=int, default=2, help="RGG 维数")
    gen.add_argument("--r", type=float, default=0.1, help="RGG 半径")
    gen.add_argument("--weighted", action="store_true", help="RGG 边权取距离")
    gen.add_argument("--seed", type=int, default=0, help="随机种子")
    gen.add_argument("--out", help="输出边列表路径, 默认标准输出")
    gen.add_argument("--truth", help="真实标签 CSV 路径")

    ev = sub.add_parser("eval", help="评估聚类结果")
    ev.add_argument("--truth", required=True, help="真实标签 CSV")
    ev.add_argument("--pred", required=True, help="预测标签 CSV")
    ev.add_argument("--kind", choices=["auto", "classic", "extended"], default="auto", help="NMI 类型")

    bench = sub.add_parser("bench", help="运行基准实验")
    bench.add_argument("--spec", required=True, help="基准描述 JSON")
    bench.add_argument("--seed", type=int, help="覆盖基础种子")
    bench.add_argument("--workers", type=int, help="覆盖并行单元格数")
    bench.add_argument("--out", help="覆盖输出目录")

    rpc = sub.add_parser("rpc", help="处理一个 JSON-RPC 请求")
    rpc.add_argument("request", nargs="?", default="-", help="请求文件, 默认标准输入")
    return parser.parse_args(argv)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise GraphInputError(f"无法读取 {path}: {e}") from e


def cmd_curvature(args: argparse.Namespace) -> int:
    g = read_edge_list(args.input)
    variant = parse_variant(args.variant)
    measure = parse_measure(args.measure, args.alpha, args.p)
    report = build_calculator(variant, measure=measure, proc=args.proc).report(g)
    frame = report.vertex_frame(g.n) if args.vertex else report.to_frame()
    frame.to_csv(args.out or sys.stdout, index=False)
    return 0


def cmd_linegraph(args: argparse.Namespace) -> int:
    g = read_edge_list(args.input)
    builders = {"unit": line_graph, "sqrt": line_graph_weighted, "product": line_graph_product}
    lmap = builders[args.scheme](g)
    if args.out:
        write_edge_list(lmap.line_graph, args.out)
    else:
        sys.stdout.write(format_edge_list(lmap.line_graph))
    return 0


def _flow_config(args: argparse.Namespace) -> FlowConfig:
    try:
        return FlowConfig(
            curvature=parse_variant(args.variant),
            measure=parse_measure(args.measure, args.alpha, args.p),
            nu=args.nu,
            T=args.iters,
            seed=args.seed,
            proc=args.proc,
            renormalize=not args.no_renormalize,
        )
    except ValueError as e:
        raise GraphInputError(f"流配置不合法: {e}") from None


def cmd_cluster(args: argparse.Namespace) -> int:
    g = read_edge_list(args.input)
    cfg = _flow_config(args)
    out = args.out or sys.stdout
    if args.mode == "mixed":
        result = cluster_mixed(g, cfg)
        if result is None:
            raise NoStructureError()
        write_affiliations(out, result.labeling.y, result.labeling.binary, g.labels)
    else:
        result = cluster_single(g, cfg)
        if result is None:
            raise NoStructureError()
        write_labels(out, result.labeling, g.labels)
    manifest_path = args.manifest or (f"{args.out}.manifest.json" if args.out else None)
    if manifest_path:
        with open(manifest_path, "w", encoding="utf-8") as f:
            json.dump(result.manifest(cfg), f, ensure_ascii=False, indent=2)
        logger.info(f"运行清单已写入 {manifest_path}")
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    g = read_edge_list(args.input)
    result = run_study(
        g,
        args.study,
        parse_variant(args.variant),
        other=parse_variant(args.other) if args.other else None,
        measure=parse_measure(args.measure, args.alpha, args.p),
        substrate=args.substrate,
        proc=args.proc,
    )
    if args.out:
        result.frame.to_csv(args.out, index=False)
        logger.info(f"配对样本已写入 {args.out}")
    print(json.dumps(result.summary(), ensure_ascii=False))
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    truth = None
    if args.model in ("sbm", "mmb"):
        try:
            params = PlantedParams(n=args.n, k=args.k, p_in=args.p_in, p_out=args.p_out, n_o=args.n_o, seed=args.seed)
        except ValueError as e:
            raise GraphInputError(f"生成参数不合法: {e}") from None
        g, truth = (gen_sbm if args.model == "sbm" else gen_mmb)(params)
    elif args.model == "rgg":
        g = gen_rgg(args.n, args.dim, args.r, args.seed, args.weighted)
    else:
        g, truth = (gen_g_ab if args.model == "gab" else gen_l_ab)(args.a, args.b)
    if args.out:
        write_edge_list(g, args.out)
    else:
        sys.stdout.write(format_edge_list(g))
    if args.truth:
        if truth is None:
            raise GraphInputError(f"模型 {args.model} 没有真实标签")
        truth.to_frame(g.labels).to_csv(args.truth, index=False)
        logger.info(f"真实标签已写入 {args.truth}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    truth = read_labels(args.truth)
    predicted = read_labels(args.pred)
    a, b = align_memberships(truth, predicted)
    kind = args.kind
    if kind == "auto":
        single = is_single_membership(truth) and is_single_membership(predicted)
        kind = "classic" if single else "extended"
    if kind == "classic":
        if not (is_single_membership(truth) and is_single_membership(predicted)):
            raise GraphInputError("经典 NMI 要求每个顶点恰好属于一个社区")
        order = sorted(truth)
        value = nmi_classic(hard_labels(truth, order), hard_labels(predicted, order))
    else:
        value = nmi_extended(a, b)
    print(json.dumps({"measure": kind, "nmi": value}))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    spec = load_bench_spec(args.spec)
    updates = {}
    if args.seed is not None:
        updates["base_seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.out is not None:
        updates["out_dir"] = args.out
    if updates:
        spec = spec.model_copy(update=updates)
    table, records = run_bench(spec)
    paths = write_bench(spec, table, records)
    print(json.dumps(paths))
    return 0


def cmd_rpc(args: argparse.Namespace) -> int:
    dispatcher = ToolDispatcher()
    register_curvature_tools(dispatcher)
    response = dispatcher.handle_text(_read_text(args.request))
    if response:
        print(response)
    return 0


COMMANDS = {
    "curvature": cmd_curvature,
    "linegraph": cmd_linegraph,
    "cluster": cmd_cluster,
    "correlate": cmd_correlate,
    "gen": cmd_gen,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "rpc": cmd_rpc,
}


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    args = parse_args(argv)

    # 设置日志级别
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("调试模式已开启")

    try:
        return COMMANDS[args.command](args)
    except CurvatureError as e:
        logger.error(e.message)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
