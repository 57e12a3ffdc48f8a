"""
合成基准实验: 参数网格 x 曲率变体 x 测度 x 随机种子

每个单元格在若干可接受实例上运行聚类, 报告 NMI 与用时的均值和标准差。
"""
import json
import logging
import multiprocessing as mp
import os
import time
from dataclasses import asdict, dataclass
from itertools import product
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from core.config import BenchSpec, CurvatureVariant, FlowConfig, MeasureMode, PlantedParams
from core.errors import GraphInputError
from core.evaluation import labels_to_binary, nmi_classic, nmi_extended, to_binary
from core.generators import GroundTruth, derive_seed, gen_mmb, gen_sbm, is_admissible
from core.graph_core import Graph
from core.ricci_flow import Labeling, cluster_mixed, cluster_single

logger = logging.getLogger("bench")


@dataclass
class InstanceRecord:
    """单个实例的运行记录, 写入清单以便复现"""
    params: Dict[str, Any]
    variant: str
    measure: str
    index: int
    seed: int
    admissible: bool
    nmi: Optional[float] = None
    runtime: Optional[float] = None
    communities: Optional[int] = None


def load_bench_spec(path: str) -> BenchSpec:
    """读取 JSON 基准描述"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise GraphInputError(f"无法读取基准描述 {path}: {e}") from e
    try:
        return BenchSpec.model_validate(data)
    except ValidationError as e:
        raise GraphInputError(f"基准描述不合法: {e}") from e


def summarize(values: List[float]) -> Tuple[float, float]:
    """均值与样本标准差; 少于两个样本时标准差为 0, 没有样本时均为 nan"""
    if not values:
        return float("nan"), float("nan")
    array = np.asarray(values, dtype=float)
    sd = float(array.std(ddof=1)) if array.size >= 2 else 0.0
    return float(array.mean()), sd


def generate_instance(model: str, params: PlantedParams) -> Tuple[Graph, GroundTruth]:
    if model == "sbm":
        return gen_sbm(params)
    return gen_mmb(params)


def score_instance(
    g: Graph, truth: GroundTruth, cfg: FlowConfig, model: str, substrate: str
) -> Tuple[float, int]:
    """
    聚类一个实例并与真实标签比较

    Returns:
        (NMI, 社区数); 未发现结构时按单一社区计分
    """
    if model == "sbm":
        result = cluster_single(g, cfg)
        labeling = result.labeling if result else Labeling(np.zeros(g.n, dtype=int))
        return nmi_classic(truth.hard_labels(), labeling), labeling.k
    if substrate == "line" and g.m > 0:
        mixed = cluster_mixed(g, cfg)
        if mixed is not None:
            predicted = to_binary(mixed.labeling.y)
            return nmi_extended(truth.binary(), predicted), mixed.labeling.k
    else:
        result = cluster_single(g, cfg)
        if result is not None:
            return nmi_extended(truth.binary(), labels_to_binary(result.labeling)), result.labeling.k
    trivial = labels_to_binary(np.zeros(g.n, dtype=int))
    return nmi_extended(truth.binary(), trivial), 1


def run_instance(
    spec: BenchSpec, params: Dict[str, Any], variant: CurvatureVariant, measure: MeasureMode, index: int
) -> InstanceRecord:
    seed = derive_seed(spec.base_seed, params, index)
    planted = PlantedParams(**params, seed=seed)
    g, truth = generate_instance(spec.model, planted)
    record = InstanceRecord(
        params=params, variant=variant.value, measure=measure.label(),
        index=index, seed=seed, admissible=True,
    )
    if spec.filter and not is_admissible(g, truth, spec.admissible_modularity):
        record.admissible = False
        logger.warning(f"实例 {params} #{index} 的真实划分模块度过低, 已过滤")
        return record
    cfg = FlowConfig(curvature=variant, measure=measure, T=spec.iterations, seed=seed)
    start = time.perf_counter()
    record.nmi, record.communities = score_instance(g, truth, cfg, spec.model, spec.substrate)
    record.runtime = time.perf_counter() - start
    return record


def run_cell(args: Tuple[BenchSpec, Dict[str, Any], CurvatureVariant, MeasureMode]) -> Tuple[Dict[str, Any], List[InstanceRecord]]:
    """运行一个单元格; 全部实例被过滤时该行被标记而不是丢弃"""
    spec, params, variant, measure = args
    records = [run_instance(spec, params, variant, measure, index) for index in spec.seeds]
    kept = [r for r in records if r.admissible]
    nmi_mean, nmi_sd = summarize([r.nmi for r in kept])
    time_mean, time_sd = summarize([r.runtime for r in kept])
    row = dict(params)
    row.update({
        "model": spec.model,
        "substrate": spec.substrate if spec.model == "mmb" else "graph",
        "variant": variant.value,
        "measure": measure.label(),
        "instances": len(records),
        "admissible": len(kept),
        "filtered": len(records) - len(kept),
        "nmi_mean": nmi_mean,
        "nmi_sd": nmi_sd,
        "runtime_mean": time_mean,
        "runtime_sd": time_sd,
        "flagged": not kept,
    })
    if not kept:
        logger.warning(f"单元格 {params} / {variant.value} 的所有实例都被过滤")
    else:
        logger.info(f"单元格完成 {params} / {variant.value}: NMI {nmi_mean:.3f} ({nmi_sd:.3f})")
    return row, records


def bench_cells(spec: BenchSpec) -> List[Tuple[BenchSpec, Dict[str, Any], CurvatureVariant, MeasureMode]]:
    return [(spec, params, variant, measure) for params, variant, measure in product(spec.grid, spec.variants, spec.measures)]


def run_bench(spec: BenchSpec) -> Tuple[pd.DataFrame, List[InstanceRecord]]:
    """
    执行基准实验

    Args:
        spec: 基准描述

    Returns:
        (每单元格一行的汇总表, 全部实例记录)
    """
    cells = bench_cells(spec)
    logger.info(f"开始基准实验: {len(cells)} 个单元格, 每格 {len(spec.seeds)} 个实例, {spec.workers} 个进程")
    if spec.workers > 1 and len(cells) > 1:
        with mp.get_context("fork").Pool(processes=spec.workers) as pool:
            outputs = list(pool.imap(run_cell, cells))
    else:
        outputs = [run_cell(cell) for cell in cells]
    rows = [row for row, _ in outputs]
    records = [record for _, cell_records in outputs for record in cell_records]
    return pd.DataFrame(rows), records


def write_bench(spec: BenchSpec, table: pd.DataFrame, records: List[InstanceRecord]) -> Dict[str, str]:
    """写出 bench.csv 与 manifest.json, 返回文件路径"""
    os.makedirs(spec.out_dir, exist_ok=True)
    table_path = os.path.join(spec.out_dir, "bench.csv")
    manifest_path = os.path.join(spec.out_dir, "manifest.json")
    table.to_csv(table_path, index=False)
    manifest = {
        "spec": spec.model_dump(mode="json"),
        "workers": spec.workers,
        "proc_per_cell": 1,
        "instances": [asdict(record) for record in records],
    }
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, ensure_ascii=False, indent=2)
    logger.info(f"基准结果已写入 {table_path}")
    return {"table": table_path, "manifest": manifest_path}
