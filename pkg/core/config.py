"""
配置模型定义

所有可调参数都用 pydantic 模型描述, 由命令行参数或 JSON 文件构造
"""
from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class CurvatureVariant(str, Enum):
    """曲率变体标签"""
    ORC_E = "ORC-E"
    ORC_S = "ORC-S"
    ORC_A = "ORC-A"
    ORC_A1 = "ORC-A1"
    FRC_1 = "FRC-1"
    FRC_2 = "FRC-2"
    FRC_3 = "FRC-3"

    @property
    def is_ollivier(self) -> bool:
        return self.value.startswith("ORC")

    @property
    def frc_order(self) -> int:
        """FRC 的面阶数, ORC 返回 0"""
        if self.is_ollivier:
            return 0
        return int(self.value[-1])

    @classmethod
    def parse(cls, text: str) -> "CurvatureVariant":
        """
        解析命令行中的变体名

        Args:
            text: 如 orc-e, ORC-A1, frc2, frc-3

        Returns:
            对应的变体
        """
        key = text.strip().upper().replace("_", "-")
        if key.startswith("FRC") and "-" not in key:
            key = f"FRC-{key[3:]}"
        for variant in cls:
            if variant.value == key:
                return variant
        raise ValueError(f"未知的曲率变体: {text}")


class MeasureMode(BaseModel):
    """邻域概率测度的构造方式"""
    kind: Literal["uniform", "degree_proportional", "exponential", "lazy_uniform"] = "exponential"
    alpha: float = 0.0
    p: float = 1.0

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("alpha 必须位于 [0, 1]")
        return value

    @field_validator("p")
    @classmethod
    def _check_p(cls, value: float) -> float:
        if value < 0.0:
            raise ValueError("p 必须非负")
        return value

    def label(self) -> str:
        if self.kind == "exponential":
            return f"exponential(alpha={self.alpha:g},p={self.p:g})"
        if self.kind == "lazy_uniform":
            return f"lazy_uniform(alpha={self.alpha:g})"
        return self.kind


class SinkhornParams(BaseModel):
    """Sinkhorn 求解参数, reg 为空时取 0.1 倍代价中位数"""
    reg: Optional[float] = Field(default=None, gt=0.0)
    max_iter: int = Field(default=10000, ge=1)
    tol: float = Field(default=1e-6, gt=0.0)


class FlowConfig(BaseModel):
    """Ricci 流聚类配置"""
    curvature: CurvatureVariant = CurvatureVariant.ORC_A
    nu: Optional[float] = Field(default=None, gt=0.0)
    T: int = Field(default=10, ge=1)
    epsilon: float = 1e-4
    epsilon_d: float = 0.1
    cutoff: Optional[Literal["orc-uniform", "frc-quantile"]] = None
    measure: MeasureMode = Field(default_factory=MeasureMode)
    sinkhorn: SinkhornParams = Field(default_factory=SinkhornParams)
    # 流本身是确定性的, seed 只记录生成输入图所用的种子, 写入运行清单
    seed: int = 0
    renormalize: bool = True
    strict_faces: bool = False
    orc_delta: float = Field(default=0.025, gt=0.0)
    frc_delta: float = Field(default=0.25, gt=0.0)
    quantile: float = Field(default=0.999, gt=0.0, le=1.0)
    proc: int = Field(default=1, ge=1)

    @field_validator("epsilon_d")
    @classmethod
    def _check_drop(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError("epsilon_d 必须位于 (0, 1)")
        return value

    @model_validator(mode="after")
    def _fill_cutoff(self) -> "FlowConfig":
        if self.cutoff is None:
            self.cutoff = "orc-uniform" if self.curvature.is_ollivier else "frc-quantile"
        return self

    def step_size(self) -> Optional[float]:
        """常数步长; None 表示使用 FRC 自适应步长"""
        if self.nu is not None:
            return self.nu
        return 1.0 if self.curvature.is_ollivier else None


class PlantedParams(BaseModel):
    """随机块模型参数"""
    n: int = Field(ge=1)
    k: int = Field(default=2, ge=1)
    p_in: float = Field(ge=0.0, le=1.0)
    p_out: float = Field(default=0.0, ge=0.0, le=1.0)
    n_o: int = Field(default=0, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_sizes(self) -> "PlantedParams":
        if self.k > self.n:
            raise ValueError("块数不能超过节点数")
        if self.n_o > self.n:
            raise ValueError("混合节点数不能超过节点数")
        return self


class BenchSpec(BaseModel):
    """基准实验描述: 参数网格 x 曲率变体 x 随机种子"""
    model: Literal["sbm", "mmb"] = "sbm"
    grid: List[Dict[str, Any]]
    variants: List[CurvatureVariant] = Field(default_factory=lambda: [CurvatureVariant.ORC_E])
    measures: List[MeasureMode] = Field(default_factory=lambda: [MeasureMode()])
    seeds: List[int]
    base_seed: int = 0
    filter: bool = True
    admissible_modularity: float = 0.4
    substrate: Literal["line", "graph"] = "line"
    iterations: int = Field(default=10, ge=1)
    out_dir: str = "bench_out"
    workers: int = Field(default=1, ge=1)

    @field_validator("grid", "seeds")
    @classmethod
    def _non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("参数网格和种子列表不能为空")
        return value
