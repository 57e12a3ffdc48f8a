"""
曲率工具包异常定义

所有异常都携带 message 和 code，code 同时作为命令行退出码使用:
2 输入错误, 3 未发现社区结构, 4 数值计算错误
"""
from typing import Optional, Tuple


class CurvatureError(Exception):
    """曲率计算基础异常"""
    code = 4

    def __init__(self, message: str, code: Optional[int] = None):
        self.message = message
        if code is not None:
            self.code = code
        super().__init__(self.message)


class GraphInputError(CurvatureError):
    """输入图或参数不合法"""
    code = 2

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedSupportError(GraphInputError):
    """传输问题的支撑集之间不连通"""


class NoStructureError(CurvatureError):
    """聚类未找到模块度高于阈值的划分"""
    code = 3

    def __init__(self, message: str = "no community structure found"):
        super().__init__(message)


class NumericError(CurvatureError):
    """数值计算失败"""
    code = 4


class SinkhornConvergenceError(NumericError):
    """Sinkhorn 迭代未收敛"""

    def __init__(self, iterations: int, error: float):
        self.iterations = iterations
        self.error = error
        super().__init__(f"Sinkhorn未在{iterations}次迭代内收敛 (边际误差 {error:.3e})")


class FlowWeightError(NumericError):
    """Ricci流更新后出现非正权重"""

    def __init__(self, edge: Tuple[int, int], weight: float):
        self.edge = edge
        self.weight = weight
        super().__init__(f"边 {edge} 更新后的权重非正: {weight:.6g}")


class FaceWeightError(NumericError):
    """面权重退化或无法构成几何图形"""
