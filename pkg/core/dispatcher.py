"""
进程内 JSON-RPC 2.0 工具分发器
"""
import json
import logging
from typing import Any, Callable, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ValidationError

from core.errors import CurvatureError

logger = logging.getLogger("dispatcher")

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INTERNAL_ERROR = -32603
# 工具异常映射为 -32000 - err.code
TOOL_ERROR_BASE = -32000


class RpcError(Exception):
    """JSON-RPC错误异常"""
    def __init__(self, message: str, code: int = TOOL_ERROR_BASE):
        self.message = message
        self.code = code
        super().__init__(self.message)


class RpcRequest(BaseModel):
    """JSON-RPC请求模型"""
    jsonrpc: Literal["2.0"] = "2.0"
    id: Optional[Union[int, str]] = None
    method: str
    params: Optional[Dict[str, Any]] = None


class RpcResponse(BaseModel):
    """JSON-RPC响应模型"""
    jsonrpc: str = "2.0"
    id: Optional[Union[int, str]] = None
    result: Optional[Any] = None
    error: Optional[Dict[str, Any]] = None


class RpcTool:
    """工具定义"""
    def __init__(
        self,
        name: str,
        description: str,
        handler: Callable,
        input_schema: Optional[Dict[str, Any]] = None,
        annotations: Optional[Dict[str, Any]] = None,
    ):
        self.name = name
        self.description = description
        self.handler = handler
        self.input_schema = input_schema or {}
        self.annotations = annotations or {}


class ToolDispatcher:
    """JSON-RPC分发器, 内置 tools/list 与 tools/call"""

    def __init__(self):
        self.tools: Dict[str, RpcTool] = {}
        self.register_core_tools()

    def register_core_tools(self):
        """注册核心方法"""
        self.tools["tools/list"] = RpcTool(
            name="list",
            description="列出所有可用工具",
            handler=self._handle_tools_list,
        )
        self.tools["tools/call"] = RpcTool(
            name="call",
            description="调用指定工具",
            handler=self._handle_tools_call,
            input_schema={
                "type": "object",
                "properties": {
                    "name": {"type": "string", "description": "工具名称"},
                    "parameters": {"type": "object", "description": "工具参数"},
                },
                "required": ["name"],
            },
        )

    def register_tool(self, tool: RpcTool):
        """
        注册工具

        Args:
            tool: 工具实例
        """
        logger.debug(f"注册工具: {tool.name}")
        self.tools[f"tools/{tool.name}"] = tool

    def handle_text(self, text: str) -> str:
        """
        处理一段 JSON 文本, 返回 JSON 响应文本

        Args:
            text: 单个请求或请求数组

        Returns:
            响应文本; 全部为通知时返回空串
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            return json.dumps(self._error(None, "无效的JSON", PARSE_ERROR), ensure_ascii=False)
        response = self.handle(data)
        return "" if response is None else json.dumps(response, ensure_ascii=False)

    def handle(self, data: Any) -> Optional[Union[Dict[str, Any], List[Dict[str, Any]]]]:
        """处理已解析的请求或批量请求"""
        if isinstance(data, list):
            return self._handle_batch_request(data)
        return self._handle_single_request(data)

    def _handle_batch_request(self, batch: List[Any]) -> Optional[Union[Dict[str, Any], List[Dict[str, Any]]]]:
        if not batch:
            return self._error(None, "空的批量请求", INVALID_REQUEST)
        responses = [r for r in (self._handle_single_request(item) for item in batch) if r is not None]
        return responses or None

    def _handle_single_request(self, data: Any) -> Optional[Dict[str, Any]]:
        request_id = data.get("id") if isinstance(data, dict) else None
        try:
            request = RpcRequest.model_validate(data)
        except ValidationError:
            return self._error(request_id, "无效的请求", INVALID_REQUEST)

        if request.method not in self.tools:
            return self._error(request.id, f"方法未找到: {request.method}", METHOD_NOT_FOUND)

        notification = isinstance(data, dict) and "id" not in data
        try:
            result = self.tools[request.method].handler(request.params or {})
            response = self._success(request.id, result)
        except RpcError as e:
            logger.warning(f"处理请求 '{request.method}' 时发生错误: {e.message} (代码: {e.code})")
            response = self._error(request.id, e.message, e.code)
        except CurvatureError as e:
            logger.warning(f"处理请求 '{request.method}' 时发生错误: {e.message}")
            response = self._error(request.id, e.message, TOOL_ERROR_BASE - e.code)
        except Exception as e:
            logger.error(f"处理请求 '{request.method}' 时发生错误: {str(e)}", exc_info=True)
            response = self._error(request.id, f"服务器内部错误: {str(e)}", INTERNAL_ERROR)
        return None if notification else response

    def _success(self, request_id: Union[int, str, None], result: Any) -> Dict[str, Any]:
        return RpcResponse(id=request_id, result=result).model_dump(exclude_none=True)

    def _error(self, request_id: Union[int, str, None], message: str, code: int) -> Dict[str, Any]:
        response = RpcResponse(id=request_id, error={"code": code, "message": message})
        return response.model_dump(exclude_none=True)

    def _handle_tools_list(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        处理tools/list方法

        Returns:
            工具列表
        """
        return {
            "tools": [
                {
                    "name": tool.name,
                    "description": tool.description,
                    "inputSchema": tool.input_schema,
                    "annotations": tool.annotations,
                }
                for name, tool in self.tools.items()
                if name not in ("tools/list", "tools/call")
            ]
        }

    def _handle_tools_call(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        处理tools/call方法

        Args:
            params: {name, parameters}

        Returns:
            工具调用结果
        """
        tool_name = params.get("name")
        full_name = f"tools/{tool_name}"
        if full_name not in self.tools or full_name in ("tools/list", "tools/call"):
            raise RpcError(f"工具未找到: {tool_name}", METHOD_NOT_FOUND)
        try:
            return {"result": self.tools[full_name].handler(params.get("parameters") or {})}
        except CurvatureError as e:
            logger.warning(f"调用工具 '{tool_name}' 失败: {e.message}")
            raise RpcError(e.message, TOOL_ERROR_BASE - e.code) from e
