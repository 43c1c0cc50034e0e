#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : exception
@Date       : 2025/7/12 10:20
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 异常层次，每类异常对应一个固定退出码
"""
from typing import Any, Dict, Optional

from src.config.constant import ExitCode


class IsingError(Exception):
    """项目异常基类"""
    exit_code: ExitCode = ExitCode.INTERNAL


class InvalidInputError(IsingError):
    """输入不合法：维度不匹配、参数越界、前置条件不满足"""
    exit_code = ExitCode.INVALID_INPUT


class ModelIOError(IsingError):
    """模型/单元文件读写失败"""
    exit_code = ExitCode.IO

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


class ParseError(IsingError):
    """JSON 解析失败，带行列号"""
    exit_code = ExitCode.PARSE

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (行 {line}, 列 {column})")
        self.line = line
        self.column = column


class CapacityError(IsingError):
    """超出容量：穷举规模、显式核规模、网格单元预算"""
    exit_code = ExitCode.CAPACITY

    def __init__(self, message: str, count: Optional[int] = None):
        super().__init__(message)
        self.count = count


class NumericError(IsingError):
    """数值失败：特征分解不收敛、出现非有限值"""
    exit_code = ExitCode.NUMERIC


class EstimatorError(IsingError):
    """配分函数估计失败"""
    exit_code = ExitCode.ESTIMATOR


class SamplerFailureError(IsingError):
    """采样试验预算耗尽"""
    exit_code = ExitCode.SAMPLER

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConsistencyError(IsingError):
    """估计量自相矛盾：接受概率 > 1，或单元文件与模型不匹配"""
    exit_code = ExitCode.CONSISTENCY


class ContractViolationError(IsingError):
    """拒绝采样中观测到的密度比超过声明的上界"""
    exit_code = ExitCode.SAMPLER
