#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : constant
@Date       : 2025/5/28 15:05
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 项目中使用的通用常量枚举。
General constant enums used across the estimator and sampler.
"""
from enum import Enum, IntEnum


class ModelKind(Enum):
    """
    模型族。
    Application model families understood by gen-model.
    """
    CURIE_WEISS = "curie-weiss"
    HOPFIELD = "hopfield"
    SK_FERRO = "sk-ferro"
    GRAPH = "graph"
    POSTERIOR = "posterior"
    SUBSET_SUM = "subset-sum"


class GlauberFormula(Enum):
    """
    Glauber 步数公式。
    PSD: Θ(n² log(n/ε))，适用于 0 ⪯ J ⪯ I；
    BULK: Θ(n log(n/ε)/(1-‖J‖))，适用于 ‖J‖ < 1。
    AUTO: ‖J‖ 严格小于 1 时取 BULK，否则取 PSD。
    """
    PSD = "psd"
    BULK = "bulk"
    AUTO = "auto"


class CellFlag(Enum):
    """
    网格单元标记。
    """
    TILT_UNVERIFIED = "tilt_unverified"  # SGD 第二阶段未达到梯度阈值
    TILT_RETRIED = "tilt_retried"  # 重试过一次
    ANNEAL_FAILED = "anneal_failed"  # 退火失败，单元被排除
    TRIALS_DROPPED = "trials_dropped"  # 部分退火试验失败被丢弃


class SampleMethod(Enum):
    """
    采样方法。
    """
    TEMPERING = "tempering"
    DIRECT = "direct"


class ExitCode(IntEnum):
    """
    命令行退出码（固定、文档化）。
    """
    OK = 0
    INTERNAL = 1
    INVALID_INPUT = 2
    IO = 3
    PARSE = 4
    CAPACITY = 5
    NUMERIC = 6
    ESTIMATOR = 7
    SAMPLER = 8
    CONSISTENCY = 9
    ORACLE_FAILED = 10
