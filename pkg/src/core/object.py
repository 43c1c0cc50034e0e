#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : object
@Date       : 2025/5/28 15:11
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 估计器与采样器使用的基本数据结构。
Basic data structures shared by the estimator and the sampler.
"""
import hashlib
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional

import numpy as np

from src.config.constant import CellFlag, ModelKind, SampleMethod
from src.config.params import Params
from src.core.exception import InvalidInputError


SpinConfig = np.ndarray  # 取值 ±1 的 n 维向量


@dataclass
class IsingModel:
    """
    Ising 模型 p(σ) ∝ exp(½⟨σ,Jσ⟩ + ⟨h,σ⟩)。
    构造时校验维度；J 在容差内对称时静默对称化，否则报错。
    """

    J: np.ndarray
    h: np.ndarray
    name: str = ""
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """在初始化之后执行的函数。"""
        self.J = np.array(self.J, dtype=float)
        self.h = np.array(self.h, dtype=float).reshape(-1)
        if self.J.ndim != 2 or self.J.shape[0] != self.J.shape[1]:
            raise InvalidInputError(f"J 必须是方阵，实际形状 {self.J.shape}")
        if self.J.shape[0] < 1:
            raise InvalidInputError("n 必须 ≥ 1")
        if self.h.shape[0] != self.J.shape[0]:
            raise InvalidInputError(f"h 长度 {self.h.shape[0]} 与 n={self.J.shape[0]} 不一致")
        if not (np.all(np.isfinite(self.J)) and np.all(np.isfinite(self.h))):
            raise InvalidInputError("J 或 h 含非有限值")
        asymmetry = float(np.max(np.abs(self.J - self.J.T)))
        if asymmetry > Params.symmetry_tol:
            raise InvalidInputError(f"J 不对称，最大偏差 {asymmetry:.3e}")
        self.J = (self.J + self.J.T) / 2

    @property
    def n(self) -> int:
        return int(self.J.shape[0])

    def content_hash(self) -> str:
        """模型内容哈希，用于单元缓存复用校验"""
        digest = hashlib.blake2b(digest_size=16)
        digest.update(np.ascontiguousarray(self.J).tobytes())
        digest.update(np.ascontiguousarray(self.h).tobytes())
        return digest.hexdigest()

    def with_diagonal_shift(self, diag: np.ndarray) -> "IsingModel":
        return IsingModel(self.J + np.diag(np.asarray(diag, dtype=float)), self.h.copy(), name=self.name)


@dataclass
class DiscreteDistribution:
    """
    {±1}^n 上的离散分布，按状态编号存储对数概率，第 i 位为 (σ_i+1)/2。
    """

    log_probs: np.ndarray

    def __post_init__(self) -> None:
        self.log_probs = np.asarray(self.log_probs, dtype=float).reshape(-1)
        size = self.log_probs.shape[0]
        if size < 2 or size & (size - 1):
            raise InvalidInputError(f"支撑集大小 {size} 不是 2 的幂")

    @property
    def n(self) -> int:
        return int(self.log_probs.shape[0]).bit_length() - 1

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def is_normalized(self, tol: float = Params.normalization_tol) -> bool:
        return abs(float(np.sum(self.probs)) - 1.0) <= tol


@dataclass
class SpectralSplit:
    """
    J = J_par + J_perp − J_minus 的谱分解。
    X 取 (n·J_plus) 的对称平方根，XQ = X·Q 为尖峰方向上的载荷。
    """

    n: int
    c: float
    threshold: float
    d: int
    J_plus: np.ndarray
    J_minus: np.ndarray
    X: np.ndarray
    Q: np.ndarray
    J_par: np.ndarray
    J_perp: np.ndarray
    XQ: np.ndarray
    eigvals: np.ndarray
    op_norm: float
    bulk_norm: float
    trace_minus: float

    @property
    def c_trace(self) -> float:
        """c·Tr(J_minus)，约定 ∞·0 = 0"""
        if self.trace_minus == 0.0:
            return 0.0
        return self.c * self.trace_minus

    @property
    def has_negative(self) -> bool:
        return self.trace_minus > 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "c": None if math.isinf(self.c) else self.c,
            "threshold": self.threshold,
            "d": self.d,
            "op_norm": self.op_norm,
            "bulk_norm": self.bulk_norm,
            "trace_minus": self.trace_minus,
            "eigvals": self.eigvals.tolist(),
        }


@dataclass
class ChainConfig:
    """单条 Glauber 链的配置"""

    steps: int
    seed: int = 0
    initial: Optional[np.ndarray] = None  # None 表示均匀随机初始

    def __post_init__(self) -> None:
        if int(self.steps) < 1:
            raise InvalidInputError(f"steps 必须 ≥ 1，实际 {self.steps}")
        self.steps = int(self.steps)


@dataclass
class TiltProblem:
    """
    变分问题 G(u) = log E_{P_{J_perp, base_field}}[exp(−⟨u, J_minus σ⟩)] + ½⟨u, J_minus u⟩。
    """

    J_perp: np.ndarray
    J_minus: np.ndarray
    base_field: np.ndarray
    c: float
    epsilon: float
    delta: float

    @property
    def n(self) -> int:
        return int(self.base_field.shape[0])

    def tilted_field(self, u: np.ndarray) -> np.ndarray:
        return self.base_field - self.J_minus @ u


@dataclass
class TiltSolution:
    u: np.ndarray
    tilt: np.ndarray
    grad_norm_estimate: float
    sgd_iterations: int
    samples_used: int
    verified: bool = True
    inner_steps: int = 0  # 每次梯度调用的 Glauber 步数
    trace: List[Dict[str, Any]] = field(default_factory=list)


@dataclass
class AnnealingSchedule:
    """
    温度阶梯 β_ℓ = (ℓ−1)/n，ℓ = 1..M，默认 M = n+1。
    """

    n: int
    M: int = 0

    def __post_init__(self) -> None:
        if self.M <= 0:
            self.M = self.n + 1
        if self.M < 1:
            raise InvalidInputError("阶梯长度 M 必须 ≥ 1")

    def beta(self, level: int) -> float:
        if not 1 <= level <= self.M:
            raise InvalidInputError(f"层级 {level} 超出 1..{self.M}")
        return (level - 1) / self.n

    @property
    def betas(self) -> np.ndarray:
        """长度 M 的数组，betas[ℓ-1] = β_ℓ"""
        return np.arange(self.M, dtype=float) / self.n


@dataclass
class EstimatorParams:
    """退火估计参数：每层样本数 N、试验次数 R、基准 log Z_1"""

    N: int
    R: int
    log_Z1: float = 0.0

    def __post_init__(self) -> None:
        if self.N < 1 or self.R < 1:
            raise InvalidInputError(f"N、R 必须 ≥ 1，实际 N={self.N}, R={self.R}")


@dataclass
class GridSpec:
    """
    尖峰子空间上的网格，中心 y* ∈ {−L+η/2, …, L−η/2}^d，每维 k = 2L/η 个。
    d = 0 时只有原点处的一个退化单元。
    """

    L: float
    eta: float
    d: int
    k: int

    @property
    def num_cells(self) -> int:
        return self.k ** self.d if self.d > 0 else 1

    @property
    def centers_1d(self) -> np.ndarray:
        return -self.L + self.eta * (np.arange(self.k) + 0.5)

    @cached_property
    def cells(self) -> np.ndarray:
        """形状 (num_cells, d) 的网格中心"""
        if self.d == 0:
            return np.zeros((1, 0))
        axis = self.centers_1d
        return np.array(list(itertools.product(axis, repeat=self.d)), dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        return {"L": self.L, "eta": self.eta, "d": self.d, "k": self.k, "num_cells": self.num_cells}


@dataclass
class CellData:
    """
    单个网格单元的估计结果。
    log_Z[ℓ-1] = log Ẑ_ℓ(y*)，ℓ = 1..M+1。
    """

    index: int
    y_star: np.ndarray
    tilt: np.ndarray
    field: np.ndarray
    log_Z: np.ndarray
    flags: List[CellFlag] = field(default_factory=list)
    tilt_grad_norm: float = 0.0
    tilt_trace: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def excluded(self) -> bool:
        return CellFlag.ANNEAL_FAILED in self.flags

    @property
    def log_Z_top(self) -> float:
        return float(self.log_Z[-1])

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "index": self.index,
            "y_star": self.y_star.tolist(),
            "tilt": self.tilt.tolist(),
            "field": self.field.tolist(),
            "log_Z_ladder": self.log_Z.tolist(),
            "tilt_norm": float(np.linalg.norm(self.tilt)),
            "tilt_grad_norm": self.tilt_grad_norm,
            "flags": [flag.value for flag in self.flags],
        }
        if self.tilt_trace:
            data["tilt_trace"] = self.tilt_trace
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CellData":
        return cls(
            index=int(data["index"]),
            y_star=np.asarray(data["y_star"], dtype=float),
            tilt=np.asarray(data["tilt"], dtype=float),
            field=np.asarray(data["field"], dtype=float),
            log_Z=np.asarray(data["log_Z_ladder"], dtype=float),
            flags=[CellFlag(v) for v in data.get("flags", [])],
            tilt_grad_norm=float(data.get("tilt_grad_norm", 0.0)),
            tilt_trace=list(data.get("tilt_trace", [])),
        )


@dataclass
class EstimateResult:
    """estimate_all_cells 的输出"""

    log_Z_hat: float
    cells: List[CellData]
    grid: GridSpec
    split: SpectralSplit
    M: int
    eps: float
    brute_force: bool = False

    @property
    def active_cells(self) -> List[CellData]:
        return [cell for cell in self.cells if not cell.excluded]


@dataclass
class TemperingState:
    """扩展状态 (ℓ, y*, σ)，level ∈ 1..M，cell 为网格单元编号"""

    level: int
    cell: int
    sigma: np.ndarray


@dataclass
class SamplerReport:
    samples: List[np.ndarray]
    trials: int
    steps_total: int
    acceptance_rate: float = 0.0
    accept_violations: int = 0
    method: SampleMethod = SampleMethod.TEMPERING
    sample_trials: List[int] = field(default_factory=list)  # 每个样本消耗的试验次数
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.trials > 0:
            self.acceptance_rate = len(self.samples) / self.trials

    def summary(self) -> Dict[str, Any]:
        return {
            "num_samples": len(self.samples),
            "trials": self.trials,
            "steps_total": self.steps_total,
            "acceptance_rate": self.acceptance_rate,
            "accept_violations": self.accept_violations,
            "method": self.method.value,
        }


@dataclass
class ModelRecipe:
    """模型族 + 参数 + 种子"""

    kind: ModelKind
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None


@dataclass
class RunConfig:
    """命令行一次运行的配置"""

    subcommand: str
    model_path: Optional[str] = None
    eps: float = 0.2
    delta: float = 0.1
    c: Optional[float] = None
    seed: int = 0
    threads: int = 1
    grid_L: Optional[float] = None
    grid_eta: Optional[float] = None
    cell_budget: Optional[int] = None
    output: Optional[str] = None
    cells_path: Optional[str] = None
    num_samples: int = 1
    steps: Optional[int] = None  # 每个 Glauber 样本的步数
    chains: Optional[int] = None  # 同步推进的 Glauber 链数上限
    tilt_eps: Optional[float] = None
    tilt_delta: Optional[float] = None
    tilt_max_iters: Optional[int] = None
    trace: bool = False  # 估计报告中附带每个单元的倾斜场求解轨迹
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 < self.eps < 1.0:
            raise InvalidInputError(f"eps 必须在 (0,1) 内，实际 {self.eps}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidInputError(f"delta 必须在 (0,1) 内，实际 {self.delta}")
        if self.threads < 1:
            raise InvalidInputError(f"threads 必须 ≥ 1，实际 {self.threads}")
        if self.tilt_eps is not None and not 0.0 < self.tilt_eps < 1.0:
            raise InvalidInputError(f"tilt_eps 必须在 (0,1) 内，实际 {self.tilt_eps}")
        if self.tilt_delta is not None and not 0.0 < self.tilt_delta < 1.0:
            raise InvalidInputError(f"tilt_delta 必须在 (0,1) 内，实际 {self.tilt_delta}")
        for name in ("steps", "chains", "tilt_max_iters"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise InvalidInputError(f"{name} 必须 ≥ 1，实际 {value}")
