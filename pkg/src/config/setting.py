#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : setting
@Date       : 2025/6/2 10:32
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 从 ConfigManager 构造各算法的参数对象，库函数不直接读取全局配置
"""
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional

from src.config.config_manager import ConfigManager
from src.config.constant import GlauberFormula, SampleMethod


def _pick(cm: Optional[ConfigManager], key: str, default: Any) -> Any:
    if cm is None:
        return default
    value = cm.get(key, default)
    return default if value is None and default is not None else value


@dataclass
class TiltSettings:
    """两阶段随机梯度（2-RSG）求解倾斜场的参数"""

    eps: Optional[float] = None  # None 时取估计精度 eps
    delta: float = 0.1
    max_iters: int = 2000
    iteration_constant: float = 10.0
    batch_size: int = 32  # 每条轨迹的小批量链数
    inner_steps: Optional[int] = None  # 每次梯度调用的 Glauber 步数，None 按步数公式
    glauber_constant: float = 20.0
    phase_two_constant: float = 64.0
    phase_two_cap: int = 4096
    retries: int = 1
    polish: bool = True  # 最优候选的不动点更新作为额外候选
    record_trace: bool = False
    trace_every: int = 10

    @classmethod
    def from_config(cls, cm: Optional[ConfigManager], **overrides: Any) -> "TiltSettings":
        settings = cls(
            eps=_pick(cm, "tilt.eps", None),
            delta=float(_pick(cm, "tilt.delta", 0.1)),
            max_iters=int(_pick(cm, "tilt.max_iters", 2000)),
            iteration_constant=float(_pick(cm, "tilt.iteration_constant", 10.0)),
            batch_size=int(_pick(cm, "tilt.batch_size", 32)),
            inner_steps=_pick(cm, "tilt.inner_steps", None),
            glauber_constant=float(_pick(cm, "glauber.constant", 20.0)),
            phase_two_constant=float(_pick(cm, "tilt.phase_two_constant", 64.0)),
            phase_two_cap=int(_pick(cm, "tilt.phase_two_cap", 4096)),
            retries=int(_pick(cm, "tilt.retries", 1)),
            polish=bool(_pick(cm, "tilt.polish", True)),
            record_trace=bool(_pick(cm, "tilt.record_trace", False)),
            trace_every=int(_pick(cm, "tilt.trace_every", 10)),
        )
        return _apply(settings, overrides)


@dataclass
class EstimationSettings:
    """网格 + 退火估计的全部参数"""

    eps: float = 0.2
    delta: float = 0.1
    c: Optional[float] = None
    seed: int = 0
    threads: int = 1
    glauber_constant: float = 20.0
    glauber_formula: GlauberFormula = GlauberFormula.PSD
    glauber_steps: Optional[int] = None  # 直接给定每个样本的步数
    glauber_chains: Optional[int] = None  # 同步推进的链数上限
    sigma2: float = math.e
    sample_constant: float = 320.0
    trials_constant: float = 32.0
    num_samples: Optional[int] = None
    num_trials: Optional[int] = None
    max_samples: Optional[int] = None
    grid_L: Optional[float] = None
    grid_eta: Optional[float] = None
    cell_budget: int = 100_000
    force_grid: bool = False
    max_failed_cell_fraction: float = 0.01
    tilt: TiltSettings = field(default_factory=TiltSettings)

    @property
    def tilt_eps(self) -> float:
        return self.tilt.eps if self.tilt.eps is not None else self.eps

    @classmethod
    def from_config(cls, cm: Optional[ConfigManager], **overrides: Any) -> "EstimationSettings":
        c = _pick(cm, "spectral.c", None)
        settings = cls(
            eps=float(_pick(cm, "estimate.eps", 0.2)),
            delta=float(_pick(cm, "estimate.delta", 0.1)),
            c=None if c is None else float(c),
            seed=int(_pick(cm, "runtime.seed", 0)),
            threads=int(_pick(cm, "runtime.threads", 1)),
            glauber_constant=float(_pick(cm, "glauber.constant", 20.0)),
            glauber_formula=GlauberFormula(_pick(cm, "glauber.formula", "psd")),
            glauber_steps=_pick(cm, "glauber.steps", None),
            glauber_chains=_pick(cm, "glauber.chains", None),
            sigma2=float(_pick(cm, "annealing.sigma2", math.e)),
            sample_constant=float(_pick(cm, "annealing.sample_constant", 320.0)),
            trials_constant=float(_pick(cm, "annealing.trials_constant", 32.0)),
            num_samples=_pick(cm, "annealing.num_samples", None),
            num_trials=_pick(cm, "annealing.num_trials", None),
            max_samples=_pick(cm, "annealing.max_samples", None),
            grid_L=_pick(cm, "grid.L", None),
            grid_eta=_pick(cm, "grid.eta", None),
            cell_budget=int(_pick(cm, "grid.cell_budget", 100_000)),
            force_grid=bool(_pick(cm, "grid.force", False)),
            max_failed_cell_fraction=float(_pick(cm, "grid.max_failed_cell_fraction", 0.01)),
            tilt=TiltSettings.from_config(cm),
        )
        return _apply(settings, overrides)


@dataclass
class TemperingSettings:
    """模拟回火采样参数"""

    steps_constant: float = 4.0
    steps: Optional[int] = None  # 直接给定每次试验的回火步数
    trial_budget_factor: float = 64.0
    max_trials: Optional[int] = None
    batch_size: int = 64
    strict_accept: bool = False
    estimate_eps: float = math.log(2.0)
    method: SampleMethod = SampleMethod.TEMPERING

    @classmethod
    def from_config(cls, cm: Optional[ConfigManager], **overrides: Any) -> "TemperingSettings":
        settings = cls(
            steps_constant=float(_pick(cm, "tempering.steps_constant", 4.0)),
            steps=_pick(cm, "tempering.steps", None),
            trial_budget_factor=float(_pick(cm, "tempering.trial_budget_factor", 64.0)),
            max_trials=_pick(cm, "tempering.max_trials", None),
            batch_size=int(_pick(cm, "tempering.batch_size", 64)),
            strict_accept=bool(_pick(cm, "tempering.strict_accept", False)),
            estimate_eps=float(_pick(cm, "tempering.estimate_eps", math.log(2.0))),
            method=SampleMethod(_pick(cm, "tempering.method", "tempering")),
        )
        return _apply(settings, overrides)


def _apply(settings: Any, overrides: Dict[str, Any]) -> Any:
    """覆盖非 None 的字段（命令行参数优先）"""
    names = {f.name for f in fields(settings)}
    values = {k: v for k, v in overrides.items() if v is not None and k in names}
    return replace(settings, **values) if values else settings
