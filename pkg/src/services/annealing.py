#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : annealing
@Date       : 2025/7/13 15:30
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 模拟退火配分函数估计
log Ẑ_{ℓ+1} = log Ẑ_ℓ + log((1/N) Σ g_ℓ(x_k))，x_k ~ p_ℓ；R 次独立试验逐层取中位数。
"""
import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.core.exception import EstimatorError, IsingError
from src.core.logger import get_logger
from src.core.object import AnnealingSchedule, EstimatorParams
from src.core.rng import make_rng
from src.core.worker_pool import WorkerPool, get_pool
from src.services.glauber import Sampler
from src.util.utility import log_mean_exp

logger = get_logger("Annealing")

# log_g(samples (N, n)) -> (N,)
LogRatio = Callable[[np.ndarray], np.ndarray]


def default_num_samples(M: int, eps: float, sigma2: float = math.e, constant: float = 320.0) -> int:
    """N = ⌈320·σ²·M/ε²⌉"""
    return max(1, math.ceil(constant * sigma2 * M / eps ** 2))


def default_num_trials(delta: float, constant: float = 32.0) -> int:
    """R = ⌈32·log(1/δ)⌉"""
    return max(1, math.ceil(constant * math.log(1.0 / delta)))


def estimate_level_ratio(sampler: Sampler, log_g: LogRatio, N: int, rng: np.random.Generator) -> float:
    """log((1/N) Σ_k exp(log_g(x_k)))"""
    samples = sampler(N, rng)
    return float(log_mean_exp(np.asarray(log_g(samples), dtype=float)))


def _run_trial(
        samplers: Sequence[Sampler],
        log_gs: Sequence[LogRatio],
        params: EstimatorParams,
        seed: int,
        trial: int,
        label: str,
) -> Optional[np.ndarray]:
    """单次试验，返回长度 M+1 的 log Ẑ 阶梯；采样失败返回 None"""
    M = len(samplers)
    ladder = np.empty(M + 1)
    ladder[0] = params.log_Z1
    try:
        for level in range(M):
            rng = make_rng(seed, label, trial, level)
            ladder[level + 1] = ladder[level] + estimate_level_ratio(samplers[level], log_gs[level], params.N, rng)
    except IsingError as e:
        logger.warning(f"退火试验 {trial} 在第 {level + 1} 层失败: {e}")
        return None
    if not np.all(np.isfinite(ladder)):
        logger.warning(f"退火试验 {trial} 出现非有限值，丢弃")
        return None
    return ladder


def anneal_partition(
        schedule: AnnealingSchedule,
        samplers: Sequence[Sampler],
        log_gs: Sequence[LogRatio],
        params: EstimatorParams,
        seed: int,
        pool: Optional[WorkerPool] = None,
        label: str = "annealing",
) -> np.ndarray:
    """
    返回长度 M+1 的数组：下标 0 为 log Z_1，下标 ℓ 为 log Ẑ_{ℓ+1}（逐层中位数）。
    失败试验被丢弃，多数试验失败时抛 EstimatorError。
    """
    M = schedule.M
    if len(samplers) != M or len(log_gs) != M:
        raise EstimatorError(f"需要 {M} 个采样器和比值函数，实际 {len(samplers)} / {len(log_gs)}")
    ladders: List[Optional[np.ndarray]] = get_pool(pool).map_ordered(
        lambda r: _run_trial(samplers, log_gs, params, seed, r, label), range(params.R))
    survivors = [ladder for ladder in ladders if ladder is not None]
    failed = params.R - len(survivors)
    if failed * 2 > params.R:
        raise EstimatorError(f"{failed}/{params.R} 次退火试验失败")
    if failed:
        logger.warning(f"{failed}/{params.R} 次退火试验失败，取剩余试验中位数")
    return np.median(np.vstack(survivors), axis=0)


def anneal_trials(
        samplers: Sequence[Sampler],
        log_gs: Sequence[LogRatio],
        params: EstimatorParams,
        seed: int,
        label: str = "annealing",
) -> List[Optional[np.ndarray]]:
    """逐次试验的阶梯（诊断用）"""
    return [_run_trial(samplers, log_gs, params, seed, r, label) for r in range(params.R)]
