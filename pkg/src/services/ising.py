#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : ising
@Date       : 2025/7/12 14:10
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 能量计算与穷举基准（配分函数、精确分布、均值协方差、TV 距离）
"""
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from src.config.params import Params
from src.core.exception import CapacityError, InvalidInputError
from src.core.logger import get_logger
from src.core.object import DiscreteDistribution, IsingModel
from src.core.worker_pool import WorkerPool, get_pool
from src.util.utility import enumerate_states, is_spin_config, quadratic_forms, state_index

logger = get_logger("Ising")


def _check_sigma(model: IsingModel, sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape[-1] != model.n:
        raise InvalidInputError(f"σ 长度 {sigma.shape[-1]} 与 n={model.n} 不一致")
    return sigma


def check_capacity(n: int, limit: int = Params.brute_force_max_n) -> None:
    if n > limit:
        raise CapacityError(f"穷举要求 n ≤ {limit}，实际 n={n}", count=1 << n)


def energy(model: IsingModel, sigma: np.ndarray) -> float:
    """½⟨σ,Jσ⟩ + ⟨h,σ⟩"""
    sigma = _check_sigma(model, sigma)
    if sigma.ndim != 1:
        raise InvalidInputError("energy 只接受单个构型，批量请用 energies")
    if not is_spin_config(sigma):
        raise InvalidInputError("σ 的分量必须为 ±1")
    return float(0.5 * sigma @ model.J @ sigma + model.h @ sigma)


def energies(model: IsingModel, states: np.ndarray) -> np.ndarray:
    """批量能量，states 形状 (K, n)"""
    states = _check_sigma(model, states)
    return 0.5 * quadratic_forms(states, model.J) + states @ model.h


def state_chunks(n: int) -> List[Tuple[int, int]]:
    total = 1 << n
    size = 1 << min(n, Params.enumeration_chunk_bits)
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def _chunk_logsumexp(model: IsingModel, bounds: Tuple[int, int]) -> float:
    states = enumerate_states(model.n, *bounds)
    return float(logsumexp(energies(model, states)))


def brute_force_log_partition(model: IsingModel, pool: Optional[WorkerPool] = None) -> float:
    """
    log Σ_σ exp(energy(σ))。按固定大小分块，块内与块间都做 log-sum-exp，
    归约顺序固定，结果与线程数无关。
    """
    check_capacity(model.n)
    partials = get_pool(pool).map_ordered(lambda b: _chunk_logsumexp(model, b), state_chunks(model.n))
    return float(logsumexp(np.asarray(partials)))


def brute_force_log_probs(model: IsingModel, pool: Optional[WorkerPool] = None) -> np.ndarray:
    check_capacity(model.n)
    parts = get_pool(pool).map_ordered(
        lambda b: energies(model, enumerate_states(model.n, *b)), state_chunks(model.n))
    log_weights = np.concatenate(parts)
    return log_weights - logsumexp(log_weights)


def brute_force_distribution(model: IsingModel, pool: Optional[WorkerPool] = None) -> DiscreteDistribution:
    return DiscreteDistribution(brute_force_log_probs(model, pool))


def brute_force_mean_cov(model: IsingModel, pool: Optional[WorkerPool] = None) -> Tuple[np.ndarray, np.ndarray]:
    """精确均值 E[σ] 与协方差 E[σσ^T] − E[σ]E[σ]^T"""
    log_z = brute_force_log_partition(model, pool)

    def moments(bounds: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
        states = enumerate_states(model.n, *bounds)
        weights = np.exp(energies(model, states) - log_z)
        return weights @ states, (states * weights[:, None]).T @ states

    parts = get_pool(pool).map_ordered(moments, state_chunks(model.n))
    mean = np.sum([p[0] for p in parts], axis=0)
    second = np.sum([p[1] for p in parts], axis=0)
    cov = second - np.outer(mean, mean)
    return mean, (cov + cov.T) / 2


def brute_force_mean(model: IsingModel) -> np.ndarray:
    return brute_force_mean_cov(model)[0]


def brute_force_sample(model: IsingModel, num: int, rng: np.random.Generator) -> np.ndarray:
    """按精确分布抽样，返回 (num, n)"""
    probs = brute_force_distribution(model).probs
    idx = rng.choice(probs.shape[0], size=num, p=probs / probs.sum())
    bits = (idx[:, None] >> np.arange(model.n)[None, :]) & 1
    return (2 * bits - 1).astype(float)


def tv_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """½ Σ |p − q|"""
    if p.log_probs.shape != q.log_probs.shape:
        raise InvalidInputError(f"支撑集大小不一致: {p.log_probs.shape[0]} vs {q.log_probs.shape[0]}")
    return float(min(1.0, 0.5 * np.sum(np.abs(p.probs - q.probs))))


def empirical_distribution(samples: np.ndarray, n: Optional[int] = None) -> DiscreteDistribution:
    """样本 (K, n) 的经验分布"""
    samples = np.atleast_2d(np.asarray(samples))
    n = n if n is not None else samples.shape[1]
    counts = np.bincount(state_index(samples), minlength=1 << n).astype(float)
    with np.errstate(divide="ignore"):
        log_probs = np.log(counts) - np.log(counts.sum())
    return DiscreteDistribution(log_probs)
