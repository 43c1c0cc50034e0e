#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : glauber
@Date       : 2025/7/12 16:40
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 单点热浴 Glauber 动力学
每步均匀选一个坐标 i，以 p(σ^(i)) / (p(σ^(i)) + p(σ)) 的概率翻转。
批量版本让 K 条独立链同步推进，每条链可有自己的外场与耦合缩放。
"""
import math
from typing import Callable, Optional

import numpy as np

from src.config.constant import GlauberFormula
from src.config.params import Params
from src.core.exception import CapacityError, InvalidInputError
from src.core.logger import get_logger
from src.core.object import ChainConfig, IsingModel
from src.core.rng import make_rng
from src.services.ising import brute_force_distribution
from src.util.utility import logistic

logger = get_logger("Glauber")

# sampler(num, rng) -> (num, n) 的 ±1 数组
Sampler = Callable[[int, np.random.Generator], np.ndarray]

_BLOCK = 1024


def flip_probability(model: IsingModel, sigma: np.ndarray, i: int) -> float:
    """ΔE = −2σ_i(Jσ)_i + 2J_ii − 2σ_i h_i，返回 logistic(ΔE)"""
    if not 0 <= i < model.n:
        raise InvalidInputError(f"坐标 {i} 超出 0..{model.n - 1}")
    sigma = np.asarray(sigma, dtype=float)
    delta = -2.0 * sigma[i] * (model.J[i] @ sigma) + 2.0 * model.J[i, i] - 2.0 * sigma[i] * model.h[i]
    return float(logistic(delta))


def uniform_spins(num: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return np.where(rng.random((num, n)) < 0.5, 1.0, -1.0)


def sample_product(field: np.ndarray, rng: np.random.Generator, num: Optional[int] = None) -> np.ndarray:
    """
    独立自旋：σ_i = +1 的概率为 e^{h_i}/(e^{h_i}+e^{-h_i}) = logistic(2h_i)。
    field 可为 (n,) 或 (K, n)。
    """
    field = np.asarray(field, dtype=float)
    shape = field.shape if num is None else (num, field.shape[-1])
    p_up = logistic(2.0 * field)
    return np.where(rng.random(shape) < p_up, 1.0, -1.0)


def glauber_run_batch(
        J: np.ndarray,
        fields: np.ndarray,
        sigma0: np.ndarray,
        steps: int,
        rng: np.random.Generator,
        betas: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    K 条链各走 steps 步，返回新的 (K, n) 构型（不修改 sigma0）。
    链 k 的目标分布为 p_{β_k·J, fields_k}。
    """
    sigma = np.array(sigma0, dtype=float, copy=True)
    if sigma.ndim == 1:
        sigma = sigma[None, :]
    K, n = sigma.shape
    fields = np.broadcast_to(np.asarray(fields, dtype=float), (K, n))
    scale = np.ones(K) if betas is None else np.broadcast_to(np.asarray(betas, dtype=float), (K,))
    diag = np.diag(J)
    rows = np.arange(K)

    done = 0
    while done < steps:
        block = min(_BLOCK, steps - done)
        sites = rng.integers(0, n, size=(block, K))
        uniforms = rng.random((block, K))
        for t in range(block):
            site = sites[t]
            s = sigma[rows, site]
            local = np.einsum("kj,kj->k", J[site], sigma) - diag[site] * s
            delta = -2.0 * s * (scale * local + fields[rows, site])
            flip = uniforms[t] < logistic(delta)
            sigma[rows[flip], site[flip]] = -s[flip]
        done += block
    return sigma


def glauber_run(model: IsingModel, cfg: ChainConfig) -> np.ndarray:
    """单链：均匀随机（或给定）初始，走 cfg.steps 步，返回最终构型"""
    rng = make_rng(cfg.seed, "glauber-run")
    if cfg.initial is None:
        sigma0 = uniform_spins(1, model.n, rng)
    else:
        sigma0 = np.asarray(cfg.initial, dtype=float).reshape(1, model.n)
    return glauber_run_batch(model.J, model.h, sigma0, cfg.steps, rng)[0]


def glauber_steps(
        n: int,
        eps: float,
        bulk_norm: float = 1.0,
        constant: float = 20.0,
        formula: GlauberFormula = GlauberFormula.AUTO,
) -> int:
    """
    PSD:  ⌈C·n²·log(n/ε)⌉，适用于 0 ⪯ J ⪯ I
    BULK: ⌈C·n·log(n/ε)/(1−‖J‖)⌉，要求 ‖J‖ < 1
    """
    log_term = max(math.log(max(n, 1) / eps), 1.0)
    if formula == GlauberFormula.AUTO:
        formula = GlauberFormula.BULK if bulk_norm < 1.0 else GlauberFormula.PSD
    if formula == GlauberFormula.BULK:
        if bulk_norm >= 1.0:
            raise InvalidInputError(f"BULK 步数公式要求 ‖J‖ < 1，实际 {bulk_norm}")
        return max(1, math.ceil(constant * n * log_term / (1.0 - bulk_norm)))
    return max(1, math.ceil(constant * n * n * log_term))


def transition_matrix(model: IsingModel) -> np.ndarray:
    """显式一步转移核，行和为 1"""
    n = model.n
    if n > Params.transition_max_n:
        raise CapacityError(f"显式转移矩阵要求 n ≤ {Params.transition_max_n}，实际 n={n}", count=1 << n)
    size = 1 << n
    idx = np.arange(size)
    states = (2 * ((idx[:, None] >> np.arange(n)[None, :]) & 1) - 1).astype(float)
    local = states @ model.J - states * np.diag(model.J)[None, :]
    delta = -2.0 * states * (local + model.h[None, :])
    flip_probs = logistic(delta) / n

    K = np.zeros((size, size))
    for i in range(n):
        K[idx, idx ^ (1 << i)] += flip_probs[:, i]
    K[idx, idx] = 1.0 - flip_probs.sum(axis=1)
    return K


class GlauberSampler:
    """
    固定模型的 Glauber 采样器：每个样本从均匀随机构型出发走 steps 步。
    """

    def __init__(self, J: np.ndarray, field: np.ndarray, steps: int, beta: float = 1.0,
                 chains: Optional[int] = None) -> None:
        self.J = np.asarray(J, dtype=float)
        self.field = np.asarray(field, dtype=float)
        self.steps = int(steps)
        self.beta = float(beta)
        self.chains = chains  # 同步推进的链数上限，None 表示一次全部

    def __call__(self, num: int, rng: np.random.Generator) -> np.ndarray:
        if self.beta == 0.0:
            return sample_product(self.field, rng, num)
        width = num if not self.chains else min(int(self.chains), num)
        batches = []
        for start in range(0, num, max(width, 1)):
            size = min(width, num - start)
            sigma0 = uniform_spins(size, self.field.shape[-1], rng)
            batches.append(glauber_run_batch(self.J, self.field, sigma0, self.steps, rng, betas=np.full(size, self.beta)))
        return np.vstack(batches) if batches else np.empty((0, self.field.shape[-1]))


class ProductSampler:
    """零耦合的精确采样器"""

    def __init__(self, field: np.ndarray) -> None:
        self.field = np.asarray(field, dtype=float)

    def __call__(self, num: int, rng: np.random.Generator) -> np.ndarray:
        return sample_product(self.field, rng, num)


class ExactSampler:
    """穷举精确采样（n ≤ 25，测试与对照用）"""

    def __init__(self, model: IsingModel) -> None:
        self.model = model
        self.probs = brute_force_distribution(model).probs

    def __call__(self, num: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(self.probs.shape[0], size=num, p=self.probs / self.probs.sum())
        bits = (idx[:, None] >> np.arange(self.model.n)[None, :]) & 1
        return (2 * bits - 1).astype(float)
