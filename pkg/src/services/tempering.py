#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : tempering
@Date       : 2025/7/15 10:00
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 模拟回火采样器
扩展状态空间 {1..M} × Grid × {±1}^n 上的链，平稳分布
π(ℓ, y*, σ) ∝ exp(β_ℓ·½⟨σ,J_perp σ⟩ + ⟨h(y*),σ⟩) / Ẑ_ℓ(y*)；
链停在 ℓ = M 时按 g_top 做一次拒绝，接受的 σ 近似服从 p_{J,h}。
"""
import math
from dataclasses import replace
from typing import Any, Callable, List, Optional, Tuple, TypeVar

import numpy as np

from src.config.constant import SampleMethod
from src.config.params import Params
from src.config.setting import EstimationSettings, TemperingSettings
from src.core.exception import (CapacityError, ConsistencyError, ContractViolationError, InvalidInputError,
                                SamplerFailureError)
from src.core.logger import get_logger
from src.core.object import CellData, EstimateResult, GridSpec, IsingModel, SamplerReport, SpectralSplit, TemperingState
from src.core.rng import make_rng
from src.core.worker_pool import WorkerPool, get_pool
from src.services.glauber import glauber_run_batch, sample_product, transition_matrix
from src.services.hs_grid import build_grid, estimate_all_cells, level_steps, log_gaussian_box
from src.services.ising import brute_force_distribution
from src.services.spectral import decompose
from src.util.utility import logistic, quadratic_forms

logger = get_logger("Tempering")

_LOG_4E = math.log(4.0) + 1.0

T = TypeVar("T")


def tempering_steps(n: int, d: int, op_norm: float, eps: float, constant: float = 4.0) -> int:
    """T = ⌈C·n⁴·max(d,1)·log(n·max(‖J‖,1)/ε)⌉"""
    return max(1, math.ceil(constant * n ** 4 * max(d, 1) * math.log(n * max(op_norm, 1.0) / eps)))


def trial_budget(n: int, c_trace: float, num_cells: int, factor: float = 64.0) -> int:
    """单个样本的试验上限 64·n·e^{c·Tr(J_minus)}·|Grid|"""
    return max(1, math.ceil(factor * n * math.exp(min(c_trace, 700.0)) * num_cells))


class TemperingKernel:
    """
    由估计结果构造的回火转移核。被排除的单元不进入状态空间。
    log_Z[c, ℓ-1] = log Ẑ_ℓ(y*_c)，ℓ = 1..M+1。
    """

    def __init__(self, split: SpectralSplit, grid: GridSpec, cells: List[CellData], strict: bool = False) -> None:
        active = [cell for cell in cells if not cell.excluded]
        if not active:
            raise InvalidInputError("没有可用的网格单元")
        self.split = split
        self.grid = grid
        self.cells = active
        self.strict = strict
        self.n = split.n
        self.log_Z = np.vstack([cell.log_Z for cell in active])
        self.M = self.log_Z.shape[1] - 1
        self.C = len(active)
        self.fields = np.vstack([cell.field for cell in active])
        self.tilts = np.vstack([cell.tilt for cell in active])
        self.y_stars = np.vstack([np.reshape(cell.y_star, (1, -1)) for cell in active])
        self.betas = np.arange(self.M, dtype=float) / self.n
        self.J_perp = split.J_perp
        self.diag = np.diag(split.J_perp)
        self.log_top_max = float(self.log_Z[:, self.M].max())
        self.violations = 0

    def _half_quad(self, sigma: np.ndarray) -> np.ndarray:
        return 0.5 * quadratic_forms(sigma, self.J_perp)

    def level_log_ratio(self, level: np.ndarray, target: np.ndarray, cell: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """log q_{target}(σ)/q_{level}(σ) = (β_t − β_ℓ)·½⟨σ,J_perp σ⟩ + log Ẑ_ℓ − log Ẑ_t"""
        return ((self.betas[target - 1] - self.betas[level - 1]) * self._half_quad(sigma)
                + self.log_Z[cell, level - 1] - self.log_Z[cell, target - 1])

    def step_batch(self, level: np.ndarray, cell: np.ndarray, sigma: np.ndarray, rng: np.random.Generator) -> None:
        """K 条链各走一步（原地修改）"""
        K, n = sigma.shape
        rows = np.arange(K)
        r = rng.random(K)
        u = rng.random(K)
        coin = rng.random(K)

        up = (r < 0.25) & (level < self.M)
        if np.any(up):
            idx = rows[up]
            log_acc = self.level_log_ratio(level[idx], level[idx] + 1, cell[idx], sigma[idx])
            level[idx[np.log(u[idx]) < log_acc]] += 1

        down = (r >= 0.25) & (r < 0.5) & (level > 1)
        if np.any(down):
            idx = rows[down]
            log_acc = self.level_log_ratio(level[idx], level[idx] - 1, cell[idx], sigma[idx])
            level[idx[np.log(u[idx]) < log_acc]] -= 1

        within = r >= 0.5
        resample = within & (level == 1) & (coin < 0.5)
        if np.any(resample):
            idx = rows[resample]
            cell[idx] = rng.integers(0, self.C, size=idx.shape[0])
            sigma[idx] = sample_product(self.fields[cell[idx]], rng)

        if np.any(within):
            idx = rows[within]
            site = rng.integers(0, n, size=idx.shape[0])
            flip_u = rng.random(idx.shape[0])
            s = sigma[idx, site]
            local = np.einsum("kj,kj->k", self.J_perp[site], sigma[idx]) - self.diag[site] * s
            delta = -2.0 * s * (self.betas[level[idx] - 1] * local + self.fields[cell[idx], site])
            flip = flip_u < logistic(delta)
            sigma[idx[flip], site[flip]] = -s[flip]

    def tempering_step(self, state: TemperingState, rng: np.random.Generator) -> TemperingState:
        level = np.array([state.level])
        cell = np.array([state.cell])
        sigma = np.array(state.sigma, dtype=float).reshape(1, self.n)
        self.step_batch(level, cell, sigma, rng)
        return TemperingState(level=int(level[0]), cell=int(cell[0]), sigma=sigma[0])

    def initial_batch(self, K: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """ℓ = 1，单元均匀，σ 按乘积分布"""
        cell = rng.integers(0, self.C, size=K)
        sigma = sample_product(self.fields[cell], rng)
        return np.ones(K, dtype=np.int64), cell, sigma

    def final_log_accept(self, cell: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """
        log[Ẑ_M(y*)·g_top(σ) / (4e·max Ẑ_{M+1}·e^{c·Tr(J_minus)+1})]，未截断
        """
        sigma = np.atleast_2d(sigma)
        cell = np.atleast_1d(cell)
        return (-_LOG_4E - self.log_top_max - (self.split.c_trace + 1.0)
                + self.log_Z[cell, self.M - 1] + self.log_g_top(cell, sigma))

    def log_g_top(self, cell: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """逐链的 log g_top，链 k 用自己所在单元的倾斜场与中心"""
        value = -0.5 * quadratic_forms(sigma, self.split.J_minus) - np.einsum("kj,kj->k", sigma, self.tilts[cell])
        if self.split.d > 0:
            value = value + log_gaussian_box(sigma @ self.split.XQ, self.y_stars[cell], self.grid.eta, self.n)
        return value

    def final_accept_log_prob(self, state: TemperingState) -> float:
        if state.level != self.M:
            raise InvalidInputError(f"最终接受只在 ℓ = M = {self.M} 时进行，当前 ℓ = {state.level}")
        return float(self.clamp(self.final_log_accept(np.array([state.cell]), state.sigma))[0])

    def clamp(self, log_acc: np.ndarray) -> np.ndarray:
        """严格模式下 > 0 抛 ConsistencyError，否则截断为 0 并计数"""
        over = log_acc > 0.0
        if np.any(over):
            worst = float(log_acc.max())
            if self.strict:
                raise ConsistencyError(f"最终接受对数概率 {worst:.4g} > 0，Ẑ 估计不一致")
            self.violations += int(over.sum())
            logger.warning(f"{int(over.sum())} 个最终接受概率超过 1（最大对数值 {worst:.4g}），已截断")
        return np.minimum(log_acc, 0.0)

    # ------------------------------------------------------------------ 显式核（小规模对照）

    def state_space(self) -> List[Tuple[int, int, int]]:
        return [(level, c, s) for level in range(1, self.M + 1) for c in range(self.C) for s in range(1 << self.n)]

    def transition_matrix(self) -> np.ndarray:
        """扩展状态空间上的显式一步转移核，状态编号 ((ℓ−1)·C + c)·2^n + σ"""
        n = self.n
        if n > Params.tempering_kernel_max_n:
            raise CapacityError(f"显式回火核要求 n ≤ {Params.tempering_kernel_max_n}，实际 n={n}")
        size = 1 << n
        total = self.M * self.C * size
        idx = np.arange(size)
        states = (2 * ((idx[:, None] >> np.arange(n)[None, :]) & 1) - 1).astype(float)
        half_quad = self._half_quad(states)

        def offset(level: int, c: int) -> int:
            return ((level - 1) * self.C + c) * size

        flips = {}
        for level in range(1, self.M + 1):
            for c in range(self.C):
                model = IsingModel(self.betas[level - 1] * self.J_perp, self.fields[c])
                flips[(level, c)] = transition_matrix(model)
        products = [brute_force_distribution(IsingModel(np.zeros((n, n)), self.fields[c])).probs for c in range(self.C)]

        P = np.zeros((total, total))
        for level in range(1, self.M + 1):
            for c in range(self.C):
                base = offset(level, c)
                rows = base + idx
                for target, weight in ((level + 1, 0.25), (level - 1, 0.25)):
                    if 1 <= target <= self.M:
                        log_acc = ((self.betas[target - 1] - self.betas[level - 1]) * half_quad
                                   + self.log_Z[c, level - 1] - self.log_Z[c, target - 1])
                        acc = np.exp(np.minimum(log_acc, 0.0))
                        P[rows, offset(target, c) + idx] += weight * acc
                        P[rows, rows] += weight * (1.0 - acc)
                    else:
                        P[rows, rows] += weight
                glauber = flips[(level, c)]
                if level == 1:
                    P[base:base + size, base:base + size] += 0.25 * glauber
                    for c2 in range(self.C):
                        block = products[c2] @ flips[(1, c2)] / self.C
                        P[base:base + size, offset(1, c2):offset(1, c2) + size] += 0.25 * block[None, :]
                else:
                    P[base:base + size, base:base + size] += 0.5 * glauber
        return P

    def target_distribution(self) -> np.ndarray:
        """∝ exp(β_ℓ·½⟨σ,J_perp σ⟩ + ⟨h(y*),σ⟩) / Ẑ_ℓ(y*)"""
        n = self.n
        idx = np.arange(1 << n)
        states = (2 * ((idx[:, None] >> np.arange(n)[None, :]) & 1) - 1).astype(float)
        half_quad = self._half_quad(states)
        logs = []
        for level in range(1, self.M + 1):
            for c in range(self.C):
                logs.append(self.betas[level - 1] * half_quad + states @ self.fields[c] - self.log_Z[c, level - 1])
        logs = np.concatenate(logs)
        weights = np.exp(logs - logs.max())
        return weights / weights.sum()


def tempering_transition_matrix(kernel: TemperingKernel) -> np.ndarray:
    return kernel.transition_matrix()


def stationary_distribution(P: np.ndarray, tol: float = 1e-14, max_iter: int = 64) -> np.ndarray:
    """幂迭代（平方加速）求平稳分布"""
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    power = P.copy()
    for _ in range(max_iter):
        nxt = pi @ power
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
        power = power @ power
    return pi


def rejection_sample_generic(
        proposal_sampler: Callable[[np.random.Generator], T],
        log_density_ratio: Callable[[T], float],
        log_C: float,
        eps: float,
        rng: np.random.Generator,
        max_trials: Optional[int] = None,
) -> Tuple[T, int]:
    """
    从提议分布抽样，以 exp(log_ratio(x) − log_C) 的概率接受。
    返回 (样本, 试验次数)；观测到比值超过 log_C 时抛 ContractViolationError。
    """
    if max_trials is None:
        max_trials = max(1, math.ceil(2.0 * math.exp(log_C) * math.log(1.0 / eps)))
    for trial in range(1, max_trials + 1):
        x = proposal_sampler(rng)
        log_ratio = float(log_density_ratio(x))
        if log_ratio > log_C + 1e-12:
            raise ContractViolationError(f"密度比 {log_ratio:.6g} 超过上界 {log_C:.6g}")
        if math.log(rng.random()) < log_ratio - log_C:
            return x, trial
    raise SamplerFailureError(f"{max_trials} 次试验内未接受", diagnostics={"trials": max_trials, "log_C": log_C})


def _tempering_batch(kernel: TemperingKernel, seed: int, batch: int, size: int, steps: int
                     ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """一批独立试验：返回 (最终层级, 单元, σ, 最终接受对数概率)"""
    rng = make_rng(seed, "tempering-batch", batch)
    level, cell, sigma = kernel.initial_batch(size, rng)
    for _ in range(steps):
        kernel.step_batch(level, cell, sigma, rng)
    log_acc = np.full(size, -np.inf)
    top = level == kernel.M
    if np.any(top):
        log_acc[top] = kernel.final_log_accept(cell[top], sigma[top])
    log_u = np.log(rng.random(size))
    return level, sigma, log_acc, log_u


def _direct_batch(kernel: TemperingKernel, seed: int, batch: int, size: int, steps: int
                  ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """直接选单元：y* ∝ Ẑ_{M+1}(y*)，σ ~ p_M(y*)，按 Ẑ_M·g_top / (4·Ẑ_{M+1}·e^{cTr+2}) 接受"""
    rng = make_rng(seed, "direct-batch", batch)
    weights = np.exp(kernel.log_Z[:, kernel.M] - kernel.log_top_max)
    cell = rng.choice(kernel.C, size=size, p=weights / weights.sum())
    sigma = sample_product(kernel.fields[cell], rng)
    if np.any(kernel.J_perp) and steps > 0:
        sigma = glauber_run_batch(kernel.J_perp, kernel.fields[cell], sigma, steps, rng)
    log_acc = (kernel.log_Z[cell, kernel.M - 1] + kernel.log_g_top(cell, sigma) - math.log(4.0)
               - kernel.log_Z[cell, kernel.M] - kernel.split.c_trace - 2.0)
    log_u = np.log(rng.random(size))
    return np.full(size, kernel.M), sigma, log_acc, log_u


def run_sampler(
        kernel: TemperingKernel,
        num_samples: int,
        seed: int,
        steps: int,
        max_trials: int,
        batch_size: int = 64,
        method: SampleMethod = SampleMethod.TEMPERING,
        pool: Optional[WorkerPool] = None,
) -> SamplerReport:
    """
    按批次运行独立试验，按试验编号顺序收集被接受的样本。
    批次 b 的随机流只由 (seed, b) 决定，结果与线程数无关。
    """
    pool = get_pool(pool)
    batch_fn = _tempering_batch if method == SampleMethod.TEMPERING else _direct_batch
    samples: List[np.ndarray] = []
    sample_trials: List[int] = []
    trials = 0
    since_last = 0
    reached_top = 0
    next_batch = 0
    kernel.violations = 0

    while len(samples) < num_samples:
        window = list(range(next_batch, next_batch + pool.threads))
        next_batch += len(window)
        results = pool.map_ordered(lambda b: batch_fn(kernel, seed, b, batch_size, steps), window)
        for level, sigma, log_acc, log_u in results:
            top = level == kernel.M
            if np.any(top):
                log_acc = log_acc.copy()
                log_acc[top] = kernel.clamp(log_acc[top])
            for k in range(level.shape[0]):
                trials += 1
                since_last += 1
                reached_top += int(top[k])
                if top[k] and log_u[k] < log_acc[k]:
                    samples.append(sigma[k].copy())
                    sample_trials.append(since_last)
                    since_last = 0
                    if len(samples) == num_samples:
                        break
                elif since_last >= max_trials:
                    raise SamplerFailureError(
                        f"连续 {since_last} 次试验未得到样本",
                        diagnostics={"trials": trials, "max_trials": max_trials, "reached_top": reached_top,
                                     "samples": len(samples), "steps_per_trial": steps})
            if len(samples) == num_samples:
                break

    steps_per_trial = steps if method == SampleMethod.TEMPERING else steps + 1
    report = SamplerReport(samples=samples, trials=trials, steps_total=trials * steps_per_trial,
                           accept_violations=kernel.violations, method=method, sample_trials=sample_trials,
                           diagnostics={"reached_top": reached_top, "max_trials": max_trials,
                                        "steps_per_trial": steps, "levels": kernel.M, "cells": kernel.C})
    logger.info(f"采样完成: {len(samples)} 个样本, {trials} 次试验, 接受率 {report.acceptance_rate:.4g}")
    return report


def sample(
        model: IsingModel,
        eps: float,
        delta: float,
        seed: int,
        num_samples: int = 1,
        precomputed: Optional[EstimateResult] = None,
        settings: Optional[TemperingSettings] = None,
        estimation: Optional[EstimationSettings] = None,
        pool: Optional[WorkerPool] = None,
) -> SamplerReport:
    """
    若未提供单元估计，先以 ε = ln 2 的精度运行 estimate_all_cells，
    再运行回火（或直接选单元）采样。
    """
    settings = settings or TemperingSettings()
    if not 0.0 < eps < 1.0:
        raise InvalidInputError(f"eps 必须在 (0,1) 内，实际 {eps}")
    if num_samples < 0:
        raise InvalidInputError(f"样本数不能为负: {num_samples}")

    if num_samples == 0:
        return SamplerReport(samples=[], trials=0, steps_total=0, method=settings.method)

    est = replace(estimation or EstimationSettings(), eps=settings.estimate_eps, delta=delta, seed=seed)
    if precomputed is None:
        split = decompose(model.J, est.c)
        grid = build_grid(split, est.eps, model.n, est.grid_L, est.grid_eta, est.cell_budget, est.force_grid)
        precomputed = estimate_all_cells(model, split, grid, est, seed=seed, pool=pool)
    split, grid = precomputed.split, precomputed.grid
    if split.n != model.n:
        raise InvalidInputError(f"单元估计的 n={split.n} 与模型 n={model.n} 不一致")
    kernel = TemperingKernel(split, grid, precomputed.cells, strict=settings.strict_accept)

    if settings.method == SampleMethod.TEMPERING:
        steps = settings.steps or tempering_steps(model.n, split.d, split.op_norm, eps, settings.steps_constant)
    else:
        steps = settings.steps or level_steps(split, replace(est, eps=eps), kernel.M)
    max_trials = settings.max_trials or trial_budget(model.n, split.c_trace, grid.num_cells,
                                                     settings.trial_budget_factor)
    logger.info(f"开始采样: 方法={settings.method.value}, 每次试验 {steps} 步, 试验上限 {max_trials}")
    return run_sampler(kernel, num_samples, seed, int(steps), int(max_trials), settings.batch_size,
                       settings.method, pool)


def sample_direct(model: IsingModel, eps: float, delta: float, seed: int, num_samples: int = 1,
                  precomputed: Optional[EstimateResult] = None, **kwargs: Any) -> SamplerReport:
    """不经回火链，直接按 Ẑ_{M+1} 选单元再做最终拒绝"""
    settings = replace(kwargs.pop("settings", None) or TemperingSettings(), method=SampleMethod.DIRECT)
    return sample(model, eps, delta, seed, num_samples, precomputed, settings=settings, **kwargs)


def level_marginal(kernel: TemperingKernel, pi: np.ndarray) -> np.ndarray:
    """扩展分布在 (ℓ, y*) 上的边缘，形状 (M, C)"""
    return pi.reshape(kernel.M, kernel.C, 1 << kernel.n).sum(axis=2)


def tempering_step(state: TemperingState, kernel: TemperingKernel, rng: np.random.Generator) -> TemperingState:
    return kernel.tempering_step(state, rng)


def final_accept_log_prob(kernel: TemperingKernel, state: TemperingState) -> float:
    """ℓ = M 时的最终接受对数概率（按核的严格/截断策略处理 > 0 的情况）"""
    return kernel.final_accept_log_prob(state)
