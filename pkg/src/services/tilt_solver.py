#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : tilt_solver
@Date       : 2025/7/13 10:15
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 负尖峰的倾斜场求解
在 G(u) = log E_{P_{J_perp, b}}[exp(−⟨u, J_minus σ⟩)] + ½⟨u, J_minus u⟩ 上做两阶段随机梯度（2-RSG），
临界点满足 u = E_{P_{J_perp, b − J_minus u}}[σ]，输出倾斜场 −J_minus·u。
"""
import math
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.config.setting import TiltSettings
from src.core.exception import InvalidInputError
from src.core.logger import get_logger
from src.core.object import IsingModel, TiltProblem, TiltSolution
from src.core.rng import make_rng
from src.services.glauber import glauber_run_batch, glauber_steps, uniform_spins
from src.services.ising import brute_force_log_partition, brute_force_mean
from src.util.utility import log_mean_exp, quadratic_forms

logger = get_logger("TiltSolver")


def _is_zero(A: np.ndarray) -> bool:
    return not np.any(A)


def _op_norm(A: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(A)))) if A.size else 0.0


def regularize(problem: TiltProblem) -> TiltProblem:
    """
    J_minus 最小特征值低于 ε/(c·n) 时加上 (ε/(c·n))·I，保证严格正定。
    只作用于求解器内部；对角平移不改变分布。
    """
    if _is_zero(problem.J_minus):
        return problem
    if math.isinf(problem.c):
        raise InvalidInputError("J_minus 非零时 c 必须有限")
    floor = problem.epsilon / (problem.c * problem.n)
    lam_min = float(np.linalg.eigvalsh(problem.J_minus).min())
    if lam_min >= floor:
        return problem
    return TiltProblem(
        J_perp=problem.J_perp,
        J_minus=problem.J_minus + floor * np.eye(problem.n),
        base_field=problem.base_field,
        c=problem.c,
        epsilon=problem.epsilon,
        delta=problem.delta,
    )


def g_value_and_gradient_oracle(
        problem: TiltProblem,
        u: np.ndarray,
        sampler: Callable[[np.ndarray], np.ndarray],
) -> np.ndarray:
    """
    随机梯度 −J_minus·(σ − u)，σ 由 sampler 从 P_{J_perp, b − J_minus u} 抽取。
    sampler(field) 返回一个构型，或 (B, n) 的一批构型（取均值）。
    """
    u = np.asarray(u, dtype=float)
    if _is_zero(problem.J_minus):
        return np.zeros_like(u)
    sigma = np.asarray(sampler(problem.tilted_field(u)), dtype=float)
    if sigma.ndim == 2:
        sigma = sigma.mean(axis=0)
    return -problem.J_minus @ (sigma - u)


def tilted_mean(problem: TiltProblem, u: np.ndarray) -> np.ndarray:
    """穷举 E_{P_{J_perp, b − J_minus u}}[σ]"""
    return brute_force_mean(IsingModel(problem.J_perp, problem.tilted_field(u)))


def exact_gradient(problem: TiltProblem, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return -problem.J_minus @ (tilted_mean(problem, u) - u)


def exact_G(problem: TiltProblem, u: np.ndarray) -> float:
    """G(u) = log Z(J_perp, b − J_minus u) − log Z(J_perp, b) + ½⟨u, J_minus u⟩"""
    u = np.asarray(u, dtype=float)
    tilted = brute_force_log_partition(IsingModel(problem.J_perp, problem.tilted_field(u)))
    base = brute_force_log_partition(IsingModel(problem.J_perp, problem.base_field))
    return float(tilted - base + 0.5 * u @ problem.J_minus @ u)


def fixed_point_residual(problem: TiltProblem, u: np.ndarray) -> float:
    """‖u − E_{P_{J_perp, b − J_minus u}}[σ]‖_∞"""
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u - tilted_mean(problem, u))))


def log_importance_bound(
        problem: TiltProblem,
        u: np.ndarray,
        samples: Optional[np.ndarray] = None,
) -> float:
    """
    log E_{P_{J_perp, b − J_minus u}}[exp(−½⟨σ−u, J_minus(σ−u)⟩)]。
    samples 为空时用穷举：指数合并后等于
    log Z(J_perp − J_minus, b) − ½⟨u, J_minus u⟩ − log Z(J_perp, b − J_minus u)。
    """
    u = np.asarray(u, dtype=float)
    if _is_zero(problem.J_minus):
        return 0.0
    if samples is not None:
        diff = np.atleast_2d(samples) - u[None, :]
        return float(log_mean_exp(-0.5 * quadratic_forms(diff, problem.J_minus)))
    joint = brute_force_log_partition(IsingModel(problem.J_perp - problem.J_minus, problem.base_field))
    tilted = brute_force_log_partition(IsingModel(problem.J_perp, problem.tilted_field(u)))
    return float(joint - 0.5 * u @ problem.J_minus @ u - tilted)


def _burn_in_steps(problem: TiltProblem, settings: TiltSettings, total_calls: int) -> int:
    if settings.inner_steps is not None:
        return int(settings.inner_steps)
    bulk = _op_norm(problem.J_perp)
    # 每次调用的 TV 目标 δ/(2·总调用数)
    eps_call = problem.delta / (2.0 * max(total_calls, 1))
    return glauber_steps(problem.n, eps_call, bulk_norm=bulk, constant=settings.glauber_constant)


def _estimate_grad_norms(
        problem: TiltProblem,
        candidates: np.ndarray,
        num: int,
        steps: int,
        rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """每个候选点用 num 条新链估计 ‖∇G‖，同时返回各候选点的倾斜均值"""
    S, n = candidates.shape
    fields = np.repeat(candidates @ -problem.J_minus + problem.base_field[None, :], num, axis=0)
    sigma = glauber_run_batch(problem.J_perp, fields, uniform_spins(S * num, n, rng), steps, rng)
    means = sigma.reshape(S, num, n).mean(axis=1)
    grads = -(means - candidates) @ problem.J_minus
    return np.linalg.norm(grads, axis=1), means


def solve_tilt(problem: TiltProblem, seed: int, settings: Optional[TiltSettings] = None) -> TiltSolution:
    """
    两阶段随机梯度：
    第一阶段 S = ⌈log₂(2/δ)⌉ 条独立轨迹，从 u=0 出发，步长 min(1/(2L), D/(σ_g·√N))，
    每条轨迹取均匀随机的一个迭代点；第二阶段用新样本估计各候选点的梯度范数，返回估计值最小者。
    每次梯度调用都跑满 inner 步 Glauber（每次调用 TV ≤ δ/(2·总调用数)），链状态在调用间接续。
    polish 打开时，第一轮最优候选做一步不动点更新 u ← E[σ] 后作为额外候选，用新样本单独估计梯度范数再参与比较。
    """
    settings = settings or TiltSettings()
    n = problem.n
    if _is_zero(problem.J_minus):
        return TiltSolution(u=np.zeros(n), tilt=np.zeros(n), grad_norm_estimate=0.0, sgd_iterations=0, samples_used=0)

    reg = regularize(problem)
    eps = reg.epsilon
    op = _op_norm(reg.J_minus)
    c = reg.c
    L_smooth = c * op * op + op
    sigma_g = 2.0 * op * math.sqrt(n)
    d_tilde = math.sqrt(c * n * n * op * op / (eps * L_smooth))
    num_iters = max(1, min(math.ceil(settings.iteration_constant * L_smooth ** 2 * n / eps ** 2), settings.max_iters))
    step = min(1.0 / (2.0 * L_smooth), d_tilde / (sigma_g * math.sqrt(num_iters)))
    S = max(1, math.ceil(math.log2(2.0 / reg.delta)))
    B = max(1, settings.batch_size)
    m = max(1, min(math.ceil(settings.phase_two_constant / eps ** 2), settings.phase_two_cap))
    inner = _burn_in_steps(reg, settings, S * num_iters + S * m + (m if settings.polish else 0))

    rng = make_rng(seed, "tilt-solver")
    picks = rng.integers(1, num_iters + 1, size=S)
    horizon = int(picks.max())

    # 第一阶段：S·B 条链同步推进，链 (s, b) 属于轨迹 s
    u = np.zeros((S, n))
    chains = uniform_spins(S * B, n, rng)
    chosen = np.zeros((S, n))
    trace: List[Dict[str, Any]] = []
    for it in range(1, horizon + 1):
        fields = np.repeat(u @ -reg.J_minus + reg.base_field[None, :], B, axis=0)
        chains = glauber_run_batch(reg.J_perp, fields, chains, inner, rng)
        means = chains.reshape(S, B, n).mean(axis=1)
        grads = -(means - u) @ reg.J_minus
        u = u - step * grads
        hit = picks == it
        chosen[hit] = u[hit]
        if settings.record_trace and (it % settings.trace_every == 0 or it == horizon):
            trace.append({
                "iteration": it,
                "u_norm": float(np.linalg.norm(u, axis=1).mean()),
                "grad_norm_estimate": float(np.linalg.norm(grads, axis=1).mean()),
            })

    # 第二阶段
    norms, means = _estimate_grad_norms(reg, chosen, m, inner, rng)
    candidates = chosen
    if settings.polish:
        polished = means[int(np.argmin(norms))][None, :]
        polished_norm, _ = _estimate_grad_norms(reg, polished, m, inner, rng)
        candidates = np.vstack([chosen, polished])
        norms = np.concatenate([norms, polished_norm])
    best = int(np.argmin(norms))
    u_best = candidates[best].copy()
    verified = bool(norms[best] <= eps)
    solution = TiltSolution(
        u=u_best,
        tilt=-reg.J_minus @ u_best,
        grad_norm_estimate=float(norms[best]),
        sgd_iterations=horizon,
        samples_used=horizon * S * B + candidates.shape[0] * m,
        verified=verified,
        inner_steps=inner,
        trace=trace,
    )
    if settings.record_trace:
        solution.trace.append({"phase_two_norms": norms.tolist(), "selected": best,
                               "candidates": candidates.tolist()})
    logger.debug(f"倾斜场求解: S={S}, N={num_iters}, 步长={step:.4g}, 内层步数={inner}, "
                 f"‖∇G‖≈{norms[best]:.4g}, verified={verified}")
    return solution
