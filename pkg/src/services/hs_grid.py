#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : hs_grid
@Date       : 2025/7/14 09:40
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: Hubbard–Stratonovich 网格估计
把尖峰部分 ½⟨σ,J_par σ⟩ 写成尖峰子空间上的高斯积分，积分区域切成边长 η 的立方体单元；
每个单元内是一个外场倾斜的体模型，用退火阶梯 p_ℓ = p_{β_ℓ·J_perp, h(y*)} 估计，
最后一层乘上负部与高斯盒积分的比值 g_top。
"""
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from src.config.constant import CellFlag
from src.config.setting import EstimationSettings
from src.core.exception import CapacityError, EstimatorError, InvalidInputError
from src.core.logger import get_logger
from src.core.object import (AnnealingSchedule, CellData, EstimateResult, EstimatorParams, GridSpec, IsingModel,
                             SpectralSplit, TiltProblem)
from src.core.rng import derive_seed
from src.core.worker_pool import WorkerPool, get_pool
from src.services.annealing import anneal_partition, default_num_samples, default_num_trials
from src.services.glauber import GlauberSampler, ProductSampler, Sampler, glauber_steps
from src.services.ising import brute_force_log_partition, check_capacity, state_chunks
from src.services.tilt_solver import solve_tilt
from src.util.utility import ceil_ratio, enumerate_states, log_cosh, log_erf_diff, quadratic_forms

logger = get_logger("HSGrid")

_LOG_SQRT_PI = 0.5 * math.log(math.pi)


def prefactor(n: int, d: int) -> float:
    """(d/2)·log(n/2π)"""
    return 0.5 * d * math.log(n / (2.0 * math.pi))


def theoretical_L(op_norm: float, n: int, d: int, eps: float) -> float:
    """L = √‖J‖ + √(2·log(4n·max(d,1)/ε)/n)"""
    return math.sqrt(op_norm) + math.sqrt(2.0 * math.log(4.0 * n * max(d, 1) / eps) / n)


def theoretical_eta(op_norm: float, n: int, d: int, L: float) -> float:
    """η = 1/(n·d·L + 2n·√(‖J‖·d))"""
    return 1.0 / (n * d * L + 2.0 * n * math.sqrt(op_norm * d))


def build_grid(
        split: SpectralSplit,
        eps: float,
        n: int,
        L: Optional[float] = None,
        eta: Optional[float] = None,
        cell_budget: int = 100_000,
        force: bool = False,
) -> GridSpec:
    """
    给定的 η 直接替换理论值；L 向上取整使 2L/η 为整数。
    单元数超出预算时抛 CapacityError（force 为真时放行）。
    """
    if not 0.0 < eps < 1.0:
        raise InvalidInputError(f"eps 必须在 (0,1) 内，实际 {eps}")
    d = split.d
    if d == 0:
        return GridSpec(L=0.0, eta=0.0, d=0, k=1)

    L_value = float(L) if L is not None else theoretical_L(split.op_norm, n, d, eps)
    eta_value = float(eta) if eta is not None else theoretical_eta(split.op_norm, n, d, L_value)
    if L_value <= 0.0 or eta_value <= 0.0:
        raise InvalidInputError(f"L 与 η 必须为正，实际 L={L_value}, η={eta_value}")
    if eta_value > 2.0 * L_value:
        raise InvalidInputError(f"η={eta_value} 大于 2L={2.0 * L_value}")

    k = ceil_ratio(2.0 * L_value, eta_value)
    grid = GridSpec(L=k * eta_value / 2.0, eta=eta_value, d=d, k=k)
    if grid.num_cells > cell_budget and not force:
        raise CapacityError(f"网格单元数 {grid.num_cells} 超出预算 {cell_budget}", count=grid.num_cells)
    logger.info(f"网格已构建: d={d}, L={grid.L:.4f}, η={eta_value:.4g}, 单元数={grid.num_cells}")
    return grid


def log_Z1(field: np.ndarray) -> np.ndarray:
    """n·log 2 + Σ log cosh(field_i)，field 可为 (n,) 或 (K, n)"""
    field = np.asarray(field, dtype=float)
    result = field.shape[-1] * math.log(2.0) + np.sum(log_cosh(field), axis=-1)
    return float(result) if np.ndim(result) == 0 else result


def log_g_bulk(split: SpectralSplit, sigma: np.ndarray) -> np.ndarray:
    """(1/2n)·⟨σ, J_perp σ⟩"""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim == 1:
        return float(sigma @ split.J_perp @ sigma) / (2.0 * split.n)
    return quadratic_forms(sigma, split.J_perp) / (2.0 * split.n)


def log_gaussian_box(a: np.ndarray, y_star: np.ndarray, eta: float, n: int) -> np.ndarray:
    """
    log ∫_{B(y*)} exp(⟨a, y − y*⟩ − (n/2)‖y‖²) dy，逐坐标分解。
    配方后每个坐标是以 a_j/n 为中心、方差 1/n 的高斯在区间上的质量。
    a 形状 (..., d)，返回 (...)。
    """
    a = np.asarray(a, dtype=float)
    y_star = np.asarray(y_star, dtype=float)
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-1]) if a.ndim > 1 else 0.0
    if eta <= 0.0:
        raise InvalidInputError(f"η 必须为正，实际 {eta}")
    s = math.sqrt(n / 2.0)
    m = a / n
    lo = s * (y_star - eta / 2.0 - m)
    hi = s * (y_star + eta / 2.0 - m)
    per_coord = a * a / (2.0 * n) - a * y_star + (_LOG_SQRT_PI - math.log(2.0 * s)) + log_erf_diff(lo, hi)
    result = np.sum(per_coord, axis=-1)
    return float(result) if np.ndim(result) == 0 else result


def cell_field(split: SpectralSplit, model: IsingModel, y_star: np.ndarray, tilt: np.ndarray) -> np.ndarray:
    """h(y*) = tilt + X^T Q y* + h"""
    return tilt + split.XQ @ np.asarray(y_star, dtype=float) + model.h


def log_g_top(split: SpectralSplit, cell: CellData, sigma: np.ndarray, grid: GridSpec) -> np.ndarray:
    """−½⟨σ, J_minus σ⟩ − ⟨tilt, σ⟩ + log_gaussian_box(Q^T X σ, y*, η, n)"""
    sigma = np.asarray(sigma, dtype=float)
    single = sigma.ndim == 1
    S = np.atleast_2d(sigma)
    value = -0.5 * quadratic_forms(S, split.J_minus) - S @ cell.tilt
    if split.d > 0:
        value = value + log_gaussian_box(S @ split.XQ, cell.y_star, grid.eta, split.n)
    return float(value[0]) if single else value


def level_steps(split: SpectralSplit, settings: EstimationSettings, M: int) -> int:
    if settings.glauber_steps is not None:
        return int(settings.glauber_steps)
    return glauber_steps(split.n, settings.eps / (2.0 * M), bulk_norm=split.bulk_norm,
                         constant=settings.glauber_constant, formula=settings.glauber_formula)


def ladder_samplers(split: SpectralSplit, field: np.ndarray, schedule: AnnealingSchedule, steps: int,
                    chains: Optional[int] = None) -> List[Sampler]:
    """第 1 层 β=0 为精确乘积采样，其余层为 Glauber"""
    samplers: List[Sampler] = []
    for beta in schedule.betas:
        if beta == 0.0 or not np.any(split.J_perp):
            samplers.append(ProductSampler(field))
        else:
            samplers.append(GlauberSampler(split.J_perp, field, steps, beta=beta, chains=chains))
    return samplers


def ladder_ratios(split: SpectralSplit, cell: CellData, grid: GridSpec, schedule: AnnealingSchedule) -> list:
    betas = schedule.betas
    ratios = []
    for level in range(schedule.M - 1):
        gap = betas[level + 1] - betas[level]
        ratios.append(lambda S, gap=gap: gap * quadratic_forms(np.atleast_2d(S), split.J_perp) / 2.0)
    ratios.append(lambda S: log_g_top(split, cell, np.atleast_2d(S), grid))
    return ratios


def _solve_cell_tilt(
        model: IsingModel,
        split: SpectralSplit,
        base_field: np.ndarray,
        settings: EstimationSettings,
        seed: int,
        index: int,
) -> Tuple[np.ndarray, float, List[CellFlag], List[Dict[str, Any]]]:
    if not split.has_negative:
        return np.zeros(model.n), 0.0, [], []
    problem = TiltProblem(split.J_perp, split.J_minus, base_field, split.c, settings.tilt_eps, settings.tilt.delta)
    flags: List[CellFlag] = []
    solution = solve_tilt(problem, derive_seed(seed, "tilt", index, 0), settings.tilt)
    for attempt in range(1, settings.tilt.retries + 1):
        if solution.verified:
            break
        flags.append(CellFlag.TILT_RETRIED)
        solution = solve_tilt(problem, derive_seed(seed, "tilt", index, attempt), settings.tilt)
    if not solution.verified:
        flags.append(CellFlag.TILT_UNVERIFIED)
        logger.warning(f"单元 {index} 倾斜场未通过梯度阈值: ‖∇G‖≈{solution.grad_norm_estimate:.4g}")
    return solution.tilt, solution.grad_norm_estimate, flags, solution.trace


def estimate_cell(
        model: IsingModel,
        split: SpectralSplit,
        grid: GridSpec,
        index: int,
        settings: EstimationSettings,
        seed: int,
) -> CellData:
    """单个单元：求倾斜场、组装阶梯、退火，得到 log Ẑ_ℓ(y*)，ℓ = 1..M+1"""
    y_star = grid.cells[index]
    base_field = model.h + split.XQ @ y_star
    tilt, grad_norm, flags, trace = _solve_cell_tilt(model, split, base_field, settings, seed, index)
    cell = CellData(index=index, y_star=y_star, tilt=tilt, field=tilt + base_field,
                    log_Z=np.empty(0), flags=flags, tilt_grad_norm=grad_norm, tilt_trace=trace)

    schedule = AnnealingSchedule(model.n)
    M = schedule.M
    N = settings.num_samples or default_num_samples(M, settings.eps, settings.sigma2, settings.sample_constant)
    if settings.max_samples is not None:
        N = min(N, int(settings.max_samples))
    R = settings.num_trials or default_num_trials(settings.delta, settings.trials_constant)
    params = EstimatorParams(N=int(N), R=int(R), log_Z1=log_Z1(cell.field))
    samplers = ladder_samplers(split, cell.field, schedule, level_steps(split, settings, M),
                               settings.glauber_chains)
    try:
        cell.log_Z = anneal_partition(schedule, samplers, ladder_ratios(split, cell, grid, schedule), params,
                                      seed, label=f"anneal/cell{index}")
    except EstimatorError as e:
        logger.warning(f"单元 {index} 退火失败，已排除: {e}")
        cell.flags.append(CellFlag.ANNEAL_FAILED)
        cell.log_Z = np.full(M + 1, -np.inf)
    return cell


def exact_cell_ladder(model: IsingModel, split: SpectralSplit, grid: GridSpec, y_star: np.ndarray,
                      tilt: Optional[np.ndarray] = None) -> np.ndarray:
    """
    穷举阶梯：ℓ ≤ M 为 log Z(β_ℓ·J_perp, h(y*))，
    末项 log Σ_σ exp(½⟨σ,(J_perp − J_minus)σ⟩ + ⟨h + X^T Q y*, σ⟩ + box(σ))。
    """
    n = model.n
    check_capacity(n)
    y_star = np.asarray(y_star, dtype=float)
    tilt = np.zeros(n) if tilt is None else np.asarray(tilt, dtype=float)
    field = cell_field(split, model, y_star, tilt)
    schedule = AnnealingSchedule(n)
    ladder = [brute_force_log_partition(IsingModel(beta * split.J_perp, field)) for beta in schedule.betas]

    base = model.h + split.XQ @ y_star
    coupling = split.J_perp - split.J_minus
    partials = []
    for bounds in state_chunks(n):
        S = enumerate_states(n, *bounds)
        values = 0.5 * quadratic_forms(S, coupling) + S @ base
        if split.d > 0:
            values = values + log_gaussian_box(S @ split.XQ, y_star, grid.eta, n)
        partials.append(logsumexp(values))
    ladder.append(float(logsumexp(partials)))
    return np.asarray(ladder)


def exact_cells(model: IsingModel, split: SpectralSplit, grid: GridSpec) -> List[CellData]:
    """全部单元的穷举阶梯（零倾斜）"""
    cells = []
    for index, y_star in enumerate(grid.cells):
        tilt = np.zeros(model.n)
        cells.append(CellData(index=index, y_star=y_star, tilt=tilt, field=cell_field(split, model, y_star, tilt),
                              log_Z=exact_cell_ladder(model, split, grid, y_star, tilt)))
    return cells


def combine_cells(cells: List[CellData], n: int, d: int) -> float:
    """(d/2)·log(n/2π) + log Σ_{y*} Ẑ_{M+1}(y*)"""
    tops = np.array([cell.log_Z_top for cell in cells if not cell.excluded])
    if tops.size == 0:
        raise EstimatorError("没有可用的网格单元")
    return prefactor(n, d) + float(logsumexp(tops))


def estimate_all_cells(
        model: IsingModel,
        split: SpectralSplit,
        grid: GridSpec,
        settings: EstimationSettings,
        seed: Optional[int] = None,
        pool: Optional[WorkerPool] = None,
) -> EstimateResult:
    """
    逐单元估计并合并。ε ≤ 2^{-n} 时直接穷举。
    失败单元被排除；失败比例超过 max_failed_cell_fraction 时抛 EstimatorError。
    """
    seed = settings.seed if seed is None else seed
    n = model.n
    M = n + 1
    if settings.eps <= 2.0 ** (-n):
        logger.info(f"ε={settings.eps} ≤ 2^-{n}，改用穷举")
        cells = exact_cells(model, split, grid)
        return EstimateResult(log_Z_hat=brute_force_log_partition(model, pool), cells=cells, grid=grid,
                              split=split, M=M, eps=settings.eps, brute_force=True)

    logger.info(f"开始逐单元估计: {grid.num_cells} 个单元, M={M}")
    cells = get_pool(pool).map_ordered(
        lambda index: estimate_cell(model, split, grid, index, settings, seed), range(grid.num_cells))
    failed = sum(cell.excluded for cell in cells)
    if failed > settings.max_failed_cell_fraction * len(cells):
        raise EstimatorError(f"{failed}/{len(cells)} 个单元退火失败")
    log_Z_hat = combine_cells(cells, n, split.d)
    logger.info(f"估计完成: log Ẑ = {log_Z_hat:.6f}")
    return EstimateResult(log_Z_hat=log_Z_hat, cells=cells, grid=grid, split=split, M=M, eps=settings.eps)


def _log_proj(model: IsingModel, split: SpectralSplit, y: float) -> float:
    """log Z_{J_perp − J_minus, h + X^T Q y}（d = 1）"""
    field = model.h + split.XQ[:, 0] * y
    return brute_force_log_partition(IsingModel(split.J_perp - split.J_minus, field))


def _hs_integral(model: IsingModel, split: SpectralSplit, lo: float, hi: float, bound: float) -> float:
    n = model.n
    grid = np.linspace(-bound, bound, 401)
    log_f = np.array([_log_proj(model, split, y) - 0.5 * n * y * y for y in grid])
    shift = float(log_f.max())
    peak = float(grid[int(np.argmax(log_f))])
    points = [p for p in (peak, -peak, 0.0) if lo < p < hi]
    value, _ = integrate.quad(lambda y: math.exp(_log_proj(model, split, y) - 0.5 * n * y * y - shift),
                              lo, hi, points=points or None, epsabs=0.0, epsrel=1e-11, limit=400)
    return shift + math.log(value)


def _integration_bound(model: IsingModel, split: SpectralSplit) -> float:
    n = model.n
    A = float(np.sum(np.abs(split.XQ)))
    return (A + math.sqrt(A * A + 80.0 * n)) / n + 1.0


def hs_integral_log_partition(model: IsingModel, split: SpectralSplit) -> float:
    """
    log Z 的积分形式（d ≤ 1）：(d/2)·log(n/2π) + log ∫ Z_{J_perp−J_minus, h+X^T Q y}·e^{−ny²/2} dy，
    积分用自适应求积；d = 0 时就是穷举。
    """
    if split.d == 0:
        return brute_force_log_partition(IsingModel(split.J_perp - split.J_minus, model.h))
    if split.d > 1:
        raise InvalidInputError(f"积分基准只支持 d ≤ 1，实际 d={split.d}")
    bound = _integration_bound(model, split)
    return prefactor(model.n, 1) + _hs_integral(model, split, -bound, bound, bound)


def cutoff_mass(model: IsingModel, split: SpectralSplit, L: float) -> float:
    """[−L, L] 上截断积分占全部积分质量的比例（d = 1）"""
    if split.d != 1:
        raise InvalidInputError(f"截断质量只支持 d = 1，实际 d={split.d}")
    bound = max(_integration_bound(model, split), L)
    total = _hs_integral(model, split, -bound, bound, bound)
    inner = _hs_integral(model, split, -L, L, bound)
    return float(math.exp(inner - total))


def spike_conditional(split: SpectralSplit, sigma: np.ndarray) -> Tuple[np.ndarray, float]:
    """给定 σ 时尖峰坐标 y 的条件分布：均值 Q^T X σ / n，每个坐标方差 1/n"""
    sigma = np.asarray(sigma, dtype=float)
    return (sigma @ split.XQ) / split.n, 1.0 / split.n
