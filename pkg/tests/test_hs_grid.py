#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : test_hs_grid
@Date       : 2025/7/17 14:50
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: Hubbard–Stratonovich 网格测试：网格构造、高斯盒积分、积分恒等式、逐单元估计
"""
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from src.config.config_manager import ConfigManager
from src.config.path import GlobalPath
from src.config.setting import EstimationSettings
from src.core.exception import CapacityError, InvalidInputError
from src.core.object import CellData, IsingModel
from src.models.generators import curie_weiss
from src.services.hs_grid import (build_grid, cell_field, combine_cells, cutoff_mass, estimate_all_cells,
                                  exact_cell_ladder, exact_cells, hs_integral_log_partition, log_g_bulk, log_g_top,
                                  log_gaussian_box, log_Z1, spike_conditional, theoretical_L, theoretical_eta)
from src.services.ising import brute_force_distribution, brute_force_log_partition
from src.services.spectral import decompose
from src.util.utility import enumerate_states


def _signed_model(n: int, beta: float, negative: float, bulk: float, h_scale: float = 0.0) -> IsingModel:
    """一个尖峰 β（沿全 1 方向），负部 −negative 与体部 bulk 落在两个与之正交的方向上"""
    ones = np.ones(n) / math.sqrt(n)
    alt = np.array([(-1.0) ** i for i in range(n)]) / math.sqrt(n)
    half = np.array([1.0 if (i // 2) % 2 == 0 else -1.0 for i in range(n)])
    half = half - (half @ ones) * ones - (half @ alt) * alt
    half /= np.linalg.norm(half)
    J = beta * np.outer(ones, ones) - negative * np.outer(alt, alt) + bulk * np.outer(half, half)
    return IsingModel(J, h_scale * alt * math.sqrt(n))


@pytest.fixture(scope="module")
def test_settings() -> EstimationSettings:
    return EstimationSettings.from_config(ConfigManager(GlobalPath.test_config_filepath))


def test_build_grid_rounding():
    """k = ⌈2L/η⌉，L 被上调为 kη/2"""
    print("\n" + "=" * 50)
    print("测试网格构造")
    print("=" * 50)
    split = decompose(curie_weiss(8, 1.5).J)
    grid = build_grid(split, 0.2, 8, L=1.0, eta=0.3)
    assert grid.k == 7
    assert grid.L == pytest.approx(1.05)
    assert grid.num_cells == 7
    assert grid.cells.shape == (7, 1)
    assert grid.cells[0, 0] == pytest.approx(-grid.L + 0.15)
    assert grid.cells[-1, 0] == pytest.approx(grid.L - 0.15)

    theory = build_grid(split, 0.2, 8, cell_budget=10 ** 9)
    L = theoretical_L(split.op_norm, 8, 1, 0.2)
    assert theory.eta == pytest.approx(theoretical_eta(split.op_norm, 8, 1, L))
    assert theory.L >= L
    print(f"   ✓ 理论网格: L={theory.L:.4f}, η={theory.eta:.4g}, 单元数={theory.num_cells}")


def test_build_grid_errors():
    split = decompose(curie_weiss(8, 1.5).J)
    with pytest.raises(InvalidInputError):
        build_grid(split, 0.2, 8, L=1.0, eta=2.5)
    with pytest.raises(InvalidInputError):
        build_grid(split, 1.5, 8)
    with pytest.raises(CapacityError):
        build_grid(split, 0.2, 8, L=10.0, eta=0.001, cell_budget=1000)
    forced = build_grid(split, 0.2, 8, L=10.0, eta=0.01, cell_budget=1000, force=True)
    assert forced.num_cells == 2000


def test_zero_spike_grid():
    """d = 0 时只有一个退化单元"""
    split = decompose(curie_weiss(6, 0.5).J)
    grid = build_grid(split, 0.2, 6)
    assert (grid.d, grid.k, grid.num_cells) == (0, 1, 1)
    assert grid.cells.shape == (1, 0)


def test_log_Z1():
    field = np.array([0.3, -1.0, 2.5])
    expected = float(np.sum(np.log(2.0 * np.cosh(field))))
    assert log_Z1(field) == pytest.approx(expected, abs=1e-12)
    batch = log_Z1(np.vstack([field, np.zeros(3)]))
    assert batch[1] == pytest.approx(3 * math.log(2.0))


@pytest.mark.parametrize("a,y_star", [(0.0, 0.0), (3.0, 0.5), (-20.0, -2.0), (40.0, -1.0)])
def test_gaussian_box_quadrature(a, y_star):
    """log_gaussian_box 与数值积分一致（包括远尾）"""
    n, eta = 10, 0.4
    value = log_gaussian_box(np.array([a]), np.array([y_star]), eta, n)
    peak = min(max(a / n, y_star - eta / 2), y_star + eta / 2)
    shift = a * (peak - y_star) - 0.5 * n * peak * peak
    quad, _ = integrate.quad(lambda y: math.exp(a * (y - y_star) - 0.5 * n * y * y - shift),
                             y_star - eta / 2, y_star + eta / 2, epsabs=0.0, epsrel=1e-12)
    assert value == pytest.approx(shift + math.log(quad), abs=1e-8)


def test_gaussian_box_batch_shape():
    a = np.random.default_rng(0).normal(size=(5, 2))
    values = log_gaussian_box(a, np.array([0.1, -0.1]), 0.2, 8)
    assert values.shape == (5,)
    single = log_gaussian_box(a[2], np.array([0.1, -0.1]), 0.2, 8)
    assert values[2] == pytest.approx(single)


def test_integral_identity_curie_weiss():
    """积分形式与穷举一致"""
    model = curie_weiss(8, 1.5)
    split = decompose(model.J)
    exact = brute_force_log_partition(model)
    integral = hs_integral_log_partition(model, split)
    print(f"   穷举 {exact:.10f}, 积分 {integral:.10f}")
    assert integral == pytest.approx(exact, abs=1e-6)


def test_integral_identity_with_negative_part():
    """含负部的模型：积分里的体模型是 J_perp − J_minus"""
    model = _signed_model(8, 2.0, 0.3, 0.2, h_scale=0.25)
    split = decompose(model.J)
    assert split.d == 1 and split.has_negative
    assert hs_integral_log_partition(model, split) == pytest.approx(brute_force_log_partition(model), abs=1e-6)


def test_exact_cells_sum_to_partition():
    """网格单元精确值之和 = 截断积分；L 足够大时等于 log Z，与 η 无关"""
    model = curie_weiss(8, 1.5)
    split = decompose(model.J)
    exact = brute_force_log_partition(model)
    for eta in (0.5, 0.25):
        grid = build_grid(split, 0.2, 8, L=4.0, eta=eta)
        cells = exact_cells(model, split, grid)
        total = combine_cells(cells, 8, split.d)
        print(f"   η={eta}: Σ 单元 = {total:.8f}, log Z = {exact:.8f}")
        assert total == pytest.approx(exact, abs=1e-5)
    assert cutoff_mass(model, split, 4.0) == pytest.approx(1.0, abs=1e-5)
    assert cutoff_mass(model, split, 0.5) < 0.9


def test_spike_conditional():
    model = curie_weiss(8, 1.5)
    split = decompose(model.J)
    mean, var = spike_conditional(split, np.ones(8))
    assert var == pytest.approx(1.0 / 8)
    assert abs(mean[0]) == pytest.approx(math.sqrt(1.5), rel=1e-9)


def test_exact_ladder_telescopes():
    """相邻层的比值等于 p_ℓ 下 g_bulk 的均值，末层比值等于 p_M 下 g_top 的均值"""
    model = _signed_model(5, 1.8, 0.3, 0.2, h_scale=0.2)
    split = decompose(model.J)
    grid = build_grid(split, 0.2, 5, L=2.0, eta=0.5)
    y_star = grid.cells[3]
    tilt = np.array([0.1, -0.05, 0.0, 0.2, -0.1])
    ladder = exact_cell_ladder(model, split, grid, y_star, tilt)
    M = model.n + 1
    assert ladder.shape == (M + 1,)

    field = cell_field(split, model, y_star, tilt)
    states = enumerate_states(5)
    assert ladder[0] == pytest.approx(log_Z1(field), abs=1e-12)
    for level in range(M - 1):
        beta = level / model.n
        probs = brute_force_distribution(IsingModel(beta * split.J_perp, field)).probs
        ratio = math.log(float(probs @ np.exp(log_g_bulk(split, states))))
        assert ladder[level + 1] - ladder[level] == pytest.approx(ratio, abs=1e-10)

    cell = CellData(index=3, y_star=y_star, tilt=tilt, field=field, log_Z=ladder)
    probs = brute_force_distribution(IsingModel(split.J_perp, field)).probs
    top_ratio = math.log(float(probs @ np.exp(log_g_top(split, cell, states, grid))))
    assert ladder[-1] - ladder[-2] == pytest.approx(top_ratio, abs=1e-10)
    assert log_g_top(split, cell, states[7], grid) == pytest.approx(log_g_top(split, cell, states, grid)[7])


def test_exact_ladder_top_ignores_tilt():
    """倾斜场只改变中间层，末层与倾斜无关"""
    model = _signed_model(5, 1.8, 0.3, 0.2, h_scale=0.2)
    split = decompose(model.J)
    grid = build_grid(split, 0.2, 5, L=2.0, eta=0.5)
    plain = exact_cell_ladder(model, split, grid, grid.cells[1])
    tilted = exact_cell_ladder(model, split, grid, grid.cells[1], np.full(5, 0.3))
    assert tilted[-1] == pytest.approx(plain[-1], abs=1e-10)
    assert not np.isclose(tilted[1], plain[1])


@pytest.mark.slow
def test_estimate_curie_weiss(test_settings):
    """Curie–Weiss n=8, β=1.5：20 个种子中至少 18 个估计误差 ≤ 0.2"""
    print("\n" + "=" * 50)
    print("测试逐单元估计")
    print("=" * 50)
    model = curie_weiss(8, 1.5)
    split = decompose(model.J)
    settings = replace(test_settings, eps=0.2, grid_L=3.0, grid_eta=0.25)
    grid = build_grid(split, settings.eps, 8, settings.grid_L, settings.grid_eta)
    exact = brute_force_log_partition(model)
    errors = []
    for seed in range(20):
        result = estimate_all_cells(model, split, grid, settings, seed=seed)
        errors.append(abs(result.log_Z_hat - exact))
        assert result.M == 9
        assert all(cell.log_Z.shape == (10,) for cell in result.cells)
        assert not result.brute_force
    hits = sum(err <= 0.2 for err in errors)
    print(f"   log Z = {exact:.5f}, 最大误差 {max(errors):.4f}, 命中 {hits}/20")
    assert hits >= 18


@pytest.mark.slow
def test_estimate_tilt_only(test_settings):
    """J = 0.5·vvᵀ − 0.8·wwᵀ + 体部，c=2：无尖峰，只走倾斜场，20 个种子中至少 18 个误差 ≤ 0.2"""
    model = _signed_model(8, 0.5, 0.8, 0.4, h_scale=0.2)
    split = decompose(model.J, 2.0)
    assert split.d == 0
    assert split.trace_minus == pytest.approx(0.8, abs=1e-9)
    settings = replace(test_settings, eps=0.2, c=2.0)
    grid = build_grid(split, settings.eps, 8, settings.grid_L, settings.grid_eta)
    assert grid.num_cells == 1
    exact = brute_force_log_partition(model)
    errors = []
    for seed in range(20):
        result = estimate_all_cells(model, split, grid, settings, seed=seed)
        assert np.any(result.cells[0].tilt != 0.0)
        errors.append(abs(result.log_Z_hat - exact))
    hits = sum(err <= 0.2 for err in errors)
    print(f"\n   log Z = {exact:.5f}, 最大误差 {max(errors):.4f}, 命中 {hits}/20")
    assert hits >= 18


@pytest.mark.slow
def test_estimate_with_negative_part(test_settings):
    """含负尖峰的模型走倾斜场分支"""
    model = _signed_model(6, 1.5, 0.4, 0.3, h_scale=0.3)
    split = decompose(model.J)
    settings = replace(test_settings, eps=0.2, grid_L=3.0, grid_eta=0.5)
    grid = build_grid(split, settings.eps, 6, settings.grid_L, settings.grid_eta)
    result = estimate_all_cells(model, split, grid, settings, seed=2)
    exact = brute_force_log_partition(model)
    print(f"   d={split.d}, log Ẑ = {result.log_Z_hat:.5f}, log Z = {exact:.5f}")
    assert split.d == 1
    assert abs(result.log_Z_hat - exact) <= 0.2
    assert any(np.any(cell.tilt != 0.0) for cell in result.cells)


def test_tiny_eps_uses_brute_force(test_settings):
    model = curie_weiss(4, 1.2)
    split = decompose(model.J)
    settings = replace(test_settings, eps=0.05)
    grid = build_grid(split, 0.05, 4, L=2.0, eta=0.5)
    result = estimate_all_cells(model, split, grid, settings)
    assert result.brute_force
    assert result.log_Z_hat == pytest.approx(brute_force_log_partition(model), abs=1e-12)
    assert len(result.cells) == grid.num_cells


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s"])
