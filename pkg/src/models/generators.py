#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : generators
@Date       : 2025/7/16 09:10
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 应用实例族：Curie–Weiss、Hopfield、铁磁 SK、图上的 Ising、cSBM/GMM 后验、子集和
所有随机生成器只由 seed 决定。
"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from src.core.exception import InvalidInputError
from src.core.logger import get_logger
from src.core.object import IsingModel
from src.core.rng import make_rng
from src.services.ising import brute_force_distribution, check_capacity

logger = get_logger("Generators")


def curie_weiss(n: int, beta: float) -> IsingModel:
    """J_ij = β/n，h = 0，即 ½⟨σ,Jσ⟩ = (β/2n)(Σσ_i)²"""
    if n < 1:
        raise InvalidInputError(f"n 必须 ≥ 1，实际 {n}")
    if beta < 0:
        raise InvalidInputError(f"beta 必须 ≥ 0，实际 {beta}")
    return IsingModel(np.full((n, n), beta / n), np.zeros(n), name=f"curie-weiss(n={n},beta={beta})",
                      extra={"kind": "curie-weiss", "beta": beta})


def hopfield(patterns: Sequence[Sequence[float]], beta: float, bias: Optional[Sequence[float]] = None) -> IsingModel:
    """Hebb 规则 J = (β/2n)·Σ_v η_v η_v^T"""
    P = np.atleast_2d(np.asarray(patterns, dtype=float))
    if P.size == 0:
        raise InvalidInputError("至少需要一个模式")
    m, n = P.shape
    if not np.all(np.abs(P) == 1.0):
        raise InvalidInputError("模式必须取值 ±1")
    h = np.zeros(n) if bias is None else np.asarray(bias, dtype=float)
    if h.shape != (n,):
        raise InvalidInputError(f"偏置长度 {h.shape} 与 n={n} 不一致")
    J = beta / (2.0 * n) * (P.T @ P)
    return IsingModel(J, h, name=f"hopfield(n={n},m={m},beta={beta})", extra={"kind": "hopfield", "m": m})


def random_patterns(n: int, m: int, seed: int) -> np.ndarray:
    rng = make_rng(seed, "hopfield-patterns")
    return np.where(rng.random((m, n)) < 0.5, 1.0, -1.0)


def goe_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """GOE：非对角 N(0,1/n)，对角 N(0,2/n)"""
    G = rng.normal(0.0, 1.0 / math.sqrt(n), size=(n, n))
    upper = np.triu(G, 1)
    W = upper + upper.T
    W[np.diag_indices(n)] = rng.normal(0.0, math.sqrt(2.0 / n), size=n)
    return W


def sk_ferro(n: int, beta1: float, beta2: float, seed: int) -> IsingModel:
    """J_ij = β1/n + β2·W_ij，W 为 GOE"""
    if n < 2:
        raise InvalidInputError(f"n 必须 ≥ 2，实际 {n}")
    W = goe_matrix(n, make_rng(seed, "sk-ferro"))
    J = np.full((n, n), beta1 / n) + beta2 * W
    return IsingModel(J, np.zeros(n), name=f"sk-ferro(n={n},beta1={beta1},beta2={beta2})",
                      extra={"kind": "sk-ferro", "seed": seed})


def graph_ising(adjacency: np.ndarray, beta: float, sign: int = -1, h: Optional[Sequence[float]] = None) -> IsingModel:
    """J = sign·β·A；sign=−1 为反铁磁，+1 为铁磁"""
    A = np.asarray(adjacency, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"邻接矩阵必须是方阵，实际形状 {A.shape}")
    if not np.array_equal(A, A.T):
        raise InvalidInputError("邻接矩阵不对称")
    if np.any(np.diag(A) != 0):
        raise InvalidInputError("邻接矩阵对角线必须为 0")
    if sign not in (-1, 1):
        raise InvalidInputError(f"sign 必须为 ±1，实际 {sign}")
    n = A.shape[0]
    field = np.zeros(n) if h is None else np.asarray(h, dtype=float)
    kind = "antiferro" if sign < 0 else "ferro"
    return IsingModel(sign * beta * A, field, name=f"graph-{kind}(n={n},beta={beta})",
                      extra={"kind": "graph", "sign": sign})


def random_regular_graph(n: int, degree: int, seed: int, max_tries: int = 1000) -> np.ndarray:
    """配对模型生成简单 d-正则图，出现自环或重边时整体重抽"""
    if degree < 0 or degree >= n or (n * degree) % 2:
        raise InvalidInputError(f"不存在 n={n}, degree={degree} 的正则图")
    rng = make_rng(seed, "regular-graph")
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        A = np.zeros((n, n))
        np.add.at(A, (pairs[:, 0], pairs[:, 1]), 1.0)
        A = A + A.T
        if np.all(A <= 1.0):
            return A
    raise InvalidInputError(f"{max_tries} 次尝试内未生成简单 {degree}-正则图")


def csbm_sample(n: int, p: int, lam: float, mu: float, seed: int
                ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    cSBM 生成模型：v ~ Unif{±1}^n，u ~ N(0, I_p/p)，
    A = (λ/n)vv^T + W（W 为 GOE），B = √(μ/n)·v u^T + Z（Z 元素 N(0,1/p)）。
    返回 (A, B, v, u)。
    """
    if n < 1 or p < 1:
        raise InvalidInputError(f"n, p 必须 ≥ 1，实际 n={n}, p={p}")
    rng = make_rng(seed, "csbm")
    v = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    u = rng.normal(0.0, 1.0 / math.sqrt(p), size=p)
    A = lam / n * np.outer(v, v) + goe_matrix(n, rng)
    B = math.sqrt(mu / n) * np.outer(v, u) + rng.normal(0.0, 1.0 / math.sqrt(p), size=(n, p))
    return A, B, v, u


def posterior_model(A: Optional[np.ndarray], B: np.ndarray, lam: float, mu: float, p: Optional[int] = None
                    ) -> IsingModel:
    """
    cSBM 后验 J = λ·A + (p·μ/(n(1+μ)))·B B^T，h = 0。
    λ = 0 且不给 A 时即两分量 GMM 的后验。
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n, cols = B.shape
    p = cols if p is None else int(p)
    J = p * mu / (n * (1.0 + mu)) * (B @ B.T)
    if A is not None:
        A = np.asarray(A, dtype=float)
        if A.shape != (n, n):
            raise InvalidInputError(f"A 形状 {A.shape} 与 B 的行数 n={n} 不一致")
        J = J + lam * A
    elif lam != 0.0:
        raise InvalidInputError("lambda ≠ 0 时必须提供 A")
    return IsingModel(J, np.zeros(n), name=f"posterior(n={n},p={p},lambda={lam},mu={mu})",
                      extra={"kind": "posterior", "p": p})


def subset_sum_instance(a: Sequence[int], beta: float, b: Optional[int] = None) -> IsingModel:
    """
    p_a(σ) ∝ exp(−βn(⟨a,σ⟩ − b)²)：J = −2βn·aa^T，给定 b 时 h = 2bβn·a。
    预期为计算困难实例，只用于压力测试。
    """
    a_vec = np.asarray(a, dtype=float).reshape(-1)
    if not np.all(a_vec == np.round(a_vec)):
        raise InvalidInputError("子集和实例的 a 必须为整数")
    n = a_vec.shape[0]
    if beta < 1.0:
        logger.warning(f"beta={beta} < 1，不在困难性论证的参数区间内")
    logger.warning(f"子集和实例 (n={n}) 预期为计算困难实例，仅供压力测试")
    J = -2.0 * beta * n * np.outer(a_vec, a_vec)
    h = np.zeros(n) if b is None else 2.0 * b * beta * n * a_vec
    return IsingModel(J, h, name=f"subset-sum(n={n},beta={beta})",
                      extra={"kind": "subset-sum", "expected_hard": True})


def curie_weiss_fixed_point(beta: float) -> float:
    """y = tanh(βy) 的非负根；β ≤ 1 时为 0"""
    if beta <= 1.0:
        return 0.0
    return float(brentq(lambda y: y - math.tanh(beta * y), 1e-12, 1.0, xtol=1e-14))


def magnetization_distribution(model: IsingModel) -> np.ndarray:
    """
    总磁化 m = Σσ_i 的精确分布（穷举），第 j 项对应 m = −n + 2j。
    """
    check_capacity(model.n)
    probs = brute_force_distribution(model).probs
    idx = np.arange(probs.shape[0])
    ups = np.zeros(probs.shape[0], dtype=np.int64)
    for i in range(model.n):
        ups += (idx >> i) & 1
    return np.bincount(ups, weights=probs, minlength=model.n + 1)


def magnetization_histogram(samples: np.ndarray) -> np.ndarray:
    """样本的磁化经验分布，与 magnetization_distribution 同下标"""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = samples.shape[1]
    ups = ((samples.sum(axis=1) + n) / 2).astype(np.int64)
    return np.bincount(ups, minlength=n + 1) / samples.shape[0]
