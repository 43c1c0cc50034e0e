#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : utility
@Date       : 2025/5/28 15:03
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: General numeric utility functions.
"""
import math
from decimal import Decimal
from math import ceil

import numpy as np
from scipy.special import erf, erfcx, expit, logsumexp

_LOG2 = math.log(2.0)
_LOG_2_OVER_SQRT_PI = math.log(2.0 / math.sqrt(math.pi))


def ceil_ratio(value: float, target: float) -> int:
    """
    ⌈value / target⌉，十进制运算避免 0.1 这类步长的浮点误差。
    """
    decimal_value: Decimal = Decimal(str(value))
    decimal_target: Decimal = Decimal(str(target))
    return int(ceil(decimal_value / decimal_target))


def logistic(x: np.ndarray) -> np.ndarray:
    """1/(1+e^{-x})，大参数不溢出"""
    return expit(x)


def log_cosh(x: np.ndarray) -> np.ndarray:
    """log cosh(x) = logaddexp(x, −x) − log 2"""
    x = np.asarray(x, dtype=float)
    return np.logaddexp(x, -x) - _LOG2


def log_mean_exp(values: np.ndarray, axis: int = -1) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return logsumexp(values, axis=axis) - math.log(values.shape[axis])


def log_erf_diff(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """
    log(erf(hi) − erf(lo))，要求 lo < hi。

    两端同号时转成 erfc 之差并用 erfcx 抽出 e^{-x²}，尾部不下溢；
    区间跨过 0 时直接相减没有抵消问题。
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    # 负半轴镜像到正半轴
    mirror = hi <= 0.0
    a = np.where(mirror, -hi, lo)
    b = np.where(mirror, -lo, hi)

    out = np.empty(a.shape, dtype=float)
    positive = a >= 0.0
    straddle = ~positive

    if np.any(straddle):
        out[straddle] = np.log(erf(b[straddle]) - erf(a[straddle]))

    if np.any(positive):
        ap = a[positive]
        bp = b[positive]
        width = bp - ap
        with np.errstate(over="ignore", under="ignore"):
            diff = erfcx(ap) - np.exp(ap * ap - bp * bp) * erfcx(bp)
        narrow = (width < 1e-7) | (diff <= 0.0)
        mid = 0.5 * (ap + bp)
        with np.errstate(divide="ignore", invalid="ignore"):
            wide_val = -ap * ap + np.log(diff)
            narrow_val = _LOG_2_OVER_SQRT_PI + np.log(width) - mid * mid
        out[positive] = np.where(narrow, narrow_val, wide_val)
    return out


def enumerate_states(n: int, start: int = 0, stop: int = -1) -> np.ndarray:
    """
    状态编号 [start, stop) 对应的自旋构型，第 i 位为 (σ_i+1)/2。
    返回形状 (stop-start, n) 的 float 数组。
    """
    if stop < 0:
        stop = 1 << n
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return (2 * bits - 1).astype(float)


def state_index(sigma: np.ndarray) -> np.ndarray:
    """自旋构型 -> 状态编号；支持 (n,) 或 (K, n)"""
    sigma = np.asarray(sigma)
    bits = (sigma > 0).astype(np.int64)
    weights = np.int64(1) << np.arange(sigma.shape[-1], dtype=np.int64)
    return bits @ weights


def is_spin_config(sigma: np.ndarray) -> bool:
    sigma = np.asarray(sigma)
    return bool(np.all((sigma == 1) | (sigma == -1)))


def quadratic_forms(S: np.ndarray, A: np.ndarray) -> np.ndarray:
    """批量 ⟨σ, Aσ⟩，S 形状 (K, n)"""
    return np.einsum("ki,ki->k", S @ A, S)
