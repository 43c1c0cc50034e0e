#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : spectral
@Date       : 2025/7/12 15:20
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 谱分解 J = J_par + J_perp − J_minus
J_plus 取非负特征部分，特征值 > 1−1/c 的方向构成尖峰子空间 V（Q 为其正交基），
X 为 (n·J_plus) 的对称平方根。
"""
import math
from typing import Any, Dict, Optional

import numpy as np

from src.config.params import Params
from src.core.exception import InvalidInputError, NumericError
from src.core.logger import get_logger
from src.core.object import SpectralSplit

logger = get_logger("Spectral")


def default_c(eigvals: np.ndarray) -> float:
    """有负特征值时 c=2，否则 c=∞（阈值 1）"""
    return 2.0 if np.any(eigvals < 0.0) else math.inf


def spike_threshold(c: float) -> float:
    return 1.0 if math.isinf(c) else 1.0 - 1.0 / c


def decompose(J: np.ndarray, c: Optional[float] = None, tol: float = Params.symmetry_tol) -> SpectralSplit:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise InvalidInputError(f"J 必须是方阵，实际形状 {J.shape}")
    asymmetry = float(np.max(np.abs(J - J.T))) if J.size else 0.0
    if asymmetry > tol:
        raise InvalidInputError(f"J 不对称，最大偏差 {asymmetry:.3e} > {tol}")
    J = (J + J.T) / 2
    n = J.shape[0]

    try:
        lam, U = np.linalg.eigh(J)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"特征分解不收敛: {e}") from e
    if not np.all(np.isfinite(lam)):
        raise NumericError("特征值含非有限值")
    lam = np.where(np.abs(lam) < Params.eig_zero_tol, 0.0, lam)

    if c is None:
        c = default_c(lam)
    c = float(c)
    if not c > 1.0:
        raise InvalidInputError(f"c 必须在 (1, ∞] 内，实际 {c}")
    threshold = spike_threshold(c)

    pos = np.maximum(lam, 0.0)
    neg = np.maximum(-lam, 0.0)
    J_plus = (U * pos) @ U.T
    J_minus = (U * neg) @ U.T
    X = (U * np.sqrt(n * pos)) @ U.T

    spike = lam > threshold + Params.spike_tie_tol
    # eigh 升序，尖峰按特征值降序排列
    order = np.flatnonzero(spike)[::-1]
    Q = U[:, order]
    d = int(order.shape[0])
    J_par = (Q * lam[order]) @ Q.T
    J_perp = J_plus - J_par
    bulk = pos[~spike]

    split = SpectralSplit(
        n=n,
        c=c,
        threshold=threshold,
        d=d,
        J_plus=(J_plus + J_plus.T) / 2,
        J_minus=(J_minus + J_minus.T) / 2,
        X=(X + X.T) / 2,
        Q=Q,
        J_par=(J_par + J_par.T) / 2,
        J_perp=(J_perp + J_perp.T) / 2,
        XQ=X @ Q,
        eigvals=lam,
        op_norm=float(np.max(np.abs(lam))) if n else 0.0,
        bulk_norm=float(bulk.max()) if bulk.size else 0.0,
        trace_minus=float(neg.sum()),
    )
    logger.debug(f"谱分解完成: n={n}, d={d}, c={c}, ‖J‖={split.op_norm:.4f}, Tr(J_-)={split.trace_minus:.4f}")
    return split


def validate_split(split: SpectralSplit, J: np.ndarray, tol: float = 1e-8) -> Dict[str, Any]:
    """检查分解的各项不变量，只报告不抛异常"""
    J = np.asarray(J, dtype=float)
    n = split.n
    eye_d = np.eye(split.d)

    def min_eig(A: np.ndarray) -> float:
        return float(np.linalg.eigvalsh(A).min()) if A.size else 0.0

    reconstruction = float(np.linalg.norm(split.J_plus - split.J_minus - J))
    psd_slack = min(min_eig(split.J_plus), min_eig(split.J_minus), 0.0)
    cross = float(np.linalg.norm(split.J_plus @ split.J_minus))
    ortho = float(np.max(np.abs(split.Q.T @ split.Q - eye_d))) if split.d else 0.0
    factor = float(np.linalg.norm(split.X.T @ split.X / n - split.J_plus))
    P_par = split.Q @ split.Q.T
    par = float(np.linalg.norm(split.X.T @ P_par @ split.X / n - split.J_par))
    perp_norm = float(np.linalg.norm(split.J_perp, 2)) if n else 0.0
    perp_bound = split.threshold

    report: Dict[str, Any] = {
        "reconstruction_error": reconstruction,
        "psd_slack": psd_slack,
        "cross_product": cross,
        "orthonormality_defect": ortho,
        "factor_error": factor,
        "parallel_error": par,
        "perp_norm": perp_norm,
        "perp_bound": perp_bound,
    }
    violations = []
    if reconstruction > tol:
        violations.append("reconstruction")
    if psd_slack < -1e-10:
        violations.append("psd")
    if cross > tol:
        violations.append("cross_product")
    if ortho > 1e-10:
        violations.append("orthonormality")
    if factor > tol:
        violations.append("factor")
    if par > tol:
        violations.append("parallel")
    if perp_norm > perp_bound + tol:
        violations.append("perp_norm")
    report["violations"] = violations
    report["ok"] = not violations
    return report
