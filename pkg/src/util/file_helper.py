#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : file_helper.py
@Date       : 2025/5/28 00:02
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: JSON 文件读写：模型文件、估计报告、样本（JSON lines）
"""
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np

from src.config.params import Params
from src.core.exception import InvalidInputError, ModelIOError, ParseError
from src.core.logger import get_logger
from src.core.object import IsingModel

# 获取当前模块的日志器
logger = get_logger("FileHelper")

PathLike = Union[str, Path]


def load_json_file(file_path: PathLike) -> Dict[str, Any]:
    """
    加载 JSON 文件。文件缺失或不可读抛 ModelIOError，格式错误抛 ParseError（带行列号）。

    Loads a JSON file.
    """
    if not os.path.exists(file_path):
        raise ModelIOError(f"文件不存在: {file_path}", path=str(file_path))
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"无法解析 JSON 文件 {file_path}: {e.msg}", line=e.lineno, column=e.colno) from e
    except (IOError, UnicodeDecodeError) as e:
        raise ModelIOError(f"无法读取文件 {file_path}: {e}", path=str(file_path)) from e
    if not isinstance(data, dict):
        raise ParseError(f"JSON 顶层必须是对象: {file_path}", line=1, column=1)
    return data


def write_json_file(file_path: PathLike, data: Dict[str, Any]) -> None:
    """
    将数据写入 JSON 文件，父目录不存在时自动创建。

    Writes the given data into a JSON file at the specified path.
    """
    try:
        Path(file_path).parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, 'w', newline='\n', encoding='utf-8') as f:
            file_data = json.dumps(data, indent=4, ensure_ascii=False)
            f.write(file_data)
    except IOError as e:
        raise ModelIOError(f"无法写入文件 {file_path}: {e}", path=str(file_path)) from e


def write_json_lines(records: Iterable[Dict[str, Any]], file_path: Optional[PathLike] = None) -> int:
    """逐行写出 JSON 记录；file_path 为空时写到 stdout。返回写出的行数"""
    count = 0
    try:
        if file_path is None:
            for record in records:
                sys.stdout.write(json.dumps(record, ensure_ascii=False) + "\n")
                count += 1
            sys.stdout.flush()
            return count
        Path(file_path).parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, 'w', newline='\n', encoding='utf-8') as f:
            for record in records:
                f.write(json.dumps(record, ensure_ascii=False) + "\n")
                count += 1
    except IOError as e:
        raise ModelIOError(f"无法写入文件 {file_path}: {e}", path=str(file_path)) from e
    return count


def _as_matrix(values: Any, rows: int, cols: int, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim == 1 and array.shape[0] == rows * cols:
        array = array.reshape(rows, cols)
    if array.ndim == 1 and cols == 1 and array.shape[0] == rows:
        array = array.reshape(rows, 1)
    if array.shape != (rows, cols):
        raise InvalidInputError(f"{name} 形状应为 {rows}x{cols}，实际 {array.shape}")
    return array


def model_from_dict(data: Dict[str, Any], source: str = "") -> IsingModel:
    """
    解析模型 JSON：{"n", "J"(行优先 n·n), "h"}，可选 {"J_factors": {"U", "lambda"}} 特征形式。
    非对称 J 被对称化并告警。
    """
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInputError(f"模型缺少合法的 n 字段 {source}") from e
    if n < 1:
        raise InvalidInputError(f"n 必须 ≥ 1 {source}")

    J = _as_matrix(data["J"], n, n, "J") if "J" in data else np.zeros((n, n))
    factors = data.get("J_factors")
    if factors is not None:
        lam = np.asarray(factors["lambda"], dtype=float).reshape(-1)
        U = _as_matrix(factors["U"], n, lam.shape[0], "J_factors.U")
        J = J + (U * lam) @ U.T
    h = np.asarray(data.get("h", np.zeros(n)), dtype=float).reshape(-1)
    if h.shape[0] != n:
        raise InvalidInputError(f"h 长度 {h.shape[0]} 与 n={n} 不一致 {source}")

    asymmetry = float(np.max(np.abs(J - J.T)))
    if asymmetry > Params.symmetry_tol:
        logger.warning(f"J 不对称（最大偏差 {asymmetry:.3e}），已对称化 {source}")
    J = (J + J.T) / 2
    return IsingModel(J, h, name=str(data.get("name", "")), extra=dict(data.get("meta", {})))


def model_to_dict(model: IsingModel) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "n": model.n,
        "J": model.J.reshape(-1).tolist(),
        "h": model.h.tolist(),
    }
    if model.name:
        data["name"] = model.name
    if model.extra:
        data["meta"] = model.extra
    return data


def load_model(file_path: PathLike) -> IsingModel:
    model = model_from_dict(load_json_file(file_path), source=str(file_path))
    logger.info(f"模型已加载: {file_path} (n={model.n})")
    return model


def save_model(model: IsingModel, file_path: PathLike) -> None:
    write_json_file(file_path, model_to_dict(model))
    logger.info(f"模型已写入: {file_path}")
