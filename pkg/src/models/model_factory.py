#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : model_factory.py
@Date       : 2025/7/16 10:20
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 模型工厂 - 按 ModelRecipe（模型族 + 参数 + 种子）构造 IsingModel
"""
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.config.constant import ModelKind
from src.core.exception import InvalidInputError
from src.core.logger import get_logger
from src.core.object import IsingModel, ModelRecipe
from src.models.generators import (csbm_sample, curie_weiss, graph_ising, hopfield, posterior_model, random_patterns,
                                   random_regular_graph, sk_ferro, subset_sum_instance)

logger = get_logger("ModelFactory")

Builder = Callable[[Dict[str, Any], int], IsingModel]


def _require(kind: ModelKind, params: Dict[str, Any], *keys: str) -> None:
    missing = [key for key in keys if params.get(key) is None]
    if missing:
        raise InvalidInputError(f"{kind.value} 缺少参数: {', '.join(missing)}")


def _build_curie_weiss(params: Dict[str, Any], seed: int) -> IsingModel:
    _require(ModelKind.CURIE_WEISS, params, "n", "beta")
    return curie_weiss(int(params["n"]), float(params["beta"]))


def _build_hopfield(params: Dict[str, Any], seed: int) -> IsingModel:
    _require(ModelKind.HOPFIELD, params, "beta")
    patterns = params.get("patterns")
    if patterns is None:
        _require(ModelKind.HOPFIELD, params, "n", "m")
        patterns = random_patterns(int(params["n"]), int(params["m"]), seed)
    return hopfield(patterns, float(params["beta"]), params.get("bias"))


def _build_sk_ferro(params: Dict[str, Any], seed: int) -> IsingModel:
    _require(ModelKind.SK_FERRO, params, "n", "beta1", "beta2")
    return sk_ferro(int(params["n"]), float(params["beta1"]), float(params["beta2"]), seed)


def _build_graph(params: Dict[str, Any], seed: int) -> IsingModel:
    _require(ModelKind.GRAPH, params, "beta")
    adjacency = params.get("adjacency")
    if adjacency is None:
        _require(ModelKind.GRAPH, params, "n", "degree")
        adjacency = random_regular_graph(int(params["n"]), int(params["degree"]), seed)
    return graph_ising(np.asarray(adjacency, dtype=float), float(params["beta"]), int(params.get("sign", -1)),
                       params.get("h"))


def _build_posterior(params: Dict[str, Any], seed: int) -> IsingModel:
    _require(ModelKind.POSTERIOR, params, "mu")
    lam = float(params.get("lambda", 0.0))
    mu = float(params["mu"])
    B = params.get("B")
    A = params.get("A")
    if B is None:
        _require(ModelKind.POSTERIOR, params, "n", "p")
        A_draw, B, _, _ = csbm_sample(int(params["n"]), int(params["p"]), lam, mu, seed)
        A = A_draw if lam != 0.0 else None
    return posterior_model(None if A is None else np.asarray(A, dtype=float), np.asarray(B, dtype=float), lam, mu,
                           params.get("p"))


def _build_subset_sum(params: Dict[str, Any], seed: int) -> IsingModel:
    _require(ModelKind.SUBSET_SUM, params, "a")
    return subset_sum_instance(params["a"], float(params.get("beta", 1.0)), params.get("b"))


class ModelFactory:
    """
    模型工厂类

    作用：
    1. 统一管理各模型族的构造函数
    2. 根据 ModelRecipe 创建模型，校验参数是否齐全
    """

    def __init__(self) -> None:
        self._builders: Dict[ModelKind, Builder] = {}
        self._register_default_builders()

    def _register_default_builders(self) -> None:
        self.register_builder(ModelKind.CURIE_WEISS, _build_curie_weiss)
        self.register_builder(ModelKind.HOPFIELD, _build_hopfield)
        self.register_builder(ModelKind.SK_FERRO, _build_sk_ferro)
        self.register_builder(ModelKind.GRAPH, _build_graph)
        self.register_builder(ModelKind.POSTERIOR, _build_posterior)
        self.register_builder(ModelKind.SUBSET_SUM, _build_subset_sum)

    def register_builder(self, kind: ModelKind, builder: Builder) -> None:
        if not callable(builder):
            raise InvalidInputError(f"构造函数不可调用: {builder}")
        self._builders[kind] = builder
        logger.debug(f"模型族已注册: {kind.value}")

    def create_model(self, recipe: ModelRecipe) -> IsingModel:
        builder = self._builders.get(recipe.kind)
        if builder is None:
            raise InvalidInputError(f"未知的模型族: {recipe.kind}. 可用: {self.available_kinds()}")
        model = builder(dict(recipe.params), 0 if recipe.seed is None else int(recipe.seed))
        model.extra.setdefault("kind", recipe.kind.value)
        if recipe.seed is not None:
            model.extra.setdefault("seed", recipe.seed)
        return model

    def available_kinds(self) -> List[str]:
        return [kind.value for kind in self._builders]


# 全局模型工厂实例
model_factory = ModelFactory()


def create_model(kind: str, params: Optional[Dict[str, Any]] = None, seed: Optional[int] = None) -> IsingModel:
    """便捷函数：按族名创建模型"""
    try:
        model_kind = ModelKind(kind)
    except ValueError as e:
        raise InvalidInputError(f"未知的模型族: {kind}. 可用: {model_factory.available_kinds()}") from e
    return model_factory.create_model(ModelRecipe(kind=model_kind, params=params or {}, seed=seed))
