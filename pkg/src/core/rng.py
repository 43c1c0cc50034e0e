#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : rng
@Date       : 2025/7/12 11:05
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 基于计数器的可拆分随机数流
每个随机组件的流由 (主种子, 组件标签, 下标...) 唯一决定，与线程调度无关。
"""
import hashlib
from typing import Tuple

import numpy as np

_MASK64 = (1 << 64) - 1


def label_key(label: str) -> int:
    """组件标签 -> 64 位整数"""
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")


def spawn_key(label: str, *indices: int) -> Tuple[int, ...]:
    return (label_key(label), *(int(i) & _MASK64 for i in indices))


def make_rng(master: int, label: str, *indices: int) -> np.random.Generator:
    """
    派生独立随机流。
    Philox 是计数器型生成器，不同 spawn_key 给出互不重叠的流。
    """
    seq = np.random.SeedSequence(int(master) & _MASK64, spawn_key=spawn_key(label, *indices))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(master: int, label: str, *indices: int) -> int:
    """派生一个 64 位子种子（写入报告或传给下游）"""
    seq = np.random.SeedSequence(int(master) & _MASK64, spawn_key=spawn_key(label, *indices))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
