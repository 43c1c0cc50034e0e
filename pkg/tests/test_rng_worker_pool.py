#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : test_rng_worker_pool
@Date       : 2025/7/18 15:50
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 可拆分随机流与保序线程池测试
"""
import threading
import time

import numpy as np
import pytest

from src.core.rng import derive_seed, make_rng, spawn_key
from src.core.worker_pool import WorkerPool, get_pool


def test_streams_are_reproducible():
    a = make_rng(42, "cell", 3, 1).random(5)
    b = make_rng(42, "cell", 3, 1).random(5)
    assert np.array_equal(a, b)


def test_streams_are_distinct():
    """不同种子、标签或下标给出不同的流"""
    base = make_rng(42, "cell", 3, 1).random(5)
    for other in (make_rng(43, "cell", 3, 1), make_rng(42, "trial", 3, 1), make_rng(42, "cell", 3, 2),
                  make_rng(42, "cell", 1, 3)):
        assert not np.array_equal(base, other.random(5))
    assert spawn_key("cell", 1) != spawn_key("cell", 1, 0)


def test_derive_seed():
    assert derive_seed(7, "sample") == derive_seed(7, "sample")
    assert derive_seed(7, "sample") != derive_seed(7, "sample", 1)
    assert 0 <= derive_seed(-1, "x") < 2 ** 64


def test_pool_preserves_order():
    """完成顺序被打乱时结果仍按输入顺序返回"""
    print("\n" + "=" * 50)
    print("测试保序线程池")
    print("=" * 50)

    def slow_square(i: int) -> int:
        time.sleep(0.01 * (5 - i))
        return i * i

    with WorkerPool(4) as pool:
        assert pool.map_ordered(slow_square, range(6)) == [i * i for i in range(6)]
    assert pool._executor is None
    print("   ✓ 结果顺序与输入一致")


def test_pool_uses_threads():
    names = set()
    barrier = threading.Barrier(3, timeout=5)

    def record(_: int) -> None:
        names.add(threading.current_thread().name)
        barrier.wait()

    with WorkerPool(3) as pool:
        pool.map_ordered(record, range(3))
    assert len(names) == 3
    assert all(name.startswith("ising-worker") for name in names)


def test_pool_inline_and_errors():
    pool = get_pool(None)
    assert pool.threads == 1
    assert pool.map_ordered(lambda x: x + 1, [1, 2]) == [2, 3]
    assert WorkerPool(0).threads == 1

    def fail(i: int) -> int:
        if i == 2:
            raise ValueError("boom")
        return i

    with WorkerPool(2) as threaded:
        with pytest.raises(ValueError):
            threaded.map_ordered(fail, range(4))


def test_parallel_random_streams_match_serial():
    """每个任务用自己的流，线程数不影响结果"""
    def draw(i: int) -> float:
        return float(make_rng(5, "task", i).normal())

    serial = WorkerPool(1).map_ordered(draw, range(16))
    with WorkerPool(4) as pool:
        threaded = pool.map_ordered(draw, range(16))
    assert serial == threaded


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s"])
