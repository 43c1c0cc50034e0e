#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : worker_pool
@Date       : 2025/7/12 11:30
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 保序线程池；结果顺序与输入一致，与完成顺序无关
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from src.core.logger import get_logger

logger = get_logger("WorkerPool")

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """
    线程数为 1 时在调用线程内顺序执行；
    大块 numpy 运算会释放 GIL，多线程对单元/试验级并行有效。
    """

    def __init__(self, threads: int = 1) -> None:
        self.threads = max(1, int(threads))
        self._executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, *exc: object) -> None:
        self.shutdown()

    def _get_executor(self) -> ThreadPoolExecutor:
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="ising-worker")
            logger.debug(f"线程池已启动: {self.threads} 个线程")
        return self._executor

    def map_ordered(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """按输入顺序返回结果；任何任务的异常原样抛出"""
        items = list(items)
        if self.threads == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        executor = self._get_executor()
        futures = [executor.submit(fn, item) for item in items]
        return [future.result() for future in futures]

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None


_inline_pool = WorkerPool(1)


def get_pool(pool: Optional[WorkerPool]) -> WorkerPool:
    return pool if pool is not None else _inline_pool
