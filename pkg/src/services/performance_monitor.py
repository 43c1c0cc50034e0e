#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : performance_monitor.py
@Date       : 2025/1/15 16:00
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 性能监控模块 - 记录一次运行各阶段的墙钟时间、CPU 时间与内存峰值
"""
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import psutil

from src.config.config_manager import ConfigManager
from src.core.logger import get_logger

logger = get_logger("PerformanceMonitor")


@dataclass
class StageMetrics:
    """单个阶段的性能指标"""
    name: str
    wall_time: float = 0.0
    cpu_time: float = 0.0
    rss_mb_start: float = 0.0
    rss_mb_end: float = 0.0
    calls: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "wall_time": round(self.wall_time, 6),
            "cpu_time": round(self.cpu_time, 6),
            "rss_mb_start": round(self.rss_mb_start, 3),
            "rss_mb_end": round(self.rss_mb_end, 3),
            "calls": self.calls,
        }


@dataclass
class SystemMetrics:
    """进程级指标"""
    peak_rss_mb: float = 0.0
    cpu_count: int = field(default_factory=lambda: psutil.cpu_count() or 1)
    start_time: float = field(default_factory=time.perf_counter)


class PerformanceMonitor:
    """性能监控器 - 按阶段计时，报告随 JSON 结果一起输出"""

    def __init__(self, config: Optional[ConfigManager] = None) -> None:
        self._process = psutil.Process()
        self.stages: Dict[str, StageMetrics] = {}
        self.order: List[str] = []
        self.system_metrics = SystemMetrics()
        self._stats_lock = threading.Lock()

        self.monitoring_enabled = True if config is None else bool(config.get("monitoring.enabled", True))
        self.memory_warning_mb = None if config is None else config.get("monitoring.memory_warning_mb", None)
        self._sample_memory()

    def _rss_mb(self) -> float:
        return self._process.memory_info().rss / 1024 / 1024

    def _cpu_seconds(self) -> float:
        times = self._process.cpu_times()
        return times.user + times.system

    def _sample_memory(self) -> float:
        rss = self._rss_mb()
        with self._stats_lock:
            self.system_metrics.peak_rss_mb = max(self.system_metrics.peak_rss_mb, rss)
        if self.memory_warning_mb is not None and rss > float(self.memory_warning_mb):
            logger.warning(f"内存使用 {rss:.1f} MB 超过阈值 {self.memory_warning_mb} MB")
        return rss

    @contextmanager
    def stage(self, name: str) -> Iterator[StageMetrics]:
        """
        阶段计时上下文，同名阶段累加。

        with monitor.stage("decompose"):
            ...
        """
        with self._stats_lock:
            metrics = self.stages.get(name)
            if metrics is None:
                metrics = StageMetrics(name=name)
                self.stages[name] = metrics
                self.order.append(name)
        if not self.monitoring_enabled:
            yield metrics
            return

        rss_start = self._sample_memory()
        wall_start = time.perf_counter()
        cpu_start = self._cpu_seconds()
        try:
            yield metrics
        finally:
            wall = time.perf_counter() - wall_start
            cpu = self._cpu_seconds() - cpu_start
            rss_end = self._sample_memory()
            with self._stats_lock:
                metrics.wall_time += wall
                metrics.cpu_time += cpu
                if metrics.calls == 0:
                    metrics.rss_mb_start = rss_start
                metrics.rss_mb_end = rss_end
                metrics.calls += 1
            logger.debug(f"阶段 {name} 完成: 墙钟 {wall:.3f}s, CPU {cpu:.3f}s, RSS {rss_end:.1f} MB")

    @property
    def wall_time(self) -> float:
        return time.perf_counter() - self.system_metrics.start_time

    def summary(self) -> Dict[str, Any]:
        self._sample_memory()
        return {
            "wall_time": round(self.wall_time, 6),
            "cpu_time": round(self._cpu_seconds(), 6),
            "peak_rss_mb": round(self.system_metrics.peak_rss_mb, 3),
            "cpu_count": self.system_metrics.cpu_count,
            "stages": {name: self.stages[name].to_dict() for name in self.order},
        }
