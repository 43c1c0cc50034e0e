#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
性能监控测试
验证阶段计时累加、禁用监控、汇总格式
"""
import time

import pytest

from src.config.config_manager import ConfigManager
from src.services.performance_monitor import PerformanceMonitor


def test_stage_timing():
    print("\n" + "=" * 50)
    print("测试阶段计时")
    print("=" * 50)
    monitor = PerformanceMonitor()
    with monitor.stage("decompose"):
        time.sleep(0.02)
    with monitor.stage("estimate_cells"):
        pass
    with monitor.stage("decompose"):
        time.sleep(0.01)

    decompose = monitor.stages["decompose"]
    assert decompose.calls == 2
    assert decompose.wall_time >= 0.03
    assert monitor.order == ["decompose", "estimate_cells"]

    summary = monitor.summary()
    assert list(summary["stages"]) == ["decompose", "estimate_cells"]
    assert summary["wall_time"] >= 0.03
    assert summary["peak_rss_mb"] > 0.0
    assert summary["cpu_count"] >= 1
    print(f"   ✓ 汇总: {summary}")


def test_stage_records_on_error():
    monitor = PerformanceMonitor()
    with pytest.raises(RuntimeError):
        with monitor.stage("sample"):
            raise RuntimeError("失败")
    assert monitor.stages["sample"].calls == 1


def test_disabled_monitoring(tmp_path):
    path = tmp_path / "system.yaml"
    path.write_text("monitoring:\n  enabled: false\n  memory_warning_mb: 1\n", encoding="utf-8")
    monitor = PerformanceMonitor(ConfigManager(path))
    assert monitor.monitoring_enabled is False
    with monitor.stage("oracle"):
        time.sleep(0.01)
    assert monitor.stages["oracle"].calls == 0
    assert monitor.stages["oracle"].wall_time == 0.0
    assert monitor.summary()["stages"]["oracle"]["calls"] == 0


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s"])
