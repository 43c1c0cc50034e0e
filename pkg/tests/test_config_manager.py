#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
配置管理器功能测试脚本
测试ConfigManager的读写、默认值合并、热重载、保存，以及各算法参数对象的构造
"""
import math
import os
import time

import pytest
import yaml

from src.config.config_manager import ConfigManager, get_config, get_config_manager, set_config
from src.config.constant import GlauberFormula, SampleMethod
from src.config.path import GlobalPath
from src.config.setting import EstimationSettings, TemperingSettings, TiltSettings


def create_test_config():
    """创建测试配置"""
    return {
        "runtime": {"seed": 7, "threads": 2},
        "estimate": {"eps": 0.3, "delta": 0.05},
        "glauber": {"constant": 10.0, "formula": "bulk", "steps": None},
        "annealing": {"num_trials": 3},
        "tilt": {"max_iters": 100, "batch_size": 8},
        "tempering": {"method": "direct", "batch_size": 32},
    }


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "system.yaml"
    with open(path, "w", encoding="utf-8") as f:
        yaml.dump(create_test_config(), f, default_flow_style=False, allow_unicode=True)
    return path


def test_basic_operations(config_file):
    """测试基本操作：获取、设置、键存在检查"""
    print("\n" + "=" * 50)
    print("测试基本操作")
    print("=" * 50)
    cm = ConfigManager(config_file)

    print("1. 测试获取配置值:")
    assert cm.get("runtime.seed") == 7
    assert cm.get("estimate.eps") == 0.3
    assert cm.get("glauber.steps") is None
    assert cm.get("nonexistent.key", "default") == "default"
    print("   ✓ 获取配置值测试通过")

    print("2. 测试设置配置值:")
    cm.set("runtime.seed", 11)
    cm.set("new.section.value", 123)
    assert cm.get("runtime.seed") == 11
    assert cm.get("new.section.value") == 123
    print("   ✓ 设置配置值测试通过")

    print("3. 测试键存在检查:")
    assert cm.has_key("estimate.delta")
    assert not cm.has_key("estimate.missing")
    assert "tilt" in cm.get_all()
    print("   ✓ 键存在检查测试通过")


def test_defaults_and_update(config_file):
    """默认值被文件覆盖；update 忽略 None"""
    cm = ConfigManager(config_file, defaults={"runtime": {"seed": 0, "threads": 1}, "grid": {"eta": 0.1}})
    assert cm.get("runtime.seed") == 7
    assert cm.get("grid.eta") == 0.1
    cm.update({"grid.eta": None, "grid.L": 2.0})
    assert cm.get("grid.eta") == 0.1
    assert cm.get("grid.L") == 2.0


def test_hot_reload(config_file):
    """测试热重载功能"""
    print("\n" + "=" * 50)
    print("测试热重载功能")
    print("=" * 50)
    cm = ConfigManager(config_file)
    assert cm.reload() is False

    with open(config_file, "w", encoding="utf-8") as f:
        yaml.dump({"runtime": {"seed": 99}}, f)
    # 保证修改时间前进
    later = time.time() + 5
    os.utime(config_file, (later, later))
    assert cm.reload() is True
    assert cm.get("runtime.seed") == 99
    assert cm.get("tilt.max_iters") is None
    print("   ✓ 文件热重载测试通过")

    os.unlink(config_file)
    assert cm.reload() is False


def test_global_functions(config_file):
    """测试全局函数"""
    cm = get_config_manager(config_file)
    assert cm.get("runtime.threads") == 2
    assert get_config("estimate.delta") == 0.05
    set_config("tests.key", "test_value")
    assert get_config("tests.key") == "test_value"


def test_error_handling(tmp_path):
    """不存在或无效的配置文件返回空配置"""
    cm = ConfigManager(tmp_path / "nonexistent_config.yaml")
    assert cm.get("any.key", "default") == "default"
    assert cm.get_all() == {}

    bad = tmp_path / "bad.yaml"
    bad.write_text("invalid: yaml: content: [", encoding="utf-8")
    assert ConfigManager(bad).get_all() == {}
    print("   ✓ 错误处理测试通过")


def test_save_functionality(config_file, tmp_path):
    cm = ConfigManager(config_file)
    cm.set("estimate.eps", 0.1)
    cm.set("new.section", {"key": "value"})
    target = tmp_path / "saved" / "system.yaml"
    cm.save(target)
    with open(target, "r", encoding="utf-8") as f:
        saved = yaml.safe_load(f)
    assert saved["estimate"]["eps"] == 0.1
    assert saved["new"]["section"]["key"] == "value"


def test_settings_from_config(config_file):
    """参数对象读取配置，命令行覆盖优先"""
    print("\n" + "=" * 50)
    print("测试参数对象构造")
    print("=" * 50)
    cm = ConfigManager(config_file)
    settings = EstimationSettings.from_config(cm, eps=0.15, grid_eta=None)
    assert settings.eps == 0.15
    assert settings.delta == 0.05
    assert settings.seed == 7
    assert settings.glauber_formula == GlauberFormula.BULK
    assert settings.glauber_constant == 10.0
    assert settings.num_trials == 3
    assert settings.grid_eta is None
    assert settings.tilt.max_iters == 100
    assert settings.tilt_eps == 0.15

    tempering = TemperingSettings.from_config(cm)
    assert tempering.method == SampleMethod.DIRECT
    assert tempering.batch_size == 32
    assert tempering.estimate_eps == pytest.approx(math.log(2.0))

    defaults = TiltSettings.from_config(None)
    assert defaults == TiltSettings()
    print("   ✓ 参数对象构造测试通过")


def test_shipped_configs_load():
    """仓库自带的两个配置文件都能构造参数对象"""
    for path in (GlobalPath.system_config_filepath, GlobalPath.test_config_filepath):
        cm = ConfigManager(path)
        settings = EstimationSettings.from_config(cm)
        assert 0.0 < settings.eps < 1.0
        assert TemperingSettings.from_config(cm).method == SampleMethod.TEMPERING


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s"])
