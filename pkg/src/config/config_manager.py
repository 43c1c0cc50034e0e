#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : config_manager
@Date       : 2025/7/6 20:00
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 配置管理器，点号路径读写 system.yaml，支持热重载与覆盖
"""
import copy
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from src.config.path import GlobalPath
from src.core.logger import get_logger


logger = get_logger("ConfigManager")


class ConfigManager:
    """YAML 配置管理，键用点号分隔，例如 ``annealing.trials_constant``"""

    def __init__(self, config_file: Union[str, Path], defaults: Optional[Dict[str, Any]] = None):
        self.config_file = Path(config_file)
        self.defaults: Dict[str, Any] = copy.deepcopy(defaults or {})
        self.config: Dict[str, Any] = {}
        self.last_modified = 0.0

        self.load_config()

    def load_config(self) -> None:
        """加载配置文件，文件中的值覆盖默认值"""
        loaded: Dict[str, Any] = {}
        try:
            if self.config_file.exists():
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    loaded = yaml.safe_load(f) or {}
                self.last_modified = self.config_file.stat().st_mtime
                logger.debug(f"配置文件已加载: {self.config_file}")
            else:
                logger.warning(f"配置文件不存在: {self.config_file}，使用默认值")
        except yaml.YAMLError as e:
            logger.error(f"加载配置文件失败 {self.config_file}: {e}")
            loaded = {}
        self.config = _deep_merge(copy.deepcopy(self.defaults), loaded)

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置值，支持点号分隔的路径"""
        keys = key.split('.')
        value: Any = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """设置配置值"""
        keys = key.split('.')
        config = self.config

        # 导航到父级字典
        for k in keys[:-1]:
            if k not in config or not isinstance(config[k], dict):
                config[k] = {}
            config = config[k]

        config[keys[-1]] = value
        logger.debug(f"配置已更新: {key} = {value}")

    def update(self, overrides: Dict[str, Any]) -> None:
        """批量覆盖配置，值为 None 的键忽略（命令行未给出的参数）"""
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)

    def reload(self) -> bool:
        """文件被修改后重新加载"""
        if not self.config_file.exists():
            return False

        current_modified = self.config_file.stat().st_mtime
        if current_modified <= self.last_modified:
            return False

        self.load_config()
        logger.info("配置文件已热重载")
        return True

    def save(self, path: Optional[Union[str, Path]] = None) -> None:
        """保存配置到文件"""
        target = Path(path) if path else self.config_file
        target.parent.mkdir(parents=True, exist_ok=True)

        with open(target, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self.config, f, default_flow_style=False,
                           allow_unicode=True, indent=2)

        if target == self.config_file:
            self.last_modified = self.config_file.stat().st_mtime
        logger.info(f"配置已保存: {target}")

    def get_all(self) -> Dict[str, Any]:
        """获取所有配置"""
        return copy.deepcopy(self.config)

    def has_key(self, key: str) -> bool:
        """检查配置键是否存在"""
        keys = key.split('.')
        value: Any = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return False
        return True


def _deep_merge(base: Dict[str, Any], other: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in other.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            base[key] = _deep_merge(base[key], value)
        else:
            base[key] = value
    return base


# 全局配置管理器实例（单例模式）
_global_config: Optional[ConfigManager] = None


def get_config_manager(config_file: Optional[Union[str, Path]] = None) -> ConfigManager:
    """获取全局配置管理器实例"""
    global _global_config
    if _global_config is None or (config_file is not None and Path(config_file) != _global_config.config_file):
        _global_config = ConfigManager(config_file or GlobalPath.system_config_filepath)
    return _global_config


def get_config(key: str, default: Any = None) -> Any:
    """快捷方式：获取配置值"""
    return get_config_manager().get(key, default)


def set_config(key: str, value: Any) -> None:
    """快捷方式：设置配置值"""
    get_config_manager().set(key, value)
