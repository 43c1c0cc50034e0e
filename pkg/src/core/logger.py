#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : logger
@Date       : 2025/6/27 17:16
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 日志模块，包含日志配置和日志记录器
"""
import functools
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional, Any, Callable, Dict, TypeVar, cast

from loguru import logger

from src.config.global_config import config_settings
from src.config.params import Params
from src.config.path import GlobalPath


__all__ = [
    "get_logger",
    "get_run_logger",
    "log_exceptions",
    "logger",
]

_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")


def _get_log_format(record: Any) -> str:
    """动态获取日志格式，根据是否绑定了运行ID决定格式"""
    has_run = "run_id" in record["extra"] and record["extra"]["run_id"]

    if has_run:
        return (
            "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
            "<level>{level}</level> | "
            "<magenta>{extra[run_id]}</magenta> | "
            "<cyan>{extra[module_name]}</cyan> | "
            "<cyan>{function}:{line}</cyan> | "
            "<level>{message}</level>\n"
        )
    return (
        "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
        "<level>{level}</level> | "
        "<cyan>{extra[module_name]}</cyan> | "
        "<cyan>{function}:{line}</cyan> | "
        "<level>{message}</level>\n"
    )


class Logger:
    """
    项目全局日志工具（支持模块名和运行ID）

    功能：
    1. 添加模块名作为日志输出的一部分
    2. 可选绑定运行ID(run_id)，区分同一进程中的多次估计/采样
    3. 支持按模块设置日志级别
    """

    def __init__(self) -> None:
        self.logger = logger
        # 从全局设置中读取日志设置
        self.log_settings: dict = config_settings.get("log", {})
        # 输出的最低日志级别（例如，"DEBUG"、"INFO"）。
        self.level: str = str(self.log_settings.get("level", "INFO")).upper()
        self.module_name: str = Params.project_name  # 用于日志文件命名
        self.module_loggers: Dict[str, Dict[str, Any]] = {}
        self.run_loggers: Dict[str, Dict[str, Any]] = {}
        self._configure_logger()

    def _configure_logger(self) -> None:
        """配置基础日志器"""
        self.logger.remove()

        # 控制台日志配置（输出到 stderr，stdout 留给 JSON 结果）
        if self.log_settings.get("console", True):
            self.logger.add(
                sink=sys.stderr,
                level=self.level,
                format=_get_log_format,
                colorize=True,
                filter=self._log_filter
            )
        # 文件日志配置
        if self.log_settings.get("file", False):
            log_dir: Path = GlobalPath.log_dir_path
            log_dir.mkdir(parents=True, exist_ok=True)
            current_date = datetime.now().strftime("%Y%m%d")
            file_sink = log_dir.joinpath(f"{self.module_name}_{current_date}.log")
            self.logger.add(
                sink=file_sink,
                level=self.level,
                format=_get_log_format,
                rotation=self.log_settings.get("log_rotation", "100 MB"),
                retention=self.log_settings.get("log_retention", "7 days"),
                encoding="utf-8",
                enqueue=True,
                filter=self._log_filter
            )

    def _log_filter(self, record: Any) -> bool:
        """日志过滤器，根据模块/运行ID设置日志级别"""
        extra = record["extra"]
        extra.setdefault("module_name", "")

        module_name = extra.get("module_name", "")
        if module_name in self.module_loggers:
            if record["level"].no < self.module_loggers[module_name]["level_no"]:
                return False

        run_id = extra.get("run_id", "")
        if run_id and run_id in self.run_loggers:
            if record["level"].no < self.run_loggers[run_id]["level_no"]:
                return False

        return True

    def get_custom_logger(
            self,
            module_name: str = "",
            run_id: Optional[str] = None,
            level: Optional[str] = None
    ) -> Any:
        """
        获取模块特定的日志器
        :param module_name: 模块名称
        :param run_id: 可选，运行ID
        :param level: 可选，为该模块设置特定日志级别
        :return: 绑定模块名和运行ID的日志器
        """
        extra = {"module_name": module_name}
        if run_id:
            extra["run_id"] = run_id

        custom_logger = self.logger.bind(**extra)

        if level:
            self.set_log_level(run_id or module_name, level, is_run=bool(run_id))

        return custom_logger

    def set_log_level(self, identifier: str = "", level: str = "INFO", is_run: bool = False) -> None:
        """
        设置特定模块或运行的日志级别
        :param identifier: 模块名或运行ID
        :param level: 日志级别
        :param is_run: 是否为运行级别
        """
        level = level.upper()
        if level not in _LEVELS:
            return

        entry = {"level": level, "level_no": logger.level(level).no}
        if is_run:
            self.run_loggers[identifier] = entry
        else:
            self.module_loggers[identifier] = entry

    def set_global_level(self, level: str) -> None:
        """重新配置所有输出的最低级别（命令行 --log-level）"""
        level = level.upper()
        if level in _LEVELS and level != self.level:
            self.level = level
            self._configure_logger()


# 创建全局日志实例
project_logger = Logger()


def get_logger(module_name: str = "", run_id: Optional[str] = None, level: Optional[str] = None) -> Any:
    """
    获取模块日志器（简化函数）
    :param module_name: 模块名称
    :param run_id: 可选，运行ID
    :param level: 可选，模块特定日志级别
    :return: 绑定模块名的日志器
    """
    return project_logger.get_custom_logger(module_name=module_name, run_id=run_id, level=level)


def get_run_logger(module_name: str, run_id: str) -> Any:
    """获取绑定运行ID的日志器"""
    return project_logger.get_custom_logger(module_name=module_name, run_id=run_id)


T = TypeVar('T')


def log_exceptions(module_name: Optional[str] = None) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """
    自动记录函数异常的装饰器（支持模块名）
    :param module_name: 模块名称，用于日志标识
    """

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        mod_name = module_name or cast(Any, func).__module__
        mod_logger = get_logger(mod_name)

        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            try:
                return func(*args, **kwargs)
            except Exception as e:
                mod_logger.opt(exception=True).debug(f"{func.__name__} 异常: {e}")
                raise

        return wrapper

    return decorator
