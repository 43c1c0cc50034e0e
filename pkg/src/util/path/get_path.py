#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : get_path
@Date       : 2025/5/28 00:25
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 定位项目根目录
"""
import os
from pathlib import Path
from typing import Optional


class GetPath(object):

    marker_file = "pyproject.toml"

    def __init__(self, start_dir: Optional[str] = None):
        """
        初始化方法。
        从当前文件所在目录向上查找含 pyproject.toml 的目录作为项目根目录，
        找不到时退回到当前工作目录。
        """
        self._current_dir = os.getcwd()
        self._project_dir = self._find_project_dir(start_dir or str(Path(__file__).resolve().parent))

    def _find_project_dir(self, start_dir: str) -> str:
        candidate = Path(start_dir)
        for parent in (candidate, *candidate.parents):
            if (parent / self.marker_file).exists():
                return str(parent)
        return self._current_dir

    def get_project_dir(self) -> str:
        """
        获取项目目录的路径。
        Returns:
            str: 项目目录的路径。
        """
        return self._project_dir

    def get_current_dir(self) -> str:
        """
        获取当前目录。
        Returns:
            str: 当前目录的路径。
        """
        return self._current_dir

    def set_project_dir(self, project_dir: str) -> None:
        """
        设置项目的根目录。
        Args:
            project_dir (str): 项目的根目录路径。
        """
        self._project_dir = project_dir


if __name__ == '__main__':
    print(os.getcwd())
    path = GetPath()
    print(path.get_project_dir())
