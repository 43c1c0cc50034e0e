#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : params
@Date       : 2025/5/28 00:07
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 项目参数常量（目录名、文件名、容量上限、数值容差）
"""


class Params(object):

    # ----------------------------项目中目录名称----------------------------
    project_name = "spiked_ising"  # 项目名称
    log_dir_name = "log"  # 日志目录名
    config_dir_name = "config"  # 配置目录名
    # ----------------------------项目中目录名称----------------------------

    # ----------------------------项目参数配置文件----------------------------
    global_config_filename = "global_config.yaml"  # 全局配置文件名（日志）
    system_config_filename = "system.yaml"  # 算法参数配置文件名
    test_config_filename = "test_system.yaml"  # 测试用配置文件名
    # ----------------------------项目参数配置文件----------------------------

    # ------------------------------容量上限------------------------------
    brute_force_max_n = 25  # 穷举上限，约3e7个状态
    transition_max_n = 10  # 显式Glauber转移矩阵上限
    tempering_kernel_max_n = 4  # 显式回火转移矩阵上限
    enumeration_chunk_bits = 16  # 穷举时每块 2^16 个状态
    # ------------------------------容量上限------------------------------

    # ------------------------------数值容差------------------------------
    symmetry_tol = 1e-10  # J 对称性容差
    eig_zero_tol = 1e-12  # 特征值截断为0的阈值
    spike_tie_tol = 1e-12  # 尖峰阈值比较容差
    normalization_tol = 1e-10  # 概率归一化容差
    # ------------------------------数值容差------------------------------


if __name__ == '__main__':
    print(Params.brute_force_max_n)
