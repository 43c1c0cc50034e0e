#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : start
@Date       : 2025/7/6 22:00
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 命令行入口
    python start.py gen-model --kind curie-weiss --n 8 --beta 1.5 --output cw8.json
    python start.py estimate --model cw8.json --eps 0.2 --output cells.json
    python start.py sample --model cw8.json --num-samples 100 --cells cells.json
    python start.py oracle-compare --model cw8.json
"""
import argparse
import json
import os
import sys
import traceback
from pathlib import Path
from typing import Any, Dict, List, Optional

# 添加项目根目录到Python路径
sys.path.insert(0, str(Path(__file__).parent))

from src.__version__ import __version__  # noqa: E402
from src.config.config_manager import ConfigManager, get_config_manager  # noqa: E402
from src.config.constant import ExitCode, ModelKind, SampleMethod  # noqa: E402
from src.core.exception import IsingError, SamplerFailureError  # noqa: E402
from src.core.logger import get_logger, project_logger  # noqa: E402
from src.core.object import RunConfig  # noqa: E402
from src.services.run_driver import RunDriver  # noqa: E402
from src.util.file_helper import load_json_file  # noqa: E402

logger = get_logger("Start")

THREADS_ENV = "ISING_THREADS"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", dest="model_path", help="模型 JSON 文件")
    parser.add_argument("--eps", type=float, help="精度 ε ∈ (0,1)")
    parser.add_argument("--delta", type=float, help="失败概率 δ ∈ (0,1)")
    parser.add_argument("--c", type=float, help="谱分解参数 c > 1")
    parser.add_argument("--seed", type=int, help="主随机种子")
    parser.add_argument("--threads", type=int, help=f"线程数（缺省读取环境变量 {THREADS_ENV}）")
    parser.add_argument("--grid-L", dest="grid_L", type=float, help="网格半宽 L")
    parser.add_argument("--grid-eta", dest="grid_eta", type=float, help="网格边长 η")
    parser.add_argument("--cell-budget", dest="cell_budget", type=int, help="网格单元数上限")
    parser.add_argument("--steps", type=int, help="每个 Glauber 样本的步数（覆盖步数公式）")
    parser.add_argument("--chains", type=int, help="同步推进的 Glauber 链数上限")
    parser.add_argument("--tilt-eps", dest="tilt_eps", type=float, help="倾斜场梯度阈值 ε")
    parser.add_argument("--tilt-delta", dest="tilt_delta", type=float, help="倾斜场求解失败概率 δ")
    parser.add_argument("--tilt-max-iters", dest="tilt_max_iters", type=int, help="每条 SGD 轨迹的迭代上限")
    parser.add_argument("--trace", action="store_true", help="估计报告中附带倾斜场求解轨迹")
    parser.add_argument("--output", help="输出文件，缺省写到 stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spiked-ising", description="低秩尖峰 Ising 模型的配分函数估计与采样")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="YAML 配置文件（缺省 config/system.yaml）")
    parser.add_argument("--log-level", dest="log_level", help="日志级别，如 DEBUG / INFO / WARNING")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("gen-model", help="生成应用实例族的模型文件")
    gen.add_argument("--kind", required=True, choices=[kind.value for kind in ModelKind])
    gen.add_argument("--n", type=int)
    gen.add_argument("--beta", type=float)
    gen.add_argument("--beta1", type=float)
    gen.add_argument("--beta2", type=float)
    gen.add_argument("--m", type=int, help="hopfield 随机模式个数")
    gen.add_argument("--patterns", help='hopfield 模式文件 {"patterns": [[±1,...],...]}')
    gen.add_argument("--adjacency", help='graph 邻接矩阵文件 {"adjacency": [[0/1,...],...]}')
    gen.add_argument("--degree", type=int, help="graph 随机正则图的度")
    gen.add_argument("--sign", type=int, choices=[-1, 1], help="graph：−1 反铁磁，+1 铁磁")
    gen.add_argument("--lambda", dest="lam", type=float, help="posterior 图部分权重 λ")
    gen.add_argument("--mu", type=float, help="posterior 信噪比 μ")
    gen.add_argument("--p", type=int, help="posterior 上下文维数 p")
    gen.add_argument("--a", help="subset-sum 整数向量，逗号分隔")
    gen.add_argument("--b", type=int, help="subset-sum 目标和")
    gen.add_argument("--seed", type=int, help="随机模型族的种子")
    gen.add_argument("--output", help="输出文件，缺省写到 stdout")

    estimate = sub.add_parser("estimate", help="估计 log Z，输出含单元数据的报告")
    _add_common(estimate)

    sample = sub.add_parser("sample", help="模拟回火采样，输出 JSON lines")
    _add_common(sample)
    sample.add_argument("--num-samples", dest="num_samples", type=int, default=1)
    sample.add_argument("--cells", dest="cells_path", help="复用 estimate 输出的单元数据")
    sample.add_argument("--method", choices=[method.value for method in SampleMethod])

    compare = sub.add_parser("oracle-compare", help="与穷举基准对照（n ≤ 25）")
    _add_common(compare)
    compare.add_argument("--num-samples", dest="num_samples", type=int, help="对照用样本数")
    return parser


def load_config(path: Optional[str]) -> ConfigManager:
    return ConfigManager(path) if path else get_config_manager()


def resolve_threads(value: Optional[int], cm: ConfigManager) -> int:
    """命令行 > 环境变量 > 配置文件 > 1"""
    if value is not None:
        return value
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            logger.warning(f"环境变量 {THREADS_ENV}={env!r} 不是整数，已忽略")
    return int(cm.get("runtime.threads", 1))


def gen_model_params(args: argparse.Namespace) -> Dict[str, Any]:
    params: Dict[str, Any] = {
        "n": args.n, "beta": args.beta, "beta1": args.beta1, "beta2": args.beta2, "m": args.m,
        "degree": args.degree, "sign": args.sign, "lambda": args.lam, "mu": args.mu, "p": args.p, "b": args.b,
    }
    if args.patterns:
        params["patterns"] = load_json_file(args.patterns)["patterns"]
    if args.adjacency:
        params["adjacency"] = load_json_file(args.adjacency)["adjacency"]
    if args.a:
        params["a"] = [int(x) for x in args.a.split(",")]
    return {key: value for key, value in params.items() if value is not None}


def parse_run_config(args: argparse.Namespace, cm: ConfigManager) -> RunConfig:
    def pick(name: str, key: str, default: Any) -> Any:
        value = getattr(args, name, None)
        return value if value is not None else cm.get(key, default)

    extra: Dict[str, Any] = {}
    if args.subcommand == "gen-model":
        extra = {"kind": args.kind, "params": gen_model_params(args)}
        if args.seed is not None:
            extra["model_seed"] = args.seed
    if getattr(args, "method", None):
        extra["method"] = args.method
    if args.subcommand == "oracle-compare" and args.num_samples is not None:
        cm.set("oracle_compare.num_samples", args.num_samples)

    return RunConfig(
        subcommand=args.subcommand,
        model_path=getattr(args, "model_path", None),
        eps=float(pick("eps", "estimate.eps", 0.2)),
        delta=float(pick("delta", "estimate.delta", 0.1)),
        c=pick("c", "spectral.c", None),
        seed=int(pick("seed", "runtime.seed", 0)),
        threads=resolve_threads(getattr(args, "threads", None), cm),
        grid_L=pick("grid_L", "grid.L", None),
        grid_eta=pick("grid_eta", "grid.eta", None),
        cell_budget=pick("cell_budget", "grid.cell_budget", None),
        output=getattr(args, "output", None),
        cells_path=getattr(args, "cells_path", None),
        num_samples=int(args.num_samples) if args.subcommand == "sample" else 1,
        steps=getattr(args, "steps", None),
        chains=getattr(args, "chains", None),
        tilt_eps=getattr(args, "tilt_eps", None),
        tilt_delta=getattr(args, "tilt_delta", None),
        tilt_max_iters=getattr(args, "tilt_max_iters", None),
        trace=bool(getattr(args, "trace", False)),
        extra=extra,
    )


def _report_error(e: IsingError) -> None:
    payload: Dict[str, Any] = {"error": type(e).__name__, "message": str(e), "exit_code": int(e.exit_code)}
    for attr in ("path", "line", "column", "count"):
        if getattr(e, attr, None) is not None:
            payload[attr] = getattr(e, attr)
    if isinstance(e, SamplerFailureError):
        payload["diagnostics"] = e.diagnostics
    sys.stderr.write(json.dumps(payload, ensure_ascii=False, default=str) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """解析参数、运行子命令，返回退出码"""
    args = build_parser().parse_args(argv)
    if args.log_level:
        project_logger.set_global_level(args.log_level.upper())
    try:
        cm = load_config(args.config)
        config = parse_run_config(args, cm)
        result = RunDriver(config, cm).run()
        if args.subcommand in ("estimate", "oracle-compare") and not config.output:
            sys.stdout.write(json.dumps(result.report, ensure_ascii=False) + "\n")
        return int(result.exit_code)
    except IsingError as e:
        logger.error(f"{type(e).__name__}: {e}")
        _report_error(e)
        return int(e.exit_code)
    except KeyboardInterrupt:
        logger.info("收到中断信号，正在退出...")
        return int(ExitCode.INTERNAL)
    except Exception as e:
        logger.error(f"未预期的异常: {e}\n{traceback.format_exc()}")
        return int(ExitCode.INTERNAL)


if __name__ == "__main__":
    # 检查Python版本
    if sys.version_info < (3, 10):
        print("需要Python 3.10或更高版本")
        sys.exit(1)
    sys.exit(main())
