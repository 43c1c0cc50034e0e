#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : test_cli
@Date       : 2025/7/18 16:30
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 命令行子命令与退出码测试（使用测试配置缩小预算）
"""
import json

import numpy as np
import pytest
import yaml

from src.config.config_manager import ConfigManager
from src.config.constant import ExitCode
from src.config.path import GlobalPath
from src.core.object import CellData, RunConfig
from src.services.ising import brute_force_log_partition
from src.services.run_driver import run_estimate, run_sample
from src.util.file_helper import load_json_file, load_model
from start import build_parser, main, parse_run_config

TEST_CONFIG = str(GlobalPath.test_config_filepath)


def run_cli(*args: str) -> int:
    return main(["--config", TEST_CONFIG, *args])


@pytest.fixture
def cw_model(tmp_path):
    path = tmp_path / "cw4.json"
    assert run_cli("gen-model", "--kind", "curie-weiss", "--n", "4", "--beta", "1.5", "--output", str(path)) == 0
    return path


@pytest.fixture
def cw_cells(tmp_path, cw_model):
    path = tmp_path / "cells.json"
    code = run_cli("estimate", "--model", str(cw_model), "--grid-L", "2.0", "--grid-eta", "0.5", "--seed", "1",
                   "--output", str(path))
    assert code == 0
    return path


def _json_lines(text: str):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


def test_parser_defaults():
    args = build_parser().parse_args(["sample", "--model", "m.json"])
    assert args.subcommand == "sample"
    assert args.num_samples == 1
    assert args.cells_path is None
    with pytest.raises(SystemExit):
        build_parser().parse_args(["gen-model", "--kind", "unknown"])


def test_gen_model(tmp_path, capsys):
    print("\n" + "=" * 50)
    print("测试 gen-model")
    print("=" * 50)
    path = tmp_path / "graph.json"
    code = run_cli("gen-model", "--kind", "graph", "--n", "6", "--degree", "3", "--beta", "0.4", "--seed", "2",
                   "--output", str(path))
    assert code == ExitCode.OK
    model = load_model(path)
    assert model.n == 6
    assert model.extra["kind"] == "graph"

    capsys.readouterr()
    assert run_cli("gen-model", "--kind", "subset-sum", "--a", "1,2,3", "--b", "2") == 0
    records = _json_lines(capsys.readouterr().out)
    assert records[-1]["n"] == 3
    assert len(records[-1]["J"]) == 9

    assert run_cli("gen-model", "--kind", "curie-weiss", "--n", "4") == ExitCode.INVALID_INPUT


def test_estimate(cw_model, cw_cells):
    """estimate 报告含单元数据，log Ẑ 接近穷举"""
    report = load_json_file(cw_cells)
    print(f"\n   log Ẑ = {report['log_Z_hat']:.5f}, 单元数 {report['num_cells']}")
    assert report["n"] == 4
    assert report["d"] == 1
    assert report["num_cells"] == len(report["cells"]) == 8
    assert report["grid"]["k"] == 8
    assert report["M"] == 5
    assert "performance" in report and "estimate_cells" in report["performance"]["stages"]
    exact = brute_force_log_partition(load_model(cw_model))
    assert abs(report["log_Z_hat"] - exact) < 0.5


def test_sample_with_cells(tmp_path, cw_model, cw_cells):
    out = tmp_path / "samples.jsonl"
    code = run_cli("sample", "--model", str(cw_model), "--cells", str(cw_cells), "--num-samples", "4",
                   "--method", "direct", "--seed", "3", "--output", str(out))
    assert code == ExitCode.OK
    records = _json_lines(out.read_text(encoding="utf-8"))
    assert len(records) == 5
    for record in records[:4]:
        assert len(record["sigma"]) == 4
        assert set(record["sigma"]) <= {-1, 1}
        assert record["trials"] >= 1
    summary = records[-1]["summary"]
    assert summary["num_samples"] == 4
    assert summary["method"] == "direct"


def test_sample_zero(tmp_path, cw_model):
    out = tmp_path / "empty.jsonl"
    assert run_cli("sample", "--model", str(cw_model), "--num-samples", "0", "--output", str(out)) == 0
    records = _json_lines(out.read_text(encoding="utf-8"))
    assert len(records) == 1 and "summary" in records[0]


def test_cells_hash_mismatch(tmp_path, cw_cells):
    other = tmp_path / "cw4b.json"
    assert run_cli("gen-model", "--kind", "curie-weiss", "--n", "4", "--beta", "1.2", "--output", str(other)) == 0
    code = run_cli("sample", "--model", str(other), "--cells", str(cw_cells), "--num-samples", "1",
                   "--output", str(tmp_path / "x.jsonl"))
    assert code == ExitCode.CONSISTENCY


def test_error_exit_codes(tmp_path, cw_model, capsys):
    """错误映射到退出码，stderr 输出一行 JSON 错误"""
    print("\n" + "=" * 50)
    print("测试退出码")
    print("=" * 50)
    assert run_cli("estimate", "--model", str(tmp_path / "missing.json")) == ExitCode.IO
    err = _json_lines(capsys.readouterr().err)
    assert err[-1]["exit_code"] == ExitCode.IO
    assert err[-1]["path"].endswith("missing.json")

    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "J": [0, 1, 1, 0], }', encoding="utf-8")
    assert run_cli("estimate", "--model", str(bad)) == ExitCode.PARSE
    err = _json_lines(capsys.readouterr().err)
    assert err[-1]["line"] == 1

    assert run_cli("estimate", "--model", str(cw_model), "--grid-L", "0.2", "--grid-eta", "1.0") \
        == ExitCode.INVALID_INPUT
    assert run_cli("estimate", "--model", str(cw_model), "--eps", "1.5") == ExitCode.INVALID_INPUT
    assert run_cli("estimate", "--model", str(cw_model), "--grid-L", "10", "--grid-eta", "0.001",
                   "--cell-budget", "100") == ExitCode.CAPACITY
    assert run_cli("sample", "--model", str(cw_model), "--num-samples", "-1") == ExitCode.INVALID_INPUT
    assert run_cli("estimate") == ExitCode.INVALID_INPUT


def test_driver_functions(tmp_path, cw_model):
    """库接口：run_estimate / run_sample 直接返回退出码与报告"""
    cm = ConfigManager(GlobalPath.test_config_filepath)
    config = RunConfig(subcommand="estimate", model_path=str(cw_model), grid_L=2.0, grid_eta=0.5, seed=2)
    result = run_estimate(config, cm)
    assert result.exit_code == ExitCode.OK
    assert result.report["num_cells"] == 8

    out = tmp_path / "driver.jsonl"
    config = RunConfig(subcommand="sample", model_path=str(cw_model), grid_L=2.0, grid_eta=0.5, seed=2,
                       num_samples=2, output=str(out), extra={"method": "direct"})
    result = run_sample(config, cm)
    assert result.exit_code == ExitCode.OK
    assert result.report["num_samples"] == 2
    assert len(_json_lines(out.read_text(encoding="utf-8"))) == 3


def _signed_model_file(tmp_path):
    """n=4：Curie–Weiss 尖峰加一个负方向，每个单元都要解倾斜场"""
    alt = np.array([1.0, -1.0, 1.0, -1.0]) / 2.0
    J = np.full((4, 4), 1.5 / 4) - 0.4 * np.outer(alt, alt)
    path = tmp_path / "signed4.json"
    path.write_text(json.dumps({"n": 4, "J": J.reshape(-1).tolist(), "h": [0.1, 0.0, 0.0, 0.0]}), encoding="utf-8")
    return path


def test_tuning_flags(cw_model):
    """--steps / --chains / --tilt-* / --trace 进入 RunConfig，越界值返回 INVALID_INPUT"""
    args = build_parser().parse_args(["estimate", "--model", "m.json", "--steps", "30", "--chains", "128",
                                      "--tilt-eps", "0.3", "--tilt-delta", "0.05", "--tilt-max-iters", "40",
                                      "--trace"])
    config = parse_run_config(args, ConfigManager(GlobalPath.test_config_filepath))
    assert (config.steps, config.chains, config.tilt_max_iters) == (30, 128, 40)
    assert config.tilt_eps == 0.3 and config.tilt_delta == 0.05
    assert config.trace is True
    assert build_parser().parse_args(["estimate"]).trace is False

    assert run_cli("estimate", "--model", str(cw_model), "--tilt-eps", "1.5") == ExitCode.INVALID_INPUT
    assert run_cli("estimate", "--model", str(cw_model), "--tilt-delta", "0") == ExitCode.INVALID_INPUT
    assert run_cli("estimate", "--model", str(cw_model), "--chains", "0") == ExitCode.INVALID_INPUT
    assert run_cli("estimate", "--model", str(cw_model), "--steps", "0") == ExitCode.INVALID_INPUT
    assert run_cli("estimate", "--model", str(cw_model), "--tilt-max-iters", "0") == ExitCode.INVALID_INPUT


def test_estimate_trace(tmp_path):
    """--trace 时每个单元带倾斜场求解轨迹，缺省不带"""
    model = _signed_model_file(tmp_path)
    common = ["--model", str(model), "--grid-L", "2.0", "--grid-eta", "0.5", "--seed", "5", "--steps", "20",
              "--chains", "500", "--tilt-eps", "0.3", "--tilt-max-iters", "20"]
    traced = tmp_path / "traced.json"
    assert run_cli("estimate", *common, "--trace", "--output", str(traced)) == ExitCode.OK
    report = load_json_file(traced)
    assert report["num_cells"] == 8
    for cell in report["cells"]:
        trace = cell["tilt_trace"]
        assert trace[-1]["selected"] == int(np.argmin(trace[-1]["phase_two_norms"]))
        assert all("grad_norm_estimate" in entry for entry in trace[:-1])
        assert CellData.from_dict(cell).tilt_trace == trace

    plain = tmp_path / "plain.json"
    assert run_cli("estimate", *common, "--output", str(plain)) == ExitCode.OK
    assert all("tilt_trace" not in cell for cell in load_json_file(plain)["cells"])


def test_oracle_compare_capacity(tmp_path):
    big = tmp_path / "cw26.json"
    assert run_cli("gen-model", "--kind", "curie-weiss", "--n", "26", "--beta", "0.5", "--output", str(big)) == 0
    assert run_cli("oracle-compare", "--model", str(big)) == ExitCode.CAPACITY


@pytest.mark.slow
def test_oracle_compare(tmp_path, cw_model):
    """缩小预算下 oracle-compare 通过；容差设为 0 时返回 ORACLE_FAILED"""
    print("\n" + "=" * 50)
    print("测试 oracle-compare")
    print("=" * 50)
    out = tmp_path / "compare.json"
    code = run_cli("oracle-compare", "--model", str(cw_model), "--grid-L", "3.0", "--grid-eta", "0.5",
                   "--num-samples", "300", "--seed", "4", "--output", str(out))
    report = load_json_file(out)
    print(f"   |Δlog Z| = {report['delta_log_Z']:.4f}, TV = {report['tv']:.4f} "
          f"(噪声 {report['tv_noise_floor']:.4f})")
    assert code == ExitCode.OK
    assert report["passed"] is True
    assert report["num_samples"] == 300
    assert report["tilt_residual"] == 0.0

    with open(GlobalPath.test_config_filepath, "r", encoding="utf-8") as f:
        config = yaml.safe_load(f)
    config["oracle_compare"]["log_z_tol"] = 0.0
    strict = tmp_path / "strict.yaml"
    with open(strict, "w", encoding="utf-8") as f:
        yaml.dump(config, f)
    code = main(["--config", str(strict), "oracle-compare", "--model", str(cw_model), "--grid-L", "3.0",
                 "--grid-eta", "0.5", "--num-samples", "50", "--output", str(out)])
    assert code == ExitCode.ORACLE_FAILED
    assert load_json_file(out)["checks"]["log_Z"] is False


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s"])
