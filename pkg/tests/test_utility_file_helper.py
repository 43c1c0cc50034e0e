#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@ProjectName: spiked_ising
@FileName   : test_utility_file_helper
@Date       : 2025/7/18 15:20
@Author     : Donny
@Email      : donnymoving@gmail.com
@Software   : PyCharm
@Description: 数值工具函数与 JSON 文件读写测试
"""
import json
import math

import numpy as np
import pytest
from scipy.special import erf

from src.core.exception import InvalidInputError, ModelIOError, ParseError
from src.models.generators import curie_weiss
from src.util.file_helper import (load_json_file, load_model, model_from_dict, model_to_dict, save_model,
                                  write_json_lines)
from src.util.utility import (ceil_ratio, enumerate_states, is_spin_config, log_cosh, log_erf_diff,
                              log_mean_exp, quadratic_forms, state_index)


def test_ceil_helpers():
    assert ceil_ratio(0.3, 0.1) == 3
    assert ceil_ratio(2.0, 0.3) == 7


@pytest.mark.parametrize("lo,hi", [(-0.5, 0.7), (0.1, 0.4), (-2.0, -1.0), (0.0, 3.0)])
def test_log_erf_diff_moderate(lo, hi):
    expected = math.log(erf(hi) - erf(lo))
    assert log_erf_diff(np.array([lo]), np.array([hi]))[0] == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_log_erf_diff_tails():
    """远尾不下溢：erf(b) − erf(a) ≈ (2/√π)·e^{-a²}/(2a)，a ≫ 1 且 b ≫ a"""
    value = log_erf_diff(np.array([30.0, -31.0]), np.array([31.0, -30.0]))
    expected = -900.0 + math.log(1.0 / (math.sqrt(math.pi) * 30.0)) + math.log1p(-1.0 / (2 * 900.0))
    assert np.all(np.isfinite(value))
    assert value[0] == pytest.approx(value[1])
    assert value[0] == pytest.approx(expected, abs=1e-3)

    narrow = log_erf_diff(np.array([5.0]), np.array([5.0 + 1e-9]))[0]
    assert narrow == pytest.approx(math.log(2.0 / math.sqrt(math.pi) * 1e-9) - 25.0, abs=1e-6)


def test_log_helpers():
    x = np.array([0.0, 1.0, -800.0])
    assert np.allclose(log_cosh(x)[:2], np.log(np.cosh(x[:2])))
    assert log_cosh(x)[2] == pytest.approx(800.0 - math.log(2.0))
    assert log_mean_exp(np.array([0.0, math.log(3.0)])) == pytest.approx(math.log(2.0))


def test_state_enumeration():
    states = enumerate_states(3)
    assert states.shape == (8, 3)
    assert states[0].tolist() == [-1.0, -1.0, -1.0]
    assert states[5].tolist() == [1.0, -1.0, 1.0]
    assert np.array_equal(state_index(states), np.arange(8))
    assert np.array_equal(enumerate_states(3, 2, 4), states[2:4])
    assert is_spin_config(states) and not is_spin_config(np.array([1.0, 0.0]))

    A = np.array([[1.0, 2.0, 0.0], [2.0, 0.0, -1.0], [0.0, -1.0, 3.0]])
    assert np.allclose(quadratic_forms(states, A), np.einsum("ki,ij,kj->k", states, A, states))


def test_model_roundtrip(tmp_path):
    model = curie_weiss(5, 1.3)
    path = tmp_path / "models" / "cw5.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.content_hash() == model.content_hash()
    assert loaded.name == model.name
    assert loaded.extra["kind"] == "curie-weiss"
    assert model_to_dict(loaded)["J"] == model.J.reshape(-1).tolist()


def test_model_from_factors():
    """J_factors 特征形式与 J 相加"""
    U = np.array([[1.0], [1.0], [0.0]]) / math.sqrt(2.0)
    model = model_from_dict({"n": 3, "J": [0.0] * 9, "J_factors": {"U": U.tolist(), "lambda": [2.0]}})
    assert np.allclose(model.J, 2.0 * U @ U.T)
    assert model.h.tolist() == [0.0, 0.0, 0.0]


def test_model_from_dict_errors():
    with pytest.raises(InvalidInputError):
        model_from_dict({"J": [0.0]})
    with pytest.raises(InvalidInputError):
        model_from_dict({"n": 2, "J": [0.0, 1.0, 1.0]})
    with pytest.raises(InvalidInputError):
        model_from_dict({"n": 2, "J": [0.0, 1.0, 1.0, 0.0], "h": [0.0]})
    asym = model_from_dict({"n": 2, "J": [0.0, 1.0, 0.5, 0.0]})
    assert asym.J[0, 1] == asym.J[1, 0] == pytest.approx(0.75)


def test_json_errors(tmp_path):
    """缺失文件 → ModelIOError；语法错误 → ParseError（带行列号）"""
    with pytest.raises(ModelIOError) as info:
        load_json_file(tmp_path / "missing.json")
    assert info.value.path.endswith("missing.json")

    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "n": 2,\n  "J": [0, 1,, 0]\n}', encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_json_file(bad)
    assert info.value.line == 3
    assert info.value.column > 1

    array = tmp_path / "array.json"
    array.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ParseError):
        load_json_file(array)


def test_write_json_lines(tmp_path, capsys):
    path = tmp_path / "out" / "samples.jsonl"
    assert write_json_lines([{"sigma": [1, -1]}, {"summary": {"n": 2}}], path) == 2
    lines = path.read_text(encoding="utf-8").splitlines()
    assert [json.loads(line) for line in lines] == [{"sigma": [1, -1]}, {"summary": {"n": 2}}]

    assert write_json_lines([{"a": 1}]) == 1
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1]) == {"a": 1}


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s"])
