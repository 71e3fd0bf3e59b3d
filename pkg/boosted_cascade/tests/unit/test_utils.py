import os
import pytest
from boosted_cascade.utils import atomic_write_text, dumps_json, format_real, parse_settings


def test_parse_settings():
    settings = ["train.seed=7", "train.loss_family=PWE", "train.decay_rate=[1, 2.5]", "model.include_base_features=true"]
    expected = {
        "train.seed": 7,
        "train.loss_family": "PWE",
        "train.decay_rate": [1, 2.5],
        "model.include_base_features": True,
    }
    assert parse_settings(settings) == expected

def test_parse_settings_value_with_equals():
    assert parse_settings(["paths.checkpoint=runs/a=b.json"]) == {"paths.checkpoint": "runs/a=b.json"}

def test_parse_settings_invalid():
    with pytest.raises(ValueError):
        parse_settings(["invalid_setting"])
    with pytest.raises(ValueError):
        parse_settings(["=3"])

def test_format_real_round_trips():
    x = 0.1 + 0.2
    assert float(format_real(x)) == x
    assert format_real(1.0) == "1.0"

def test_dumps_json_is_canonical():
    assert dumps_json({"b": 1, "a": [0.5]}) == dumps_json({"a": [0.5], "b": 1})
    assert dumps_json({"a": 1}).endswith("\n")
    with pytest.raises(ValueError):
        dumps_json({"a": float("nan")})

def test_atomic_write_text(tmp_path):
    path = tmp_path / "sub" / "out.txt"
    assert atomic_write_text(str(path), "one\n") == str(path)
    atomic_write_text(str(path), "two\n")
    assert path.read_text() == "two\n"
    assert os.listdir(tmp_path / "sub") == ["out.txt"]
