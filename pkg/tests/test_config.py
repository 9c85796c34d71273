"""Tests for run config files."""
import pytest

from zeno_codes.config import (
    format_config,
    load_config,
    merge_config,
    parse_config,
    write_config_echo,
)
from zeno_codes.exceptions import FormatError


def test_parse_config_coerces_values():
    values = parse_config("n 7\ntol 1e-9\nnoise-mode exact\ngrow yes\n")
    assert values == {"n": 7, "tol": 1e-9, "noise_mode": "exact", "grow": True}


def test_parse_config_skips_comments_and_blanks():
    assert parse_config("# header\n\nk 2  # info qubits\n") == {"k": 2}


def test_parse_config_rejects_bare_key():
    with pytest.raises(FormatError):
        parse_config("seed\n")


def test_merge_config_flags_win():
    merged = merge_config({"seed": 1, "tol": 1e-6}, {"seed": 4, "tol": None})
    assert merged == {"seed": 4, "tol": 1e-6}


def test_format_config_sorted_and_exact():
    text = format_config({"tol": 0.1, "k": 2, "skip": None})
    assert text == "k 2\ntol 0.1\n"


def test_config_echo_reloads(tmp_path):
    values = {"command": "synth", "m_prime": 14, "beta0": 0.75, "T": "0.1,0.05"}
    path = write_config_echo(tmp_path / "run.config", values)
    assert load_config(path) == values
