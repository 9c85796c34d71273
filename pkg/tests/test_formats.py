"""Tests for the plain-text artifact formats."""
import numpy as np
import pytest

from zeno_codes.code_search import trivial_embedding
from zeno_codes.control import TimingSequence, default_control_pair
from zeno_codes.error_model import pauli_error_set, pauli_string, random_error_set
from zeno_codes.exceptions import FormatError
from zeno_codes.formats import (
    load_control_pair,
    load_encoding,
    load_error_set,
    load_summary,
    load_timings,
    load_zeno_csv,
    matrix_lines,
    save_control_pair,
    save_encoding,
    save_error_set,
    save_histogram,
    save_summary,
    save_timings,
    save_zeno_csv,
)
from zeno_codes.linalg import SIGMA_X, SIGMA_Z
from zeno_codes.zeno import FieldTrace, ZenoConfig, random_encoding_gain, zeno_run


def test_error_set_file_is_exact(tmp_path):
    errors = random_error_set(6, 3, seed=9)
    path = save_error_set(tmp_path / "errors.txt", errors)
    loaded = load_error_set(path)
    assert loaded.labels == errors.labels
    assert loaded.seed == 9 and loaded.n_qubits == 0
    assert all(np.array_equal(a, b) for a, b in zip(loaded, errors))


def test_error_set_header(tmp_path):
    path = save_error_set(tmp_path / "errors.txt", pauli_error_set(3, 1))
    assert path.read_text().splitlines()[0] == "errorset 3 8 9 1 none"


def test_encoding_file_keeps_trace_and_unitary(tmp_path):
    encoding = trivial_embedding(3, 1)
    encoding.trace = [(0, 0.5), (1, 0.25)]
    loaded = load_encoding(save_encoding(tmp_path / "code.txt", encoding))
    assert np.array_equal(loaded.isometry, encoding.isometry)
    assert np.array_equal(loaded.unitary, encoding.unitary)
    assert loaded.trace == [(0, 0.5), (1, 0.25)]
    assert loaded.converged


def test_timings_file(tmp_path):
    seq = TimingSequence(timings=[0.1, 2.5, 1 / 3], sign=-1, start_tag=2, seed=4, residual=1e-7)
    loaded = load_timings(save_timings(tmp_path / "t.txt", seq))
    assert np.array_equal(loaded.timings, seq.timings)
    assert (loaded.sign, loaded.start_tag, loaded.seed) == (-1, 2, 4)
    assert loaded.residual == 1e-7


def test_control_pair_file(tmp_path):
    pair = default_control_pair(2, seed=3)
    loaded = load_control_pair(save_control_pair(tmp_path / "pair.txt", pair))
    assert np.array_equal(loaded.h1, pair.h1)
    assert np.array_equal(loaded.h2, pair.h2)
    assert loaded.params == pair.params


def test_control_pair_with_edited_params_is_format_error(tmp_path):
    path = save_control_pair(tmp_path / "pair.txt", default_control_pair(2, seed=3))
    text = path.read_text().replace("b_x 1.0", "b_x 2.0")
    assert "b_x 2.0" in text
    path.write_text(text)
    with pytest.raises(FormatError):
        load_control_pair(path)


def test_wrong_header_is_format_error(tmp_path):
    path = save_timings(tmp_path / "t.txt", TimingSequence(timings=[1.0]))
    with pytest.raises(FormatError):
        load_error_set(path)


def test_truncated_file_is_format_error(tmp_path):
    path = save_error_set(tmp_path / "errors.txt", pauli_error_set(2, 1))
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:10]) + "\n")
    with pytest.raises(FormatError):
        load_error_set(path)


def test_non_hermitian_content_is_format_error(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("errorset 1 2 1 1 none\nB\n2 2\n0 0\n1 0\n0 0\n0 0\n")
    with pytest.raises(FormatError):
        load_error_set(path)


def test_zeno_csv_columns(tmp_path, identity_code, info_z_error):
    cfg = ZenoConfig(T=0.25, total_time=1.0)
    report = zeno_run(
        np.array([1.0, 0.0]), identity_code, info_z_error,
        FieldTrace.gaussian(1, cfg.periods, 0.1, seed=0), cfg,
    )
    path = save_zeno_csv(tmp_path / "run.csv", report)
    assert path.read_text().splitlines()[0] == "cycle,fidelity,leakage"
    table = load_zeno_csv(path)
    assert table.shape == (4, 3)
    assert np.array_equal(table[:, 0], [1, 2, 3, 4])
    assert np.array_equal(table[:, 1], report.fidelity_per_cycle)


def test_histogram_row_count(tmp_path):
    stats = random_encoding_gain(3, 1, pauli_error_set(3, 1), trials=4, seed=0)
    path = save_histogram(tmp_path / "hist.csv", stats)
    lines = path.read_text().splitlines()
    assert lines[0] == "trial,m,i,j,magnitude"
    assert len(lines) - 1 == 4 * 9 * 2 * 2


def test_summary_block(tmp_path):
    path = save_summary(tmp_path / "summary.txt", {"final_infidelity": 0.0125, "seeds": 100})
    assert load_summary(path) == {"final_infidelity": 0.0125, "seeds": 100}


def test_error_set_four_field_header(tmp_path):
    """Test a hand-written file with labels first and no seed field."""
    path = tmp_path / "z.txt"
    path.write_text(
        "errorset 2 4 2 1\n"
        "Z.\n"
        ".Z\n"
        + "\n".join(matrix_lines(pauli_string("Z."))) + "\n"
        + "\n".join(matrix_lines(pauli_string(".Z"))) + "\n"
    )
    errors = load_error_set(path)
    assert errors.labels == ("Z.", ".Z")
    assert errors.seed is None and errors.weight == 1
    assert np.array_equal(errors.generators[1], pauli_string(".Z"))


def test_error_set_labels_on_one_line(tmp_path):
    path = tmp_path / "z.txt"
    path.write_text(
        "errorset 1 2 2 1\nX Z\n"
        + "\n".join(matrix_lines(SIGMA_X)) + "\n"
        + "\n".join(matrix_lines(SIGMA_Z)) + "\n"
    )
    assert load_error_set(path).labels == ("X", "Z")


def test_encoding_four_field_header(tmp_path):
    """Test an encoding file with bare 'iter residual' trace lines and no flag."""
    path = tmp_path / "code.txt"
    isometry = np.eye(2, 1, dtype=complex)
    path.write_text(
        "encoding 1 0 0 0\n"
        + "\n".join(matrix_lines(isometry)) + "\n"
        + "0 0.5\n1 0\n"
    )
    encoding = load_encoding(path)
    assert encoding.converged
    assert encoding.seed == 0 and encoding.residual == 0.0
    assert encoding.trace == [(0, 0.5), (1, 0.0)]
    assert encoding.unitary is None
    assert np.array_equal(encoding.isometry, isometry)


def test_encoding_without_trace(tmp_path):
    path = tmp_path / "code.txt"
    path.write_text("encoding 1 0 none 0\n" + "\n".join(matrix_lines(np.eye(2, 1))) + "\n")
    encoding = load_encoding(path)
    assert encoding.trace == [] and encoding.seed is None


def test_timings_without_start_tag(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("timings 2 1 5 1e-7\n0.5\n1.5\n")
    seq = load_timings(path)
    assert seq.start_tag == 1 and seq.seed == 5
    assert np.array_equal(seq.timings, [0.5, 1.5])


def test_header_with_too_many_fields_is_format_error(tmp_path):
    path = tmp_path / "code.txt"
    path.write_text("encoding 1 0 0 0 1 extra\n" + "\n".join(matrix_lines(np.eye(2, 1))) + "\n")
    with pytest.raises(FormatError):
        load_encoding(path)


def test_malformed_trace_line_is_format_error(tmp_path):
    path = tmp_path / "code.txt"
    path.write_text("encoding 1 0 0 0\n" + "\n".join(matrix_lines(np.eye(2, 1))) + "\n0 0.5 7\n")
    with pytest.raises(FormatError):
        load_encoding(path)
