"""Plain-text artifact formats.

Every file starts with a header line naming its kind. Matrices are written
as a ``rows cols`` line followed by one ``re im`` line per entry in
row-major order, with 17 significant digits so values survive the round
trip exactly.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .code_search import Encoding
from .config import format_config, parse_config
from .control import ControlPair, TimingSequence
from .error_model import ErrorSet
from .exceptions import FormatError, ZenoCodeError
from .zeno import RandomEncodingStats, ZenoReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FLOAT_FMT = "%.17g"


class _Lines:
    """Line cursor that turns running off the end into a FormatError."""

    def __init__(self, text: str, path: PathLike):
        self._lines: Iterator[Tuple[int, str]] = (
            (i, line.strip()) for i, line in enumerate(text.splitlines(), 1) if line.strip()
        )
        self.path = path
        self.lineno = 0

    def next(self) -> List[str]:
        try:
            self.lineno, line = next(self._lines)
        except StopIteration:
            raise FormatError(f"{self.path}: unexpected end of file")
        return line.split()

    def rest(self) -> List[List[str]]:
        return [line.split() for _, line in self._lines]

    def fail(self, message: str) -> FormatError:
        return FormatError(f"{self.path}:{self.lineno}: {message}")


def _read_text(path: PathLike) -> str:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _write_text(path: PathLike, lines: List[str]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    logger.info(f"Saved {path}")
    return path


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def _seed_token(seed: Optional[int]) -> str:
    return "none" if seed is None else str(seed)


def _parse_seed(token: str) -> Optional[int]:
    return None if token == "none" else int(token)


def _header(cursor: _Lines, kind: str, fields: int, optional: Sequence[str] = ()) -> List[str]:
    """Header fields after the kind tag; missing optional trailing fields take their defaults."""
    head = cursor.next()
    if not head or head[0] != kind:
        raise cursor.fail(f"expected a '{kind}' header, got {' '.join(head)!r}")
    if not fields <= len(head) - 1 <= fields + len(optional):
        raise cursor.fail(
            f"'{kind}' header needs {fields} to {fields + len(optional)} fields, got {len(head) - 1}"
        )
    values = head[1:]
    return values + list(optional[len(values) - fields:])


def matrix_lines(a: np.ndarray) -> List[str]:
    rows, cols = a.shape
    lines = [f"{rows} {cols}"]
    lines.extend(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in np.asarray(a, dtype=complex).ravel())
    return lines


def read_matrix(cursor: _Lines) -> np.ndarray:
    shape = cursor.next()
    if len(shape) != 2:
        raise cursor.fail("expected 'rows cols'")
    rows, cols = int(shape[0]), int(shape[1])
    values = np.empty(rows * cols, dtype=complex)
    for i in range(rows * cols):
        entry = cursor.next()
        if len(entry) != 2:
            raise cursor.fail("expected 're im'")
        values[i] = complex(float(entry[0]), float(entry[1]))
    return values.reshape(rows, cols)


def _parsing(kind: str, path: PathLike, parse):
    """Run ``parse`` and report malformed content as FormatError."""
    try:
        return parse(_Lines(_read_text(path), path))
    except (FormatError, OSError):
        raise
    except ZenoCodeError as e:
        raise FormatError(f"{path}: invalid {kind}: {e}") from e
    except (ValueError, IndexError, KeyError) as e:
        raise FormatError(f"{path}: malformed {kind} file: {e}") from e


# ==============================================================================
# ERROR SETS
# ==============================================================================

def save_error_set(path: PathLike, errors: ErrorSet) -> Path:
    """Header ``errorset n dim M t seed``, the M labels one per line, then the M matrices."""
    lines = [f"errorset {errors.n_qubits} {errors.dim} {errors.M} {errors.weight} {_seed_token(errors.seed)}"]
    lines.extend(errors.labels)
    for e in errors.generators:
        lines.extend(matrix_lines(e))
    return _write_text(path, lines)


def load_error_set(path: PathLike) -> ErrorSet:
    def parse(cursor: _Lines) -> ErrorSet:
        n, dim, M, weight, seed = _header(cursor, "errorset", 4, optional=("none",))
        labels: List[str] = []
        while len(labels) < int(M):
            labels.extend(cursor.next())
        if len(labels) != int(M):
            raise cursor.fail(f"expected {M} labels, got {len(labels)}")
        generators = [read_matrix(cursor) for _ in range(int(M))]
        return ErrorSet(
            n_qubits=int(n),
            dim=int(dim),
            generators=tuple(generators),
            labels=tuple(labels),
            weight=int(weight),
            seed=_parse_seed(seed),
        )

    return _parsing("error set", path, parse)


# ==============================================================================
# ENCODINGS
# ==============================================================================

def save_encoding(path: PathLike, encoding: Encoding) -> Path:
    """Header ``encoding n k seed residual converged``, the isometry, ``iter residual`` lines, optional unitary."""
    lines = [
        f"encoding {encoding.n} {encoding.k} {_seed_token(encoding.seed)} "
        f"{_fmt(encoding.residual)} {int(encoding.converged)}"
    ]
    lines.extend(matrix_lines(encoding.isometry))
    lines.extend(f"{it} {_fmt(res)}" for it, res in encoding.trace)
    if encoding.unitary is not None:
        lines.append("unitary")
        lines.extend(matrix_lines(encoding.unitary))
    return _write_text(path, lines)


def load_encoding(path: PathLike) -> Encoding:
    def parse(cursor: _Lines) -> Encoding:
        n, k, seed, residual, converged = _header(cursor, "encoding", 4, optional=("1",))
        isometry = read_matrix(cursor)
        rest = cursor.rest()
        trace = []
        while rest and rest[0] != ["unitary"]:
            it, res = rest.pop(0)
            trace.append((int(it), float(res)))
        unitary = None
        if rest:
            unitary = read_matrix(_Lines("\n".join(" ".join(r) for r in rest[1:]), cursor.path))
        return Encoding(
            n=int(n),
            k=int(k),
            isometry=isometry,
            residual=float(residual),
            trace=trace,
            seed=_parse_seed(seed),
            converged=bool(int(converged)),
            unitary=unitary,
        )

    return _parsing("encoding", path, parse)


# ==============================================================================
# CONTROL
# ==============================================================================

def save_timings(path: PathLike, seq: TimingSequence) -> Path:
    lines = [
        f"timings {len(seq)} {seq.sign} {_seed_token(seq.seed)} {_fmt(seq.residual)} {seq.start_tag}"
    ]
    lines.extend(_fmt(t) for t in seq.timings)
    return _write_text(path, lines)


def load_timings(path: PathLike) -> TimingSequence:
    def parse(cursor: _Lines) -> TimingSequence:
        count, sign, seed, residual, start_tag = _header(cursor, "timings", 4, optional=("1",))
        timings = [float(cursor.next()[0]) for _ in range(int(count))]
        return TimingSequence(
            timings=np.array(timings),
            sign=int(sign),
            start_tag=int(start_tag),
            seed=_parse_seed(seed),
            residual=float(residual),
        )

    return _parsing("timing sequence", path, parse)


def save_control_pair(path: PathLike, pair: ControlPair) -> Path:
    lines = [f"controlpair {pair.dim} {len(pair.params)}"]
    lines.extend(matrix_lines(pair.h1))
    lines.extend(matrix_lines(pair.h2))
    lines.extend(f"{key} {json.dumps(value)}" for key, value in sorted(pair.params.items()))
    return _write_text(path, lines)


def load_control_pair(path: PathLike) -> ControlPair:
    def parse(cursor: _Lines) -> ControlPair:
        dim, count = _header(cursor, "controlpair", 2)
        h1 = read_matrix(cursor)
        h2 = read_matrix(cursor)
        if h1.shape != (int(dim), int(dim)):
            raise cursor.fail(f"H1 has shape {h1.shape}, header says {dim}")
        params: Dict[str, Any] = {}
        for _ in range(int(count)):
            parts = cursor.next()
            params[parts[0]] = json.loads(" ".join(parts[1:]))
        return ControlPair(h1=h1, h2=h2, params=params)

    return _parsing("control pair", path, parse)


# ==============================================================================
# SIMULATION OUTPUT
# ==============================================================================

def save_zeno_csv(path: PathLike, report: ZenoReport) -> Path:
    """One row per cycle: cycle, fidelity, leakage."""
    path = Path(path)
    cycles = np.arange(1, report.cycles + 1)
    table = np.column_stack([cycles, report.fidelity_per_cycle, report.leakage_per_cycle])
    np.savetxt(path, table, fmt=["%d", FLOAT_FMT, FLOAT_FMT], delimiter=",",
               header="cycle,fidelity,leakage", comments="")
    logger.info(f"Saved {path}")
    return path


def load_zeno_csv(path: PathLike) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise FormatError(f"{path}: malformed Zeno CSV: {e}") from e


def save_histogram(path: PathLike, stats: RandomEncodingStats) -> Path:
    """|⟨ν_i|E_m|ν_j⟩| for every trial, error and matrix element: trials·M·N² rows."""
    path = Path(path)
    trials, M, N, _ = stats.magnitudes.shape
    index = np.indices((trials, M, N, N)).reshape(4, -1).T
    table = np.column_stack([index, stats.magnitudes.ravel()])
    np.savetxt(path, table, fmt=["%d", "%d", "%d", "%d", FLOAT_FMT], delimiter=",",
               header="trial,m,i,j,magnitude", comments="")
    logger.info(f"Saved {path}")
    return path


def save_summary(path: PathLike, values: Dict[str, Any]) -> Path:
    """Flat ``key value`` block, same layout as run configs."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_config(values))
    logger.info(f"Saved {path}")
    return path


def load_summary(path: PathLike) -> Dict[str, Any]:
    return parse_config(_read_text(path))
