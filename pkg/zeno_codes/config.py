import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from .exceptions import FormatError

logger = logging.getLogger(__name__)

# ==============================================================================
# DEFAULTS
# ==============================================================================

MAX_DIM = 2 ** 12

# Relative cut-off for singular values in least-squares solves.
LSTSQ_RCOND = 1e-12

HERMITIAN_RTOL = 1e-10


@dataclass(frozen=True)
class Limits:
    """Size limits for dense Hilbert-space constructions."""
    max_dim: int = MAX_DIM


@dataclass(frozen=True)
class SearchSettings:
    """Knobs for the single-vector and encoding searches."""
    tol: float = 1e-9
    max_iter: int = 5000
    step_factor: float = 0.5
    restarts: int = 10


@dataclass(frozen=True)
class SynthSettings:
    """Knobs for non-holonomic timing synthesis."""
    tol: float = 1e-6
    max_iter: int = 2000
    beta0: float = 1.0
    beta_max: float = 1.0
    beta_min: float = 1e-10
    beta_grow: float = 1.2
    beta_shrink: float = 0.5
    # Initial timings are drawn uniformly from this window, in units of 1/max‖H‖.
    init_window: Tuple[float, float] = (1.0, 5.0)
    # Positivity floor, relative to the initialization scale.
    clamp_floor: float = 1e-6
    # Largest change of acquired action ‖H‖·δt in one slot per step.
    max_step: float = 1.0
    # Levenberg-Marquardt damping, relative to the largest singular value squared.
    damping: float = 1e-3
    damping_min: float = 1e-12
    damping_max: float = 1e6
    damping_grow: float = 4.0
    damping_shrink: float = 1.0 / 3.0
    # What the timing change should realize: "residual" (−V†E_mV), "linearized"
    # (first-order change under the γ update) or "gamma" (V†E_mVγ_m + h.c.).
    target: str = "residual"
    restarts: int = 5
    grow_on_singular: bool = False
    max_extra_timings: int = 16
    # ‖H‖·t at or above this counts as a "big" action.
    big_action: float = 10.0


# ==============================================================================
# RUN CONFIG FILES
# ==============================================================================

ConfigValue = Union[str, int, float, bool]


def _coerce(raw: str) -> ConfigValue:
    lowered = raw.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw


def parse_config(text: str) -> Dict[str, ConfigValue]:
    """Parse flat ``key value`` lines. Blank lines and ``#`` comments are skipped."""
    values: Dict[str, ConfigValue] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise FormatError(f"Config line {lineno}: expected 'key value', got {line!r}")
        key, raw = parts
        values[key.replace("-", "_")] = _coerce(raw.strip())
    return values


def load_config(path: Union[str, Path]) -> Dict[str, ConfigValue]:
    path = Path(path)
    logger.info(f"Loading run config from {path}")
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())


def merge_config(
    file_values: Optional[Mapping[str, Any]],
    overrides: Mapping[str, Any],
) -> Dict[str, Any]:
    """CLI flags win over file values; flags left at None do not override."""
    merged: Dict[str, Any] = dict(file_values or {})
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return merged


def format_config(values: Mapping[str, Any]) -> str:
    lines = []
    for key in sorted(values):
        value = values[key]
        if value is None:
            continue
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} {value}")
    return "\n".join(lines) + "\n"


def write_config_echo(path: Union[str, Path], values: Mapping[str, Any]) -> Path:
    """Write the merged run config next to the run's artifacts."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_config(values))
    logger.info(f"Config echo saved to {path}")
    return path
