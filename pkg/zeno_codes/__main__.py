import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .code_search import find_encoding_with_restarts, knill_residual, weak_residual
from .config import (
    Limits,
    SearchSettings,
    SynthSettings,
    load_config,
    merge_config,
    write_config_echo,
)
from .control import (
    TARGET_MODES,
    action_report,
    default_control_pair,
    inverse_sequence,
    sequence_unitary,
    synthesize,
    synthesize_with_restarts,
)
from .error_model import hamming_feasible, pauli_error_set, random_error_set
from .exceptions import FormatError, NotConvergedError, ZenoCodeError, ZeroNormStateError
from .formats import (
    load_control_pair,
    load_encoding,
    load_error_set,
    load_timings,
    save_control_pair,
    save_encoding,
    save_error_set,
    save_histogram,
    save_summary,
    save_timings,
    save_zeno_csv,
)
from .registry import ChannelRegistry
from .zeno import FieldTrace, ZenoConfig, random_encoding_gain, zeno_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4

# Values used when neither the command line nor --config sets a key.
DEFAULTS: Dict[str, Dict[str, Any]] = {
    "gen-errors": {"t": 1, "seed": 0, "out": "errors.txt"},
    "find-code": {"seed": 0, "out": "encoding.txt"},
    "synth": {"seed": 0, "pair_seed": 0, "out": "timings.txt"},
    "simulate": {
        "seed": 0,
        "seeds": 1,
        "state": 0,
        "noise_mode": "exact",
        "reset_mode": "postselect",
        "out": "zeno",
        "threads": 1,
    },
    "random-study": {"t": 1, "seed": 0, "trials": 50, "out": "random_study", "threads": 1},
}

# argparse bookkeeping that does not belong in a config echo.
_NOT_ECHOED = ("func", "config", "verbose")


def setup_logging(verbosity: int):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stdout)]
    )


def _float_list(value: Any) -> List[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in str(value).split(",") if v.strip()]


def _search_settings(cfg: Dict[str, Any]) -> SearchSettings:
    base = SearchSettings()
    return SearchSettings(
        tol=cfg.get("tol", base.tol),
        max_iter=cfg.get("max_iter", base.max_iter),
        step_factor=cfg.get("step_factor", base.step_factor),
        restarts=cfg.get("restarts", base.restarts),
    )


def _synth_settings(cfg: Dict[str, Any]) -> SynthSettings:
    base = SynthSettings()
    return SynthSettings(
        tol=cfg.get("tol", base.tol),
        max_iter=cfg.get("max_iter", base.max_iter),
        beta0=cfg.get("beta0", base.beta0),
        grow_on_singular=bool(cfg.get("grow", base.grow_on_singular)),
        target=cfg.get("target", base.target),
        restarts=cfg.get("restarts", base.restarts),
        big_action=cfg.get("big_action", base.big_action),
    )


def _echo(cfg: Dict[str, Any]) -> None:
    write_config_echo(f"{cfg['out']}.config", {k: v for k, v in cfg.items() if k not in _NOT_ECHOED})


# ==============================================================================
# COMMANDS
# ==============================================================================

def cmd_gen_errors(cfg: Dict[str, Any]) -> int:
    limits = Limits(max_dim=cfg.get("max_dim", Limits().max_dim))
    if cfg.get("random"):
        if cfg.get("dim") is None or cfg.get("m") is None:
            raise argparse.ArgumentTypeError("--random needs --dim and --m")
        errors = random_error_set(cfg["dim"], cfg["m"], cfg["seed"], limits)
    else:
        if cfg.get("n") is None:
            raise argparse.ArgumentTypeError("--n is required unless --random is given")
        errors = pauli_error_set(cfg["n"], cfg["t"], limits)
    _echo(cfg)
    save_error_set(cfg["out"], errors)
    print(f"Wrote {errors.M} error generators (dim {errors.dim}) to {cfg['out']}")
    return EXIT_OK


def _encoding_report(encoding, errors) -> Dict[str, Any]:
    report: Dict[str, Any] = {
        "residual": weak_residual(encoding, errors),
        "iterations": encoding.trace[-1][0] if encoding.trace else 0,
        "converged": encoding.converged,
        "knill_residual": knill_residual(encoding, errors),
        "seed": encoding.seed,
    }
    if errors.n_qubits and encoding.k < errors.n_qubits:
        check = hamming_feasible(errors.n_qubits, encoding.k, errors.M)
        report["hamming_feasible"] = check.feasible
        report["hamming_slack"] = check.slack
    return report


def cmd_find_code(cfg: Dict[str, Any]) -> int:
    errors = load_error_set(cfg["errors"])
    settings = _search_settings(cfg)
    _echo(cfg)
    code = EXIT_OK
    try:
        encoding = find_encoding_with_restarts(errors, cfg["k"], cfg["seed"], settings=settings)
    except NotConvergedError as e:
        logger.error(f"Code search failed: {e}")
        encoding = e.best
        code = EXIT_NOT_CONVERGED
    save_encoding(cfg["out"], encoding)
    report = _encoding_report(encoding, errors)
    save_summary(f"{cfg['out']}.report", report)
    print(f"residual {report['residual']:.3e} after {report['iterations']} iterations")
    return code


def cmd_synth(cfg: Dict[str, Any]) -> int:
    errors = load_error_set(cfg["errors"])
    if cfg.get("pair"):
        pair = load_control_pair(cfg["pair"])
    else:
        if not errors.n_qubits:
            raise argparse.ArgumentTypeError("--pair is required for error sets that are not on qubits")
        pair = default_control_pair(errors.n_qubits, cfg["pair_seed"])
    settings = _synth_settings(cfg)
    m_prime = cfg["m_prime"]
    _echo(cfg)

    code = EXIT_OK
    try:
        seq, encoding = synthesize_with_restarts(
            errors, pair, cfg["k"], m_prime, cfg["seed"], settings=settings
        )
    except NotConvergedError as e:
        logger.error(f"Synthesis failed: {e}")
        seq, encoding = e.best
        code = EXIT_NOT_CONVERGED

    out = cfg["out"]
    save_timings(out, seq)
    save_encoding(f"{out}.encoding", encoding)
    save_control_pair(f"{out}.pair", pair)
    actions = action_report(seq, pair, settings)
    report: Dict[str, Any] = {
        "residual": seq.residual,
        "iterations": seq.trace[-1][0] if seq.trace else 0,
        "m_prime": len(seq),
        "final_beta": seq.beta_history[-1] if seq.beta_history else settings.beta0,
        "min_action": float(np.min(actions.actions)),
        "max_action": float(np.max(actions.actions)),
        "all_actions_big": actions.all_big,
    }
    if cfg.get("verify_inverse"):
        product = sequence_unitary(seq, pair) @ sequence_unitary(inverse_sequence(seq), pair)
        defect = float(np.linalg.norm(product - np.eye(pair.dim)))
        report["inverse_defect"] = defect
        print(f"||C C^-1 - I|| = {defect:.3e}")
    save_summary(f"{out}.report", report)
    print(f"residual {seq.residual:.3e} with {len(seq)} timings")
    return code


def _simulate_seed(s0, code, errors, pair, cfg: ZenoConfig, rate: float, seed: int):
    fields = FieldTrace.for_period(errors.M, cfg.periods, rate, cfg.T, seed)
    try:
        return zeno_run(s0, code, errors, fields, cfg, pair)
    except ZeroNormStateError as e:
        logger.error(f"Seed {seed}: {e}")
        return None


def cmd_simulate(cfg: Dict[str, Any]) -> int:
    errors = load_error_set(cfg["errors"])
    pair = None
    if cfg.get("timings"):
        if not cfg.get("pair") or cfg.get("k") is None:
            raise argparse.ArgumentTypeError("--timings needs --pair and --k")
        code = load_timings(cfg["timings"])
        pair = load_control_pair(cfg["pair"])
        N = 2 ** cfg["k"]
    elif cfg.get("encoding"):
        code = load_encoding(cfg["encoding"])
        N = code.N
    else:
        raise argparse.ArgumentTypeError("simulate needs --encoding or --timings")
    if not 0 <= cfg["state"] < N:
        raise argparse.ArgumentTypeError(f"--state must be in 0..{N - 1}")
    s0 = np.zeros(N, dtype=complex)
    s0[cfg["state"]] = 1.0

    periods_T = _float_list(cfg["T"])
    seeds = [cfg["seed"] + i for i in range(cfg["seeds"])]
    _echo(cfg)

    summary: Dict[str, Any] = {"seeds": len(seeds), "epsilon": cfg["epsilon"]}
    scaling: List[Tuple[float, float]] = []
    for T in periods_T:
        run_cfg = ZenoConfig(T, cfg["total_time"], cfg["noise_mode"], cfg["reset_mode"])
        with ThreadPoolExecutor(max_workers=cfg["threads"]) as executor:
            reports = list(executor.map(
                lambda seed: _simulate_seed(s0, code, errors, pair, run_cfg, cfg["epsilon"], seed),
                seeds,
            ))
        reports = [r for r in reports if r is not None]
        if not reports:
            logger.error(f"Every seed leaked completely at T={T:g}")
            continue
        mean_report = reports[0]
        mean_report.fidelity_per_cycle = np.mean([r.fidelity_per_cycle for r in reports], axis=0)
        mean_report.leakage_per_cycle = np.mean([r.leakage_per_cycle for r in reports], axis=0)
        save_zeno_csv(f"{cfg['out']}_T{T:g}.csv", mean_report)

        infidelity = float(np.mean([r.final_infidelity for r in reports]))
        scaling.append((T, infidelity))
        summary[f"final_infidelity_T{T:g}"] = infidelity
        summary[f"h_e_norm_T{T:g}"] = float(np.max([r.h_e_norm for r in reports]))
        summary[f"completed_seeds_T{T:g}"] = len(reports)
        print(f"T={T:g}: mean final infidelity {infidelity:.6e} over {len(reports)} seeds")

    for (T_a, f_a), (T_b, f_b) in zip(scaling, scaling[1:]):
        if f_b > 0:
            summary[f"ratio_T{T_a:g}_T{T_b:g}"] = f_a / f_b
    save_summary(f"{cfg['out']}.summary", summary)
    return EXIT_OK


def cmd_random_study(cfg: Dict[str, Any]) -> int:
    if cfg.get("errors"):
        errors = load_error_set(cfg["errors"])
    else:
        errors = pauli_error_set(cfg["n"], cfg["t"])
    _echo(cfg)
    stats = random_encoding_gain(cfg["n"], cfg["k"], errors, cfg["trials"], cfg["seed"], cfg["threads"])
    save_summary(cfg["out"], stats.summary())
    save_histogram(f"{cfg['out']}.hist.csv", stats)
    print(
        f"mean ratio {stats.mean_ratio:.3f}, median {stats.median_ratio:.3f}, "
        f"absolute suppression ~{stats.A * stats.ratio_of_means:.1f} (A={stats.A})"
    )
    return EXIT_OK


# ==============================================================================
# ARGUMENTS
# ==============================================================================

def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="Random seed")
    p.add_argument("--out", type=str, help="Output path (or prefix)")
    p.add_argument("--config", type=str, help="File of 'key value' lines; flags override it")
    p.add_argument("--verbose", "-v", action="count", default=0, help="-v for info, -vv for debug")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeno-codes",
        description="Find weak-condition codes, synthesize control timings and simulate Zeno protection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-errors", help="Write a Pauli or random error set")
    _common(p)
    p.add_argument("--n", type=int, help="Number of qubits")
    p.add_argument("--t", type=int, help="Maximal Pauli weight (default 1)")
    p.add_argument("--random", action="store_true", default=None, help="Random GUE generators")
    p.add_argument("--dim", type=int, help="Dimension for --random")
    p.add_argument("--m", type=int, help="Number of generators for --random")
    p.add_argument("--max-dim", type=int, help="Dimension limit")
    p.set_defaults(func=cmd_gen_errors)

    p = sub.add_parser("find-code", help="Search an encoding for an error set")
    _common(p)
    p.add_argument("--errors", type=str, required=True, help="Error set file")
    p.add_argument("--k", type=int, required=True, help="Information qubits")
    p.add_argument("--tol", type=float, help="Residual tolerance")
    p.add_argument("--max-iter", type=int, help="Iteration cap per attempt")
    p.add_argument("--restarts", type=int, help="Extra seeds to try after a failure")
    p.set_defaults(func=cmd_find_code)

    p = sub.add_parser("synth", help="Synthesize control timings realizing an encoding")
    _common(p)
    p.add_argument("--errors", type=str, required=True, help="Error set file")
    p.add_argument("--k", type=int, required=True, help="Information qubits")
    p.add_argument("--m-prime", type=int, required=True, help="Number of timings")
    p.add_argument("--pair", type=str, help="Control pair file (default: seeded default pair)")
    p.add_argument("--pair-seed", type=int, help="Seed of the default control pair")
    p.add_argument("--tol", type=float, help="Residual tolerance")
    p.add_argument("--max-iter", type=int, help="Iteration cap")
    p.add_argument("--beta0", type=float, help="Initial step scale")
    p.add_argument("--target", choices=TARGET_MODES, help="Timing target (default residual)")
    p.add_argument("--restarts", type=int, help="Extra seeds to try after a failure")
    p.add_argument("--grow", action="store_true", default=None, help="Append timings when the system is singular")
    p.add_argument("--verify-inverse", action="store_true", default=None, help="Print ||C C^-1 - I||")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="Run the Zeno protection cycle")
    _common(p)
    p.add_argument("--errors", type=str, required=True, help="Error set file")
    p.add_argument("--encoding", type=str, help="Encoding file")
    p.add_argument("--timings", type=str, help="Timing sequence file (needs --pair and --k)")
    p.add_argument("--pair", type=str, help="Control pair file")
    p.add_argument("--k", type=int, help="Information qubits (with --timings)")
    p.add_argument("--T", type=str, help="Zeno period, or a comma separated list")
    p.add_argument("--total-time", type=float, help="Total protected time")
    p.add_argument("--epsilon", type=float, help="RMS field amplitude; actions are epsilon*T")
    p.add_argument("--seeds", type=int, help="Number of field seeds")
    p.add_argument("--state", type=int, help="Basis index of the initial information state")
    p.add_argument("--noise-mode", choices=ChannelRegistry.noise_modes(), help="Noise propagator")
    p.add_argument("--reset-mode", choices=ChannelRegistry.reset_modes(), help="Ancilla reset")
    p.add_argument("--threads", type=int, help="Worker threads over seeds")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("random-study", help="Suppression by Haar-random encodings")
    _common(p)
    p.add_argument("--n", type=int, required=True, help="Number of qubits")
    p.add_argument("--k", type=int, required=True, help="Information qubits")
    p.add_argument("--t", type=int, help="Pauli weight of the default error set")
    p.add_argument("--errors", type=str, help="Error set file instead of Pauli errors")
    p.add_argument("--trials", type=int, help="Number of Haar trials")
    p.add_argument("--threads", type=int, help="Worker threads over trials")
    p.set_defaults(func=cmd_random_study)

    return parser


REQUIRED = {
    "simulate": ("T", "total_time", "epsilon"),
}


def main(argv: Optional[Sequence[str]] = None):
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logging(args.verbose)

    try:
        file_values = load_config(args.config) if args.config else {}
        cfg = dict(DEFAULTS[args.command])
        cfg.update(merge_config(file_values, vars(args)))
        missing = [key for key in REQUIRED.get(args.command, ()) if cfg.get(key) is None]
        if missing:
            parser.error(f"{args.command} needs --{', --'.join(k.replace('_', '-') for k in missing)}")
        code = args.func(cfg)
    except (FormatError, OSError) as e:
        logger.error(f"I/O failed: {e}")
        sys.exit(EXIT_IO)
    except (ZenoCodeError, argparse.ArgumentTypeError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        sys.exit(EXIT_USAGE)

    if code != EXIT_OK:
        sys.exit(code)


if __name__ == "__main__":
    main()
