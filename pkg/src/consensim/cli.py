"""Command-line driver: check hypotheses, run consensus, compare execution modes.

Exit codes: 0 success, 1 input or usage error, 2 hypothesis violation,
3 non-convergence within the step budget, 4 mode mismatch in compare.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import MessageProtocolError, agent_stepper
from .engine import (
    DEFAULT_MAX_STEPS,
    DEFAULT_SNAPSHOT_LIMIT,
    DEFAULT_TOL,
    HypothesisViolation,
    RunTrace,
    WeightedSystem,
    build_system,
    default_epsilon,
    epsilon_bound,
    predict,
    run,
)
from .graph import (
    GraphFormatError,
    is_strongly_connected,
    is_undirected,
    load_edge_list,
)
from .linalg import NullSpaceError, null_vector

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_HYPOTHESIS = 2
EXIT_NO_CONVERGENCE = 3
EXIT_MISMATCH = 4

_MAX_INLINE_STATE = 64

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration for one experiment, shared by all subcommands."""

    graph_path: str
    weights_path: str | None = None
    x0_path: str | None = None
    epsilon: float | None = None
    tol: float = DEFAULT_TOL
    max_steps: int = DEFAULT_MAX_STEPS
    mode: str = "matrix"
    allow_uncertified: bool = False
    out_dir: str = "."
    snapshot_limit: int = DEFAULT_SNAPSHOT_LIMIT
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max-steps must be at least 1")
        if self.snapshot_limit < 2:
            raise ValueError("snapshots must be at least 2")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.mode not in ("matrix", "agents"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.epsilon is not None and (
            not math.isfinite(self.epsilon) or self.epsilon <= 0.0
        ):
            raise ValueError("epsilon must be positive and finite")


def _config_from_args(args) -> ExperimentConfig:
    return ExperimentConfig(
        graph_path=args.graph,
        weights_path=args.weights,
        x0_path=args.x0,
        epsilon=args.epsilon,
        tol=args.tol,
        max_steps=args.max_steps,
        mode=args.mode,
        allow_uncertified=args.allow_uncertified,
        out_dir=args.out,
        snapshot_limit=args.snapshots,
        seed=args.seed,
    )


def default_initial_state(n: int, seed: int) -> np.ndarray:
    """Deterministic initial state in [0, 1): a splitmix-style 64-bit stream.

    The generator is fixed and platform independent so identical
    configurations produce byte-identical outputs everywhere.
    """
    state = seed & _MASK64
    out = np.empty(n, dtype=np.float64)
    for k in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        out[k] = float(z >> 11) * 2.0**-53
    return out


def _read_vector_file(path, n: int, label: str) -> np.ndarray:
    values: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ValueError(f"{label} file line {lineno}: not a number: {line!r}") from None
    if len(values) != n:
        raise ValueError(f"{label} file has {len(values)} values, expected {n}")
    vec = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"{label} file has non-finite entries")
    return vec


def _fmt(value: float) -> str:
    return repr(float(value))


def _fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def _fmt_vector(v: np.ndarray) -> str:
    return "[" + ", ".join(_fmt(x) for x in v) + "]"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; the exit-code contract reserves
    # 2 for hypothesis violations, so usage problems are remapped to 1
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="consensim", description=__doc__)
    common = _Parser(add_help=False)
    common.add_argument("--graph", required=True, help="edge-list file")
    common.add_argument("--weights", help="node weights file, one positive value per line")
    common.add_argument("--x0", help="initial state file, one value per line")
    common.add_argument("--epsilon", type=float, help="step size (default 0.9 * bound)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="disagreement tolerance")
    common.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS, help="step budget")
    common.add_argument(
        "--mode", choices=("matrix", "agents"), default="matrix", help="execution mode for run"
    )
    common.add_argument(
        "--allow-uncertified",
        action="store_true",
        help="run even when the hypotheses do not certify convergence",
    )
    common.add_argument("--out", default=".", help="output directory for trace and summary")
    common.add_argument(
        "--snapshots", type=int, default=DEFAULT_SNAPSHOT_LIMIT, help="max recorded trace rows"
    )
    common.add_argument("--seed", type=int, default=0, help="seed for the default initial state")

    sub = parser.add_subparsers(dest="command", required=True)
    p_check = sub.add_parser("check", parents=[common], help="report hypotheses and predictions")
    p_check.set_defaults(func=cmd_check)
    p_run = sub.add_parser("run", parents=[common], help="iterate to consensus, write outputs")
    p_run.set_defaults(func=cmd_run)
    p_compare = sub.add_parser(
        "compare", parents=[common], help="run both modes, verify bitwise-identical traces"
    )
    p_compare.set_defaults(func=cmd_compare)
    return parser


def _load_problem(config: ExperimentConfig) -> tuple[WeightedSystem, np.ndarray, float]:
    graph = load_edge_list(config.graph_path)
    if config.weights_path is not None:
        w = _read_vector_file(config.weights_path, graph.n, "weights")
    else:
        w = np.ones(graph.n, dtype=np.float64)
    system = build_system(graph, w)
    if config.x0_path is not None:
        x0 = _read_vector_file(config.x0_path, graph.n, "x0")
    else:
        x0 = default_initial_state(graph.n, config.seed)
    eps = config.epsilon if config.epsilon is not None else default_epsilon(system)
    return system, x0, eps


def cmd_check(args) -> int:
    config = _config_from_args(args)
    system, x0, eps = _load_problem(config)
    bound = epsilon_bound(system)
    sc = is_strongly_connected(system.graph)
    und = is_undirected(system.graph)
    certified = sc and eps < bound
    d = system.d
    print(f"nodes: {system.n}")
    print(f"edges: {system.graph.m}")
    print(f"strongly_connected: {_fmt_bool(sc)}")
    print(f"undirected: {_fmt_bool(und)}")
    print(f"out_degree_min: {int(d.min())}")
    print(f"out_degree_max: {int(d.max())}")
    print(f"epsilon_bound: {_fmt(bound)}")
    print(f"epsilon: {_fmt(eps)}")
    print(f"certified: {_fmt_bool(certified)}")
    if sc:
        prediction = predict(system, x0, eps)
        print(f"v: {_fmt_vector(prediction.v)}")
        print(f"predicted_alpha: {_fmt(prediction.alpha)}")
        print(f"rho_estimate: {_fmt(prediction.rho_estimate)}")
    problems = []
    if not sc:
        problems.append("graph is not strongly connected")
    if not eps < bound:
        problems.append(f"epsilon {_fmt(eps)} is not strictly below the bound {_fmt(bound)}")
    if problems:
        print(f"hypotheses: violated ({'; '.join(problems)})")
        return EXIT_HYPOTHESIS
    print("hypotheses: ok")
    return EXIT_OK


def _write_trace_csv(path: Path, trace: RunTrace, n: int) -> None:
    full = n <= _MAX_INLINE_STATE
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if full:
            header = ["step", "disagreement", "conserved"] + [f"x_{i}" for i in range(n)]
        else:
            header = ["step", "disagreement", "conserved", "x_min", "x_max"]
        fh.write(",".join(header) + "\n")
        for step, x, dis, cons in zip(
            trace.steps, trace.states, trace.disagreement, trace.conserved
        ):
            row = [str(step), _fmt(dis), _fmt(cons)]
            if full:
                row.extend(_fmt(xi) for xi in x)
            else:
                row.append(_fmt(x.min()))
                row.append(_fmt(x.max()))
            fh.write(",".join(row) + "\n")


def _opt_float(value: float) -> float | None:
    f = float(value)
    return None if math.isnan(f) else f


def _summary_dict(
    system: WeightedSystem,
    eps: float,
    v: np.ndarray | None,
    trace: RunTrace,
    mode: str,
) -> dict:
    bound = epsilon_bound(system)
    sc = is_strongly_connected(system.graph)
    data: dict = {
        "n": system.n,
        "m": system.graph.m,
        "strongly_connected": sc,
        "undirected": is_undirected(system.graph),
        "epsilon": float(eps),
        "epsilon_bound": bound,
        "certified": sc and eps < bound,
        "predicted_alpha": _opt_float(trace.predicted_alpha),
        "v": [float(x) for x in v] if v is not None else None,
    }
    if system.n <= _MAX_INLINE_STATE:
        data["final_state"] = [float(x) for x in trace.final_state]
    data["final_disagreement"] = float(trace.final_disagreement)
    data["conserved_drift"] = _opt_float(trace.conserved_drift)
    data["converged_at"] = trace.converged_at
    data["steps_run"] = trace.steps_run
    data["mode"] = mode
    return data


def _execute_run(
    config: ExperimentConfig, system: WeightedSystem, x0: np.ndarray, eps: float, mode: str
) -> RunTrace:
    stepper = agent_stepper(system, x0, eps) if mode == "agents" else None
    try:
        return run(
            system,
            x0,
            eps,
            tol=config.tol,
            max_steps=config.max_steps,
            snapshot_limit=config.snapshot_limit,
            override_uncertified=config.allow_uncertified,
            stepper=stepper,
        )
    except HypothesisViolation as exc:
        raise HypothesisViolation(f"{exc}; pass --allow-uncertified to run anyway") from None


def cmd_run(args) -> int:
    config = _config_from_args(args)
    system, x0, eps = _load_problem(config)
    trace = _execute_run(config, system, x0, eps, config.mode)
    v = null_vector(system.lap_w.T) if is_strongly_connected(system.graph) else None

    outdir = Path(config.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    trace_path = outdir / "trace.csv"
    summary_path = outdir / "summary.json"
    _write_trace_csv(trace_path, trace, system.n)
    summary = _summary_dict(system, eps, v, trace, config.mode)
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    converged = trace.converged_at is not None
    print(f"mode: {config.mode}")
    print(f"steps_run: {trace.steps_run}")
    print(f"converged_at: {trace.converged_at if converged else 'none'}")
    print(f"final_disagreement: {_fmt(trace.final_disagreement)}")
    if summary["predicted_alpha"] is not None:
        print(f"predicted_alpha: {_fmt(summary['predicted_alpha'])}")
    print(f"wrote: {trace_path}")
    print(f"wrote: {summary_path}")
    if not converged:
        print(f"did not converge within {config.max_steps} steps", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _config_from_args(args)
    system, x0, eps = _load_problem(config)
    trace_m = _execute_run(config, system, x0, eps, "matrix")
    trace_a = _execute_run(config, system, x0, eps, "agents")

    rows = min(len(trace_m.steps), len(trace_a.steps))
    for idx in range(rows):
        step_m = trace_m.steps[idx]
        step_a = trace_a.steps[idx]
        if step_m != step_a:
            print("traces identical: false")
            print(
                f"first divergence: recorded row {idx} is step {step_m} in matrix mode "
                f"but step {step_a} in agents mode",
                file=sys.stderr,
            )
            return EXIT_MISMATCH
        xm = trace_m.states[idx]
        xa = trace_a.states[idx]
        if xm.tobytes() != xa.tobytes():
            bits_m = xm.view(np.uint64)
            bits_a = xa.view(np.uint64)
            node = int(np.nonzero(bits_m != bits_a)[0][0])
            print("traces identical: false")
            print(
                f"first divergence: step {step_m}, node {node} "
                f"(matrix {_fmt(xm[node])}, agents {_fmt(xa[node])})",
                file=sys.stderr,
            )
            return EXIT_MISMATCH
    if len(trace_m.steps) != len(trace_a.steps):
        print("traces identical: false")
        print(
            f"first divergence: matrix mode recorded {len(trace_m.steps)} rows, "
            f"agents mode {len(trace_a.steps)}",
            file=sys.stderr,
        )
        return EXIT_MISMATCH

    converged = trace_m.converged_at is not None
    print(f"recorded_steps: {len(trace_m.steps)}")
    print(f"converged: {_fmt_bool(converged)}")
    print("traces identical: true")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (GraphFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (HypothesisViolation, NullSpaceError, MessageProtocolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
