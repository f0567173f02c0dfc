"""Command-line front end: verify, inject, estimate, pipeline, show.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from importlib import resources as importlib_resources
from pathlib import Path

import numpy as np

from . import analysis, circuits, pipeline, resources
from .frame import UnsupportedFrameError
from .sim import run_circuit, subsystem_fidelity

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CIRCUIT_NAMES = ("ccz8", "t15", "c2t-simple", "c2t-surgery", "phase")
FIDELITY_TOL = 1e-9


class UsageError(Exception):
    pass


def build_named_circuit(name: str, theta=None):
    if name == "phase":
        if theta is None:
            raise UsageError("phase needs --theta")
        try:
            return circuits.build_phase_catalysis(theta)
        except ValueError as e:
            raise UsageError(str(e))
    if name not in circuits.CIRCUIT_BUILDERS:
        raise UsageError(f"unknown circuit {name!r}; choose from {', '.join(CIRCUIT_NAMES)}")
    return circuits.CIRCUIT_BUILDERS[name]()


def _data_file(name: str) -> Path:
    return Path(str(importlib_resources.files("magicfactory") / "data" / name))


def _load_json(arg: str, kind: str) -> dict:
    """Read a JSON document from a path, or from a shipped file by short name."""
    path = Path(arg)
    if not path.exists():
        shipped = _data_file(f"{arg}.json")
        if not shipped.exists():
            raise UsageError(f"no {kind} file {arg!r}")
        path = shipped
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read {kind} file {arg}: {e}")


def cmd_verify(args) -> tuple:
    c = build_named_circuit(args.circuit, args.theta)
    fids, accepted, per_output = [], True, []
    for s in range(args.seed, args.seed + args.branches):
        r = run_circuit(c, seed=s)
        accepted &= r.accepted
        fids.append(subsystem_fidelity(r.state, c.output_qubits, c.reference))
        per_output.append([subsystem_fidelity(r.state, [q], ref)
                           for q, ref in zip(c.output_qubits, c.output_references)])
    ok = accepted and min(fids) >= 1 - FIDELITY_TOL
    payload = {
        "circuit": c.name,
        "branches": args.branches,
        "accepted": bool(accepted),
        "min_fidelity": float(min(fids)),
        "per_output_min_fidelity": [float(min(col)) for col in zip(*per_output)] if per_output[0] else [],
        "t_cost": circuits.t_cost(c) if _has_exact_cost(c) else None,
        "result": "PASS" if ok else "FAIL",
    }
    lines = [f"{c.name}: fidelity {payload['min_fidelity']:.12f} over {args.branches} branches, "
             f"accepted={payload['accepted']}"]
    if payload["per_output_min_fidelity"]:
        lines.append("per-output fidelity: " + ", ".join(f"{f:.12f}" for f in payload["per_output_min_fidelity"]))
    if payload["t_cost"] is not None:
        lines.append(f"T-cost: {payload['t_cost']}")
    lines.append(payload["result"])
    return (EXIT_OK if ok else EXIT_FAIL), payload, "\n".join(lines)


def _has_exact_cost(c) -> bool:
    try:
        circuits.t_cost(c)
    except ValueError:
        return False
    return True


def cmd_inject(args) -> tuple:
    c = build_named_circuit(args.circuit, args.theta)
    try:
        report = analysis.enumerate_errors(c, args.max_weight, harm_tolerance=args.harm_tolerance,
                                           method=args.method, branches=args.branches, seed=args.seed)
    except UnsupportedFrameError as e:
        raise UsageError(f"frame path cannot handle {c.name}: {e}")
    except ValueError as e:
        raise UsageError(str(e))
    payload = report.to_dict()
    ok = not report.disagreements
    return (EXIT_OK if ok else EXIT_FAIL), payload, report.to_table()


def cmd_estimate(args) -> tuple:
    doc = _load_json(args.workload, "workload")
    try:
        parsed = resources.load_workload_document(doc)
        distances = parsed.get("distances", resources.DistanceAssignment())
        overrides = {k: getattr(args, k) for k in ("d0", "d1", "d2") if getattr(args, k) is not None}
        distances = replace(distances, **overrides)
        regime = args.regime or parsed.get("regime", "minimal_distance")
        factory = resources.FACTORIES[args.factory] if args.factory else parsed["factory"]
        est = resources.estimate(parsed["workload"], factory, regime, distances)
    except (TypeError, ValueError) as e:
        raise UsageError(f"bad workload: {e}")
    payload = est.to_dict()
    payload["workload"] = vars(parsed["workload"]).copy()
    return EXIT_OK, payload, est.to_table()


def cmd_pipeline(args) -> tuple:
    doc = _load_json(args.config, "pipeline config")
    try:
        cfg = pipeline.PipelineConfig.from_dict(doc)
        if args.horizon is not None:
            cfg = replace(cfg, horizon_d=args.horizon)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    except (TypeError, ValueError) as e:
        raise UsageError(f"bad pipeline config: {e}")
    stats = pipeline.simulate(cfg, trace_path=args.trace)
    payload = stats.to_dict()
    payload["config"] = cfg.to_dict()
    return EXIT_OK, payload, stats.to_table()


def cmd_show(args) -> tuple:
    c = build_named_circuit(args.circuit, args.theta)
    text = circuits.circuit_to_json(c) if args.json else circuits.circuit_to_text(c)
    return EXIT_OK, None, text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magicfactory", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def circuit_args(sp):
        sp.add_argument("circuit", help=f"one of {', '.join(CIRCUIT_NAMES)}")
        sp.add_argument("--theta", type=float, help="phase angle in degrees (phase circuit)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    v = sub.add_parser("verify", help="error-free simulation against the reference state")
    circuit_args(v)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--branches", type=int, default=8, help="seeded measurement branches to run")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("inject", help="exhaustive Z-error injection")
    circuit_args(i)
    i.add_argument("--max-weight", type=int, default=2)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--branches", type=int, default=2)
    i.add_argument("--method", choices=("statevector", "frame", "both"), default="statevector")
    i.add_argument("--harm-tolerance", type=float, default=analysis.DEFAULT_HARM_TOLERANCE)
    i.set_defaults(func=cmd_inject)

    e = sub.add_parser("estimate", help="resource estimate for a workload file")
    e.add_argument("workload", help="workload JSON path or shipped name (e.g. factoring-1024)")
    e.add_argument("--regime", choices=("distillation", "minimal"))
    e.add_argument("--factory", choices=sorted(resources.FACTORIES))
    for d in ("d0", "d1", "d2"):
        e.add_argument(f"--{d}", type=int)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_estimate)

    pl = sub.add_parser("pipeline", help="discrete-event factory pipeline")
    pl.add_argument("config", help="config JSON path or shipped name (ccz-default, c2t-default)")
    pl.add_argument("--horizon", type=float, help="override horizon in units of d")
    pl.add_argument("--seed", type=int)
    pl.add_argument("--trials", type=int, default=1, help="independent seeds to average over")
    pl.add_argument("--trace", help="write a per-run CSV trace")
    pl.add_argument("--json", action="store_true")
    pl.set_defaults(func=cmd_pipeline_trials)

    s = sub.add_parser("show", help="print a circuit as text (or JSON with --json)")
    circuit_args(s)
    s.set_defaults(func=cmd_show)
    return p


def cmd_pipeline_trials(args) -> tuple:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.trials == 1:
        return cmd_pipeline(args)
    base = args.seed or 0
    periods, payloads = [], []
    for k in range(args.trials):
        args.seed = base + k
        _, payload, _ = cmd_pipeline(args)
        payloads.append(payload)
        periods.append(payload["mean_output_period_d"])
    payload = {"trials": payloads, "mean_output_period_d": float(np.mean(periods)),
               "mean_output_period_stderr": float(np.std(periods, ddof=1) / np.sqrt(len(periods)))}
    text = f"mean output period over {args.trials} seeds: {payload['mean_output_period_d']:.4f} d " \
           f"(+/- {payload['mean_output_period_stderr']:.4f})"
    return EXIT_OK, payload, text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, payload, text = args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "json", False) and payload is not None:
        print(json.dumps(payload, indent=1))
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
