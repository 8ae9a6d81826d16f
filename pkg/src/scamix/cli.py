"""Command-line interface.

Subcommands write CSV (to --out, or stdout by default) beginning with a
#-prefixed metadata block recording the tool version, the master seed, and
the run's parameters, so any output file documents how to regenerate
itself.  The exception is `decompose`, which emits a JSON list of
components.  Image outputs (--image) use the portable PBM/PGM formats.

Exit codes: 0 on success, 2 on a validation/usage error, 3 on any other
runtime failure.

Stream conventions: initial conditions draw from the stream (seed, 0) and
simulation randomness from (seed, 1); experiment subcommands follow the
stream layouts of their library functions.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .cca import cca_evolve, density_trace
from .core import Geometry, ValidationError, config_random
from .decompose import greedy_decompose
from .experiments import (
    ClassThresholds,
    REFERENCE_CLASSIFICATION,
    classify_aca,
    run_aca_survey,
    run_c3_convergence,
    run_c3_success,
    run_dalpha,
    run_totalistic_grid,
)
from .io import write_csv, write_pbm, write_pgm
from .rules import c3_plut, lut_number, parse_rule_spec
from .sca import derive_rng, sca_evolve


def _write(args, header, rows, metadata) -> None:
    meta = {"version": __version__, "seed": args.seed}
    meta.update(metadata)
    if args.out is None or args.out == "-":
        write_csv(sys.stdout, header, rows, meta)
    else:
        write_csv(args.out, header, rows, meta)


def _initial(args, cells: int):
    geometry = Geometry(cells, 1)
    return config_random(geometry, 2, args.init_mode, derive_rng(args.seed, 0))


def _cmd_simulate(args) -> int:
    plut = parse_rule_spec(args.rule)
    geometry = Geometry(args.cells, plut.radius)
    init = config_random(geometry, plut.n_states, args.init_mode, derive_rng(args.seed, 0))
    diagram = sca_evolve(plut, init, args.steps, args.seed, stream=(1,))
    if args.image:
        if plut.n_states == 2:
            write_pbm(args.image, diagram.rows)
        else:
            write_pgm(args.image, diagram.rows / (plut.n_states - 1))
    rows = (
        (t, cell, int(diagram.rows[t, cell]))
        for t in range(args.steps + 1)
        for cell in range(args.cells)
    )
    _write(
        args,
        ["t", "cell", "state"],
        rows,
        {"rule": args.rule, "cells": args.cells, "steps": args.steps,
         "init_mode": args.init_mode},
    )
    return 0


def _cmd_cca_run(args) -> int:
    plut = parse_rule_spec(args.rule)
    geometry = Geometry(args.cells, plut.radius)
    init = config_random(geometry, plut.n_states, args.init_mode, derive_rng(args.seed, 0))
    traj = cca_evolve(plut, init, args.steps)
    if args.image:
        if not 0 <= args.image_state < plut.n_states:
            raise ValidationError(f"image state {args.image_state} out of range")
        write_pgm(args.image, traj.probs[:, :, args.image_state])
    header = ["t", "cell"] + [f"p_{s}" for s in range(plut.n_states)]
    rows = (
        [t, cell] + [float(p) for p in traj.probs[t, cell]]
        for t in range(args.steps + 1)
        for cell in range(args.cells)
    )
    _write(
        args,
        header,
        rows,
        {"rule": args.rule, "cells": args.cells, "steps": args.steps,
         "init_mode": args.init_mode, "image_state": args.image_state},
    )
    return 0


def _cmd_decompose(args) -> int:
    plut = parse_rule_spec(args.rule)
    decomposition = greedy_decompose(plut, tie_break=args.tie_break)
    components = []
    for alpha, lut in zip(decomposition.alphas, decomposition.components):
        entry: dict = {"alpha": alpha, "lut": [int(s) for s in lut.outputs]}
        if lut.n_states == 2 and lut.radius == 1:
            entry["eca_number"] = lut_number(lut)
        components.append(entry)
    text = json.dumps(components, indent=1) + "\n"
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def _cmd_dalpha(args) -> int:
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.points)
    curve = run_dalpha(args.rule, alphas, args.cells, args.steps, args.seed, args.metric)
    _write(
        args,
        ["alpha", "value"],
        zip(curve.alphas, curve.values),
        {"rule": args.rule, "cells": args.cells, "steps": args.steps,
         "metric": args.metric, "points": args.points,
         "alpha_min": args.alpha_min, "alpha_max": args.alpha_max},
    )
    return 0


def _thresholds(args) -> ClassThresholds:
    return ClassThresholds(
        flat=args.theta_flat,
        drop=args.theta_drop,
        noise=args.theta_noise,
    )


def _cmd_classify_aca(args) -> int:
    if args.survey == (args.rule is not None):
        raise ValidationError("give exactly one of --rule or --survey")
    thresholds = _thresholds(args)
    meta = {
        "cells": args.cells, "steps": args.steps, "points": args.points,
        "theta_flat": thresholds.flat,
        "theta_drop": "half-range" if thresholds.drop is None else thresholds.drop,
        "theta_noise": thresholds.noise,
    }
    if args.survey:
        survey = run_aca_survey(args.cells, args.steps, args.points, args.seed, thresholds)
        matches = sum(row.match for row in survey)
        meta["matches"] = f"{matches}/{len(survey)}"
        rows = [[row.rule, row.label, row.reference, int(row.match)] for row in survey]
    else:
        alphas = np.linspace(0.9, 1.0, args.points)
        curve = run_dalpha(args.rule, alphas, args.cells, args.steps, args.seed)
        label = classify_aca(curve, thresholds)
        reference = REFERENCE_CLASSIFICATION[args.rule]
        rows = [[args.rule, label, reference, int(label == reference)]]
    _write(args, ["rule", "label", "reference", "match"], rows, meta)
    return 0


def _cmd_c3_convergence(args) -> int:
    if args.ones is not None:
        records = run_c3_success(
            args.eta, args.cells, args.ones, args.ensemble, args.runs,
            args.seed, args.step_cap, args.threads,
        )
        meta = {"eta": args.eta, "cells": args.cells, "ones": args.ones,
                "ensemble": args.ensemble, "runs_per_ic": args.runs}
    else:
        records, summary = run_c3_convergence(
            args.eta, args.cells, args.ensemble, args.mode, args.runs,
            args.seed, args.step_cap, args.threads,
        )
        meta = asdict(summary)
    rows = [
        [r.index, r.majority, r.runs, r.converged, r.correct,
         r.correct / r.runs, r.mean_time]
        for r in records
    ]
    _write(
        args,
        ["ic", "majority", "runs", "converged", "correct", "success_rate", "mean_time"],
        rows,
        meta,
    )
    return 0


def _cmd_c3_trace(args) -> int:
    plut = c3_plut(args.eta)
    init = _initial(args, args.cells)
    traj = cca_evolve(plut, init, args.steps)
    if args.image:
        write_pgm(args.image, traj.probs[:, :, 1])
    trace = density_trace(traj)
    _write(
        args,
        ["t", "density"],
        ((t, float(trace[t])) for t in range(args.steps + 1)),
        {"eta": args.eta, "cells": args.cells, "steps": args.steps,
         "init_mode": args.init_mode},
    )
    return 0


def _cmd_totalistic_grid(args) -> int:
    resolution = 101 if args.paper_scale else args.resolution
    runs = 100 if args.paper_scale else args.runs
    stats = run_totalistic_grid(
        resolution, args.cells, args.steps, runs, args.seed, args.threads
    )
    rows = [
        [s.p1, s.p2, s.d_min, s.d_mean, s.d_max, s.dt_min, s.dt_mean, s.dt_max]
        for s in stats
    ]
    _write(
        args,
        ["p1", "p2", "d_min", "d_mean", "d_max", "dt_min", "dt_mean", "dt_max"],
        rows,
        {"resolution": resolution, "cells": args.cells, "steps": args.steps,
         "runs": runs, "paper_scale": args.paper_scale},
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--out", default=None, help="output CSV path (default stdout)")

    parser = argparse.ArgumentParser(
        prog="scamix",
        description="Stochastic cellular automata: simulation, exact distribution "
        "evolution, mixture decomposition, and experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def rule_arg(p):
        p.add_argument(
            "--rule", required=True,
            help="rule spec: eca:N, aaca:N:ALPHA, c3:ETA, totalistic:P1:P2, or file:PATH",
        )

    p = sub.add_parser("simulate", parents=[common], help="sample one seeded run")
    rule_arg(p)
    p.add_argument("--cells", type=int, default=49)
    p.add_argument("--steps", type=int, default=49)
    p.add_argument("--init-mode", choices=["uniform", "density-balanced"], default="uniform")
    p.add_argument("--image", default=None, help="also write a PBM/PGM diagram here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("cca-run", parents=[common], help="evolve exact distributions")
    rule_arg(p)
    p.add_argument("--cells", type=int, default=49)
    p.add_argument("--steps", type=int, default=49)
    p.add_argument("--init-mode", choices=["uniform", "density-balanced"], default="uniform")
    p.add_argument("--image", default=None, help="also write a PGM probability map here")
    p.add_argument("--image-state", type=int, default=1,
                   help="state whose probability the image shows (default 1)")
    p.set_defaults(func=_cmd_cca_run)

    p = sub.add_parser("decompose", parents=[common],
                       help="greedy mixture decomposition of a rule")
    rule_arg(p)
    p.add_argument("--tie-break", choices=["lowest", "highest"], default="lowest")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("dalpha", parents=[common],
                       help="distance between synchronous and partially-synchronous runs")
    p.add_argument("--rule", type=int, required=True, help="rule number 0-255")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--alpha-min", type=float, default=0.9)
    p.add_argument("--alpha-max", type=float, default=1.0)
    p.add_argument("--cells", type=int, default=69)
    p.add_argument("--steps", type=int, default=69)
    p.add_argument("--metric", choices=["tv", "euclidean"], default="tv")
    p.set_defaults(func=_cmd_dalpha)

    p = sub.add_parser("classify-aca", parents=[common],
                       help="label distance curves; --survey covers all 256 rules")
    p.add_argument("--rule", type=int, default=None, help="rule number 0-255")
    p.add_argument("--survey", action="store_true",
                   help="classify all 256 rules and compare to the reference labels")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--cells", type=int, default=69)
    p.add_argument("--steps", type=int, default=69)
    p.add_argument("--theta-flat", type=float, default=ClassThresholds.flat,
                   help="class-I ceiling on the curve maximum")
    p.add_argument("--theta-drop", type=float, default=ClassThresholds.drop,
                   help="minimum last-step fall for the sudden-drop classes "
                        "(default: half the curve's range)")
    p.add_argument("--theta-noise", type=int, default=ClassThresholds.noise,
                   help="derivative sign changes at which a sudden-drop curve is IIIb")
    p.set_defaults(func=_cmd_classify_aca)

    p = sub.add_parser("c3-convergence", parents=[common],
                       help="density-classification convergence study")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--cells", type=int, default=29)
    p.add_argument("--ensemble", type=int, default=100, help="number of initial conditions")
    p.add_argument("--mode", choices=["cca", "sca"], default="cca")
    p.add_argument("--runs", type=int, default=100, help="runs per IC in sca mode")
    p.add_argument("--step-cap", type=int, default=None)
    p.add_argument("--ones", type=int, default=None,
                   help="fix the number of ones per IC instead of density-balanced draws")
    p.set_defaults(func=_cmd_c3_convergence)

    p = sub.add_parser("c3-trace", parents=[common],
                       help="density trace of the exact distribution evolution")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--cells", type=int, default=149)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--init-mode", choices=["uniform", "density-balanced"],
                   default="density-balanced")
    p.add_argument("--image", default=None, help="also write a PGM probability map here")
    p.set_defaults(func=_cmd_c3_trace)

    p = sub.add_parser("totalistic-grid", parents=[common],
                       help="diagram-divergence grid over totalistic rules")
    p.add_argument("--resolution", type=int, default=21)
    p.add_argument("--cells", type=int, default=49)
    p.add_argument("--steps", type=int, default=49)
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--paper-scale", action="store_true",
                   help="101x101 grid with 100 runs per point")
    p.set_defaults(func=_cmd_totalistic_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())