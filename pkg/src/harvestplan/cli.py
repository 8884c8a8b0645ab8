"""Command-line pipeline driver.

Subcommands: ``synth``, ``scenarios``, ``ideals``, ``generate``, ``stress``,
``pipeline``, ``report``, ``export-lp``, ``serve``.  Each is independently
invocable over a bundle directory; ``pipeline`` chains them all.  Exit
codes: 0 success, 1 validation problem, 2 solver resource limit, 3 internal
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import artifacts
from .fingerprints import fingerprint_instance
from .milp import (
    ReferenceConfig,
    SolveOptions,
    build_scalarized_milp,
    build_single_objective_milp,
    export_lp_file,
)
from .model import InstanceValidationError
from .pareto import summarize_ideals
from .pipeline import PipelineConfig, StageError, run_pipeline
from .scenarios import named_scenarios, stress_cohort
from .synth import synthesize_instance

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_INTERNAL = 0, 1, 2, 3


def _solver_options(args, exact_default: bool = False) -> SolveOptions:
    return SolveOptions(
        rel_gap_tol=args.gap if args.gap is not None else (0.0 if exact_default else 1e-6),
        node_limit=args.node_limit,
        time_limit_s=args.time_limit,
    )


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gap", type=float, default=None, help="relative gap tolerance")
    parser.add_argument(
        "--node-limit", type=int, default=None, help="branch-and-bound node budget"
    )
    parser.add_argument(
        "--time-limit", type=float, default=None, help="wall-clock budget per solve (s)"
    )


def _add_synth_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="synthetic instance seed")
    parser.add_argument("--stands", type=int, default=250)
    parser.add_argument("--periods", type=int, default=12)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harvestplan",
        description="Robust tactical harvest scheduling: pipeline and service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic instance file")
    _add_synth_flags(p)
    p.add_argument("--out", type=Path, required=True, help="instance header path (.json)")

    p = sub.add_parser("scenarios", help="sample the stress-testing cohort")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--size", type=int, default=1000, help="total cohort size incl. worst/nominal/best")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--mode", choices=["clamp", "truncate"], default="clamp")

    p = sub.add_parser("ideals", help="compute per-objective ideal values")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--over", choices=["named", "cohort"], default="named")
    p.add_argument("--cohort-dir", type=Path, help="required with --over cohort")
    p.add_argument("--no-shortcut", action="store_true", help="disable the uniform-demand period shortcut")
    p.add_argument("--nadir", action="store_true", help="also estimate the (approximate) nadir")
    p.add_argument("--workers", type=int, default=1)
    _add_solver_flags(p)

    p = sub.add_parser("generate", help="generate the Pareto archive")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="archive path (.json)")
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--emphasis", type=float, default=100.0)
    p.add_argument("--base-weight", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)
    _add_solver_flags(p)

    p = sub.add_parser("stress", help="evaluate the archive across the cohort")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--archive", type=Path, required=True)
    p.add_argument("--cohort-dir", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("pipeline", help="run every stage into a bundle directory")
    _add_synth_flags(p)
    p.add_argument("--instance", type=Path, help="existing instance header (skips synth)")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--cohort-size", type=int, default=1000)
    p.add_argument("--scenario-seed", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--ideals-over", choices=["named", "cohort"], default="cohort")
    p.add_argument("--ideal-node-limit", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_solver_flags(p)

    p = sub.add_parser("report", help="summarize a bundle (counts, ranges, timings)")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("export-lp", help="write a model in LP text format")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument(
        "--single",
        metavar="A,T,P",
        help="export the single-objective model for assortment A, period T, scenario P",
    )

    p = sub.add_parser("serve", help="serve the decision-support API (and UI)")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", type=Path, default=None, help="static UI assets to mount at /")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (InstanceValidationError, artifacts.ArtifactFormatError, artifacts.MissingArtifact) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - catch-all for exit-code contract
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def _dispatch(args) -> int:
    if args.command == "synth":
        instance = synthesize_instance(args.seed, n_stands=args.stands, n_periods=args.periods)
        args.out.parent.mkdir(parents=True, exist_ok=True)
        artifacts.write_instance(instance, args.out)
        print(f"wrote {args.out} ({instance.n_stands} stands, {instance.n_periods} periods)")
        return EXIT_OK

    if args.command == "scenarios":
        instance = artifacts.read_instance(args.instance)
        cohort = stress_cohort(instance, args.size, args.seed, args.mode)
        artifacts.write_cohort(cohort, args.out_dir, fingerprint_instance(instance))
        print(f"wrote cohort of {len(cohort)} scenarios to {args.out_dir}")
        return EXIT_OK

    if args.command == "ideals":
        from .pareto import compute_ideals, estimate_nadir

        instance = artifacts.read_instance(args.instance)
        if args.over == "cohort":
            if not args.cohort_dir:
                raise ValueError("--over cohort requires --cohort-dir")
            cohort, _ = artifacts.read_cohort(args.cohort_dir)
            scenarios = list(cohort.scenarios)
        else:
            scenarios = list(named_scenarios(instance))
        ideals = compute_ideals(
            instance,
            scenarios,
            use_period_shortcut=not args.no_shortcut,
            options=_solver_options(args, exact_default=True),
            keep_schedules=args.nadir,
            workers=args.workers,
        )
        nadir = estimate_nadir(instance, scenarios, ideals) if args.nadir else None
        artifacts.write_ideals(ideals, args.out_dir, fingerprint_instance(instance), nadir)
        summary = summarize_ideals(ideals)
        for a, (lo, hi) in summary.items():
            name = instance.assortments[a - 1].name
            print(f"{name}: ideal range [{lo:.6g}, {hi:.6g}] m3")
        return EXIT_OK

    if args.command == "generate":
        from .model import meta_objective_count
        from .pareto import generate_archive, generate_weight_schedule

        instance = artifacts.read_instance(args.instance)
        scenarios = list(named_scenarios(instance))
        k = meta_objective_count(instance, len(scenarios))
        archive = generate_archive(
            instance,
            scenarios,
            generate_weight_schedule(k, args.emphasis, args.base_weight),
            ReferenceConfig.neutral(instance, len(scenarios), args.epsilon),
            options=_solver_options(args),
            workers=args.workers,
        )
        args.out.parent.mkdir(parents=True, exist_ok=True)
        artifacts.write_archive(archive, args.out)
        limited = sum(1 for e in archive.entries if e.status not in ("optimal", "gap-limit"))
        print(f"wrote archive of {len(archive)} solutions to {args.out}")
        if limited:
            print(f"{limited} solves ended on a resource limit (incumbents recorded)")
            return EXIT_RESOURCE
        return EXIT_OK

    if args.command == "stress":
        from .robustness import stress_test

        instance = artifacts.read_instance(args.instance)
        archive = artifacts.read_archive(args.archive)
        cohort, manifest = artifacts.read_cohort(args.cohort_dir)
        matrix = stress_test(archive, cohort, instance)
        artifacts.write_matrix(matrix, args.out_dir, cohort_seed=manifest["seed"])
        print(
            f"wrote evaluation matrix {matrix.values.shape[0]}x{matrix.values.shape[1]}"
            f"x{matrix.values.shape[2] * matrix.values.shape[3]} to {args.out_dir}"
        )
        return EXIT_OK

    if args.command == "pipeline":
        config = PipelineConfig(
            out_dir=args.out_dir,
            instance_path=args.instance,
            synth_seed=args.seed,
            n_stands=args.stands,
            n_periods=args.periods,
            cohort_size=args.cohort_size,
            scenario_seed=args.scenario_seed,
            epsilon=args.epsilon,
            archive_options=_solver_options(args),
            ideal_options=SolveOptions(
                rel_gap_tol=0.0, node_limit=args.ideal_node_limit
            ),
            ideals_over=args.ideals_over,
            workers=args.workers,
        )
        bundle = run_pipeline(config)
        print(
            f"bundle complete: {len(bundle.archive)} solutions, "
            f"{len(bundle.cohort)} scenarios, matrix {bundle.matrix.values.shape}"
        )
        limited = sum(
            1
            for e in bundle.archive.entries
            if e.status not in ("optimal", "gap-limit")
        )
        return EXIT_RESOURCE if limited else EXIT_OK

    if args.command == "report":
        return _report(args)

    if args.command == "export-lp":
        instance = artifacts.read_instance(args.instance)
        scenarios = list(named_scenarios(instance))
        if args.single:
            a, t, p = (int(x) for x in args.single.split(","))
            model = build_single_objective_milp(instance, scenarios[p - 1], a, t, p)
        else:
            model = build_scalarized_milp(
                instance,
                scenarios,
                ReferenceConfig.neutral(instance, len(scenarios), args.epsilon),
            )
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(export_lp_file(model))
        print(
            f"wrote {args.out}: {model.n_rows} rows, {model.n_binary} binaries, "
            f"{model.n_continuous} continuous"
        )
        return EXIT_OK

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        app = create_app(args.bundle, ui_dir=args.ui_dir)
        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    raise ValueError(f"unknown command {args.command}")  # pragma: no cover


def _report(args) -> int:
    bundle = artifacts.load_bundle(args.bundle)
    from .robustness import objective_ranges

    inst = bundle.instance
    periods = list(range(1, min(3, inst.n_periods) + 1))
    from .robustness import objectives_for_periods

    ranges = objective_ranges(bundle.matrix, objectives_for_periods(inst, periods))
    payload = {
        "instance": {
            "stands": inst.n_stands,
            "periods": inst.n_periods,
            "assortments": [a.name for a in inst.assortments],
            "fingerprint": bundle.instance_fingerprint,
        },
        "archive_size": len(bundle.archive),
        "cohort_size": len(bundle.cohort),
        "matrix_shape": list(bundle.matrix.values.shape),
        "stage_timings_s": {
            name: rec for name, rec in bundle.manifest.get("stages", {}).items()
        },
        "objective_ranges_first_periods": {
            f"{inst.assortments[a - 1].name}_t{t}": {
                "min": stats["min"],
                "max": stats["max"],
            }
            for (a, t), stats in ranges.items()
        },
    }
    if bundle.ideals is not None:
        payload["ideal_summary"] = {
            inst.assortments[a - 1].name: {"min": lo, "max": hi}
            for a, (lo, hi) in summarize_ideals(bundle.ideals).items()
        }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"bundle {args.bundle}")
        print(
            f"  instance: {inst.n_stands} stands x {inst.n_periods} periods, "
            f"assortments {', '.join(a.name for a in inst.assortments)}"
        )
        print(f"  archive:  {len(bundle.archive)} solutions")
        print(f"  cohort:   {len(bundle.cohort)} scenarios")
        print(f"  matrix:   {'x'.join(str(s) for s in bundle.matrix.values.shape)}")
        for name, rec in payload["stage_timings_s"].items():
            mark = "skipped" if rec.get("skipped") else f"{rec['elapsed_s']}s"
            print(f"  stage {name}: {mark}")
        if "ideal_summary" in payload:
            for name, rng in payload["ideal_summary"].items():
                print(f"  ideal {name}: [{rng['min']:.6g}, {rng['max']:.6g}] m3")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
