"""Batch pipeline: instance -> scenarios -> ideals -> archive -> stress test.

Each stage writes its artifact (with fingerprints) into the output directory
and records its wall time in the bundle manifest, mirroring the three main
cost sources of the workflow: solution generation, ideal values, and stress
testing.  Re-running the pipeline with the same configuration verifies
fingerprints and skips stages whose outputs already exist; a mismatching
output directory is refused rather than silently mixed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from . import artifacts
from .fingerprints import fingerprint_cohort, fingerprint_instance
from .milp import ReferenceConfig, SolveOptions
from .model import ProblemInstance, meta_objective_count
from .pareto import (
    compute_ideals,
    estimate_nadir,
    generate_archive,
    generate_weight_schedule,
)
from .robustness import stress_test
from .scenarios import SampleMode, named_scenarios, stress_cohort
from .synth import synthesize_instance


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


@dataclass
class PipelineConfig:
    """Everything a full pipeline run depends on."""

    out_dir: Path
    # Instance source: an existing header file, or synthetic generation.
    instance_path: Path | None = None
    synth_seed: int = 0
    n_stands: int = 250
    n_periods: int = 12
    # Scenario cohort for stress testing (includes the 3 named scenarios).
    cohort_size: int = 1000
    scenario_seed: int = 1
    sample_mode: SampleMode = "clamp"
    # Scalarization and weight schedule.
    epsilon: float = 1e-4
    emphasis: float = 100.0
    base_weight: float = 1.0
    # Solver budgets.
    archive_options: SolveOptions = field(default_factory=SolveOptions)
    ideal_options: SolveOptions = field(
        default_factory=lambda: SolveOptions(rel_gap_tol=0.0)
    )
    # Ideal points over the full cohort (vulnerability analysis) or only the
    # optimization scenarios.
    ideals_over: str = "cohort"  # "cohort" | "named"
    use_period_shortcut: bool = True
    include_nadir: bool = True
    workers: int = 1

    def fingerprintable(self) -> dict:
        return {
            "instance_path": str(self.instance_path) if self.instance_path else None,
            "synth_seed": self.synth_seed,
            "n_stands": self.n_stands,
            "n_periods": self.n_periods,
            "cohort_size": self.cohort_size,
            "scenario_seed": self.scenario_seed,
            "sample_mode": self.sample_mode,
            "epsilon": self.epsilon,
            "emphasis": self.emphasis,
            "base_weight": self.base_weight,
            "ideals_over": self.ideals_over,
            "use_period_shortcut": self.use_period_shortcut,
        }


def run_pipeline(config: PipelineConfig, log=print) -> artifacts.ArtifactBundle:
    """Execute all stages, skipping the ones already present and consistent."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages: dict[str, dict] = {}

    def _stage(name: str, is_done, run) -> None:
        t0 = time.monotonic()
        try:
            if is_done():
                stages[name] = {"elapsed_s": 0.0, "skipped": True}
                log(f"[{name}] up to date, skipped")
                return
            run()
        except StageError:
            raise
        except artifacts.ArtifactFormatError as exc:
            raise StageError(name, f"existing artifact is inconsistent: {exc}") from exc
        except Exception as exc:
            raise StageError(name, str(exc)) from exc
        stages[name] = {"elapsed_s": round(time.monotonic() - t0, 3), "skipped": False}
        log(f"[{name}] done in {stages[name]['elapsed_s']:.1f}s")

    # -- instance -----------------------------------------------------------
    instance_header = out / "instance.json"
    state: dict = {}

    def _instance_done() -> bool:
        if not instance_header.exists():
            return False
        state["instance"] = artifacts.read_instance(instance_header)
        return True

    def _instance_run() -> None:
        if config.instance_path is not None:
            src = Path(config.instance_path)
            if not src.exists():
                raise StageError("instance", f"instance file not found: {src}")
            instance = artifacts.read_instance(src)
        else:
            instance = synthesize_instance(
                config.synth_seed,
                n_stands=config.n_stands,
                n_periods=config.n_periods,
            )
        artifacts.write_instance(instance, instance_header)
        state["instance"] = instance

    _stage("instance", _instance_done, _instance_run)
    instance: ProblemInstance = state["instance"]
    inst_fp = fingerprint_instance(instance)

    # -- scenarios ------------------------------------------------------------
    def _scenarios_done() -> bool:
        if not (out / "cohort.manifest.json").exists():
            return False
        cohort, manifest = artifacts.read_cohort(out)
        if (
            manifest["instance_fingerprint"] != inst_fp
            or manifest["seed"] != config.scenario_seed
            or manifest["count"] != config.cohort_size
        ):
            raise StageError(
                "scenarios", "existing cohort does not match this configuration"
            )
        state["cohort"] = cohort
        return True

    def _scenarios_run() -> None:
        cohort = stress_cohort(
            instance, config.cohort_size, config.scenario_seed, config.sample_mode
        )
        artifacts.write_cohort(cohort, out, inst_fp)
        state["cohort"] = cohort

    _stage("scenarios", _scenarios_done, _scenarios_run)
    cohort = state["cohort"]
    optimization_scenarios = list(named_scenarios(instance))

    # -- ideals ---------------------------------------------------------------
    def _ideals_done() -> bool:
        if not (out / "ideals.manifest.json").exists():
            return False
        ideals, nadir, manifest = artifacts.read_ideals(out)
        if manifest["instance_fingerprint"] != inst_fp:
            raise StageError("ideals", "existing ideals belong to another instance")
        state["ideals"], state["nadir"] = ideals, nadir
        return True

    def _ideals_run() -> None:
        scen = (
            list(cohort.scenarios)
            if config.ideals_over == "cohort"
            else optimization_scenarios
        )
        ideals = compute_ideals(
            instance,
            scen,
            use_period_shortcut=config.use_period_shortcut,
            options=config.ideal_options,
            keep_schedules=config.include_nadir,
            workers=config.workers,
        )
        nadir = (
            estimate_nadir(instance, scen, ideals) if config.include_nadir else None
        )
        artifacts.write_ideals(ideals, out, inst_fp, nadir)
        state["ideals"], state["nadir"] = ideals, nadir

    _stage("ideals", _ideals_done, _ideals_run)

    # -- archive ---------------------------------------------------------------
    archive_path = out / "archive.json"

    def _archive_done() -> bool:
        if not archive_path.exists():
            return False
        archive = artifacts.read_archive(archive_path)
        if archive.instance_fingerprint != inst_fp:
            raise StageError("generate", "existing archive belongs to another instance")
        state["archive"] = archive
        return True

    def _archive_run() -> None:
        k = meta_objective_count(instance, len(optimization_scenarios))
        schedule = generate_weight_schedule(k, config.emphasis, config.base_weight)
        base = ReferenceConfig.neutral(
            instance, len(optimization_scenarios), config.epsilon
        )
        archive = generate_archive(
            instance,
            optimization_scenarios,
            schedule,
            base,
            options=config.archive_options,
            workers=config.workers,
        )
        artifacts.write_archive(archive, archive_path)
        state["archive"] = archive

    _stage("generate", _archive_done, _archive_run)
    archive = state["archive"]

    # -- stress test -------------------------------------------------------------
    def _stress_done() -> bool:
        if not (out / "matrix.manifest.json").exists():
            return False
        matrix = artifacts.read_matrix(out)
        if (
            matrix.archive_fingerprint != archive.fingerprint
            or matrix.cohort_fingerprint != fingerprint_cohort(cohort)
        ):
            raise StageError("stress", "existing matrix does not match archive/cohort")
        state["matrix"] = matrix
        return True

    def _stress_run() -> None:
        matrix = stress_test(archive, cohort, instance)
        artifacts.write_matrix(matrix, out, cohort_seed=config.scenario_seed)
        state["matrix"] = matrix

    _stage("stress", _stress_done, _stress_run)

    artifacts.write_bundle_manifest(
        out,
        stages=stages,
        seeds={"synth": config.synth_seed, "scenarios": config.scenario_seed},
        config=config.fingerprintable(),
    )
    return artifacts.load_bundle(out)
