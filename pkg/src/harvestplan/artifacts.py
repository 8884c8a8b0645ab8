"""Artifact persistence: instances, cohorts, ideals, archives, matrices, bundles.

All numeric text is written with ``repr`` (shortest round-trip form), so
write/read cycles are lossless to full float64 precision.  Every artifact
carries the fingerprints of its inputs; ``load_bundle`` refuses directories
whose pieces were not produced from one another.

File formats (field names are the contract, documented in the README):

* instance: ``<stem>.json`` header (period count, assortment names, demand
  table, stands file name) plus ``<stem>.stands.csv`` with one row per stand:
  ``id, area_ha`` then ``<assortment>_mean_m3, <assortment>_sd_m3`` pairs in
  assortment order.
* cohort: ``cohort.csv`` with columns ``scenario, assortment, stand,
  volume_m3`` plus ``cohort.manifest.json``.
* ideals: ``ideals.csv`` with columns ``assortment, period, scenario,
  ideal_m3[, nadir_m3]`` plus ``ideals.manifest.json``.
* archive: ``archive.json`` (entries with schedules, weights, deviations,
  solve metadata).
* evaluation matrix: ``matrix.npy`` (float64, solutions x scenarios x
  assortments x periods) plus ``matrix.manifest.json``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__ as _pkg_version
from .fingerprints import (
    fingerprint_array,
    fingerprint_cohort,
    fingerprint_config,
    fingerprint_instance,
)
from .model import (
    Assortment,
    DemandTable,
    HarvestSchedule,
    ProblemInstance,
    StandRecord,
    validate_instance,
)
from .pareto import ArchiveEntry, IdealResult, NadirEstimate, SolutionArchive
from .robustness import EvaluationMatrix
from .scenarios import Scenario, ScenarioCohort


class MissingArtifact(FileNotFoundError):
    """A bundle directory lacks a required artifact file."""


class ArtifactFormatError(ValueError):
    """An artifact file does not match its documented schema."""


INSTANCE_FORMAT = "harvestplan-instance/1"
COHORT_FORMAT = "harvestplan-cohort/1"
IDEALS_FORMAT = "harvestplan-ideals/1"
ARCHIVE_FORMAT = "harvestplan-archive/1"
MATRIX_FORMAT = "harvestplan-matrix/1"
BUNDLE_FORMAT = "harvestplan-bundle/1"


def _write_json(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def _read_json(path: Path, expected_format: str) -> dict:
    if not path.exists():
        raise MissingArtifact(str(path))
    payload = json.loads(path.read_text())
    if payload.get("format") != expected_format:
        raise ArtifactFormatError(
            f"{path} declares {payload.get('format')!r}, expected {expected_format!r}"
        )
    return payload


# ---------------------------------------------------------------------------
# Instance


def write_instance(instance: ProblemInstance, header_path: Path) -> None:
    header_path = Path(header_path)
    stem = header_path.name.removesuffix(".json")
    stands_name = f"{stem}.stands.csv"
    names = [a.name for a in instance.assortments]
    header = {
        "format": INSTANCE_FORMAT,
        "n_periods": instance.n_periods,
        "assortments": names,
        "demand_m3": [[repr(v) for v in row] for row in instance.demand.values.tolist()],
        "stands_file": stands_name,
        "fingerprint": fingerprint_instance(instance),
    }
    _write_json(header_path, header)

    columns = ["id", "area_ha"]
    for name in names:
        columns += [f"{name}_mean_m3", f"{name}_sd_m3"]
    with (header_path.parent / stands_name).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for stand in instance.stands:
            row = [stand.id, repr(stand.area_ha)]
            for a in range(instance.n_assortments):
                row += [repr(float(stand.volume_mean[a])), repr(float(stand.volume_sd[a]))]
            writer.writerow(row)


def read_instance(header_path: Path) -> ProblemInstance:
    header_path = Path(header_path)
    header = _read_json(header_path, INSTANCE_FORMAT)
    names = header["assortments"]
    demand = np.array([[float(v) for v in row] for row in header["demand_m3"]])
    stands_path = header_path.parent / header["stands_file"]
    if not stands_path.exists():
        raise MissingArtifact(str(stands_path))
    stands = []
    with stands_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            mean = np.array([float(row[f"{n}_mean_m3"]) for n in names])
            sd = np.array([float(row[f"{n}_sd_m3"]) for n in names])
            stands.append(
                StandRecord(int(row["id"]), float(row["area_ha"]), mean, sd)
            )
    instance = ProblemInstance(
        tuple(stands),
        tuple(Assortment(i + 1, n) for i, n in enumerate(names)),
        int(header["n_periods"]),
        DemandTable(demand),
    )
    instance = validate_instance(instance)
    stated = header.get("fingerprint")
    if stated and stated != fingerprint_instance(instance):
        raise ArtifactFormatError(f"{header_path}: content does not match fingerprint")
    return instance


# ---------------------------------------------------------------------------
# Cohort


def write_cohort(cohort: ScenarioCohort, directory: Path, instance_fingerprint: str) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / "cohort.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "assortment", "stand", "volume_m3"])
        for sc in cohort.scenarios:
            n_a, n_s = sc.volumes.shape
            for a in range(n_a):
                vol_row = sc.volumes[a]
                for j in range(n_s):
                    writer.writerow([sc.id, a + 1, j + 1, repr(float(vol_row[j]))])
    _write_json(
        directory / "cohort.manifest.json",
        {
            "format": COHORT_FORMAT,
            "seed": cohort.seed,
            "count": len(cohort),
            "generator_version": cohort.generator_version,
            "ids": cohort.ids,
            "instance_fingerprint": instance_fingerprint,
            "fingerprint": fingerprint_cohort(cohort),
        },
    )


def read_cohort(directory: Path) -> tuple[ScenarioCohort, dict]:
    directory = Path(directory)
    manifest = _read_json(directory / "cohort.manifest.json", COHORT_FORMAT)
    csv_path = directory / "cohort.csv"
    if not csv_path.exists():
        raise MissingArtifact(str(csv_path))
    volumes: dict[str, dict[tuple[int, int], float]] = {}
    max_a = max_j = 0
    with csv_path.open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for sid, a, j, vol in reader:
            a, j = int(a), int(j)
            max_a, max_j = max(max_a, a), max(max_j, j)
            volumes.setdefault(sid, {})[(a, j)] = float(vol)
    scenarios = []
    for sid in manifest["ids"]:
        arr = np.zeros((max_a, max_j))
        for (a, j), v in volumes[sid].items():
            arr[a - 1, j - 1] = v
        scenarios.append(Scenario(sid, arr))
    cohort = ScenarioCohort(
        tuple(scenarios),
        seed=int(manifest["seed"]),
        generator_version=manifest["generator_version"],
    )
    if fingerprint_cohort(cohort) != manifest["fingerprint"]:
        raise ArtifactFormatError(f"{csv_path}: content does not match fingerprint")
    return cohort, manifest


# ---------------------------------------------------------------------------
# Ideals


def write_ideals(
    ideals: IdealResult,
    directory: Path,
    instance_fingerprint: str,
    nadir: NadirEstimate | None = None,
) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n_a, n_t, n_p = ideals.values.shape
    with (directory / "ideals.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["assortment", "period", "scenario", "ideal_m3"]
        if nadir is not None:
            header.append("nadir_m3")
        writer.writerow(header)
        for a in range(n_a):
            for t in range(n_t):
                for p in range(n_p):
                    row = [a + 1, t + 1, p + 1, repr(float(ideals.values[a, t, p]))]
                    if nadir is not None:
                        row.append(repr(float(nadir.values[a, t, p])))
                    writer.writerow(row)
    _write_json(
        directory / "ideals.manifest.json",
        {
            "format": IDEALS_FORMAT,
            "shape": [n_a, n_t, n_p],
            "scenario_ids": list(ideals.scenario_ids),
            "shortcut_used": ideals.shortcut_used,
            "exact": ideals.exact,
            "nadir_included": nadir is not None,
            "nadir_method": nadir.method if nadir else None,
            "instance_fingerprint": instance_fingerprint,
            "fingerprint": fingerprint_array(ideals.values, "ideals"),
        },
    )


def read_ideals(directory: Path) -> tuple[IdealResult, NadirEstimate | None, dict]:
    directory = Path(directory)
    manifest = _read_json(directory / "ideals.manifest.json", IDEALS_FORMAT)
    csv_path = directory / "ideals.csv"
    if not csv_path.exists():
        raise MissingArtifact(str(csv_path))
    n_a, n_t, n_p = manifest["shape"]
    values = np.zeros((n_a, n_t, n_p))
    nadir_values = np.zeros((n_a, n_t, n_p)) if manifest["nadir_included"] else None
    with csv_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            a, t, p = int(row["assortment"]) - 1, int(row["period"]) - 1, int(row["scenario"]) - 1
            values[a, t, p] = float(row["ideal_m3"])
            if nadir_values is not None:
                nadir_values[a, t, p] = float(row["nadir_m3"])
    if fingerprint_array(values, "ideals") != manifest["fingerprint"]:
        raise ArtifactFormatError(f"{csv_path}: content does not match fingerprint")
    ideals = IdealResult(
        values=values,
        scenario_ids=tuple(manifest["scenario_ids"]),
        shortcut_used=manifest["shortcut_used"],
        exact=manifest["exact"],
    )
    nadir = NadirEstimate(nadir_values) if nadir_values is not None else None
    return ideals, nadir, manifest


# ---------------------------------------------------------------------------
# Archive


def write_archive(archive: SolutionArchive, path: Path) -> None:
    entries = []
    for e in archive.entries:
        entries.append(
            {
                "id": e.id,
                "label": e.label,
                "weights": [repr(float(w)) for w in e.weights],
                "assignment": e.schedule.assignment.tolist(),
                "objective_values": [
                    [[repr(float(v)) for v in col] for col in row]
                    for row in e.objective_values.tolist()
                ],
                "status": e.status,
                "objective": repr(float(e.objective)),
                "bound": repr(float(e.bound)),
                "nodes": e.nodes,
                "wall_time_s": e.wall_time_s,
                "duplicate_of": e.duplicate_of,
            }
        )
    _write_json(
        Path(path),
        {
            "format": ARCHIVE_FORMAT,
            "instance_fingerprint": archive.instance_fingerprint,
            "config_fingerprint": archive.config_fingerprint,
            "scenario_ids": list(archive.scenario_ids),
            "fingerprint": archive.fingerprint,
            "entries": entries,
        },
    )


def read_archive(path: Path) -> SolutionArchive:
    payload = _read_json(Path(path), ARCHIVE_FORMAT)
    entries = []
    for e in payload["entries"]:
        entries.append(
            ArchiveEntry(
                id=int(e["id"]),
                label=e["label"],
                weights=np.array([float(w) for w in e["weights"]]),
                schedule=HarvestSchedule(np.array(e["assignment"], dtype=np.int64)),
                objective_values=np.array(
                    [[[float(v) for v in col] for col in row] for row in e["objective_values"]]
                ),
                status=e["status"],
                objective=float(e["objective"]),
                bound=float(e["bound"]),
                nodes=int(e["nodes"]),
                wall_time_s=float(e["wall_time_s"]),
                duplicate_of=e["duplicate_of"],
            )
        )
    archive = SolutionArchive(
        entries=entries,
        instance_fingerprint=payload["instance_fingerprint"],
        config_fingerprint=payload["config_fingerprint"],
        scenario_ids=tuple(payload["scenario_ids"]),
    )
    if archive.fingerprint != payload["fingerprint"]:
        raise ArtifactFormatError(f"{path}: content does not match fingerprint")
    return archive


# ---------------------------------------------------------------------------
# Evaluation matrix


def write_matrix(matrix: EvaluationMatrix, directory: Path, cohort_seed: int) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.save(directory / "matrix.npy", matrix.values)
    _write_json(
        directory / "matrix.manifest.json",
        {
            "format": MATRIX_FORMAT,
            "shape": list(matrix.values.shape),
            "solution_ids": list(matrix.solution_ids),
            "scenario_ids": list(matrix.scenario_ids),
            "archive_fingerprint": matrix.archive_fingerprint,
            "cohort_fingerprint": matrix.cohort_fingerprint,
            "cohort_seed": cohort_seed,
            "fingerprint": fingerprint_array(matrix.values, "matrix"),
        },
    )


def read_matrix(directory: Path) -> EvaluationMatrix:
    directory = Path(directory)
    manifest = _read_json(directory / "matrix.manifest.json", MATRIX_FORMAT)
    npy = directory / "matrix.npy"
    if not npy.exists():
        raise MissingArtifact(str(npy))
    values = np.load(npy)
    if fingerprint_array(values, "matrix") != manifest["fingerprint"]:
        raise ArtifactFormatError(f"{npy}: content does not match fingerprint")
    return EvaluationMatrix(
        values=values,
        solution_ids=tuple(manifest["solution_ids"]),
        scenario_ids=tuple(manifest["scenario_ids"]),
        archive_fingerprint=manifest["archive_fingerprint"],
        cohort_fingerprint=manifest["cohort_fingerprint"],
    )


# ---------------------------------------------------------------------------
# Bundle


@dataclass
class ArtifactBundle:
    """All pipeline outputs for one instance, loaded and cross-checked."""

    directory: Path
    instance: ProblemInstance
    cohort: ScenarioCohort
    archive: SolutionArchive
    matrix: EvaluationMatrix
    ideals: IdealResult | None
    nadir: NadirEstimate | None
    manifest: dict

    @property
    def instance_fingerprint(self) -> str:
        return fingerprint_instance(self.instance)


def bundle_manifest_path(directory: Path) -> Path:
    return Path(directory) / "bundle.json"


def write_bundle_manifest(
    directory: Path, stages: dict, seeds: dict, config: dict
) -> None:
    _write_json(
        bundle_manifest_path(directory),
        {
            "format": BUNDLE_FORMAT,
            "version": _pkg_version,
            "stages": stages,
            "seeds": seeds,
            "config": fingerprint_config(config),
        },
    )


def load_bundle(directory: Path) -> ArtifactBundle:
    """Load a pipeline output directory, verifying every cross-fingerprint."""
    from .robustness import FingerprintMismatch  # local import avoids a cycle

    directory = Path(directory)
    manifest = _read_json(bundle_manifest_path(directory), BUNDLE_FORMAT)
    instance = read_instance(directory / "instance.json")
    inst_fp = fingerprint_instance(instance)
    cohort, cohort_manifest = read_cohort(directory)
    archive = read_archive(directory / "archive.json")
    matrix = read_matrix(directory)
    ideals = nadir = None
    if (directory / "ideals.manifest.json").exists():
        ideals, nadir, ideals_manifest = read_ideals(directory)
        if ideals_manifest["instance_fingerprint"] != inst_fp:
            raise FingerprintMismatch("ideals were computed for a different instance")

    if cohort_manifest["instance_fingerprint"] != inst_fp:
        raise FingerprintMismatch("cohort was sampled from a different instance")
    if archive.instance_fingerprint != inst_fp:
        raise FingerprintMismatch("archive was generated from a different instance")
    if matrix.archive_fingerprint != archive.fingerprint:
        raise FingerprintMismatch("matrix does not match the archive")
    if matrix.cohort_fingerprint != fingerprint_cohort(cohort):
        raise FingerprintMismatch("matrix does not match the cohort")
    if len(archive) == 0:
        raise MissingArtifact("archive holds no solutions")
    return ArtifactBundle(
        directory=directory,
        instance=instance,
        cohort=cohort,
        archive=archive,
        matrix=matrix,
        ideals=ideals,
        nadir=nadir,
        manifest=manifest,
    )
