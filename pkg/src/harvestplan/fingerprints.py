"""Content fingerprints tying artifacts together.

Every persisted artifact (instance, cohort, archive, evaluation matrix)
records the fingerprints of its inputs, so later stages and the session
service can refuse mismatched combinations.  Hashing is over little-endian
float64 bytes and canonical JSON, which makes fingerprints stable across
platforms.
"""

from __future__ import annotations

import hashlib
import json
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .model import ProblemInstance
    from .scenarios import ScenarioCohort


def _hasher() -> "hashlib._Hash":
    return hashlib.sha256()


def _update_array(h, arr: np.ndarray) -> None:
    h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _update_json(h, obj) -> None:
    h.update(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8"))


def fingerprint_instance(instance: "ProblemInstance") -> str:
    h = _hasher()
    _update_json(
        h,
        {
            "kind": "instance",
            "assortments": [a.name for a in instance.assortments],
            "n_periods": instance.n_periods,
            "n_stands": instance.n_stands,
        },
    )
    mean, sd = instance.volume_stats()
    _update_array(h, mean)
    _update_array(h, sd)
    _update_array(h, np.array([s.area_ha for s in instance.stands]))
    _update_array(h, instance.demand.values)
    return h.hexdigest()


def fingerprint_cohort(cohort: "ScenarioCohort") -> str:
    h = _hasher()
    _update_json(
        h,
        {
            "kind": "cohort",
            "seed": cohort.seed,
            "generator_version": cohort.generator_version,
            "ids": cohort.ids,
        },
    )
    for sc in cohort.scenarios:
        _update_array(h, sc.volumes)
    return h.hexdigest()


def fingerprint_config(payload: dict) -> str:
    """Fingerprint of a configuration dict (arrays allowed as nested lists)."""
    h = _hasher()
    _update_json(h, {"kind": "config", "payload": _jsonable(payload)})
    return h.hexdigest()


def fingerprint_array(arr: np.ndarray, label: str = "") -> str:
    h = _hasher()
    _update_json(h, {"kind": "array", "label": label, "shape": list(arr.shape)})
    _update_array(h, arr)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
