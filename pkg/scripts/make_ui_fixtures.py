"""Record service API fixtures for the frontend contract tests.

Builds (or reuses) a case-study-shaped bundle, drives the HTTP app
in-process, and dumps the JSON responses the UI tests replay.  Usage:

    python scripts/make_ui_fixtures.py [--bundle DIR] [--out DIR]

The bundle build is the slow part (about ten minutes at full scale); pass
--bundle to reuse an existing one.
"""

from __future__ import annotations

import argparse
import json
import os
from pathlib import Path

from fastapi.testclient import TestClient

from harvestplan.milp import SolveOptions
from harvestplan.pipeline import PipelineConfig, run_pipeline
from harvestplan.service import create_app

ROOT = Path(__file__).resolve().parent.parent


def build_bundle(directory: Path):
    config = PipelineConfig(
        out_dir=directory,
        synth_seed=0,
        n_stands=250,
        n_periods=12,
        cohort_size=1000,
        scenario_seed=1,
        archive_options=SolveOptions(node_limit=0, improvement_passes=12, swap_passes=1),
        ideal_options=SolveOptions(rel_gap_tol=0.0, node_limit=40),
        ideals_over="cohort",
        workers=min(2, os.cpu_count() or 1),
    )
    return run_pipeline(config)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--bundle", type=Path, default=ROOT / ".case-bundle")
    parser.add_argument("--out", type=Path, default=ROOT / "frontend" / "tests" / "fixtures")
    args = parser.parse_args()

    bundle = build_bundle(args.bundle)
    args.out.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app(bundle))

    def dump(name: str, payload) -> None:
        (args.out / f"{name}.json").write_text(
            json.dumps(payload, indent=1, sort_keys=True) + "\n"
        )
        print(f"wrote {name}.json")

    dump("meta", client.get("/api/meta").json())
    sid = client.post("/api/sessions").json()["id"]

    # Figure-3 configuration: objective values for the first two periods,
    # 3 assortments x 2 periods x 3 scenarios = 18 axes, 109 solutions.
    overview = client.get(
        f"/api/sessions/{sid}/overview",
        params={"periods": "1,2", "include_solutions": True},
    ).json()
    dump("overview_2periods", overview)

    criteria = client.put(
        f"/api/sessions/{sid}/criteria",
        json={"thresholds": [0.30, 0.20, 0.30], "mode": "fraction", "strict": True},
    ).json()
    dump("criteria_302030", criteria)

    filtered = client.post(
        f"/api/sessions/{sid}/filter",
        json={"clauses": [{"floor": 0.9, "periods": [1, 2, 3]}]},
    ).json()
    dump("filter_90_p123", filtered)

    ids = filtered["ids"][:3] or criteria and [e["id"] for e in criteria["scores"][:3]]
    details = [
        client.get(f"/api/sessions/{sid}/solutions/{i}").json() for i in ids
    ]
    dump("details_shortlist", details)


if __name__ == "__main__":
    main()
