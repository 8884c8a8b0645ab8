"""Drive the decision-support service through a full planner session.

Runs the pipeline into a temporary bundle, spins the HTTP app up in-process,
and walks the interactive loop: overview, criteria, filtering, inspection,
shortlist, final choice, decision report.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from harvestplan.milp import SolveOptions
from harvestplan.pipeline import PipelineConfig, run_pipeline
from harvestplan.service import create_app

workdir = Path(tempfile.mkdtemp(prefix="harvestplan-demo-"))
print(f"building bundle under {workdir} ...")
bundle = run_pipeline(
    PipelineConfig(
        out_dir=workdir,
        synth_seed=2,
        n_stands=12,
        n_periods=3,
        cohort_size=80,
        scenario_seed=4,
        archive_options=SolveOptions(rel_gap_tol=0.0),
        ideal_options=SolveOptions(rel_gap_tol=0.0),
        ideals_over="named",
    )
)

client = TestClient(create_app(bundle))

meta = client.get("/api/meta").json()
print(f"bundle: {meta['archive_size']} solutions, {meta['cohort_size']} scenarios")

session = client.post("/api/sessions").json()["id"]
overview = client.get(f"/api/sessions/{session}/overview").json()
worst_range = max(overview["objective_ranges"], key=lambda r: r["max"])
print(
    f"widest outcome range: {meta['assortments'][worst_range['assortment'] - 1]} "
    f"period {worst_range['period']}: {worst_range['min']:.1f}..{worst_range['max']:.1f} m3"
)

print("\nsetting criteria: deviations below 30/20/30% of demand")
client.put(f"/api/sessions/{session}/criteria", json={"thresholds": [0.30, 0.20, 0.30]})

for floor in (0.95, 0.90, 0.75, 0.5, 0.0):
    survivors = client.post(
        f"/api/sessions/{session}/filter",
        json={"clauses": [{"floor": floor, "periods": [1, 2, 3]}]},
    ).json()["ids"]
    print(f"floor {floor:.0%}: {len(survivors)} candidates")
    if survivors:
        break

shortlist = survivors[:2]
client.post(f"/api/sessions/{session}/shortlist", json={"ids": shortlist})
for sid in shortlist:
    detail = client.get(f"/api/sessions/{session}/solutions/{sid}").json()
    print(f"solution {sid}: stand counts {detail['stand_counts']} ({detail['label_text']})")

report = client.post(
    f"/api/sessions/{session}/finalize", json={"id": shortlist[0]}
).json()
print(f"\nfinal choice: solution {report['final_choice']}")
print(f"journal: {[r['action'] for r in report['journal']]}")
print(f"decision report persisted under {workdir / 'sessions'}")
