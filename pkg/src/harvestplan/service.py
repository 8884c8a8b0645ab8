"""HTTP facade over :class:`~harvestplan.session.SessionManager`.

Serves precomputed artifacts only; no endpoint ever launches a solve.  All
payloads are JSON.  Endpoints (also documented in the README):

* ``POST /api/sessions``                      create a session
* ``GET  /api/sessions``                      list sessions
* ``GET  /api/sessions/{sid}``               session state
* ``GET  /api/sessions/{sid}/overview``      ranges (+ per-solution values)
* ``PUT  /api/sessions/{sid}/criteria``      set domain criteria
* ``POST /api/sessions/{sid}/filter``        apply robustness floors
* ``GET  /api/sessions/{sid}/solutions/{id}`` solution detail
* ``POST /api/sessions/{sid}/shortlist``     keep solutions for comparison
* ``POST /api/sessions/{sid}/finalize``      record the final choice
* ``GET  /api/sessions/{sid}/report``        decision report

Reads are idempotent; the journal-appending mutations are PUT/POST.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .artifacts import ArtifactBundle, load_bundle
from .session import (
    CriteriaNotSet,
    FilterClause,
    InvalidThreshold,
    NotShortlisted,
    SessionClosed,
    SessionManager,
    UnknownSession,
    UnknownSolution,
)


class CriteriaPayload(BaseModel):
    """Thresholds per assortment (broadcast over periods) or a full grid."""

    thresholds: list[float] | list[list[float]]
    mode: str = "fraction"
    strict: bool = True


class FilterClausePayload(BaseModel):
    floor: float = Field(ge=0.0, le=1.0)
    periods: list[int] | None = None
    objectives: list[list[int]] | None = None


class FilterPayload(BaseModel):
    clauses: list[FilterClausePayload]


class ShortlistPayload(BaseModel):
    ids: list[int]


class FinalizePayload(BaseModel):
    id: int


def _session_json(state) -> dict:
    return {
        "id": state.id,
        "criteria_set": state.criteria is not None,
        "current_ids": state.current_ids,
        "shortlist": state.shortlist,
        "final_choice": state.final_choice,
        "closed": state.closed,
        "journal_length": len(state.journal),
    }


def create_app(
    bundle: ArtifactBundle | str | Path, ui_dir: str | Path | None = None
) -> FastAPI:
    if not isinstance(bundle, ArtifactBundle):
        bundle = load_bundle(Path(bundle))
    manager = SessionManager(bundle)
    app = FastAPI(title="harvestplan decision service", version="0.1.0")
    app.state.manager = manager

    def _translate(exc: Exception) -> HTTPException:
        if isinstance(exc, (UnknownSession, UnknownSolution)):
            return HTTPException(status_code=404, detail=str(exc))
        if isinstance(exc, (CriteriaNotSet, InvalidThreshold, ValueError)) and not isinstance(
            exc, (NotShortlisted, SessionClosed)
        ):
            return HTTPException(status_code=400, detail=str(exc))
        if isinstance(exc, (NotShortlisted, SessionClosed)):
            return HTTPException(status_code=409, detail=str(exc))
        raise exc

    @app.get("/api/meta")
    def meta():
        inst = bundle.instance
        return {
            "assortments": [a.name for a in inst.assortments],
            "n_periods": inst.n_periods,
            "n_stands": inst.n_stands,
            "archive_size": len(bundle.archive),
            "cohort_size": len(bundle.cohort),
            "demand_m3": inst.demand.values.tolist(),
            "scenario_ids": list(bundle.archive.scenario_ids),
            "instance_fingerprint": bundle.instance_fingerprint,
        }

    @app.post("/api/sessions", status_code=201)
    def create_session():
        state = manager.create_session()
        return _session_json(state)

    @app.get("/api/sessions")
    def list_sessions():
        return [_session_json(s) for s in manager.list_sessions()]

    @app.get("/api/sessions/{sid}")
    def get_session(sid: str):
        try:
            return _session_json(manager.get(sid))
        except Exception as exc:
            raise _translate(exc)

    @app.get("/api/sessions/{sid}/overview")
    def overview(
        sid: str,
        periods: str = Query(default=""),
        include_solutions: bool = Query(default=False),
    ):
        try:
            parsed = _parse_periods(periods, bundle.instance.n_periods)
            return manager.overview(sid, parsed, include_solutions=include_solutions)
        except Exception as exc:
            raise _translate(exc)

    @app.put("/api/sessions/{sid}/criteria")
    def set_criteria(sid: str, payload: CriteriaPayload):
        try:
            scores = manager.set_criteria(
                sid, payload.thresholds, mode=payload.mode, strict=payload.strict
            )
        except Exception as exc:
            raise _translate(exc)
        return {
            "session": sid,
            "n_scenarios": scores.n_scenarios,
            "scores": [
                {"id": sol_id, "robustness": scores.values[i].tolist()}
                for i, sol_id in enumerate(scores.solution_ids)
            ],
        }

    @app.post("/api/sessions/{sid}/filter")
    def apply_filter(sid: str, payload: FilterPayload):
        try:
            clauses = [
                FilterClause.from_payload(
                    c.model_dump(exclude_none=True), bundle.instance.n_assortments
                )
                for c in payload.clauses
            ]
            ids = manager.apply_filter(sid, clauses)
            state = manager.get(sid)
        except Exception as exc:
            raise _translate(exc)
        return {
            "session": sid,
            "ids": ids,
            "scores": [
                {
                    "id": sol_id,
                    "robustness": state.scores.for_solution(sol_id).tolist(),
                }
                for sol_id in ids
            ],
        }

    @app.get("/api/sessions/{sid}/solutions/{solution_id}")
    def solution_detail(sid: str, solution_id: int):
        try:
            return manager.inspect(sid, solution_id)
        except Exception as exc:
            raise _translate(exc)

    @app.post("/api/sessions/{sid}/shortlist")
    def shortlist(sid: str, payload: ShortlistPayload):
        try:
            ids = manager.shortlist(sid, payload.ids)
        except Exception as exc:
            raise _translate(exc)
        return {"session": sid, "ids": ids}

    @app.post("/api/sessions/{sid}/finalize")
    def finalize(sid: str, payload: FinalizePayload):
        try:
            return manager.finalize(sid, payload.id)
        except Exception as exc:
            raise _translate(exc)

    @app.get("/api/sessions/{sid}/report")
    def report(sid: str):
        try:
            return manager.report(sid)
        except Exception as exc:
            raise _translate(exc)

    if ui_dir is not None and Path(ui_dir).exists():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _parse_periods(raw: str, n_periods: int) -> list[int] | None:
    raw = raw.strip()
    if not raw:
        return None
    if raw == "all":
        return list(range(1, n_periods + 1))
    out = []
    for token in raw.split(","):
        t = int(token)
        if not (1 <= t <= n_periods):
            raise ValueError(f"period {t} outside 1..{n_periods}")
        out.append(t)
    return out
