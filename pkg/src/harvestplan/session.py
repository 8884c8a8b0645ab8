"""Planner sessions over a precomputed artifact bundle.

A session walks the interactive decision loop: look at outcome ranges, set
acceptable-deviation criteria, filter and rank candidate schedules by
robustness, shortlist a few, inspect their assignments, and record the final
choice.  The service never launches solves: all heavy computation happened in
the pipeline, so every session action is a fast pure function over the loaded
artifacts.

Every mutating action is appended to a JSONL journal (one file per session
under ``<bundle>/sessions/``), which makes sessions crash-safe and exactly
replayable.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .artifacts import ArtifactBundle
from .fingerprints import fingerprint_array
from .model import stand_count_summary
from .pareto import describe_weight_label
from .robustness import (
    DomainCriteria,
    RobustnessScore,
    domain_criterion,
    filter_solutions,
    objective_ranges,
    objectives_for_periods,
    rank_solutions,
)


class UnknownSession(KeyError):
    pass


class UnknownSolution(KeyError):
    pass


class CriteriaNotSet(ValueError):
    pass


class NotShortlisted(ValueError):
    pass


class SessionClosed(ValueError):
    pass


class InvalidThreshold(ValueError):
    pass


class ReplayMismatch(AssertionError):
    """A journal replay produced different results than recorded."""


@dataclass
class FilterClause:
    """Keep solutions with robustness >= floor on every listed objective."""

    floor: float
    objectives: list[tuple[int, int]]

    @classmethod
    def from_payload(cls, payload: dict, n_assortments: int) -> "FilterClause":
        floor = float(payload["floor"])
        if "objectives" in payload:
            objectives = [(int(a), int(t)) for a, t in payload["objectives"]]
        elif "periods" in payload:
            objectives = [
                (a, int(t))
                for a in range(1, n_assortments + 1)
                for t in payload["periods"]
            ]
        else:
            raise ValueError("filter clause needs 'objectives' or 'periods'")
        return cls(floor, objectives)

    def payload(self) -> dict:
        return {"floor": self.floor, "objectives": [list(o) for o in self.objectives]}


@dataclass
class SessionState:
    id: str
    criteria: DomainCriteria | None = None
    scores: RobustnessScore | None = None
    current_ids: list[int] | None = None  # None until a filter ran
    last_filter: list[FilterClause] = field(default_factory=list)
    shortlist: list[int] = field(default_factory=list)
    journal: list[dict] = field(default_factory=list)
    final_choice: int | None = None

    @property
    def closed(self) -> bool:
        return self.final_choice is not None


class SessionManager:
    """All sessions over one immutable bundle; thread-safe per session."""

    def __init__(self, bundle: ArtifactBundle, persist: bool = True):
        self.bundle = bundle
        self.persist = persist
        self.sessions: dict[str, SessionState] = {}
        self._score_cache: dict[str, RobustnessScore] = {}
        self.cache_hits = 0
        self._lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        if persist:
            (bundle.directory / "sessions").mkdir(exist_ok=True)

    # -- lifecycle -----------------------------------------------------------

    def create_session(self, session_id: str | None = None) -> SessionState:
        with self._lock:
            sid = session_id or uuid.uuid4().hex[:12]
            if sid in self.sessions:
                raise ValueError(f"session id {sid} already exists")
            state = SessionState(id=sid)
            self.sessions[sid] = state
            self._session_locks[sid] = threading.Lock()
        return state

    def get(self, session_id: str) -> SessionState:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(session_id) from None

    def list_sessions(self) -> list[SessionState]:
        return list(self.sessions.values())

    def _journal_path(self, sid: str) -> Path:
        return self.bundle.directory / "sessions" / f"{sid}.jsonl"

    def _append(self, state: SessionState, action: str, params: dict, result: dict) -> None:
        record = {
            "seq": len(state.journal) + 1,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "action": action,
            "params": params,
            "result": result,
        }
        state.journal.append(record)
        if self.persist:
            with self._journal_path(state.id).open("a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    def _guard_open(self, state: SessionState) -> None:
        if state.closed:
            raise SessionClosed(f"session {state.id} was finalized")

    # -- reads ----------------------------------------------------------------

    def default_periods(self) -> list[int]:
        return list(range(1, min(3, self.bundle.instance.n_periods) + 1))

    def overview(
        self,
        session_id: str,
        periods: Sequence[int] | None = None,
        include_solutions: bool = False,
    ) -> dict:
        state = self.get(session_id)
        inst = self.bundle.instance
        periods = list(periods) if periods else self.default_periods()
        objectives = objectives_for_periods(inst, periods)
        ranges = objective_ranges(self.bundle.matrix, objectives)
        out = {
            "session": state.id,
            "periods": periods,
            "archive_size": len(self.bundle.archive),
            "cohort_size": len(self.bundle.cohort),
            "demand_m3": inst.demand.values.tolist(),
            "assortments": [a.name for a in inst.assortments],
            "objective_ranges": [
                {"assortment": a, "period": t, **stats}
                for (a, t), stats in ranges.items()
            ],
        }
        if include_solutions:
            # Per-solution deviations over the optimization scenarios, for the
            # parallel-coordinates objective view.
            s = len(self.bundle.archive.scenario_ids)
            out["solutions"] = [
                {
                    "id": e.id,
                    "label": e.label,
                    "label_text": describe_weight_label(e.label, inst, s),
                    "values": [
                        {
                            "assortment": a,
                            "period": t,
                            "scenario": p,
                            "deviation_m3": float(e.objective_values[a - 1, t - 1, p - 1]),
                        }
                        for a in range(1, inst.n_assortments + 1)
                        for t in periods
                        for p in range(1, s + 1)
                    ],
                }
                for e in self.bundle.archive.entries
            ]
        return out

    # -- mutations --------------------------------------------------------------

    def set_criteria(
        self,
        session_id: str,
        thresholds,
        mode: str = "fraction",
        strict: bool = True,
    ) -> RobustnessScore:
        state = self.get(session_id)
        with self._session_locks[state.id]:
            self._guard_open(state)
            inst = self.bundle.instance
            arr = np.asarray(thresholds, dtype=float)
            if arr.ndim == 1:
                if arr.size != inst.n_assortments:
                    raise InvalidThreshold(
                        f"need one threshold per assortment ({inst.n_assortments})"
                    )
                arr = np.tile(arr[:, None], (1, inst.n_periods))
            try:
                criteria = DomainCriteria(arr, mode=mode, strict=strict)
            except ValueError as exc:
                raise InvalidThreshold(str(exc)) from exc
            scores = self._scores_for(criteria)
            state.criteria = criteria
            state.scores = scores
            self._append(
                state,
                "set-criteria",
                {
                    "thresholds": criteria.thresholds.tolist(),
                    "mode": mode,
                    "strict": strict,
                },
                {"scores_fingerprint": fingerprint_array(scores.values, "scores")},
            )
            return scores

    def _scores_for(self, criteria: DomainCriteria) -> RobustnessScore:
        key = json.dumps(
            {
                "thresholds": criteria.thresholds.tolist(),
                "mode": criteria.mode,
                "strict": criteria.strict,
            },
            sort_keys=True,
        )
        cached = self._score_cache.get(key)
        if cached is not None:
            self.cache_hits += 1
            return cached
        scores = domain_criterion(
            self.bundle.matrix, criteria, self.bundle.instance.demand
        )
        self._score_cache[key] = scores
        return scores

    def apply_filter(self, session_id: str, clauses: list[FilterClause]) -> list[int]:
        state = self.get(session_id)
        with self._session_locks[state.id]:
            self._guard_open(state)
            if state.scores is None:
                raise CriteriaNotSet("set domain criteria before filtering")
            if not clauses:
                raise ValueError("at least one filter clause required")
            surviving = None
            for clause in clauses:
                ids = set(
                    filter_solutions(state.scores, clause.floor, clause.objectives)
                )
                surviving = ids if surviving is None else surviving & ids
            ordered = [
                sid for sid in self.bundle.archive.ids() if sid in surviving
            ]
            state.current_ids = ordered
            state.last_filter = list(clauses)
            self._append(
                state,
                "filter",
                {"clauses": [c.payload() for c in clauses]},
                {"ids": ordered},
            )
            return ordered

    def rank(
        self,
        session_id: str,
        objectives: Sequence[tuple[int, int]] | None = None,
        aggregation: str = "min",
    ) -> list[tuple[int, float]]:
        state = self.get(session_id)
        if state.scores is None:
            raise CriteriaNotSet("set domain criteria before ranking")
        objectives = objectives or objectives_for_periods(
            self.bundle.instance, self.default_periods()
        )
        ranked = rank_solutions(state.scores, objectives, aggregation)
        if state.current_ids is not None:
            keep = set(state.current_ids)
            ranked = [(sid, v) for sid, v in ranked if sid in keep]
        return ranked

    def shortlist(self, session_id: str, ids: Sequence[int]) -> list[int]:
        state = self.get(session_id)
        with self._session_locks[state.id]:
            self._guard_open(state)
            known = set(self.bundle.archive.ids())
            bad = [i for i in ids if i not in known]
            if bad:
                raise UnknownSolution(f"not in archive: {bad}")
            state.shortlist = list(dict.fromkeys(int(i) for i in ids))
            self._append(
                state, "shortlist", {"ids": state.shortlist}, {"ids": state.shortlist}
            )
            return state.shortlist

    def inspect(self, session_id: str, solution_id: int) -> dict:
        state = self.get(session_id)
        try:
            entry = self.bundle.archive.entry(int(solution_id))
        except KeyError:
            raise UnknownSolution(str(solution_id)) from None
        inst = self.bundle.instance
        counts = stand_count_summary(entry.schedule, inst)
        robustness = None
        if state.scores is not None:
            robustness = state.scores.for_solution(entry.id).tolist()
        detail = {
            "id": entry.id,
            "label": entry.label,
            "label_text": describe_weight_label(
                entry.label, inst, len(self.bundle.archive.scenario_ids)
            ),
            "status": entry.status,
            "objective": entry.objective,
            "duplicate_of": entry.duplicate_of,
            "assignment": entry.schedule.assignment.tolist(),
            "stand_counts": counts.tolist(),
            "robustness": robustness,
            "deviations_m3": entry.objective_values.tolist(),
        }
        with self._session_locks[state.id]:
            if not state.closed:
                self._append(
                    state,
                    "inspect-decisions",
                    {"id": entry.id},
                    {
                        "id": entry.id,
                        "stand_counts": counts.tolist(),
                    },
                )
        return detail

    def finalize(self, session_id: str, solution_id: int) -> dict:
        state = self.get(session_id)
        with self._session_locks[state.id]:
            self._guard_open(state)
            solution_id = int(solution_id)
            if solution_id not in state.shortlist:
                raise NotShortlisted(
                    f"solution {solution_id} is not on the shortlist {state.shortlist}"
                )
            state.final_choice = solution_id
            self._append(
                state, "finalize", {"id": solution_id}, {"id": solution_id}
            )
            report = self.report(session_id)
            if self.persist:
                path = self.bundle.directory / "sessions" / f"{state.id}.report.json"
                path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
            return report

    def report(self, session_id: str) -> dict:
        state = self.get(session_id)
        inst = self.bundle.instance
        report = {
            "session": state.id,
            "instance_fingerprint": self.bundle.instance_fingerprint,
            "archive_fingerprint": self.bundle.archive.fingerprint,
            "cohort_fingerprint": self.bundle.matrix.cohort_fingerprint,
            "journal": state.journal,
            "shortlist": state.shortlist,
            "final_choice": state.final_choice,
        }
        if state.final_choice is not None:
            entry = self.bundle.archive.entry(state.final_choice)
            report["final_schedule"] = entry.schedule.assignment.tolist()
            report["final_stand_counts"] = stand_count_summary(
                entry.schedule, inst
            ).tolist()
        return report


# ---------------------------------------------------------------------------
# Replay


def replay_journal(bundle: ArtifactBundle, records: list[dict]) -> SessionState:
    """Re-execute a journal against a bundle; raises on any divergence."""
    manager = SessionManager(bundle, persist=False)
    state = manager.create_session()
    for record in records:
        action, params = record["action"], record["params"]
        if action == "set-criteria":
            scores = manager.set_criteria(
                state.id,
                np.asarray(params["thresholds"]),
                mode=params["mode"],
                strict=params["strict"],
            )
            got = fingerprint_array(scores.values, "scores")
            if got != record["result"]["scores_fingerprint"]:
                raise ReplayMismatch(f"criteria step {record['seq']}: scores differ")
        elif action == "filter":
            clauses = [
                FilterClause(
                    float(c["floor"]), [tuple(o) for o in c["objectives"]]
                )
                for c in params["clauses"]
            ]
            ids = manager.apply_filter(state.id, clauses)
            if ids != record["result"]["ids"]:
                raise ReplayMismatch(
                    f"filter step {record['seq']}: {ids} != {record['result']['ids']}"
                )
        elif action == "shortlist":
            ids = manager.shortlist(state.id, params["ids"])
            if ids != record["result"]["ids"]:
                raise ReplayMismatch(f"shortlist step {record['seq']} diverged")
        elif action == "inspect-decisions":
            detail = manager.inspect(state.id, params["id"])
            if detail["stand_counts"] != record["result"]["stand_counts"]:
                raise ReplayMismatch(f"inspect step {record['seq']} diverged")
        elif action == "finalize":
            manager.finalize(state.id, params["id"])
            if state.final_choice != record["result"]["id"]:
                raise ReplayMismatch(f"finalize step {record['seq']} diverged")
        else:  # pragma: no cover - future-proofing
            raise ReplayMismatch(f"unknown action {action!r}")
    return state


def read_journal(path: Path) -> list[dict]:
    records = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
