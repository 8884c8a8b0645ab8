import numpy as np
import pytest

from harvestplan.milp import SolveOptions
from harvestplan.pipeline import PipelineConfig, run_pipeline
from harvestplan.session import (
    CriteriaNotSet,
    FilterClause,
    InvalidThreshold,
    NotShortlisted,
    ReplayMismatch,
    SessionClosed,
    SessionManager,
    UnknownSession,
    UnknownSolution,
    read_journal,
    replay_journal,
)


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    config = PipelineConfig(
        out_dir=out,
        synth_seed=21,
        n_stands=10,
        n_periods=3,
        cohort_size=40,
        scenario_seed=4,
        archive_options=SolveOptions(rel_gap_tol=0.0),
        ideal_options=SolveOptions(rel_gap_tol=0.0),
        ideals_over="named",
    )
    return run_pipeline(config, log=lambda *_: None)


@pytest.fixture
def manager(bundle):
    return SessionManager(bundle, persist=False)


def _first_periods(manager):
    return manager.default_periods()


class TestLifecycle:
    def test_fresh_session_empty_journal(self, manager):
        state = manager.create_session()
        assert state.journal == []
        assert state.criteria is None
        assert not state.closed

    def test_distinct_ids(self, manager):
        a, b = manager.create_session(), manager.create_session()
        assert a.id != b.id

    def test_unknown_session(self, manager):
        with pytest.raises(UnknownSession):
            manager.overview("ghost")


class TestOverview:
    def test_default_first_three_periods(self, manager):
        state = manager.create_session()
        view = manager.overview(state.id)
        assert view["periods"] == [1, 2, 3]
        assert len(view["objective_ranges"]) == 9  # 3 assortments x 3 periods
        assert view["archive_size"] == len(manager.bundle.archive)

    def test_all_periods(self, manager):
        state = manager.create_session()
        n_t = manager.bundle.instance.n_periods
        view = manager.overview(state.id, periods=range(1, n_t + 1))
        assert len(view["objective_ranges"]) == 3 * n_t

    def test_include_solutions(self, manager):
        state = manager.create_session()
        view = manager.overview(state.id, periods=[1, 2], include_solutions=True)
        assert len(view["solutions"]) == len(manager.bundle.archive)
        one = view["solutions"][0]
        s = len(manager.bundle.archive.scenario_ids)
        assert len(one["values"]) == 3 * 2 * s

    def test_reads_do_not_journal(self, manager):
        state = manager.create_session()
        manager.overview(state.id)
        assert state.journal == []


class TestCriteriaAndFilter:
    def test_set_criteria_scores_all_solutions(self, manager):
        state = manager.create_session()
        scores = manager.set_criteria(state.id, [0.3, 0.2, 0.3])
        assert scores.values.shape[0] == len(manager.bundle.archive)
        assert state.journal[-1]["action"] == "set-criteria"

    def test_zero_thresholds_strict_all_zero(self, manager):
        state = manager.create_session()
        scores = manager.set_criteria(state.id, [0.0, 0.0, 0.0])
        assert (scores.values == 0).all()

    def test_negative_threshold_rejected(self, manager):
        state = manager.create_session()
        with pytest.raises(InvalidThreshold):
            manager.set_criteria(state.id, [-0.1, 0.2, 0.2])

    def test_cache_hit_on_identical_criteria(self, manager):
        state = manager.create_session()
        a = manager.set_criteria(state.id, [0.25, 0.25, 0.25])
        before = manager.cache_hits
        b = manager.set_criteria(state.id, [0.25, 0.25, 0.25])
        assert manager.cache_hits == before + 1
        assert np.array_equal(a.values, b.values)

    def test_filter_requires_criteria(self, manager):
        state = manager.create_session()
        with pytest.raises(CriteriaNotSet):
            manager.apply_filter(
                state.id, [FilterClause(0.5, [(1, 1)])]
            )

    def test_filter_floor_zero_keeps_all(self, manager):
        state = manager.create_session()
        manager.set_criteria(state.id, [0.3, 0.3, 0.3])
        ids = manager.apply_filter(
            state.id,
            [FilterClause(0.0, [(1, 1), (2, 1), (3, 1)])],
        )
        assert ids == manager.bundle.archive.ids()

    def test_multi_clause_intersection(self, manager):
        state = manager.create_session()
        manager.set_criteria(state.id, [0.35, 0.35, 0.35])
        periods = _first_periods(manager)
        objectives = [(a, t) for a in (1, 2, 3) for t in periods]
        wide = manager.apply_filter(state.id, [FilterClause(0.2, objectives)])
        narrow = manager.apply_filter(
            state.id,
            [FilterClause(0.2, objectives), FilterClause(0.6, [(2, 1)])],
        )
        assert set(narrow) <= set(wide)

    def test_rank_respects_current_filter(self, manager):
        state = manager.create_session()
        manager.set_criteria(state.id, [0.4, 0.4, 0.4])
        kept = manager.apply_filter(state.id, [FilterClause(0.3, [(1, 1)])])
        ranked = manager.rank(state.id)
        assert [sid for sid, _ in ranked] and set(s for s, _ in ranked) <= set(kept)
        values = [v for _, v in ranked]
        assert values == sorted(values, reverse=True)


class TestInspectAndFinalize:
    def test_inspect_full_detail(self, manager):
        state = manager.create_session()
        manager.set_criteria(state.id, [0.3, 0.3, 0.3])
        detail = manager.inspect(state.id, 1)
        inst = manager.bundle.instance
        assert len(detail["stand_counts"]) == inst.n_periods
        assert sum(detail["stand_counts"]) <= inst.n_stands
        assert np.asarray(detail["robustness"]).shape == (
            inst.n_assortments,
            inst.n_periods,
        )

    def test_inspect_unknown_solution(self, manager):
        state = manager.create_session()
        with pytest.raises(UnknownSolution):
            manager.inspect(state.id, 9999)

    def test_finalize_requires_shortlist(self, manager):
        state = manager.create_session()
        manager.set_criteria(state.id, [0.3, 0.3, 0.3])
        with pytest.raises(NotShortlisted):
            manager.finalize(state.id, 1)

    def test_finalize_flow_and_close(self, manager):
        state = manager.create_session()
        manager.set_criteria(state.id, [0.3, 0.3, 0.3])
        manager.shortlist(state.id, [1, 2])
        report = manager.finalize(state.id, 2)
        assert report["final_choice"] == 2
        assert state.closed
        with pytest.raises(SessionClosed):
            manager.finalize(state.id, 1)
        with pytest.raises(SessionClosed):
            manager.set_criteria(state.id, [0.3, 0.3, 0.3])

    def test_shortlist_rejects_unknown(self, manager):
        state = manager.create_session()
        with pytest.raises(UnknownSolution):
            manager.shortlist(state.id, [1, 555])


class TestJournalAndReplay:
    def _drive(self, manager):
        state = manager.create_session()
        manager.set_criteria(state.id, [0.35, 0.25, 0.35])
        periods = _first_periods(manager)
        objectives = [(a, t) for a in (1, 2, 3) for t in periods]
        ids = manager.apply_filter(state.id, [FilterClause(0.15, objectives)])
        if not ids:
            ids = manager.apply_filter(state.id, [FilterClause(0.0, objectives)])
        manager.shortlist(state.id, ids[:2])
        manager.inspect(state.id, ids[0])
        manager.finalize(state.id, ids[0])
        return state

    def test_replay_reproduces(self, manager):
        state = self._drive(manager)
        replayed = replay_journal(manager.bundle, state.journal)
        assert replayed.final_choice == state.final_choice
        assert replayed.shortlist == state.shortlist

    def test_replay_detects_tampering(self, manager):
        state = self._drive(manager)
        records = [dict(r) for r in state.journal]
        for r in records:
            if r["action"] == "filter":
                r["result"] = {"ids": [999]}
        with pytest.raises(ReplayMismatch):
            replay_journal(manager.bundle, records)

    def test_journal_persisted_jsonl(self, bundle):
        manager = SessionManager(bundle, persist=True)
        state = self._drive(manager)
        path = bundle.directory / "sessions" / f"{state.id}.jsonl"
        assert path.exists()
        records = read_journal(path)
        assert [r["action"] for r in records] == [r["action"] for r in state.journal]
        replayed = replay_journal(bundle, records)
        assert replayed.final_choice == state.final_choice
        report_path = bundle.directory / "sessions" / f"{state.id}.report.json"
        assert report_path.exists()
