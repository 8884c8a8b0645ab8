import numpy as np
import pytest

from harvestplan.milp import ReferenceConfig, SolveOptions
from harvestplan.model import DemandTable
from harvestplan.pareto import generate_archive, generate_weight_schedule
from harvestplan.robustness import (
    DomainCriteria,
    EmptyCohort,
    EvaluationMatrix,
    FingerprintMismatch,
    domain_criterion,
    filter_solutions,
    objective_ranges,
    objectives_for_periods,
    rank_solutions,
    stress_test,
)
from harvestplan.scenarios import ScenarioCohort, named_scenarios, sample_cohort, stress_cohort

from conftest import make_instance

EXACT = SolveOptions(rel_gap_tol=0.0)


def _setup(seed=0, n_s=6, n_t=2, n_a=2, cohort_size=8):
    rng = np.random.default_rng(seed)
    means = rng.uniform(5, 80, (n_a, n_s))
    sds = rng.uniform(0.05, 0.25, (n_a, n_s)) * means
    demand = np.tile(rng.uniform(30, 120, (n_a, 1)), (1, n_t))
    inst = make_instance(means, sds, demand)
    scenarios = list(named_scenarios(inst))[:2]
    k = n_a * n_t * 2
    archive = generate_archive(
        inst,
        scenarios,
        generate_weight_schedule(k),
        ReferenceConfig.neutral(inst, 2),
        options=EXACT,
    )
    cohort = stress_cohort(inst, cohort_size, seed=seed + 1)
    return inst, archive, cohort


def _matrix_fixture(values, n=None):
    values = np.asarray(values, dtype=float)
    n_sol, n_scen = values.shape[:2]
    return EvaluationMatrix(
        values=values,
        solution_ids=tuple(range(1, n_sol + 1)),
        scenario_ids=tuple(f"s{i}" for i in range(n_scen)),
        archive_fingerprint="a",
        cohort_fingerprint="c",
    )


class TestStressTest:
    def test_matrix_shape(self):
        inst, archive, cohort = _setup()
        matrix = stress_test(archive, cohort, inst)
        assert matrix.values.shape == (len(archive), len(cohort), 2, 2)

    def test_empty_cohort(self):
        inst, archive, _ = _setup()
        empty = ScenarioCohort((), seed=0)
        matrix = stress_test(archive, empty, inst)
        assert matrix.values.shape[1] == 0

    def test_nominal_slice_matches_archive(self):
        inst, archive, cohort = _setup()
        matrix = stress_test(archive, cohort, inst)
        p = cohort.ids.index("nominal")
        for i, entry in enumerate(archive.entries):
            stored = entry.objective_values[:, :, 1]  # scenario order: worst, nominal
            assert np.allclose(matrix.values[i, p], stored, atol=1e-9)

    def test_fingerprint_mismatch(self):
        inst, archive, cohort = _setup()
        other = make_instance(np.ones((2, 6)), demand=np.ones((2, 2)))
        with pytest.raises(FingerprintMismatch):
            stress_test(archive, cohort, other)

    def test_bit_identical_recomputation(self):
        inst, archive, cohort = _setup()
        a = stress_test(archive, cohort, inst)
        b = stress_test(archive, cohort, inst)
        assert np.array_equal(a.values, b.values)

    def test_values_reproduce_evaluate_schedule(self):
        from harvestplan.model import evaluate_schedule

        inst, archive, cohort = _setup(cohort_size=5)
        matrix = stress_test(archive, cohort, inst)
        for i, entry in enumerate(archive.entries):
            for p, sc in enumerate(cohort.scenarios):
                direct = evaluate_schedule(entry.schedule, sc.volumes, inst)
                assert np.allclose(matrix.values[i, p], direct, atol=1e-9)


class TestDomainCriterion:
    def test_toy_quarter_threshold(self):
        # deviations 1,2,3,4 against demand 10 at 25%: only 1 and 2 are < 2.5
        values = np.array([1.0, 2.0, 3.0, 4.0]).reshape(1, 4, 1, 1)
        matrix = _matrix_fixture(values)
        criteria = DomainCriteria(np.array([[0.25]]))
        scores = domain_criterion(matrix, criteria, DemandTable(np.array([[10.0]])))
        assert scores.values[0, 0, 0] == 0.5

    def test_all_scenarios_met_gives_one(self):
        matrix = _matrix_fixture(np.zeros((1, 4, 1, 1)))
        scores = domain_criterion(
            matrix, DomainCriteria(np.array([[0.3]])), DemandTable(np.array([[10.0]]))
        )
        assert scores.values[0, 0, 0] == 1.0

    def test_zero_threshold_strict_gives_zero(self):
        matrix = _matrix_fixture(np.zeros((1, 4, 1, 1)))
        scores = domain_criterion(
            matrix, DomainCriteria(np.array([[0.0]])), DemandTable(np.array([[10.0]]))
        )
        assert scores.values[0, 0, 0] == 0.0

    def test_inclusive_mode(self):
        matrix = _matrix_fixture(np.full((1, 4, 1, 1), 3.0))
        criteria = DomainCriteria(np.array([[3.0]]), mode="absolute", strict=False)
        scores = domain_criterion(matrix, criteria, DemandTable(np.array([[10.0]])))
        assert scores.values[0, 0, 0] == 1.0

    def test_empty_cohort_rejected(self):
        matrix = _matrix_fixture(np.zeros((1, 0, 1, 1)))
        with pytest.raises(EmptyCohort):
            domain_criterion(
                matrix, DomainCriteria(np.array([[0.3]])), DemandTable(np.array([[10.0]]))
            )

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            DomainCriteria(np.array([[-0.1]]))

    def test_scores_are_multiples_of_one_over_n(self):
        rng = np.random.default_rng(3)
        values = rng.uniform(0, 20, (5, 7, 2, 3))
        matrix = _matrix_fixture(values)
        criteria = DomainCriteria(rng.uniform(0, 0.5, (2, 3)))
        demand = DemandTable(rng.uniform(5, 30, (2, 3)))
        scores = domain_criterion(matrix, criteria, demand)
        assert np.allclose((scores.values * 7) % 1.0, 0.0, atol=1e-12)

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(4)
        values = rng.uniform(0, 20, (4, 9, 2, 2))
        matrix = _matrix_fixture(values)
        demand = DemandTable(rng.uniform(5, 30, (2, 2)))
        t1 = rng.uniform(0, 0.5, (2, 2))
        t2 = t1 + rng.uniform(0, 0.5, (2, 2))
        s1 = domain_criterion(matrix, DomainCriteria(t1), demand)
        s2 = domain_criterion(matrix, DomainCriteria(t2), demand)
        assert (s2.values >= s1.values).all()

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        values = rng.uniform(0, 20, (3, 11, 1, 2))
        demand = DemandTable(rng.uniform(5, 30, (1, 2)))
        criteria = DomainCriteria(rng.uniform(0, 0.6, (1, 2)))
        s1 = domain_criterion(_matrix_fixture(values), criteria, demand)
        perm = rng.permutation(11)
        s2 = domain_criterion(_matrix_fixture(values[:, perm]), criteria, demand)
        assert np.array_equal(s1.values, s2.values)


class TestFilterRank:
    def _scores(self):
        values = np.array(
            [
                [[1.0, 0.9], [0.96, 0.5]],
                [[0.95, 0.95], [0.95, 0.2]],
                [[0.5, 1.0], [1.0, 1.0]],
            ]
        )  # (3 solutions, 2 assortments, 2 periods)
        from harvestplan.robustness import RobustnessScore

        return RobustnessScore(values, (1, 2, 3), n_scenarios=100)

    def test_floor_zero_keeps_all(self):
        scores = self._scores()
        assert filter_solutions(scores, 0.0, [(1, 1), (2, 1)]) == [1, 2, 3]

    def test_floor_filters(self):
        scores = self._scores()
        assert filter_solutions(scores, 0.95, [(1, 1), (2, 1)]) == [1, 2]
        assert filter_solutions(scores, 0.96, [(1, 1), (2, 1)]) == [1]

    def test_perfect_floor_excludes_any_violation(self):
        scores = self._scores()
        assert filter_solutions(scores, 1.0, [(1, 1), (2, 1)]) == []

    def test_nested_filtrations(self):
        rng = np.random.default_rng(6)
        from harvestplan.robustness import RobustnessScore

        values = rng.uniform(0, 1, (10, 2, 3))
        scores = RobustnessScore(values, tuple(range(1, 11)), 50)
        subset = [(1, 1), (2, 2), (1, 3)]
        f1, f2 = sorted(rng.uniform(0, 1, 2))
        assert set(filter_solutions(scores, f2, subset)) <= set(
            filter_solutions(scores, f1, subset)
        )

    def test_rank_single(self):
        scores = self._scores()
        assert rank_solutions(scores, [(1, 1)])[0][0] == 1

    def test_rank_min_aggregation_and_ties(self):
        scores = self._scores()
        ranked = rank_solutions(scores, [(1, 1), (1, 2), (2, 1)], "min")
        assert [sid for sid, _ in ranked] == [2, 1, 3]
        # mean aggregation reorders
        ranked_mean = rank_solutions(scores, [(1, 1), (1, 2), (2, 1)], "mean")
        assert ranked_mean[0][1] >= ranked_mean[-1][1]

    def test_rank_higher_min_first(self):
        from harvestplan.robustness import RobustnessScore

        values = np.array([[[0.93]], [[0.95]]])
        scores = RobustnessScore(values, (1, 2), 200)
        ranked = rank_solutions(scores, [(1, 1)])
        assert ranked[0] == (2, 0.95)

    def test_empty_subset_rejected(self):
        scores = self._scores()
        with pytest.raises(ValueError):
            filter_solutions(scores, 0.5, [])


class TestObjectiveRanges:
    def test_constant_matrix(self):
        matrix = _matrix_fixture(np.full((2, 3, 1, 1), 7.0))
        ranges = objective_ranges(matrix)
        assert ranges[(1, 1)]["min"] == ranges[(1, 1)]["max"] == 7.0

    def test_nonnegative_and_exact_recompute(self):
        rng = np.random.default_rng(7)
        values = np.abs(rng.normal(0, 5, (4, 6, 2, 2)))
        matrix = _matrix_fixture(values)
        ranges = objective_ranges(matrix)
        for (a, t), stats in ranges.items():
            flat = values[:, :, a - 1, t - 1].reshape(-1)
            assert stats["min"] == flat.min() >= 0
            assert stats["max"] == flat.max()
            assert stats["mean"] == pytest.approx(flat.mean())
            assert stats["percentiles"]["p50"] == pytest.approx(
                np.percentile(flat, 50)
            )

    def test_period_subset_helper(self):
        inst = make_instance(np.ones((3, 2)), n_periods=12)
        subset = objectives_for_periods(inst, [1, 2, 3])
        assert len(subset) == 9
        assert (1, 1) in subset and (3, 3) in subset
