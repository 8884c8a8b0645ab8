import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harvestplan.model import (
    Assortment,
    DemandTable,
    DimensionMismatch,
    HarvestSchedule,
    InstanceValidationError,
    MetaObjectiveKey,
    ProblemInstance,
    StandRecord,
    collect_violations,
    evaluate_schedule,
    stand_count_summary,
    validate_instance,
)

from conftest import make_instance


def _raw_instance(n_s=2, n_t=2, n_a=1, sd=0.0, demand_shape=None):
    assortments = tuple(Assortment(a + 1, f"a{a + 1}") for a in range(n_a))
    stands = tuple(
        StandRecord(j + 1, 1.0, np.full(n_a, 10.0), np.full(n_a, sd))
        for j in range(n_s)
    )
    shape = demand_shape or (n_a, n_t)
    return ProblemInstance(stands, assortments, n_t, DemandTable(np.ones(shape)))


class TestValidation:
    def test_well_formed_instance_accepted(self):
        inst = _raw_instance(n_s=250, n_t=12, n_a=3)
        assert validate_instance(inst) is inst

    def test_negative_sd_reported_with_coordinates(self):
        stands = (
            StandRecord(1, 1.0, np.array([5.0]), np.array([1.0])),
            StandRecord(2, 1.0, np.array([5.0]), np.array([-1.0])),
        )
        inst = ProblemInstance(
            stands, (Assortment(1, "pine"),), 2, DemandTable(np.ones((1, 2)))
        )
        with pytest.raises(InstanceValidationError) as err:
            validate_instance(inst)
        (violation,) = err.value.violations
        assert violation.code == "NegativeVolumeStat"
        assert violation.where == {"stand": 2, "assortment": 1}

    def test_demand_shape_mismatch(self):
        inst = _raw_instance(n_t=12, demand_shape=(1, 11))
        codes = {v.code for v in collect_violations(inst)}
        assert codes == {"DimensionMismatch"}

    def test_empty_instance(self):
        inst = ProblemInstance((), (Assortment(1, "pine"),), 1, DemandTable(np.ones((1, 1))))
        codes = [v.code for v in collect_violations(inst)]
        assert "EmptyInstance" in codes

    def test_all_violations_collected(self):
        stands = (
            StandRecord(1, -2.0, np.array([5.0]), np.array([-1.0])),
            StandRecord(3, 1.0, np.array([-5.0]), np.array([1.0])),
        )
        inst = ProblemInstance(
            stands, (Assortment(1, "pine"),), 2, DemandTable(np.ones((1, 3)))
        )
        violations = collect_violations(inst)
        assert len(violations) >= 4  # area, sd, id gap, mean, demand shape


class TestEvaluate:
    def test_all_unharvested_gives_demand(self):
        inst = make_instance(np.array([[10.0, 20.0]]), demand=np.array([[583.0]]))
        dev = evaluate_schedule(
            HarvestSchedule.unharvested(2), inst.volume_stats()[0], inst
        )
        assert dev[0, 0] == 583.0

    def test_exact_partition_gives_zero(self, tiny_instance):
        sched = HarvestSchedule.from_pairs(3, [(3, 1), (1, 2), (2, 2)])
        dev = evaluate_schedule(sched, tiny_instance.volume_stats()[0], tiny_instance)
        assert np.allclose(dev, 0.0, atol=1e-9)

    def test_overshoot(self):
        inst = make_instance(np.array([[10.0, 20.0]]), demand=np.array([[25.0]]))
        sched = HarvestSchedule.from_pairs(2, [(1, 1), (2, 1)])
        dev = evaluate_schedule(sched, inst.volume_stats()[0], inst)
        assert dev[0, 0] == pytest.approx(5.0, abs=1e-9)

    def test_dimension_mismatch(self, tiny_instance):
        with pytest.raises(DimensionMismatch):
            evaluate_schedule(
                HarvestSchedule.unharvested(4),
                tiny_instance.volume_stats()[0],
                tiny_instance,
            )
        with pytest.raises(DimensionMismatch):
            evaluate_schedule(
                HarvestSchedule.unharvested(3), np.zeros((1, 4)), tiny_instance
            )

    def test_period_out_of_range(self, tiny_instance):
        sched = HarvestSchedule(np.array([3, 0, 0]))
        with pytest.raises(DimensionMismatch):
            evaluate_schedule(sched, tiny_instance.volume_stats()[0], tiny_instance)

    @given(st.integers(0, 1_000_000))
    @settings(max_examples=50, deadline=None)
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        n_s = int(rng.integers(2, 9))
        means = rng.uniform(0, 50, size=(2, n_s))
        inst = make_instance(means, demand=rng.uniform(0, 100, (2, 2)))
        assign = rng.integers(0, 3, n_s)
        dev = evaluate_schedule(HarvestSchedule(assign), means, inst)
        perm = rng.permutation(n_s)
        inst_p = make_instance(means[:, perm], demand=inst.demand.values)
        dev_p = evaluate_schedule(HarvestSchedule(assign[perm]), means[:, perm], inst_p)
        assert np.allclose(dev, dev_p, atol=1e-9)
        assert (dev >= 0).all()

    def test_unharvested_stand_changes_nothing(self, tiny_instance):
        means = tiny_instance.volume_stats()[0]
        sched = HarvestSchedule.from_pairs(3, [(1, 1)])
        dev = evaluate_schedule(sched, means, tiny_instance)
        grown = make_instance(
            np.concatenate([means, [[99.0]]], axis=1), demand=tiny_instance.demand.values
        )
        sched2 = HarvestSchedule.from_pairs(4, [(1, 1)])
        dev2 = evaluate_schedule(sched2, grown.volume_stats()[0], grown)
        assert np.array_equal(dev, dev2)

    def test_determinism(self, tiny_instance):
        means = tiny_instance.volume_stats()[0]
        sched = HarvestSchedule.from_pairs(3, [(1, 1), (2, 2)])
        a = evaluate_schedule(sched, means, tiny_instance)
        b = evaluate_schedule(sched, means.copy(), tiny_instance)
        assert np.array_equal(a, b)


class TestStandCounts:
    def test_all_unharvested(self, tiny_instance):
        counts = stand_count_summary(HarvestSchedule.unharvested(3), tiny_instance)
        assert counts.tolist() == [0, 0]

    def test_single_period(self):
        inst = make_instance(np.ones((1, 3)), n_periods=3)
        counts = stand_count_summary(HarvestSchedule(np.array([2, 2, 2])), inst)
        assert counts.tolist() == [0, 3, 0]

    def test_sum_bounded_by_stand_count(self, tiny_instance):
        counts = stand_count_summary(
            HarvestSchedule(np.array([1, 0, 2])), tiny_instance
        )
        assert counts.sum() <= tiny_instance.n_stands


class TestMetaObjectiveKey:
    def test_bijection(self):
        n_t, s = 12, 3
        seen = set()
        for i in range(3 * n_t * s):
            key = MetaObjectiveKey.from_index(i, n_t, s)
            assert key.to_index(n_t, s) == i
            seen.add((key.assortment, key.period, key.scenario))
        assert len(seen) == 3 * n_t * s

    def test_canonical_order_is_assortment_major(self):
        # (a-1)*n_T*s + (t-1)*s + (p-1)
        key = MetaObjectiveKey(assortment=2, period=3, scenario=1)
        assert key.to_index(n_periods=12, n_scenarios=3) == 1 * 36 + 2 * 3 + 0


class TestScheduleType:
    def test_at_most_one_period_by_construction(self):
        sched = HarvestSchedule(np.array([0, 2, 1]))
        ind = sched.indicator(2)
        assert (ind.sum(axis=1) <= 1).all()

    def test_negative_assignment_rejected(self):
        with pytest.raises(ValueError):
            HarvestSchedule(np.array([-1, 0]))

    def test_immutable(self, tiny_instance):
        sched = HarvestSchedule(np.array([0, 1, 2]))
        with pytest.raises(ValueError):
            sched.assignment[0] = 1
        with pytest.raises(ValueError):
            tiny_instance.demand.values[0, 0] = 1.0
