import numpy as np
import pytest

from harvestplan import artifacts
from harvestplan.fingerprints import fingerprint_cohort, fingerprint_instance
from harvestplan.milp import ReferenceConfig, SolveOptions
from harvestplan.pareto import (
    compute_ideals,
    estimate_nadir,
    generate_archive,
    generate_weight_schedule,
)
from harvestplan.pipeline import PipelineConfig, StageError, run_pipeline
from harvestplan.robustness import stress_test
from harvestplan.scenarios import named_scenarios, stress_cohort
from harvestplan.synth import synthesize_instance

from conftest import make_instance

EXACT = SolveOptions(rel_gap_tol=0.0)


@pytest.fixture
def small_instance():
    rng = np.random.default_rng(17)
    means = rng.uniform(5, 90, (2, 6))
    sds = rng.uniform(0.05, 0.2, (2, 6)) * means
    demand = np.tile(rng.uniform(20, 80, (2, 1)), (1, 2))
    return make_instance(means, sds, demand, names=["pine", "spruce"])


class TestSynth:
    def test_case_study_shape(self):
        inst = synthesize_instance(seed=7)
        assert inst.n_stands == 250
        assert inst.n_periods == 12
        assert [a.name for a in inst.assortments] == ["pine", "spruce", "deciduous"]
        areas = np.array([s.area_ha for s in inst.stands])
        assert areas.min() >= 0.47 and areas.max() <= 7.66
        assert abs(areas.mean() - 1.73) < 0.25
        mean, sd = inst.volume_stats()
        assert (mean > 0).all() and (sd > 0).all()
        assert inst.demand.is_period_uniform()

    def test_dominance_mix(self):
        inst = synthesize_instance(seed=3)
        mean, _ = inst.volume_stats()
        dominant = np.argmax(mean, axis=0)
        shares = np.bincount(dominant, minlength=3) / inst.n_stands
        assert abs(shares[1] - 0.80) < 0.08  # spruce
        assert abs(shares[0] - 0.15) < 0.08  # pine

    def test_deterministic(self):
        a = synthesize_instance(seed=11, n_stands=40, n_periods=3)
        b = synthesize_instance(seed=11, n_stands=40, n_periods=3)
        assert fingerprint_instance(a) == fingerprint_instance(b)
        c = synthesize_instance(seed=12, n_stands=40, n_periods=3)
        assert fingerprint_instance(a) != fingerprint_instance(c)


class TestInstanceRoundTrip:
    def test_lossless(self, small_instance, tmp_path):
        path = tmp_path / "forest.json"
        artifacts.write_instance(small_instance, path)
        loaded = artifacts.read_instance(path)
        assert fingerprint_instance(loaded) == fingerprint_instance(small_instance)
        m0, s0 = small_instance.volume_stats()
        m1, s1 = loaded.volume_stats()
        assert np.array_equal(m0, m1) and np.array_equal(s0, s1)
        assert np.array_equal(loaded.demand.values, small_instance.demand.values)

    def test_tampered_content_detected(self, small_instance, tmp_path):
        path = tmp_path / "forest.json"
        artifacts.write_instance(small_instance, path)
        stands = tmp_path / "forest.stands.csv"
        text = stands.read_text().splitlines()
        parts = text[1].split(",")
        parts[1] = "2.5"
        text[1] = ",".join(parts)
        stands.write_text("\n".join(text) + "\n")
        with pytest.raises(artifacts.ArtifactFormatError):
            artifacts.read_instance(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(artifacts.MissingArtifact):
            artifacts.read_instance(tmp_path / "nope.json")


class TestCohortRoundTrip:
    def test_lossless_full_precision(self, small_instance, tmp_path):
        cohort = stress_cohort(small_instance, 7, seed=5)
        artifacts.write_cohort(cohort, tmp_path, fingerprint_instance(small_instance))
        loaded, manifest = artifacts.read_cohort(tmp_path)
        assert loaded.ids == cohort.ids
        assert np.array_equal(loaded.volume_tensor(), cohort.volume_tensor())
        assert fingerprint_cohort(loaded) == fingerprint_cohort(cohort)
        assert manifest["generator_version"] == cohort.generator_version


class TestIdealsRoundTrip:
    def test_with_nadir(self, small_instance, tmp_path):
        scenarios = list(named_scenarios(small_instance))
        ideals = compute_ideals(
            small_instance, scenarios, keep_schedules=True, options=EXACT
        )
        nadir = estimate_nadir(small_instance, scenarios, ideals)
        artifacts.write_ideals(
            ideals, tmp_path, fingerprint_instance(small_instance), nadir
        )
        loaded, loaded_nadir, _ = artifacts.read_ideals(tmp_path)
        assert np.array_equal(loaded.values, ideals.values)
        assert np.array_equal(loaded_nadir.values, nadir.values)
        assert loaded.shortcut_used == ideals.shortcut_used


class TestArchiveRoundTrip:
    def test_lossless(self, small_instance, tmp_path):
        scenarios = list(named_scenarios(small_instance))[:2]
        archive = generate_archive(
            small_instance,
            scenarios,
            generate_weight_schedule(2 * 2 * 2),
            ReferenceConfig.neutral(small_instance, 2),
            options=EXACT,
        )
        artifacts.write_archive(archive, tmp_path / "archive.json")
        loaded = artifacts.read_archive(tmp_path / "archive.json")
        assert loaded.fingerprint == archive.fingerprint
        for a, b in zip(archive.entries, loaded.entries):
            assert np.array_equal(a.schedule.assignment, b.schedule.assignment)
            assert np.array_equal(a.objective_values, b.objective_values)
            assert a.label == b.label and a.duplicate_of == b.duplicate_of


class TestMatrixRoundTrip:
    def test_lossless(self, small_instance, tmp_path):
        scenarios = list(named_scenarios(small_instance))[:2]
        archive = generate_archive(
            small_instance,
            scenarios,
            generate_weight_schedule(8),
            ReferenceConfig.neutral(small_instance, 2),
            options=EXACT,
        )
        cohort = stress_cohort(small_instance, 6, seed=2)
        matrix = stress_test(archive, cohort, small_instance)
        artifacts.write_matrix(matrix, tmp_path, cohort_seed=2)
        loaded = artifacts.read_matrix(tmp_path)
        assert np.array_equal(loaded.values, matrix.values)
        assert loaded.solution_ids == matrix.solution_ids


def _micro_config(tmp_path, **overrides):
    defaults = dict(
        out_dir=tmp_path,
        synth_seed=5,
        n_stands=8,
        n_periods=2,
        cohort_size=12,
        scenario_seed=9,
        archive_options=SolveOptions(rel_gap_tol=0.0),
        ideal_options=SolveOptions(rel_gap_tol=0.0),
        ideals_over="named",
        workers=1,
    )
    defaults.update(overrides)
    return PipelineConfig(**defaults)


class TestPipeline:
    def test_micro_bundle_complete(self, tmp_path):
        bundle = run_pipeline(_micro_config(tmp_path), log=lambda *_: None)
        k = 3 * 2 * 3  # assortments x periods x scenarios
        assert len(bundle.archive) == k + 1
        assert len(bundle.cohort) == 12
        assert bundle.matrix.values.shape == (k + 1, 12, 3, 2)
        assert bundle.ideals is not None and bundle.nadir is not None
        assert (bundle.nadir.values >= bundle.ideals.values - 1e-12).all()

    def test_idempotent_rerun_skips(self, tmp_path):
        run_pipeline(_micro_config(tmp_path), log=lambda *_: None)
        events = []
        run_pipeline(_micro_config(tmp_path), log=events.append)
        assert all("skipped" in e for e in events)

    def test_mismatched_config_refused(self, tmp_path):
        run_pipeline(_micro_config(tmp_path), log=lambda *_: None)
        with pytest.raises(StageError):
            run_pipeline(
                _micro_config(tmp_path, cohort_size=13), log=lambda *_: None
            )

    def test_missing_instance_path_stage_tagged(self, tmp_path):
        config = _micro_config(tmp_path, instance_path=tmp_path / "ghost.json")
        with pytest.raises(StageError) as err:
            run_pipeline(config, log=lambda *_: None)
        assert err.value.stage == "instance"
        assert not (tmp_path / "archive.json").exists()

    def test_deterministic_across_runs(self, tmp_path):
        b1 = run_pipeline(_micro_config(tmp_path / "a"), log=lambda *_: None)
        b2 = run_pipeline(_micro_config(tmp_path / "b"), log=lambda *_: None)
        assert (
            (tmp_path / "a" / "cohort.csv").read_bytes()
            == (tmp_path / "b" / "cohort.csv").read_bytes()
        )
        assert b1.archive.fingerprint == b2.archive.fingerprint
        assert np.array_equal(b1.matrix.values, b2.matrix.values)

    def test_load_bundle_cross_checks(self, tmp_path):
        run_pipeline(_micro_config(tmp_path), log=lambda *_: None)
        from harvestplan.robustness import FingerprintMismatch

        # Swap in a cohort built from a different instance.
        other = synthesize_instance(99, n_stands=8, n_periods=2)
        cohort = stress_cohort(other, 12, seed=9)
        artifacts.write_cohort(cohort, tmp_path, fingerprint_instance(other))
        with pytest.raises(FingerprintMismatch):
            artifacts.load_bundle(tmp_path)
