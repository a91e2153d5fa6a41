import dataclasses
import math

import pytest

from lacy.backends import (
    A2LResponse,
    L2AResponse,
    L2CResponse,
    OracleBackend,
    OracleNoise,
    confidence_from_logits,
)
from lacy.cycle_engine import (
    AugmentationRecord,
    CandidateRecord,
    CycleConfig,
    CycleStageError,
    RecordSoundnessError,
    SelfImproveAborted,
    augment,
    l2a2l_once,
    load_records,
    make_noise_shrink_hook,
    record_from_dict,
    record_to_dict,
    save_records,
    self_improve,
    verify_records,
)
from lacy.datagen import Provenance, default_catalog, gen_dataset
from lacy.scene import Action, Point2
from lacy.semantics_eval import metrics_report


class ScriptedBackend:
    """Fixed responses; gate always fires, every sample votes yes."""

    model_id = "scripted"

    def __init__(self, const_place=(0.9, 0.1), fail_stage=None):
        self.const_place = const_place
        self.fail_stage = fail_stage

    def l2a(self, scene, instruction, temperature=0.0, seed=0):
        if self.fail_stage == "l2a":
            raise RuntimeError("boom")
        pick = scene.objects[0].center
        place = Point2(*self.const_place) if temperature > 0 else Point2(0.5, 0.5)
        return L2AResponse(scene.objects, Action(pick, place))

    def a2l(self, scene, action, temperature=0.0, seed=0):
        if self.fail_stage == "a2l":
            raise RuntimeError("boom")
        return A2LResponse(scene.objects, "det" if temperature == 0 else "sampled")

    def l2c(self, scene, instruction, candidate):
        if self.fail_stage == "l2c":
            raise RuntimeError("boom")
        if candidate == "sampled":
            return L2CResponse(scene.objects, -1.0, 1.0)
        return L2CResponse(scene.objects, 1.0, -1.0)


def test_cycle_config_validation():
    CycleConfig(n_samples=1)
    for kwargs in (
        {"n_samples": 0},
        {"n_samples": 5, "tau": 0.0},
        {"n_samples": 5, "tau": 1.0},
        {"n_samples": 5, "nu": 0.0},
        {"n_samples": 5, "nu": 1.5},
        {"n_samples": 5, "iterations": -1},
        {"n_samples": 5, "per_round_quota": 0},
        {"n_samples": 5, "temperature": 0.0},
    ):
        with pytest.raises(ValueError):
            CycleConfig(**kwargs)


def test_l2a2l_once_noiseless_confidence(small_dataset):
    demo = small_dataset[0]
    action, text, c = l2a2l_once(demo.scene, demo.instruction, OracleBackend())
    assert c == confidence_from_logits(-2.0, 2.0)
    assert text


def test_l2a2l_once_wraps_stage_failures(small_dataset):
    demo = small_dataset[0]
    for stage in ("l2a", "a2l", "l2c"):
        with pytest.raises(CycleStageError) as err:
            l2a2l_once(demo.scene, demo.instruction, ScriptedBackend(fail_stage=stage))
        assert err.value.stage == stage
        assert str(err.value).startswith(f"{stage}: ")


def test_confident_items_skip_sampling(small_dataset):
    # Items the deterministic pass reconstructs faithfully are left alone;
    # only gated items sample candidates. A noiseless cycle can still gate
    # an item whose place centroid re-binds to a different reference.
    ds = small_dataset[:10]
    cfg = CycleConfig(n_samples=3)
    d_aug, records = augment(ds, OracleBackend(), cfg, seed=1)
    assert d_aug[: len(ds)] == ds
    confident = [r for r in records if r.deterministic_c > cfg.tau]
    gated = [r for r in records if r.deterministic_c <= cfg.tau]
    assert confident
    assert all(r.candidates == () for r in confident)
    assert all(r.candidates_tried == cfg.n_samples for r in gated)
    verify_records(records, cfg)


class BoundaryBackend(ScriptedBackend):
    """Consistency always lands exactly on the threshold logits."""

    def l2c(self, scene, instruction, candidate):
        return L2CResponse(scene.objects, -2.0, 2.0)


def test_gate_and_vote_are_inclusive_at_the_threshold(small_dataset):
    # Confidence exactly equal to tau both fires the gate (c <= tau) and
    # counts as a yes vote (c >= tau).
    ds = small_dataset[:4]
    tau = confidence_from_logits(-2.0, 2.0)
    cfg = CycleConfig(n_samples=3, tau=tau)
    _, records = augment(ds, BoundaryBackend(), cfg, seed=1)
    assert all(r.candidates_tried == 3 for r in records)
    for record in records:
        assert record.deterministic_c == tau
        assert all(c.votes == 3 and c.accepted for c in record.candidates)
    verify_records(records, cfg)

    # One float step below, the same confidence clears the gate instead.
    below = CycleConfig(n_samples=3, tau=math.nextafter(tau, 0.0))
    _, records = augment(ds, BoundaryBackend(), below, seed=1)
    assert all(r.candidates == () for r in records)


def test_vote_threshold_arithmetic():
    # nu = 0.5 with five samples: accepted exactly when votes >= 3.
    action = Action(Point2(0.1, 0.1), Point2(0.9, 0.9))
    cfg = CycleConfig(n_samples=5, nu=0.5)
    for votes in range(6):
        ok = CandidateRecord(action, votes, accepted=votes / 5 >= 0.5, added=False)
        verify_records(
            [AugmentationRecord("d0", 0, 0.3, None, 5, (ok,))], cfg
        )
        bad = CandidateRecord(action, votes, accepted=not (votes / 5 >= 0.5), added=False)
        with pytest.raises(RecordSoundnessError):
            verify_records([AugmentationRecord("d0", 0, 0.3, None, 5, (bad,))], cfg)


def test_verify_records_checks():
    action = Action(Point2(0.1, 0.1), Point2(0.9, 0.9))
    cfg = CycleConfig(n_samples=5)
    sound = AugmentationRecord(
        "d0", 0, 0.3, None, 5,
        (CandidateRecord(action, 5, accepted=True, added=True),),
    )
    verify_records([sound], cfg)
    cases = [
        # c missing without an error
        AugmentationRecord("d0", 0, None, None, 5, ()),
        # claims a different sample count than the config
        AugmentationRecord("d0", 0, 0.3, None, 4, ()),
        # confident items must not carry candidates
        AugmentationRecord("d0", 0, 0.99, None, 5,
                           (CandidateRecord(action, 5, True, False),)),
        # votes outside [0, N]
        AugmentationRecord("d0", 0, 0.3, None, 5,
                           (CandidateRecord(action, 6, True, False),)),
        # added without accepted
        AugmentationRecord("d0", 0, 0.3, None, 5,
                           (CandidateRecord(action, 1, False, True),)),
    ]
    for record in cases:
        with pytest.raises(RecordSoundnessError):
            verify_records([record], cfg)


def test_augment_dedups_identical_candidates(small_dataset):
    ds = small_dataset[:5]
    backend = ScriptedBackend()
    cfg = CycleConfig(n_samples=4)
    d_aug, records = augment(ds, backend, cfg, seed=2)
    # All four candidates per item collapse to one dedup key.
    assert len(d_aug) == len(ds) + len(ds)
    for record in records:
        assert sum(c.added for c in record.candidates) == 1
        assert all(c.accepted for c in record.candidates)
    verify_records(records, cfg)

    # The merged dataset already contains that action; nothing new appears.
    d_aug2, records2 = augment(d_aug, backend, cfg, seed=3)
    assert d_aug2 == d_aug
    assert all(not c.added for r in records2 for c in r.candidates)


def test_augment_additions_carry_cycle_provenance(small_dataset):
    ds = small_dataset[:5]
    d_aug, _ = augment(ds, ScriptedBackend(), CycleConfig(n_samples=2), seed=2, round_index=3)
    new = d_aug[len(ds):]
    assert new
    for demo in new:
        assert demo.provenance is Provenance.CYCLE
        assert "-aug-r3-" in demo.id
        parent = demo.id.split("-aug-")[0]
        assert parent in {d.id for d in ds}


def test_augment_quota_stops_after_filling_wave(small_dataset):
    ds = small_dataset[:12]
    cfg = CycleConfig(n_samples=2, per_round_quota=3)
    d_aug, records = augment(ds, ScriptedBackend(), cfg, seed=2)
    assert len(d_aug) == len(ds) + 3
    # Sequential processing stops with the item that filled the quota.
    assert len(records) == 3


def test_augment_records_extend_at_most_workers_minus_one(small_dataset):
    ds = small_dataset[:12]
    cfg = CycleConfig(n_samples=2, per_round_quota=3)
    d_aug, records = augment(ds, ScriptedBackend(), cfg, seed=2, workers=4)
    assert len(d_aug) == len(ds) + 3
    assert 3 <= len(records) <= 3 + 3


def test_augment_invariant_to_workers(small_dataset):
    ds = small_dataset[:16]
    backend = OracleBackend(OracleNoise(p_wrong_object=0.5, place_sigma=0.05))
    cfg = CycleConfig(n_samples=4)
    seq, seq_records = augment(ds, backend, cfg, seed=9, workers=1)
    par, par_records = augment(ds, backend, cfg, seed=9, workers=5)
    assert seq == par
    assert seq_records == par_records


def test_augment_deterministic_per_seed(small_dataset):
    ds = small_dataset[:10]
    backend = OracleBackend(OracleNoise(p_wrong_object=0.5, place_sigma=0.05))
    cfg = CycleConfig(n_samples=4)
    a, _ = augment(ds, backend, cfg, seed=9)
    b, _ = augment(ds, backend, cfg, seed=9)
    c, _ = augment(ds, backend, cfg, seed=10)
    assert a == b
    assert a != c


def test_augment_stage_error_becomes_record(small_dataset):
    ds = small_dataset[:3]
    d_aug, records = augment(ds, ScriptedBackend(fail_stage="a2l"), CycleConfig(n_samples=2), seed=1)
    assert d_aug == ds
    for record in records:
        assert record.deterministic_c is None
        assert record.error.startswith("a2l: ")
    verify_records(records, CycleConfig(n_samples=2))


def test_augment_rejects_empty_dataset():
    with pytest.raises(ValueError):
        augment([], OracleBackend(), CycleConfig(n_samples=2), seed=0)


def test_augment_on_record_streams_in_order(small_dataset):
    ds = small_dataset[:8]
    streamed = []
    _, records = augment(
        ds, ScriptedBackend(), CycleConfig(n_samples=2), seed=2,
        workers=3, on_record=streamed.append,
    )
    assert streamed == records


def test_self_improve_baseline_only(small_dataset):
    ds = small_dataset[:10]
    backend = OracleBackend()
    results = self_improve(ds, backend, CycleConfig(n_samples=2, iterations=0),
                           lambda d: backend, seed=1)
    assert len(results) == 1
    assert results[0][0] == ds
    assert results[0][1]["l2a_pct"] == 100.0


def test_self_improve_rounds_grow_and_fire_callbacks(small_dataset):
    ds = small_dataset[:10]
    base = OracleBackend(OracleNoise(p_wrong_object=0.6))
    rounds_seen = []
    results = self_improve(
        ds, base, CycleConfig(n_samples=6, iterations=2),
        make_noise_shrink_hook(base), seed=1,
        on_round=lambda r, d, recs, m: rounds_seen.append((r, len(d), len(recs))),
    )
    assert len(results) == 3
    assert rounds_seen[0] == (0, 10, 0)
    assert [r for r, _, _ in rounds_seen] == [0, 1, 2]
    sizes = [len(d) for d, _ in results]
    assert sizes[0] == 10
    assert sizes == sorted(sizes)


def test_self_improve_hook_failure_preserves_completed(small_dataset):
    ds = small_dataset[:6]
    base = OracleBackend(OracleNoise(p_wrong_object=0.6))
    calls = {"n": 0}

    def flaky_hook(dataset):
        calls["n"] += 1
        if calls["n"] == 2:
            raise RuntimeError("out of disk")
        return base

    with pytest.raises(SelfImproveAborted) as err:
        self_improve(ds, base, CycleConfig(n_samples=4, iterations=4), flaky_hook, seed=1)
    assert err.value.round_index == 2
    assert len(err.value.completed) == 2  # baseline plus round 1


def test_self_improve_uses_heldout_for_metrics(small_dataset):
    ds = small_dataset[:8]
    heldout = gen_dataset(default_catalog(), 12, seed=404)
    backend = OracleBackend()
    results = self_improve(
        ds, backend, CycleConfig(n_samples=2, iterations=0),
        lambda d: backend, seed=1, heldout=heldout,
    )
    assert results[0][1]["counts"]["l2a"]["total"] == 12


def test_noise_shrink_hook_factor_math(small_dataset):
    base = OracleBackend(OracleNoise(p_wrong_object=0.8))
    hook = make_noise_shrink_hook(base, gain=0.5)

    # All-human data leaves the backend at base noise.
    human_only = list(small_dataset[:10])
    assert hook(human_only).noise.p_wrong_object == pytest.approx(0.8)

    # Correct cycle items shrink it: 10 / (10 + 0.5 * 5) = 0.8.
    cycle = [
        dataclasses.replace(d, id=f"{d.id}-aug-r1-0", provenance=Provenance.CYCLE)
        for d in small_dataset[10:15]
    ]
    shrunk = hook(human_only + cycle).noise
    assert shrunk.p_wrong_object == pytest.approx(0.8 * 10 / 12.5)

    # Incorrect cycle items do not count.
    broken = [
        dataclasses.replace(
            c, action=Action(pick=Point2(0.99, 0.99), place=c.action.place)
        )
        for c in cycle
    ]
    assert hook(human_only + broken).noise.p_wrong_object == pytest.approx(0.8)


def test_noise_shrink_hook_rejects_negative_gain():
    with pytest.raises(ValueError):
        make_noise_shrink_hook(OracleBackend(), gain=-0.1)


def test_record_round_trip_dict_and_file(tmp_path, small_dataset):
    ds = small_dataset[:6]
    backend = OracleBackend(OracleNoise(p_wrong_object=0.6, place_sigma=0.05))
    _, records = augment(ds, backend, CycleConfig(n_samples=3), seed=4)
    assert records
    for record in records:
        assert record_from_dict(record_to_dict(record)) == record
    path = tmp_path / "records.jsonl"
    save_records(records, path)
    assert load_records(path) == records


def test_record_from_dict_rejects_malformed():
    with pytest.raises(RecordSoundnessError):
        record_from_dict({"round": 0})
    with pytest.raises(RecordSoundnessError):
        record_from_dict(
            {
                "round": 0,
                "demo_id": "d0",
                "c": "high",
                "error": None,
                "n_samples": 3,
                "candidates": [],
            }
        )
