"""Confidence-gated data augmentation with majority voting.

The deterministic pass maps an instruction to an action, describes that
action back into language, and scores the round trip. Low-confidence items
trigger stochastic resampling: each candidate action is described several
times and kept only when enough of its descriptions are judged consistent
with the original instruction. Accepted triplets extend the dataset under
cycle provenance; every item leaves an audit record sufficient to replay
the gate and vote decisions offline.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .backends.base import Backend, BackendUnavailable, l2c_confidence, stochastic_a2l, stochastic_l2a
from .backends.oracle import OracleBackend
from .datagen import COORD_DECIMALS, Demonstration, Provenance
from .scene import Action, Point2, Scene
from .seeding import derive_seed
from .semantics_eval import EvalConfig, eval_l2a, evaluate_dataset, metrics_report
from .spatial_lang import NoPickTarget

DEDUP_DECIMALS = 4


@dataclass(frozen=True)
class CycleConfig:
    """Knobs for one augmentation pass.

    n_samples is both the candidate count and the per-candidate description
    count. The gate fires on c <= tau and votes count on c >= tau, so a
    confidence exactly at the threshold both triggers resampling and counts
    toward acceptance.
    """

    n_samples: int
    tau: float = 0.5
    nu: float = 0.5
    iterations: int = 0
    per_round_quota: int | None = None
    temperature: float = 1.0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must be in (0, 1)")
        if not 0.0 < self.nu <= 1.0:
            raise ValueError("nu must be in (0, 1]")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.per_round_quota is not None and self.per_round_quota < 1:
            raise ValueError("per_round_quota must be >= 1 when set")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")


class CycleStageError(RuntimeError):
    """A backend call failed; .stage names which leg of the cycle."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


class RecordSoundnessError(ValueError):
    pass


class SelfImproveAborted(RuntimeError):
    """Retrain hook failed; .completed holds the rounds finished so far."""

    def __init__(self, round_index: int, completed: list):
        super().__init__(f"retrain hook failed in round {round_index}")
        self.round_index = round_index
        self.completed = completed


@dataclass(frozen=True)
class CandidateRecord:
    action: Action
    votes: int
    accepted: bool  # passed the vote: votes / n_samples >= nu
    added: bool  # survived dedup and quota into the merged dataset


@dataclass(frozen=True)
class AugmentationRecord:
    demo_id: str
    round_index: int
    deterministic_c: float | None  # None only when error is set
    error: str | None
    n_samples: int
    candidates: tuple[CandidateRecord, ...]

    @property
    def candidates_tried(self) -> int:
        return len(self.candidates)

    @property
    def accepted_actions(self) -> tuple[Action, ...]:
        return tuple(c.action for c in self.candidates if c.accepted)


def l2a2l_once(scene: Scene, instruction: str, backend: Backend) -> tuple[Action, str, float]:
    """Deterministic cycle pass: action, reconstructed text, confidence."""
    try:
        resp_a = backend.l2a(scene, instruction, temperature=0.0, seed=0)
    except Exception as exc:
        raise CycleStageError("l2a", exc) from exc
    try:
        resp_l = backend.a2l(scene, resp_a.action, temperature=0.0, seed=0)
    except Exception as exc:
        raise CycleStageError("a2l", exc) from exc
    try:
        _, c = l2c_confidence(backend, scene, instruction, resp_l.text)
    except Exception as exc:
        raise CycleStageError("l2c", exc) from exc
    return resp_a.action, resp_l.text, c


def _round_action(action: Action) -> Action:
    return Action(
        pick=Point2(round(action.pick.x, COORD_DECIMALS), round(action.pick.y, COORD_DECIMALS)),
        place=Point2(round(action.place.x, COORD_DECIMALS), round(action.place.y, COORD_DECIMALS)),
    )


def _dedup_key(scene_id: str, instruction: str, action: Action) -> tuple:
    coords = (action.pick.x, action.pick.y, action.place.x, action.place.y)
    return (scene_id, instruction, tuple(round(v, DEDUP_DECIMALS) for v in coords))


@dataclass(frozen=True)
class _ItemResult:
    index: int
    demo: Demonstration
    c: float | None
    error: str | None
    tallies: tuple[tuple[Action, int], ...]


def _process_item(
    index: int, demo: Demonstration, backend: Backend, cfg: CycleConfig, seed: int
) -> _ItemResult:
    try:
        _, _, c = l2a2l_once(demo.scene, demo.instruction, backend)
    except CycleStageError as exc:
        return _ItemResult(index, demo, None, str(exc), ())
    if c > cfg.tau:
        return _ItemResult(index, demo, c, None, ())
    try:
        candidates = stochastic_l2a(
            backend, demo.scene, demo.instruction, cfg.n_samples,
            derive_seed(seed, index, 1), cfg.temperature,
        )
        tallies = []
        for k, candidate in enumerate(candidates):
            descriptions = stochastic_a2l(
                backend, demo.scene, candidate, cfg.n_samples,
                derive_seed(seed, index, 2, k), cfg.temperature,
            )
            votes = 0
            for text in descriptions:
                _, conf = l2c_confidence(backend, demo.scene, demo.instruction, text)
                if conf >= cfg.tau:
                    votes += 1
            tallies.append((candidate, votes))
    except (BackendUnavailable, NoPickTarget) as exc:
        return _ItemResult(index, demo, c, f"sampling: {exc}", ())
    return _ItemResult(index, demo, c, None, tuple(tallies))


def augment(
    dataset: list[Demonstration],
    backend: Backend,
    cfg: CycleConfig,
    seed: int,
    *,
    workers: int = 1,
    round_index: int = 0,
    on_record: Callable[[AugmentationRecord], None] | None = None,
) -> tuple[list[Demonstration], list[AugmentationRecord]]:
    """One augmentation round over the dataset.

    Returns the merged dataset (input order preserved, additions appended)
    and one record per processed item. Items are processed in dataset order;
    once the quota is reached no further items are submitted, so records may
    cover only a prefix of the dataset (at most workers-1 items past the one
    that filled the quota). The merged dataset is invariant to workers.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    if workers < 1:
        raise ValueError("workers must be >= 1")

    seen = {_dedup_key(d.scene.scene_id, d.instruction, d.action) for d in dataset}
    d_aug = list(dataset)
    records: list[AugmentationRecord] = []
    added_total = 0
    quota = cfg.per_round_quota

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        index = 0
        while index < len(dataset):
            wave = range(index, min(index + workers, len(dataset)))
            if pool is None:
                outs = [_process_item(i, dataset[i], backend, cfg, seed) for i in wave]
            else:
                outs = list(pool.map(lambda i: _process_item(i, dataset[i], backend, cfg, seed), wave))
            for out in outs:
                cand_records = []
                for k, (candidate, votes) in enumerate(out.tallies):
                    accepted = votes / cfg.n_samples >= cfg.nu
                    added = False
                    if accepted and (quota is None or added_total < quota):
                        rounded = _round_action(candidate)
                        key = _dedup_key(out.demo.scene.scene_id, out.demo.instruction, rounded)
                        if key not in seen:
                            seen.add(key)
                            d_aug.append(
                                Demonstration(
                                    id=f"{out.demo.id}-aug-r{round_index}-{k}",
                                    provenance=Provenance.CYCLE,
                                    scene=out.demo.scene,
                                    instruction=out.demo.instruction,
                                    action=rounded,
                                    intent=out.demo.intent,
                                )
                            )
                            added = True
                            added_total += 1
                    cand_records.append(CandidateRecord(_round_action(candidate), votes, accepted, added))
                record = AugmentationRecord(
                    demo_id=out.demo.id,
                    round_index=round_index,
                    deterministic_c=out.c,
                    error=out.error,
                    n_samples=cfg.n_samples,
                    candidates=tuple(cand_records),
                )
                records.append(record)
                if on_record is not None:
                    on_record(record)
            index = wave[-1] + 1
            if quota is not None and added_total >= quota:
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=False)
    return d_aug, records


RetrainHook = Callable[[list[Demonstration]], Backend]


def self_improve(
    initial_dataset: list[Demonstration],
    backend: Backend,
    cfg: CycleConfig,
    retrain_hook: RetrainHook,
    seed: int,
    *,
    heldout: list[Demonstration] | None = None,
    eval_cfg: EvalConfig | None = None,
    eval_seed: int = 0,
    workers: int = 1,
    on_record: Callable[[AugmentationRecord], None] | None = None,
    on_round: Callable[[int, list[Demonstration], list[AugmentationRecord], dict], None] | None = None,
) -> list[tuple[list[Demonstration], dict]]:
    """Iterated augment-retrain-measure loop.

    Element 0 of the result is the pre-improvement baseline (initial dataset,
    initial backend metrics); element r is the state after round r. Metrics
    are measured on `heldout` when given, else on the initial dataset, with
    a fixed evaluation seed so rounds are comparable. The retrain hook maps
    the merged dataset to a fresh backend; it is expected to retrain from
    the base model each time, not from the previous round's weights. A hook
    failure aborts later rounds but preserves finished ones on the raised
    SelfImproveAborted. on_round fires after every measured round, round 0
    included (with no records).
    """
    if not initial_dataset:
        raise ValueError("initial_dataset must be non-empty")
    eval_set = heldout if heldout is not None else initial_dataset

    def measure(b: Backend) -> dict:
        return metrics_report(evaluate_dataset(eval_set, b, cfg=eval_cfg, seed=eval_seed, workers=workers))

    results: list[tuple[list[Demonstration], dict]] = [(list(initial_dataset), measure(backend))]
    if on_round is not None:
        on_round(0, results[0][0], [], results[0][1])
    current, current_backend = list(initial_dataset), backend
    for r in range(1, cfg.iterations + 1):
        d_aug, records = augment(
            current, current_backend, cfg, derive_seed(seed, r),
            workers=workers, round_index=r, on_record=on_record,
        )
        try:
            current_backend = retrain_hook(d_aug)
        except Exception as exc:
            raise SelfImproveAborted(r, results) from exc
        metrics = measure(current_backend)
        results.append((d_aug, metrics))
        if on_round is not None:
            on_round(r, d_aug, records, metrics)
        current = d_aug
    return results


def make_noise_shrink_hook(base_backend: OracleBackend, *, gain: float = 0.5) -> RetrainHook:
    """Retrain hook that models learning from accepted data.

    Each call rebuilds the backend from the base noise profile, scaled by
    how much correct cycle-provenance data the merged dataset carries:
    factor = n_human / (n_human + gain * n_cycle_correct). Depending only
    on the dataset keeps the retrain-from-base semantics honest.
    """
    if gain < 0.0:
        raise ValueError("gain must be >= 0")
    base_noise = base_backend.noise
    cfg = EvalConfig()

    def hook(dataset: list[Demonstration]) -> OracleBackend:
        human = sum(1 for d in dataset if d.provenance is Provenance.HUMAN)
        correct = sum(
            1
            for d in dataset
            if d.provenance is Provenance.CYCLE and eval_l2a(d.scene, d.intent, d.action, cfg).success
        )
        denom = human + gain * correct
        factor = human / denom if denom > 0 else 1.0
        return base_backend.retrained(base_noise.scaled(factor))

    return hook


def _action_dict(action: Action) -> dict:
    return {
        "pick": {"x": action.pick.x, "y": action.pick.y},
        "place": {"x": action.place.x, "y": action.place.y},
    }


def record_to_dict(record: AugmentationRecord) -> dict:
    return {
        "round": record.round_index,
        "demo_id": record.demo_id,
        "c": record.deterministic_c,
        "error": record.error,
        "n_samples": record.n_samples,
        "candidates": [
            {"action": _action_dict(c.action), "votes": c.votes, "accepted": c.accepted, "added": c.added}
            for c in record.candidates
        ],
    }


def record_from_dict(entry: dict) -> AugmentationRecord:
    try:
        candidates = tuple(
            CandidateRecord(
                action=Action(
                    pick=Point2(float(c["action"]["pick"]["x"]), float(c["action"]["pick"]["y"])),
                    place=Point2(float(c["action"]["place"]["x"]), float(c["action"]["place"]["y"])),
                ),
                votes=int(c["votes"]),
                accepted=bool(c["accepted"]),
                added=bool(c["added"]),
            )
            for c in entry["candidates"]
        )
        c_val = entry["c"]
        return AugmentationRecord(
            demo_id=str(entry["demo_id"]),
            round_index=int(entry["round"]),
            deterministic_c=None if c_val is None else float(c_val),
            error=None if entry["error"] is None else str(entry["error"]),
            n_samples=int(entry["n_samples"]),
            candidates=candidates,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordSoundnessError(f"malformed record: {exc}") from exc


def record_to_json(record: AugmentationRecord) -> str:
    return json.dumps(record_to_dict(record), separators=(",", ":"))


def save_records(records: list[AugmentationRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_json(record) + "\n")


def load_records(path: str) -> list[AugmentationRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordSoundnessError(f"invalid JSON in records file: {exc}") from exc
            out.append(record_from_dict(entry))
    return out


def verify_records(records: list[AugmentationRecord], cfg: CycleConfig) -> None:
    """Replay the gate and vote decisions; raise on any inconsistency."""
    for record in records:
        where = f"record for {record.demo_id!r} (round {record.round_index})"
        if record.deterministic_c is None and record.error is None:
            raise RecordSoundnessError(f"{where}: missing confidence without an error")
        if record.n_samples != cfg.n_samples:
            raise RecordSoundnessError(f"{where}: n_samples {record.n_samples} != config {cfg.n_samples}")
        if record.deterministic_c is not None and record.deterministic_c > cfg.tau and record.candidates:
            raise RecordSoundnessError(f"{where}: candidates tried above the gate (c={record.deterministic_c})")
        for k, cand in enumerate(record.candidates):
            if not 0 <= cand.votes <= record.n_samples:
                raise RecordSoundnessError(f"{where}: candidate {k} votes {cand.votes} out of range")
            should_accept = cand.votes / record.n_samples >= cfg.nu
            if cand.accepted != should_accept:
                raise RecordSoundnessError(
                    f"{where}: candidate {k} accepted={cand.accepted} but votes {cand.votes}/{record.n_samples}"
                )
            if cand.added and not cand.accepted:
                raise RecordSoundnessError(f"{where}: candidate {k} added without acceptance")
