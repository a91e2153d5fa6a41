"""Ground-truth scoring of backend outputs.

Three evaluations, one per task: actions are scored geometrically against the
intent (right object grasped, place point inside the described region),
descriptions are parsed back and checked against the action that produced
them, and consistency judgments are compared with recomputed truth. Scores
aggregate into a report with per-task percentages and a failure histogram.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .backends.base import Backend, confidence_from_logits
from .datagen import Demonstration
from .lang_parser import ParseError, intents_equivalent, parse
from .regions import point_in_region
from .scene import Action, Scene, nearest_object
from .seeding import rng_for
from .spatial_lang import (
    DEFAULT_PICK_RADIUS,
    DEFAULT_THRESHOLDS,
    AbsolutePlacement,
    DescriptionType,
    Intent,
    NoPickTarget,
    ThresholdConfig,
    bind_pick_target,
    eligible_description_types,
    get_default_bank,
    render_with,
    swap_relation,
)

TASKS = ("l2a", "a2l", "l2c")

JUDGMENT_CUTOFF = 0.5


class EmptyResults(ValueError):
    pass


class FailReason(Enum):
    WRONG_OBJECT = "wrong-object"
    MISSED_GRASP = "missed-grasp"
    WRONG_PLACEMENT = "wrong-placement"
    UNPARSEABLE = "unparseable"
    INELIGIBLE_TYPE = "ineligible-type"
    FALSE_ACCEPT = "false-accept"
    FALSE_REJECT = "false-reject"


@dataclass(frozen=True)
class EvalConfig:
    """Scoring knobs.

    pick_radius should stay below half the scene's minimum object
    separation, otherwise a grasp can be near-enough to two objects at
    once and the nearest-object check does the disambiguation alone.
    """

    pick_radius: float = DEFAULT_PICK_RADIUS
    thresholds: ThresholdConfig = field(default_factory=lambda: DEFAULT_THRESHOLDS)

    def __post_init__(self):
        if self.pick_radius <= 0.0:
            raise ValueError("pick_radius must be positive")


@dataclass(frozen=True)
class EvalOutcome:
    success: bool
    fail_reason: FailReason | None = None
    detail: str = ""


@dataclass(frozen=True)
class ItemEval:
    demo_id: str
    task: str
    outcome: EvalOutcome


def eval_l2a(scene: Scene, intent: Intent, action: Action, cfg: EvalConfig) -> EvalOutcome:
    """Score a predicted action against the intent it was meant to realize."""
    nearest, dist = nearest_object(scene, action.pick)
    if nearest.name != intent.pick_target:
        return EvalOutcome(False, FailReason.WRONG_OBJECT, f"pick lands nearest to {nearest.name!r}")
    if dist > cfg.pick_radius:
        return EvalOutcome(False, FailReason.MISSED_GRASP, f"pick is {dist:.4f} from {nearest.name!r}")
    if not point_in_region(action.place, intent.placement, scene, cfg.thresholds):
        return EvalOutcome(False, FailReason.WRONG_PLACEMENT, "place point outside the described region")
    return EvalOutcome(True)


def eval_a2l(scene: Scene, action: Action, text: str, cfg: EvalConfig) -> EvalOutcome:
    """Score a generated description against the action it describes.

    The description must parse, name the object the action actually grasps,
    use a type that is eligible for this placement, and denote a region
    containing the real place point.
    """
    try:
        target = bind_pick_target(scene, action, cfg.pick_radius)
    except NoPickTarget:
        return EvalOutcome(False, FailReason.MISSED_GRASP, "action grasps no object")
    try:
        intent = parse(text, frozenset(scene.names()))
    except ParseError as exc:
        return EvalOutcome(False, FailReason.UNPARSEABLE, str(exc))
    if intent.pick_target != target.name:
        return EvalOutcome(
            False, FailReason.WRONG_OBJECT, f"describes {intent.pick_target!r}, action grasps {target.name!r}"
        )
    desc_type = (
        DescriptionType.ABSOLUTE
        if isinstance(intent.placement, AbsolutePlacement)
        else DescriptionType.RELATIVE
    )
    if desc_type not in eligible_description_types(scene, action, cfg.thresholds, cfg.pick_radius):
        return EvalOutcome(False, FailReason.INELIGIBLE_TYPE, f"{desc_type.value} not eligible here")
    if not point_in_region(action.place, intent.placement, scene, cfg.thresholds):
        return EvalOutcome(False, FailReason.WRONG_PLACEMENT, "place point outside the described region")
    return EvalOutcome(True)


def eval_l2c(judgment: bool, truth: bool) -> bool:
    return judgment == truth


def _eval_one(demo: Demonstration, index: int, backend: Backend, cfg: EvalConfig, seed: int) -> list[ItemEval]:
    out = []

    resp_a = backend.l2a(demo.scene, demo.instruction, temperature=0.0, seed=0)
    out.append(ItemEval(demo.id, "l2a", eval_l2a(demo.scene, demo.intent, resp_a.action, cfg)))

    resp_l = backend.a2l(demo.scene, demo.action, temperature=0.0, seed=0)
    out.append(ItemEval(demo.id, "a2l", eval_a2l(demo.scene, demo.action, resp_l.text, cfg)))

    # Consistency probes alternate by position: even items get a paraphrase
    # of the true intent, odd items a corrupted relation. Truth is recomputed
    # rather than assumed so a no-op corruption cannot mislabel the pair.
    rng = rng_for(seed, index)
    matched = index % 2 == 0
    probe_intent = demo.intent if matched else swap_relation(demo.intent, rng)
    probe_text = render_with(probe_intent, get_default_bank(), rng)
    truth = intents_equivalent(probe_intent, demo.intent, demo.scene, cfg.thresholds)
    resp_c = backend.l2c(demo.scene, demo.instruction, probe_text)
    judgment = confidence_from_logits(resp_c.z0, resp_c.z1) >= JUDGMENT_CUTOFF
    if eval_l2c(judgment, truth):
        outcome = EvalOutcome(True)
    elif judgment:
        outcome = EvalOutcome(False, FailReason.FALSE_ACCEPT, f"accepted inconsistent pair: {probe_text!r}")
    else:
        outcome = EvalOutcome(False, FailReason.FALSE_REJECT, f"rejected consistent pair: {probe_text!r}")
    out.append(ItemEval(demo.id, "l2c", outcome))
    return out


def evaluate_dataset(
    dataset: list[Demonstration],
    backend: Backend,
    *,
    cfg: EvalConfig | None = None,
    seed: int = 0,
    workers: int = 1,
) -> list[ItemEval]:
    """Run all three evaluations over a dataset, in dataset order.

    Backend calls may fan out over threads; results are merged back in
    order so the aggregate is independent of scheduling.
    """
    if cfg is None:
        cfg = EvalConfig()
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(dataset) <= 1:
        batches = [_eval_one(d, i, backend, cfg, seed) for i, d in enumerate(dataset)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(
                pool.map(lambda pair: _eval_one(pair[1], pair[0], backend, cfg, seed), enumerate(dataset))
            )
    return [item for batch in batches for item in batch]


def metrics_report(results: list[ItemEval]) -> dict:
    """Aggregate item evaluations into {l2a_pct, a2l_pct, l2c_pct, counts, failure_histogram}."""
    if not results:
        raise EmptyResults("no evaluation results to aggregate")
    counts: dict[str, dict[str, int]] = {t: {"success": 0, "total": 0} for t in TASKS}
    histogram: dict[str, dict[str, int]] = {t: {} for t in TASKS}
    for item in results:
        if item.task not in counts:
            raise ValueError(f"unknown task {item.task!r}")
        counts[item.task]["total"] += 1
        if item.outcome.success:
            counts[item.task]["success"] += 1
        elif item.outcome.fail_reason is not None:
            bucket = histogram[item.task]
            key = item.outcome.fail_reason.value
            bucket[key] = bucket.get(key, 0) + 1
    report: dict = {}
    for task in TASKS:
        total = counts[task]["total"]
        report[f"{task}_pct"] = 100.0 * counts[task]["success"] / total if total else None
    report["counts"] = counts
    report["failure_histogram"] = histogram
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def format_table(report: dict) -> str:
    """Render the report as an aligned text table, tasks as columns."""

    def cell(value):
        return "-" if value is None else f"{value:.2f}"

    header = f"{'L2A (%)':>10}{'A2L (%)':>10}{'L2C (%)':>10}{'items':>10}"
    n = report["counts"]["l2a"]["total"]
    row = f"{cell(report['l2a_pct']):>10}{cell(report['a2l_pct']):>10}{cell(report['l2c_pct']):>10}{n:>10}"
    lines = [header, row]
    for task in TASKS:
        buckets = report["failure_histogram"].get(task, {})
        if buckets:
            parts = " ".join(f"{k}={v}" for k, v in sorted(buckets.items()))
            lines.append(f"failures {task}: {parts}")
    return "\n".join(lines)


def csv_row(report: dict, dataset_size: int) -> str:
    """One plot-data row: dataset_size,l2a,a2l,l2c."""
    vals = [report["l2a_pct"], report["a2l_pct"], report["l2c_pct"]]
    rendered = ",".join("" if v is None else f"{v:.4f}" for v in vals)
    return f"{dataset_size},{rendered}"


CSV_HEADER = "dataset_size,l2a,a2l,l2c"
