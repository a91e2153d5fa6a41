"""Bidirectional language-action toolkit for tabletop pick-and-place.

Instructions map to actions, actions map back to descriptions, and a
consistency judge scores the round trip; the cycle engine uses that signal
to grow datasets from a model's own filtered outputs.
"""

from .backends import (
    Backend,
    BackendUnavailable,
    NOISELESS,
    OracleBackend,
    OracleNoise,
    RemoteBackend,
    confidence_from_logits,
)
from .cycle_engine import (
    AugmentationRecord,
    CandidateRecord,
    CycleConfig,
    augment,
    l2a2l_once,
    make_noise_shrink_hook,
    self_improve,
    verify_records,
)
from .datagen import (
    Catalog,
    Demonstration,
    Provenance,
    default_catalog,
    gen_dataset,
    gen_demo,
    gen_scene,
    load_dataset,
    save_dataset,
)
from .lang_parser import ParseError, intents_equivalent, parse
from .scene import Action, Direction8, GridCell, Point2, Scene, SceneObject
from .semantics_eval import (
    EvalConfig,
    FailReason,
    eval_a2l,
    eval_l2a,
    eval_l2c,
    evaluate_dataset,
    format_table,
    metrics_report,
)
from .spatial_lang import (
    AbsolutePlacement,
    DescriptionType,
    Intent,
    RelativePlacement,
    TemplateBank,
    ThresholdConfig,
    describe,
    eligible_description_types,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AbsolutePlacement",
    "AugmentationRecord",
    "Backend",
    "BackendUnavailable",
    "CandidateRecord",
    "Catalog",
    "CycleConfig",
    "Demonstration",
    "DescriptionType",
    "Direction8",
    "EvalConfig",
    "FailReason",
    "GridCell",
    "Intent",
    "NOISELESS",
    "OracleBackend",
    "OracleNoise",
    "ParseError",
    "Point2",
    "Provenance",
    "RelativePlacement",
    "RemoteBackend",
    "Scene",
    "SceneObject",
    "TemplateBank",
    "ThresholdConfig",
    "augment",
    "confidence_from_logits",
    "default_catalog",
    "describe",
    "eligible_description_types",
    "eval_a2l",
    "eval_l2a",
    "eval_l2c",
    "evaluate_dataset",
    "format_table",
    "gen_dataset",
    "gen_demo",
    "gen_scene",
    "intents_equivalent",
    "l2a2l_once",
    "load_dataset",
    "make_noise_shrink_hook",
    "metrics_report",
    "parse",
    "render",
    "save_dataset",
    "self_improve",
    "verify_records",
]
