"""Command line front end.

Three subcommands: gen-dataset writes a synthetic demonstration file,
run-cycle performs augmentation (optionally iterated with retraining),
evaluate scores a backend against a dataset. Every command is deterministic
given its full flag set. Exit codes: 2 bad configuration, 3 unusable or
unwritable files, 4 backend unreachable. Output files are written via
temp-and-rename; the records log streams so partial progress survives a
backend failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from .backends import (
    ENV_BACKEND_URL,
    NOISELESS,
    BackendUnavailable,
    OracleBackend,
    OracleNoise,
    RemoteBackend,
)
from .cycle_engine import (
    CycleConfig,
    SelfImproveAborted,
    augment,
    make_noise_shrink_hook,
    record_to_json,
    self_improve,
)
from .datagen import (
    SchemaViolation,
    default_catalog,
    dump_demos,
    gen_dataset,
    load_catalog,
    load_dataset,
)
from .semantics_eval import (
    CSV_HEADER,
    csv_row,
    evaluate_dataset,
    format_table,
    metrics_report,
    report_to_json,
)
from .spatial_lang import AbsolutePlacement

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_BACKEND = 4

_REQUIRED = object()


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _demos_text(demos) -> str:
    buf = io.StringIO()
    dump_demos(demos, buf)
    return buf.getvalue()


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise CliError(EXIT_CONFIG, f"config file {path}: expected a JSON object")
    return data


def _resolve(args: argparse.Namespace, config: dict, spec: dict):
    """Merge flag values over config-file values over defaults."""
    out = argparse.Namespace()
    for key, default in spec.items():
        value = getattr(args, key, None)
        if value is None:
            value = config.get(key, default)
        if value is _REQUIRED:
            raise CliError(EXIT_CONFIG, f"missing required option --{key.replace('_', '-')}")
        setattr(out, key, value)
    return out


def _workers(value) -> int:
    if value is None:
        return os.cpu_count() or 1
    workers = int(value)
    if workers < 1:
        raise CliError(EXIT_CONFIG, "--workers must be >= 1")
    return workers


def _parse_noise(profile: str) -> OracleNoise:
    text = profile.strip()
    if not text.startswith("{"):
        text = Path(profile).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"noise profile is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CliError(EXIT_CONFIG, "noise profile must be a JSON object")
    try:
        return OracleNoise(**data)
    except TypeError as exc:
        raise CliError(EXIT_CONFIG, f"bad noise profile field: {exc}") from exc


def _make_backend(kind: str, backend_url: str | None, noise_profile: str | None):
    if kind == "oracle":
        noise = _parse_noise(noise_profile) if noise_profile else NOISELESS
        return OracleBackend(noise)
    if noise_profile:
        raise CliError(EXIT_CONFIG, "--noise-profile applies to the oracle backend only")
    url = backend_url or os.environ.get(ENV_BACKEND_URL)
    if not url:
        raise CliError(EXIT_CONFIG, f"remote backend needs --backend-url or {ENV_BACKEND_URL}")
    backend = RemoteBackend(url)
    backend.model_id  # fail fast while nothing has been written yet
    return backend


def _emit_json(args_json: bool, summary: dict) -> None:
    # Must be the final stdout line.
    if args_json:
        print(json.dumps(summary, sort_keys=True))


def cmd_gen_dataset(args: argparse.Namespace, config: dict) -> int:
    opt = _resolve(
        args,
        config,
        {
            "catalog": None,
            "count": _REQUIRED,
            "objects_min": 3,
            "objects_max": 6,
            "min_separation": None,
            "seed": 0,
            "out": _REQUIRED,
        },
    )
    if int(opt.count) < 1:
        raise CliError(EXIT_CONFIG, "--count must be >= 1")
    catalog = load_catalog(opt.catalog) if opt.catalog else default_catalog()
    kwargs = {}
    if opt.min_separation is not None:
        kwargs["min_separation"] = float(opt.min_separation)
    demos = gen_dataset(
        catalog,
        int(opt.count),
        int(opt.seed),
        objects_min=int(opt.objects_min),
        objects_max=int(opt.objects_max),
        **kwargs,
    )
    out_path = Path(opt.out)
    _atomic_write(out_path, _demos_text(demos))
    absolute = sum(1 for d in demos if isinstance(d.intent.placement, AbsolutePlacement))
    relative = len(demos) - absolute
    print(f"wrote {len(demos)} demonstrations to {out_path} (absolute {absolute}, relative {relative})")
    _emit_json(
        args.json,
        {
            "command": "gen-dataset",
            "count": len(demos),
            "absolute": absolute,
            "relative": relative,
            "path": str(out_path),
        },
    )
    return EXIT_OK


def cmd_run_cycle(args: argparse.Namespace, config: dict) -> int:
    opt = _resolve(
        args,
        config,
        {
            "dataset": _REQUIRED,
            "backend": "oracle",
            "backend_url": None,
            "noise_profile": None,
            "n_samples": 5,
            "tau": 0.5,
            "nu": 0.5,
            "iterations": 0,
            "quota": None,
            "temperature": 1.0,
            "seed": 0,
            "out_dir": _REQUIRED,
            "heldout": None,
            "noise_shrink_gain": 0.5,
            "workers": None,
        },
    )
    dataset = load_dataset(opt.dataset)
    if not dataset:
        raise CliError(EXIT_CONFIG, f"dataset {opt.dataset} is empty")
    backend = _make_backend(opt.backend, opt.backend_url, opt.noise_profile)
    cfg = CycleConfig(
        n_samples=int(opt.n_samples),
        tau=float(opt.tau),
        nu=float(opt.nu),
        iterations=int(opt.iterations),
        per_round_quota=None if opt.quota is None else int(opt.quota),
        temperature=float(opt.temperature),
    )
    workers = _workers(opt.workers)
    seed = int(opt.seed)
    out_dir = Path(opt.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    heldout = load_dataset(opt.heldout) if opt.heldout else None
    csv_rows = [CSV_HEADER]
    sizes: list[int] = []

    def on_round(r: int, d_aug, records, metrics):
        _atomic_write(out_dir / f"d_aug_round{r}.jsonl", _demos_text(d_aug))
        _atomic_write(out_dir / f"metrics_round{r}.json", report_to_json(metrics))
        csv_rows.append(csv_row(metrics, len(d_aug)))
        sizes.append(len(d_aug))

    final: list = []
    with open(out_dir / "records.jsonl", "w", encoding="utf-8") as rec_fh:

        def on_record(record):
            rec_fh.write(record_to_json(record) + "\n")
            rec_fh.flush()

        try:
            if cfg.iterations == 0:
                d_aug, _records = augment(dataset, backend, cfg, seed, workers=workers, on_record=on_record)
                results = evaluate_dataset(dataset, backend, seed=seed, workers=workers)
                on_round(0, d_aug, [], metrics_report(results))
                final = d_aug
            else:
                if opt.backend == "oracle":
                    hook = make_noise_shrink_hook(backend, gain=float(opt.noise_shrink_gain))
                else:
                    # No server-side retraining; later rounds reuse the same backend.
                    hook = lambda _dataset: backend
                rounds = self_improve(
                    dataset,
                    backend,
                    cfg,
                    hook,
                    seed,
                    heldout=heldout,
                    eval_seed=seed,
                    workers=workers,
                    on_record=on_record,
                    on_round=on_round,
                )
                final = rounds[-1][0]
        finally:
            if len(csv_rows) > 1:
                _atomic_write(out_dir / "rounds.csv", "\n".join(csv_rows) + "\n")
            if final:
                _atomic_write(out_dir / "d_aug.jsonl", _demos_text(final))

    added = len(final) - len(dataset)
    if added == 0:
        print("warning: no new items were accepted; every item passed the confidence gate")
    print(f"dataset {len(dataset)} -> {len(final)} (+{added}) across {cfg.iterations or 1} pass(es); outputs in {out_dir}")
    _emit_json(
        args.json,
        {
            "command": "run-cycle",
            "iterations": cfg.iterations,
            "sizes": sizes,
            "added_total": added,
            "out_dir": str(out_dir),
        },
    )
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, config: dict) -> int:
    opt = _resolve(
        args,
        config,
        {
            "dataset": _REQUIRED,
            "backend": "oracle",
            "backend_url": None,
            "noise_profile": None,
            "metrics_out": None,
            "csv": None,
            "table": True,
            "seed": 0,
            "workers": None,
        },
    )
    dataset = load_dataset(opt.dataset)
    if not dataset:
        raise CliError(EXIT_CONFIG, f"dataset {opt.dataset} is empty")
    backend = _make_backend(opt.backend, opt.backend_url, opt.noise_profile)
    results = evaluate_dataset(dataset, backend, seed=int(opt.seed), workers=_workers(opt.workers))
    report = metrics_report(results)
    if opt.table:
        print(format_table(report))
    if opt.metrics_out:
        _atomic_write(Path(opt.metrics_out), report_to_json(report))
    if opt.csv:
        csv_path = Path(opt.csv)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        fresh = not csv_path.exists() or csv_path.stat().st_size == 0
        with open(csv_path, "a", encoding="utf-8") as fh:
            if fresh:
                fh.write(CSV_HEADER + "\n")
            fh.write(csv_row(report, len(dataset)) + "\n")
    _emit_json(
        args.json,
        {
            "command": "evaluate",
            "items": len(dataset),
            "l2a_pct": report["l2a_pct"],
            "a2l_pct": report["a2l_pct"],
            "l2c_pct": report["l2c_pct"],
        },
    )
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file of option defaults; flags take precedence")
    sub.add_argument("--json", action="store_true", help="print a JSON summary as the final line")


def _add_backend_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--backend", choices=["oracle", "remote"])
    sub.add_argument("--backend-url", help=f"remote server base URL (or set {ENV_BACKEND_URL})")
    sub.add_argument("--noise-profile", help="oracle noise: inline JSON object or a path to one")
    sub.add_argument("--workers", type=int, help="worker pool size (default: logical cores)")
    sub.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lacy", description="Language-action cycle toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-dataset", help="generate a synthetic demonstration dataset")
    gen.add_argument("--catalog", help="object catalog file (default: built-in)")
    gen.add_argument("--count", type=int)
    gen.add_argument("--objects-min", type=int)
    gen.add_argument("--objects-max", type=int)
    gen.add_argument("--min-separation", type=float)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out")
    _add_common(gen)
    gen.set_defaults(func=cmd_gen_dataset)

    cyc = commands.add_parser("run-cycle", help="augment a dataset, optionally with retraining rounds")
    cyc.add_argument("--dataset")
    _add_backend_options(cyc)
    cyc.add_argument("--N", dest="n_samples", type=int, help="stochastic sample count")
    cyc.add_argument("--tau", type=float, help="consistency threshold")
    cyc.add_argument("--nu", type=float, help="voting threshold")
    cyc.add_argument("--iterations", type=int, help="retraining rounds (0: single augmentation pass)")
    cyc.add_argument("--quota", type=int, help="cap on new triplets per round")
    cyc.add_argument("--temperature", type=float, help="sampling temperature for stochastic passes")
    cyc.add_argument("--heldout", help="dataset used for per-round metrics")
    cyc.add_argument("--noise-shrink-gain", type=float, help="oracle retrain hook gain")
    cyc.add_argument("--out-dir")
    _add_common(cyc)
    cyc.set_defaults(func=cmd_run_cycle)

    ev = commands.add_parser("evaluate", help="score a backend against a dataset")
    ev.add_argument("--dataset")
    _add_backend_options(ev)
    ev.add_argument("--metrics-out", help="write the metrics report as JSON here")
    ev.add_argument("--csv", help="append a dataset_size,l2a,a2l,l2c row here")
    ev.add_argument("--table", action=argparse.BooleanOptionalAction, help="print the aligned table")
    _add_common(ev)
    ev.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(getattr(args, "config", None))
        return args.func(args, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except BackendUnavailable as exc:
        print(f"error: backend unavailable: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except SelfImproveAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except SchemaViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
