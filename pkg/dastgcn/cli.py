#!/usr/bin/env python3
"""
dastgcn command line: synthesis, training, cross-validation, ablations,
scaling curves, graph export, transfer and gradient checks.

Every command writes run.json into its output directory; passing it back
with --replay reproduces the run.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Set, Tuple

from config.model import REFERENCE_PARAM_COUNT
from config.output import (CHECKPOINT_FILENAME, GRADCHECK_FILENAME,
                           LOSSCURVE_FILENAME, REPORT_FILENAME, RUN_FILENAME)
from utils.cli_common import (add_common_arguments,
                              configure_logging_from_args,
                              handle_keyboard_interrupt,
                              print_completion_message)
from utils.file_operations import (create_output_directory, safe_file_write,
                                   write_csv, write_json)

from .data import Dataset, load_dataset, synth_generate
from .errors import (EXIT_FAILURE, EXIT_INTERRUPTED, EXIT_OK, ConfigurationError,
                     DastGcnError, GradientCheckError, UnknownConfigKeyError,
                     UsageError)
from .gradcheck_suite import run_gradcheck_suite, worst_error
from .models import Provenance, RunConfig, RunSpec, build_config
from .network import (checkpoint_metadata, load_checkpoint, param_breakdown,
                      save_checkpoint)
from .settings import load_settings
from .training import (fit_model, run_ablation, scaling_experiment,
                       scaling_models, train_model, write_ablation_table,
                       write_adjacencies, write_loss_curve,
                       write_scaling_table, write_train_report)
from .transfer import (export_graph, load_graph_bundle, make_provenance,
                       transfer_experiment, write_transfer_table)

log = logging.getLogger(__name__)

COMMANDS = ["synth", "train", "cv", "ablate", "scale", "export-graph", "transfer", "check-grads", "params"]
NAMESPACES = set(RunConfig.model_fields)


def fold_count(value: str) -> int:
    """argparse type for --folds: an integer of at least 2."""
    try:
        folds = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"folds must be an integer, got {value!r}") from None
    if folds < 2:
        raise argparse.ArgumentTypeError(f"folds must be >= 2, got {folds}")
    return folds


def parse_assignment(text: str) -> Tuple[str, str]:
    """Split ``namespace.key=value``; the key must be dotted."""
    if "=" not in text:
        raise ConfigurationError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    key = key.strip()
    namespace, _, field = key.partition(".")
    if not field or namespace not in NAMESPACES:
        raise UnknownConfigKeyError(
            f"unknown config key {key!r}; keys look like {sorted(NAMESPACES)[0]}.<name>"
        )
    return key, value.strip()


def read_config_file(path: Path) -> List[Tuple[str, str]]:
    """Flat ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config file {path}: {e}") from e
    pairs = []
    for line in lines:
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            pairs.append(parse_assignment(stripped))
    return pairs


def _assign(tree: Dict[str, Any], key: str, value: Any) -> None:
    namespace, field = key.split(".", 1)
    tree.setdefault(namespace, {})[field] = value


def resolve_config(args: argparse.Namespace, base: Optional[RunConfig] = None) -> Tuple[RunConfig, Set[str]]:
    """Defaults < base (replayed run) < config file < spec JSON < --set < flags.

    Returns the config and the dotted keys given explicitly.
    """
    tree: Dict[str, Any] = base.model_dump(mode="json") if base is not None else {}
    explicit: Set[str] = set()

    pairs: List[Tuple[str, Any]] = []
    if args.config:
        pairs.extend(read_config_file(Path(args.config)))
    if getattr(args, "spec", None):
        try:
            spec_data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read synthetic spec {args.spec}: {e}") from e
        pairs.extend((f"synth.{k}", v) for k, v in spec_data.items())
    pairs.extend(parse_assignment(item) for item in args.set or [])
    if args.folds is not None:
        pairs.append(("train.folds", args.folds))
    if args.epochs is not None:
        pairs.append(("train.epochs", args.epochs))
    if args.seed is not None:
        pairs.append(("synth.seed" if args.command == "synth" else "train.seed", args.seed))

    for key, value in pairs:
        _assign(tree, key, value)
        explicit.add(key)
    return build_config(RunConfig, tree), explicit


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dastgcn",
        description="Dynamic adaptive spatio-temporal graph convolution for time-series classification",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    helps = {
        "synth": "Generate a planted-structure synthetic dataset",
        "train": "Train one model on a whole dataset and save a checkpoint",
        "cv": "Stratified k-fold cross-validation",
        "ablate": "Cross-validate every ablation variant and the linear baseline",
        "scale": "Accuracy against samples per class",
        "export-graph": "Export the learned adjacency factors of a checkpoint",
        "transfer": "Pretrained-graph versus scratch comparison on a target dataset",
        "check-grads": "Run the finite-difference gradient suite",
        "params": "Print the itemized trainable parameter count",
    }
    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=helps[name], description=helps[name])
        sub.add_argument("--out", help="Output directory")
        sub.add_argument("--config", help="key=value config file with dotted keys (model.K=3)")
        sub.add_argument(
            "--set", action="append", metavar="KEY=VALUE", help="Override one config key (repeatable)"
        )
        sub.add_argument("--folds", type=fold_count, help="Cross-validation folds (>= 2)")
        sub.add_argument("--epochs", type=int, help="Training epochs")
        sub.add_argument("--seed", type=int, help="Root random seed")
        sub.add_argument("--replay", help="Re-run the command recorded in a run.json")
        if name in ("train", "cv", "ablate", "scale", "transfer"):
            sub.add_argument("--data", help="Dataset manifest (transfer: the source dataset)")
        if name == "transfer":
            sub.add_argument("--target", help="Target dataset manifest")
        if name in ("export-graph", "transfer"):
            sub.add_argument(
                "--checkpoint",
                help="Model checkpoint (export-graph) or graph bundle replacing --data (transfer)",
            )
        if name == "synth":
            sub.add_argument("--spec", help="JSON file of synthetic dataset fields")
        add_common_arguments(sub)
    return parser


def resolve_run_spec(args: argparse.Namespace) -> Tuple[RunSpec, Set[str]]:
    base: Optional[RunSpec] = None
    if args.replay:
        try:
            base = RunSpec.model_validate_json(Path(args.replay).read_text(encoding="utf-8"))
        except OSError as e:
            raise UsageError(f"cannot read {args.replay}: {e}") from e
        except ValueError as e:
            raise ConfigurationError(f"{args.replay} is not a valid run record: {e}") from None
        if base.command != args.command:
            raise UsageError(f"{args.replay} records command {base.command!r}, not {args.command!r}")

    config, explicit = resolve_config(args, base.config if base else None)

    def pick(name: str) -> Optional[str]:
        value = getattr(args, name, None)
        return value if value is not None else (getattr(base, name) if base else None)

    out = pick("out")
    if out is None:
        if args.command not in ("check-grads", "params"):
            raise UsageError(f"{args.command} needs --out")
        out = ""
    spec = RunSpec(
        command=args.command,
        out=out,
        data=pick("data"),
        target=pick("target"),
        checkpoint=pick("checkpoint"),
        config=config,
    )
    return spec, explicit


def _require(value: Optional[str], flag: str, command: str) -> Path:
    if not value:
        raise UsageError(f"{command} needs {flag}")
    return Path(value)


def _adopt_dataset_shape(spec: RunSpec, explicit: Set[str], dataset: Dataset) -> RunSpec:
    """Size the model to the dataset unless model.N / model.C were given."""
    updates = {}
    if "model.N" not in explicit:
        updates["N"] = dataset.N
    if "model.C" not in explicit:
        updates["C"] = dataset.C
    if not updates:
        return spec
    model = spec.config.model.variant(**updates)
    return spec.model_copy(update={"config": spec.config.model_copy(update={"model": model})})


class Context:
    """What a command needs besides its RunSpec."""

    def __init__(self, spec: RunSpec, explicit: Set[str], threads: int):
        self.spec = spec
        self.explicit = explicit
        self.threads = threads

    @property
    def out(self) -> Path:
        return Path(self.spec.out)

    def load(self, manifest: Optional[str], flag: str = "--data") -> Dataset:
        dataset = load_dataset(_require(manifest, flag, self.spec.command), self.threads)
        self.spec = _adopt_dataset_shape(self.spec, self.explicit, dataset)
        return dataset


def cmd_synth(ctx: Context) -> List[Path]:
    result = synth_generate(ctx.spec.config.synth, ctx.out)
    print(f"class Pearson distance: {result.pearson_distance:.6f}")
    return [result.manifest_path]


def cmd_train(ctx: Context) -> List[Path]:
    dataset = ctx.load(ctx.spec.data)
    model_config, train_config = ctx.spec.config.model, ctx.spec.config.train
    fit = fit_model(dataset, model_config, train_config)
    params = fit.model.params
    provenance = make_provenance(dataset.name, model_config, train_config, ctx.spec.config.transfer.task)
    paths = [
        save_checkpoint(
            ctx.out / CHECKPOINT_FILENAME, params,
            metadata={"provenance": provenance.model_dump(mode="json")},
        ),
        write_loss_curve(ctx.out / LOSSCURVE_FILENAME, fit.loss_curve),
    ]
    paths.extend(write_adjacencies(ctx.out, fit.model.adjacency_snapshots()))
    summary = {
        "model_name": "dast-gcn",
        "param_count": params.count(),
        "final_loss": fit.loss_curve[-1].loss,
        "train_metrics": fit.train_metrics.model_dump(mode="json"),
        "provenance": provenance.model_dump(mode="json"),
    }
    report_path = ctx.out / REPORT_FILENAME
    if write_json(report_path, summary):
        paths.append(report_path)
    return paths


def cmd_cv(ctx: Context) -> List[Path]:
    dataset = ctx.load(ctx.spec.data)
    report = train_model(dataset, ctx.spec.config.model, ctx.spec.config.train, threads=ctx.threads)
    acc = report.summary.acc_mean
    print(f"accuracy: {'NA' if acc is None else f'{acc:.4f}'} over {report.summary.completed_folds} folds")
    return write_train_report(report, ctx.out)


def cmd_ablate(ctx: Context) -> List[Path]:
    dataset = ctx.load(ctx.spec.data)
    cfg = ctx.spec.config
    result = run_ablation(dataset, cfg.model, cfg.train, cfg.ablate, ctx.threads)
    paths = []
    for name, report in result.reports.items():
        paths.extend(write_train_report(report, ctx.out / name, adjacency_csv=False))
    paths.append(write_ablation_table(result, ctx.out))
    return paths


def cmd_scale(ctx: Context) -> List[Path]:
    dataset = ctx.load(ctx.spec.data)
    cfg = ctx.spec.config
    rows = scaling_experiment(
        dataset, scaling_models(cfg.model, cfg.scale.models), cfg.scale.sizes, cfg.train, ctx.threads
    )
    return [write_scaling_table(rows, ctx.out)]


def cmd_export_graph(ctx: Context) -> List[Path]:
    checkpoint = _require(ctx.spec.checkpoint, "--checkpoint", "export-graph")
    params = load_checkpoint(checkpoint)
    metadata = checkpoint_metadata(checkpoint)
    if "provenance" in metadata:
        provenance = Provenance.model_validate(metadata["provenance"])
    else:
        provenance = make_provenance(checkpoint.stem, params.config, ctx.spec.config.train)
    return export_graph(params, provenance, ctx.out)


def cmd_transfer(ctx: Context) -> List[Path]:
    cfg = ctx.spec.config
    target = ctx.load(ctx.spec.target, "--target")
    bundle = None
    source = None
    if ctx.spec.checkpoint:
        bundle = load_graph_bundle(Path(ctx.spec.checkpoint))
    else:
        source = load_dataset(_require(ctx.spec.data, "--data or --checkpoint", "transfer"), ctx.threads)
    report, bundle = transfer_experiment(
        source, target, ctx.spec.config.model, cfg.train, cfg.transfer.mode,
        bundle=bundle, task=cfg.transfer.task, threads=ctx.threads,
    )
    report_path = ctx.out / REPORT_FILENAME
    paths = [write_transfer_table(report, ctx.out)]
    if safe_file_write(report_path, report.model_dump_json(indent=2) + "\n"):
        paths.append(report_path)
    print(
        f"pretrained mean >= scratch mean: {report.pretrained_mean_ge_scratch}; "
        f"sd or paired difference ok: {report.sd_or_paired_ok}"
    )
    return paths


def cmd_check_grads(ctx: Context) -> List[Path]:
    entries = run_gradcheck_suite(ctx.spec.config.train.seed)
    worst = worst_error(entries)
    print(f"worst relative error: {worst:.3e}")
    paths = []
    if ctx.spec.out:
        path = ctx.out / GRADCHECK_FILENAME
        rows = [[e.suite, e.name, e.max_rel_error, e.tolerance, e.passed] for e in entries]
        if write_csv(path, ["suite", "name", "max_rel_error", "tolerance", "passed"], rows):
            paths.append(path)
    failed = [e for e in entries if not e.passed]
    if failed:
        names = ", ".join(f"{e.suite}/{e.name}" for e in failed)
        raise GradientCheckError(f"{len(failed)} gradient check(s) failed: {names}")
    return paths


def cmd_params(ctx: Context) -> List[Path]:
    breakdown = param_breakdown(ctx.spec.config.model)
    width = max(len(name) for name in breakdown)
    for name, count in breakdown.items():
        print(f"{name:<{width}}  {count:>7d}")
    total = sum(breakdown.values())
    print(f"{'total':<{width}}  {total:>7d}")
    print(f"reference {REFERENCE_PARAM_COUNT}, ratio {total / REFERENCE_PARAM_COUNT:.3f}")
    return []


HANDLERS: Dict[str, Callable[[Context], List[Path]]] = {
    "synth": cmd_synth,
    "train": cmd_train,
    "cv": cmd_cv,
    "ablate": cmd_ablate,
    "scale": cmd_scale,
    "export-graph": cmd_export_graph,
    "transfer": cmd_transfer,
    "check-grads": cmd_check_grads,
    "params": cmd_params,
}


def write_run_record(spec: RunSpec) -> Optional[Path]:
    if not spec.out:
        return None
    path = Path(spec.out) / RUN_FILENAME
    if not safe_file_write(path, spec.model_dump_json(indent=2) + "\n"):
        raise UsageError(f"cannot write {path}")
    return path


def run(argv: Optional[List[str]] = None) -> int:
    """Execute one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    settings = load_settings()
    configure_logging_from_args(args, settings.log_level, settings.show_progress)
    threads = args.threads or settings.threads

    try:
        spec, explicit = resolve_run_spec(args)
        if spec.out and not create_output_directory(Path(spec.out)):
            raise UsageError(f"cannot create output directory {spec.out}")
        ctx = Context(spec, explicit, threads)
        outputs = HANDLERS[spec.command](ctx)
        record = write_run_record(ctx.spec)
    except DastGcnError as e:
        print(f"dastgcn {args.command}: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("Interrupted", file=sys.stderr)
        return EXIT_INTERRUPTED
    except Exception as e:
        log.debug(f"unhandled error in {args.command}", exc_info=True)
        print(f"dastgcn {args.command}: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE

    if record is not None:
        outputs = outputs + [record]
    if not args.quiet and outputs:
        print_completion_message(args.command, outputs)
    return EXIT_OK


@handle_keyboard_interrupt
def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
