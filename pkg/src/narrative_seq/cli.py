"""The ``narrative-seq`` command line: ingest, preprocess, train, evaluate,
and compare subcommands over the library.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure. In
compare mode a numeric failure in one model is recorded per model; the run
exits 0 as long as at least one model succeeds.

Values come from CLI flags first, then the ``--config`` JSON file, then
built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys

from pathlib import Path

from . import dataset_io, harness, zoo
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus_ingest import class_distribution, filter_completed, load_reports
from .errors import DataError, NumericError
from .evaluation import format_evaluation_summary, metrics_to_dict
from .text_pipeline import load_stoplist, preprocess_corpus
from .training import history_to_csv, split_dataset, train_model


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; this tool reserves 2 for
    # data errors, so route usage problems through exit code 1.
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="narrative-seq", description=__doc__)
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, help="seed for split and training")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ingest", help="load a corpus and print its class distribution")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("json", "csv"))

    p = sub.add_parser("preprocess", help="encode a corpus into a dataset directory")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-size", type=int)
    p.add_argument("--seq-len", type=int)
    p.add_argument("--pad", choices=("pre", "post"))
    p.add_argument("--stoplist")

    p = sub.add_parser("train", help="train one zoo model on an encoded dataset")
    p.add_argument("--data", required=True, help="directory written by preprocess")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int, dest="train_seed")
    p.add_argument("--reval-per-epoch", action="store_true", default=None,
                   help="re-draw the validation holdout every epoch")

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a dataset split")
    p.add_argument("--model-file", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "validation", "test", "all"),
                   default="test")
    p.add_argument("--out")

    p = sub.add_parser("compare", help="train and evaluate a set of zoo models")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--models", help="comma-separated zoo names (default: all ten)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--parallelism", type=int)
    return parser


def _load_config_dict(args) -> dict:
    if not args.config:
        return {}
    path = Path(args.config)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"{path}: config must be a JSON object")
    return data


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix == ".csv":
        return "csv"
    raise DataError(
        f"cannot infer corpus format from {path!r}; pass --format json|csv"
    )


def _load_filtered(args, verbose: bool):
    result = load_reports(args.data, _infer_format(args.data, args.format))
    if result.warnings:
        print(f"skipped {len(result.warnings)} malformed entries", file=sys.stderr)
        if verbose:
            for warning in result.warnings:
                print(f"  {warning}", file=sys.stderr)
    return filter_completed(result.records)


def _cmd_ingest(args, cfg: dict) -> int:
    records = _load_filtered(args, args.verbose)
    dist = class_distribution(records)
    width = max(len(label.display_name) for label in dist.counts)
    print(f"{'Damage level':<{width + 2}}Count")
    for label, count in dist.counts.items():
        print(f"{label.display_name:<{width + 2}}{count}")
    print(f"{'Total':<{width + 2}}{dist.total}")
    print(json.dumps(dist.to_dict(), sort_keys=True))
    return 0


def _cmd_preprocess(args, cfg: dict) -> int:
    records = _load_filtered(args, args.verbose)
    if not records:
        raise DataError("no usable records after the completed-investigation filter")
    vocab_size = args.vocab_size or cfg.get("vocab_size", 100_000)
    seq_len = args.seq_len or cfg.get("seq_len", 2000)
    pad = args.pad or cfg.get("pad", "post")
    stoplist_path = args.stoplist or cfg.get("stoplist")
    stoplist = load_stoplist(stoplist_path) if stoplist_path else None
    sequences, labels, vocab = preprocess_corpus(
        records, vocab_size=vocab_size, seq_len=seq_len, stoplist=stoplist, pad=pad
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = dataset_io.EncodedDataset(
        sequences=sequences, labels=labels, vocab_size=vocab.size
    )
    dataset_io.write_encoded_dataset(out_dir / dataset_io.ENCODED_FILENAME, dataset)
    dataset_io.write_vocab_sidecar(out_dir / dataset_io.VOCAB_FILENAME, vocab)
    print(
        f"encoded {len(dataset)} records (seq_len={seq_len}, "
        f"vocab size={vocab.size}) into {out_dir}"
    )
    return 0


def _effective_train_config(args, cfg: dict, base_seed: int | None):
    from .training import TrainConfig

    values = {k: cfg[k] for k in (
        "epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon",
        "clip_norm", "revalidate_per_epoch",
    ) if k in cfg}
    if getattr(args, "epochs", None) is not None:
        values["epochs"] = args.epochs
    if getattr(args, "batch", None) is not None:
        values["batch_size"] = args.batch
    if getattr(args, "lr", None) is not None:
        values["learning_rate"] = args.lr
    if getattr(args, "reval_per_epoch", None) is not None:
        values["revalidate_per_epoch"] = args.reval_per_epoch
    seed = base_seed if base_seed is not None else cfg.get("seed", 0)
    return TrainConfig(seed=seed, **values)


def _effective_seed(args, cfg: dict) -> int:
    if getattr(args, "train_seed", None) is not None:
        return args.train_seed
    if args.seed is not None:
        return args.seed
    return cfg.get("seed", 0)


def _cmd_train(args, cfg: dict) -> int:
    from .training import SplitSpec

    data_dir = Path(args.data)
    dataset = dataset_io.read_encoded_dataset(data_dir / dataset_io.ENCODED_FILENAME)
    fingerprint = dataset_io.vocab_fingerprint(data_dir / dataset_io.VOCAB_FILENAME)
    seed = _effective_seed(args, cfg)
    config = _effective_train_config(args, cfg, seed)
    split = SplitSpec(
        seed=seed,
        test_fraction=cfg.get("test_fraction", 0.20),
        validation_fraction_of_train=cfg.get("validation_fraction_of_train", 0.10),
    )
    spec = zoo.build_spec(
        args.model,
        embedding_dim=cfg.get("embedding_dim", zoo.DEFAULT_EMBEDDING_DIM),
        hidden_units=cfg.get("hidden_units", zoo.DEFAULT_HIDDEN_UNITS),
        dense_hidden_units=cfg.get("dense_hidden_units", zoo.DEFAULT_DENSE_HIDDEN_UNITS),
    )
    params, history = train_model(spec, dataset, config, split)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(params, spec, fingerprint, out_dir / harness.CHECKPOINT_FILENAME)
    (out_dir / harness.HISTORY_FILENAME).write_text(
        history_to_csv(history), encoding="utf-8"
    )
    last = history[-1]
    print(
        f"trained {spec.name} for {config.epochs} epochs: "
        f"train acc {last.train_accuracy:.4f}, val acc {last.val_accuracy:.4f}"
    )
    print(f"checkpoint and history written to {out_dir}")
    return 0


def _cmd_evaluate(args, cfg: dict) -> int:
    import numpy as np

    from .training import SplitSpec

    data_dir = Path(args.data)
    dataset = dataset_io.read_encoded_dataset(data_dir / dataset_io.ENCODED_FILENAME)
    fingerprint = dataset_io.vocab_fingerprint(data_dir / dataset_io.VOCAB_FILENAME)
    spec, params = load_checkpoint(args.model_file, fingerprint)
    seed = _effective_seed(args, cfg)
    split = SplitSpec(
        seed=seed,
        test_fraction=cfg.get("test_fraction", 0.20),
        validation_fraction_of_train=cfg.get("validation_fraction_of_train", 0.10),
    )
    train_idx, val_idx, test_idx = split_dataset(len(dataset), split)
    indices = {
        "train": train_idx,
        "validation": val_idx,
        "test": test_idx,
        "all": np.arange(len(dataset)),
    }[args.split]
    cm, weighted, macro, baseline = harness._evaluate_on(
        spec, params, dataset, indices, batch_size=64
    )
    print(f"{spec.name} on the {args.split} split ({indices.size} records)")
    print(format_evaluation_summary(weighted, macro, baseline), end="")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = metrics_to_dict(weighted, macro, cm, baseline)
        (out_dir / harness.METRICS_FILENAME).write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        print(f"metrics written to {out_dir / harness.METRICS_FILENAME}")
    return 0


def _cmd_compare(args, cfg: dict) -> int:
    merged = dict(cfg)
    if args.data:
        merged["data_path"] = args.data
    if args.out:
        merged["output_dir"] = args.out
    if args.models:
        merged["model_names"] = [m.strip() for m in args.models.split(",") if m.strip()]
    if args.epochs is not None:
        merged["epochs"] = args.epochs
    if args.batch is not None:
        merged["batch_size"] = args.batch
    if args.lr is not None:
        merged["learning_rate"] = args.lr
    if args.parallelism is not None:
        merged["parallelism"] = args.parallelism
    if args.seed is not None:
        merged["seed"] = args.seed
    if not merged.get("data_path"):
        raise _UsageError("compare needs --data or data_path in the config file")
    if not merged.get("output_dir"):
        raise _UsageError("compare needs --out or output_dir in the config file")
    config = harness.config_from_dict(merged)
    manifest = harness.run_experiment(config)
    table = Path(config.output_dir) / harness.RESULTS_TABLE_FILENAME
    if table.exists():
        print(table.read_text(encoding="utf-8"), end="")
    failed = [n for n, m in manifest["models"].items() if m["status"] == "failed"]
    for name in failed:
        print(
            f"model {name} failed: {manifest['models'][name]['error']}",
            file=sys.stderr,
        )
    ok = len(manifest["models"]) - len(failed)
    print(f"{ok}/{len(manifest['models'])} models completed; manifest in "
          f"{config.output_dir}")
    return 0 if ok else 3


_COMMANDS = {
    "ingest": _cmd_ingest,
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise _UsageError("a subcommand is required (see --help)")
        cfg = _load_config_dict(args)
        return _COMMANDS[args.command](args, cfg)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())
