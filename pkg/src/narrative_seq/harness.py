"""Config-driven experiment orchestration: train and evaluate a set of zoo
models on one preprocessed dataset, then emit the combined artifacts.

Every model in a run shares the same seeded split, so comparisons are
paired. A model that aborts on non-finite loss is recorded as failed
without stopping the others. All artifacts are content-deterministic
(no timestamps), so identical configs produce byte-identical outputs;
the manifest lists every written file with its SHA-256.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset_io, zoo
from .corpus_ingest import ClassDistribution, DamageLabel
from .checkpoint import save_checkpoint
from .errors import DataError, NumericError
from .evaluation import (
    compute_metrics,
    confusion_matrix,
    majority_baseline,
    metrics_to_dict,
    render_results_table,
)
from .neural_layers import model_forward, predict_classes
from .training import SplitSpec, TrainConfig, history_to_csv, split_dataset, train_model

CHECKPOINT_FILENAME = "checkpoint.nsck"
HISTORY_FILENAME = "history.csv"
METRICS_FILENAME = "metrics.json"
RESULTS_TABLE_FILENAME = "results_table.txt"
RESULTS_CSV_FILENAME = "results.csv"
MANIFEST_FILENAME = "manifest.json"


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run; unknown keys in a config file are rejected."""

    data_path: str = ""
    output_dir: str = ""
    model_names: tuple[str, ...] = zoo.ZOO_NAMES
    seq_len: int = 2000
    vocab_size: int = 100_000
    pad: str = "post"
    stoplist: str | None = None
    embedding_dim: int = zoo.DEFAULT_EMBEDDING_DIM
    hidden_units: int = zoo.DEFAULT_HIDDEN_UNITS
    dense_hidden_units: int = zoo.DEFAULT_DENSE_HIDDEN_UNITS
    train: TrainConfig = field(default_factory=TrainConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    parallelism: int = 1

    def __post_init__(self):
        if not self.model_names:
            raise DataError("model_names must not be empty")
        unknown = [n for n in self.model_names if n not in zoo.ZOO_NAMES]
        if unknown:
            raise DataError(
                f"unknown model names {unknown}; zoo models are {list(zoo.ZOO_NAMES)}"
            )
        if self.parallelism < 1:
            raise DataError("parallelism must be at least 1")


_TRAIN_KEYS = (
    "epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon",
    "clip_norm", "seed", "revalidate_per_epoch",
)
_SPLIT_KEYS = ("test_fraction", "validation_fraction_of_train")
_TOP_KEYS = (
    "data_path", "output_dir", "model_names", "seq_len", "vocab_size", "pad",
    "stoplist", "embedding_dim", "hidden_units", "dense_hidden_units",
    "parallelism",
)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a flat key-value mapping (the config file schema).

    ``seed`` seeds both training and the split so one number pins a run.
    """
    unknown = set(data) - set(_TOP_KEYS) - set(_TRAIN_KEYS) - set(_SPLIT_KEYS)
    if unknown:
        raise DataError(f"unknown config keys {sorted(unknown)}")
    train = TrainConfig(**{k: data[k] for k in _TRAIN_KEYS if k in data})
    split = SplitSpec(
        seed=data.get("seed", 0),
        **{k: data[k] for k in _SPLIT_KEYS if k in data},
    )
    top = {k: data[k] for k in _TOP_KEYS if k in data}
    if "model_names" in top:
        top["model_names"] = tuple(top["model_names"])
    return ExperimentConfig(train=train, split=split, **top)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"{path}: config must be a JSON object")
    return config_from_dict(data)


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _evaluate_on(spec, params, dataset, indices, batch_size: int):
    """Confusion matrix and both-mode reports over the given indices."""
    idx = np.asarray(indices)
    labels = dataset.labels[idx].astype(np.int64)
    preds = np.empty(idx.size, dtype=np.int64)
    for start in range(0, idx.size, batch_size):
        chunk = idx[start:start + batch_size]
        probs, _ = model_forward(dataset.sequences[chunk], spec, params)
        preds[start:start + chunk.size] = predict_classes(probs)
    cm = confusion_matrix(preds, labels)
    weighted = compute_metrics(cm, "weighted")
    macro = compute_metrics(cm, "macro")
    counts = {label: int(np.sum(labels == int(label))) for label in DamageLabel}
    baseline = majority_baseline(ClassDistribution(counts=counts, total=idx.size))
    return cm, weighted, macro, baseline


def run_experiment(config: ExperimentConfig) -> dict:
    """Train, evaluate, and serialize every selected model; returns the
    manifest that was also written to the output directory."""
    data_dir = Path(config.data_path)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = dataset_io.read_encoded_dataset(data_dir / dataset_io.ENCODED_FILENAME)
    fingerprint = dataset_io.vocab_fingerprint(data_dir / dataset_io.VOCAB_FILENAME)
    _, _, test_idx = split_dataset(len(dataset), config.split)

    def run_one(name: str) -> dict:
        spec = zoo.build_spec(
            name,
            embedding_dim=config.embedding_dim,
            hidden_units=config.hidden_units,
            dense_hidden_units=config.dense_hidden_units,
        )
        model_dir = out_dir / name
        model_dir.mkdir(parents=True, exist_ok=True)
        try:
            params, history = train_model(spec, dataset, config.train, config.split)
        except NumericError as exc:
            return {"name": name, "status": "failed", "error": str(exc)}
        cm, weighted, macro, baseline = _evaluate_on(
            spec, params, dataset, test_idx, config.train.batch_size
        )
        save_checkpoint(params, spec, fingerprint, model_dir / CHECKPOINT_FILENAME)
        (model_dir / HISTORY_FILENAME).write_text(
            history_to_csv(history), encoding="utf-8"
        )
        (model_dir / METRICS_FILENAME).write_text(
            _dump_json(metrics_to_dict(weighted, macro, cm, baseline)),
            encoding="utf-8",
        )
        return {
            "name": name,
            "status": "ok",
            "weighted": weighted,
            "macro": macro,
            "files": [
                f"{name}/{CHECKPOINT_FILENAME}",
                f"{name}/{HISTORY_FILENAME}",
                f"{name}/{METRICS_FILENAME}",
            ],
        }

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            outcomes = list(pool.map(run_one, config.model_names))
    else:
        outcomes = [run_one(name) for name in config.model_names]

    succeeded = [o for o in outcomes if o["status"] == "ok"]
    written: list[str] = [f for o in succeeded for f in o["files"]]
    if succeeded:
        table_text, _ = render_results_table(
            [(o["name"], o["weighted"]) for o in succeeded]
        )
        _, csv_text = render_results_table(
            [(o["name"], o["weighted"]) for o in succeeded]
            + [(o["name"], o["macro"]) for o in succeeded]
        )
        (out_dir / RESULTS_TABLE_FILENAME).write_text(table_text, encoding="utf-8")
        (out_dir / RESULTS_CSV_FILENAME).write_text(csv_text, encoding="utf-8")
        written += [RESULTS_TABLE_FILENAME, RESULTS_CSV_FILENAME]

    manifest = {
        "config": {
            "model_names": list(config.model_names),
            "seed": config.train.seed,
            "epochs": config.train.epochs,
            "batch_size": config.train.batch_size,
            "learning_rate": config.train.learning_rate,
        },
        "vocab_fingerprint": fingerprint,
        "models": {
            o["name"]: (
                {"status": "ok"}
                if o["status"] == "ok"
                else {"status": "failed", "error": o["error"]}
            )
            for o in outcomes
        },
        "files": {
            rel: hashlib.sha256((out_dir / rel).read_bytes()).hexdigest()
            for rel in sorted(written)
        },
    }
    (out_dir / MANIFEST_FILENAME).write_text(_dump_json(manifest), encoding="utf-8")
    return manifest
