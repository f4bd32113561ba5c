import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from narrative_seq import harness
from narrative_seq.errors import DataError, NumericError
from narrative_seq.harness import ExperimentConfig, config_from_dict, run_experiment
from narrative_seq.training import SplitSpec, TrainConfig, split_dataset

SMALL = dict(embedding_dim=8, hidden_units=8, dense_hidden_units=8)


def _config(data_dir, out_dir, models=("sRNN", "GRU"), **extra):
    merged = {
        "data_path": str(data_dir),
        "output_dir": str(out_dir),
        "model_names": list(models),
        "epochs": 2,
        "seed": 11,
        **SMALL,
        **extra,
    }
    return config_from_dict(merged)


class TestConfig:
    def test_defaults(self):
        config = config_from_dict({"data_path": "x", "output_dir": "y"})
        assert config.model_names == tuple(
            ["LSTM", "BLSTM", "sRNN", "GRU", "GRU-LSTM", "GRU-BLSTM",
             "sRNN-BLSTM", "sRNN-LSTM", "GRU-BLSTM-sRNN", "GRU-LSTM-sRNN"]
        )
        assert config.train.epochs == 10
        assert config.split.test_fraction == 0.20
        assert config.seq_len == 2000
        assert config.vocab_size == 100_000

    def test_seed_reaches_both_train_and_split(self):
        config = config_from_dict({"seed": 42})
        assert config.train.seed == 42
        assert config.split.seed == 42

    def test_unknown_keys_rejected(self):
        with pytest.raises(DataError, match="optimiser"):
            config_from_dict({"optimiser": "sgd"})

    def test_unknown_model_rejected(self):
        with pytest.raises(DataError, match="CNN"):
            config_from_dict({"model_names": ["CNN"]})

    def test_empty_model_list_rejected(self):
        with pytest.raises(DataError):
            config_from_dict({"model_names": []})

    def test_load_config_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"epochs": 3, "model_names": ["LSTM"]}))
        config = harness.load_config(path)
        assert config.train.epochs == 3
        assert config.model_names == ("LSTM",)


class TestRunExperiment:
    def test_single_model_manifest(self, encoded_fixture_dir, tmp_path):
        config = _config(encoded_fixture_dir, tmp_path / "out", models=("LSTM",))
        manifest = run_experiment(config)
        assert set(manifest["models"]) == {"LSTM"}
        assert manifest["models"]["LSTM"]["status"] == "ok"
        files = set(manifest["files"])
        assert files == {
            "LSTM/checkpoint.nsck",
            "LSTM/history.csv",
            "LSTM/metrics.json",
            "results_table.txt",
            "results.csv",
        }

    def test_artifacts_and_hashes(self, encoded_fixture_dir, tmp_path):
        out = tmp_path / "out"
        config = _config(encoded_fixture_dir, out)
        manifest = run_experiment(config)
        for rel, digest in manifest["files"].items():
            blob = (out / rel).read_bytes()
            assert hashlib.sha256(blob).hexdigest() == digest
        written = json.loads((out / "manifest.json").read_text())
        assert written == manifest

    def test_metrics_in_range_and_both_modes(self, encoded_fixture_dir, tmp_path):
        out = tmp_path / "out"
        run_experiment(_config(encoded_fixture_dir, out, models=("GRU",)))
        payload = json.loads((out / "GRU" / "metrics.json").read_text())
        assert 0.0 <= payload["accuracy"] <= 1.0
        assert set(payload["aggregates"]) == {"weighted", "macro"}
        assert 0.0 <= payload["majority_baseline"] <= 1.0
        assert len(payload["confusion"]) == 4

    def test_results_table_in_zoo_order(self, encoded_fixture_dir, tmp_path):
        out = tmp_path / "out"
        run_experiment(_config(encoded_fixture_dir, out, models=("sRNN", "GRU")))
        lines = (out / "results_table.txt").read_text().splitlines()
        names = [line.split()[0] for line in lines[2:]]
        assert names == ["sRNN", "GRU"]

    def test_history_rows_match_epochs(self, encoded_fixture_dir, tmp_path):
        out = tmp_path / "out"
        run_experiment(_config(encoded_fixture_dir, out, models=("sRNN",), epochs=3))
        rows = (out / "sRNN" / "history.csv").read_text().strip().splitlines()
        assert len(rows) == 4  # header + one per epoch

    def test_paired_split_across_models(self, encoded_fixture_dir):
        # Identical SplitSpec means identical index sets for every model.
        config = _config(encoded_fixture_dir, "unused")
        n = 200
        first = split_dataset(n, config.split)
        second = split_dataset(n, config.split)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_failure_isolation(self, encoded_fixture_dir, tmp_path, monkeypatch):
        real_train = harness.train_model

        def flaky(spec, dataset, config, split, record_history=True):
            if spec.name == "GRU":
                raise NumericError("non-finite loss at epoch 1, batch 1 (injected)")
            return real_train(spec, dataset, config, split, record_history)

        monkeypatch.setattr(harness, "train_model", flaky)
        out = tmp_path / "out"
        manifest = run_experiment(_config(encoded_fixture_dir, out))
        assert manifest["models"]["GRU"]["status"] == "failed"
        assert "injected" in manifest["models"]["GRU"]["error"]
        assert manifest["models"]["sRNN"]["status"] == "ok"
        table = (out / "results_table.txt").read_text()
        assert "sRNN" in table and "GRU" not in table

    def test_parallel_run_matches_serial(self, encoded_fixture_dir, tmp_path):
        serial_out = tmp_path / "serial"
        parallel_out = tmp_path / "parallel"
        run_experiment(_config(encoded_fixture_dir, serial_out))
        run_experiment(_config(encoded_fixture_dir, parallel_out, parallelism=2))
        for rel in ("sRNN/metrics.json", "GRU/metrics.json", "results.csv"):
            assert (serial_out / rel).read_bytes() == (parallel_out / rel).read_bytes()

    def test_missing_dataset_is_data_error(self, tmp_path):
        config = _config(tmp_path / "nowhere", tmp_path / "out", models=("LSTM",))
        with pytest.raises(DataError):
            run_experiment(config)
