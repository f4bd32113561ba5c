import json
from pathlib import Path

import pytest

from narrative_seq import dataset_io
from narrative_seq.text_pipeline import preprocess_corpus
from narrative_seq.synthetic import generate_fixture_corpus


@pytest.fixture(scope="session")
def fixture_records():
    return generate_fixture_corpus()


@pytest.fixture(scope="session")
def encoded_fixture_dir(tmp_path_factory, fixture_records):
    """The bundled 200-record corpus preprocessed at desk scale."""
    out = tmp_path_factory.mktemp("encoded_fixture")
    sequences, labels, vocab = preprocess_corpus(
        fixture_records, vocab_size=500, seq_len=24
    )
    dataset = dataset_io.EncodedDataset(
        sequences=sequences, labels=labels, vocab_size=vocab.size
    )
    dataset_io.write_encoded_dataset(out / dataset_io.ENCODED_FILENAME, dataset)
    dataset_io.write_vocab_sidecar(out / dataset_io.VOCAB_FILENAME, vocab)
    return out


@pytest.fixture()
def corpus_json(tmp_path):
    """Write a small schema-conformant corpus file and return its path."""

    def _write(entries, name="corpus.json"):
        path = tmp_path / name
        path.write_text(json.dumps(entries), encoding="utf-8")
        return path

    return _write
