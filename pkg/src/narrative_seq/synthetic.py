"""Synthetic corpora for tests, demos, and the bundled fixture.

The fixture corpus mimics the published NTSB 2005-2020 completed-
investigation damage distribution at 200-record scale; the full-size
distribution is also available for baseline arithmetic. The separable
dataset gives every class an unmistakable keyword signature so any
architecture in the zoo can drive its training accuracy to 1.0.
"""

from __future__ import annotations

import json
from typing import Mapping

import numpy as np

from .corpus_ingest import DamageLabel, OccurrenceRecord
from .dataset_io import EncodedDataset
from .tensor_core import SeededRng
from .text_pipeline import Vocabulary, build_vocabulary, encode_sequence

# Completed-investigation damage counts in the NTSB corpus, 2005-2020.
NTSB_2005_2020_DAMAGE_COUNTS: Mapping[DamageLabel, int] = {
    DamageLabel.DESTROYED: 1409,
    DamageLabel.SUBSTANTIAL: 15163,
    DamageLabel.MINOR: 195,
    DamageLabel.NO_DAMAGE: 152,
}

# 200-record scaling of the ratios above, used by the bundled fixture.
FIXTURE_COUNTS: Mapping[DamageLabel, int] = {
    DamageLabel.DESTROYED: 17,
    DamageLabel.SUBSTANTIAL: 179,
    DamageLabel.MINOR: 2,
    DamageLabel.NO_DAMAGE: 2,
}
FIXTURE_SEED = 7041

_OPENINGS = (
    "during a local flight the pilot",
    "while on final approach the pilot",
    "shortly after takeoff the crew",
    "during the landing roll the pilot",
    "on the cross country leg the pilot",
    "while taxiing to the ramp the crew",
)

_EVENTS: Mapping[DamageLabel, tuple[str, ...]] = {
    DamageLabel.DESTROYED: (
        "lost control and the airplane impacted terrain and burned",
        "reported a fire that consumed the fuselage after impact",
        "experienced an inflight breakup and the wreckage was destroyed",
        "collided with trees and the airplane was destroyed by postimpact fire",
    ),
    DamageLabel.SUBSTANTIAL: (
        "landed hard and the firewall sustained substantial damage",
        "veered off the runway and the left wing spar was substantially damaged",
        "experienced a gear collapse resulting in substantial damage to the fuselage",
        "struck a fence and the horizontal stabilizer was substantially damaged",
    ),
    DamageLabel.MINOR: (
        "bounced on touchdown causing minor skin wrinkling on the cowling",
        "clipped a taxiway light leaving minor scratches on the propeller",
        "rolled into a ditch causing minor abrasion to the wingtip",
        "contacted a hangar door leaving minor dents on the elevator",
    ),
    DamageLabel.NO_DAMAGE: (
        "executed a precautionary landing and the airplane was undamaged",
        "returned to the departure airport with no damage reported",
        "stopped on the remaining runway with no damage to the airframe",
        "shut down normally and inspection found no damage",
    ),
}

_CLOSINGS = (
    "the pilot was not injured",
    "weather was not a factor",
    "the engine examination revealed no anomalies",
    "a witness observed the sequence of events",
    "fuel contamination was ruled out",
)


def make_synthetic_corpus(counts: Mapping[DamageLabel, int],
                          seed: int) -> list[OccurrenceRecord]:
    """Generate completed-investigation records with the given class counts.

    Narratives are template-sampled per class; record order is a seeded
    shuffle so classes are interleaved the way a real export would be.
    """
    rng = SeededRng(seed, 1)
    records: list[OccurrenceRecord] = []
    for label in DamageLabel:
        events = _EVENTS[label]
        for i in range(counts.get(label, 0)):
            opening = _OPENINGS[int(rng.integers(0, len(_OPENINGS)))]
            event = events[int(rng.integers(0, len(events)))]
            closing = _CLOSINGS[int(rng.integers(0, len(_CLOSINGS)))]
            records.append(
                OccurrenceRecord(
                    report_id=f"SYN-{int(label)}-{i:05d}",
                    narrative=f"{opening} {event}. {closing}.",
                    damage_level=label,
                    investigation_complete=True,
                )
            )
    order = SeededRng(seed, 2).permutation(len(records))
    return [records[i] for i in order]


def generate_fixture_corpus() -> list[OccurrenceRecord]:
    """The bundled 200-record corpus, regenerated deterministically."""
    return make_synthetic_corpus(FIXTURE_COUNTS, FIXTURE_SEED)


def records_to_json(records: list[OccurrenceRecord]) -> str:
    """Serialize records in the normalized corpus JSON schema."""
    payload = [
        {
            "report_id": r.report_id,
            "narrative": r.narrative,
            "damage_level": r.damage_level.display_name,
            "investigation_complete": r.investigation_complete,
        }
        for r in records
    ]
    return json.dumps(payload, ensure_ascii=True, indent=2) + "\n"


_SEPARABLE_KEYWORDS = ("wreckage", "spar", "scratch", "pristine")
_SEPARABLE_FILLERS = ("aircraft", "runway", "pilot", "engine")


def separable_dataset(records_per_class: int = 8, seq_len: int = 16,
                      keyword_repeats: int = 6) -> tuple[EncodedDataset, Vocabulary]:
    """Trivially separable encoded dataset: class k's sequences are
    dominated by keyword k, with rotating filler tokens for variety."""
    token_lists: list[list[str]] = []
    labels: list[int] = []
    for code, keyword in enumerate(_SEPARABLE_KEYWORDS):
        for i in range(records_per_class):
            filler = _SEPARABLE_FILLERS[i % len(_SEPARABLE_FILLERS)]
            tokens = [keyword] * keyword_repeats + [filler] * (i % 3 + 1)
            token_lists.append(tokens)
            labels.append(code)
    vocab = build_vocabulary(token_lists)
    sequences = np.stack(
        [encode_sequence(tokens, vocab, length=seq_len) for tokens in token_lists]
    )
    dataset = EncodedDataset(
        sequences=sequences,
        labels=np.array(labels, dtype=np.uint8),
        vocab_size=vocab.size,
    )
    return dataset, vocab
