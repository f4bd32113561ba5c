#!/usr/bin/env python3
"""Walkthrough: loading a corpus, filtering, and reading its class balance.

Uses the bundled 200-record synthetic corpus, which mimics the real-world
damage-level imbalance (about 90% substantial damage).
"""

import json
import tempfile
from importlib import resources
from pathlib import Path

from narrative_seq import (
    class_distribution,
    filter_completed,
    load_reports,
    majority_baseline,
    map_damage_label,
)

# The bundled fixture ships inside the package; copy it somewhere visible so
# the script mirrors real usage of load_reports on a file path.
fixture = (resources.files("narrative_seq.data") / "fixture_corpus.json").read_text()
corpus_path = Path(tempfile.mkdtemp()) / "corpus.json"
corpus_path.write_text(fixture, encoding="utf-8")

result = load_reports(corpus_path, "json")
print(f"loaded {len(result.records)} records, {len(result.warnings)} warnings")

records = filter_completed(result.records)
print(f"{len(records)} records remain after the completed-investigation filter")

print("\nfirst narrative:")
print(" ", records[0].narrative)
print("  label:", records[0].damage_level.display_name)

dist = class_distribution(records)
print("\nclass distribution:")
for label, count in dist.counts.items():
    print(f"  {label.display_name:<12} {count:>4}  ({count / dist.total:.1%})")

# The imbalance makes always-predicting the majority class deceptively
# strong; every model comparison should be read against this floor.
print(f"\nmajority-class baseline accuracy: {majority_baseline(dist):.4f}")

# Raw exports use assorted spellings for the damage field; the synonym
# mapping canonicalizes them (and reports no-matches as None).
for raw in ("Substantial", "dstr", "NONE REPORTED", "catastrophic"):
    print(f"map_damage_label({raw!r}) -> {map_damage_label(raw)}")

print("\ndistribution as JSON:")
print(json.dumps(dist.to_dict(), indent=2))
