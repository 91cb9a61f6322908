#!/usr/bin/env python3
"""Run the dataset pipeline end to end on an in-memory JSONL corpus.

Shows the token-cap filter, style-keyed deduplication, the manifest
reconciliation, seeded splits, and the style-vector cache.
"""

import json
import tempfile
from pathlib import Path

from stylekit.corpus import ingest, precompute_styles, split, token_count

records = [
    {"id": "keep-a", "code1": "def f(x): return x",
     "code2": "def pick_first(items):\n    return items[0]"},
    {"id": "keep-b", "code1": "def f(x): return x",
     "code2": "def pickFirst(items):\n  return items[0]"},
    # byte-identical style side: dropped as a duplicate
    {"id": "dupe", "code1": "def g(x): return x",
     "code2": "def pick_first(items):\n    return items[0]"},
    # over the token cap: dropped by length filtering
    {"id": "long", "code1": "x = 1",
     "code2": " ".join(f"tok{i}" for i in range(500))},
]

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "pairs.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in records))

    corpus = ingest(path, max_tokens=378)
    print("token counts:", {r["id"]: token_count(r["code2"]) for r in records})
    print("kept:", [r.id for r in corpus.records])
    print("manifest counts:", corpus.manifest.counts)

    corpus = split(corpus, {"train": 0.5, "valid": 0.5}, seed=1)
    print("splits:", corpus.manifest.splits)

    corpus = precompute_styles(corpus)
    cached = corpus.records[0].style_vec
    print("cached style vector for", corpus.records[0].id,
          "->", [round(v, 3) for v in cached.values[:5]], "...")
    again = precompute_styles(corpus)
    print("precompute idempotent:",
          all(a.style_vec == b.style_vec
              for a, b in zip(corpus.records, again.records)))
