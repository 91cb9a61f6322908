#!/usr/bin/env python3
"""Train the dual-tower style encoder on a small synthetic corpus.

Thirty files from three style archetypes, a few epochs of in-batch
InfoNCE, then retrieval: each held-out file's code embedding should find
its own sub-snippet's style embedding.

Takes roughly half a minute on one core.
"""

import warnings

import numpy as np

from stylekit import TrainConfig, build_pairs, eval_retrieval, train
from stylekit.contrastive import embed_pairs
from stylekit.corpus import from_sources

import pathlib
import sys
sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tests"))
from archetype_corpus import make_corpus, make_heldout  # noqa: E402

train_files = make_corpus(60, seed=3)
held_files = make_heldout(4, seed=9)

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    train_pairs = build_pairs(from_sources([(f, s) for f, s, _ in train_files]),
                              seed=0, max_pairs_per_file=2)
    held_pairs = build_pairs(from_sources([(f, s) for f, s, _ in held_files]),
                             seed=0, max_pairs_per_file=1)
print(f"training on {len(train_pairs)} pairs, evaluating on {len(held_pairs)}")

cfg = TrainConfig(epochs=15, batch_size=8, temperature=0.07, seed=0)
model, logs = train(train_pairs, cfg,
                    log_fn=lambda e: print(f"  epoch {e.epoch:2d} loss {e.mean_loss:.4f}"))

for k in (1, 2, 5):
    print(f"recall@{k}: {eval_retrieval(model, held_pairs, k):.3f}")

anchors, styles = embed_pairs(model, held_pairs)
kinds = [p.file_id.split("_")[1] for p in held_pairs]
within, cross = [], []
for i in range(len(held_pairs)):
    for j in range(len(held_pairs)):
        if i != j:
            (within if kinds[i] == kinds[j] else cross).append(float(anchors[i] @ styles[j]))
print(f"mean cosine within archetype {np.mean(within):.3f}, across {np.mean(cross):.3f}")
