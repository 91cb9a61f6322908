"""Stage-1 contrastive alignment of code embeddings with style embeddings.

Positive pairs put a whole file next to one of its own sub-snippets
(function bodies, loop bodies, contiguous comment blocks): pieces of one
file share the file's style. Negatives are implicit: every other row of
the batch, and the batch sampler keeps two pairs of the same file out of
one batch so in-batch negatives really are cross-file.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import analyze, normalize
from .lexer import lex, line_profile
from .nn import (
    CodeTower,
    EncoderModel,
    StyleTower,
    adam_step,
    l2_normalize,
    l2_normalize_backward,
    new_adam_state,
)
from .syntax import block_spans

MIN_SNIPPET_LINES = 3  # non-blank lines


class UnnormalizedInput(ValueError):
    pass


class NonFiniteLoss(RuntimeError):
    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class EmptyHeldout(ValueError):
    pass


class InsufficientSnippets(UserWarning):
    pass


@dataclass(frozen=True)
class ContrastivePair:
    id: str
    file_id: str
    anchor: str       # whole-file source
    positive: str     # style-identical sub-snippet of the same file
    author_id: str | None = None


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    temperature: float = 0.07
    embedding_dim: int = 1024
    lr: float = 1e-3
    seed: int = 0
    symmetric_loss: bool = False

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2")


def extract_snippets(source: str) -> list[str]:
    """Style-identical sub-snippets: def/loop bodies and comment blocks
    of at least MIN_SNIPPET_LINES non-blank lines, in line order."""
    lines = source.splitlines()
    spans: list[tuple[int, int]] = []
    for span in block_spans(source):
        spans.append((span.body_start, span.body_end))
    profile = line_profile(source)
    run_start = None
    for idx, rec in enumerate(profile.lines, start=1):
        if rec.is_comment_only:
            if run_start is None:
                run_start = idx
        else:
            if run_start is not None and idx - run_start >= MIN_SNIPPET_LINES:
                spans.append((run_start, idx - 1))
            run_start = None
    if run_start is not None and profile.total_lines - run_start + 1 >= MIN_SNIPPET_LINES:
        spans.append((run_start, profile.total_lines))

    snippets = []
    for start, end in sorted(set(spans)):
        chunk = lines[start - 1:end]
        if sum(1 for l in chunk if l.strip()) < MIN_SNIPPET_LINES:
            continue
        snippets.append("\n".join(chunk))
    return snippets


def build_pairs(corpus, seed: int = 0, max_pairs_per_file: int | None = None,
                use_code2: bool = True) -> list[ContrastivePair]:
    """One pair per extracted snippet, anchored on the whole file.

    Files with fewer than two extractable snippets are skipped with an
    :class:`InsufficientSnippets` warning. With ``max_pairs_per_file`` the
    kept snippets are sampled without replacement under ``seed``.
    """
    rng = np.random.default_rng(seed)
    pairs: list[ContrastivePair] = []
    for record in corpus.records:
        source = record.code2 if use_code2 else record.code1
        snippets = extract_snippets(source)
        if len(snippets) < 2:
            warnings.warn(
                f"file {record.id!r} has {len(snippets)} extractable snippet(s); skipped",
                InsufficientSnippets,
                stacklevel=2,
            )
            continue
        chosen = list(range(len(snippets)))
        if max_pairs_per_file is not None and len(chosen) > max_pairs_per_file:
            chosen = sorted(rng.choice(len(snippets), max_pairs_per_file, replace=False))
        for i in chosen:
            pairs.append(ContrastivePair(
                id=f"{record.id}:{i}",
                file_id=record.id,
                anchor=source,
                positive=snippets[i],
            ))
    return pairs


def pairs_to_jsonl(pairs: list[ContrastivePair], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps({
                "id": p.id, "file_id": p.file_id,
                "anchor": p.anchor, "positive": p.positive,
            }) + "\n")


def pairs_from_jsonl(path: str | Path) -> list[ContrastivePair]:
    pairs = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            pairs.append(ContrastivePair(
                id=doc["id"], file_id=doc["file_id"],
                anchor=doc["anchor"], positive=doc["positive"],
            ))
    return pairs


def _check_normalized(name: str, x: np.ndarray) -> None:
    norms = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-4):
        raise UnnormalizedInput(f"{name} rows must be L2-normalized")


def info_nce(anchor_emb: np.ndarray, positive_emb: np.ndarray, tau: float,
             symmetric: bool = False) -> float:
    """Batch InfoNCE over cosine similarities.

    Rows must be L2-normalized; similarity is the dot product. Row i's
    positive is ``positive_emb[i]``, everything else in the batch is a
    negative. The symmetric variant averages both directions.
    """
    loss, _, _ = info_nce_with_grad(anchor_emb, positive_emb, tau, symmetric)
    return loss


def info_nce_with_grad(anchor_emb: np.ndarray, positive_emb: np.ndarray,
                       tau: float, symmetric: bool = False):
    """Loss plus gradients with respect to both (normalized) embedding sets."""
    a = np.asarray(anchor_emb, dtype=np.float64)
    p = np.asarray(positive_emb, dtype=np.float64)
    if a.shape != p.shape or a.ndim != 2 or a.shape[0] < 2:
        raise ValueError("expected matching (B>=2, D) embedding matrices")
    _check_normalized("anchor", a)
    _check_normalized("positive", p)
    batch = a.shape[0]

    def one_direction(q, k):
        logits = q @ k.T / tau
        logits -= logits.max(axis=1, keepdims=True)  # stabilized softmax
        exp = np.exp(logits)
        soft = exp / exp.sum(axis=1, keepdims=True)
        loss = -np.mean(np.log(soft[np.arange(batch), np.arange(batch)]))
        dlogits = soft.copy()
        dlogits[np.arange(batch), np.arange(batch)] -= 1.0
        dlogits /= batch
        dq = dlogits @ k / tau
        dk = dlogits.T @ q / tau
        return loss, dq, dk

    loss_ap, da, dp = one_direction(a, p)
    if not symmetric:
        return float(loss_ap), da, dp
    loss_pa, dp2, da2 = one_direction(p, a)
    return (
        float((loss_ap + loss_pa) / 2),
        (da + da2) / 2,
        (dp + dp2) / 2,
    )


@dataclass
class EpochLog:
    epoch: int
    mean_loss: float
    wall_ms: float


def _stratified_batches(pairs: list[ContrastivePair], batch_size: int,
                        rng: np.random.Generator) -> list[list[int]]:
    """Shuffled batches that avoid two pairs of one file per batch."""
    order = list(rng.permutation(len(pairs)))
    batches: list[list[int]] = []
    files: list[set[str]] = []
    for idx in order:
        fid = pairs[idx].file_id
        placed = False
        for batch, fset in zip(batches, files):
            if len(batch) < batch_size and fid not in fset:
                batch.append(idx)
                fset.add(fid)
                placed = True
                break
        if not placed:
            batches.append([idx])
            files.append({fid})
    return [b for b in batches if len(b) >= 2]


def train(pairs: list[ContrastivePair], cfg: TrainConfig,
          checkpoint_path: str | Path | None = None,
          log_path: str | Path | None = None,
          log_fn=None) -> tuple[EncoderModel, list[EpochLog]]:
    """Train both towers with in-batch InfoNCE; deterministic under seed."""
    if len(pairs) < cfg.batch_size:
        raise ValueError(f"need at least {cfg.batch_size} pairs, got {len(pairs)}")
    rng = np.random.default_rng(cfg.seed)
    style = StyleTower(
        seed=cfg.seed, layers=(34, 128, 512, 768, cfg.embedding_dim)
    )
    code = CodeTower(seed=cfg.seed + 1, out_dim=cfg.embedding_dim,
                     hash_seed=cfg.seed)
    model = EncoderModel(style=style, code=code)

    # the expensive analysis happens once per pair, not per epoch
    anchor_ids = [code.bucket_ids(lex(p.anchor, lenient=True)) for p in pairs]
    style_vecs = np.stack([
        np.asarray(normalize(analyze(p.positive)).values, dtype=np.float32)
        for p in pairs
    ])

    opt_style = new_adam_state(style.params)
    opt_code = new_adam_state(code.params)
    logs: list[EpochLog] = []
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        losses = []
        for batch_no, batch in enumerate(_stratified_batches(pairs, cfg.batch_size, rng)):
            ids = [anchor_ids[i] for i in batch]
            svecs = style_vecs[batch]
            code_cache: dict = {}
            style_cache: dict = {}
            code_out = code.forward(ids, code_cache)
            style_out = style.forward(svecs, style_cache)
            a = l2_normalize(code_out.astype(np.float64))
            p = l2_normalize(style_out.astype(np.float64))
            loss, da, dp = info_nce_with_grad(a, p, cfg.temperature,
                                              cfg.symmetric_loss)
            if not math.isfinite(loss):
                raise NonFiniteLoss(epoch, batch_no)
            losses.append(loss)
            dcode = l2_normalize_backward(code_out.astype(np.float64), da)
            dstyle = l2_normalize_backward(style_out.astype(np.float64), dp)
            code_grads = code.backward(code_cache, dcode.astype(np.float32))
            style_grads = style.backward(style_cache, dstyle.astype(np.float32))
            adam_step(code.params, code_grads, opt_code, lr=cfg.lr)
            adam_step(style.params, style_grads, opt_style, lr=cfg.lr)
        wall_ms = (time.perf_counter() - t0) * 1000.0
        entry = EpochLog(epoch=epoch, mean_loss=float(np.mean(losses)),
                         wall_ms=wall_ms)
        logs.append(entry)
        if log_fn is not None:
            log_fn(entry)

    if log_path is not None:
        with Path(log_path).open("w", encoding="utf-8") as fh:
            fh.write("epoch,mean_loss,wall_ms\n")
            for entry in logs:
                fh.write(f"{entry.epoch},{entry.mean_loss!r},{entry.wall_ms:.3f}\n")
    if checkpoint_path is not None:
        from . import checkpoint as ckpt
        ckpt.save(model, checkpoint_path)
    return model, logs


def embed_pairs(model: EncoderModel, pairs: list[ContrastivePair]):
    """L2-normalized (code-anchor, style-positive) embeddings for pairs."""
    anchors = np.stack([
        model.code.embed_source_tokens(lex(p.anchor, lenient=True)) for p in pairs
    ])
    styles = model.style.forward(np.stack([
        np.asarray(normalize(analyze(p.positive)).values, dtype=np.float32)
        for p in pairs
    ]))
    return l2_normalize(anchors.astype(np.float64)), l2_normalize(styles.astype(np.float64))


def recall_at_k(anchor_embs: np.ndarray, style_embs: np.ndarray,
                pair_ids: list[str], k: int) -> float:
    """Fraction of anchors whose own style embedding ranks in the top k
    by cosine; ties break on the stable pair id."""
    if len(pair_ids) == 0:
        raise EmptyHeldout("no held-out pairs")
    sims = anchor_embs @ style_embs.T
    hits = 0
    n = len(pair_ids)
    for i in range(n):
        order = sorted(range(n), key=lambda j: (-sims[i, j], pair_ids[j]))
        if i in order[:k]:
            hits += 1
    return hits / n


def eval_retrieval(model: EncoderModel, heldout_pairs: list[ContrastivePair],
                   k: int) -> float:
    if not heldout_pairs:
        raise EmptyHeldout("no held-out pairs")
    anchors, styles = embed_pairs(model, heldout_pairs)
    return recall_at_k(anchors, styles, [p.id for p in heldout_pairs], k)
