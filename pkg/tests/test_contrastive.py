from __future__ import annotations

import math

import numpy as np
import pytest

from stylekit.contrastive import (
    ContrastivePair,
    EmptyHeldout,
    InsufficientSnippets,
    NonFiniteLoss,
    TrainConfig,
    UnnormalizedInput,
    build_pairs,
    embed_pairs,
    eval_retrieval,
    extract_snippets,
    info_nce,
    info_nce_with_grad,
    pairs_from_jsonl,
    pairs_to_jsonl,
    recall_at_k,
    train,
)
from stylekit.corpus import from_sources
from stylekit.nn import l2_normalize

THREE_FUNCS = (
    "def a(x):\n    u = x + 1\n    v = u * 2\n    return v\n"
    "\n"
    "def b(y):\n    p = y - 1\n    q = p * 3\n    return q\n"
    "\n"
    "def c(z):\n    r = z * z\n    s = r + 4\n    return s\n"
)


def unit_rows(rng, shape):
    return l2_normalize(rng.standard_normal(shape))


# -- snippets / pairs ----------------------------------------------------------


def test_extract_snippets_function_bodies():
    snippets = extract_snippets(THREE_FUNCS)
    assert len(snippets) == 3
    assert all(s.lstrip().startswith(("u =", "p =", "r =")) for s in snippets)


def test_extract_snippets_loop_body_and_comment_block():
    src = (
        "# one\n# two\n# three\n"
        "for i in range(10):\n"
        "    a = i + 1\n"
        "    b = a * 2\n"
        "    print(b)\n"
    )
    snippets = extract_snippets(src)
    assert any("# one" in s for s in snippets)
    assert any("a = i + 1" in s for s in snippets)


def test_extract_snippets_minimum_three_nonblank_lines():
    src = "def tiny(x):\n    return x\n"
    assert extract_snippets(src) == []


def test_build_pairs_one_per_snippet():
    corp = from_sources([("f1", THREE_FUNCS)])
    pairs = build_pairs(corp)
    assert len(pairs) == 3
    assert {p.file_id for p in pairs} == {"f1"}
    assert [p.id for p in pairs] == ["f1:0", "f1:1", "f1:2"]
    assert all(p.anchor == THREE_FUNCS for p in pairs)


def test_build_pairs_skips_thin_files_with_warning():
    corp = from_sources([("thin", "x = 1\n"), ("ok", THREE_FUNCS)])
    with pytest.warns(InsufficientSnippets):
        pairs = build_pairs(corp)
    assert {p.file_id for p in pairs} == {"ok"}


def test_build_pairs_deterministic_under_seed():
    corp = from_sources([("f1", THREE_FUNCS), ("f2", THREE_FUNCS.replace("x", "w"))])
    a = build_pairs(corp, seed=3, max_pairs_per_file=2)
    b = build_pairs(corp, seed=3, max_pairs_per_file=2)
    assert a == b
    c = build_pairs(corp, seed=4, max_pairs_per_file=2)
    assert [p.id for p in c] != [p.id for p in a] or a == c


def test_pairs_jsonl_round_trip(tmp_path):
    corp = from_sources([("f1", THREE_FUNCS)])
    pairs = build_pairs(corp)
    path = tmp_path / "pairs.jsonl"
    pairs_to_jsonl(pairs, path)
    assert pairs_from_jsonl(path) == pairs


# -- info_nce -------------------------------------------------------------------


def test_info_nce_uniform_batch_is_log_b():
    anchor = np.tile(l2_normalize(np.ones((1, 8))), (16, 1))
    positive = anchor.copy()
    assert info_nce(anchor, positive, tau=0.07) == pytest.approx(math.log(16), abs=1e-9)


def test_info_nce_b2_hand_case():
    anchor = np.eye(2)
    positive = np.eye(2)
    # sim(z, z+) = 1, sim(z, z-) = 0, tau = 1 -> -log(e / (e + 1))
    assert info_nce(anchor, positive, tau=1.0) == pytest.approx(0.313262, abs=1e-6)


def test_info_nce_hard_max_limit():
    anchor = np.eye(2)
    positive = np.eye(2)
    assert info_nce(anchor, positive, tau=1e-3) == pytest.approx(0.0, abs=1e-9)


def test_info_nce_requires_normalized_rows():
    rng = np.random.default_rng(0)
    bad = rng.standard_normal((4, 8)) * 3
    good = unit_rows(rng, (4, 8))
    with pytest.raises(UnnormalizedInput):
        info_nce(bad, good, tau=0.07)
    with pytest.raises(UnnormalizedInput):
        info_nce(good, bad, tau=0.07)


def test_info_nce_batch_of_one_rejected():
    with pytest.raises(ValueError):
        info_nce(np.ones((1, 4)) / 2, np.ones((1, 4)) / 2, tau=1.0)


def test_info_nce_non_negative():
    rng = np.random.default_rng(1)
    for _ in range(25):
        a = unit_rows(rng, (6, 16))
        p = unit_rows(rng, (6, 16))
        assert info_nce(a, p, tau=0.07) >= 0.0


def test_info_nce_rotation_invariant():
    rng = np.random.default_rng(2)
    a = unit_rows(rng, (8, 32))
    p = unit_rows(rng, (8, 32))
    q, _ = np.linalg.qr(rng.standard_normal((32, 32)))
    base = info_nce(a, p, tau=0.07)
    rotated = info_nce(a @ q, p @ q, tau=0.07)
    assert rotated == pytest.approx(base, abs=1e-9)


def test_info_nce_symmetric_mode_averages_directions():
    rng = np.random.default_rng(3)
    a = unit_rows(rng, (5, 12))
    p = unit_rows(rng, (5, 12))
    sym = info_nce(a, p, tau=0.5, symmetric=True)
    assert sym == pytest.approx(
        (info_nce(a, p, tau=0.5) + info_nce(p, a, tau=0.5)) / 2, abs=1e-12
    )


def test_info_nce_gradients_match_finite_differences():
    # the gradients treat the (normalized) inputs as free variables, so a
    # tiny raw perturbation (well inside the 1e-4 norm tolerance) checks
    # them directly
    rng = np.random.default_rng(4)
    a = l2_normalize(rng.standard_normal((3, 6)))
    p = l2_normalize(rng.standard_normal((3, 6)))
    _, da, dp = info_nce_with_grad(a, p, tau=0.3)
    h = 1e-6
    for mat, grad, is_anchor in ((a, da, True), (p, dp, False)):
        for i in range(3):
            for j in range(6):
                plus, minus = mat.copy(), mat.copy()
                plus[i, j] += h
                minus[i, j] -= h
                if is_anchor:
                    num = (info_nce(plus, p, tau=0.3) - info_nce(minus, p, tau=0.3)) / (2 * h)
                else:
                    num = (info_nce(a, plus, tau=0.3) - info_nce(a, minus, tau=0.3)) / (2 * h)
                assert num == pytest.approx(grad[i, j], abs=1e-5)


# -- training -----------------------------------------------------------------


def tiny_pairs(n_files=8):
    from archetype_corpus import make_corpus

    sources = [(fid, src) for fid, src, _ in make_corpus(n_files, seed=0)]
    return build_pairs(from_sources(sources), seed=0, max_pairs_per_file=3)


def test_train_loss_decreases_on_tiny_corpus():
    pairs = tiny_pairs()
    cfg = TrainConfig(epochs=4, batch_size=4, seed=0)
    _, logs = train(pairs, cfg)
    assert logs[-1].mean_loss < logs[0].mean_loss


def test_train_duplicate_pair_floor():
    # one pair repeated across the whole batch: every candidate equals the
    # positive, so the softmax stays uniform and the loss is ln(B) forever
    base = tiny_pairs(2)[0]
    pairs = [
        ContrastivePair(id=f"d{i}", file_id=f"f{i}", anchor=base.anchor,
                        positive=base.positive)
        for i in range(8)
    ]
    cfg = TrainConfig(epochs=2, batch_size=8, seed=0)
    _, logs = train(pairs, cfg)
    assert logs[-1].mean_loss >= math.log(8) - 1e-6


def test_train_deterministic_checkpoints(tmp_path):
    pairs = tiny_pairs()
    cfg = TrainConfig(epochs=2, batch_size=4, seed=11)
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    train(pairs, cfg, checkpoint_path=p1)
    train(pairs, cfg, checkpoint_path=p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_train_writes_log_csv(tmp_path):
    pairs = tiny_pairs()
    log = tmp_path / "log.csv"
    train(pairs, TrainConfig(epochs=2, batch_size=4, seed=0), log_path=log)
    lines = log.read_text().splitlines()
    assert lines[0] == "epoch,mean_loss,wall_ms"
    assert len(lines) == 3


def test_train_needs_enough_pairs():
    with pytest.raises(ValueError):
        train(tiny_pairs(2)[:3], TrainConfig(epochs=1, batch_size=16, seed=0))


def test_train_batches_avoid_same_file():
    from stylekit.contrastive import _stratified_batches

    pairs = tiny_pairs(6)  # 3 pairs per file
    rng = np.random.default_rng(0)
    for batch in _stratified_batches(pairs, 4, rng):
        files = [pairs[i].file_id for i in batch]
        assert len(files) == len(set(files))


def test_training_does_not_change_analyzer_outputs():
    from stylekit.features import analyze, to_json

    src = THREE_FUNCS
    before = to_json(analyze(src))
    train(tiny_pairs(), TrainConfig(epochs=1, batch_size=4, seed=0))
    assert to_json(analyze(src)) == before


# -- retrieval ------------------------------------------------------------------


def test_recall_perfect_when_positives_equal_anchors():
    rng = np.random.default_rng(5)
    embs = unit_rows(rng, (12, 16))
    ids = [f"p{i}" for i in range(12)]
    assert recall_at_k(embs, embs.copy(), ids, 1) == 1.0


def test_recall_at_n_is_one():
    rng = np.random.default_rng(6)
    a = unit_rows(rng, (9, 8))
    s = unit_rows(rng, (9, 8))
    assert recall_at_k(a, s, [f"p{i}" for i in range(9)], 9) == 1.0


def test_recall_monotone_in_k():
    rng = np.random.default_rng(7)
    a = unit_rows(rng, (15, 8))
    s = unit_rows(rng, (15, 8))
    ids = [f"p{i}" for i in range(15)]
    values = [recall_at_k(a, s, ids, k) for k in range(1, 16)]
    assert values == sorted(values)
    assert values[-1] == 1.0


def test_recall_random_embeddings_expectation():
    # with random frozen embeddings recall@1 concentrates near 1/N
    rng = np.random.default_rng(8)
    n = 20
    total = 0.0
    runs = 60
    for _ in range(runs):
        a = unit_rows(rng, (n, 32))
        s = unit_rows(rng, (n, 32))
        total += recall_at_k(a, s, [f"p{i}" for i in range(n)], 1)
    mean = total / runs
    assert 0.2 / n < mean < 3.0 / n


def test_eval_retrieval_empty_heldout():
    pairs = tiny_pairs(2)
    model, _ = train(pairs, TrainConfig(epochs=1, batch_size=4, seed=0))
    with pytest.raises(EmptyHeldout):
        eval_retrieval(model, [], 1)


def test_eval_retrieval_runs_end_to_end():
    pairs = tiny_pairs(6)
    model, _ = train(pairs, TrainConfig(epochs=1, batch_size=4, seed=0))
    value = eval_retrieval(model, pairs[:6], 3)
    assert 0.0 <= value <= 1.0
