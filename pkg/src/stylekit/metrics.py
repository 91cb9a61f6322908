"""Scoring: code style similarity, style loss, and n-gram overlap metrics.

Both BLEU and ROUGE tokenize through the code lexer (comments kept,
synthetic whitespace tokens dropped), so the scores are insensitive to
whitespace layout; layout fidelity is what CSS and the style loss are
for.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .features import NAMING_SLICE, SchemaMismatch, StyleVector, analyze, normalize
from .lexer import lex


class EmptyInput(ValueError):
    pass


class NonFiniteInput(ValueError):
    pass


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricReport:
    css: float
    bleu4: float
    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    style_loss: float

    def as_dict(self) -> dict:
        return {
            "css": self.css,
            "bleu4": self.bleu4,
            "rouge1": vars(self.rouge1).copy(),
            "rouge2": vars(self.rouge2).copy(),
            "rougeL": vars(self.rougeL).copy(),
            "style_loss": self.style_loss,
        }


@dataclass(frozen=True)
class LossConfig:
    weight: float = 0.1  # the style-term multiplier

    def __post_init__(self):
        if not math.isfinite(self.weight) or self.weight < 0:
            raise ValueError("style weight must be finite and non-negative")


def css(a: StyleVector, b: StyleVector) -> float:
    """Code Style Similarity: mean absolute agreement over the 14 naming
    features, 1 - L1/14. Symmetric, bounded to [0, 1]."""
    if a.schema != b.schema:
        raise SchemaMismatch(f"{a.schema!r} vs {b.schema!r}")
    diffs = [
        abs(x - y) for x, y in zip(a.values[NAMING_SLICE], b.values[NAMING_SLICE])
    ]
    return 1.0 - sum(diffs) / len(diffs)


def style_loss(candidate_source: str, target: StyleVector) -> float:
    """Mean squared error between the candidate's normalized style vector
    and the target vector, over all 34 dimensions."""
    vec = normalize(analyze(candidate_source))
    if vec.schema != target.schema:
        raise SchemaMismatch(f"{vec.schema!r} vs {target.schema!r}")
    return sum((x - y) ** 2 for x, y in zip(vec.values, target.values)) / len(vec.values)


def total_loss(ce: float, style: float, cfg: LossConfig = LossConfig()) -> float:
    """Weighted training objective: cross-entropy plus weight * style term."""
    if not (math.isfinite(ce) and math.isfinite(style)):
        raise NonFiniteInput(f"ce={ce!r} style={style!r}")
    return ce + cfg.weight * style


def metric_tokens(source: str) -> list[str]:
    """Token texts as scored by BLEU/ROUGE: lexed, comments kept,
    Newline/Indent/Dedent dropped."""
    return [t.text for t in lex(source, lenient=True) if not t.is_synthetic()]


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: str, reference: str) -> float:
    """Geometric mean of modified 1..4-gram precisions with brevity penalty.

    A zero match count at order n >= 2 is smoothed to
    1 / (2 * hypothesis n-gram count); a zero unigram precision stays
    zero, so token-disjoint pairs score 0.0.
    """
    cand = metric_tokens(candidate)
    ref = metric_tokens(reference)
    if not cand or not ref:
        raise EmptyInput("bleu4 needs non-empty token streams")
    log_sum = 0.0
    for n in range(1, 5):
        cand_ngrams = _ngrams(cand, n)
        total = sum(cand_ngrams.values())
        if total == 0:
            return 0.0  # candidate shorter than n tokens
        ref_ngrams = _ngrams(ref, n)
        clipped = sum(min(c, ref_ngrams[g]) for g, c in cand_ngrams.items())
        if clipped == 0:
            if n == 1:
                return 0.0
            precision = 1.0 / (2.0 * total)
        else:
            precision = clipped / total
        log_sum += math.log(precision)
    bp = 1.0 if len(cand) > len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return bp * math.exp(log_sum / 4.0)


def _prf(overlap: float, cand_total: int, ref_total: int) -> RougeScore:
    p = overlap / cand_total if cand_total else 0.0
    r = overlap / ref_total if ref_total else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeScore(precision=p, recall=r, f1=f1)


def lcs_length(a: list[str], b: list[str]) -> int:
    """Longest common subsequence length (dynamic program, O(len*len))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge(candidate: str, reference: str, variant: str) -> RougeScore:
    """ROUGE-1 / ROUGE-2 n-gram overlap, or ROUGE-L via LCS.

    ``variant`` is one of ``"R1"``, ``"R2"``, ``"RL"``.
    """
    cand = metric_tokens(candidate)
    ref = metric_tokens(reference)
    if not cand or not ref:
        raise EmptyInput("rouge needs non-empty token streams")
    if variant == "RL":
        lcs = lcs_length(cand, ref)
        return _prf(lcs, len(cand), len(ref))
    n = {"R1": 1, "R2": 2}.get(variant)
    if n is None:
        raise ValueError(f"unknown rouge variant {variant!r}")
    cand_ngrams = _ngrams(cand, n)
    ref_ngrams = _ngrams(ref, n)
    overlap = sum(min(c, ref_ngrams[g]) for g, c in cand_ngrams.items())
    return _prf(overlap, sum(cand_ngrams.values()), sum(ref_ngrams.values()))


def score(candidate: str, reference: str) -> MetricReport:
    """Full report for a candidate-reference pair: CSS and style loss are
    measured against the reference's style vector."""
    target = normalize(analyze(reference))
    cand_vec = normalize(analyze(candidate))
    return MetricReport(
        css=css(cand_vec, target),
        bleu4=bleu4(candidate, reference),
        rouge1=rouge(candidate, reference, "R1"),
        rouge2=rouge(candidate, reference, "R2"),
        rougeL=rouge(candidate, reference, "RL"),
        style_loss=style_loss(candidate, target),
    )
