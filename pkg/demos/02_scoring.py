#!/usr/bin/env python3
"""Score a generated candidate against a style reference.

CSS reads only the 14 naming features; BLEU/ROUGE read lexer tokens, so
whitespace layout does not move them; the style loss reads all 34
normalized features.
"""

from stylekit import analyze, bleu4, css, normalize, rouge, score, style_loss, total_loss
from stylekit.metrics import LossConfig

REFERENCE = """\
def clamp_value(value, lower_bound, upper_bound):
    if value < lower_bound:
        return lower_bound
    if value > upper_bound:
        return upper_bound
    return value
"""

CANDIDATE = """\
def clampValue(value, lowerBound, upperBound):
    if value < lowerBound:
        return lowerBound
    if value > upperBound:
        return upperBound
    return value
"""

report = score(CANDIDATE, REFERENCE)
print("css       ", f"{report.css:.4f}   (naming agreement)")
print("bleu4     ", f"{report.bleu4:.4f}")
for name, r in (("rouge1", report.rouge1), ("rouge2", report.rouge2),
                ("rougeL", report.rougeL)):
    print(f"{name:10s} p={r.precision:.4f} r={r.recall:.4f} f1={r.f1:.4f}")
print("style_loss", f"{report.style_loss:.6f}")

# the candidate against itself is a perfect score on every axis
self_report = score(REFERENCE, REFERENCE)
assert self_report.css == 1.0 and self_report.style_loss == 0.0

# combine an external cross-entropy with the style penalty
target = normalize(analyze(REFERENCE))
print("\ntotal loss at lambda=0.1:",
      total_loss(2.0, style_loss(CANDIDATE, target), LossConfig(0.1)))

# layout-insensitivity of the n-gram metrics
reindented = CANDIDATE.replace("    ", "\t")
print("bleu4 after reindent:", f"{bleu4(reindented, CANDIDATE):.4f}")
print("rougeL after reindent:", f"{rouge(reindented, CANDIDATE, 'RL').f1:.4f}")
print("css after reindent:",
      f"{css(normalize(analyze(reindented)), normalize(analyze(CANDIDATE))):.4f}")
