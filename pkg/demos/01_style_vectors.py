#!/usr/bin/env python3
"""Walk through the 34-feature style vector on two small programs.

The same logic written in two habits produces very different vectors in
the naming and layout blocks while the structural block barely moves.
"""

from stylekit import REGISTRY, analyze, normalize
from stylekit.features import LAYOUT_SLICE, NAMING_SLICE, STRUCTURAL_SLICE

SNAKE_STYLE = """\
def moving_average(values, window_size):
    running_total = 0
    averaged = []
    for index, value in enumerate(values):
        running_total += value
        if index >= window_size:
            running_total -= values[index - window_size]
        averaged.append(running_total / min(index + 1, window_size))
    return averaged
"""

CAMEL_STYLE = """\
def movingAverage(values, windowSize):
  runningTotal = 0
  averaged = []
  for idx, val in enumerate(values):
    runningTotal += val
    if idx >= windowSize:
      runningTotal -= values[idx - windowSize]
    averaged.append(runningTotal / min(idx + 1, windowSize))
  return averaged
"""

raw_a = analyze(SNAKE_STYLE)
raw_b = analyze(CAMEL_STYLE)

print("feature".ljust(26), "snake".rjust(10), "camel".rjust(10))
for section, sl in (("naming", NAMING_SLICE), ("layout", LAYOUT_SLICE),
                    ("structural", STRUCTURAL_SLICE)):
    print(f"-- {section} " + "-" * (44 - len(section)))
    for i, name in enumerate(REGISTRY[sl], start=sl.start):
        print(name.ljust(26), f"{raw_a.values[i]:10.4f}", f"{raw_b.values[i]:10.4f}")

vec_a = normalize(raw_a)
vec_b = normalize(raw_b)
print("\nall normalized components lie in [0, 1]:",
      all(0 <= v <= 1 for v in vec_a.values + vec_b.values))
