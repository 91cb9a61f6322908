"""The 34-dimensional explicit style vector.

Feature registry order is fixed: naming features occupy indices 0..13,
spacing/layout features 14..22, structural features 23..33. The registry,
the normalization caps, and the ``SCHEMA`` tag version together; any
change to one of them is a schema change.

Definitions that the one-line feature names leave open are pinned here:

* Identifiers are collected at definition and binding sites (function and
  class names, parameters, assignment/loop/``as`` targets), one entry per
  distinct name.
* Boolean-sounding features are fractions in [0, 1] so they aggregate
  over whole files.
* ``symbol_ratio`` is punctuation density over the whole source; valid
  identifiers contain no symbols, so a per-identifier reading would be
  degenerate.
* ``type_hint_ratio`` is the return-annotation share of functions, while
  ``annotation_ratio`` is the parameter-annotation share; the two cover
  different annotation sites.
* ``exception_score`` is 0.0 when no except clause exists: the feature
  measures demonstrated specificity.
* ``naming_consistency`` is the modal share among the four case-style
  categories.
* ``space_pattern_code`` collapses a 24x64 binary occupancy matrix (first
  24 lines, first 64 display columns, 1 where a non-whitespace character
  sits) to its density.
"""

from __future__ import annotations

import enum
import io
import json
import re
import string
from dataclasses import dataclass
from statistics import fmean

from .lexer import (
    LineProfile,
    Token,
    TokenKind,
    lex,
    line_profile,
    normalize_newlines,
)
from .syntax import (
    FunctionInfo,
    Node,
    Stmt,
    _def_name_and_params,
    module_pseudo_function,
    parse_functions,
    parse_module,
)

SCHEMA = "s2c-style-v1"

REGISTRY = (
    # naming (Table-1 order)
    "name_length", "is_snake_case", "underscore_ratio", "digit_ratio",
    "symbol_ratio", "uppercase_ratio", "lowercase_ratio", "dist_PascalCase",
    "dist_snake_case", "dist_camelCase", "dist_UPPER_CASE", "dist_private",
    "dist_dunder", "naming_consistency",
    # spacing / layout (Table-3 order)
    "blank_line_count", "line_length_avg", "line_length_variance",
    "indentation_level_avg", "space_before_operator", "comment_ratio",
    "type_hint_ratio", "indentation_consistency", "space_pattern_code",
    # structural (Table-2 order)
    "call_depth", "branch_count", "return_count", "arg_count", "length",
    "has_docstring", "has_try_except", "exception_score", "redundancy_ratio",
    "annotation_ratio", "control_structures",
)

NAMING_SLICE = slice(0, 14)
LAYOUT_SLICE = slice(14, 23)
STRUCTURAL_SLICE = slice(23, 34)

# Unbounded features map through x -> min(x / cap, 1); ratios pass through.
NORMALIZATION_CAPS = {
    "name_length": 30.0,
    "line_length_avg": 120.0,
    "line_length_variance": 1600.0,
    "indentation_level_avg": 8.0,
    "call_depth": 8.0,
    "branch_count": 10.0,
    "return_count": 10.0,
    "arg_count": 10.0,
    "length": 100.0,
    "control_structures": 20.0,
}

SPACE_PATTERN_ROWS = 24
SPACE_PATTERN_COLS = 64


class EmptySource(ValueError):
    """Raised when a source is empty after stripping whitespace."""


class SchemaMismatch(ValueError):
    pass


class NameCategory(enum.Enum):
    DUNDER = "Dunder"
    PRIVATE = "Private"
    UPPER_CASE = "UpperCase"
    PASCAL_CASE = "PascalCase"
    CAMEL_CASE = "CamelCase"
    SNAKE_CASE = "SnakeCase"
    OTHER = "Other"


@dataclass(frozen=True)
class IdentifierRecord:
    text: str
    category: NameCategory


@dataclass(frozen=True)
class StyleVectorRaw:
    """Feature values in natural units (chars, counts, ratios)."""
    values: tuple[float, ...]
    warnings: tuple[str, ...] = ()
    schema: str = SCHEMA

    def __post_init__(self):
        if len(self.values) != len(REGISTRY):
            raise ValueError(f"expected {len(REGISTRY)} features, got {len(self.values)}")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(REGISTRY, self.values))

    def __getitem__(self, name: str) -> float:
        return self.values[REGISTRY.index(name)]


@dataclass(frozen=True)
class StyleVector:
    """Normalized style vector; every component lies in [0, 1]."""
    values: tuple[float, ...]
    schema: str = SCHEMA

    def __post_init__(self):
        if len(self.values) != len(REGISTRY):
            raise ValueError(f"expected {len(REGISTRY)} features, got {len(self.values)}")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(REGISTRY, self.values))


_UPPER_RE = re.compile(r"[A-Z][A-Z0-9_]*\Z")
_PASCAL_RE = re.compile(r"[A-Z][A-Za-z0-9]*\Z")
_CAMEL_RE = re.compile(r"[a-z][A-Za-z0-9]*\Z")
_SNAKE_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


def classify_identifier(name: str) -> IdentifierRecord:
    """Assign the single category of a name, by precedence.

    Dunder > Private > UPPER_CASE > PascalCase > camelCase > snake_case >
    Other. A single lowercase word counts as snake_case.
    """
    if name.startswith("__") and name.endswith("__") and len(name) > 4:
        cat = NameCategory.DUNDER
    elif name.startswith("_"):
        cat = NameCategory.PRIVATE
    elif _UPPER_RE.match(name):
        cat = NameCategory.UPPER_CASE
    elif _PASCAL_RE.match(name) and any(c.islower() for c in name):
        cat = NameCategory.PASCAL_CASE
    elif _CAMEL_RE.match(name) and any(c.isupper() for c in name):
        cat = NameCategory.CAMEL_CASE
    elif _SNAKE_RE.match(name):
        cat = NameCategory.SNAKE_CASE
    else:
        cat = NameCategory.OTHER
    return IdentifierRecord(text=name, category=cat)


# -- identifier extraction ----------------------------------------------------


def _adjacent_ok(tokens: list[Token], i: int) -> bool:
    """Reject attribute/subscript/call positions around ``tokens[i]``."""
    prev = tokens[i - 1] if i > 0 else None
    nxt = tokens[i + 1] if i + 1 < len(tokens) else None
    if prev is not None and prev.kind is TokenKind.PUNCT and prev.text == ".":
        return False
    if nxt is not None and nxt.kind is TokenKind.PUNCT and nxt.text in (".", "[", "("):
        return False
    return True


def _depth_profile(tokens: list[Token]) -> list[int]:
    depths = []
    depth = 0
    for tok in tokens:
        if tok.kind is TokenKind.PUNCT and tok.text in "([{":
            depths.append(depth)
            depth += 1
        elif tok.kind is TokenKind.PUNCT and tok.text in ")]}":
            depth = max(0, depth - 1)
            depths.append(depth)
        else:
            depths.append(depth)
    return depths


def _binding_names_in_stmt(stmt: Stmt) -> list[str]:
    toks = stmt.tokens
    names: list[str] = []
    depths = _depth_profile(toks)

    # walrus targets at any depth
    for i, tok in enumerate(toks[:-1]):
        if (tok.kind is TokenKind.IDENTIFIER
                and toks[i + 1].kind is TokenKind.OPERATOR
                and toks[i + 1].text == ":="):
            names.append(tok.text)

    # ``as`` targets (imports, with, except)
    for i, tok in enumerate(toks):
        if tok.kind is TokenKind.KEYWORD and tok.text == "as":
            j = i + 1
            while j < len(toks):
                t = toks[j]
                if t.kind is TokenKind.IDENTIFIER and _adjacent_ok(toks, j):
                    names.append(t.text)
                elif t.kind is TokenKind.KEYWORD or (
                    t.kind is TokenKind.PUNCT and t.text == ":" and depths[j] == 0
                ):
                    break
                j += 1

    first = toks[0]
    if first.kind is TokenKind.KEYWORD:
        if first.text == "for" or (first.text == "async" and len(toks) > 1
                                   and toks[1].text == "for"):
            start = 1 if first.text == "for" else 2
            for j in range(start, len(toks)):
                t = toks[j]
                if t.kind is TokenKind.KEYWORD and t.text == "in":
                    break
                if t.kind is TokenKind.IDENTIFIER and _adjacent_ok(toks, j):
                    names.append(t.text)
        return names

    # augmented assignment target
    if (len(toks) >= 2 and first.kind is TokenKind.IDENTIFIER
            and toks[1].kind is TokenKind.OPERATOR
            and toks[1].text.endswith("=")
            and toks[1].text not in ("==", "!=", "<=", ">=")
            and len(toks[1].text) > 1):
        names.append(first.text)
        return names

    # plain / annotated / chained assignment targets
    last_eq = None
    first_colon = None
    for i, tok in enumerate(toks):
        if depths[i] != 0:
            continue
        if tok.kind is TokenKind.OPERATOR and tok.text == "=":
            last_eq = i
        elif tok.kind is TokenKind.PUNCT and tok.text == ":" and first_colon is None:
            first_colon = i
    if last_eq is not None:
        stop = last_eq if first_colon is None else min(last_eq, first_colon)
        for j in range(stop):
            t = toks[j]
            if (depths[j] == 0 and t.kind is TokenKind.IDENTIFIER
                    and _adjacent_ok(toks, j)):
                names.append(t.text)
    return names


def _walk_identifiers(node: Node, names: list[str]) -> None:
    for child in node.children:
        if isinstance(child, Node):
            header = child.header
            if child.kind in ("def", "class") and header is not None:
                toks = header.tokens
                i = 1 if toks[0].text in ("def", "class") else 2
                if i < len(toks) and toks[i].kind is TokenKind.IDENTIFIER:
                    names.append(toks[i].text)
                if child.kind == "def":
                    try:
                        _, params, _ = _def_name_and_params(header, lenient=True)
                    except Exception:
                        params = ()
                    names.extend(p.name for p in params)
            elif header is not None:
                names.extend(_binding_names_in_stmt(header))
            _walk_identifiers(child, names)
        else:
            names.extend(_binding_names_in_stmt(child))


def extract_identifiers(source: str) -> list[IdentifierRecord]:
    """Distinct binding-site names in first-appearance order."""
    module = parse_module(source, lenient=True)
    names: list[str] = []
    _walk_identifiers(module, names)
    seen: set[str] = set()
    records = []
    for name in names:
        if name not in seen:
            seen.add(name)
            records.append(classify_identifier(name))
    return records


# -- feature groups -----------------------------------------------------------


def naming_features(identifiers: list[IdentifierRecord], source: str) -> list[float]:
    """The 14 naming features; all zeros for an empty identifier set."""
    n = len(identifiers)
    if n == 0:
        return [0.0] * 14
    texts = [r.text for r in identifiers]
    chars = sum(len(t) for t in texts)
    letters = sum(1 for t in texts for c in t if c.isalpha())
    cats = [r.category for r in identifiers]

    def share(cat: NameCategory) -> float:
        return sum(1 for c in cats if c is cat) / n

    dist_pascal = share(NameCategory.PASCAL_CASE)
    dist_snake = share(NameCategory.SNAKE_CASE)
    dist_camel = share(NameCategory.CAMEL_CASE)
    dist_upper = share(NameCategory.UPPER_CASE)
    non_ws = sum(1 for c in source if not c.isspace())
    punct = sum(1 for c in source if c in string.punctuation)
    return [
        chars / n,
        sum(1 for t in texts if not any(c.isupper() for c in t)) / n,
        sum(t.count("_") for t in texts) / chars,
        sum(1 for t in texts for c in t if c.isdigit()) / chars,
        punct / non_ws if non_ws else 0.0,
        sum(1 for t in texts for c in t if c.isupper()) / letters if letters else 0.0,
        sum(1 for t in texts for c in t if c.islower()) / letters if letters else 0.0,
        dist_pascal,
        dist_snake,
        dist_camel,
        dist_upper,
        share(NameCategory.PRIVATE),
        share(NameCategory.DUNDER),
        max(dist_pascal, dist_snake, dist_camel, dist_upper),
    ]


# Operators counted by the spacing feature. ``+ - * ** @`` are skipped in
# unary positions (start of expression or after another operator/opener).
_BINARY_OPS = frozenset((
    "+", "-", "*", "/", "//", "%", "**", "@", "<<", ">>", "&", "|", "^",
    "<", ">", "<=", ">=", "==", "!=", "=", "+=", "-=", "*=", "/=", "//=",
    "%=", "**=", "<<=", ">>=", "&=", "|=", "^=", "@=", ":=", "->",
))
_MAYBE_UNARY = frozenset(("+", "-", "*", "**", "~", "@"))
_OPERAND_END_PUNCT = frozenset((")", "]", "}"))


def iter_binary_operators(tokens: list[Token]):
    """Yield Operator tokens standing in binary position."""
    prev = None
    for tok in tokens:
        if tok.is_synthetic():
            prev = None if tok.kind is TokenKind.NEWLINE else prev
            continue
        if tok.kind is TokenKind.OPERATOR and tok.text in _BINARY_OPS:
            if tok.text in _MAYBE_UNARY:
                operand_before = prev is not None and (
                    prev.kind in (TokenKind.IDENTIFIER, TokenKind.NUMBER,
                                  TokenKind.STRING)
                    or (prev.kind is TokenKind.PUNCT
                        and prev.text in _OPERAND_END_PUNCT)
                )
                if operand_before:
                    yield tok
            else:
                yield tok
        prev = tok


def _char_before(line_text: str, col: int) -> str:
    """Raw character immediately left of a display column, or ''."""
    ec = 0
    for idx, ch in enumerate(line_text):
        if ec == col:
            return line_text[idx - 1] if idx > 0 else ""
        ec += 4 - (ec % 4) if ch == "\t" else 1
    return ""


def space_pattern(source: str) -> float:
    """Occupancy density of the 24x64 binary line-column matrix."""
    source = normalize_newlines(source)
    occupied = 0
    for line in source.splitlines()[:SPACE_PATTERN_ROWS]:
        expanded = line.expandtabs(4)
        occupied += sum(1 for c in expanded[:SPACE_PATTERN_COLS] if not c.isspace())
    return occupied / (SPACE_PATTERN_ROWS * SPACE_PATTERN_COLS)


def layout_features(profile: LineProfile, tokens: list[Token],
                    source: str = "") -> list[float]:
    """The 9 spacing/layout features, in registry order.

    ``source`` backs the space-before-operator check and the space
    pattern; without it those two default to zero. ``analyze`` always
    passes it.
    """
    lines = profile.lines
    total = profile.total_lines
    nonblank = [rec for rec in lines if not rec.is_blank]
    blank_ratio = (total - len(nonblank)) / total if total else 0.0
    lengths = [rec.raw_length for rec in nonblank]
    avg_len = fmean(lengths) if lengths else 0.0
    var_len = (
        fmean([(x - avg_len) ** 2 for x in lengths]) if lengths else 0.0
    )
    levels = [rec.indent_columns / 4 for rec in nonblank]
    indent_avg = fmean(levels) if levels else 0.0

    raw_lines = normalize_newlines(source).splitlines() if source else []
    spaced = 0
    binary = 0
    for tok in iter_binary_operators(tokens):
        binary += 1
        if tok.line - 1 < len(raw_lines):
            if _char_before(raw_lines[tok.line - 1], tok.col) == " ":
                spaced += 1
    space_before = spaced / binary if binary else 0.0

    comment_lines = {t.line for t in tokens if t.kind is TokenKind.COMMENT}
    comment_ratio = (
        sum(1 for i, rec in enumerate(lines, start=1)
            if not rec.is_blank and i in comment_lines) / len(nonblank)
        if nonblank else 0.0
    )

    defs = arrows = 0
    stmt_start = True
    saw_def = False
    depth = 0
    for tok in tokens:
        if tok.kind is TokenKind.NEWLINE:
            stmt_start = True
            saw_def = False
            continue
        if tok.is_synthetic():
            continue
        if tok.kind is TokenKind.PUNCT and tok.text in "([{":
            depth += 1
        elif tok.kind is TokenKind.PUNCT and tok.text in ")]}":
            depth = max(0, depth - 1)
        if tok.kind is TokenKind.KEYWORD and tok.text == "def" and stmt_start:
            defs += 1
            saw_def = True
        elif saw_def and tok.kind is TokenKind.OPERATOR and tok.text == "->" and depth == 0:
            arrows += 1
            saw_def = False
        if tok.kind is not TokenKind.COMMENT and not (
            tok.kind is TokenKind.KEYWORD and tok.text == "async"
        ):
            stmt_start = False
    hint_ratio = arrows / defs if defs else 0.0

    indented = [rec for rec in nonblank if rec.indent_columns > 0]
    if indented:
        cols = [rec.indent_columns for rec in indented]
        counts: dict[int, int] = {}
        for c in cols:
            counts[c] = counts.get(c, 0) + 1
        unit = min(c for c in counts if counts[c] == max(counts.values()))
        consistent = sum(
            1 for rec in indented
            if rec.indent_columns % unit == 0
            and (set(rec.leading_ws) <= {" "} or set(rec.leading_ws) <= {"\t"})
        )
        indent_consistency = consistent / len(indented)
    else:
        indent_consistency = 1.0

    return [
        blank_ratio, avg_len, var_len, indent_avg, space_before,
        comment_ratio, hint_ratio, indent_consistency,
        space_pattern(source) if source else 0.0,
    ]


def structural_features(functions: list[FunctionInfo], source: str) -> list[float]:
    """The 11 structural features, in registry order.

    Each count is a mean over functions; a file without functions is
    measured as one whole-file pseudo-function. ``exception_score``,
    ``redundancy_ratio`` and ``annotation_ratio`` pool over the file.
    """
    source = normalize_newlines(source)
    profile = line_profile(source)
    if not functions:
        functions = [module_pseudo_function(source, profile.total_lines)]

    def effective_params(rec: FunctionInfo):
        params = list(rec.params)
        if rec.is_method and params and params[0].name in ("self", "cls"):
            params = params[1:]
        return params

    per_func_params = [effective_params(rec) for rec in functions]
    all_params = [p for ps in per_func_params for p in ps]
    clauses = [c for rec in functions for c in rec.except_clauses]
    specific = sum(1 for c in clauses if c.value == "Specific")

    code_lines = []
    for rec, text in zip(profile.lines, source.splitlines()):
        if rec.is_blank or rec.is_comment_only:
            continue
        code_lines.append(" ".join(text.split()))
    counts: dict[str, int] = {}
    for line in code_lines:
        counts[line] = counts.get(line, 0) + 1
    dup_extra = sum(c - 1 for c in counts.values() if c > 1)

    n = len(functions)
    return [
        fmean([rec.max_call_depth for rec in functions]),
        fmean([rec.branch_count for rec in functions]),
        fmean([rec.return_count for rec in functions]),
        fmean([len(ps) for ps in per_func_params]),
        fmean([rec.body_line_span for rec in functions]),
        sum(1 for rec in functions if rec.has_docstring) / n,
        sum(1 for rec in functions if rec.has_try) / n,
        specific / len(clauses) if clauses else 0.0,
        dup_extra / len(code_lines) if code_lines else 0.0,
        sum(1 for p in all_params if p.has_annotation) / len(all_params)
        if all_params else 0.0,
        fmean([rec.control_count for rec in functions]),
    ]


def analyze(source: str, lenient: bool = False) -> StyleVectorRaw:
    """Compute the full 34-feature raw style vector for one source text.

    Strict by default: lexer errors propagate and malformed ``def``
    headers raise. Lenient mode tokenizes through problems and keeps
    whatever parses.
    """
    source = normalize_newlines(source)
    if not source.strip():
        raise EmptySource("source is empty after stripping whitespace")
    tokens = lex(source, lenient=lenient)
    profile = line_profile(source)
    functions = parse_functions(source, lenient=lenient)
    identifiers = extract_identifiers(source)
    warnings = () if identifiers else ("empty-identifier-set",)
    values = (
        naming_features(identifiers, source)
        + layout_features(profile, tokens, source)
        + structural_features(functions, source)
    )
    return StyleVectorRaw(values=tuple(values), warnings=warnings)


def normalize(raw: StyleVectorRaw | StyleVector) -> StyleVector:
    """Map a raw vector into [0, 1]^34; already-normalized vectors pass through."""
    if isinstance(raw, StyleVector):
        return raw
    out = []
    for name, value in zip(REGISTRY, raw.values):
        cap = NORMALIZATION_CAPS.get(name)
        if cap is not None:
            value = value / cap
        out.append(min(max(value, 0.0), 1.0))
    return StyleVector(values=tuple(out), schema=raw.schema)


# -- serialization ------------------------------------------------------------


def to_json_document(raw: StyleVectorRaw, vec: StyleVector | None = None) -> dict:
    """The s2c-style-v1 JSON document with fixed key order."""
    if vec is None:
        vec = normalize(raw)
    return {
        "schema": SCHEMA,
        "raw": {name: raw.values[i] for i, name in enumerate(REGISTRY)},
        "normalized": list(vec.values),
    }


def to_json(raw: StyleVectorRaw, vec: StyleVector | None = None) -> str:
    return json.dumps(to_json_document(raw, vec))


def to_csv(raw: StyleVectorRaw, vec: StyleVector | None = None) -> str:
    """CSV with the registry header row, one row each for raw/normalized."""
    if vec is None:
        vec = normalize(raw)
    buf = io.StringIO()
    buf.write("kind," + ",".join(REGISTRY) + "\r\n")
    buf.write("raw," + ",".join(repr(v) for v in raw.values) + "\r\n")
    buf.write("normalized," + ",".join(repr(v) for v in vec.values) + "\r\n")
    return buf.getvalue()
