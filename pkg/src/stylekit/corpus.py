"""Dataset pipeline: ingestion, deduplication, length filtering, splits.

Records pair a source-style text (``code1``) with a target-style text
(``code2``). Deduplication keys on ``code2`` only, the style-bearing
side: one source legitimately appears with many styles. The token cap is
measured with the code lexer, comments included, synthetic whitespace
tokens excluded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import SCHEMA, StyleVector, analyze, normalize
from .lexer import LexError, lex

DEFAULT_MAX_TOKENS = 378


class MalformedRecord(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class RatioError(ValueError):
    pass


@dataclass
class CorpusRecord:
    id: str
    code1: str
    code2: str
    style_vec: StyleVector | None = None


@dataclass
class Manifest:
    schema: str = SCHEMA
    max_tokens: int = DEFAULT_MAX_TOKENS
    counts: dict = field(default_factory=dict)
    splits: dict = field(default_factory=dict)        # name -> [record ids]
    style_errors: dict = field(default_factory=dict)  # record id -> message

    def as_dict(self) -> dict:
        return {
            "schema": self.schema,
            "max_tokens": self.max_tokens,
            "counts": dict(self.counts),
            "splits": {k: list(v) for k, v in self.splits.items()},
            "style_errors": dict(self.style_errors),
        }


@dataclass
class CorpusFile:
    records: list[CorpusRecord]
    manifest: Manifest

    def split_records(self, name: str) -> list[CorpusRecord]:
        wanted = set(self.manifest.splits.get(name, ()))
        return [r for r in self.records if r.id in wanted]


def token_count(text: str) -> int:
    """Lexer token count: comments included, Newline/Indent/Dedent not."""
    return sum(1 for t in lex(text, lenient=True) if not t.is_synthetic())


def _dedup_key(text: str) -> str:
    return "\n".join(line.rstrip() for line in text.splitlines()).rstrip()


def _iter_input_lines(paths):
    """Yield (line_no, payload) pairs from JSONL files, plus synthetic
    records for plain source files / directories."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    line_no = 0
    for path in paths:
        path = Path(path)
        if path.is_dir():
            for src in sorted(path.rglob("*.py")):
                line_no += 1
                text = src.read_text(encoding="utf-8")
                yield line_no, {"id": src.stem, "code1": text, "code2": text}
        elif path.suffix == ".jsonl":
            with path.open("r", encoding="utf-8") as fh:
                for raw in fh:
                    line_no += 1
                    if not raw.strip():
                        continue
                    yield line_no, raw
        else:
            line_no += 1
            text = path.read_text(encoding="utf-8")
            yield line_no, {"id": path.stem, "code1": text, "code2": text}


def ingest(paths, max_tokens: int = DEFAULT_MAX_TOKENS,
           lenient: bool = False) -> CorpusFile:
    """Read JSONL records or source files into a filtered corpus.

    Records whose token count exceeds ``max_tokens`` on either side are
    dropped, as are exact duplicates of ``code2`` (after trailing
    whitespace is stripped, first occurrence wins). Malformed lines raise
    unless ``lenient`` is set, in which case they are counted and skipped.
    The manifest reconciles: kept + dropped = input lines.
    """
    records: list[CorpusRecord] = []
    seen_keys: set[str] = set()
    seen_ids: set[str] = set()
    counts = {
        "input": 0, "kept": 0,
        "dropped_dupe": 0, "dropped_len": 0, "dropped_malformed": 0,
    }
    auto_id = 0
    for line_no, payload in _iter_input_lines(paths):
        counts["input"] += 1
        try:
            if isinstance(payload, str):
                try:
                    doc = json.loads(payload)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(line_no, f"bad JSON: {exc}") from exc
            else:
                doc = payload
            if not isinstance(doc, dict):
                raise MalformedRecord(line_no, "record is not an object")
            code1 = doc.get("code1")
            code2 = doc.get("code2")
            if not code1 or not code2:
                raise MalformedRecord(line_no, "code1/code2 missing or empty")
            rec_id = str(doc.get("id") or f"rec{auto_id:06d}")
            auto_id += 1
            if rec_id in seen_ids:
                raise MalformedRecord(line_no, f"duplicate id {rec_id!r}")
        except MalformedRecord:
            if lenient:
                counts["dropped_malformed"] += 1
                continue
            raise
        if max(token_count(code1), token_count(code2)) > max_tokens:
            counts["dropped_len"] += 1
            continue
        key = _dedup_key(code2)
        if key in seen_keys:
            counts["dropped_dupe"] += 1
            continue
        seen_keys.add(key)
        seen_ids.add(rec_id)
        records.append(CorpusRecord(id=rec_id, code1=code1, code2=code2))
        counts["kept"] += 1
    manifest = Manifest(max_tokens=max_tokens, counts=counts)
    return CorpusFile(records=records, manifest=manifest)


def split(corpus: CorpusFile, ratios: dict[str, float], seed: int) -> CorpusFile:
    """Seeded shuffle, then contiguous assignment at cumulative-floor
    boundaries; 100 records at 0.99/0.01 become 99/1. Ratios may sum to
    less than one; the tail stays unassigned."""
    total_ratio = sum(ratios.values())
    if any(r < 0 for r in ratios.values()) or total_ratio > 1.0 + 1e-9:
        raise RatioError(f"ratios must be non-negative and sum to <= 1: {ratios}")
    order = np.random.default_rng(seed).permutation(len(corpus.records))
    splits: dict[str, list[str]] = {}
    start = 0
    cumulative = 0.0
    for name, ratio in ratios.items():
        cumulative += ratio
        end = int(len(corpus.records) * cumulative + 1e-9)
        splits[name] = [corpus.records[i].id for i in order[start:end]]
        start = end
    manifest = Manifest(
        schema=corpus.manifest.schema,
        max_tokens=corpus.manifest.max_tokens,
        counts=dict(corpus.manifest.counts),
        splits=splits,
        style_errors=dict(corpus.manifest.style_errors),
    )
    return CorpusFile(records=list(corpus.records), manifest=manifest)


def precompute_styles(corpus: CorpusFile) -> CorpusFile:
    """Fill each record's style vector cache from ``code2``; idempotent.

    Records the analyzer cannot handle are flagged in the manifest and
    kept, not dropped.
    """
    errors: dict[str, str] = {}
    records = []
    for rec in corpus.records:
        vec = rec.style_vec
        if vec is None:
            try:
                vec = normalize(analyze(rec.code2))
            except (LexError, ValueError) as exc:
                errors[rec.id] = f"{type(exc).__name__}: {exc}"
                vec = None
        records.append(CorpusRecord(id=rec.id, code1=rec.code1,
                                    code2=rec.code2, style_vec=vec))
    manifest = Manifest(
        schema=corpus.manifest.schema,
        max_tokens=corpus.manifest.max_tokens,
        counts=dict(corpus.manifest.counts),
        splits={k: list(v) for k, v in corpus.manifest.splits.items()},
        style_errors=errors,
    )
    return CorpusFile(records=records, manifest=manifest)


def save_jsonl(corpus: CorpusFile, path: str | Path) -> None:
    """Write records as JSONL with the manifest alongside (``.manifest.json``)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in corpus.records:
            doc = {"id": rec.id, "code1": rec.code1, "code2": rec.code2}
            if rec.style_vec is not None:
                doc["style_vec"] = list(rec.style_vec.values)
            fh.write(json.dumps(doc) + "\n")
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest_path.write_text(
        json.dumps(corpus.manifest.as_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_jsonl(path: str | Path) -> CorpusFile:
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            doc = json.loads(raw)
            vec = doc.get("style_vec")
            records.append(CorpusRecord(
                id=str(doc["id"]),
                code1=doc["code1"],
                code2=doc["code2"],
                style_vec=StyleVector(values=tuple(vec)) if vec else None,
            ))
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest = Manifest()
    if manifest_path.exists():
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
        manifest = Manifest(
            schema=doc.get("schema", SCHEMA),
            max_tokens=doc.get("max_tokens", DEFAULT_MAX_TOKENS),
            counts=doc.get("counts", {}),
            splits=doc.get("splits", {}),
            style_errors=doc.get("style_errors", {}),
        )
    return CorpusFile(records=records, manifest=manifest)


def from_sources(sources: list[tuple[str, str]]) -> CorpusFile:
    """Build a corpus directly from (id, source) pairs; no filtering."""
    records = [CorpusRecord(id=i, code1=s, code2=s) for i, s in sources]
    manifest = Manifest(counts={
        "input": len(records), "kept": len(records),
        "dropped_dupe": 0, "dropped_len": 0, "dropped_malformed": 0,
    })
    return CorpusFile(records=records, manifest=manifest)
