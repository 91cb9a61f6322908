"""stylekit: explicit code style vectors, contrastive style encoders,
and scoring metrics for style-controlled code generation research."""

from .features import (
    REGISTRY,
    SCHEMA,
    IdentifierRecord,
    NameCategory,
    StyleVector,
    StyleVectorRaw,
    analyze,
    classify_identifier,
    extract_identifiers,
    normalize,
    space_pattern,
)
from .lexer import LineProfile, Token, TokenKind, lex, line_profile
from .metrics import (
    LossConfig,
    MetricReport,
    RougeScore,
    bleu4,
    css,
    rouge,
    score,
    style_loss,
    total_loss,
)
from .nn import CodeTower, EncoderModel, StyleTower, adam_step
from .checkpoint import load as load_checkpoint, save as save_checkpoint
from .contrastive import (
    ContrastivePair,
    TrainConfig,
    build_pairs,
    eval_retrieval,
    extract_snippets,
    info_nce,
    train,
)
from .corpus import CorpusFile, CorpusRecord, ingest, precompute_styles, split
from .syntax import FunctionInfo, parse_functions

__version__ = "0.1.0"

__all__ = [
    "REGISTRY", "SCHEMA", "IdentifierRecord", "NameCategory", "StyleVector",
    "StyleVectorRaw", "analyze", "classify_identifier", "extract_identifiers",
    "normalize", "space_pattern", "LineProfile", "Token", "TokenKind", "lex",
    "line_profile", "LossConfig", "MetricReport", "RougeScore", "bleu4",
    "css", "rouge", "score", "style_loss", "total_loss", "CodeTower",
    "EncoderModel", "StyleTower", "adam_step", "load_checkpoint",
    "save_checkpoint", "ContrastivePair", "TrainConfig", "build_pairs",
    "eval_retrieval", "extract_snippets", "info_nce", "train", "CorpusFile",
    "CorpusRecord", "ingest", "precompute_styles", "split", "FunctionInfo",
    "parse_functions", "__version__",
]
