"""Render source code as images, embed them and compare the embeddings."""

from ._core import (
    CacheMagicError,
    CacheTruncatedError,
    ConfigError,
    Error,
    FormatError,
    IngestionError,
    IoError,
    Model,
    ShapeMismatchError,
    UndefinedSimilarityError,
    builtin_model,
    calibrate_threshold,
    cosine_similarity,
    decode_cache,
    decode_png,
    detect_clone,
    encode_cache,
    encode_png,
    knn_classify,
    languages,
    lex,
    load_manifest,
    load_model,
    load_pairs,
    metrics_from_counts,
    normalize,
    read_cache,
    render,
    resize,
    run_cli,
)

__all__ = [name for name in dir() if not name.startswith("_")]
