"""Word alignment from encoder embeddings, BIO label projection, and evaluation."""

from .aligner import (
    DEFAULT_THRESHOLD,
    AlignConfig,
    NormalizedSimilarityPair,
    aggregate_to_words,
    align_pair,
    alignment_loss,
    compute_similarity,
    extract_subword_alignments,
    normalize_bidirectional,
    row_softmax,
)
from .embed_io import (
    EmbeddingRecord,
    FormatError,
    GoldAlignment,
    format_alignment,
    format_pharaoh,
    parse_alignment,
    parse_bio,
    parse_pharaoh,
    read_embeddings,
    validate_tag,
    write_bio,
    write_embeddings,
)
from .evaluation import (
    AerReport,
    F1Report,
    bundled_stopwords_path,
    compute_aer,
    compute_corpus_aer,
    compute_f1,
    filter_aer_pair,
    filter_stopword_edges,
    load_stopwords,
    stopword_banned_targets,
)
from .projection import (
    LabeledSpan,
    decode_spans,
    encode_spans,
    project_sentence,
    project_spans,
)

__version__ = "0.1.0"

__all__ = [
    "AerReport",
    "AlignConfig",
    "DEFAULT_THRESHOLD",
    "EmbeddingRecord",
    "F1Report",
    "FormatError",
    "GoldAlignment",
    "LabeledSpan",
    "NormalizedSimilarityPair",
    "aggregate_to_words",
    "align_pair",
    "alignment_loss",
    "bundled_stopwords_path",
    "compute_aer",
    "compute_corpus_aer",
    "compute_f1",
    "compute_similarity",
    "decode_spans",
    "encode_spans",
    "extract_subword_alignments",
    "filter_aer_pair",
    "filter_stopword_edges",
    "format_alignment",
    "format_pharaoh",
    "load_stopwords",
    "normalize_bidirectional",
    "parse_alignment",
    "parse_bio",
    "parse_pharaoh",
    "project_sentence",
    "project_spans",
    "read_embeddings",
    "row_softmax",
    "stopword_banned_targets",
    "validate_tag",
    "write_bio",
    "write_embeddings",
]
