"""Core alignment math over subword embedding matrices.

The pipeline is: dot-product similarity between the two sides' subword
embeddings, row-wise softmax in both directions, thresholded intersection
of the two directions, then aggregation of subword pairs to word pairs.
All kernels accumulate in float64 even though embeddings are stored as
float32.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .embed_io import EmbeddingRecord

DEFAULT_THRESHOLD = 0.001


@dataclass
class AlignConfig:
    """Extraction settings.

    ``threshold`` is the probability floor both directions must clear for a
    subword pair to align (strict inequality; at 0 every pair passes since
    softmax outputs are positive).  ``layer`` records which encoder layer
    the embeddings came from; it is carried as metadata only.
    """

    threshold: float = DEFAULT_THRESHOLD
    layer: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold < 1.0:
            raise ValueError(f"threshold must be in [0, 1), got {self.threshold}")
        if self.layer < 0:
            raise ValueError(f"layer must be non-negative, got {self.layer}")


@dataclass
class NormalizedSimilarityPair:
    """Row-normalized similarities in both directions for one sentence pair.

    ``s_xy`` has shape (n, m) and rows summing to 1; ``s_yx`` is the
    normalization of the transposed similarities, shape (m, n).
    """

    s_xy: np.ndarray
    s_yx: np.ndarray

    def __post_init__(self) -> None:
        self.s_xy = np.asarray(self.s_xy, dtype=np.float64)
        self.s_yx = np.asarray(self.s_yx, dtype=np.float64)
        if self.s_xy.ndim != 2 or self.s_yx.ndim != 2:
            raise ValueError("normalized similarities must be 2-dimensional")
        if self.s_yx.shape != self.s_xy.shape[::-1]:
            raise ValueError(
                f"shape mismatch: s_xy is {self.s_xy.shape}, "
                f"s_yx is {self.s_yx.shape}"
            )
        if not (np.isfinite(self.s_xy).all() and np.isfinite(self.s_yx).all()):
            raise ValueError("normalized similarities must be finite")

    @property
    def source_count(self) -> int:
        return self.s_xy.shape[0]

    @property
    def target_count(self) -> int:
        return self.s_xy.shape[1]


def row_softmax(values: np.ndarray) -> np.ndarray:
    """Softmax over the last axis in float64, stabilized by max subtraction."""
    a = np.asarray(values, dtype=np.float64)
    shifted = a - a.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _embedding_matrix(side: EmbeddingRecord | np.ndarray) -> np.ndarray:
    if isinstance(side, EmbeddingRecord):
        return side.embeddings
    matrix = np.asarray(side)
    if matrix.ndim != 2:
        raise ValueError(f"embeddings must be 2-dimensional, got shape {matrix.shape}")
    return matrix


def compute_similarity(
    h_x: EmbeddingRecord | np.ndarray, h_y: EmbeddingRecord | np.ndarray
) -> np.ndarray:
    """Dot-product similarity matrix, entry (i, j) = <source i, target j>."""
    x = _embedding_matrix(h_x).astype(np.float64)
    y = _embedding_matrix(h_y).astype(np.float64)
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"embedding dim mismatch: source has {x.shape[1]}, target has {y.shape[1]}"
        )
    return x @ y.T


def normalize_bidirectional(similarity: np.ndarray) -> NormalizedSimilarityPair:
    """Row-softmax the similarity matrix in both directions."""
    s = np.asarray(similarity, dtype=np.float64)
    if s.ndim != 2:
        raise ValueError(f"similarity must be 2-dimensional, got shape {s.shape}")
    if not np.isfinite(s).all():
        raise ValueError("similarity matrix must be finite")
    return NormalizedSimilarityPair(s_xy=row_softmax(s), s_yx=row_softmax(s.T))


def extract_subword_alignments(
    pair: NormalizedSimilarityPair, config: AlignConfig
) -> set[tuple[int, int]]:
    """Subword pairs whose probability exceeds the threshold in both directions."""
    c = config.threshold
    mask = (pair.s_xy > c) & (pair.s_yx.T > c)
    return {(int(i), int(j)) for i, j in np.argwhere(mask)}


def aggregate_to_words(
    subword_pairs: Iterable[tuple[int, int]],
    source_word_ids: list[int],
    target_word_ids: list[int],
) -> set[tuple[int, int]]:
    """Map aligned subword pairs onto word pairs.

    Two words align as soon as any of their subwords do; duplicates collapse
    through set semantics.
    """
    word_pairs: set[tuple[int, int]] = set()
    for i, j in subword_pairs:
        if not 0 <= i < len(source_word_ids):
            raise IndexError(
                f"source subword index {i} out of range for {len(source_word_ids)} subwords"
            )
        if not 0 <= j < len(target_word_ids):
            raise IndexError(
                f"target subword index {j} out of range for {len(target_word_ids)} subwords"
            )
        word_pairs.add((source_word_ids[i], target_word_ids[j]))
    return word_pairs


def align_pair(
    h_x: EmbeddingRecord, h_y: EmbeddingRecord, config: AlignConfig | None = None
) -> set[tuple[int, int]]:
    """Full pipeline for one sentence pair: similarity to word alignment set."""
    cfg = config if config is not None else AlignConfig()
    pair = normalize_bidirectional(compute_similarity(h_x, h_y))
    subword_pairs = extract_subword_alignments(pair, cfg)
    return aggregate_to_words(subword_pairs, h_x.word_ids, h_y.word_ids)


def alignment_loss(
    pair: NormalizedSimilarityPair,
    gold_subword_pairs: Iterable[tuple[int, int]],
    source_count: int,
    target_count: int,
) -> float:
    """Alignment-supervision objective over gold subword pairs.

    Each gold pair (i, j) contributes the mean of its two directional
    probabilities, scaled by the respective sentence lengths:
    0.5 * (s_xy[i, j] / source_count + s_yx[j, i] / target_count).
    Returned as written; trainers that maximize it minimize its negation.
    """
    n, m = pair.s_xy.shape
    if (source_count, target_count) != (n, m):
        raise ValueError(
            f"counts ({source_count}, {target_count}) do not match "
            f"matrix shape ({n}, {m})"
        )
    total = 0.0
    for i, j in sorted(gold_subword_pairs):
        if not 0 <= i < n:
            raise IndexError(f"gold source index {i} out of range for {n} subwords")
        if not 0 <= j < m:
            raise IndexError(f"gold target index {j} out of range for {m} subwords")
        total += 0.5 * (pair.s_xy[i, j] / n + pair.s_yx[j, i] / m)
    return total
