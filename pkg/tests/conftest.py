"""Shared test helpers: randomized fixtures and small file builders."""

from __future__ import annotations

import itertools
import math

import numpy as np

from alignkit import EmbeddingRecord


def achievable_probabilities(values: tuple[float, ...], max_len: int) -> list[float]:
    """Every softmax probability reachable from rows over the value grid.

    Oracle-equivalence thresholds must keep a healthy distance from all of
    these: a threshold equal to an attainable probability makes the strict
    comparison a knife-edge where two float formulations can legitimately
    round to opposite sides.
    """
    probs: set[float] = set()
    for length in range(1, max_len + 1):
        for row in itertools.product(values, repeat=length):
            exps = [math.exp(v) for v in row]
            total = sum(exps)
            probs.update(e / total for e in exps)
            arr = np.asarray(row, dtype=np.float64)
            shifted = np.exp(arr - arr.max())
            probs.update(float(p) for p in shifted / shifted.sum())
    return sorted(probs)


def assert_safe_thresholds(
    thresholds: list[float], values: tuple[float, ...], max_len: int, margin: float = 1e-6
) -> None:
    probs = achievable_probabilities(values, max_len)
    for c in thresholds:
        distance = min(abs(p - c) for p in probs)
        assert distance > margin, f"threshold {c} too close to an achievable probability"


def random_record(
    rng: np.random.Generator,
    sentence_id: int | None = None,
    with_words: bool | None = None,
    max_subwords: int = 6,
    max_dim: int = 5,
) -> EmbeddingRecord:
    """A random valid embedding record; word boundaries fall arbitrarily."""
    n = int(rng.integers(1, max_subwords + 1))
    d = int(rng.integers(1, max_dim + 1))
    embeddings = rng.standard_normal((n, d)).astype(np.float32)
    word_ids = [0]
    for _ in range(n - 1):
        word_ids.append(word_ids[-1] + int(rng.integers(0, 2)))
    if with_words is None:
        with_words = bool(rng.integers(0, 2))
    words = [f"w{k}" for k in range(word_ids[-1] + 1)] if with_words else None
    if sentence_id is None:
        sentence_id = int(rng.integers(0, 2**63))
    return EmbeddingRecord(sentence_id, embeddings, word_ids, words)


def random_bio_tags(
    rng: np.random.Generator,
    length: int,
    max_spans: int = 3,
    labels: tuple[str, ...] = ("PER", "LOC", "ORG"),
) -> list[str]:
    """Well-formed random BIO tags with up to max_spans disjoint spans."""
    tags = ["O"] * length
    for _ in range(int(rng.integers(0, max_spans + 1))):
        if length == 0:
            break
        start = int(rng.integers(0, length))
        end = min(length - 1, start + int(rng.integers(0, 3)))
        if any(tags[pos] != "O" for pos in range(start, end + 1)):
            continue
        label = labels[int(rng.integers(0, len(labels)))]
        tags[start] = f"B-{label}"
        for pos in range(start + 1, end + 1):
            tags[pos] = f"I-{label}"
    return tags
