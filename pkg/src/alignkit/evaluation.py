"""Intrinsic and extrinsic metrics.

Intrinsic: alignment error rate with precision/recall against sure and
possible gold edges, plus a stopword-filtered variant.  Extrinsic:
entity-level span F1 over BIO tag sequences with exact-match counting.
Corpus-level numbers pool counts over sentences (micro-averaging).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .embed_io import GoldAlignment
from .projection import decode_spans

FILTER_FULL = "full"
FILTER_SOURCE_ONLY = "source-only"


@dataclass
class AerReport:
    """Alignment error rate, 1 - (|A∩S| + |A∩P|) / (|A| + |S|), lower is better."""

    aer: float
    precision: float
    recall: float
    predicted_count: int
    sure_count: int
    possible_count: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class F1Report:
    """Entity-level micro-averaged precision/recall/F1 with exact span match."""

    precision: float
    recall: float
    f1: float
    true_positives: int
    predicted_entities: int
    gold_entities: int

    def to_dict(self) -> dict:
        return asdict(self)


def compute_corpus_aer(
    pairs: Iterable[tuple[set[tuple[int, int]], GoldAlignment]],
) -> AerReport:
    """Pool per-sentence counts and report corpus-level AER.

    Conventions for degenerate denominators: no predictions and no sure
    edges gives aer 0; no predictions gives precision 1; no sure edges
    gives recall 1.
    """
    hit_sure = hit_possible = predicted = sure = possible = 0
    for prediction, gold in pairs:
        hit_sure += len(prediction & gold.sure)
        hit_possible += len(prediction & gold.possible)
        predicted += len(prediction)
        sure += len(gold.sure)
        possible += len(gold.possible)
    denominator = predicted + sure
    aer = 1.0 - (hit_sure + hit_possible) / denominator if denominator else 0.0
    precision = hit_possible / predicted if predicted else 1.0
    recall = hit_sure / sure if sure else 1.0
    return AerReport(
        aer=aer,
        precision=precision,
        recall=recall,
        predicted_count=predicted,
        sure_count=sure,
        possible_count=possible,
    )


def compute_aer(predicted: set[tuple[int, int]], gold: GoldAlignment) -> AerReport:
    """AER for a single sentence pair."""
    return compute_corpus_aer([(predicted, gold)])


def filter_stopword_edges(
    edges: set[tuple[int, int]],
    source_words: list[str],
    stopwords: set[str],
    banned_targets: Iterable[int] = (),
) -> set[tuple[int, int]]:
    """Drop edges anchored on a stopword source word or a banned target word.

    Stopword matching lowercases the source word.  The same call is applied
    uniformly to predicted, sure, and possible edge sets so the three stay
    consistent.
    """
    banned = set(banned_targets)
    kept: set[tuple[int, int]] = set()
    for i, j in edges:
        if not 0 <= i < len(source_words):
            raise IndexError(
                f"edge source index {i} out of range for {len(source_words)} words"
            )
        if source_words[i].lower() in stopwords:
            continue
        if j in banned:
            continue
        kept.add((i, j))
    return kept


def stopword_banned_targets(
    gold: GoldAlignment, source_words: list[str], stopwords: set[str]
) -> set[int]:
    """Target words whose gold possible edges all come from stopword sources.

    These are the target-language counterparts of the removed stopwords;
    dropping them keeps both sides of the filtered evaluation consistent.
    Target words with no gold edge at all are never banned.
    """
    support: dict[int, bool] = {}
    for i, j in gold.possible:
        if not 0 <= i < len(source_words):
            raise IndexError(
                f"gold source index {i} out of range for {len(source_words)} words"
            )
        is_stop = source_words[i].lower() in stopwords
        support[j] = support.get(j, True) and is_stop
    return {j for j, all_stop in support.items() if all_stop}


def filter_aer_pair(
    predicted: set[tuple[int, int]],
    gold: GoldAlignment,
    source_words: list[str],
    stopwords: set[str],
    mode: str = FILTER_FULL,
) -> tuple[set[tuple[int, int]], GoldAlignment]:
    """Apply stopword filtering to one sentence pair's prediction and gold.

    Mode "source-only" removes just the edges anchored on stopword source
    words; mode "full" additionally removes every target word whose gold
    support was entirely stopwords.
    """
    if mode not in (FILTER_FULL, FILTER_SOURCE_ONLY):
        raise ValueError(f"unknown filter mode {mode!r}")
    banned: set[int] = set()
    if mode == FILTER_FULL:
        banned = stopword_banned_targets(gold, source_words, stopwords)
    filtered_gold = GoldAlignment(
        sure=filter_stopword_edges(gold.sure, source_words, stopwords, banned),
        possible=filter_stopword_edges(gold.possible, source_words, stopwords, banned),
    )
    filtered_predicted = filter_stopword_edges(
        predicted, source_words, stopwords, banned
    )
    return filtered_predicted, filtered_gold


def load_stopwords(path: str | Path) -> set[str]:
    """Read a stopword list, one word per line; blank lines and # comments skipped."""
    words: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            word = line.strip()
            if word and not word.startswith("#"):
                words.add(word.lower())
    return words


def bundled_stopwords_path() -> Path:
    """Location of the English stopword list shipped with the package."""
    return Path(resources.files("alignkit").joinpath("data/stopwords_en.txt"))


def _span_set(tags: list[str]) -> set[tuple[str, int, int]]:
    return {(s.label, s.start, s.end) for s in decode_spans(tags)}


def compute_f1(
    predicted: Iterable[list[str]], gold: Iterable[list[str]]
) -> F1Report:
    """Entity-level micro F1: an entity counts only on exact label and bounds."""
    predicted = list(predicted)
    gold = list(gold)
    if len(predicted) != len(gold):
        raise ValueError(
            f"sentence count mismatch: {len(predicted)} predicted, {len(gold)} gold"
        )
    true_positives = predicted_entities = gold_entities = 0
    for index, (pred_tags, gold_tags) in enumerate(zip(predicted, gold)):
        if len(pred_tags) != len(gold_tags):
            raise ValueError(
                f"sentence {index}: {len(pred_tags)} predicted tags, "
                f"{len(gold_tags)} gold tags"
            )
        pred_spans = _span_set(pred_tags)
        gold_spans = _span_set(gold_tags)
        true_positives += len(pred_spans & gold_spans)
        predicted_entities += len(pred_spans)
        gold_entities += len(gold_spans)
    precision = true_positives / predicted_entities if predicted_entities else 0.0
    recall = true_positives / gold_entities if gold_entities else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return F1Report(
        precision=precision,
        recall=recall,
        f1=f1,
        true_positives=true_positives,
        predicted_entities=predicted_entities,
        gold_entities=gold_entities,
    )
