"""Dump per-layer encoder embeddings for a tokenized corpus.

Each corpus line (one whitespace-tokenized sentence) becomes one TAEM
record: the hidden states of its content subwords at the requested layer,
plus the tokenizer's subword-to-word map.  Special tokens (BOS/EOS,
language tags, padding) carry no word index and are excluded, so the
record covers content subwords only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from alignkit import EmbeddingRecord, write_embeddings

from .models import EncoderBackend, encode_hidden_states, load_backend

log = logging.getLogger(__name__)


@dataclass
class ExtractorConfig:
    """Extraction settings; layer 0 is the embedding output, k the k-th layer."""

    model_id: str
    layer: int
    source_language_code: str | None = None
    target_language_code: str | None = None
    batch_size: int = 16

    def __post_init__(self) -> None:
        if self.layer < 0:
            raise ValueError(f"layer must be non-negative, got {self.layer}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")


def read_corpus(path: str | Path) -> list[list[str]]:
    """Whitespace-tokenized sentences, one per line; empty lines rejected."""
    sentences = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            words = line.split()
            if not words:
                raise ValueError(f"line {line_no}: empty sentence cannot be embedded")
            sentences.append(words)
    return sentences


def records_for_batch(
    backend: EncoderBackend,
    batch_words: list[list[str]],
    layer: int,
    first_sentence_id: int,
) -> list[EmbeddingRecord]:
    hidden, word_maps = encode_hidden_states(backend, batch_words, layer)
    records = []
    for offset, (words, word_map) in enumerate(zip(batch_words, word_maps)):
        positions = [pos for pos, word in enumerate(word_map) if word is not None]
        word_ids = [word_map[pos] for pos in positions]
        seen = set(word_ids)
        for index, word in enumerate(words):
            if index not in seen:
                raise ValueError(
                    f"sentence {first_sentence_id + offset}: tokenizer produced "
                    f"no subwords for word {word!r}"
                )
        embeddings = hidden[offset, positions].numpy()
        records.append(
            EmbeddingRecord(
                sentence_id=first_sentence_id + offset,
                embeddings=embeddings,
                word_ids=word_ids,
                words=list(words),
            )
        )
    return records


def extract(
    corpus: str | Path,
    config: ExtractorConfig,
    output: str | Path,
    backend: EncoderBackend | None = None,
) -> int:
    """Embed a corpus and write one TAEM record per sentence, in order.

    Returns the record count.  A preloaded backend can be passed in to
    amortize model loading across several extractions (e.g. layer sweeps).
    """
    if backend is None:
        backend = load_backend(
            config.model_id,
            config.source_language_code,
            config.target_language_code,
        )
    if config.layer > backend.layer_count:
        raise ValueError(
            f"layer {config.layer} out of range: "
            f"{backend.model_id} has {backend.layer_count} encoder layers"
        )
    sentences = read_corpus(corpus)
    records: list[EmbeddingRecord] = []
    for start in range(0, len(sentences), config.batch_size):
        batch = sentences[start : start + config.batch_size]
        records.extend(records_for_batch(backend, batch, config.layer, start))
    write_embeddings(records, output)
    log.info("wrote %d records to %s", len(records), output)
    return len(records)
