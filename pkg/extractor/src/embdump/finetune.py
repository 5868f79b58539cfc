"""Adapter fine-tuning on gold word alignments.

The objective rewards probability mass on gold-aligned subword pairs in
both normalized directions; training maximizes it by minimizing its
negation.  Word-level gold edges are expanded to subword pairs as the full
product of the two words' subwords.  Hidden states are taken from the last
encoder layer, where alignments are extracted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import torch
from alignkit import parse_pharaoh

from .lora import apply_adapters, save_adapter
from .models import EncoderBackend, load_backend

log = logging.getLogger(__name__)


@dataclass
class FinetuneConfig:
    model_id: str
    epochs: int = 20
    learning_rate: float = 1e-4
    rank: int = 8
    alpha: float = 32.0
    dropout: float = 0.01
    seed: int = 0
    one_based_gold: bool = False
    source_language_code: str | None = None
    target_language_code: str | None = None

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError(f"adapter rank must be positive, got {self.rank}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")


@dataclass
class PairExample:
    source_words: list[str]
    target_words: list[str]
    word_edges: set[tuple[int, int]]
    line_no: int


def load_parallel_corpus(
    train_path: str | Path, gold_path: str | Path, one_based: bool = False
) -> list[PairExample]:
    """Read "source ||| target" sentence pairs and word-level gold edges."""
    with open(train_path, "r", encoding="utf-8") as handle:
        pair_lines = handle.read().splitlines()
    with open(gold_path, "r", encoding="utf-8") as handle:
        gold_lines = handle.read().splitlines()
    if len(pair_lines) != len(gold_lines):
        raise ValueError(
            f"corpus has {len(pair_lines)} pairs but gold has {len(gold_lines)} lines"
        )
    examples = []
    for line_no, (pair_line, gold_line) in enumerate(
        zip(pair_lines, gold_lines), start=1
    ):
        if "|||" not in pair_line:
            raise ValueError(f"line {line_no}: expected 'source ||| target'")
        source_text, _, target_text = pair_line.partition("|||")
        source_words = source_text.split()
        target_words = target_text.split()
        if not source_words or not target_words:
            raise ValueError(f"line {line_no}: empty sentence side")
        gold = parse_pharaoh(gold_line, one_based=one_based, line_no=line_no)
        for i, j in gold.possible:
            if i >= len(source_words) or j >= len(target_words):
                raise ValueError(
                    f"line {line_no}: gold edge ({i}, {j}) out of range for "
                    f"{len(source_words)}x{len(target_words)} words"
                )
        examples.append(
            PairExample(source_words, target_words, gold.possible, line_no)
        )
    return examples


def _disable_layerdrop(encoder: torch.nn.Module) -> None:
    # stochastic depth would skip layers in train mode and starve the
    # requested hidden-states index; alignment tuning wants every layer
    for module in encoder.modules():
        if hasattr(module, "layerdrop"):
            module.layerdrop = 0.0


def _content_positions(word_map: list[int | None]) -> tuple[list[int], list[int]]:
    positions = [pos for pos, word in enumerate(word_map) if word is not None]
    return positions, [word_map[pos] for pos in positions]


def _subwords_by_word(word_ids: list[int]) -> dict[int, list[int]]:
    lookup: dict[int, list[int]] = {}
    for subword_index, word in enumerate(word_ids):
        lookup.setdefault(word, []).append(subword_index)
    return lookup


def pair_objective(
    backend: EncoderBackend, example: PairExample, layer: int | None = None
) -> torch.Tensor:
    """The supervision objective for one sentence pair, differentiable.

    Both sides go through the encoder in one padded batch; the similarity
    matrix covers content subwords only.
    """
    target_layer = backend.layer_count if layer is None else layer
    encoded = backend.tokenizer(
        [example.source_words, example.target_words],
        is_split_into_words=True,
        padding=True,
        return_tensors="pt",
    )
    output = backend.encoder(
        input_ids=encoded["input_ids"],
        attention_mask=encoded["attention_mask"],
        output_hidden_states=True,
    )
    hidden = output.hidden_states[target_layer]
    positions_x, word_ids_x = _content_positions(encoded.word_ids(0))
    positions_y, word_ids_y = _content_positions(encoded.word_ids(1))
    for side, words, found in (
        ("source", example.source_words, word_ids_x),
        ("target", example.target_words, word_ids_y),
    ):
        missing = set(range(len(words))) - set(found)
        if missing:
            word = words[min(missing)]
            raise ValueError(
                f"line {example.line_no}: tokenizer produced no subwords "
                f"for {side} word {word!r}"
            )
    h_x = hidden[0, positions_x]
    h_y = hidden[1, positions_y]
    similarity = h_x @ h_y.T
    s_xy = torch.softmax(similarity, dim=1)
    s_yx = torch.softmax(similarity.T, dim=1)
    by_word_x = _subwords_by_word(word_ids_x)
    by_word_y = _subwords_by_word(word_ids_y)
    n = float(len(positions_x))
    m = float(len(positions_y))
    total = similarity.new_zeros(())
    for word_i, word_j in sorted(example.word_edges):
        for i in by_word_x[word_i]:
            for j in by_word_y[word_j]:
                total = total + 0.5 * (s_xy[i, j] / n + s_yx[j, i] / m)
    return total


def evaluate_objective(
    backend: EncoderBackend, examples: list[PairExample], layer: int | None = None
) -> float:
    """Mean objective over the corpus, without gradients."""
    backend.encoder.eval()
    with torch.no_grad():
        scores = [float(pair_objective(backend, ex, layer)) for ex in examples]
    return sum(scores) / len(scores) if scores else 0.0


def finetune_adapter(
    train_path: str | Path,
    gold_path: str | Path,
    config: FinetuneConfig,
    adapter_out: str | Path,
) -> list[float]:
    """Train adapters and save them; returns the per-epoch mean loss (-objective)."""
    examples = load_parallel_corpus(train_path, gold_path, config.one_based_gold)
    backend = load_backend(
        config.model_id, config.source_language_code, config.target_language_code
    )
    _disable_layerdrop(backend.encoder)
    torch.manual_seed(config.seed)
    apply_adapters(backend.encoder, config.rank, config.alpha, config.dropout)
    trainable = [p for p in backend.encoder.parameters() if p.requires_grad]
    optimizer = torch.optim.AdamW(trainable, lr=config.learning_rate)
    history: list[float] = []
    for epoch in range(config.epochs):
        backend.encoder.train()
        epoch_loss = 0.0
        for example in examples:
            optimizer.zero_grad()
            loss = -pair_objective(backend, example)
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item()
        mean_loss = epoch_loss / len(examples) if examples else 0.0
        history.append(mean_loss)
        log.info("epoch %d: loss %.6f", epoch + 1, mean_loss)
    backend.encoder.eval()
    save_adapter(
        backend.encoder, adapter_out, config.rank, config.alpha, config.dropout
    )
    return history
