"""Checkpoint loading and encoder resolution.

Works with encoder-decoder MT checkpoints (the encoder is pulled out and
the decoder never runs), sentence encoders, and vanilla encoders.  The
tokenizer must be a fast tokenizer: subword-to-word maps come from its
word_ids bookkeeping.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import torch
from torch import nn
from transformers import AutoModel, AutoTokenizer

log = logging.getLogger(__name__)

# feed-forward sublayer linears across supported encoder families
FFN_SUFFIXES = ("fc1", "fc2", "intermediate.dense", "output.dense")


@dataclass
class EncoderBackend:
    tokenizer: object
    encoder: nn.Module
    layer_count: int
    model_id: str


def load_backend(
    model_id: str,
    source_language: str | None = None,
    target_language: str | None = None,
) -> EncoderBackend:
    """Load tokenizer and encoder from a local path or hub id.

    For encoder-decoder models only the encoder is kept.  Language codes
    are applied to tokenizers that support them (MT tokenizers prepend the
    source language tag); others ignore them.
    """
    tokenizer = AutoTokenizer.from_pretrained(model_id)
    if not getattr(tokenizer, "is_fast", False):
        raise ValueError(
            f"{model_id}: a fast tokenizer is required for subword-to-word maps"
        )
    if source_language is not None and hasattr(tokenizer, "src_lang"):
        tokenizer.src_lang = source_language
    if target_language is not None and hasattr(tokenizer, "tgt_lang"):
        tokenizer.tgt_lang = target_language
    model = AutoModel.from_pretrained(model_id)
    model.eval()
    if getattr(model.config, "is_encoder_decoder", False):
        encoder = model.get_encoder()
    else:
        encoder = model
    layer_count = _encoder_layer_count(encoder)
    log.info("loaded %s: %d encoder layers", model_id, layer_count)
    return EncoderBackend(
        tokenizer=tokenizer,
        encoder=encoder,
        layer_count=layer_count,
        model_id=model_id,
    )


def _encoder_layer_count(encoder: nn.Module) -> int:
    config = encoder.config
    for attribute in ("encoder_layers", "num_hidden_layers"):
        if hasattr(config, attribute):
            return int(getattr(config, attribute))
    raise ValueError(f"cannot determine encoder depth for {type(encoder).__name__}")


def feed_forward_linears(encoder: nn.Module) -> list[str]:
    """Qualified names of the feed-forward linears in every encoder layer.

    Attention projections are excluded even when their names end like a
    feed-forward one (BERT's attention.output.dense).
    """
    names = [
        name
        for name, module in encoder.named_modules()
        if isinstance(module, nn.Linear)
        and any(name.endswith(suffix) for suffix in FFN_SUFFIXES)
        and "attention" not in name
        and "attn" not in name
    ]
    if not names:
        raise ValueError(
            f"no feed-forward sublayers found in {type(encoder).__name__}; "
            f"expected linears named one of {FFN_SUFFIXES}"
        )
    return names


def encode_hidden_states(
    backend: EncoderBackend,
    batch_words: list[list[str]],
    layer: int,
) -> tuple[torch.Tensor, list[list[int | None]]]:
    """Run one batch through the encoder, returning layer activations.

    Returns the (batch, positions, dim) hidden states at the requested
    layer (0 is the embedding output) and, per sentence, the tokenizer's
    word index for every position (None marks special tokens and padding).
    """
    if not 0 <= layer <= backend.layer_count:
        raise ValueError(
            f"layer {layer} out of range: encoder has {backend.layer_count} layers"
        )
    encoded = backend.tokenizer(
        batch_words,
        is_split_into_words=True,
        padding=True,
        return_tensors="pt",
    )
    with torch.no_grad():
        output = backend.encoder(
            input_ids=encoded["input_ids"],
            attention_mask=encoded["attention_mask"],
            output_hidden_states=True,
        )
    hidden = output.hidden_states[layer]
    word_maps = [encoded.word_ids(index) for index in range(len(batch_words))]
    return hidden, word_maps
