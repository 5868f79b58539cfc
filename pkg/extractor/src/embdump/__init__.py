"""Encoder embedding dumps in TAEM format plus adapter fine-tuning."""

from .extract import ExtractorConfig, extract, read_corpus
from .finetune import (
    FinetuneConfig,
    PairExample,
    evaluate_objective,
    finetune_adapter,
    load_parallel_corpus,
    pair_objective,
)
from .lora import LoraLinear, apply_adapters, load_adapter, save_adapter
from .models import EncoderBackend, feed_forward_linears, load_backend

__version__ = "0.1.0"

__all__ = [
    "EncoderBackend",
    "ExtractorConfig",
    "FinetuneConfig",
    "LoraLinear",
    "PairExample",
    "apply_adapters",
    "evaluate_objective",
    "extract",
    "feed_forward_linears",
    "finetune_adapter",
    "load_adapter",
    "load_backend",
    "load_parallel_corpus",
    "pair_objective",
    "read_corpus",
    "save_adapter",
]
