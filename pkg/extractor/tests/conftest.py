"""Tiny deterministic checkpoints for offline tests.

Two fixture families: a vanilla encoder (BERT-style, CLS/SEP specials,
WordPiece subwords) and an encoder-decoder MT model (M2M100-style, with a
language-tag special token prepended by the tokenizer).  Both are randomly
initialized under a fixed seed; the tokenizers are handcrafted so the
subword segmentation in tests is pinned ("york" splits into two pieces).
"""

from __future__ import annotations

import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.normalizers import NFD, Lowercase, Sequence, StripAccents
from tokenizers.pre_tokenizers import Whitespace
from tokenizers.processors import TemplateProcessing
from transformers import (
    BertConfig,
    BertModel,
    M2M100Config,
    M2M100Model,
    PreTrainedTokenizerFast,
)

WORDS = [
    "new", "yor", "##k", "is", "big", "maria", "flew", "to",
    "neu", "ist", "gross", "flog", "nach", "ana", "lives", "in",
    "wohnt", "im", "fort", "alt", "town",
]


def _wordpiece(vocab: dict[str, int]) -> Tokenizer:
    raw = Tokenizer(WordPiece(vocab, unk_token="[UNK]", max_input_chars_per_word=64))
    raw.normalizer = Sequence([NFD(), StripAccents(), Lowercase()])
    raw.pre_tokenizer = Whitespace()
    return raw


def _bert_dir(root):
    specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"]
    vocab = {token: index for index, token in enumerate(specials + WORDS)}
    raw = _wordpiece(vocab)
    raw.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=raw,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
    )
    torch.manual_seed(7)
    model = BertModel(
        BertConfig(
            vocab_size=len(vocab),
            hidden_size=16,
            num_hidden_layers=2,
            num_attention_heads=2,
            intermediate_size=32,
            max_position_embeddings=64,
        )
    )
    path = root / "tiny-bert"
    tokenizer.save_pretrained(str(path))
    model.save_pretrained(str(path))
    return path


def _mt_dir(root):
    specials = ["<pad>", "<unk>", "</s>", "eng_Latn", "deu_Latn"]
    vocab = {token: index for index, token in enumerate(specials + WORDS)}
    raw = Tokenizer(WordPiece(vocab, unk_token="<unk>", max_input_chars_per_word=64))
    raw.normalizer = Sequence([NFD(), StripAccents(), Lowercase()])
    raw.pre_tokenizer = Whitespace()
    raw.post_processor = TemplateProcessing(
        single="eng_Latn $A </s>",
        special_tokens=[
            ("eng_Latn", vocab["eng_Latn"]),
            ("</s>", vocab["</s>"]),
        ],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=raw,
        unk_token="<unk>",
        pad_token="<pad>",
        eos_token="</s>",
        additional_special_tokens=["eng_Latn", "deu_Latn"],
    )
    torch.manual_seed(11)
    model = M2M100Model(
        M2M100Config(
            vocab_size=len(vocab),
            d_model=16,
            encoder_layers=2,
            decoder_layers=2,
            encoder_attention_heads=2,
            decoder_attention_heads=2,
            encoder_ffn_dim=32,
            decoder_ffn_dim=32,
            max_position_embeddings=64,
            pad_token_id=vocab["<pad>"],
            bos_token_id=vocab["</s>"],
            eos_token_id=vocab["</s>"],
            decoder_start_token_id=vocab["</s>"],
        )
    )
    path = root / "tiny-mt"
    tokenizer.save_pretrained(str(path))
    model.save_pretrained(str(path))
    return path


@pytest.fixture(scope="session")
def bert_checkpoint(tmp_path_factory):
    return str(_bert_dir(tmp_path_factory.mktemp("checkpoints")))


@pytest.fixture(scope="session")
def mt_checkpoint(tmp_path_factory):
    return str(_mt_dir(tmp_path_factory.mktemp("checkpoints")))


TOY_PAIRS = [
    ("new york is big", "neu york ist gross", "0-0 1-1 2-2 3-3"),
    ("maria flew to york", "maria flog nach york", "0-0 1-1 2-2 3-3"),
    ("ana lives in fort town", "ana wohnt im fort town", "0-0 1-1 2-2 3-3 4-4"),
    ("york is big", "york ist gross", "0-0 1-1 2-2"),
]


@pytest.fixture
def toy_corpus(tmp_path):
    train = tmp_path / "train.txt"
    gold = tmp_path / "gold.txt"
    train.write_text("".join(f"{src} ||| {tgt}\n" for src, tgt, _ in TOY_PAIRS))
    gold.write_text("".join(f"{edges}\n" for _, _, edges in TOY_PAIRS))
    return str(train), str(gold)
