"""Adapter mechanics: wrapping, no-op initialization, save/load."""

import pytest
import torch
from torch import nn

from embdump import (
    LoraLinear,
    apply_adapters,
    feed_forward_linears,
    load_adapter,
    load_backend,
    save_adapter,
)


def encoder_forward(backend, words):
    encoded = backend.tokenizer([words], is_split_into_words=True, return_tensors="pt")
    with torch.no_grad():
        out = backend.encoder(
            input_ids=encoded["input_ids"],
            attention_mask=encoded["attention_mask"],
            output_hidden_states=True,
        )
    return out.hidden_states[-1]


class TestLoraLinear:
    def test_zero_init_is_noop(self):
        torch.manual_seed(0)
        base = nn.Linear(8, 4)
        wrapped = LoraLinear(base, rank=2, alpha=16, dropout=0.0)
        wrapped.eval()
        x = torch.randn(3, 8)
        assert torch.equal(wrapped(x), base(x))

    def test_rank_zero_rejected(self):
        with pytest.raises(ValueError, match="rank"):
            LoraLinear(nn.Linear(4, 4), rank=0, alpha=16, dropout=0.0)

    def test_trained_up_projection_changes_output(self):
        torch.manual_seed(0)
        base = nn.Linear(8, 4)
        wrapped = LoraLinear(base, rank=2, alpha=16, dropout=0.0)
        with torch.no_grad():
            wrapped.lora_up.fill_(0.1)
        wrapped.eval()
        x = torch.randn(3, 8)
        assert not torch.equal(wrapped(x), base(x))

    def test_base_frozen_adapters_trainable(self):
        wrapped = LoraLinear(nn.Linear(4, 4), rank=2, alpha=16, dropout=0.0)
        assert not wrapped.base.weight.requires_grad
        assert wrapped.lora_down.requires_grad and wrapped.lora_up.requires_grad


class TestApplyAdapters:
    def test_wraps_ffn_sublayers_of_every_encoder_layer(self, mt_checkpoint):
        backend = load_backend(mt_checkpoint)
        names = apply_adapters(backend.encoder, rank=2, alpha=8, dropout=0.0)
        assert sorted(names) == [
            "layers.0.fc1", "layers.0.fc2", "layers.1.fc1", "layers.1.fc2",
        ]
        for name in names:
            module = backend.encoder.get_submodule(name)
            assert isinstance(module, LoraLinear)

    def test_wraps_bert_ffn_names(self, bert_checkpoint):
        backend = load_backend(bert_checkpoint)
        names = apply_adapters(backend.encoder, rank=2, alpha=8, dropout=0.0)
        assert len(names) == 4  # intermediate.dense + output.dense per layer
        assert all(
            name.endswith(("intermediate.dense", "output.dense")) for name in names
        )

    def test_fresh_adapters_leave_outputs_bitwise_unchanged(self, mt_checkpoint):
        words = ["maria", "flew", "to", "york"]
        plain = load_backend(mt_checkpoint)
        before = encoder_forward(plain, words)
        adapted = load_backend(mt_checkpoint)
        torch.manual_seed(3)
        apply_adapters(adapted.encoder, rank=8, alpha=32, dropout=0.01)
        adapted.encoder.eval()
        after = encoder_forward(adapted, words)
        assert torch.equal(before, after)

    def test_feed_forward_discovery_errors_without_ffn(self):
        with pytest.raises(ValueError, match="no feed-forward sublayers"):
            feed_forward_linears(nn.Sequential(nn.Conv1d(2, 2, 1)))


class TestSaveLoad:
    def test_roundtrip_restores_behavior(self, mt_checkpoint, tmp_path):
        words = ["york", "is", "big"]
        trained = load_backend(mt_checkpoint)
        torch.manual_seed(5)
        apply_adapters(trained.encoder, rank=2, alpha=8, dropout=0.0)
        with torch.no_grad():
            for name, parameter in trained.encoder.named_parameters():
                if name.endswith("lora_up"):
                    parameter.fill_(0.05)
        trained.encoder.eval()
        expected = encoder_forward(trained, words)

        path = tmp_path / "adapter.pt"
        save_adapter(trained.encoder, path, rank=2, alpha=8, dropout=0.0)
        restored = load_backend(mt_checkpoint)
        meta = load_adapter(restored.encoder, path)
        restored.encoder.eval()
        assert meta == {"rank": 2, "alpha": 8.0, "dropout": 0.0}
        assert torch.equal(encoder_forward(restored, words), expected)

    def test_rejects_foreign_checkpoint(self, mt_checkpoint, tmp_path):
        path = tmp_path / "weights.pt"
        torch.save({"something": 1}, path)
        backend = load_backend(mt_checkpoint)
        with pytest.raises(ValueError, match="not an adapter checkpoint"):
            load_adapter(backend.encoder, path)
