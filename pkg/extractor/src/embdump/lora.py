"""Low-rank adapters on the encoder's feed-forward sublayers.

Each adapted linear computes base(x) + up(down(dropout(x))) * (alpha/rank)
with the up-projection initialized to zero, so a freshly applied adapter
changes nothing until it is trained.  Base weights stay frozen; only the
adapter matrices receive gradients.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn

from .models import feed_forward_linears

ADAPTER_SUFFIXES = ("lora_down", "lora_up")


class LoraLinear(nn.Module):
    def __init__(self, base: nn.Linear, rank: int, alpha: float, dropout: float):
        super().__init__()
        if rank < 1:
            raise ValueError(f"adapter rank must be positive, got {rank}")
        self.base = base
        for parameter in self.base.parameters():
            parameter.requires_grad_(False)
        self.lora_down = nn.Parameter(
            torch.randn(rank, base.in_features, dtype=base.weight.dtype) * 0.01
        )
        self.lora_up = nn.Parameter(
            torch.zeros(base.out_features, rank, dtype=base.weight.dtype)
        )
        self.scaling = float(alpha) / float(rank)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        down = nn.functional.linear(self.dropout(x), self.lora_down)
        return self.base(x) + nn.functional.linear(down, self.lora_up) * self.scaling


def apply_adapters(
    encoder: nn.Module, rank: int, alpha: float, dropout: float
) -> list[str]:
    """Wrap every feed-forward linear of the encoder, freezing the rest.

    Returns the qualified names of the adapted modules.
    """
    for parameter in encoder.parameters():
        parameter.requires_grad_(False)
    names = feed_forward_linears(encoder)
    for name in names:
        parent, attribute = _resolve_parent(encoder, name)
        base = getattr(parent, attribute)
        setattr(parent, attribute, LoraLinear(base, rank, alpha, dropout))
    return names


def _resolve_parent(root: nn.Module, qualified: str) -> tuple[nn.Module, str]:
    parts = qualified.split(".")
    module = root
    for part in parts[:-1]:
        module = getattr(module, part)
    return module, parts[-1]


def adapter_parameters(encoder: nn.Module) -> list[nn.Parameter]:
    return [
        parameter
        for name, parameter in encoder.named_parameters()
        if name.split(".")[-1] in ADAPTER_SUFFIXES
    ]


def adapter_state(encoder: nn.Module) -> dict[str, torch.Tensor]:
    return {
        name: parameter.detach().clone()
        for name, parameter in encoder.named_parameters()
        if name.split(".")[-1] in ADAPTER_SUFFIXES
    }


def save_adapter(
    encoder: nn.Module, path: str | Path, rank: int, alpha: float, dropout: float
) -> None:
    payload = {
        "format": "embdump-adapter",
        "version": 1,
        "rank": rank,
        "alpha": alpha,
        "dropout": dropout,
        "state": adapter_state(encoder),
    }
    torch.save(payload, path)


def load_adapter(encoder: nn.Module, path: str | Path) -> dict:
    """Apply a saved adapter to a fresh encoder, restoring its weights."""
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if payload.get("format") != "embdump-adapter":
        raise ValueError(f"{path}: not an adapter checkpoint")
    apply_adapters(
        encoder,
        rank=int(payload["rank"]),
        alpha=float(payload["alpha"]),
        dropout=float(payload["dropout"]),
    )
    state = payload["state"]
    named = dict(encoder.named_parameters())
    missing = [name for name in state if name not in named]
    if missing:
        raise ValueError(f"{path}: adapter weights do not fit this encoder: {missing}")
    with torch.no_grad():
        for name, tensor in state.items():
            named[name].copy_(tensor)
    return {key: payload[key] for key in ("rank", "alpha", "dropout")}


def describe_adapter(path: str | Path) -> str:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    meta = {key: payload[key] for key in ("rank", "alpha", "dropout", "version")}
    return json.dumps(meta, sort_keys=True)
