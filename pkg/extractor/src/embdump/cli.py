"""Command-line surface: extract embedding dumps, finetune adapters."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from .extract import ExtractorConfig, extract
from .finetune import FinetuneConfig, finetune_adapter
from .lora import load_adapter
from .models import load_backend


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embdump",
        description="Per-layer encoder embedding dumps and adapter fine-tuning",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info logging")
    sub = parser.add_subparsers(dest="command", required=True)

    ext = sub.add_parser("extract", help="dump one corpus side to a TAEM file")
    ext.add_argument("corpus", help="whitespace-tokenized sentences, one per line")
    ext.add_argument("--model", required=True, help="checkpoint path or hub id")
    ext.add_argument(
        "--layer",
        type=int,
        required=True,
        help="encoder layer to dump (0 = embedding output, k = after layer k)",
    )
    ext.add_argument("--src-lang", help="language code of this corpus side")
    ext.add_argument("--tgt-lang", help="opposite-side language code (MT tokenizers)")
    ext.add_argument("--out", required=True, help="TAEM output path")
    ext.add_argument("--batch-size", type=int, default=16)
    ext.add_argument("--adapter", help="apply a trained adapter checkpoint first")
    ext.set_defaults(handler=_cmd_extract)

    fit = sub.add_parser("finetune", help="train low-rank adapters on gold alignments")
    fit.add_argument("--model", required=True, help="checkpoint path or hub id")
    fit.add_argument(
        "--train", required=True, help="parallel corpus, 'source ||| target' per line"
    )
    fit.add_argument(
        "--gold", required=True, help="word-level gold alignments, one line per pair"
    )
    fit.add_argument("--out", required=True, help="adapter checkpoint output path")
    fit.add_argument("--epochs", type=int, default=20)
    fit.add_argument("--lr", type=float, default=1e-4)
    fit.add_argument("--rank", type=int, default=8)
    fit.add_argument("--alpha", type=float, default=32.0)
    fit.add_argument("--dropout", type=float, default=0.01)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--one-based-gold", action="store_true")
    fit.add_argument("--src-lang", help="source-side language code (MT tokenizers)")
    fit.add_argument("--tgt-lang", help="target-side language code (MT tokenizers)")
    fit.set_defaults(handler=_cmd_finetune)
    return parser


def _cmd_extract(args: argparse.Namespace) -> int:
    config = ExtractorConfig(
        model_id=args.model,
        layer=args.layer,
        source_language_code=args.src_lang,
        target_language_code=args.tgt_lang,
        batch_size=args.batch_size,
    )
    backend = load_backend(config.model_id, args.src_lang, args.tgt_lang)
    if args.adapter:
        load_adapter(backend.encoder, args.adapter)
        backend.encoder.eval()
    count = extract(args.corpus, config, args.out, backend=backend)
    print(f"records={count}")
    return 0


def _cmd_finetune(args: argparse.Namespace) -> int:
    config = FinetuneConfig(
        model_id=args.model,
        epochs=args.epochs,
        learning_rate=args.lr,
        rank=args.rank,
        alpha=args.alpha,
        dropout=args.dropout,
        seed=args.seed,
        one_based_gold=args.one_based_gold,
        source_language_code=args.src_lang,
        target_language_code=args.tgt_lang,
    )
    history = finetune_adapter(args.train, args.gold, config, args.out)
    for epoch, loss in enumerate(history, start=1):
        print(f"epoch{epoch}.loss={loss!r}")
    print(f"adapter={args.out}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.handler(args)
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
