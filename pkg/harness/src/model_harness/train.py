"""Seeded training loop with a JSONL loss log and atomic checkpointing."""

from __future__ import annotations

import json
import random
import time
from pathlib import Path

import torch
from torch import nn

from .config import HarnessConfig
from .data import load_pairs
from .model import BOS, EOS, PAD, CharVocab, Seq2SeqTransformer, save_checkpoint

DETERMINISM_TOLERANCE = 1e-6  # repeat runs at a fixed thread count match to this


def _encode_batch(vocab: CharVocab, texts: list[str], max_len: int, add_eos: bool, bos: bool):
    rows = []
    for text in texts:
        ids = vocab.encode(text)[: max_len - int(add_eos)]
        if add_eos:
            ids = ids + [EOS]
        if bos:
            ids = [BOS] + ids
        rows.append(ids)
    width = max(len(r) for r in rows)
    return torch.tensor([r + [PAD] * (width - len(r)) for r in rows], dtype=torch.long)


def exact_match_rate(
    model: Seq2SeqTransformer, vocab: CharVocab, pairs: list[tuple[str, str]], batch_size: int = 64
) -> float:
    """Greedy-decode exact-match percentage over (source, target) pairs."""
    hits = 0
    for lo in range(0, len(pairs), batch_size):
        chunk = pairs[lo : lo + batch_size]
        src = _encode_batch(vocab, [s for s, _ in chunk], model.max_source_len, False, False)
        decoded = model.greedy_decode(src)
        for row, (_, target) in zip(decoded, chunk):
            if vocab.decode(row.tolist()) == target:
                hits += 1
    return 100.0 * hits / len(pairs)


def train(cfg: HarnessConfig) -> Path:
    """Train on (source, target) pairs; returns the checkpoint directory."""
    pairs = load_pairs(cfg.data)  # schema violations abort before any training
    if cfg.threads > 0:
        torch.set_num_threads(cfg.threads)
    torch.manual_seed(cfg.seed)
    rng = random.Random(cfg.seed)

    vocab = CharVocab.build([s for s, _ in pairs] + [t for _, t in pairs])
    model = Seq2SeqTransformer(
        vocab_size=len(vocab),
        d_model=cfg.d_model,
        num_heads=cfg.num_heads,
        num_layers=cfg.num_layers,
        feedforward=cfg.feedforward,
        dropout=cfg.dropout,
        max_source_len=cfg.max_source_len,
        max_target_len=cfg.max_target_len,
    )
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    criterion = nn.CrossEntropyLoss(ignore_index=PAD)

    checkpoint_dir = Path(cfg.checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    log_path = checkpoint_dir / "train_log.jsonl"

    max_steps = cfg.resolved_max_steps
    batch_size = min(cfg.resolved_batch_size, len(pairs))
    order: list[int] = []
    started = time.perf_counter()
    final_loss = float("nan")
    stopped_early = False

    with open(log_path, "w", encoding="utf-8") as log:
        log.write(
            json.dumps(
                {
                    "event": "start",
                    "stage": cfg.stage,
                    "examples": len(pairs),
                    "max_steps": max_steps,
                    "batch_size": batch_size,
                    "learning_rate": cfg.learning_rate,
                    "seed": cfg.seed,
                    "vocab_size": len(vocab),
                    "determinism_tolerance": DETERMINISM_TOLERANCE,
                }
            )
            + "\n"
        )
        for step in range(1, max_steps + 1):
            if len(order) < batch_size:
                refill = list(range(len(pairs)))
                rng.shuffle(refill)
                order.extend(refill)
            batch_idx = [order.pop() for _ in range(batch_size)]
            sources = [pairs[i][0] for i in batch_idx]
            targets = [pairs[i][1] for i in batch_idx]
            src = _encode_batch(vocab, sources, cfg.max_source_len, False, False)
            tgt_in = _encode_batch(vocab, targets, cfg.max_target_len, False, True)
            tgt_out = _encode_batch(vocab, targets, cfg.max_target_len, True, False)
            logits = model(src, tgt_in)
            loss = criterion(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
            optimizer.zero_grad()
            loss.backward()
            if cfg.grad_clip > 0:
                nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
            optimizer.step()
            final_loss = loss.detach().item()
            if step % cfg.log_every == 0 or step == 1 or step == max_steps:
                log.write(json.dumps({"event": "step", "step": step, "loss": final_loss}) + "\n")
                log.flush()
            if (
                cfg.eval_every > 0
                and cfg.target_exact_match > 0
                and step % cfg.eval_every == 0
            ):
                em = exact_match_rate(model, vocab, pairs)
                model.train()
                log.write(json.dumps({"event": "probe", "step": step, "exact_match": em}) + "\n")
                log.flush()
                if em >= cfg.target_exact_match:
                    stopped_early = True
                    break
        log.write(
            json.dumps(
                {
                    "event": "done",
                    "final_loss": final_loss,
                    "stopped_early": stopped_early,
                    "elapsed_s": round(time.perf_counter() - started, 2),
                }
            )
            + "\n"
        )

    save_checkpoint(
        checkpoint_dir,
        model,
        vocab,
        {
            "d_model": cfg.d_model,
            "num_heads": cfg.num_heads,
            "num_layers": cfg.num_layers,
            "feedforward": cfg.feedforward,
            "dropout": cfg.dropout,
            "max_source_len": cfg.max_source_len,
            "max_target_len": cfg.max_target_len,
            "stage": cfg.stage,
            "seed": cfg.seed,
            "final_loss": final_loss,
        },
    )
    return checkpoint_dir


def read_losses(checkpoint_dir: str | Path) -> list[tuple[int, float]]:
    losses = []
    with open(Path(checkpoint_dir) / "train_log.jsonl", encoding="utf-8") as fh:
        for raw in fh:
            record = json.loads(raw)
            if record.get("event") == "step":
                losses.append((record["step"], record["loss"]))
    return losses
