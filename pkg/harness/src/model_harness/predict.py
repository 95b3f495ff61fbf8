"""Batch greedy inference over episode files, emitting evaluator-ready JSONL."""

from __future__ import annotations

from pathlib import Path

from .data import EpisodeInputs, load_episode_inputs, write_jsonl_atomic
from .model import load_checkpoint
from .train import _encode_batch


def predict(
    checkpoint_dir: str | Path,
    episodes_path: str | Path,
    out_path: str | Path,
    batch_size: int = 64,
) -> int:
    """Write one {id, step, state} line per (episode, step); returns the line count."""
    model, vocab, _ = load_checkpoint(checkpoint_dir)
    episodes: list[EpisodeInputs] = load_episode_inputs(episodes_path)
    requests = [
        (ep.id, step, source)
        for ep in episodes
        for step, source in enumerate(ep.sources, 1)
    ]
    rows: list[dict] = []
    for lo in range(0, len(requests), batch_size):
        chunk = requests[lo : lo + batch_size]
        src = _encode_batch(vocab, [s for _, _, s in chunk], model.max_source_len, False, False)
        decoded = model.greedy_decode(src)
        for (episode_id, step, _), ids in zip(chunk, decoded):
            rows.append({"id": episode_id, "step": step, "state": vocab.decode(ids.tolist())})
    return write_jsonl_atomic(out_path, rows)
