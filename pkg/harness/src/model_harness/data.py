"""JSONL input handling and atomic output writes.

The harness reads two upstream schemas and never interprets state text:

* training rows need non-empty string ``source`` and ``target`` fields
  (pre-training corpora and fine-tune pair files both qualify);
* episode rows need ``id``, ``init``, ``instructions[]``, ``gold[]`` with
  equal-length arrays; prediction sources are built by the documented
  serialization ``init + " [SEP] " + I1 .. It`` (cumulative, space-joined).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

SEP = " [SEP] "


class SchemaError(ValueError):
    pass


def load_pairs(path: str | Path) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as e:
                raise SchemaError(f"line {lineno}: invalid JSON ({e})") from None
            source, target = record.get("source"), record.get("target")
            if not isinstance(source, str) or not source:
                raise SchemaError(f"line {lineno}: missing or empty 'source'")
            if not isinstance(target, str) or not target:
                raise SchemaError(f"line {lineno}: missing or empty 'target'")
            pairs.append((source, target))
    if not pairs:
        raise SchemaError(f"{path}: no training examples")
    return pairs


@dataclass(frozen=True)
class EpisodeInputs:
    id: str
    sources: tuple[str, ...]  # one model input per step, cumulative history


def load_episode_inputs(path: str | Path) -> list[EpisodeInputs]:
    episodes: list[EpisodeInputs] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as e:
                raise SchemaError(f"line {lineno}: invalid JSON ({e})") from None
            missing = [k for k in ("id", "init", "instructions", "gold") if k not in record]
            if missing:
                raise SchemaError(f"line {lineno}: missing fields {missing}")
            instructions = record["instructions"]
            if not isinstance(instructions, list) or not instructions:
                raise SchemaError(f"line {lineno}: 'instructions' must be a non-empty array")
            if len(instructions) != len(record["gold"]):
                raise SchemaError(
                    f"line {lineno}: {len(instructions)} instructions vs "
                    f"{len(record['gold'])} gold states"
                )
            init = record["init"]
            sources = tuple(
                init + SEP + " ".join(instructions[:t]) for t in range(1, len(instructions) + 1)
            )
            episodes.append(EpisodeInputs(id=str(record["id"]), sources=sources))
    if not episodes:
        raise SchemaError(f"{path}: no episodes")
    return episodes


def write_jsonl_atomic(path: str | Path, records: Iterable[dict]) -> int:
    """Write via a temp file and rename, so readers never see partial output."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    count = 0
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    os.replace(tmp, path)
    return count
