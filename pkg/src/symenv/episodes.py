"""Episode interchange format: loading, fine-tune pair emission, converters.

An episode file is JSON Lines, one interaction per line::

    {"id": "...", "domain": "alchemy", "init": "<state>",
     "instructions": ["...", ...], "gold": ["<state>", ...]}

Fine-tune pairs concatenate the instruction history: pair ``t`` has source
``<init> [SEP] <I1> <I2> ... <It>`` and target ``<St>``, so a five-step
interaction yields five pairs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import SEP_TOKEN
from .evaluator import InteractionEpisode
from .states import Domain, ParseError, parse_state, render_state

EPISODE_FIELDS = ("id", "domain", "init", "instructions", "gold")


class LengthMismatch(ValueError):
    pass


def load_episodes(path: str | Path, domain: Domain) -> list[InteractionEpisode]:
    """Parse and state-validate every line; errors carry the line number."""
    episodes = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ParseError(f"line {lineno}: invalid JSON ({e})") from None
            missing = [f for f in EPISODE_FIELDS if f not in record]
            if missing:
                raise ParseError(f"line {lineno}: missing fields {missing}")
            if record["domain"] != domain.value:
                raise ParseError(
                    f"line {lineno}: episode domain {record['domain']!r} is not {domain.value!r}"
                )
            instructions = tuple(record["instructions"])
            gold_texts = tuple(record["gold"])
            if len(instructions) != len(gold_texts):
                raise LengthMismatch(
                    f"line {lineno}: {len(instructions)} instructions vs "
                    f"{len(gold_texts)} gold states"
                )
            try:
                initial = parse_state(domain, record["init"])
                gold = tuple(parse_state(domain, text) for text in gold_texts)
                episode = InteractionEpisode(
                    id=str(record["id"]),
                    domain=domain,
                    initial_state=initial,
                    instructions=instructions,
                    gold_states=gold,
                )
            except ParseError as e:
                raise ParseError(f"line {lineno}: {e.reason}", e.text, e.pos) from None
            except ValueError as e:
                raise ParseError(f"line {lineno}: {e}") from None
            episodes.append(episode)
    return episodes


def write_episodes(episodes: Iterable[InteractionEpisode], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ep in episodes:
            record = {
                "id": ep.id,
                "domain": ep.domain.value,
                "init": render_state(ep.initial_state),
                "instructions": list(ep.instructions),
                "gold": [render_state(s) for s in ep.gold_states],
            }
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
            count += 1
    return count


def emit_finetune_pairs(
    episodes: Iterable[InteractionEpisode],
) -> Iterator[tuple[str, int, str, str]]:
    """(episode id, step, source, target) with cumulative instruction history."""
    for ep in episodes:
        init_text = render_state(ep.initial_state)
        for t in range(1, ep.steps + 1):
            history = " ".join(ep.instructions[:t])
            source = f"{init_text} {SEP_TOKEN} {history}"
            yield ep.id, t, source, render_state(ep.gold_states[t - 1])


def write_pairs(episodes: Iterable[InteractionEpisode], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for episode_id, step, source, target in emit_finetune_pairs(episodes):
            record = {"id": episode_id, "step": step, "source": source, "target": target}
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
            count += 1
    return count


# --- best-effort upstream converters ------------------------------------------
#
# Kept outside the acceptance suite: upstream distributions vary, so these
# adapters accept one documented tabular shape per source.

_TANGRAM_DIGITS = {str(i): chr(ord("A") + i) for i in range(5)}


def _convert_scone_state(domain: Domain, text: str) -> str:
    """Native scone states are space-separated slots; tangram figures may be digits."""
    slots = text.split()
    converted = []
    for slot in slots:
        idx, _, payload = slot.partition(":")
        if domain == Domain.TANGRAMS:
            payload = _TANGRAM_DIGITS.get(payload, payload) or "_"
        converted.append(f"{idx}:{payload or '_'}")
    if domain == Domain.TANGRAMS and len(converted) < 5:
        converted += [f"{i}:_" for i in range(len(converted) + 1, 6)]
    return "|".join(converted)


def convert_tsv(
    path: str | Path, domain: Domain, source_format: str
) -> list[InteractionEpisode]:
    """Adapt ``id <TAB> state0 <TAB> utt1 <TAB> state1 ...`` rows to episodes.

    ``scone-tsv`` translates the native state spellings; ``propara-grids`` and
    ``recipes`` expect states already flattened to the ``ent:... loc:...`` form.
    """
    if source_format not in ("scone-tsv", "propara-grids", "recipes"):
        raise ValueError(f"unknown source format {source_format!r}")
    episodes = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if len(cells) < 4 or len(cells) % 2 != 0:
                raise ParseError(
                    f"line {lineno}: expected id, state0, then utterance/state pairs"
                )
            episode_id, state_texts, instructions = cells[0], [cells[1]], []
            for i in range(2, len(cells), 2):
                instructions.append(cells[i])
                state_texts.append(cells[i + 1])
            if source_format == "scone-tsv":
                state_texts = [_convert_scone_state(domain, t) for t in state_texts]
            try:
                states = [parse_state(domain, t) for t in state_texts]
                episodes.append(
                    InteractionEpisode(
                        id=str(episode_id),
                        domain=domain,
                        initial_state=states[0],
                        instructions=tuple(instructions),
                        gold_states=tuple(states[1:]),
                    )
                )
            except ValueError as e:
                raise ParseError(f"line {lineno}: {e}") from None
    return episodes
