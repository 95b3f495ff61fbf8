"""Fixtures that stage data through the environment toolkit's CLI only."""

from __future__ import annotations

import json
import subprocess

import pytest


def toolkit(*args: str) -> str:
    """Run a `symenv` subcommand and return stripped stdout."""
    result = subprocess.run(
        ["symenv", *args], capture_output=True, text=True, check=True
    )
    return result.stdout.strip()


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """A small generated corpus (source/target JSONL) for training sanity runs."""
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    toolkit("gen-corpus", "--domain", "alchemy", "--n", "60", "--seed", "5", "--out", str(path))
    return path


@pytest.fixture(scope="session")
def toy_episodes(tmp_path_factory):
    """40 five-step episodes; instructions are program texts, gold states come
    from the toolkit's `execute` subcommand (never computed in-process)."""
    base = tmp_path_factory.mktemp("episodes")
    cfg = base / "sampler.kv"
    cfg.write_text("program_length = 5..5\nalchemy_fill_prob = 0.9\n", "utf-8")
    states = toolkit(
        "sample-state", "--domain", "alchemy", "--seed", "12", "--n", "60",
        "--config", str(cfg),
    ).splitlines()
    episodes = []
    for k, init in enumerate(states):
        if len(episodes) >= 40:
            break
        try:
            program = toolkit(
                "sample-program", "--domain", "alchemy", "--state", init,
                "--seed", str(1000 + k), "--config", str(cfg),
            )
        except subprocess.CalledProcessError:
            continue  # dead-end initial state
        actions = program.split(" ; ")
        gold = []
        try:
            for t in range(1, len(actions) + 1):
                gold.append(
                    toolkit(
                        "execute", "--domain", "alchemy", "--state", init,
                        "--program", " ; ".join(actions[:t]),
                    )
                )
        except subprocess.CalledProcessError:
            continue
        episodes.append(
            {
                "id": f"toy-{len(episodes)}",
                "domain": "alchemy",
                "init": init,
                "instructions": actions,
                "gold": gold,
            }
        )
    assert len(episodes) == 40
    path = base / "episodes.jsonl"
    path.write_text("\n".join(json.dumps(e) for e in episodes) + "\n", "utf-8")
    return path


@pytest.fixture(scope="session")
def toy_pairs(toy_episodes, tmp_path_factory):
    """The 200 fine-tune pairs the toolkit derives from the toy episodes."""
    path = tmp_path_factory.mktemp("pairs") / "pairs.jsonl"
    toolkit(
        "make-pairs", "--episodes", str(toy_episodes), "--domain", "alchemy",
        "--out", str(path),
    )
    return path
