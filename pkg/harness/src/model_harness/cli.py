"""CLI: train on pairs/corpus JSONL, predict over episode JSONL."""

from __future__ import annotations

from pathlib import Path

import click

from .config import ConfigError, HarnessConfig
from .data import SchemaError
from .predict import predict as run_predict
from .train import train as run_train


def _build_config(config_path: str | None, overrides: tuple[str, ...]) -> HarnessConfig:
    if config_path:
        cfg = HarnessConfig.from_kv_text(Path(config_path).read_text("utf-8"))
    else:
        cfg = HarnessConfig()
    pairs = {}
    for item in overrides:
        if "=" not in item:
            raise click.UsageError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        pairs[key.strip()] = value.strip()
    try:
        return cfg.with_overrides(pairs)
    except ConfigError as e:
        raise click.UsageError(str(e)) from None


@click.group()
def main() -> None:
    """Sequence-to-sequence harness over symbolic-environment data files."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Flat key-value config file.")
@click.option("--set", "overrides", multiple=True, help="Override config keys, key=value.")
def train(config_path, overrides) -> None:
    """Train per the config's stage and write a checkpoint + loss log."""
    cfg = _build_config(config_path, overrides)
    if cfg.stage not in ("pretrain", "finetune"):
        raise click.UsageError(f"train handles stages pretrain/finetune, not {cfg.stage!r}")
    if not cfg.data:
        raise click.UsageError("config needs 'data' pointing at a corpus or pairs JSONL")
    try:
        checkpoint = run_train(cfg)
    except SchemaError as e:
        raise click.UsageError(str(e)) from None
    click.echo(str(checkpoint))


@main.command("predict")
@click.option("--checkpoint", "checkpoint_dir", type=click.Path(exists=True), required=True)
@click.option("--episodes", "episodes_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
def predict_cmd(checkpoint_dir, episodes_path, out_path, batch_size) -> None:
    """Emit {id, step, state} lines covering every (episode, step)."""
    try:
        count = run_predict(checkpoint_dir, episodes_path, out_path, batch_size=batch_size)
    except (SchemaError, FileNotFoundError) as e:
        raise click.UsageError(str(e)) from None
    click.echo(str(count))


if __name__ == "__main__":
    main()
