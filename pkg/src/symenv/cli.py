"""Command-line entry point. Thin wrappers only; stdout stays deterministic.

Exit codes: 0 success, 1 validation findings or execution failure, 2 usage
and parse errors. Logs go to stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import episodes as episodes_mod
from . import evaluator as evaluator_mod
from .executor import ExecError, execute_program
from .programs import enumerate_grammar, parse_program, render_program
from .sampler import (
    ConfigError,
    DeadEnd,
    RetryExhausted,
    SamplerConfig,
    derive_rng,
    load_vocab_file,
    sample_program,
    sample_state,
)
from .states import Domain, ParseError, parse_state, render_state

DOMAIN_CHOICES = click.Choice([d.value for d in Domain])

_vocab_options = [
    click.option("--entity-vocab", "entity_vocab_path", type=click.Path(exists=True),
                 default=None, help="Entity vocabulary file, one span per line."),
    click.option("--location-vocab", "location_vocab_path", type=click.Path(exists=True),
                 default=None, help="Location vocabulary file, one span per line."),
]


def with_vocab_options(command):
    for option in reversed(_vocab_options):
        command = option(command)
    return command


def _load_config(
    config_path: str | None,
    seed: int,
    holdout_path: str | None = None,
    entity_vocab_path: str | None = None,
    location_vocab_path: str | None = None,
) -> SamplerConfig:
    if config_path:
        cfg = SamplerConfig.from_kv_text(Path(config_path).read_text("utf-8"))
        cfg = SamplerConfig.from_dict({**cfg.to_dict(), "seed": seed})
    else:
        cfg = SamplerConfig(seed=seed)
    overrides = {}
    if entity_vocab_path:
        overrides["entity_vocab"] = load_vocab_file(entity_vocab_path)
    if location_vocab_path:
        overrides["location_vocab"] = load_vocab_file(location_vocab_path)
    if overrides:
        cfg = SamplerConfig.from_dict({**cfg.to_dict(), **overrides})
    if holdout_path:
        lines = Path(holdout_path).read_text("utf-8").splitlines()
        cfg = cfg.with_holdout(frozenset(l.strip() for l in lines if l.strip()))
    return cfg


@click.group()
def main() -> None:
    """Symbolic environment toolkit: execute, sample, generate, validate, evaluate."""


@main.command()
@click.option("--domain", type=DOMAIN_CHOICES, required=True)
@click.option("--state", required=True, help="Initial state text.")
@click.option("--program", "program_text", required=True, help="Program text.")
def execute(domain: str, state: str, program_text: str) -> None:
    """Execute a program on a state and print the goal state."""
    dom = Domain(domain)
    try:
        initial = parse_state(dom, state)
        program = parse_program(dom, program_text)
    except ParseError as e:
        raise click.UsageError(str(e)) from None
    try:
        goal = execute_program(initial, program)
    except ExecError as e:
        click.echo(f"execution failed: {e}", err=True)
        sys.exit(1)
    click.echo(render_state(goal))


@main.command("sample-state")
@click.option("--domain", type=DOMAIN_CHOICES, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--n", type=int, default=1, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@with_vocab_options
def sample_state_cmd(domain, seed, n, config_path, entity_vocab_path, location_vocab_path) -> None:
    """Print seeded random states, one per line."""
    dom = Domain(domain)
    try:
        cfg = _load_config(config_path, seed, None, entity_vocab_path, location_vocab_path)
        rng = derive_rng(seed, "state")
        for _ in range(n):
            click.echo(render_state(sample_state(dom, cfg, rng)))
    except ConfigError as e:
        raise click.UsageError(str(e)) from None


@main.command("sample-program")
@click.option("--domain", type=DOMAIN_CHOICES, required=True)
@click.option("--state", required=True, help="State to condition on.")
@click.option("--seed", type=int, required=True)
@click.option("--n", type=int, default=1, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@with_vocab_options
def sample_program_cmd(
    domain, state, seed, n, config_path, entity_vocab_path, location_vocab_path
) -> None:
    """Print seeded random programs executable on the given state."""
    dom = Domain(domain)
    try:
        cfg = _load_config(config_path, seed, None, entity_vocab_path, location_vocab_path)
        initial = parse_state(dom, state)
    except (ConfigError, ParseError) as e:
        raise click.UsageError(str(e)) from None
    rng = derive_rng(seed, "program")
    try:
        for _ in range(n):
            click.echo(render_program(sample_program(dom, initial, cfg, rng)))
    except DeadEnd as e:
        click.echo(f"sampling failed: {e}", err=True)
        sys.exit(1)


@main.command("gen-corpus")
@click.option("--domain", type=DOMAIN_CHOICES, required=True)
@click.option("--n", type=int, default=1_000_000, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--holdout", "holdout_path", type=click.Path(exists=True), default=None,
              help="File of rendered states to exclude, one per line.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Sampler config as a flat key-value file.")
@with_vocab_options
def gen_corpus(
    domain, n, seed, out, workers, holdout_path, config_path, entity_vocab_path,
    location_vocab_path,
) -> None:
    """Generate a pre-training corpus and its manifest sidecar."""
    try:
        cfg = _load_config(config_path, seed, holdout_path, entity_vocab_path, location_vocab_path)
        manifest = corpus_mod.generate_corpus(Domain(domain), cfg, n, out, workers=workers)
    except (RetryExhausted, DeadEnd, ConfigError, ValueError) as e:
        raise click.UsageError(str(e)) from None
    click.echo(f"wrote {manifest.n} examples to {out}", err=True)
    click.echo(manifest.digest)


@main.command("inject-overlap")
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--pool", type=click.Path(exists=True), required=True)
@click.option("--ratio", type=float, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
def inject_overlap_cmd(corpus, pool, ratio, seed, out) -> None:
    """Replace a seeded sample of corpus lines with holdout-pool entries."""
    try:
        manifest = corpus_mod.inject_overlap(corpus, pool, ratio, seed, out)
    except (corpus_mod.SizeError, ValueError) as e:
        raise click.UsageError(str(e)) from None
    click.echo(f"wrote {manifest.n} lines to {out} at overlap ratio {ratio}", err=True)
    click.echo(manifest.digest)


@main.command("validate-corpus")
@click.argument("path", type=click.Path(exists=True))
@click.option("--holdout", "holdout_path", type=click.Path(exists=True), default=None)
@click.option("--json", "as_json", is_flag=True, default=False)
def validate_corpus_cmd(path, holdout_path, as_json) -> None:
    """Re-execute every corpus line; exit 1 if any finding."""
    holdout = None
    if holdout_path:
        lines = Path(holdout_path).read_text("utf-8").splitlines()
        holdout = frozenset(l.strip() for l in lines if l.strip())
    report = corpus_mod.validate_corpus(path, holdout=holdout)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        for key, value in report.to_dict().items():
            if key == "findings":
                continue
            click.echo(f"{key}: {value}")
        for finding in report.findings:
            click.echo(f"  id={finding[0]} [{finding[1]}] {finding[2]}")
    sys.exit(0 if report.ok else 1)


@main.command("make-pairs")
@click.option("--episodes", "episodes_path", type=click.Path(exists=True), required=True)
@click.option("--domain", type=DOMAIN_CHOICES, required=True)
@click.option("--out", type=click.Path(), required=True)
def make_pairs(episodes_path, domain, out) -> None:
    """Emit fine-tuning (source, target) pairs from an episode file."""
    try:
        eps = episodes_mod.load_episodes(episodes_path, Domain(domain))
    except (ParseError, episodes_mod.LengthMismatch) as e:
        raise click.UsageError(str(e)) from None
    count = episodes_mod.write_pairs(eps, out)
    click.echo(f"wrote {count} pairs to {out}", err=True)
    click.echo(str(count))


@main.command("convert")
@click.option("--from", "source_format", type=click.Choice(["scone-tsv", "propara-grids", "recipes"]),
              required=True)
@click.option("--domain", type=DOMAIN_CHOICES, required=True)
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def convert(source_format, domain, input_path, out) -> None:
    """Best-effort conversion of upstream tabular dumps to the episode format."""
    try:
        eps = episodes_mod.convert_tsv(input_path, Domain(domain), source_format)
    except ParseError as e:
        raise click.UsageError(str(e)) from None
    count = episodes_mod.write_episodes(eps, out)
    click.echo(f"wrote {count} episodes to {out}", err=True)
    click.echo(str(count))


@main.command()
@click.option("--domain", type=DOMAIN_CHOICES, required=True)
@click.option("--episodes", "episodes_path", type=click.Path(exists=True), required=True)
@click.option("--preds", "preds_path", type=click.Path(exists=True), required=True)
@click.option("--json", "as_json", is_flag=True, default=False)
def evaluate(domain, episodes_path, preds_path, as_json) -> None:
    """Score a predictions file against gold episodes."""
    dom = Domain(domain)
    try:
        eps = episodes_mod.load_episodes(episodes_path, dom)
        preds = evaluator_mod.PredictionSet.from_jsonl(preds_path)
    except (ParseError, episodes_mod.LengthMismatch) as e:
        raise click.UsageError(str(e)) from None
    try:
        if dom in (Domain.ALCHEMY, Domain.SCENE, Domain.TANGRAMS):
            reports = {"scone": evaluator_mod.eval_scone(eps, preds)}
        elif dom == Domain.PROPARA:
            reports = {
                "sentence": evaluator_mod.eval_propara_sentence(eps, preds),
                "document": evaluator_mod.eval_propara_document(eps, preds),
            }
        else:
            reports = {"recipes": evaluator_mod.eval_recipes(eps, preds)}
    except evaluator_mod.MissingPrediction as e:
        raise click.UsageError(str(e)) from None
    if as_json:
        click.echo(json.dumps({k: r.to_dict() for k, r in reports.items()}, indent=2))
    else:
        for name, report in reports.items():
            click.echo(f"[{name}]")
            click.echo(report.pretty())


@main.command()
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--json", "as_json", is_flag=True, default=False)
def stats(corpus, as_json) -> None:
    """Function and program-length histograms for a corpus."""
    data = corpus_mod.corpus_stats(corpus)
    if as_json:
        click.echo(json.dumps(data, indent=2))
    else:
        click.echo(f"lines: {data['lines']}")
        click.echo("functions:")
        for name, count in data["functions"].items():
            click.echo(f"  {name}: {count}")
        click.echo("program lengths:")
        for length, count in data["lengths"].items():
            click.echo(f"  {length}: {count}")


@main.command()
@click.option("--domain", type=DOMAIN_CHOICES, required=True)
def grammar(domain) -> None:
    """Print the domain's program grammar, one production per line."""
    click.echo(enumerate_grammar(Domain(domain)).to_text())


if __name__ == "__main__":
    main()
