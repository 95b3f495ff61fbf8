"""Corpus synthesis: generation, leakage injection, validation, statistics.

A corpus is defined as the first ``n`` unique examples of the deterministic
stream ``index -> sample_example(domain, cfg, derive_rng(cfg.seed, index))``,
where uniqueness is keyed on the (initial state, program) pair and ids are
renumbered consecutively. Because every stream index is independent, the
stream can be evaluated by any number of workers in parallel and the merged
output is byte-identical to a sequential run.

Lines are JSON objects with fields exactly ``id, domain, init, program, goal,
source, target``; ``source = init + " [SEP] " + program`` and
``target = goal``. The sidecar ``<corpus>.manifest.json`` records domain,
seed, n, overlap_ratio, the sha256 content digest, and the sampler config.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Iterator

from .executor import ExecError, execute_program
from .programs import parse_program, render_program
from .sampler import SamplerConfig, derive_rng, sample_example
from .states import Domain, ParseError, parse_state, render_state

SEP_TOKEN = "[SEP]"
CORPUS_FIELDS = ("id", "domain", "init", "program", "goal", "source", "target")


class SizeError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusManifest:
    domain: Domain
    seed: int
    n: int
    overlap_ratio: float
    digest: str
    config: dict

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.value,
            "seed": self.seed,
            "n": self.n,
            "overlap_ratio": self.overlap_ratio,
            "digest": self.digest,
            "config": self.config,
        }

    def write(self, corpus_path: str | Path) -> Path:
        path = manifest_path(corpus_path)
        path.write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", "utf-8")
        return path

    @classmethod
    def load(cls, corpus_path: str | Path) -> "CorpusManifest":
        data = json.loads(manifest_path(corpus_path).read_text("utf-8"))
        return cls(
            domain=Domain(data["domain"]),
            seed=data["seed"],
            n=data["n"],
            overlap_ratio=data["overlap_ratio"],
            digest=data["digest"],
            config=data["config"],
        )


def manifest_path(corpus_path: str | Path) -> Path:
    return Path(str(corpus_path) + ".manifest.json")


def make_source(init_text: str, program_text: str) -> str:
    return f"{init_text} {SEP_TOKEN} {program_text}"


def example_texts(domain: Domain, cfg: SamplerConfig, index: int) -> tuple[str, str, str]:
    """(init, program, goal) texts for one stream index."""
    state, program, goal = sample_example(domain, cfg, derive_rng(cfg.seed, index))
    return render_state(state), render_program(program), render_state(goal)


def _pair_key(init: str, program: str) -> bytes:
    # compact dedup key; keeps the seen-set small at million-example scale
    return hashlib.blake2b(f"{init}\x00{program}".encode("utf-8"), digest_size=16).digest()


def _worker_chunk(args: tuple[str, dict, int, int]) -> list[tuple[str, str, str]]:
    domain_value, cfg_dict, start, stop = args
    domain = Domain(domain_value)
    cfg = SamplerConfig.from_dict(cfg_dict)
    return [example_texts(domain, cfg, i) for i in range(start, stop)]


def _stream_chunks(
    domain: Domain, cfg: SamplerConfig, start: int, count: int, workers: int
) -> Iterator[tuple[str, str, str]]:
    if workers <= 1:
        for i in range(start, start + count):
            yield example_texts(domain, cfg, i)
        return
    chunk = max(64, math.ceil(count / (workers * 4)))
    jobs = [
        (domain.value, cfg.to_dict(), lo, min(lo + chunk, start + count))
        for lo in range(start, start + count, chunk)
    ]
    with Pool(workers) as pool:
        for batch in pool.imap(_worker_chunk, jobs):
            yield from batch


def format_line(
    example_id: int, domain: Domain, init: str, program: str, goal: str, overlap: bool = False
) -> str:
    record = {
        "id": example_id,
        "domain": domain.value,
        "init": init,
        "program": program,
        "goal": goal,
        "source": make_source(init, program),
        "target": goal,
    }
    if overlap:
        record["overlap"] = True
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def generate_corpus(
    domain: Domain,
    cfg: SamplerConfig,
    n: int,
    out: str | Path,
    workers: int = 1,
) -> CorpusManifest:
    """Write ``n`` deduplicated examples as JSON Lines; byte-deterministic."""
    if n < 1:
        raise ValueError(f"corpus size must be >= 1, got {n}")
    out = Path(out)
    tmp = out.with_name(out.name + ".tmp")
    digest = hashlib.sha256()
    seen: set[bytes] = set()
    written = 0
    next_index = 0
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        while written < n:
            need = n - written
            for init, program, goal in _stream_chunks(domain, cfg, next_index, need, workers):
                key = _pair_key(init, program)
                if key in seen:
                    continue  # duplicate pair: drop, a later stream index replaces it
                seen.add(key)
                line = format_line(written, domain, init, program, goal) + "\n"
                fh.write(line)
                digest.update(line.encode("utf-8"))
                written += 1
            next_index += need
    os.replace(tmp, out)
    manifest = CorpusManifest(
        domain=domain,
        seed=cfg.seed,
        n=n,
        overlap_ratio=0.0,
        digest=digest.hexdigest(),
        config=cfg.to_dict(),
    )
    manifest.write(out)
    return manifest


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def read_corpus_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def inject_overlap(
    corpus: str | Path,
    holdout_pool: str | Path,
    ratio: float,
    seed: int,
    out: str | Path,
) -> CorpusManifest:
    """Replace ``floor(ratio * |pool|)`` seeded-sampled corpus lines with pool entries.

    Injected lines keep the replaced line's id, carry the pool entry's
    content, and are marked with ``"overlap": true``. Ratio 0 is the byte
    identity.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    corpus_lines = read_corpus_lines(corpus)
    pool_lines = read_corpus_lines(holdout_pool)
    k = math.floor(ratio * len(pool_lines))
    if k > len(corpus_lines):
        raise SizeError(
            f"holdout demand {k} exceeds corpus size {len(corpus_lines)}"
        )
    rng = derive_rng(seed, "overlap")
    positions = sorted(rng.sample(range(len(corpus_lines)), k))
    picks = rng.sample(range(len(pool_lines)), k)
    for pos, pick in zip(positions, picks):
        original = json.loads(corpus_lines[pos])
        entry = json.loads(pool_lines[pick])
        corpus_lines[pos] = format_line(
            original["id"],
            Domain(entry["domain"]),
            entry["init"],
            entry["program"],
            entry["goal"],
            overlap=True,
        )
    out = Path(out)
    tmp = out.with_name(out.name + ".tmp")
    digest = hashlib.sha256()
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for line in corpus_lines:
            data = line + "\n"
            fh.write(data)
            digest.update(data.encode("utf-8"))
    os.replace(tmp, out)
    try:
        base = CorpusManifest.load(corpus)
        base_config, base_seed = base.config, base.seed
        domain = base.domain
    except FileNotFoundError:
        first = json.loads(corpus_lines[0])
        base_config, base_seed = {}, seed
        domain = Domain(first["domain"])
    manifest = CorpusManifest(
        domain=domain,
        seed=base_seed,
        n=len(corpus_lines),
        overlap_ratio=ratio,
        digest=digest.hexdigest(),
        config=base_config,
    )
    manifest.write(out)
    return manifest


@dataclass
class CorpusReport:
    lines: int = 0
    parse_failures: int = 0
    exec_failures: int = 0
    goal_mismatches: int = 0
    duplicate_pairs: int = 0
    holdout_violations: int = 0
    overlap_lines: int = 0
    findings: list[tuple[object, str, str]] = field(default_factory=list)

    MAX_FINDINGS = 100

    def _record(self, example_id: object, category: str, detail: str) -> None:
        if len(self.findings) < self.MAX_FINDINGS:
            self.findings.append((example_id, category, detail))

    @property
    def total_findings(self) -> int:
        return (
            self.parse_failures
            + self.exec_failures
            + self.goal_mismatches
            + self.duplicate_pairs
            + self.holdout_violations
        )

    @property
    def ok(self) -> bool:
        return self.total_findings == 0

    def to_dict(self) -> dict:
        return {
            "lines": self.lines,
            "parse_failures": self.parse_failures,
            "exec_failures": self.exec_failures,
            "goal_mismatches": self.goal_mismatches,
            "duplicate_pairs": self.duplicate_pairs,
            "holdout_violations": self.holdout_violations,
            "overlap_lines": self.overlap_lines,
            "ok": self.ok,
            "findings": [
                {"id": i, "category": c, "detail": d} for i, c, d in self.findings
            ],
        }


def validate_corpus(path: str | Path, holdout: frozenset[str] | None = None) -> CorpusReport:
    """Re-execute every line; findings are report content, never exceptions."""
    if holdout is None:
        try:
            holdout = frozenset(CorpusManifest.load(path).config.get("holdout_states", ()))
        except FileNotFoundError:
            holdout = frozenset()
    report = CorpusReport()
    seen: set[bytes] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            report.lines += 1
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as e:
                report.parse_failures += 1
                report._record(lineno, "parse", f"invalid JSON: {e}")
                continue
            example_id = record.get("id", lineno)
            missing = [f for f in CORPUS_FIELDS if f not in record]
            if missing:
                report.parse_failures += 1
                report._record(example_id, "parse", f"missing fields: {missing}")
                continue
            is_overlap = bool(record.get("overlap"))
            if is_overlap:
                report.overlap_lines += 1
            try:
                domain = Domain(record["domain"])
                state = parse_state(domain, record["init"])
                program = parse_program(domain, record["program"])
            except (ParseError, ValueError) as e:
                report.parse_failures += 1
                report._record(example_id, "parse", str(e))
                continue
            if record["source"] != make_source(record["init"], record["program"]) or (
                record["target"] != record["goal"]
            ):
                report.parse_failures += 1
                report._record(example_id, "parse", "source/target fields are inconsistent")
                continue
            key = _pair_key(record["init"], record["program"])
            if key in seen:
                report.duplicate_pairs += 1
                report._record(example_id, "duplicate", "repeated (init, program) pair")
            seen.add(key)
            if holdout and not is_overlap and record["init"] in holdout:
                report.holdout_violations += 1
                report._record(example_id, "holdout", "initial state is in the holdout set")
            try:
                goal = execute_program(state, program)
            except ExecError as e:
                report.exec_failures += 1
                report._record(example_id, "exec", str(e))
                continue
            if render_state(goal) != record["goal"]:
                report.goal_mismatches += 1
                report._record(
                    example_id, "goal", f"re-execution gives {render_state(goal)!r}"
                )
    return report


def corpus_stats(path: str | Path) -> dict:
    """Function-usage and program-length histograms for a corpus file."""
    functions: Counter[str] = Counter()
    lengths: Counter[int] = Counter()
    lines = 0
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            if not raw.strip():
                continue
            lines += 1
            record = json.loads(raw)
            program = parse_program(Domain(record["domain"]), record["program"])
            lengths[len(program.actions)] += 1
            for action in program.actions:
                functions[type(action).__name__] += 1
    return {
        "lines": lines,
        "functions": dict(sorted(functions.items())),
        "lengths": {str(k): lengths[k] for k in sorted(lengths)},
    }
