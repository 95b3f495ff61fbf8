"""Harness configuration: flat key-value files plus stage-dependent defaults.

Unset ``max_steps``/``batch_size`` resolve from the stage table: pre-training
runs 10,000 steps for the instruction-following domains and 2,000 for the
entity domains at batch ~1,000; fine-tuning runs 10,000 steps at batch 64
(instruction) or 32 (entity). The learning rate defaults to 3e-5 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

ENTITY_DOMAINS = {"propara", "recipes"}
STAGES = ("pretrain", "finetune", "predict")

# (max_steps, batch_size) per (stage, domain kind)
STAGE_DEFAULTS = {
    ("pretrain", "instruction"): (10_000, 1000),
    ("pretrain", "entity"): (2_000, 1000),
    ("finetune", "instruction"): (10_000, 64),
    ("finetune", "entity"): (10_000, 32),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HarnessConfig:
    stage: str = "pretrain"
    domain: str = "alchemy"
    data: str = ""  # training corpus/pairs JSONL
    episodes: str = ""  # episode JSONL for prediction
    checkpoint_dir: str = "checkpoint"
    output: str = "predictions.jsonl"
    max_steps: int = 0  # 0 resolves from the stage table
    batch_size: int = 0
    learning_rate: float = 3e-5
    seed: int = 0
    d_model: int = 128
    num_heads: int = 4
    num_layers: int = 2
    feedforward: int = 256
    dropout: float = 0.1
    max_source_len: int = 384
    max_target_len: int = 96
    grad_clip: float = 1.0
    log_every: int = 25
    eval_every: int = 0  # 0 disables the exact-match probe
    target_exact_match: float = 0.0  # early-stop threshold in [0, 100]; 0 disables
    threads: int = 0  # 0 keeps the framework default

    def __post_init__(self) -> None:
        if self.stage not in STAGES:
            raise ConfigError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.d_model % self.num_heads != 0:
            raise ConfigError("d_model must be divisible by num_heads")

    @property
    def domain_kind(self) -> str:
        return "entity" if self.domain in ENTITY_DOMAINS else "instruction"

    @property
    def resolved_max_steps(self) -> int:
        if self.max_steps > 0:
            return self.max_steps
        return STAGE_DEFAULTS[(self.stage, self.domain_kind)][0]

    @property
    def resolved_batch_size(self) -> int:
        if self.batch_size > 0:
            return self.batch_size
        return STAGE_DEFAULTS[(self.stage, self.domain_kind)][1]

    def to_kv_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_kv_text(cls, text: str) -> "HarnessConfig":
        typed = {f.name: f.type for f in fields(cls)}
        kwargs: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in typed:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            kwargs[key] = _coerce(key, value)
        return cls(**kwargs)

    def with_overrides(self, overrides: dict[str, str]) -> "HarnessConfig":
        typed = {f.name for f in fields(self)}
        coerced = {}
        for key, value in overrides.items():
            if key not in typed:
                raise ConfigError(f"unknown config key {key!r}")
            coerced[key] = _coerce(key, value)
        return replace(self, **coerced)


_FLOAT_KEYS = {"learning_rate", "dropout", "target_exact_match", "grad_clip"}
_STR_KEYS = {"stage", "domain", "data", "episodes", "checkpoint_dir", "output"}


def _coerce(key: str, value: str):
    if key in _STR_KEYS:
        return value
    if key in _FLOAT_KEYS:
        return float(value)
    return int(value)
