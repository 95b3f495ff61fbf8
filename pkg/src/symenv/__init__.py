"""Symbolic manipulation environments: states, program DSLs, executors, corpus tooling, metrics."""

from .states import (
    AlchemyState,
    Domain,
    ENTITY_DOMAINS,
    EntityState,
    EnvState,
    ParseError,
    SCONE_DOMAINS,
    SceneState,
    TangramsState,
    parse_state,
    render_state,
)
from .programs import (
    Program,
    enumerate_grammar,
    parse_program,
    render_program,
)
from .executor import ExecError, ExecKind, execute_program, execute_trace
from .sampler import (
    ConfigError,
    DeadEnd,
    RetryExhausted,
    SamplerConfig,
    derive_rng,
    sample_example,
    sample_program,
    sample_state,
)

__all__ = [
    "AlchemyState",
    "ConfigError",
    "DeadEnd",
    "Domain",
    "ENTITY_DOMAINS",
    "EntityState",
    "EnvState",
    "ExecError",
    "ExecKind",
    "ParseError",
    "Program",
    "RetryExhausted",
    "SCONE_DOMAINS",
    "SamplerConfig",
    "SceneState",
    "TangramsState",
    "derive_rng",
    "enumerate_grammar",
    "execute_program",
    "execute_trace",
    "parse_program",
    "parse_state",
    "render_program",
    "render_state",
    "sample_example",
    "sample_program",
    "sample_state",
]
