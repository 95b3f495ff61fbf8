"""Seq2seq harness: trains on corpus/pairs JSONL, predicts over episode JSONL.

Boundary rule: this package consumes the environment toolkit only through its
file formats and command-line interface, never as a library import.
"""

from .config import ConfigError, HarnessConfig
from .data import SchemaError, load_episode_inputs, load_pairs
from .predict import predict
from .train import exact_match_rate, train

__all__ = [
    "ConfigError",
    "HarnessConfig",
    "SchemaError",
    "exact_match_rate",
    "load_episode_inputs",
    "load_pairs",
    "predict",
    "train",
]
