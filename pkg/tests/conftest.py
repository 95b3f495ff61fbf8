"""Shared hypothesis strategies and fixtures for state and action generation."""

from __future__ import annotations

import hypothesis.strategies as st
import pytest

from symenv.programs import (
    BeakerRef,
    Create,
    Destroy,
    Drain,
    FractionLiteral,
    Hat,
    Insert,
    Mix,
    Move,
    Person,
    Pour,
    Program,
    Remove,
    RmHat,
    RmPerson,
)
from symenv.states import AlchemyState, Domain, EntityState, SceneState, TangramsState

COLORS = "rgopyb"

colors = st.sampled_from(COLORS)

beakers = st.text(alphabet=COLORS, min_size=0, max_size=4)
alchemy_states = st.tuples(*[beakers] * 7).map(AlchemyState)

slots = st.one_of(
    st.just("__"),
    colors.map(lambda c: c + "_"),
    st.tuples(colors, colors).map("".join),
)
scene_states = st.tuples(*[slots] * 10).map(SceneState)

tangrams_states = st.lists(st.sampled_from("ABCDE"), unique=True, max_size=5).map(
    lambda objs: TangramsState(tuple(objs))
)

_words = st.text(alphabet="abcdefghjk", min_size=1, max_size=6)
spans = st.one_of(_words, st.tuples(_words, _words).map(" ".join))
locations = st.one_of(st.just("-"), st.just("?"), spans)


@st.composite
def entity_states(draw):
    names = draw(st.lists(spans, unique=True, min_size=1, max_size=5))
    locs = draw(st.lists(locations, min_size=len(names), max_size=len(names)))
    return EntityState(tuple(names), tuple(locs))


def states_for(domain: Domain):
    return {
        Domain.ALCHEMY: alchemy_states,
        Domain.SCENE: scene_states,
        Domain.TANGRAMS: tangrams_states,
        Domain.PROPARA: entity_states(),
        Domain.RECIPES: entity_states(),
    }[domain]


beaker_refs = st.builds(
    BeakerRef,
    index=st.one_of(st.integers(1, 7), st.integers(-7, -1)),
    color=st.one_of(st.none(), colors),
)
fraction_literals = st.sampled_from(["1/2", "1/3", "1/4", "2/3", "2/4", "3/4"]).map(
    lambda s: FractionLiteral(int(s[0]), int(s[2]))
)
amounts = st.one_of(st.integers(1, 4), fraction_literals)

alchemy_actions = st.one_of(
    st.builds(Mix, beaker_refs),
    st.builds(Pour, beaker_refs, beaker_refs),
    st.builds(Drain, beaker_refs, amounts),
)
scene_actions = st.one_of(
    st.builds(Person, st.integers(1, 10), colors),
    st.builds(RmPerson, st.integers(1, 10)),
    st.builds(Hat, st.integers(1, 10), colors),
    st.builds(RmHat, st.integers(1, 10)),
)
tangrams_actions = st.one_of(
    st.builds(Insert, st.integers(1, 5), st.sampled_from("ABCDE")),
    st.builds(Remove, st.integers(1, 5)),
)
entity_actions = st.one_of(
    st.builds(Create, spans, st.one_of(st.just("?"), spans)),
    st.builds(Move, spans, spans, spans),
    st.builds(Destroy, spans),
)


def actions_for(domain: Domain):
    return {
        Domain.ALCHEMY: alchemy_actions,
        Domain.SCENE: scene_actions,
        Domain.TANGRAMS: tangrams_actions,
        Domain.PROPARA: entity_actions,
        Domain.RECIPES: entity_actions,
    }[domain]


def programs_for(domain: Domain):
    return st.lists(actions_for(domain), min_size=1, max_size=5).map(
        lambda acts: Program(domain, tuple(acts))
    )


@pytest.fixture
def seeded_states():
    """Factory for deterministic sampler-drawn states."""
    from symenv.sampler import SamplerConfig, derive_rng, sample_state

    def make(domain: Domain, n: int = 100, seed: int = 1234):
        cfg = SamplerConfig(seed=seed, alchemy_homogeneous=False)
        rng = derive_rng(seed, f"fixture-{domain.value}")
        return [sample_state(domain, cfg, rng) for _ in range(n)]

    return make


@pytest.fixture
def seeded_examples():
    """Factory for deterministic (state, program, goal) triples."""
    from symenv.sampler import SamplerConfig, derive_rng, sample_example

    def make(domain: Domain, n: int = 100, seed: int = 99, **cfg_kwargs):
        cfg = SamplerConfig(seed=seed, **cfg_kwargs)
        rng = derive_rng(seed, f"examples-{domain.value}")
        return [sample_example(domain, cfg, rng) for _ in range(n)]

    return make


def synth_episodes(domain: Domain, n: int, seed: int = 7, steps: int = 5):
    """Episodes whose instructions are rendered single-action programs."""
    from symenv.executor import execute_program
    from symenv.evaluator import InteractionEpisode
    from symenv.programs import render_program
    from symenv.sampler import DeadEnd, SamplerConfig, derive_rng, sample_program, sample_state

    cfg = SamplerConfig(seed=seed, program_length=(1, 1), alchemy_fill_prob=0.9)
    rng = derive_rng(seed, f"episodes-{domain.value}")
    episodes = []
    while len(episodes) < n:
        initial = sample_state(domain, cfg, rng)
        instructions, gold = [], []
        current = initial
        try:
            for _ in range(steps):
                program = sample_program(domain, current, cfg, rng)
                current = execute_program(current, program)
                instructions.append(render_program(program))
                gold.append(current)
        except DeadEnd:
            continue
        episodes.append(
            InteractionEpisode(
                id=f"ep-{len(episodes)}",
                domain=domain,
                initial_state=initial,
                instructions=tuple(instructions),
                gold_states=tuple(gold),
            )
        )
    return episodes
