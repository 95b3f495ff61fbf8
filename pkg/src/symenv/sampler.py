"""Seeded random generation of valid states and executable programs.

Programs are sampled state-conditioned: at each step the functions that still
have at least one valid parameterization are enumerated, one is picked
uniformly, and its parameters are then drawn stage-wise (target position(s)
uniformly among valid ones, then a surface reference uniformly among those
resolving to the chosen target, then remaining literals uniformly among valid
values). Every emitted program therefore executes on its paired initial state
without error, by construction.

All randomness flows through :func:`derive_rng`; identical (seed, stream)
pairs give identical draws, which is what makes sharded corpus generation
reproducible regardless of worker count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .executor import exec_action, execute_program
from .programs import (
    Action,
    Amount,
    BeakerRef,
    Create,
    Destroy,
    Drain,
    FRACTION_LITERALS,
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
from .states import (
    ALCHEMY_BEAKERS,
    ALCHEMY_CAPACITY,
    NON_EXISTENT,
    SCENE_POSITIONS,
    TANGRAM_CAPACITY,
    TANGRAM_OBJECTS,
    UNKNOWN_LOCATION,
    AlchemyState,
    Domain,
    ENTITY_DOMAINS,
    EntityState,
    EnvState,
    SceneState,
    TangramsState,
    matches_domain,
    render_state,
)

COLOR_ORDER = ("r", "g", "o", "p", "y", "b")

_FRACTIONS = tuple(FractionLiteral(int(lit[0]), int(lit[2])) for lit in FRACTION_LITERALS)

DEFAULT_ENTITY_VOCAB = (
    "water", "light", "carbon", "oxygen", "hydrogen", "bacteria", "sickness",
    "algae", "plankton", "sediment", "enzymes", "silk", "web", "salt", "sugar",
    "flour", "butter", "beef", "pepper", "garlic", "scallion", "tomato",
    "onion", "olive oil", "green pepper", "rock", "magma", "lava", "seed",
    "root", "leaf", "blood", "rain", "snow", "ice", "sand", "glass", "steam",
    "smoke", "ash",
)

DEFAULT_LOCATION_VOCAB = (
    "soil", "sun", "cloud", "cell", "bladder", "oven", "pan", "bowl", "wok",
    "foil", "ground", "seafloor", "abdomen", "river", "ocean", "lake",
    "mountain", "forest", "kitchen", "plate", "pot", "stove", "fridge",
    "garden", "field", "stem", "air", "sky", "beach", "cave",
    "plant material", "mixing bowl", "loaf pan", "body", "stomach",
    "intestine", "liver", "skin", "surface", "core",
)

MAX_SAMPLE_ATTEMPTS = 128


class ConfigError(ValueError):
    pass


class DeadEnd(RuntimeError):
    """No function has a valid parameterization in the current state."""


class RetryExhausted(RuntimeError):
    """Holdout rejection kept firing for the full retry budget."""


def derive_rng(seed: int, stream: int | str) -> random.Random:
    """Deterministic RNG for a (seed, stream) pair; stable across runs and platforms."""
    return random.Random(f"{seed}/{stream}")


def load_vocab_file(path) -> tuple[str, ...]:
    """Read a vocabulary file: one token span per line, UTF-8, blanks skipped."""
    from .states import validate_span

    spans = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            span = raw.strip()
            if not span:
                continue
            try:
                spans.append(validate_span(span))
            except ValueError as e:
                raise ConfigError(f"{path}, line {lineno}: {e}") from None
    if not spans:
        raise ConfigError(f"{path}: vocabulary file is empty")
    return tuple(spans)


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    program_length: tuple[int, int] = (1, 5)
    alchemy_homogeneous: bool = True
    alchemy_fill_prob: float = 0.75
    scene_occupancy_prob: float = 0.5
    scene_hat_prob: float = 0.5
    entity_count_range: tuple[int, int] = (2, 6)
    entity_vocab: tuple[str, ...] = DEFAULT_ENTITY_VOCAB
    location_vocab: tuple[str, ...] = DEFAULT_LOCATION_VOCAB
    holdout_states: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        lo, hi = self.program_length
        if not 1 <= lo <= hi:
            raise ConfigError(f"empty program length range: {self.program_length}")
        clo, chi = self.entity_count_range
        if not 1 <= clo <= chi:
            raise ConfigError(f"empty entity count range: {self.entity_count_range}")
        for name in ("alchemy_fill_prob", "scene_occupancy_prob", "scene_hat_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {p}")

    def check_entity_vocab(self) -> None:
        if not self.entity_vocab or not self.location_vocab:
            raise ConfigError("entity domains need non-empty entity and location vocabularies")
        if self.entity_count_range[1] > len(self.entity_vocab):
            raise ConfigError(
                f"entity_count_range max {self.entity_count_range[1]} exceeds "
                f"vocabulary size {len(self.entity_vocab)}"
            )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "program_length": list(self.program_length),
            "alchemy_homogeneous": self.alchemy_homogeneous,
            "alchemy_fill_prob": self.alchemy_fill_prob,
            "scene_occupancy_prob": self.scene_occupancy_prob,
            "scene_hat_prob": self.scene_hat_prob,
            "entity_count_range": list(self.entity_count_range),
            "entity_vocab": list(self.entity_vocab),
            "location_vocab": list(self.location_vocab),
            "holdout_states": sorted(self.holdout_states),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SamplerConfig":
        kwargs = dict(data)
        for key in ("program_length", "entity_count_range"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        for key in ("entity_vocab", "location_vocab"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        if "holdout_states" in kwargs:
            kwargs["holdout_states"] = frozenset(kwargs["holdout_states"])
        return cls(**kwargs)

    def to_kv_text(self) -> str:
        """Flat key-value form; list fields use ',' and holdout states ';'."""
        d = self.to_dict()
        lines = [
            f"seed = {d['seed']}",
            f"program_length = {d['program_length'][0]}..{d['program_length'][1]}",
            f"alchemy_homogeneous = {str(d['alchemy_homogeneous']).lower()}",
            f"alchemy_fill_prob = {d['alchemy_fill_prob']}",
            f"scene_occupancy_prob = {d['scene_occupancy_prob']}",
            f"scene_hat_prob = {d['scene_hat_prob']}",
            f"entity_count_range = {d['entity_count_range'][0]}..{d['entity_count_range'][1]}",
            f"entity_vocab = {','.join(d['entity_vocab'])}",
            f"location_vocab = {','.join(d['location_vocab'])}",
            f"holdout_states = {';'.join(d['holdout_states'])}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_kv_text(cls, text: str) -> "SamplerConfig":
        kwargs: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "seed":
                kwargs["seed"] = int(value)
            elif key in ("program_length", "entity_count_range"):
                lo, _, hi = value.partition("..")
                kwargs[key] = (int(lo), int(hi))
            elif key == "alchemy_homogeneous":
                kwargs[key] = value.lower() in ("true", "1", "yes")
            elif key in ("alchemy_fill_prob", "scene_occupancy_prob", "scene_hat_prob"):
                kwargs[key] = float(value)
            elif key in ("entity_vocab", "location_vocab"):
                kwargs[key] = tuple(v for v in value.split(",") if v)
            elif key == "holdout_states":
                kwargs[key] = frozenset(v for v in value.split(";") if v)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        return cls(**kwargs)

    def with_holdout(self, states: frozenset[str]) -> "SamplerConfig":
        return replace(self, holdout_states=states)


# --- state sampling ----------------------------------------------------------


def sample_state(domain: Domain, cfg: SamplerConfig, rng: random.Random) -> EnvState:
    if domain == Domain.ALCHEMY:
        beakers = []
        for _ in range(ALCHEMY_BEAKERS):
            if rng.random() >= cfg.alchemy_fill_prob:
                beakers.append("")
                continue
            units = rng.randint(1, ALCHEMY_CAPACITY)
            if cfg.alchemy_homogeneous:
                beakers.append(rng.choice(COLOR_ORDER) * units)
            else:
                beakers.append("".join(rng.choice(COLOR_ORDER) for _ in range(units)))
        return AlchemyState(tuple(beakers))
    if domain == Domain.SCENE:
        slots = []
        for _ in range(SCENE_POSITIONS):
            if rng.random() >= cfg.scene_occupancy_prob:
                slots.append("__")
                continue
            shirt = rng.choice(COLOR_ORDER)
            hat = rng.choice(COLOR_ORDER) if rng.random() < cfg.scene_hat_prob else "_"
            slots.append(shirt + hat)
        return SceneState(tuple(slots))
    if domain == Domain.TANGRAMS:
        length = rng.randint(0, TANGRAM_CAPACITY)
        return TangramsState(tuple(rng.sample(TANGRAM_OBJECTS, length)))
    if domain in ENTITY_DOMAINS:
        cfg.check_entity_vocab()
        count = rng.randint(*cfg.entity_count_range)
        names = tuple(rng.sample(cfg.entity_vocab, count))
        locations = []
        for _ in range(count):
            kind = rng.randrange(3)
            if kind == 0:
                locations.append(NON_EXISTENT)
            elif kind == 1:
                locations.append(UNKNOWN_LOCATION)
            else:
                locations.append(rng.choice(cfg.location_vocab))
        return EntityState(names, tuple(locations))
    raise ValueError(f"unknown domain: {domain!r}")


# --- program sampling --------------------------------------------------------


def valid_drain_amounts(units: int) -> tuple[Amount, ...]:
    """All grammar amounts that drain a whole number of units from ``units``."""
    ints: tuple[Amount, ...] = tuple(range(1, units + 1))
    fracs = tuple(f for f in _FRACTIONS if f.units_of(units) is not None)
    return ints + fracs


def _beaker_refs_for(state: AlchemyState, pos: int) -> list[BeakerRef]:
    """Every surface reference that resolves to 1-based position ``pos``."""
    refs = [BeakerRef(pos), BeakerRef(pos - (ALCHEMY_BEAKERS + 1))]
    b = state.beakers[pos - 1]
    if b:
        color = b[0]
        if b.strip(color) == "":
            candidates = [
                i for i, bb in enumerate(state.beakers, 1) if bb and bb.strip(color) == ""
            ]
            rank = candidates.index(pos)
            refs.append(BeakerRef(rank + 1, color))
            refs.append(BeakerRef(rank - len(candidates), color))
    return refs


def _pick_ref(state: AlchemyState, pos: int, rng: random.Random) -> BeakerRef:
    return rng.choice(_beaker_refs_for(state, pos))


def _sample_alchemy_action(state: AlchemyState, rng: random.Random) -> Action:
    beakers = state.beakers
    nonempty = [i for i, b in enumerate(beakers, 1) if b]
    pour_pairs = [
        (s, d)
        for s in nonempty
        for d in range(1, ALCHEMY_BEAKERS + 1)
        if d != s and len(beakers[s - 1]) + len(beakers[d - 1]) <= ALCHEMY_CAPACITY
    ]
    functions = []
    if nonempty:
        functions.extend(["Mix", "Drain"])
    if pour_pairs:
        functions.append("Pour")
    if not functions:
        raise DeadEnd("no alchemy function applies to an all-empty state")
    name = rng.choice(functions)
    if name == "Mix":
        return Mix(_pick_ref(state, rng.choice(nonempty), rng))
    if name == "Drain":
        pos = rng.choice(nonempty)
        amount = rng.choice(valid_drain_amounts(len(beakers[pos - 1])))
        return Drain(_pick_ref(state, pos, rng), amount)
    src, dst = rng.choice(pour_pairs)
    return Pour(_pick_ref(state, src, rng), _pick_ref(state, dst, rng))


def _sample_scene_action(state: SceneState, rng: random.Random) -> Action:
    empty = [i for i, s in enumerate(state.slots, 1) if s == "__"]
    occupied = [i for i, s in enumerate(state.slots, 1) if s != "__"]
    hatless = [i for i in occupied if state.slots[i - 1][1] == "_"]
    hatted = [i for i in occupied if state.slots[i - 1][1] != "_"]
    functions = []
    if empty:
        functions.append("Person")
    if occupied:
        functions.append("RmPerson")
    if hatless:
        functions.append("Hat")
    if hatted:
        functions.append("RmHat")
    name = rng.choice(functions)  # 10 positions: at least one function always applies
    if name == "Person":
        return Person(rng.choice(empty), rng.choice(COLOR_ORDER))
    if name == "RmPerson":
        return RmPerson(rng.choice(occupied))
    if name == "Hat":
        return Hat(rng.choice(hatless), rng.choice(COLOR_ORDER))
    return RmHat(rng.choice(hatted))


def _sample_tangrams_action(state: TangramsState, rng: random.Random) -> Action:
    n = len(state.objects)
    functions = []
    if n < TANGRAM_CAPACITY:
        functions.append("Insert")
    if n > 0:
        functions.append("Remove")
    name = rng.choice(functions)
    if name == "Insert":
        absent = [o for o in TANGRAM_OBJECTS if o not in state.objects]
        return Insert(rng.randint(1, n + 1), rng.choice(absent))
    return Remove(rng.randint(1, n))


def _sample_entity_action(state: EntityState, cfg: SamplerConfig, rng: random.Random) -> Action:
    nonexistent = [n for n, l in zip(state.names, state.locations) if l == NON_EXISTENT]
    existent = [n for n, l in zip(state.names, state.locations) if l != NON_EXISTENT]
    named = [
        (n, l)
        for n, l in zip(state.names, state.locations)
        if l not in (NON_EXISTENT, UNKNOWN_LOCATION)
    ]
    movable = [(n, l) for n, l in named if any(v != l for v in cfg.location_vocab)]
    functions = []
    if nonexistent:
        functions.append("Create")
    if movable:
        functions.append("Move")
    if existent:
        functions.append("Destroy")
    if not functions:
        raise DeadEnd("no entity function applies")
    name = rng.choice(functions)
    if name == "Create":
        # "?" (no location given) is one more option next to the vocabulary
        target = rng.choice(nonexistent)
        location = rng.choice((UNKNOWN_LOCATION,) + cfg.location_vocab)
        return Create(target, location)
    if name == "Move":
        who, src = rng.choice(movable)
        dst = rng.choice([v for v in cfg.location_vocab if v != src])
        return Move(who, src, dst)
    return Destroy(rng.choice(existent))


def sample_action(state: EnvState, cfg: SamplerConfig, rng: random.Random) -> Action:
    if isinstance(state, AlchemyState):
        return _sample_alchemy_action(state, rng)
    if isinstance(state, SceneState):
        return _sample_scene_action(state, rng)
    if isinstance(state, TangramsState):
        return _sample_tangrams_action(state, rng)
    if isinstance(state, EntityState):
        return _sample_entity_action(state, cfg, rng)
    raise TypeError(f"unknown state type: {type(state).__name__}")


def sample_program(
    domain: Domain, state: EnvState, cfg: SamplerConfig, rng: random.Random
) -> Program:
    """A program guaranteed to execute on ``state``; raises DeadEnd if stuck."""
    if not matches_domain(state, domain):
        raise ValueError(f"state type {type(state).__name__} does not match domain {domain}")
    length = rng.randint(*cfg.program_length)
    actions = []
    current = state
    for _ in range(length):
        action = sample_action(current, cfg, rng)
        actions.append(action)
        current = exec_action(current, action)
    return Program(domain, tuple(actions))


def sample_example(
    domain: Domain, cfg: SamplerConfig, rng: random.Random
) -> tuple[EnvState, Program, EnvState]:
    """(initial state, program, goal state), resampling around holdouts and dead ends."""
    holdout_rejections = 0
    for _ in range(MAX_SAMPLE_ATTEMPTS):
        state = sample_state(domain, cfg, rng)
        if cfg.holdout_states and render_state(state) in cfg.holdout_states:
            holdout_rejections += 1
            continue
        try:
            program = sample_program(domain, state, cfg, rng)
        except DeadEnd:
            continue
        return state, program, execute_program(state, program)
    if holdout_rejections:
        raise RetryExhausted(
            f"{holdout_rejections} of {MAX_SAMPLE_ATTEMPTS} attempts hit holdout states"
        )
    raise DeadEnd(f"all {MAX_SAMPLE_ATTEMPTS} attempts dead-ended")
