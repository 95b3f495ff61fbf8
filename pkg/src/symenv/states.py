"""Domain state types and their bit-exact textual encodings.

Five environments share one frozen wire format: slots separated by ``|``,
``:`` between a 1-based decimal index (or section key) and its payload,
``_`` for absence. The entity-based environments use a parallel key-value
form with a single ASCII space between the ``ent:`` and ``loc:`` sections.

    alchemy    1:rr|2:gg|3:g|4:ooo|5:_|6:_|7:_
    scene      1:__|2:bp|3:__|4:oy|5:__|6:__|7:__|8:__|9:__|10:__
    tangrams   1:A|2:C|3:D|4:B|5:E          (right-padded with i:_ up to 5)
    propara    ent:water|light|carbon loc:soil|sun|cloud
    recipes    ent:beef|pepper loc:oven|-

Rendering is pure and injective per domain; :func:`parse_state` is its exact
inverse and rejects anything outside the grammar (whitespace is tolerated
only at the outer boundaries).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

COLOR_CODES = frozenset("rgopyb")
COLOR_NAMES = {
    "r": "red",
    "g": "green",
    "o": "orange",
    "p": "purple",
    "y": "yellow",
    "b": "brown",
}

ALCHEMY_BEAKERS = 7
ALCHEMY_CAPACITY = 4
SCENE_POSITIONS = 10
TANGRAM_OBJECTS = ("A", "B", "C", "D", "E")
TANGRAM_CAPACITY = 5

NON_EXISTENT = "-"
UNKNOWN_LOCATION = "?"

# Characters that can never occur inside an entity name or location span;
# they would collide with the state/program surface syntax.
SPAN_FORBIDDEN = frozenset("|:;(),")


class Domain(str, Enum):
    ALCHEMY = "alchemy"
    SCENE = "scene"
    TANGRAMS = "tangrams"
    PROPARA = "propara"
    RECIPES = "recipes"

    def __str__(self) -> str:  # click/argparse friendliness
        return self.value


SCONE_DOMAINS = frozenset({Domain.ALCHEMY, Domain.SCENE, Domain.TANGRAMS})
ENTITY_DOMAINS = frozenset({Domain.PROPARA, Domain.RECIPES})


class ParseError(ValueError):
    """Malformed state or program text.

    Carries the offending text, a human-readable reason, and the character
    position at which parsing failed.
    """

    def __init__(self, reason: str, text: str = "", pos: int = 0):
        self.reason = reason
        self.text = text
        self.pos = pos
        super().__init__(f"{reason} (at position {pos})" if text else reason)


def _check(cond: bool, reason: str, text: str = "", pos: int = 0) -> None:
    if not cond:
        raise ParseError(reason, text, pos)


@dataclass(frozen=True, slots=True)
class AlchemyState:
    """Seven beakers, each a bottom-to-top string of 0-4 color codes."""

    beakers: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.beakers) != ALCHEMY_BEAKERS:
            raise ValueError(f"expected {ALCHEMY_BEAKERS} beakers, got {len(self.beakers)}")
        for b in self.beakers:
            if len(b) > ALCHEMY_CAPACITY:
                raise ValueError(f"beaker over capacity: {b!r}")
            for c in b:
                if c not in COLOR_CODES:
                    raise ValueError(f"unknown color code: {c!r}")

    def render(self) -> str:
        return "|".join(f"{i}:{b or '_'}" for i, b in enumerate(self.beakers, 1))


@dataclass(frozen=True, slots=True)
class SceneState:
    """Ten positions, each a two-character shirt+hat token.

    ``__`` is an empty position, ``o_`` a hatless person in an orange shirt,
    ``oy`` the same person wearing a yellow hat. A hat character other than
    ``_`` is only legal when the shirt character is a color.
    """

    slots: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.slots) != SCENE_POSITIONS:
            raise ValueError(f"expected {SCENE_POSITIONS} positions, got {len(self.slots)}")
        for s in self.slots:
            if len(s) != 2:
                raise ValueError(f"slot token must be 2 characters: {s!r}")
            shirt, hat = s
            if shirt == "_":
                if hat != "_":
                    raise ValueError(f"hat on empty position: {s!r}")
            else:
                if shirt not in COLOR_CODES or (hat != "_" and hat not in COLOR_CODES):
                    raise ValueError(f"unknown color code in slot: {s!r}")

    def render(self) -> str:
        return "|".join(f"{i}:{s}" for i, s in enumerate(self.slots, 1))


@dataclass(frozen=True, slots=True)
class TangramsState:
    """An ordered sequence of at most five distinct objects A-E.

    Padding with ``_`` up to five slots is a serialization concern; the
    logical sequence stores no placeholders.
    """

    objects: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.objects) > TANGRAM_CAPACITY:
            raise ValueError(f"more than {TANGRAM_CAPACITY} objects")
        for o in self.objects:
            if o not in TANGRAM_OBJECTS:
                raise ValueError(f"unknown object name: {o!r}")
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("duplicate object")

    def render(self) -> str:
        padded = self.objects + ("_",) * (TANGRAM_CAPACITY - len(self.objects))
        return "|".join(f"{i}:{o}" for i, o in enumerate(padded, 1))


def validate_span(span: str, *, role: str = "span") -> str:
    """Validate an entity name or named-location span; returns it unchanged.

    Spans are non-empty, carry no surrounding whitespace, and contain none of
    ``| : ; ( ) ,``. The reserved tokens ``-`` and ``?`` are not spans.
    """
    if not span:
        raise ValueError(f"empty {role}")
    if span != span.strip():
        raise ValueError(f"{role} has surrounding whitespace: {span!r}")
    if span in (NON_EXISTENT, UNKNOWN_LOCATION):
        raise ValueError(f"{role} uses reserved token: {span!r}")
    bad = SPAN_FORBIDDEN.intersection(span)
    if bad:
        raise ValueError(f"{role} contains forbidden character {sorted(bad)[0]!r}: {span!r}")
    return span


@dataclass(frozen=True, slots=True)
class EntityState:
    """Parallel (name, location) lists shared by propara and recipes.

    A location is the reserved token ``-`` (non-existent), ``?`` (existent,
    location unknown), or a named span. Names are distinct and at least one
    entity is always present.
    """

    names: tuple[str, ...]
    locations: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("entity state needs at least one entity")
        if len(self.names) != len(self.locations):
            raise ValueError("entity and location lists differ in length")
        for n in self.names:
            validate_span(n, role="entity name")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate entity name")
        for loc in self.locations:
            if loc not in (NON_EXISTENT, UNKNOWN_LOCATION):
                validate_span(loc, role="location")

    def render(self) -> str:
        return f"ent:{'|'.join(self.names)} loc:{'|'.join(self.locations)}"

    def location_of(self, name: str) -> str:
        try:
            return self.locations[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def with_location(self, name: str, location: str) -> "EntityState":
        i = self.names.index(name)
        locs = self.locations[:i] + (location,) + self.locations[i + 1 :]
        return EntityState(self.names, locs)


EnvState = Union[AlchemyState, SceneState, TangramsState, EntityState]

_STATE_TYPES: dict[Domain, type] = {
    Domain.ALCHEMY: AlchemyState,
    Domain.SCENE: SceneState,
    Domain.TANGRAMS: TangramsState,
    Domain.PROPARA: EntityState,
    Domain.RECIPES: EntityState,
}


def state_type(domain: Domain) -> type:
    return _STATE_TYPES[domain]


def matches_domain(state: EnvState, domain: Domain) -> bool:
    return isinstance(state, _STATE_TYPES[domain])


def render_state(state: EnvState) -> str:
    """Canonical textual encoding of a state. Pure; equal states render identically."""
    return state.render()


def _split_slots(text: str, expected: int, what: str) -> list[str]:
    parts = text.split("|")
    if len(parts) != expected:
        raise ParseError(f"expected {expected} {what}, got {len(parts)}", text)
    payloads = []
    pos = 0
    for i, part in enumerate(parts, 1):
        label = f"{i}:"
        if not part.startswith(label):
            raise ParseError(f"expected slot label {label!r}", text, pos)
        payloads.append(part[len(label) :])
        pos += len(part) + 1
    return payloads


def _parse_alchemy(text: str) -> AlchemyState:
    beakers = []
    for i, payload in enumerate(_split_slots(text, ALCHEMY_BEAKERS, "beakers"), 1):
        if payload == "_":
            beakers.append("")
            continue
        _check(0 < len(payload) <= ALCHEMY_CAPACITY, f"beaker {i} holds {len(payload)} units", text)
        for c in payload:
            _check(c in COLOR_CODES, f"unknown color code {c!r} in beaker {i}", text)
        beakers.append(payload)
    return AlchemyState(tuple(beakers))


def _parse_scene(text: str) -> SceneState:
    slots = []
    for i, payload in enumerate(_split_slots(text, SCENE_POSITIONS, "positions"), 1):
        _check(len(payload) == 2, f"position {i} is not a two-character token", text)
        shirt, hat = payload
        if shirt == "_":
            _check(hat == "_", f"hat on empty position {i}", text)
        else:
            _check(shirt in COLOR_CODES, f"unknown shirt color {shirt!r} at position {i}", text)
            _check(hat == "_" or hat in COLOR_CODES, f"unknown hat color {hat!r} at position {i}", text)
        slots.append(payload)
    return SceneState(tuple(slots))


def _parse_tangrams(text: str) -> TangramsState:
    objects: list[str] = []
    seen_pad = False
    for i, payload in enumerate(_split_slots(text, TANGRAM_CAPACITY, "slots"), 1):
        if payload == "_":
            seen_pad = True
            continue
        _check(not seen_pad, f"object after padding at slot {i}", text)
        _check(payload in TANGRAM_OBJECTS, f"unknown object {payload!r} at slot {i}", text)
        _check(payload not in objects, f"duplicate object {payload!r} at slot {i}", text)
        objects.append(payload)
    return TangramsState(tuple(objects))


def _parse_entity(text: str) -> EntityState:
    _check(text.startswith("ent:"), "entity state must start with 'ent:'", text)
    sep = " loc:"
    cut = text.find(sep)
    _check(cut >= 0, "missing ' loc:' section", text)
    names = text[4:cut].split("|")
    locations = text[cut + len(sep) :].split("|")
    if len(names) != len(locations):
        raise ParseError(
            f"length mismatch: {len(names)} entities vs {len(locations)} locations", text, cut
        )
    try:
        return EntityState(tuple(names), tuple(locations))
    except ValueError as e:
        raise ParseError(str(e), text) from None


def parse_state(domain: Domain, text: str) -> EnvState:
    """Exact inverse of :func:`render_state` on its image.

    Tolerates leading/trailing whitespace only; raises :class:`ParseError`
    for anything malformed.
    """
    stripped = text.strip()
    if domain == Domain.ALCHEMY:
        return _parse_alchemy(stripped)
    if domain == Domain.SCENE:
        return _parse_scene(stripped)
    if domain == Domain.TANGRAMS:
        return _parse_tangrams(stripped)
    if domain in ENTITY_DOMAINS:
        return _parse_entity(stripped)
    raise ValueError(f"unknown domain: {domain!r}")
