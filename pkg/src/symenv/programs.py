"""Action ASTs, parsers, and pretty-printers for the five program grammars.

The canonical surface form is function-call syntax with every token separated
by a single space and actions joined by `` ; ``::

    Pour ( Beaker ( 1 ) , Beaker ( 2 , g ) )
    Person ( 2 , r ) ; Hat ( 2 , y )
    Create ( beef , oven ) ; Move ( beef , oven , plate )

Parsing tolerates arbitrary whitespace around tokens; rendering always emits
the canonical form, so ``parse . render`` is the identity and
``render . parse`` canonicalizes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .states import (
    ALCHEMY_BEAKERS,
    COLOR_CODES,
    ENTITY_DOMAINS,
    SCENE_POSITIONS,
    TANGRAM_CAPACITY,
    TANGRAM_OBJECTS,
    UNKNOWN_LOCATION,
    Domain,
    ParseError,
    validate_span,
)

ALCHEMY_MAX_INTEGER = 4
FRACTION_LITERALS = ("1/2", "1/3", "1/4", "2/3", "2/4", "3/4")


@dataclass(frozen=True, slots=True)
class FractionLiteral:
    """One of the six grammar fractions; 2/4 stays distinct from 1/2."""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if str(self) not in FRACTION_LITERALS:
            raise ValueError(f"unknown fraction {self.numerator}/{self.denominator}")

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"

    def units_of(self, total: int) -> int | None:
        """Whole number of units this fraction takes from ``total``, else None."""
        scaled = total * self.numerator
        return scaled // self.denominator if scaled % self.denominator == 0 else None


Amount = Union[int, FractionLiteral]


@dataclass(frozen=True, slots=True)
class BeakerRef:
    """Positional or color-filtered beaker reference; negatives count from the right."""

    index: int
    color: str | None = None

    def __post_init__(self) -> None:
        if self.index == 0 or abs(self.index) > ALCHEMY_BEAKERS:
            raise ValueError(f"beaker index out of range: {self.index}")
        if self.color is not None and self.color not in COLOR_CODES:
            raise ValueError(f"unknown color code: {self.color!r}")

    def tokens(self) -> list[str]:
        if self.color is None:
            return ["Beaker", "(", str(self.index), ")"]
        return ["Beaker", "(", str(self.index), ",", self.color, ")"]


def _check_pos(pos: int, limit: int) -> int:
    if not 1 <= pos <= limit:
        raise ValueError(f"position out of range: {pos}")
    return pos


@dataclass(frozen=True, slots=True)
class Mix:
    target: BeakerRef

    def tokens(self) -> list[str]:
        return ["Mix", "(", *self.target.tokens(), ")"]


@dataclass(frozen=True, slots=True)
class Pour:
    src: BeakerRef
    dst: BeakerRef

    def tokens(self) -> list[str]:
        return ["Pour", "(", *self.src.tokens(), ",", *self.dst.tokens(), ")"]


@dataclass(frozen=True, slots=True)
class Drain:
    target: BeakerRef
    amount: Amount

    def __post_init__(self) -> None:
        if isinstance(self.amount, int) and not 1 <= self.amount <= ALCHEMY_MAX_INTEGER:
            raise ValueError(f"drain amount out of range: {self.amount}")

    def tokens(self) -> list[str]:
        return ["Drain", "(", *self.target.tokens(), ",", str(self.amount), ")"]


@dataclass(frozen=True, slots=True)
class Person:
    pos: int
    shirt: str

    def __post_init__(self) -> None:
        _check_pos(self.pos, SCENE_POSITIONS)
        if self.shirt not in COLOR_CODES:
            raise ValueError(f"unknown color code: {self.shirt!r}")

    def tokens(self) -> list[str]:
        return ["Person", "(", str(self.pos), ",", self.shirt, ")"]


@dataclass(frozen=True, slots=True)
class RmPerson:
    pos: int

    def __post_init__(self) -> None:
        _check_pos(self.pos, SCENE_POSITIONS)

    def tokens(self) -> list[str]:
        return ["RmPerson", "(", str(self.pos), ")"]


@dataclass(frozen=True, slots=True)
class Hat:
    pos: int
    hat: str

    def __post_init__(self) -> None:
        _check_pos(self.pos, SCENE_POSITIONS)
        if self.hat not in COLOR_CODES:
            raise ValueError(f"unknown color code: {self.hat!r}")

    def tokens(self) -> list[str]:
        return ["Hat", "(", str(self.pos), ",", self.hat, ")"]


@dataclass(frozen=True, slots=True)
class RmHat:
    pos: int

    def __post_init__(self) -> None:
        _check_pos(self.pos, SCENE_POSITIONS)

    def tokens(self) -> list[str]:
        return ["RmHat", "(", str(self.pos), ")"]


@dataclass(frozen=True, slots=True)
class Insert:
    pos: int
    obj: str

    def __post_init__(self) -> None:
        _check_pos(self.pos, TANGRAM_CAPACITY)
        if self.obj not in TANGRAM_OBJECTS:
            raise ValueError(f"unknown object name: {self.obj!r}")

    def tokens(self) -> list[str]:
        return ["Insert", "(", str(self.pos), ",", self.obj, ")"]


@dataclass(frozen=True, slots=True)
class Remove:
    pos: int

    def __post_init__(self) -> None:
        _check_pos(self.pos, TANGRAM_CAPACITY)

    def tokens(self) -> list[str]:
        return ["Remove", "(", str(self.pos), ")"]


@dataclass(frozen=True, slots=True)
class Create:
    participant: str
    location: str  # a named span, or the literal "?" when no location is given

    def __post_init__(self) -> None:
        validate_span(self.participant, role="participant")
        if self.location != UNKNOWN_LOCATION:
            validate_span(self.location, role="location")

    def tokens(self) -> list[str]:
        return ["Create", "(", self.participant, ",", self.location, ")"]


@dataclass(frozen=True, slots=True)
class Move:
    participant: str
    src: str
    dst: str

    def __post_init__(self) -> None:
        validate_span(self.participant, role="participant")
        validate_span(self.src, role="location")
        validate_span(self.dst, role="location")

    def tokens(self) -> list[str]:
        return ["Move", "(", self.participant, ",", self.src, ",", self.dst, ")"]


@dataclass(frozen=True, slots=True)
class Destroy:
    participant: str

    def __post_init__(self) -> None:
        validate_span(self.participant, role="participant")

    def tokens(self) -> list[str]:
        return ["Destroy", "(", self.participant, ")"]


AlchemyAction = Union[Mix, Pour, Drain]
SceneAction = Union[Person, RmPerson, Hat, RmHat]
TangramsAction = Union[Insert, Remove]
EntityAction = Union[Create, Move, Destroy]
Action = Union[AlchemyAction, SceneAction, TangramsAction, EntityAction]

_DOMAIN_ACTIONS: dict[Domain, tuple[type, ...]] = {
    Domain.ALCHEMY: (Mix, Pour, Drain),
    Domain.SCENE: (Person, RmPerson, Hat, RmHat),
    Domain.TANGRAMS: (Insert, Remove),
    Domain.PROPARA: (Create, Move, Destroy),
    Domain.RECIPES: (Create, Move, Destroy),
}


@dataclass(frozen=True, slots=True)
class Program:
    """A non-empty action sequence, all actions from one domain's grammar."""

    domain: Domain
    actions: tuple[Action, ...]

    def __post_init__(self) -> None:
        if not self.actions:
            raise ValueError("program must contain at least one action")
        allowed = _DOMAIN_ACTIONS[self.domain]
        for a in self.actions:
            if not isinstance(a, allowed):
                raise ValueError(f"{type(a).__name__} is not a {self.domain} action")

    def render(self) -> str:
        return " ; ".join(" ".join(a.tokens()) for a in self.actions)


def render_program(program: Program) -> str:
    """Deterministic canonical form; ``parse_program`` inverts it exactly."""
    return program.render()


# --- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"[A-Za-z]+|-?\d+|[(),;/]")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, int]] = []
        i, n = 0, len(text)
        while i < n:
            if text[i].isspace():
                i += 1
                continue
            m = _TOKEN_RE.match(text, i)
            if not m:
                raise ParseError(f"unexpected character {text[i]!r}", text, i)
            self.items.append((m.group(), m.start()))
            i = m.end()
        self.pos = 0

    def peek(self) -> str | None:
        return self.items[self.pos][0] if self.pos < len(self.items) else None

    def here(self) -> int:
        if self.pos < len(self.items):
            return self.items[self.pos][1]
        return len(self.text)

    def next(self, what: str = "token") -> str:
        if self.pos >= len(self.items):
            raise ParseError(f"unexpected end of input, expected {what}", self.text, len(self.text))
        tok, _ = self.items[self.pos]
        self.pos += 1
        return tok

    def expect(self, literal: str) -> None:
        at = self.here()
        tok = self.next(repr(literal))
        if tok != literal:
            raise ParseError(f"expected {literal!r}, found {tok!r}", self.text, at)


def _parse_int(toks: _Tokens, lo: int, hi: int, what: str) -> int:
    at = toks.here()
    tok = toks.next(what)
    try:
        value = int(tok)
    except ValueError:
        raise ParseError(f"expected {what}, found {tok!r}", toks.text, at) from None
    if not lo <= value <= hi:
        raise ParseError(f"{what} out of range: {value}", toks.text, at)
    return value


def _parse_color(toks: _Tokens) -> str:
    at = toks.here()
    tok = toks.next("color code")
    if tok not in COLOR_CODES:
        raise ParseError(f"unknown color code {tok!r}", toks.text, at)
    return tok


def _parse_beaker(toks: _Tokens) -> BeakerRef:
    toks.expect("Beaker")
    toks.expect("(")
    at = toks.here()
    tok = toks.next("beaker index")
    try:
        index = int(tok)
    except ValueError:
        raise ParseError(f"expected beaker index, found {tok!r}", toks.text, at) from None
    if index == 0 or abs(index) > ALCHEMY_BEAKERS:
        raise ParseError(f"beaker index out of range: {index}", toks.text, at)
    color = None
    if toks.peek() == ",":
        toks.expect(",")
        color = _parse_color(toks)
    toks.expect(")")
    return BeakerRef(index, color)


def _parse_amount(toks: _Tokens) -> Amount:
    at = toks.here()
    tok = toks.next("amount")
    try:
        numerator = int(tok)
    except ValueError:
        raise ParseError(f"expected amount, found {tok!r}", toks.text, at) from None
    if toks.peek() != "/":
        if not 1 <= numerator <= ALCHEMY_MAX_INTEGER:
            raise ParseError(f"drain amount out of range: {numerator}", toks.text, at)
        return numerator
    toks.expect("/")
    denominator = int(toks.next("fraction denominator"))
    if f"{numerator}/{denominator}" not in FRACTION_LITERALS:
        raise ParseError(f"unknown fraction {numerator}/{denominator}", toks.text, at)
    return FractionLiteral(numerator, denominator)


def _parse_alchemy_action(toks: _Tokens) -> AlchemyAction:
    at = toks.here()
    name = toks.next("function name")
    if name == "Mix":
        toks.expect("(")
        target = _parse_beaker(toks)
        toks.expect(")")
        return Mix(target)
    if name == "Pour":
        toks.expect("(")
        src = _parse_beaker(toks)
        toks.expect(",")
        dst = _parse_beaker(toks)
        toks.expect(")")
        return Pour(src, dst)
    if name == "Drain":
        toks.expect("(")
        target = _parse_beaker(toks)
        toks.expect(",")
        amount = _parse_amount(toks)
        toks.expect(")")
        return Drain(target, amount)
    raise ParseError(f"unknown function {name!r}", toks.text, at)


def _parse_scene_action(toks: _Tokens) -> SceneAction:
    at = toks.here()
    name = toks.next("function name")
    if name in ("Person", "Hat"):
        toks.expect("(")
        pos = _parse_int(toks, 1, SCENE_POSITIONS, "position")
        toks.expect(",")
        color = _parse_color(toks)
        toks.expect(")")
        return Person(pos, color) if name == "Person" else Hat(pos, color)
    if name in ("RmPerson", "RmHat"):
        toks.expect("(")
        pos = _parse_int(toks, 1, SCENE_POSITIONS, "position")
        toks.expect(")")
        return RmPerson(pos) if name == "RmPerson" else RmHat(pos)
    raise ParseError(f"unknown function {name!r}", toks.text, at)


def _parse_tangrams_action(toks: _Tokens) -> TangramsAction:
    at = toks.here()
    name = toks.next("function name")
    if name == "Insert":
        toks.expect("(")
        pos = _parse_int(toks, 1, TANGRAM_CAPACITY, "position")
        toks.expect(",")
        obj_at = toks.here()
        obj = toks.next("object name")
        if obj not in TANGRAM_OBJECTS:
            raise ParseError(f"unknown object {obj!r}", toks.text, obj_at)
        toks.expect(")")
        return Insert(pos, obj)
    if name == "Remove":
        toks.expect("(")
        pos = _parse_int(toks, 1, TANGRAM_CAPACITY, "position")
        toks.expect(")")
        return Remove(pos)
    raise ParseError(f"unknown function {name!r}", toks.text, at)


_ENTITY_NAME_RE = re.compile(r"\s*([A-Za-z]+)\s*\(")


def _parse_entity_program(domain: Domain, text: str) -> Program:
    """Entity actions take free-text spans, so they are scanned rather than tokenized."""
    actions: list[EntityAction] = []
    i, n = 0, len(text)
    while True:
        m = _ENTITY_NAME_RE.match(text, i)
        if not m:
            raise ParseError("expected a function call", text, i)
        name = m.group(1)
        if name not in ("Create", "Move", "Destroy"):
            raise ParseError(f"unknown function {name!r}", text, m.start(1))
        i = m.end()
        args: list[str] = []
        while True:
            j = i
            while j < n and text[j] not in ",)":
                if text[j] in "(;":
                    raise ParseError(f"unexpected {text[j]!r} inside argument", text, j)
                j += 1
            if j >= n:
                raise ParseError("unterminated argument list", text, i)
            args.append(text[i:j].strip())
            i = j + 1
            if text[j] == ")":
                break
        try:
            if name == "Create":
                if len(args) != 2:
                    raise ValueError(f"Create takes 2 arguments, got {len(args)}")
                actions.append(Create(args[0], args[1]))
            elif name == "Move":
                if len(args) != 3:
                    raise ValueError(f"Move takes 3 arguments, got {len(args)}")
                actions.append(Move(args[0], args[1], args[2]))
            else:
                if len(args) != 1:
                    raise ValueError(f"Destroy takes 1 argument, got {len(args)}")
                actions.append(Destroy(args[0]))
        except ValueError as e:
            raise ParseError(str(e), text, i) from None
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        if text[i] != ";":
            raise ParseError(f"expected ';' between actions, found {text[i]!r}", text, i)
        i += 1
    return Program(domain, tuple(actions))


def parse_program(domain: Domain, text: str) -> Program:
    """Parse the canonical surface form (whitespace-tolerant) into a Program."""
    if domain in ENTITY_DOMAINS:
        return _parse_entity_program(domain, text.strip())
    toks = _Tokens(text)
    parse_action = {
        Domain.ALCHEMY: _parse_alchemy_action,
        Domain.SCENE: _parse_scene_action,
        Domain.TANGRAMS: _parse_tangrams_action,
    }[domain]
    actions = [parse_action(toks)]
    while toks.peek() is not None:
        toks.expect(";")
        actions.append(parse_action(toks))
    return Program(domain, tuple(actions))


# --- grammar export ----------------------------------------------------------


@dataclass(frozen=True)
class GrammarSpec:
    """Machine-readable description of one domain's program grammar."""

    domain: Domain
    productions: tuple[str, ...]
    functions: dict[str, tuple[str, ...]]
    terminals: dict[str, tuple[str, ...]]
    open_categories: frozenset[str] = frozenset()

    def to_text(self) -> str:
        return "\n".join(self.productions)


def _fmt_terminals(values: tuple[str, ...]) -> str:
    return " | ".join(values)


def enumerate_grammar(domain: Domain) -> GrammarSpec:
    """Production rules, terminal sets, and per-function parameter domains."""
    if domain == Domain.ALCHEMY:
        index = tuple(str(i) for i in range(1, 8)) + tuple(str(-i) for i in range(1, 8))
        terminals = {
            "index": index,
            "color": tuple(sorted(COLOR_CODES)),
            "integer": tuple(str(i) for i in range(1, ALCHEMY_MAX_INTEGER + 1)),
            "fraction": FRACTION_LITERALS,
        }
        productions = (
            "state -> action ; state | action",
            "action -> mix | pour | drain",
            "mix -> Mix ( beaker )",
            "pour -> Pour ( beaker , beaker )",
            "drain -> Drain ( beaker , integer ) | Drain ( beaker , fraction )",
            "beaker -> Beaker ( index ) | Beaker ( index , color )",
            f"index -> {_fmt_terminals(index)}",
            f"color -> {_fmt_terminals(terminals['color'])}",
            f"integer -> {_fmt_terminals(terminals['integer'])}",
            f"fraction -> {_fmt_terminals(terminals['fraction'])}",
        )
        functions = {"Mix": ("beaker",), "Pour": ("beaker", "beaker"), "Drain": ("beaker", "amount")}
        return GrammarSpec(domain, productions, functions, terminals)
    if domain == Domain.SCENE:
        index = tuple(str(i) for i in range(1, SCENE_POSITIONS + 1))
        terminals = {"index": index, "color": tuple(sorted(COLOR_CODES))}
        productions = (
            "state -> action ; state | action",
            "action -> person | rmperson | hat | rmhat",
            "person -> Person ( index , color )",
            "rmperson -> RmPerson ( index )",
            "hat -> Hat ( index , color )",
            "rmhat -> RmHat ( index )",
            f"index -> {_fmt_terminals(index)}",
            f"color -> {_fmt_terminals(terminals['color'])}",
        )
        functions = {
            "Person": ("index", "color"),
            "RmPerson": ("index",),
            "Hat": ("index", "color"),
            "RmHat": ("index",),
        }
        return GrammarSpec(domain, productions, functions, terminals)
    if domain == Domain.TANGRAMS:
        index = tuple(str(i) for i in range(1, TANGRAM_CAPACITY + 1))
        terminals = {"index": index, "object": TANGRAM_OBJECTS}
        productions = (
            "state -> action ; state | action",
            "action -> insert | remove",
            "insert -> Insert ( index , object )",
            "remove -> Remove ( index )",
            f"index -> {_fmt_terminals(index)}",
            f"object -> {_fmt_terminals(TANGRAM_OBJECTS)}",
        )
        functions = {"Insert": ("index", "object"), "Remove": ("index",)}
        return GrammarSpec(domain, productions, functions, terminals)
    if domain in ENTITY_DOMAINS:
        productions = (
            "state -> action ; state | action",
            "action -> create | move | destroy",
            "create -> Create ( participant , location ) | Create ( participant , ? )",
            "move -> Move ( participant , location , location )",
            "destroy -> Destroy ( participant )",
            "participant -> <text span>",
            "location -> <text span>",
        )
        functions = {
            "Create": ("participant", "location"),
            "Move": ("participant", "location", "location"),
            "Destroy": ("participant",),
        }
        return GrammarSpec(
            domain, productions, functions, {}, open_categories=frozenset({"participant", "location"})
        )
    raise ValueError(f"unknown domain: {domain!r}")


def all_beaker_refs() -> Iterator[BeakerRef]:
    for i in list(range(1, 8)) + list(range(-1, -8, -1)):
        yield BeakerRef(i)
        for c in sorted(COLOR_CODES):
            yield BeakerRef(i, c)


def all_single_actions(domain: Domain) -> Iterator[Action]:
    """Exhaustive single-action space; finite for alchemy, scene, and tangrams."""
    if domain == Domain.ALCHEMY:
        refs = list(all_beaker_refs())
        for ref in refs:
            yield Mix(ref)
        for src in refs:
            for dst in refs:
                yield Pour(src, dst)
        for ref in refs:
            for k in range(1, ALCHEMY_MAX_INTEGER + 1):
                yield Drain(ref, k)
            for lit in FRACTION_LITERALS:
                n, d = lit.split("/")
                yield Drain(ref, FractionLiteral(int(n), int(d)))
    elif domain == Domain.SCENE:
        for pos in range(1, SCENE_POSITIONS + 1):
            for c in sorted(COLOR_CODES):
                yield Person(pos, c)
                yield Hat(pos, c)
            yield RmPerson(pos)
            yield RmHat(pos)
    elif domain == Domain.TANGRAMS:
        for pos in range(1, TANGRAM_CAPACITY + 1):
            for obj in TANGRAM_OBJECTS:
                yield Insert(pos, obj)
            yield Remove(pos)
    else:
        raise ValueError(f"single-action space of {domain} is not finite")
