"""Deterministic small-step semantics: (state, action) -> state, folded over programs.

Every executor is a pure function returning a fresh state; failures raise
:class:`ExecError` with a kind, a detail message, and (when raised through
:func:`execute_program`) the 0-based index of the offending action.
"""

from __future__ import annotations

from enum import Enum

from .programs import (
    Action,
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
from .states import (
    ALCHEMY_BEAKERS,
    ALCHEMY_CAPACITY,
    NON_EXISTENT,
    TANGRAM_CAPACITY,
    AlchemyState,
    EntityState,
    EnvState,
    SceneState,
    TangramsState,
    matches_domain,
)


class ExecKind(str, Enum):
    INVALID_REFERENCE = "InvalidReference"
    EMPTY_SOURCE = "EmptySource"
    OVERFLOW = "Overflow"
    NON_INTEGRAL_FRACTION = "NonIntegralFraction"
    OCCUPIED_POSITION = "OccupiedPosition"
    VACANT_POSITION = "VacantPosition"
    HAT_CONFLICT = "HatConflict"
    DUPLICATE_OBJECT = "DuplicateObject"
    CAPACITY_EXCEEDED = "CapacityExceeded"
    UNKNOWN_ENTITY = "UnknownEntity"
    LOCATION_MISMATCH = "LocationMismatch"
    ALREADY_EXISTS = "AlreadyExists"


class ExecError(Exception):
    def __init__(self, kind: ExecKind, detail: str, step_index: int = 0):
        self.kind = kind
        self.detail = detail
        self.step_index = step_index
        super().__init__(f"{kind.value} at step {step_index}: {detail}")

    def __str__(self) -> str:
        return f"{self.kind.value} at step {self.step_index}: {self.detail}"


def resolve_beaker(state: AlchemyState, ref: BeakerRef) -> int:
    """Resolve a reference to a 1-based beaker position.

    Without a color the candidates are all seven beakers; with a color they
    are the non-empty beakers homogeneous in that color, left to right.
    Positive indices count from the left, negative from the right.
    """
    if ref.color is None:
        return ref.index if ref.index > 0 else ALCHEMY_BEAKERS + 1 + ref.index
    # b.strip(c) == "" holds exactly when every unit in b is color c
    candidates = [i for i, b in enumerate(state.beakers, 1) if b and b.strip(ref.color) == ""]
    k = ref.index
    if k > 0:
        if k > len(candidates):
            raise ExecError(
                ExecKind.INVALID_REFERENCE,
                f"only {len(candidates)} beaker(s) of color {ref.color!r}, wanted #{k}",
            )
        return candidates[k - 1]
    if -k > len(candidates):
        raise ExecError(
            ExecKind.INVALID_REFERENCE,
            f"only {len(candidates)} beaker(s) of color {ref.color!r}, wanted #{k}",
        )
    return candidates[k]


def exec_alchemy(state: AlchemyState, action: Mix | Pour | Drain) -> AlchemyState:
    beakers = state.beakers
    if isinstance(action, Pour):
        src = resolve_beaker(state, action.src)
        dst = resolve_beaker(state, action.dst)
        if src == dst:
            raise ExecError(ExecKind.INVALID_REFERENCE, f"pour source equals destination (beaker {src})")
        content = beakers[src - 1]
        if not content:
            raise ExecError(ExecKind.EMPTY_SOURCE, f"beaker {src} is empty")
        merged = beakers[dst - 1] + content
        if len(merged) > ALCHEMY_CAPACITY:
            raise ExecError(
                ExecKind.CAPACITY_EXCEEDED, f"beaker {dst} would hold {len(merged)} units"
            )
        out = list(beakers)
        out[src - 1] = ""
        out[dst - 1] = merged
        return AlchemyState(tuple(out))
    if isinstance(action, Drain):
        pos = resolve_beaker(state, action.target)
        content = beakers[pos - 1]
        if not content:
            raise ExecError(ExecKind.EMPTY_SOURCE, f"beaker {pos} is empty")
        if isinstance(action.amount, FractionLiteral):
            k = action.amount.units_of(len(content))
            if k is None:
                raise ExecError(
                    ExecKind.NON_INTEGRAL_FRACTION,
                    f"{action.amount} of {len(content)} units is not whole",
                )
        else:
            k = action.amount
            if k > len(content):
                raise ExecError(
                    ExecKind.OVERFLOW, f"drain {k} from beaker {pos} holding {len(content)}"
                )
        out = list(beakers)
        out[pos - 1] = content[: len(content) - k]
        return AlchemyState(tuple(out))
    if isinstance(action, Mix):
        pos = resolve_beaker(state, action.target)
        content = beakers[pos - 1]
        if not content:
            raise ExecError(ExecKind.EMPTY_SOURCE, f"beaker {pos} is empty")
        out = list(beakers)
        out[pos - 1] = "b" * len(content)  # mixing always yields brown
        return AlchemyState(tuple(out))
    raise TypeError(f"not an alchemy action: {action!r}")


def exec_scene(state: SceneState, action: Person | RmPerson | Hat | RmHat) -> SceneState:
    slots = state.slots
    slot = slots[action.pos - 1]
    if isinstance(action, Person):
        if slot != "__":
            raise ExecError(ExecKind.OCCUPIED_POSITION, f"position {action.pos} is occupied")
        new = action.shirt + "_"
    elif isinstance(action, RmPerson):
        if slot == "__":
            raise ExecError(ExecKind.VACANT_POSITION, f"position {action.pos} is empty")
        new = "__"
    elif isinstance(action, Hat):
        if slot == "__":
            raise ExecError(ExecKind.VACANT_POSITION, f"position {action.pos} is empty")
        if slot[1] != "_":
            raise ExecError(ExecKind.HAT_CONFLICT, f"person at {action.pos} already has a hat")
        new = slot[0] + action.hat
    elif isinstance(action, RmHat):
        if slot == "__":
            raise ExecError(ExecKind.VACANT_POSITION, f"position {action.pos} is empty")
        if slot[1] == "_":
            raise ExecError(ExecKind.HAT_CONFLICT, f"person at {action.pos} has no hat")
        new = slot[0] + "_"
    else:
        raise TypeError(f"not a scene action: {action!r}")
    out = list(slots)
    out[action.pos - 1] = new
    return SceneState(tuple(out))


def exec_tangrams(state: TangramsState, action: Insert | Remove) -> TangramsState:
    objects = state.objects
    if isinstance(action, Remove):
        if action.pos > len(objects):
            raise ExecError(
                ExecKind.INVALID_REFERENCE,
                f"remove position {action.pos} beyond {len(objects)} object(s)",
            )
        return TangramsState(objects[: action.pos - 1] + objects[action.pos :])
    if isinstance(action, Insert):
        if len(objects) >= TANGRAM_CAPACITY:
            raise ExecError(ExecKind.CAPACITY_EXCEEDED, "state already holds 5 objects")
        if action.obj in objects:
            raise ExecError(ExecKind.DUPLICATE_OBJECT, f"object {action.obj} already present")
        if action.pos > len(objects) + 1:
            raise ExecError(
                ExecKind.INVALID_REFERENCE,
                f"insert position {action.pos} beyond {len(objects)} object(s)",
            )
        return TangramsState(objects[: action.pos - 1] + (action.obj,) + objects[action.pos - 1 :])
    raise TypeError(f"not a tangrams action: {action!r}")


def exec_entity(state: EntityState, action: Create | Move | Destroy) -> EntityState:
    try:
        current = state.location_of(action.participant)
    except KeyError:
        raise ExecError(
            ExecKind.UNKNOWN_ENTITY, f"no entity named {action.participant!r}"
        ) from None
    if isinstance(action, Create):
        if current != NON_EXISTENT:
            raise ExecError(
                ExecKind.ALREADY_EXISTS, f"{action.participant!r} already exists at {current!r}"
            )
        return state.with_location(action.participant, action.location)
    if isinstance(action, Move):
        if current != action.src:
            raise ExecError(
                ExecKind.LOCATION_MISMATCH,
                f"{action.participant!r} is at {current!r}, not {action.src!r}",
            )
        return state.with_location(action.participant, action.dst)
    if isinstance(action, Destroy):
        if current == NON_EXISTENT:
            raise ExecError(
                ExecKind.INVALID_REFERENCE, f"{action.participant!r} does not exist"
            )
        return state.with_location(action.participant, NON_EXISTENT)
    raise TypeError(f"not an entity action: {action!r}")


def exec_action(state: EnvState, action: Action) -> EnvState:
    """Apply one action to a state of the matching domain."""
    if isinstance(state, AlchemyState):
        return exec_alchemy(state, action)
    if isinstance(state, SceneState):
        return exec_scene(state, action)
    if isinstance(state, TangramsState):
        return exec_tangrams(state, action)
    if isinstance(state, EntityState):
        return exec_entity(state, action)
    raise TypeError(f"unknown state type: {type(state).__name__}")


def execute_trace(state: EnvState, program: Program) -> list[EnvState]:
    """States after each action, in order. Raises ExecError with the failing step index."""
    if not matches_domain(state, program.domain):
        raise ValueError(f"state type {type(state).__name__} does not match domain {program.domain}")
    trace: list[EnvState] = []
    current = state
    for i, action in enumerate(program.actions):
        try:
            current = exec_action(current, action)
        except ExecError as e:
            e.step_index = i
            raise
        trace.append(current)
    return trace


def execute_program(state: EnvState, program: Program) -> EnvState:
    """Left fold of the per-action executor; returns the goal state."""
    return execute_trace(state, program)[-1]
