"""Metric suite: denotation accuracy, entity action tags, tuple-set P/R/F1.

Scoring conventions, fixed here and exercised by hand-worked unit cases:

* Equality is parse-level, never string-level. A prediction that fails to
  parse (or, for entity domains, whose entity set differs from gold) scores
  wrong; it is counted and listed in the report diagnostics, and the
  evaluation chain carries the previous state forward so later steps stay
  scoreable.
* ``inst`` counts every (episode, step) pair; ``utts3``/``utts5`` count
  episodes whose step-3/step-5 states are exactly right.
* Sentence-level questions are scored all-or-nothing per (entity, process)
  instance: kind-set agreement, per-kind step-set agreement, and per-kind
  location-multiset agreement. The step/location pools contain only
  instances whose gold entity undergoes at least one action.
* Precision/recall with an empty denominator score 0 and are flagged,
  except when both sides are empty, which is vacuous agreement (100).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .states import (
    Domain,
    ENTITY_DOMAINS,
    EntityState,
    EnvState,
    NON_EXISTENT,
    ParseError,
    SCONE_DOMAINS,
    UNKNOWN_LOCATION,
    matches_domain,
    parse_state,
)

SCONE_INTERACTION_LENGTH = 5


class MissingPrediction(KeyError):
    pass


class DomainMismatch(ValueError):
    pass


class EntityListMismatch(ValueError):
    pass


@dataclass(frozen=True)
class InteractionEpisode:
    """An initial state, T instructions, and the T gold states they lead to."""

    id: str
    domain: Domain
    initial_state: EnvState
    instructions: tuple[str, ...]
    gold_states: tuple[EnvState, ...]

    def __post_init__(self) -> None:
        if len(self.instructions) != len(self.gold_states):
            raise ValueError(
                f"episode {self.id}: {len(self.instructions)} instructions vs "
                f"{len(self.gold_states)} gold states"
            )
        if not self.instructions:
            raise ValueError(f"episode {self.id}: empty interaction")
        if self.domain in SCONE_DOMAINS and len(self.instructions) != SCONE_INTERACTION_LENGTH:
            raise ValueError(
                f"episode {self.id}: {self.domain.value} interactions have exactly "
                f"{SCONE_INTERACTION_LENGTH} instructions, got {len(self.instructions)}"
            )
        for state in (self.initial_state, *self.gold_states):
            if not matches_domain(state, self.domain):
                raise DomainMismatch(
                    f"episode {self.id}: state type {type(state).__name__} "
                    f"does not match domain {self.domain.value}"
                )
        if self.domain in ENTITY_DOMAINS:
            names = self.initial_state.names
            for state in self.gold_states:
                if set(state.names) != set(names):
                    raise EntityListMismatch(
                        f"episode {self.id}: gold states track different entities"
                    )

    @property
    def steps(self) -> int:
        return len(self.instructions)


class PredictionSet:
    """Mapping (episode id, 1-based step) -> predicted state text."""

    def __init__(self, by_key: Mapping[tuple[str, int], str]):
        self._by_key = dict(by_key)

    def __len__(self) -> int:
        return len(self._by_key)

    def get(self, episode_id: str, step: int) -> str:
        try:
            return self._by_key[(episode_id, step)]
        except KeyError:
            raise MissingPrediction(f"no prediction for episode {episode_id!r} step {step}") from None

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "PredictionSet":
        by_key: dict[tuple[str, int], str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                if not raw.strip():
                    continue
                record = json.loads(raw)
                try:
                    key = (str(record["id"]), int(record["step"]))
                    by_key[key] = record["state"]
                except KeyError as e:
                    raise ParseError(f"line {lineno}: prediction missing field {e}") from None
        return cls(by_key)

    @classmethod
    def oracle(cls, episodes: Iterable[InteractionEpisode]) -> "PredictionSet":
        from .states import render_state

        by_key = {}
        for ep in episodes:
            for t, state in enumerate(ep.gold_states, 1):
                by_key[(ep.id, t)] = render_state(state)
        return cls(by_key)


# --- SCONE denotation accuracy -------------------------------------------------


@dataclass(frozen=True)
class SconeReport:
    inst: float
    utts3: float
    utts5: float
    episodes: int
    instruction_steps: int
    unparseable: int
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "inst": self.inst,
            "utts3": self.utts3,
            "utts5": self.utts5,
            "episodes": self.episodes,
            "instruction_steps": self.instruction_steps,
            "unparseable": self.unparseable,
            "diagnostics": list(self.diagnostics),
        }

    def pretty(self) -> str:
        lines = [
            f"Inst  : {self.inst:6.2f}",
            f"3utts : {self.utts3:6.2f}",
            f"5utts : {self.utts5:6.2f}",
            f"({self.episodes} episodes, {self.instruction_steps} steps, "
            f"{self.unparseable} unparseable predictions)",
        ]
        return "\n".join(lines)


def _pct(num: int, den: int) -> float:
    return 100.0 * num / den if den else 0.0


def eval_scone(episodes: Sequence[InteractionEpisode], preds: PredictionSet) -> SconeReport:
    """Denotation accuracy per step (inst) and at steps 3 and 5 (3utts/5utts)."""
    diagnostics: list[str] = []
    inst_correct = inst_total = 0
    utts3_correct = utts5_correct = 0
    unparseable = 0
    for ep in episodes:
        if ep.domain not in SCONE_DOMAINS:
            raise DomainMismatch(f"episode {ep.id}: {ep.domain.value} is not a scone domain")
        for t in range(1, ep.steps + 1):
            text = preds.get(ep.id, t)
            try:
                predicted = parse_state(ep.domain, text)
            except ParseError as e:
                predicted = None
                unparseable += 1
                if len(diagnostics) < 50:
                    diagnostics.append(f"episode {ep.id} step {t}: unparseable ({e.reason})")
            correct = predicted == ep.gold_states[t - 1]
            inst_total += 1
            inst_correct += correct
            if t == 3:
                utts3_correct += correct
            if t == 5:
                utts5_correct += correct
    return SconeReport(
        inst=_pct(inst_correct, inst_total),
        utts3=_pct(utts3_correct, len(episodes)),
        utts5=_pct(utts5_correct, len(episodes)),
        episodes=len(episodes),
        instruction_steps=inst_total,
        unparseable=unparseable,
        diagnostics=tuple(diagnostics),
    )


# --- entity action tags --------------------------------------------------------


class TagKind(str, Enum):
    CREATE = "create"
    MOVE = "move"
    DESTROY = "destroy"


@dataclass(frozen=True)
class ActionTag:
    kind: TagKind
    src: str | None  # destroy/move: where the entity came from ("?" if unknown)
    dst: str | None  # create/move: where it ended up ("?" if unknown)


def _transition_tag(before: str, after: str) -> ActionTag | None:
    if before == after:
        return None
    if before == NON_EXISTENT:
        return ActionTag(TagKind.CREATE, None, after)
    if after == NON_EXISTENT:
        return ActionTag(TagKind.DESTROY, before, None)
    return ActionTag(TagKind.MOVE, before, after)


def derive_action_tags(states: Sequence[EntityState]) -> dict[str, list[ActionTag | None]]:
    """Per-entity transition tags for consecutive state pairs.

    ``states[0]`` is the initial state; entry ``t-1`` of each list tags the
    transition into step ``t``.
    """
    if len(states) < 2:
        raise ValueError("need at least two states to derive transitions")
    names = states[0].names
    for state in states[1:]:
        if set(state.names) != set(names):
            raise EntityListMismatch("states track different entities")
    tags: dict[str, list[ActionTag | None]] = {}
    for name in names:
        seq = []
        for prev, cur in zip(states, states[1:]):
            seq.append(_transition_tag(prev.location_of(name), cur.location_of(name)))
        tags[name] = seq
    return tags


def _prediction_chain(
    ep: InteractionEpisode, preds: PredictionSet, diagnostics: list[str]
) -> tuple[list[EntityState], int]:
    """Gold S0 followed by parsed predictions; invalid steps carry the previous state."""
    chain: list[EntityState] = [ep.initial_state]
    invalid = 0
    gold_names = set(ep.initial_state.names)
    for t in range(1, ep.steps + 1):
        text = preds.get(ep.id, t)
        state = None
        reason = ""
        try:
            parsed = parse_state(ep.domain, text)
            if set(parsed.names) == gold_names:
                state = parsed
            else:
                reason = "entity list differs from gold"
        except ParseError as e:
            reason = f"unparseable ({e.reason})"
        if state is None:
            invalid += 1
            if len(diagnostics) < 50:
                diagnostics.append(f"episode {ep.id} step {t}: {reason}")
            state = chain[-1]
        chain.append(state)
    return chain, invalid


# --- propara sentence level ----------------------------------------------------


@dataclass(frozen=True)
class ProparaSentenceReport:
    cat1: float
    cat2: float
    cat3: float
    macro_avg: float
    micro_avg: float
    cat1_instances: int
    cat23_instances: int
    unparseable: int
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "cat1": self.cat1,
            "cat2": self.cat2,
            "cat3": self.cat3,
            "macro_avg": self.macro_avg,
            "micro_avg": self.micro_avg,
            "cat1_instances": self.cat1_instances,
            "cat23_instances": self.cat23_instances,
            "unparseable": self.unparseable,
            "diagnostics": list(self.diagnostics),
        }

    def pretty(self) -> str:
        return "\n".join(
            [
                f"Cat-1     : {self.cat1:6.2f}",
                f"Cat-2     : {self.cat2:6.2f}",
                f"Cat-3     : {self.cat3:6.2f}",
                f"Macro-Avg : {self.macro_avg:6.2f}",
                f"Micro-Avg : {self.micro_avg:6.2f}",
                f"({self.cat1_instances} entity instances, "
                f"{self.unparseable} invalid predictions)",
            ]
        )


def _kind_steps(tags: Sequence[ActionTag | None], kind: TagKind) -> frozenset[int]:
    return frozenset(t for t, tag in enumerate(tags, 1) if tag is not None and tag.kind == kind)


def _kind_locations(tags: Sequence[ActionTag | None], kind: TagKind) -> Counter:
    locs: Counter = Counter()
    for tag in tags:
        if tag is None or tag.kind != kind:
            continue
        if kind == TagKind.CREATE:
            locs[(tag.dst,)] += 1
        elif kind == TagKind.DESTROY:
            locs[(tag.src,)] += 1
        else:
            locs[(tag.src, tag.dst)] += 1
    return locs


def eval_propara_sentence(
    episodes: Sequence[InteractionEpisode], preds: PredictionSet
) -> ProparaSentenceReport:
    diagnostics: list[str] = []
    cat1_correct = cat1_total = 0
    cat2_correct = cat3_correct = cat23_total = 0
    unparseable = 0
    for ep in episodes:
        if ep.domain not in ENTITY_DOMAINS:
            raise DomainMismatch(f"episode {ep.id}: {ep.domain.value} is not an entity domain")
        gold_tags = derive_action_tags([ep.initial_state, *ep.gold_states])
        chain, invalid = _prediction_chain(ep, preds, diagnostics)
        unparseable += invalid
        pred_tags = derive_action_tags(chain)
        for name in ep.initial_state.names:
            gold, pred = gold_tags[name], pred_tags[name]
            gold_kinds = {tag.kind for tag in gold if tag is not None}
            pred_kinds = {tag.kind for tag in pred if tag is not None}
            cat1_total += 1
            cat1_correct += gold_kinds == pred_kinds
            if not gold_kinds:
                continue  # "when/where" questions are asked only of acting entities
            cat23_total += 1
            cat2_correct += all(
                _kind_steps(gold, kind) == _kind_steps(pred, kind) for kind in TagKind
            )
            cat3_correct += all(
                _kind_locations(gold, kind) == _kind_locations(pred, kind) for kind in TagKind
            )
    cat1 = _pct(cat1_correct, cat1_total)
    cat2 = _pct(cat2_correct, cat23_total)
    cat3 = _pct(cat3_correct, cat23_total)
    micro = _pct(
        cat1_correct + cat2_correct + cat3_correct, cat1_total + 2 * cat23_total
    )
    return ProparaSentenceReport(
        cat1=cat1,
        cat2=cat2,
        cat3=cat3,
        macro_avg=(cat1 + cat2 + cat3) / 3.0,
        micro_avg=micro,
        cat1_instances=cat1_total,
        cat23_instances=cat23_total,
        unparseable=unparseable,
        diagnostics=tuple(diagnostics),
    )


# --- propara document level ----------------------------------------------------

DOCUMENT_QUESTIONS = ("inputs", "outputs", "conversions", "moves")


@dataclass(frozen=True)
class ProparaDocumentReport:
    precision: float
    recall: float
    f1: float
    per_question: dict[str, dict[str, float]]
    processes: int
    undefined_scores: int
    unparseable: int
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_question": self.per_question,
            "processes": self.processes,
            "undefined_scores": self.undefined_scores,
            "unparseable": self.unparseable,
            "diagnostics": list(self.diagnostics),
        }

    def pretty(self) -> str:
        lines = [
            f"Precision : {self.precision:6.2f}",
            f"Recall    : {self.recall:6.2f}",
            f"F1        : {self.f1:6.2f}",
        ]
        for q in DOCUMENT_QUESTIONS:
            s = self.per_question[q]
            lines.append(
                f"  {q:<12} P {s['precision']:6.2f}  R {s['recall']:6.2f}  F1 {s['f1']:6.2f}"
            )
        lines.append(f"({self.processes} processes, {self.unparseable} invalid predictions)")
        return "\n".join(lines)


def document_tuples(
    states: Sequence[EntityState],
) -> dict[str, frozenset]:
    """The four document-level tuple sets derived from a state chain."""
    tags = derive_action_tags(states)
    initial, final = states[0], states[-1]
    inputs = set()
    outputs = set()
    moves = set()
    destroys_at: dict[tuple[int, str], set[str]] = {}
    creates_at: dict[tuple[int, str], set[str]] = {}
    for name, seq in tags.items():
        kinds = {tag.kind for tag in seq if tag is not None}
        if (
            initial.location_of(name) != NON_EXISTENT
            and TagKind.DESTROY in kinds
            and TagKind.CREATE not in kinds
        ):
            inputs.add((name,))
        if TagKind.CREATE in kinds and final.location_of(name) != NON_EXISTENT:
            outputs.add((name,))
        for t, tag in enumerate(seq, 1):
            if tag is None:
                continue
            if tag.kind == TagKind.MOVE:
                moves.add((name, tag.src, tag.dst, t))
            elif tag.kind == TagKind.DESTROY:
                destroys_at.setdefault((t, tag.src), set()).add(name)
            elif tag.kind == TagKind.CREATE:
                creates_at.setdefault((t, tag.dst), set()).add(name)
    conversions = set()
    for (t, loc), destroyed in destroys_at.items():
        created = creates_at.get((t, loc))
        if created:
            conversions.add((frozenset(destroyed), frozenset(created), loc, t))
    return {
        "inputs": frozenset(inputs),
        "outputs": frozenset(outputs),
        "conversions": frozenset(conversions),
        "moves": frozenset(moves),
    }


def _pair_pr(pred: frozenset, gold: frozenset) -> tuple[float, float, bool]:
    """(precision, recall, flagged). Both empty is vacuous agreement."""
    if not pred and not gold:
        return 100.0, 100.0, False
    flagged = not pred or not gold
    hits = len(pred & gold)
    precision = 100.0 * hits / len(pred) if pred else 0.0
    recall = 100.0 * hits / len(gold) if gold else 0.0
    return precision, recall, flagged


def _f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def eval_propara_document(
    episodes: Sequence[InteractionEpisode], preds: PredictionSet
) -> ProparaDocumentReport:
    diagnostics: list[str] = []
    per_question_p: dict[str, list[float]] = {q: [] for q in DOCUMENT_QUESTIONS}
    per_question_r: dict[str, list[float]] = {q: [] for q in DOCUMENT_QUESTIONS}
    undefined = 0
    unparseable = 0
    for ep in episodes:
        if ep.domain not in ENTITY_DOMAINS:
            raise DomainMismatch(f"episode {ep.id}: {ep.domain.value} is not an entity domain")
        gold = document_tuples([ep.initial_state, *ep.gold_states])
        chain, invalid = _prediction_chain(ep, preds, diagnostics)
        unparseable += invalid
        predicted = document_tuples(chain)
        for q in DOCUMENT_QUESTIONS:
            precision, recall, flagged = _pair_pr(predicted[q], gold[q])
            per_question_p[q].append(precision)
            per_question_r[q].append(recall)
            undefined += flagged
    def mean(values: list[float]) -> float:
        return sum(values) / len(values) if values else 0.0

    question_scores = {}
    for q in DOCUMENT_QUESTIONS:
        p, r = mean(per_question_p[q]), mean(per_question_r[q])
        question_scores[q] = {"precision": p, "recall": r, "f1": _f1(p, r)}
    precision = mean([question_scores[q]["precision"] for q in DOCUMENT_QUESTIONS])
    recall = mean([question_scores[q]["recall"] for q in DOCUMENT_QUESTIONS])
    return ProparaDocumentReport(
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        per_question=question_scores,
        processes=len(episodes),
        undefined_scores=undefined,
        unparseable=unparseable,
        diagnostics=tuple(diagnostics),
    )


# --- recipes location changes ----------------------------------------------------


@dataclass(frozen=True)
class RecipesReport:
    precision: float
    recall: float
    f1: float
    gold_changes: int
    predicted_changes: int
    matched_changes: int
    undefined_scores: int
    unparseable: int
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "gold_changes": self.gold_changes,
            "predicted_changes": self.predicted_changes,
            "matched_changes": self.matched_changes,
            "undefined_scores": self.undefined_scores,
            "unparseable": self.unparseable,
            "diagnostics": list(self.diagnostics),
        }

    def pretty(self) -> str:
        return "\n".join(
            [
                f"Precision : {self.precision:6.2f}",
                f"Recall    : {self.recall:6.2f}",
                f"F1        : {self.f1:6.2f}",
                f"({self.matched_changes}/{self.predicted_changes} predicted and "
                f"{self.gold_changes} gold location changes, "
                f"{self.unparseable} invalid predictions)",
            ]
        )


def location_changes(episode_id: str, states: Sequence[EntityState]) -> frozenset:
    """(episode, entity, step, new location) tuples for changes to a named location."""
    changes = set()
    names = states[0].names
    for t, (prev, cur) in enumerate(zip(states, states[1:]), 1):
        for name in names:
            before, after = prev.location_of(name), cur.location_of(name)
            if before != after and after not in (NON_EXISTENT, UNKNOWN_LOCATION):
                changes.add((episode_id, name, t, after))
    return frozenset(changes)


def eval_recipes(episodes: Sequence[InteractionEpisode], preds: PredictionSet) -> RecipesReport:
    diagnostics: list[str] = []
    gold_tuples: set = set()
    pred_tuples: set = set()
    unparseable = 0
    for ep in episodes:
        if ep.domain not in ENTITY_DOMAINS:
            raise DomainMismatch(f"episode {ep.id}: {ep.domain.value} is not an entity domain")
        gold_tuples |= location_changes(ep.id, [ep.initial_state, *ep.gold_states])
        chain, invalid = _prediction_chain(ep, preds, diagnostics)
        unparseable += invalid
        pred_tuples |= location_changes(ep.id, chain)
    if not gold_tuples and not pred_tuples:
        precision = recall = 100.0
        undefined = 0
    else:
        hits = len(gold_tuples & pred_tuples)
        undefined = int(not pred_tuples) + int(not gold_tuples)
        precision = 100.0 * hits / len(pred_tuples) if pred_tuples else 0.0
        recall = 100.0 * hits / len(gold_tuples) if gold_tuples else 0.0
    return RecipesReport(
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        gold_changes=len(gold_tuples),
        predicted_changes=len(pred_tuples),
        matched_changes=len(gold_tuples & pred_tuples),
        undefined_scores=undefined,
        unparseable=unparseable,
        diagnostics=tuple(diagnostics),
    )
