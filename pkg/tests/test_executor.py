import pytest
from hypothesis import given, settings

from symenv.executor import (
    ExecError,
    ExecKind,
    exec_alchemy,
    exec_entity,
    exec_scene,
    exec_tangrams,
    execute_program,
    execute_trace,
    resolve_beaker,
)
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
    parse_program,
)
from symenv.sampler import SamplerConfig, derive_rng, sample_action
from symenv.states import (
    Domain,
    EntityState,
    SceneState,
    TangramsState,
    parse_state,
    render_state,
)

from conftest import alchemy_states


def run_text(domain, state_text, program_text):
    state = parse_state(domain, state_text)
    program = parse_program(domain, program_text)
    return render_state(execute_program(state, program))


GOLDEN_ROWS = [
    (
        Domain.ALCHEMY,
        "1:rr|2:gg|3:g|4:ooo|5:_|6:_|7:_",
        "Pour ( Beaker ( 1 ) , Beaker ( 2 , g ) )",
        "1:_|2:gg|3:grr|4:ooo|5:_|6:_|7:_",
    ),
    (
        Domain.SCENE,
        "1:__|2:__|3:__|4:__|5:ob|6:__|7:__|8:__|9:__|10:__",
        "Person ( 2 , r ) ; Hat ( 2 , y )",
        "1:__|2:ry|3:__|4:__|5:ob|6:__|7:__|8:__|9:__|10:__",
    ),
    (
        Domain.TANGRAMS,
        "1:A|2:B|3:C|4:D|5:E",
        "Remove ( 2 ) ; Insert ( 4 , B )",
        "1:A|2:C|3:D|4:B|5:E",
    ),
    (
        Domain.PROPARA,
        "ent:bacteria|sickness loc:cell|-",
        "Move ( bacteria , cell , bladder )",
        "ent:bacteria|sickness loc:bladder|-",
    ),
    (
        Domain.RECIPES,
        "ent:beef|pepper loc:-|-",
        "Create ( beef , oven )",
        "ent:beef|pepper loc:oven|-",
    ),
]


class TestGoldenExecutions:
    @pytest.mark.parametrize("domain,init,program,goal", GOLDEN_ROWS)
    def test_worked_example(self, domain, init, program, goal):
        assert run_text(domain, init, program) == goal


class TestResolveBeaker:
    STATE = parse_state(Domain.ALCHEMY, "1:rr|2:gg|3:g|4:ooo|5:_|6:_|7:_")

    def test_plain_positive_is_identity(self):
        for i in range(1, 8):
            assert resolve_beaker(self.STATE, BeakerRef(i)) == i

    def test_plain_negative_counts_from_right(self):
        assert resolve_beaker(self.STATE, BeakerRef(-1)) == 7
        assert resolve_beaker(self.STATE, BeakerRef(-7)) == 1

    def test_color_filter_selects_homogeneous_candidates(self):
        # green candidates are beakers 2 and 3, left to right
        assert resolve_beaker(self.STATE, BeakerRef(1, "g")) == 2
        assert resolve_beaker(self.STATE, BeakerRef(2, "g")) == 3

    def test_negative_color_index(self):
        # brute-force candidate list: [2, 3]; last one is beaker 3
        candidates = [
            i
            for i, b in enumerate(self.STATE.beakers, 1)
            if b and all(c == "g" for c in b)
        ]
        assert candidates == [2, 3]
        assert resolve_beaker(self.STATE, BeakerRef(-1, "g")) == candidates[-1]
        assert resolve_beaker(self.STATE, BeakerRef(-2, "g")) == candidates[-2]

    def test_index_beyond_candidates(self):
        with pytest.raises(ExecError) as err:
            resolve_beaker(self.STATE, BeakerRef(3, "g"))
        assert err.value.kind == ExecKind.INVALID_REFERENCE

    def test_mixed_colors_are_not_candidates(self):
        state = parse_state(Domain.ALCHEMY, "1:rg|2:gg|3:_|4:_|5:_|6:_|7:_")
        assert resolve_beaker(state, BeakerRef(1, "g")) == 2


class TestAlchemy:
    def test_pour_appends_on_top(self):
        state = parse_state(Domain.ALCHEMY, "1:rr|2:gg|3:g|4:ooo|5:_|6:_|7:_")
        out = exec_alchemy(state, Pour(BeakerRef(1), BeakerRef(3)))
        assert out.beakers[2] == "grr"
        assert out.beakers[0] == ""

    def test_drain_all_empties(self):
        state = parse_state(Domain.ALCHEMY, "1:rrr|2:_|3:_|4:_|5:_|6:_|7:_")
        out = exec_alchemy(state, Drain(BeakerRef(1), 3))
        assert out.beakers[0] == ""

    def test_drain_removes_from_top(self):
        state = parse_state(Domain.ALCHEMY, "1:grr|2:_|3:_|4:_|5:_|6:_|7:_")
        out = exec_alchemy(state, Drain(BeakerRef(1), 2))
        assert out.beakers[0] == "g"

    def test_drain_fraction(self):
        state = parse_state(Domain.ALCHEMY, "1:gggg|2:_|3:_|4:_|5:_|6:_|7:_")
        out = exec_alchemy(state, Drain(BeakerRef(1), FractionLiteral(3, 4)))
        assert out.beakers[0] == "g"

    def test_mix_turns_brown_conserving_units(self):
        state = parse_state(Domain.ALCHEMY, "1:rg|2:_|3:_|4:_|5:_|6:_|7:_")
        out = exec_alchemy(state, Mix(BeakerRef(1)))
        assert out.beakers[0] == "bb"
        assert sum(map(len, out.beakers)) == sum(map(len, state.beakers))

    @pytest.mark.parametrize(
        "state_text,action,kind",
        [
            ("1:rr|2:ggg|3:_|4:_|5:_|6:_|7:_", Pour(BeakerRef(1), BeakerRef(2)), ExecKind.CAPACITY_EXCEEDED),
            ("1:_|2:g|3:_|4:_|5:_|6:_|7:_", Pour(BeakerRef(1), BeakerRef(2)), ExecKind.EMPTY_SOURCE),
            ("1:r|2:g|3:_|4:_|5:_|6:_|7:_", Pour(BeakerRef(1), BeakerRef(1)), ExecKind.INVALID_REFERENCE),
            ("1:r|2:r|3:_|4:_|5:_|6:_|7:_", Pour(BeakerRef(1, "r"), BeakerRef(-2, "r")), ExecKind.INVALID_REFERENCE),
            ("1:rr|2:_|3:_|4:_|5:_|6:_|7:_", Drain(BeakerRef(1), 3), ExecKind.OVERFLOW),
            ("1:rrr|2:_|3:_|4:_|5:_|6:_|7:_", Drain(BeakerRef(1), FractionLiteral(1, 2)), ExecKind.NON_INTEGRAL_FRACTION),
            ("1:_|2:_|3:_|4:_|5:_|6:_|7:_", Drain(BeakerRef(1), 1), ExecKind.EMPTY_SOURCE),
            ("1:_|2:_|3:_|4:_|5:_|6:_|7:_", Mix(BeakerRef(1)), ExecKind.EMPTY_SOURCE),
            ("1:r|2:_|3:_|4:_|5:_|6:_|7:_", Mix(BeakerRef(1, "g")), ExecKind.INVALID_REFERENCE),
        ],
    )
    def test_errors(self, state_text, action, kind):
        state = parse_state(Domain.ALCHEMY, state_text)
        with pytest.raises(ExecError) as err:
            exec_alchemy(state, action)
        assert err.value.kind == kind

    def test_pour_self_via_color_alias(self):
        # Beaker(1) and Beaker(1, r) resolve to the same beaker
        state = parse_state(Domain.ALCHEMY, "1:r|2:_|3:_|4:_|5:_|6:_|7:_")
        with pytest.raises(ExecError) as err:
            exec_alchemy(state, Pour(BeakerRef(1), BeakerRef(1, "r")))
        assert err.value.kind == ExecKind.INVALID_REFERENCE


class TestScene:
    EMPTY = SceneState(("__",) * 10)

    def test_person_then_hat(self):
        state = exec_scene(self.EMPTY, Person(2, "r"))
        assert state.slots[1] == "r_"
        state = exec_scene(state, Hat(2, "y"))
        assert state.slots[1] == "ry"

    def test_rmhat_hat_inverse(self):
        state = parse_state(Domain.SCENE, "1:__|2:bp|3:__|4:oy|5:__|6:__|7:__|8:__|9:__|10:__")
        assert exec_scene(exec_scene(state, RmHat(2)), Hat(2, "p")) == state

    def test_rmperson_takes_hat_along(self):
        state = parse_state(Domain.SCENE, "1:__|2:bp|3:__|4:__|5:__|6:__|7:__|8:__|9:__|10:__")
        assert exec_scene(state, RmPerson(2)).slots[1] == "__"

    @pytest.mark.parametrize(
        "slot,action,kind",
        [
            ("r_", Person(3, "g"), ExecKind.OCCUPIED_POSITION),
            ("__", Hat(3, "r"), ExecKind.VACANT_POSITION),
            ("__", RmPerson(3), ExecKind.VACANT_POSITION),
            ("__", RmHat(3), ExecKind.VACANT_POSITION),
            ("ry", Hat(3, "g"), ExecKind.HAT_CONFLICT),
            ("r_", RmHat(3), ExecKind.HAT_CONFLICT),
        ],
    )
    def test_errors(self, slot, action, kind):
        slots = list(("__",) * 10)
        slots[2] = slot
        state = SceneState(tuple(slots))
        with pytest.raises(ExecError) as err:
            exec_scene(state, action)
        assert err.value.kind == kind

    def test_changes_at_most_one_slot(self, seeded_states):
        cfg = SamplerConfig(seed=5)
        rng = derive_rng(5, "scene-occupancy")
        for state in seeded_states(Domain.SCENE, n=200):
            action = sample_action(state, cfg, rng)
            out = exec_scene(state, action)
            diffs = sum(a != b for a, b in zip(state.slots, out.slots))
            assert diffs <= 1


class TestTangrams:
    FULL = TangramsState(("A", "B", "C", "D", "E"))

    def test_remove_shifts_left(self):
        assert exec_tangrams(self.FULL, Remove(2)).objects == ("A", "C", "D", "E")

    def test_insert_remove_inverse(self):
        state = TangramsState(("A", "C"))
        for pos in (1, 2, 3):
            inserted = exec_tangrams(state, Insert(pos, "E"))
            assert exec_tangrams(inserted, Remove(pos)) == state

    @pytest.mark.parametrize(
        "objects,action,kind",
        [
            (("A", "B", "C"), Remove(4), ExecKind.INVALID_REFERENCE),
            (("A", "B", "C"), Insert(5, "D"), ExecKind.INVALID_REFERENCE),
            (("A", "B", "C", "D", "E"), Insert(1, "A"), ExecKind.CAPACITY_EXCEEDED),
            (("A", "B", "C"), Insert(1, "A"), ExecKind.DUPLICATE_OBJECT),
        ],
    )
    def test_errors(self, objects, action, kind):
        with pytest.raises(ExecError) as err:
            exec_tangrams(TangramsState(objects), action)
        assert err.value.kind == kind


class TestEntity:
    STATE = EntityState(("water", "light"), ("soil", "-"))

    def test_move(self):
        out = exec_entity(self.STATE, Move("water", "soil", "cloud"))
        assert out.locations == ("cloud", "-")

    def test_create_destroy_inverse_on_location(self):
        created = exec_entity(self.STATE, Create("light", "sun"))
        assert created.locations == ("soil", "sun")
        assert exec_entity(created, Destroy("light")) == self.STATE

    def test_create_unknown_location(self):
        out = exec_entity(self.STATE, Create("light", "?"))
        assert out.locations == ("soil", "?")

    def test_destroy_unknown_location_entity(self):
        state = EntityState(("water",), ("?",))
        assert exec_entity(state, Destroy("water")).locations == ("-",)

    @pytest.mark.parametrize(
        "action,kind",
        [
            (Move("fire", "soil", "cloud"), ExecKind.UNKNOWN_ENTITY),
            (Move("water", "cloud", "sun"), ExecKind.LOCATION_MISMATCH),
            (Move("light", "soil", "sun"), ExecKind.LOCATION_MISMATCH),
            (Create("water", "sun"), ExecKind.ALREADY_EXISTS),
            (Destroy("light"), ExecKind.INVALID_REFERENCE),
            (Destroy("fire"), ExecKind.UNKNOWN_ENTITY),
        ],
    )
    def test_errors(self, action, kind):
        with pytest.raises(ExecError) as err:
            exec_entity(self.STATE, action)
        assert err.value.kind == kind

    def test_names_invariant(self, seeded_examples):
        for state, program, goal in seeded_examples(Domain.PROPARA, n=100):
            assert goal.names == state.names


class TestExecuteProgram:
    def test_single_action_equals_fold_base_case(self):
        state = TangramsState(("A", "B"))
        program = Program(Domain.TANGRAMS, (Remove(1),))
        assert execute_program(state, program) == exec_tangrams(state, Remove(1))

    def test_trace_has_one_state_per_action(self):
        state = parse_state(Domain.TANGRAMS, "1:A|2:B|3:C|4:D|5:E")
        program = parse_program(Domain.TANGRAMS, "Remove ( 2 ) ; Insert ( 4 , B )")
        trace = execute_trace(state, program)
        assert len(trace) == 2
        assert render_state(trace[0]) == "1:A|2:C|3:D|4:E|5:_"
        assert render_state(trace[1]) == "1:A|2:C|3:D|4:B|5:E"

    def test_error_carries_step_index(self):
        state = parse_state(Domain.TANGRAMS, "1:A|2:B|3:_|4:_|5:_")
        program = parse_program(Domain.TANGRAMS, "Remove ( 1 ) ; Remove ( 1 ) ; Remove ( 1 )")
        with pytest.raises(ExecError) as err:
            execute_program(state, program)
        assert err.value.step_index == 2
        assert err.value.kind == ExecKind.INVALID_REFERENCE

    def test_domain_mismatch_rejected(self):
        state = TangramsState(("A",))
        program = Program(Domain.SCENE, (RmPerson(1),))
        with pytest.raises(ValueError):
            execute_program(state, program)

    @pytest.mark.parametrize("domain", list(Domain))
    def test_composition(self, domain, seeded_examples):
        for state, program, goal in seeded_examples(domain, n=50):
            actions = program.actions
            if len(actions) < 2:
                continue
            cut = len(actions) // 2
            p1 = Program(domain, actions[:cut])
            p2 = Program(domain, actions[cut:])
            assert execute_program(execute_program(state, p1), p2) == goal

    @pytest.mark.parametrize("domain", list(Domain))
    def test_determinism(self, domain, seeded_examples):
        for state, program, goal in seeded_examples(domain, n=20):
            assert execute_program(state, program) == goal
            assert execute_program(state, program) == goal

    @pytest.mark.parametrize("domain", list(Domain))
    def test_closure_reparses(self, domain, seeded_examples):
        for _, _, goal in seeded_examples(domain, n=50):
            assert parse_state(domain, render_state(goal)) == goal


class TestConservation:
    @settings(max_examples=200)
    @given(alchemy_states)
    def test_pour_conserves_units(self, state):
        total = sum(map(len, state.beakers))
        for src in range(1, 8):
            for dst in range(1, 8):
                if src == dst:
                    continue
                try:
                    out = exec_alchemy(state, Pour(BeakerRef(src), BeakerRef(dst)))
                except ExecError:
                    continue
                assert sum(map(len, out.beakers)) == total

    @settings(max_examples=200)
    @given(alchemy_states)
    def test_drain_removes_exactly_k(self, state):
        total = sum(map(len, state.beakers))
        for pos in range(1, 8):
            for k in range(1, 5):
                try:
                    out = exec_alchemy(state, Drain(BeakerRef(pos), k))
                except ExecError:
                    continue
                assert sum(map(len, out.beakers)) == total - k

    @settings(max_examples=200)
    @given(alchemy_states)
    def test_mix_conserves_units(self, state):
        total = sum(map(len, state.beakers))
        for pos in range(1, 8):
            try:
                out = exec_alchemy(state, Mix(BeakerRef(pos)))
            except ExecError:
                continue
            assert sum(map(len, out.beakers)) == total
