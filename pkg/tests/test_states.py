import pytest
from hypothesis import given, settings

from symenv.states import (
    AlchemyState,
    Domain,
    EntityState,
    ParseError,
    SceneState,
    TangramsState,
    parse_state,
    render_state,
)

from conftest import alchemy_states, entity_states, scene_states, tangrams_states

ALL_DOMAINS = list(Domain)


class TestRenderGolden:
    def test_alchemy_worked_example(self):
        state = AlchemyState(("rr", "gg", "g", "ooo", "", "", ""))
        assert render_state(state) == "1:rr|2:gg|3:g|4:ooo|5:_|6:_|7:_"

    def test_tangrams_singleton_padding(self):
        assert render_state(TangramsState(("A",))) == "1:A|2:_|3:_|4:_|5:_"

    def test_entity_key_value_form(self):
        state = EntityState(("water", "light", "carbon"), ("soil", "sun", "cloud"))
        assert render_state(state) == "ent:water|light|carbon loc:soil|sun|cloud"

    def test_scene_all_ten_positions_rendered(self):
        state = SceneState(("__", "bp", "__", "oy") + ("__",) * 6)
        assert render_state(state) == "1:__|2:bp|3:__|4:oy|5:__|6:__|7:__|8:__|9:__|10:__"


class TestParseGolden:
    def test_scene_example(self):
        state = parse_state(Domain.SCENE, "1:__|2:bp|3:__|4:oy|5:__|6:__|7:__|8:__|9:__|10:__")
        assert state.slots[1] == "bp"
        assert state.slots[3] == "oy"
        assert all(s == "__" for i, s in enumerate(state.slots) if i not in (1, 3))

    def test_alchemy_example(self):
        state = parse_state(Domain.ALCHEMY, "1:r|2:o|3:r|4:g|5:y|6:oo|7:r")
        assert state.beakers == ("r", "o", "r", "g", "y", "oo", "r")

    def test_duplicate_tangram_rejected(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_state(Domain.TANGRAMS, "1:A|2:A|3:_|4:_|5:_")

    def test_outer_whitespace_tolerated(self):
        assert parse_state(Domain.ALCHEMY, "  1:r|2:_|3:_|4:_|5:_|6:_|7:_ \n") == AlchemyState(
            ("r", "", "", "", "", "", "")
        )

    @pytest.mark.parametrize(
        "domain,text",
        [
            (Domain.ALCHEMY, "1:r|2:o|3:r|4:g|5:y|6:oo|7:r|8:r"),  # wrong beaker count
            (Domain.ALCHEMY, "1:r|2:o|3:r|4:g|5:y|6:oo"),
            (Domain.ALCHEMY, "1:rrrrr|2:_|3:_|4:_|5:_|6:_|7:_"),  # over capacity
            (Domain.ALCHEMY, "1:x|2:_|3:_|4:_|5:_|6:_|7:_"),  # unknown color
            (Domain.ALCHEMY, "2:r|1:_|3:_|4:_|5:_|6:_|7:_"),  # index order
            (Domain.ALCHEMY, "1:r|2:|3:_|4:_|5:_|6:_|7:_"),  # empty payload
            (Domain.SCENE, "1:_y|2:__|3:__|4:__|5:__|6:__|7:__|8:__|9:__|10:__"),  # hat on empty
            (Domain.SCENE, "1:r|2:__|3:__|4:__|5:__|6:__|7:__|8:__|9:__|10:__"),  # 1-char slot
            (Domain.SCENE, "1:__|2:__|3:__|4:__|5:__"),  # truncated
            (Domain.TANGRAMS, "1:_|2:A|3:_|4:_|5:_"),  # object after padding
            (Domain.TANGRAMS, "1:F|2:_|3:_|4:_|5:_"),  # unknown object
            (Domain.PROPARA, "ent:water|light loc:soil"),  # length mismatch
            (Domain.PROPARA, "ent:water loc :soil"),  # broken section key
            (Domain.PROPARA, "loc:soil ent:water"),
            (Domain.PROPARA, "ent:water|water loc:a|b"),  # duplicate names
            (Domain.PROPARA, "ent:- loc:a"),  # reserved token as name
            (Domain.RECIPES, "ent: loc:"),
        ],
    )
    def test_malformed_rejected(self, domain, text):
        with pytest.raises(ParseError):
            parse_state(domain, text)


class TestRoundTrip:
    @settings(max_examples=300)
    @given(alchemy_states)
    def test_alchemy(self, state):
        assert parse_state(Domain.ALCHEMY, render_state(state)) == state

    @settings(max_examples=300)
    @given(scene_states)
    def test_scene(self, state):
        assert parse_state(Domain.SCENE, render_state(state)) == state

    @settings(max_examples=300)
    @given(tangrams_states)
    def test_tangrams(self, state):
        assert parse_state(Domain.TANGRAMS, render_state(state)) == state

    @settings(max_examples=300)
    @given(entity_states())
    def test_entity(self, state):
        assert parse_state(Domain.PROPARA, render_state(state)) == state
        assert parse_state(Domain.RECIPES, render_state(state)) == state


CORRUPTION_ALPHABET = "rgopyb_|:ABCDEF0123456789 x"


def corruptions(text):
    for i in range(len(text)):
        for c in CORRUPTION_ALPHABET:
            if c != text[i]:
                yield text[:i] + c + text[i + 1 :]


class TestRejection:
    """Parsers accept exactly the canonical image: anything accepted re-renders identically."""

    @pytest.mark.parametrize("domain", [Domain.ALCHEMY, Domain.SCENE, Domain.TANGRAMS])
    def test_single_character_corruption(self, domain, seeded_states):
        for state in seeded_states(domain, n=25):
            text = render_state(state)
            for corrupted in corruptions(text):
                try:
                    recovered = parse_state(domain, corrupted)
                except ParseError:
                    continue
                assert render_state(recovered) == corrupted.strip()

    def test_injective_on_samples(self, seeded_states):
        for domain in ALL_DOMAINS:
            seen = {}
            for state in seeded_states(domain, n=500):
                text = render_state(state)
                assert seen.setdefault(text, state) == state
