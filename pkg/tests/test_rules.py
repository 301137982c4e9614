"""Rule engine: sustain/cooldown automaton, rendering, ruleset loading."""

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from farmchat.errors import (
    InvariantViolation,
    ParseError,
    TemplateError,
    UnknownField,
    ValidationError,
)
from farmchat.protocol import MenuAction
from farmchat.rules import (
    Comparator,
    Process,
    Rule,
    RuleState,
    SensorSnapshot,
    evaluate,
    load_ruleset,
    render_message,
)


def snap(soil=30.0, temp=25.0, hum=60.0, light=10000.0, ts=0):
    return SensorSnapshot(
        ts=ts, air_temp=temp, rel_humidity=hum, soil_moisture=soil, light=light
    )


def soil_rule(sustain=3, cooldown=0, threshold=20.0, rule_id="soil-dry"):
    return Rule(
        id=rule_id,
        process=Process.IRRIGATION,
        field="soil_moisture",
        cmp=Comparator.LT,
        threshold=threshold,
        sustain_ticks=sustain,
        cooldown_ticks=cooldown,
        message="Soil moisture {value} below {threshold}",
        advised_action=MenuAction.DRIP_ON,
    )


class TestEvaluate:
    def test_fires_after_sustain_ticks(self):
        rule = soil_rule(sustain=3)
        state = {}
        for i, soil in enumerate([18.0, 17.0, 16.0]):
            recs, state = evaluate(snap(soil=soil, ts=i), [rule], state)
            if i < 2:
                assert recs == []
                assert state["soil-dry"].streak == i + 1
            else:
                assert len(recs) == 1
                assert recs[0].rule_id == "soil-dry"
                assert recs[0].advised_action is MenuAction.DRIP_ON
                assert state["soil-dry"].streak == 0

    def test_nominal_snapshot_fires_nothing(self, ruleset):
        recs, state = evaluate(snap(), ruleset, {})
        assert recs == []
        assert all(st.streak == 0 for st in state.values())

    def test_predicate_breaks_streak(self):
        rule = soil_rule(sustain=3)
        state = {}
        _, state = evaluate(snap(soil=18.0), [rule], state)
        _, state = evaluate(snap(soil=25.0), [rule], state)
        assert state["soil-dry"].streak == 0
        _, state = evaluate(snap(soil=18.0), [rule], state)
        _, state = evaluate(snap(soil=18.0), [rule], state)
        recs, state = evaluate(snap(soil=18.0), [rule], state)
        assert len(recs) == 1

    def test_cooldown_suppresses_and_decrements(self):
        rule = soil_rule(sustain=1, cooldown=2)
        state = {}
        recs, state = evaluate(snap(soil=10.0), [rule], state)
        assert len(recs) == 1
        assert state["soil-dry"].cooldown == 2
        recs, state = evaluate(snap(soil=10.0), [rule], state)
        assert recs == [] and state["soil-dry"].cooldown == 1
        recs, state = evaluate(snap(soil=10.0), [rule], state)
        assert recs == [] and state["soil-dry"].cooldown == 0
        recs, state = evaluate(snap(soil=10.0), [rule], state)
        assert len(recs) == 1  # refire after the window

    def test_unknown_field_raises(self):
        rule = Rule(
            id="ph-rule",
            process=Process.FERTILIZATION,
            field="ph",
            cmp=Comparator.LT,
            threshold=6.0,
            sustain_ticks=1,
            cooldown_ticks=0,
            message="x {value}",
        )
        with pytest.raises(UnknownField):
            evaluate(snap(), [rule], {})

    def test_output_ordered_by_rule_id(self):
        rules = [soil_rule(sustain=1, rule_id="z-rule"), soil_rule(sustain=1, rule_id="a-rule")]
        recs, _ = evaluate(snap(soil=10.0), rules, {})
        assert [r.rule_id for r in recs] == ["a-rule", "z-rule"]

    def test_input_state_not_mutated(self):
        rule = soil_rule(sustain=1)
        state = {"soil-dry": RuleState(streak=0, cooldown=0)}
        before = dict(state)
        evaluate(snap(soil=10.0), [rule], state)
        assert state == before

    def test_deterministic(self, ruleset):
        s = snap(soil=15.0, temp=33.0, light=65000.0)
        assert evaluate(s, ruleset, {}) == evaluate(s, ruleset, {})

    @settings(max_examples=40)
    @given(
        st.lists(st.floats(min_value=0, max_value=40, allow_nan=False), min_size=5, max_size=60),
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=0, max_value=6),
    )
    def test_no_duplicate_within_cooldown_window(self, readings, sustain, cooldown):
        rule = soil_rule(sustain=sustain, cooldown=cooldown)
        state = {}
        fire_ticks = []
        for i, soil in enumerate(readings):
            recs, state = evaluate(snap(soil=soil, ts=i), [rule], state)
            if recs:
                fire_ticks.append(i)
        # at most one firing in any c+1 consecutive evaluations
        for a, b in zip(fire_ticks, fire_ticks[1:]):
            assert b - a >= cooldown + 1

    @settings(max_examples=40)
    @given(
        st.lists(st.floats(min_value=0, max_value=40, allow_nan=False), min_size=5, max_size=60),
        st.integers(min_value=1, max_value=5),
    )
    def test_never_fires_before_sustain(self, readings, sustain):
        rule = soil_rule(sustain=sustain, cooldown=0)
        state = {}
        consecutive = 0
        for i, soil in enumerate(readings):
            recs, state = evaluate(snap(soil=soil, ts=i), [rule], state)
            consecutive = consecutive + 1 if soil < rule.threshold else 0
            if recs:
                assert consecutive >= sustain


class TestRenderMessage:
    def test_substitution_one_decimal(self):
        rule = soil_rule()
        out = render_message(rule, snap(soil=16.04))
        assert out == "Soil moisture 16.0 below 20.0"

    def test_unknown_placeholder(self):
        rule = Rule(
            id="r",
            process=Process.IRRIGATION,
            field="soil_moisture",
            cmp=Comparator.LT,
            threshold=20.0,
            sustain_ticks=1,
            cooldown_ticks=0,
            message="oops {bogus}",
        )
        with pytest.raises(TemplateError):
            render_message(rule, snap())

    def test_recommendation_message_fully_substituted(self, ruleset):
        recs, _ = evaluate(
            snap(soil=5.0, temp=35.0, hum=95.0, light=90000.0),
            [r for r in ruleset if r.sustain_ticks == 1],
            {},
        )
        for rec in recs:
            assert "{" not in rec.message


class TestSnapshotInvariants:
    def test_rejects_out_of_range(self):
        with pytest.raises(InvariantViolation):
            snap(hum=140.0)
        with pytest.raises(InvariantViolation):
            snap(soil=-2.0)
        with pytest.raises(InvariantViolation):
            snap(light=-1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(InvariantViolation):
            snap(temp=float("nan"))


class TestLoadRuleset:
    def test_default_ruleset_covers_all_processes(self, ruleset):
        assert len(ruleset) >= 5
        assert {r.process for r in ruleset} == set(Process)

    def test_default_ruleset_irrigation_actions(self, ruleset):
        actions = {r.advised_action for r in ruleset if r.advised_action}
        assert MenuAction.DRIP_ON in actions
        assert MenuAction.DRIP_OFF in actions

    def test_unknown_field_rejected(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "id": "ph-low",
                        "process": "FERTILIZATION",
                        "field": "ph",
                        "cmp": "lt",
                        "threshold": 6,
                        "sustain_ticks": 1,
                        "cooldown_ticks": 0,
                        "message": "ph {value}",
                        "advised_action": None,
                    }
                ]
            ),
            encoding="utf-8",
        )
        with pytest.raises(ValidationError) as exc_info:
            load_ruleset(path)
        assert exc_info.value.rule_id == "ph-low"

    def test_empty_file_warns_and_returns_nothing(self, tmp_path, caplog):
        path = tmp_path / "rules.json"
        path.write_text("", encoding="utf-8")
        with caplog.at_level("WARNING"):
            assert load_ruleset(path) == []
        assert any("empty" in r.message for r in caplog.records)

    def test_syntax_error_carries_line(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text('[\n{"id": }\n]', encoding="utf-8")
        with pytest.raises(ParseError) as exc_info:
            load_ruleset(path)
        assert exc_info.value.index == 2

    def test_missing_key_is_parse_error_with_record_index(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text(json.dumps([{"id": "x", "process": "IRRIGATION"}]), encoding="utf-8")
        with pytest.raises(ParseError) as exc_info:
            load_ruleset(path)
        assert exc_info.value.index == 0

    def test_duplicate_id_rejected(self, tmp_path):
        record = {
            "id": "dup",
            "process": "IRRIGATION",
            "field": "soil_moisture",
            "cmp": "lt",
            "threshold": 20,
            "sustain_ticks": 1,
            "cooldown_ticks": 0,
            "message": "m {value}",
            "advised_action": None,
        }
        path = tmp_path / "rules.json"
        path.write_text(json.dumps([record, record]), encoding="utf-8")
        with pytest.raises(ValidationError):
            load_ruleset(path)

    def test_bad_sustain_rejected(self, tmp_path):
        record = {
            "id": "bad",
            "process": "IRRIGATION",
            "field": "soil_moisture",
            "cmp": "lt",
            "threshold": 20,
            "sustain_ticks": 0,
            "cooldown_ticks": 0,
            "message": "m",
            "advised_action": None,
        }
        path = tmp_path / "rules.json"
        path.write_text(json.dumps([record]), encoding="utf-8")
        with pytest.raises(ValidationError):
            load_ruleset(path)


def test_random_stream_parity_with_reference_automaton(ruleset):
    """Drive the full default ruleset with a seeded random stream and check
    each firing against an independently tracked streak/cooldown model."""
    rng = random.Random(1234)
    state = {}
    reference = {r.id: {"streak": 0, "cooldown": 0} for r in ruleset}
    for ts in range(400):
        s = snap(
            soil=rng.uniform(0, 60),
            temp=rng.uniform(15, 40),
            hum=rng.uniform(20, 100),
            light=rng.uniform(0, 90000),
            ts=ts,
        )
        recs, state = evaluate(s, ruleset, state)
        fired_ids = {r.rule_id for r in recs}
        for rule in ruleset:
            ref = reference[rule.id]
            value = s.value(rule.field)
            pred = value < rule.threshold if rule.cmp is Comparator.LT else value > rule.threshold
            ref["streak"] = ref["streak"] + 1 if pred else 0
            should_fire = False
            if ref["cooldown"] > 0:
                ref["cooldown"] -= 1
            elif pred and ref["streak"] >= rule.sustain_ticks:
                should_fire = True
                ref["cooldown"] = rule.cooldown_ticks
                ref["streak"] = 0
            assert (rule.id in fired_ids) == should_fire, f"{rule.id} at ts={ts}"
