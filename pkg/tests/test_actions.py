import pytest

from probact.actions import (
    ActionDescription,
    AmongSet,
    Branch,
    CondList,
    ConjDisj,
    Effect,
    Exact,
    MaybeUnchanged,
    Point,
    ProbList,
    Range,
    RelativeExact,
    RelativeRange,
    Single,
    Unconstrained,
    check_concrete,
    merge_duplicate_effects,
    pad_branches,
    validate_concrete,
)
from probact.errors import ValidationError
from probact.worldmodel import FALSE, TRUE, Fluent, Vocabulary, eq

V = Vocabulary([Fluent.symbolic("w", ["snow", "sun"]), Fluent.int_range("fuel", 0, 20), Fluent.boolean("m")])


def act(*branches, name="a"):
    return ActionDescription(name, tuple(branches))


def test_valid_concrete_action_passes(tomato):
    for a in tomato.actions:
        assert validate_concrete(a, tomato.vocab) == []


def test_probabilities_must_sum_to_one():
    a = act(Branch(TRUE, 0.6, Effect(), "x"), Branch(TRUE, 0.3, Effect.of(fuel=Exact(3)), "y"))
    msgs = validate_concrete(a, V)
    assert any("sum" in m for m in msgs)


def test_conditions_must_be_exclusive_and_exhaustive():
    overlap = act(Branch(TRUE, 1.0, Effect(), "x"), Branch(eq("w", "sun"), 1.0, Effect(), "y"))
    assert any("mutually exclusive" in m for m in validate_concrete(overlap, V))
    gap = act(Branch(eq("w", "sun"), 1.0, Effect(), "x"))
    assert any("exhaustive" in m for m in validate_concrete(gap, V))


def test_duplicate_effects_within_condition_rejected():
    a = act(Branch(TRUE, 0.5, Effect(), "x"), Branch(TRUE, 0.5, Effect(), "y"))
    with pytest.raises(ValidationError):
        check_concrete(a, V)
    merged = merge_duplicate_effects(a)
    assert len(merged.branches) == 1 and merged.branches[0].prob.p == 1.0


def test_concrete_effects_must_be_deterministic():
    a = act(Branch(TRUE, 1.0, Effect.of(fuel=RelativeRange(-2, -1)), "x"))
    assert any("exact" in m for m in validate_concrete(a, V))


def test_effect_domain_checks():
    with pytest.raises(ValidationError):
        Effect.of(w=Exact("rain")).validate(V)
    with pytest.raises(ValidationError):
        Effect.of(w=RelativeExact(1)).validate(V)
    Effect.of(fuel=MaybeUnchanged(AmongSet(frozenset({1, 2})))).validate(V)


def test_branch_annotation_pairings():
    with pytest.raises(ValidationError):
        Branch(CondList((TRUE,)), Point(0.5), Effect(), "x")
    with pytest.raises(ValidationError):
        Branch(CondList((TRUE, FALSE)), ProbList((0.5,)), Effect(), "x")
    with pytest.raises(ValidationError):
        Range(0.6, 0.5)
    with pytest.raises(ValidationError):
        Point(1.3)
    Branch(ConjDisj(FALSE, TRUE), Range(0.0, 0.4), Effect(), "x")


def test_concrete_action_rejects_abstract_annotations():
    with pytest.raises(ValidationError):
        ActionDescription("a", (Branch(Single(TRUE), Range(0.2, 0.4), Effect(), "x"),))
    with pytest.raises(ValidationError):
        ActionDescription("a", (Branch(TRUE, 1.0, Effect(), "x"), Branch(TRUE, 0.0, Effect(), "x")), method="inter2")


def test_constraint_resolution():
    f = V["fuel"]
    assert Exact(3).resolve(7, f) == {3}
    assert RelativeExact(-2).resolve(7, f) == {5}
    assert RelativeRange(-2, 0).resolve(7, f) == {5, 6, 7}
    assert MaybeUnchanged(Exact(3)).resolve(7, f) == {3, 7}
    assert Unconstrained().resolve(7, V["m"]) == {"T", "F"}


def test_padding_adds_false_zero_branches():
    a = act(Branch(TRUE, 1.0, Effect(), "x"))
    padded = pad_branches(a, 3)
    assert [b.label for b in padded.branches] == ["x", "pad0", "pad1"]
    assert all(b.condition.sentence == FALSE and b.prob.p == 0.0 for b in padded.branches[1:])
    assert validate_concrete(padded, V) == []
    with pytest.raises(ValidationError):
        pad_branches(padded, 1)
