import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probact.errors import DegenerateEffectError, DomainSyntaxError, ValidationError
from probact.worldmodel import (
    FALSE,
    TRUE,
    Atom,
    Fluent,
    Interval,
    ProbInterval,
    Ref,
    StateDistribution,
    Vocabulary,
    entails,
    eq,
    equivalent,
    lower_prob,
    models,
    parse_sentence,
    prob_of,
    upper_prob,
)

MUD = Vocabulary([Fluent.boolean("muddy")])
FUEL = Vocabulary([Fluent.int_range("fuel", 0, 10)])


def test_vocabulary_rejects_duplicates_and_empty_domains():
    with pytest.raises(ValidationError):
        Vocabulary([Fluent.boolean("a"), Fluent.boolean("a")])
    with pytest.raises(ValidationError):
        Vocabulary([Fluent.symbolic("a", [])])
    with pytest.raises(ValidationError):
        Vocabulary([Fluent.int_range("a", 3, 1)])


def test_state_construction_checks_domain():
    with pytest.raises(ValidationError):
        FUEL.state(fuel=11)
    with pytest.raises(ValidationError):
        FUEL.state({})
    assert FUEL.state(fuel=4)["fuel"] == 4


def test_models_of_tautology_and_contradiction():
    assert len(models(TRUE, MUD)) == 2
    contradiction = parse_sentence("muddy = T and muddy = F", MUD)
    assert models(contradiction, MUD) == frozenset()


def test_models_of_threshold():
    got = sorted(s["fuel"] for s in models(parse_sentence("fuel >= 9", FUEL), FUEL))
    assert got == [9, 10]


def test_entailment_examples():
    assert entails(parse_sentence("fuel = 3", FUEL), parse_sentence("fuel >= 2", FUEL), FUEL)
    assert not entails(TRUE, FALSE, MUD)
    assert entails(parse_sentence("muddy = T or muddy = F", MUD), TRUE, MUD)
    assert equivalent(parse_sentence("not muddy = T", MUD), eq("muddy", "F"), MUD)


def test_validation_catches_type_errors():
    with pytest.raises(ValidationError):
        models(Atom(Ref("fuel"), "=", "T"), FUEL)
    with pytest.raises(ValidationError):
        models(Atom(Ref("muddy"), "<", "T"), MUD)
    with pytest.raises(ValidationError):
        models(eq("nope", 1), FUEL)


def test_lower_upper_examples():
    t, f = MUD.state(muddy="T"), MUD.state(muddy="F")
    phi = eq("muddy", "T")
    assert lower_prob(phi, {t}) == 1
    assert lower_prob(phi, {t, f}) == 0
    assert upper_prob(phi, {t, f}) == 1
    assert upper_prob(phi, {f}) == 0
    assert lower_prob(TRUE, {f}) == 1
    assert upper_prob(FALSE, {t}) == 0
    with pytest.raises(DegenerateEffectError):
        lower_prob(phi, set())
    with pytest.raises(DegenerateEffectError):
        upper_prob(phi, set())


def test_prob_of():
    d = StateDistribution.uniform([MUD.state(muddy="T"), MUD.state(muddy="F")])
    assert prob_of(TRUE, d) == 1.0
    assert prob_of(FALSE, d) == 0.0
    assert prob_of(eq("muddy", "T"), d) == 0.5


def test_distribution_invariants():
    s = MUD.state(muddy="T")
    with pytest.raises(ValidationError):
        StateDistribution(((s, 0.5),))
    with pytest.raises(ValidationError):
        StateDistribution(((s, 0.5), (s, 0.5)))
    StateDistribution(((s, 1.0 - 1e-12),))


def test_intervals():
    with pytest.raises(ValidationError):
        ProbInterval(0.2, 1.5)
    with pytest.raises(ValidationError):
        Interval(2.0, 1.0)
    assert ProbInterval.clipped(-0.1, 1.2) == ProbInterval(0.0, 1.0)
    assert Interval(0, 1).contains(Interval(0.2, 0.3))


def test_sentence_parsing_round_trip():
    v = Vocabulary([Fluent.int_range("fuel", 0, 20), Fluent.symbolic("w", ["snow", "sun"])])
    for text in ["fuel@start = fuel - 8", "not (w = snow or fuel < 3)", "w in {snow, sun} and fuel != 2"]:
        s = parse_sentence(text, v)
        assert parse_sentence(str(s), v) == s
    with pytest.raises(DomainSyntaxError):
        parse_sentence("fuel = = 3", v)
    with pytest.raises(DomainSyntaxError):
        parse_sentence("w = rain", v)


def test_pre_post_reference():
    s = parse_sentence("fuel@end = fuel@start - 8", FUEL)
    assert s.holds(FUEL.state(fuel=2), FUEL.state(fuel=10))
    assert not s.holds(FUEL.state(fuel=3), FUEL.state(fuel=10))


# --- properties over small vocabularies ----------------------------------

VOCAB = Vocabulary([Fluent.boolean("a"), Fluent.symbolic("b", ["u", "v", "w"]), Fluent.int_range("c", 0, 1)])
STATES = list(VOCAB.states())
ATOMS = [eq("a", "T"), eq("b", "u"), eq("b", "w"), parse_sentence("c >= 1", VOCAB), TRUE, FALSE]


def sentences():
    leaf = st.sampled_from(ATOMS)
    return st.recursive(leaf, lambda inner: st.one_of(
        inner.map(lambda s: ~s), st.tuples(inner, inner).map(lambda t: t[0] & t[1]),
        st.tuples(inner, inner).map(lambda t: t[0] | t[1])), max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(phi=sentences(), subset=st.sets(st.sampled_from(STATES), min_size=1))
def test_lower_never_exceeds_upper(phi, subset):
    assert lower_prob(phi, subset) <= upper_prob(phi, subset)


@settings(max_examples=150, deadline=None)
@given(phi=sentences(), subset=st.sets(st.sampled_from(STATES), min_size=1), data=st.data())
def test_bounds_contain_any_distribution_on_the_set(phi, subset, data):
    sub = data.draw(st.sets(st.sampled_from(sorted(subset)), min_size=1))
    weights = data.draw(st.lists(st.integers(1, 5), min_size=len(sub), max_size=len(sub)))
    d = StateDistribution.from_pairs((s, w / sum(weights)) for s, w in zip(sorted(sub), weights))
    p = prob_of(phi, d)
    assert lower_prob(phi, subset) - 1e-12 <= p <= upper_prob(phi, subset) + 1e-12


@settings(max_examples=100, deadline=None)
@given(a=sentences(), b=sentences())
def test_entails_matches_lower_probability(a, b):
    ms = models(a, VOCAB)
    if ms:
        assert entails(a, b, VOCAB) == (lower_prob(b, ms) == 1)


@settings(max_examples=100, deadline=None)
@given(a=sentences(), b=sentences())
def test_prob_of_additive_on_disjoint(a, b):
    d = StateDistribution.uniform(STATES)
    if not (models(a, VOCAB) & models(b, VOCAB)):
        assert abs(prob_of(a | b, d) - prob_of(a, d) - prob_of(b, d)) < 1e-12


def test_entails_agrees_with_full_enumeration():
    for a, b in itertools.product(ATOMS, repeat=2):
        brute = all(b.holds(s) for s in STATES if a.holds(s))
        assert entails(a, b, VOCAB) == brute
