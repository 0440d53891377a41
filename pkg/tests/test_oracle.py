import random

import pytest

from probact import oracle
from probact.abstraction import GroupingPlan, abstract
from probact.actions import ActionDescription, Branch, Effect, Exact, Point, Single
from probact.errors import BoundError
from probact.generators import random_uniform_network
from probact.planner import Network, UtilityFunction, UtilityTerm
from probact.worldmodel import FALSE, TRUE, Fluent, StateDistribution, Vocabulary, eq, models


@pytest.fixture
def tiny():
    v = Vocabulary([Fluent.int_range("x", 0, 2), Fluent.boolean("b")])
    d0 = StateDistribution.from_pairs([(s, 1 / 6) for s in v.states()])
    a1 = ActionDescription("a1", (
        Branch(Single(eq("b", "T")), Point(0.6), Effect.of(x=Exact(1)), "a"),
        Branch(Single(eq("b", "T")), Point(0.4), Effect.of(x=Exact(2)), "b"),
        Branch(Single(eq("b", "F")), Point(1.0), Effect.of(x=Exact(0)), "c"),
    ))
    a2 = ActionDescription("a2", (
        Branch(Single(eq("x", 0)), Point(0.6), Effect.of(x=Exact(2)), "d"),
        Branch(Single(eq("x", 0)), Point(0.4), Effect.of(x=Exact(1)), "e"),
        Branch(Single(~eq("x", 0)), Point(1.0), Effect.of(x=Exact(0)), "f"),
    ))
    return v, d0, a1, a2


def test_all_sentences_enumerates_every_subset():
    v = Vocabulary([Fluent.boolean("p"), Fluent.boolean("q")])
    sents = oracle.all_sentences(v)
    assert len(sents) == 16
    assert sents[0] == FALSE
    assert len({models(s, v) for s in sents}) == 16
    assert len(oracle.all_sentences(Vocabulary([Fluent.boolean("p")]))) == 4


def test_all_sentences_bound():
    with pytest.raises(BoundError):
        oracle.all_sentences(Vocabulary([Fluent.int_range("x", 0, 12)]))


def test_sound_abstractions_pass(tiny):
    v, d0, a1, a2 = tiny
    for method, src, g in [("intra1", a1, "a,b;c"), ("intra2", a1, "a,b;c"),
                           ("inter1", [a1, a2], "a,d;b,e;c,f"), ("inter2", [a1, a2], "a,d;b,e;c,f")]:
        inst = (src,) if method.startswith("intra") else tuple(src)
        grouping = GroupingPlan.parse(g) if method.startswith("intra") else GroupingPlan.parse(g, src)
        case = oracle.VerificationCase(v, inst, grouping, method, d0, seed=method)
        report = oracle.check_abstraction(case)
        assert report.sound, report.failures


@pytest.mark.parametrize("kind,method", [
    ("narrow_probability", "intra2"),
    ("narrow_probability", "inter2"),
    ("strengthen_effect", "intra2"),
    ("strengthen_effect", "inter2"),
    ("drop_disjunct", "inter2"),
    ("drop_disjunct", "inter1"),
    ("drop_disjunct", "intra1"),
])
def test_mutations_are_caught(tiny, kind, method):
    v, d0, a1, a2 = tiny
    if method.startswith("intra"):
        inst, built = (a1,), abstract(method, a1, GroupingPlan.parse("a,b;c"))
    else:
        inst, built = (a1, a2), abstract(method, [a1, a2], GroupingPlan.parse("a,d;b,e;c,f", [a1, a2]))
    bad = oracle.mutate(built, kind, 0)
    assert bad != built
    case = oracle.VerificationCase(v, inst, GroupingPlan.parse("a"), method, d0, abstract=bad)
    assert not oracle.check_abstraction(case).sound


def test_mutation_detection_on_random_cases():
    rng = random.Random(2)
    caught = dict.fromkeys(oracle.MUTATIONS, 0)
    for i in range(120):
        case = oracle.random_case(oracle.METHODS[i % 4], rng)
        built = case.build()
        for kind in oracle.MUTATIONS:
            bad = oracle.mutate(built, kind, 0)
            if bad != built and not oracle.check_abstract_action(bad, case.instances, case.d0, case.vocab).sound:
                caught[kind] += 1
    assert all(c > 10 for c in caught.values()), caught


def test_identity_grouping_is_exact():
    rng = random.Random(4)
    for _ in range(20):
        case = oracle.random_case("intra2", rng)
        a = case.instances[0]
        built = abstract("intra2", a, GroupingPlan.singletons(a))
        space = oracle._Space(case.vocab)
        lo, hi = oracle.abstract_vectors(space, built, case.d0)
        conc = oracle.concrete_vector(space, a, case.d0)
        assert abs(lo - conc).max() < 1e-12 and abs(hi - conc).max() < 1e-12


def test_run_suite_small():
    report = oracle.run_suite(cases=25, seed=9)
    assert report.sound and report.cases_run == 100
    assert report.per_method == dict.fromkeys(oracle.METHODS, 25)
    d = report.as_dict()
    assert d["verdict"] == "sound" and d["failures"] == []


def test_method_ordering_small():
    rng = random.Random(6)
    assert sum(oracle.method_ordering_violations(oracle.random_case("intra1", rng)) for _ in range(40)) == 0
    assert sum(oracle.method_ordering_violations(oracle.random_case("inter1", rng)) for _ in range(40)) == 0


def test_check_planner_tomato(tomato, tomato_net):
    report = oracle.check_planner(tomato_net, tomato.initial, tomato.utility)
    assert report.sound, report.failures
    best, winners, values = oracle.exhaustive_optimum(tomato_net, tomato.initial, tomato.utility)
    assert winners == [("mountain-road", "drive-home")]
    assert best == pytest.approx(1.9, abs=1e-9)
    assert values[("valley-road", "drive-home")] == pytest.approx(-2.4, abs=1e-9)


def test_check_planner_uniform_and_single():
    net, d0, u = random_uniform_network(2, 2, 2, random.Random(1))
    assert oracle.check_planner(net, d0, u).sound
    v = Vocabulary([Fluent.boolean("m")])
    only = ActionDescription("go", (Branch(Single(TRUE), Point(1.0), Effect.of(m=Exact("T")), "x"),))
    net = Network(v, [only], decompositions={"root": ("go",)}, root="root")
    u = UtilityFunction((UtilityTerm("m", 1.0, table=(("T", 1.0), ("F", 0.0))),))
    d0 = StateDistribution.point(v.state({"m": "F"}))
    assert oracle.check_planner(net, d0, u).sound


def test_exhaustive_bound(tomato, tomato_net):
    with pytest.raises(BoundError):
        oracle.exhaustive_optimum(tomato_net, tomato.initial, tomato.utility, bound=1)
