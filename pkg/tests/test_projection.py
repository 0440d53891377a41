import math
import random

import pytest

from probact import oracle
from probact.abstraction import GroupingPlan, inter_abstract_I, intra_abstract_II
from probact.chronicle import enumerate_chronicles
from probact.errors import ValidationError
from probact.projection import (
    compile_action,
    project,
    project_abstract_inter_I,
    project_concrete,
)
from probact.worldmodel import TRUE, parse_sentence


def q(dom, text):
    return parse_sentence(text, dom.vocab)


def test_fuel_example(tomato, tomato_net):
    res = project(tomato_net.descriptions["drive-home"], tomato.initial, q(tomato, "fuel@end = fuel@start - 8"))
    assert abs(res.value - 0.7) < 1e-9
    assert res.breakdown[0][0] == "home8"


def test_tautology_projects_to_one(tomato, tomato_net):
    for name in ("drive-home", "mountain-road", "valley-road"):
        assert project(tomato_net.descriptions[name], tomato.initial, TRUE).value == pytest.approx(1.0, abs=1e-12)


# hand-derived: P(snow)=0.2, P(sun)=0.5, P(cloud)=0.3
@pytest.mark.parametrize("name,lo,hi", [
    ("mountain-road", 0.2 * 0.1 + 0.8 * 0.3, 0.2 * 0.1 + 0.8 * 0.3),
    ("valley-road", 0.0, 0.0),
    ("mountain-road-ii", 0.1, 0.3),
    ("drive", 0.0, 0.2 * 0.1 + 0.8 * 0.5),
])
def test_muddy_projection_values(tomato, tomato_net, name, lo, hi):
    res = project(tomato_net.descriptions[name], tomato.initial, q(tomato, "muddy = T"))
    assert res.interval.lo == pytest.approx(lo, abs=1e-9)
    assert res.interval.hi == pytest.approx(hi, abs=1e-9)


def test_concrete_projection_matches_chronicle_sum(tomato, tomato_net):
    for name in ("mountain-road", "valley-road", "drive-home"):
        a = tomato_net.descriptions[name]
        for text in ("fuel <= 14", "time = 3 and muddy = F", "spoiled > 0 or fuel@end = fuel@start - 5"):
            phi = q(tomato, text)
            brute = math.fsum(c.probability.lo for c in enumerate_chronicles([a], tomato.initial)
                              if phi.holds(c.final, c.states[0].state))
            assert project_concrete(a, tomato.initial, phi).value == pytest.approx(brute, abs=1e-12)


def test_concrete_projection_validates_action(tomato, tomato_net):
    with pytest.raises(ValidationError):
        project_concrete(tomato_net.descriptions["drive"], tomato.initial, TRUE)


def test_inter_I_requires_equal_list_lengths(tomato, tomato_net):
    a = tomato_net.descriptions["drive"]
    broken = a.with_branches(a.branches[:1] + (
        a.branches[1].__class__(type(a.branches[1].condition)(a.branches[1].condition.sentences[:1]),
                                type(a.branches[1].prob)(a.branches[1].prob.ps[:1]),
                                a.branches[1].effect, "b"),) + a.branches[2:])
    with pytest.raises(ValidationError):
        project_abstract_inter_I(broken, tomato.initial, TRUE)


def test_identity_groupings_give_degenerate_intervals(tomato, tomato_net):
    mr = tomato_net.descriptions["mountain-road"]
    same = intra_abstract_II(mr, GroupingPlan.singletons(mr))
    solo = inter_abstract_I([mr])
    for text in ("muddy = T", "fuel = 14", "time >= 3"):
        phi = q(tomato, text)
        exact = project_concrete(mr, tomato.initial, phi).value
        for a in (same, solo):
            res = project(a, tomato.initial, phi)
            assert res.interval.degenerate and res.interval.lo == pytest.approx(exact, abs=1e-12)


def test_vectorised_oracle_matches_per_sentence_projection():
    rng = random.Random(7)
    for method in oracle.METHODS:
        for _ in range(3):
            case = oracle.random_case(method, rng)
            while case.vocab.state_count > 6:
                case = oracle.random_case(method, rng)
            space = oracle._Space(case.vocab)
            abs_action = case.build()
            lo, hi = oracle.abstract_vectors(space, abs_action, case.d0)
            conc = oracle.concrete_vector(space, case.instances[0], case.d0)
            for m, phi in enumerate(oracle.all_sentences(case.vocab)):
                res = project(abs_action, case.d0, phi)
                assert res.interval.lo == pytest.approx(lo[m], abs=1e-12)
                assert res.interval.hi == pytest.approx(hi[m], abs=1e-12)
                assert project_concrete(case.instances[0], case.d0, phi).value == pytest.approx(conc[m], abs=1e-12)


def test_compile_action_rejects_mismatched_rule(tomato, tomato_net):
    with pytest.raises(ValidationError):
        compile_action(tomato_net.descriptions["drive"], tomato.initial, "intra2")
