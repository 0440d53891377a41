import random

import pytest

from probact.cli import bundled_domain_path
from probact.domain import format_action, load_domain, network_domain, parse_domain, serialize
from probact.errors import DomainSyntaxError, ValidationError
from probact.generators import engineered_network, random_uniform_network

GOOD = """\
fluent x 0..3
initial
  1.0 x=0
end
action go dur 1
  branch a when TRUE prob {p} effect x := 1
end
"""


def test_bundled_domain_loads(tomato):
    names = [a.name for a in tomato.actions]
    assert names == ["mountain-road", "valley-road", "drive-home"]
    assert tomato.root == "deliver"
    assert {e.name for e in tomato.abstractions} == {"drive", "mountain-road-ii"}


def test_round_trip_tomato(tomato):
    again = parse_domain(serialize(tomato))
    assert again == tomato
    assert serialize(again) == serialize(tomato)


@pytest.mark.parametrize("seed", range(4))
def test_round_trip_generated(seed):
    net, d0, u = random_uniform_network(2, 2, 1 + seed % 2, random.Random(seed))
    dom = network_domain(net, d0, u)
    assert parse_domain(serialize(dom)) == dom


def test_round_trip_engineered():
    dom = network_domain(*engineered_network(2, 1, 2))
    again = parse_domain(serialize(dom))
    assert again == dom and again.network().concrete_plan_count() == 4


def test_abstract_actions_written_out(tomato_net):
    text = "fluent weather {snow, sun, cloud}\nfluent muddy {T, F}\nfluent fuel 0..20\n" \
           "fluent time 0..10\nfluent spoiled 0..10\n" + format_action(tomato_net.descriptions["drive"])
    dom = parse_domain(text)
    assert dom.action("drive") == tomato_net.descriptions["drive"]


def test_empty_file_lacks_vocabulary():
    with pytest.raises(DomainSyntaxError, match="missing vocabulary"):
        parse_domain("")


def test_probability_out_of_range_reported():
    parse_domain(GOOD.format(p="1.0"))
    with pytest.raises(ValidationError, match=r"line 6.*1\.3"):
        parse_domain(GOOD.format(p="1.3"))


def test_syntax_error_position():
    with pytest.raises(DomainSyntaxError) as info:
        parse_domain(GOOD.format(p="1.0").replace("when TRUE", "when x = = 1"))
    assert info.value.line == 6 and info.value.column > 1


def test_branches_must_sum_to_one():
    with pytest.raises(ValidationError):
        parse_domain(GOOD.format(p="0.5"))


@pytest.mark.parametrize("text", [
    "fluent x 0..3\nbogus\n",
    "fluent x 0..3\naction go dur 1\n  branch a when TRUE prob 1 effect x := 1\n",
    "fluent x 0..3\nroot\n",
    "fluent x 0..3\naction go\nend\nfluent y 0..1\n",
])
def test_malformed_files(text):
    with pytest.raises((DomainSyntaxError, ValidationError)):
        parse_domain(text)


def test_load_domain_path():
    assert load_domain(bundled_domain_path()).root == "deliver"
