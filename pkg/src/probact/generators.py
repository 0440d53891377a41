"""Synthetic abstraction/decomposition networks.

A uniform network with parameters (n, p, k) has ``k`` abstraction levels.
The root task decomposes into ``p`` abstract actions; every abstract action
has ``n`` instances; above the last level each instance is a task that
decomposes into ``p`` abstract actions of the next level, and at the last
level the instances are concrete.  That gives n^(p + p^2 + ... + p^k)
concrete plans.
"""

from __future__ import annotations

import math
import random

from .actions import ActionDescription, Branch, Effect, Exact, Point, RelativeExact, Single
from .planner import AbstractionEdge, Network, UtilityFunction, UtilityTerm
from .worldmodel import TRUE, Fluent, StateDistribution, Vocabulary, eq


def slot_count(p, k):
    return sum(p ** i for i in range(1, k + 1))


def _build(n, p, k, leaf, method="inter2"):
    """Shared skeleton.

    ``leaf(name, chain)`` builds the concrete action for a last-level
    instance; ``chain`` lists the ``(instance index, slot number)`` choices
    whose first-sub-slot descent ends at this leaf (its own choice last).
    Slots are numbered in the order left-to-right refinement reaches them.
    """
    abstractions, decompositions, actions = [], {}, []

    def slot(path, level, t, chain):
        name = "A" + path
        instances = []
        for j in range(n):
            inst = f"{name}.{j}"
            instances.append(inst)
            here = chain + [(j, t)]
            if level == k:
                actions.append(leaf(inst, here))
                continue
            subs, offset = [], t + 1
            for q in range(p):
                subs.append(slot(f"{path}.{j}{q}", level + 1, offset, here if q == 0 else []))
                offset += 1 + slot_count(p, k - level - 1)
            decompositions[inst] = tuple(subs)
        abstractions.append(AbstractionEdge(name, method, tuple(instances)))
        return name

    top, offset = [], 0
    for q in range(p):
        top.append(slot(f"{q}", 1, offset, []))
        offset += 1 + slot_count(p, k - 1)
    decompositions["root"] = tuple(top)
    return actions, abstractions, decompositions


def engineered_network(n, p, k):
    """Uniform network in which exactly one instance survives every refinement.

    A single integer fluent ``score`` is the utility.  Choosing instance j at
    slot t adds j * n^(S-1-t); each weight exceeds the total spread of all
    later slots, so the best child of a refinement dominates its siblings.
    """
    S = slot_count(p, k)
    actions, abstractions, decompositions = _build(
        n, p, k, lambda name, chain: _score_leaf(name, sum(j * n ** (S - 1 - t) for j, t in chain)))
    vocab = Vocabulary([Fluent.int_range("score", 0, n ** S - 1)])
    net = Network(vocab, actions, abstractions, decompositions, "root", params=(n, p, k))
    d0 = StateDistribution.point(vocab.state({"score": 0}))
    u = UtilityFunction((UtilityTerm("score", 1.0),))
    return net, d0, u


def _score_leaf(name, gain):
    effect = Effect.of({"score": RelativeExact(gain)}) if gain else Effect()
    return ActionDescription(name, (Branch(Single(TRUE), Point(1.0), effect, "only"),))


def random_uniform_network(n, p, k, rng: random.Random, method="inter2"):
    """Uniform network with random multi-branch concrete leaves and a random additive utility."""
    length = p ** k
    gmax = 3 * length
    vocab = Vocabulary([
        Fluent.symbolic("w", ("x", "y")),
        Fluent.int_range("g", 0, gmax),
        Fluent.boolean("m"),
    ])

    def leaf(name, chain):
        branches = []
        conds = [TRUE] if rng.random() < 0.5 else [eq("w", "x"), eq("w", "y")]
        for ci, cond in enumerate(conds):
            count = rng.randint(1, 2)
            weights = [rng.randint(1, 9) for _ in range(count)]
            total = sum(weights)
            effects = []
            while len(effects) < count:
                items = {"g": RelativeExact(rng.randint(0, 3))}
                r = rng.random()
                if r < 0.3:
                    items["m"] = Exact(rng.choice(("T", "F")))
                elif r < 0.5:
                    items["w"] = Exact(rng.choice(("x", "y")))
                e = Effect.of(items)
                if e not in effects:
                    effects.append(e)
            probs = [w / total for w in weights]
            probs[-1] = 1.0 - math.fsum(probs[:-1])
            for bi, (e, pr) in enumerate(zip(effects, probs)):
                branches.append(Branch(Single(cond), Point(pr), e, f"b{ci}{bi}"))
        return ActionDescription(name, tuple(branches))

    actions, abstractions, decompositions = _build(n, p, k, leaf, method)
    net = Network(vocab, actions, abstractions, decompositions, "root", params=(n, p, k))
    px = rng.randint(1, 9) / 10
    d0 = StateDistribution.from_pairs([
        (vocab.state({"w": "x", "g": 0, "m": "F"}), px),
        (vocab.state({"w": "y", "g": 0, "m": "F"}), 1 - px),
    ])
    u = UtilityFunction((
        UtilityTerm("g", round(rng.uniform(0.5, 2.0), 3)),
        UtilityTerm("m", 1.0, table=(("T", -round(rng.uniform(0, 3), 3)), ("F", 0.0))),
    ))
    return net, d0, u


def random_parameters(rng: random.Random, max_plans=1000):
    """(n, p, k) with between 2 and ``max_plans`` concrete plans."""
    while True:
        n, p, k = rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3)
        total = n ** slot_count(p, k)
        if 2 <= total <= max_plans:
            return n, p, k


def random_network(rng: random.Random, max_plans=1000):
    n, p, k = random_parameters(rng, max_plans)
    return random_uniform_network(n, p, k, rng)
