"""Projection of concrete and abstract actions.

``P(phi | a)`` for a concrete action sums, over branches and over the
prestates that satisfy the branch condition, the prestate weight times the
branch probability times whether ``phi`` holds of the resulting transition.

For abstract branches the effect may allow several successors, so the
per-prestate indicator is replaced by the 0/1 lower and upper
probabilities over the reachable transitions, and the branch weight by the
bound that the branch annotation supports:

=========  ==================================  ==================================
rule       lower weight                        upper weight
=========  ==================================  ==================================
intra I    sum over distinct conditions        same
intra II   range.lo over the disjunction       range.hi over the disjunction
inter I    min over instances                  max over instances
inter II   range.lo over the conjunction       range.hi over the disjunction
=========  ==================================  ==================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .actions import ActionDescription, CondList, ConjDisj, Point, ProbList, Range, Single, check_concrete
from .chronicle import apply_effect
from .errors import ValidationError
from .worldmodel import ProbInterval, Sentence, StateDistribution, lower_prob, upper_prob


@dataclass(frozen=True)
class Part:
    """``coef * sum(mass * P(phi | transitions))`` for one condition."""

    coef: float
    outcomes: tuple  # ((prestate mass, frozenset of (pre, post) pairs), ...)


@dataclass(frozen=True)
class BranchTerms:
    label: str
    combine: str  # "sum" adds parts; "extreme" takes min (lower) / max (upper)
    lo_parts: tuple
    hi_parts: tuple

    def lower(self, phi):
        vals = [p.coef * math.fsum(m * lower_prob(phi, pairs) for m, pairs in p.outcomes) for p in self.lo_parts]
        return math.fsum(vals) if self.combine == "sum" else min(vals)

    def upper(self, phi):
        vals = [p.coef * math.fsum(m * upper_prob(phi, pairs) for m, pairs in p.outcomes) for p in self.hi_parts]
        return math.fsum(vals) if self.combine == "sum" else max(vals)


@dataclass(frozen=True)
class ProjectionResult:
    query: Sentence
    interval: ProbInterval
    breakdown: tuple  # ((label, lo, hi), ...)

    @property
    def value(self):
        if not self.interval.degenerate:
            raise ValidationError("projection is an interval, not a point value")
        return self.interval.lo


class _Outcomes:
    """Caches the transitions each (prestate, effect) pair produces."""

    def __init__(self, d0: StateDistribution, clip=False):
        self.support = d0.support()
        self.clip = clip
        self._cache = {}

    def of(self, condition: Sentence, effect):
        out = []
        for pre, mass in self.support:
            if not condition.holds(pre):
                continue
            key = (pre, effect)
            pairs = self._cache.get(key)
            if pairs is None:
                pairs = frozenset((pre, post) for post in apply_effect(pre, effect, self.clip))
                self._cache[key] = pairs
            if pairs:  # empty only for clipped abstract effects: no member can fire here
                out.append((mass, pairs))
        return tuple(out)


def compile_action(a: ActionDescription, d0: StateDistribution, rule: str | None = None):
    """Per-branch projection terms of ``a`` under ``rule`` (defaults to ``a.method``)."""
    rule = a.method if rule is None else rule
    outs = _Outcomes(d0, clip=not a.concrete)
    terms = []
    for b in a.branches:
        cond, prob = b.condition, b.prob
        if rule is None:
            if not b.concrete:
                raise ValidationError(f"branch {b.label!r} is not concrete")
            part = (Part(prob.p, outs.of(cond.sentence, b.effect)),)
            terms.append(BranchTerms(b.label, "sum", part, part))
        elif rule == "intra1":
            if isinstance(cond, Single) and isinstance(prob, Point):
                pairs = [(cond.sentence, prob.p)]
            elif isinstance(cond, CondList):
                pairs = list(zip(cond.sentences, prob.ps))
            else:
                raise ValidationError(f"branch {b.label!r}: intra-action Method I needs list or point annotations")
            summed = {}
            for c, p in pairs:
                summed[c] = summed.get(c, 0.0) + p
            parts = tuple(Part(p, outs.of(c, b.effect)) for c, p in summed.items())
            terms.append(BranchTerms(b.label, "sum", parts, parts))
        elif rule == "intra2":
            if not isinstance(cond, Single) or not isinstance(prob, (Range, Point)):
                raise ValidationError(f"branch {b.label!r}: intra-action Method II needs a single condition and a range")
            o = outs.of(cond.sentence, b.effect)
            terms.append(BranchTerms(b.label, "sum", (Part(prob.lo, o),), (Part(prob.hi, o),)))
        elif rule == "inter1":
            if isinstance(cond, Single) and isinstance(prob, Point):
                pairs = [(cond.sentence, prob.p)]
            elif isinstance(cond, CondList):
                pairs = list(zip(cond.sentences, prob.ps))
            else:
                raise ValidationError(f"branch {b.label!r}: inter-action Method I needs list annotations")
            parts = tuple(Part(p, outs.of(c, b.effect)) for c, p in pairs)
            terms.append(BranchTerms(b.label, "extreme", parts, parts))
        elif rule == "inter2":
            if isinstance(cond, ConjDisj):
                conj, disj = cond.conj, cond.disj
            elif isinstance(cond, Single):
                conj = disj = cond.sentence
            else:
                raise ValidationError(f"branch {b.label!r}: inter-action Method II needs a conjunction/disjunction pair")
            if isinstance(prob, ProbList):
                raise ValidationError(f"branch {b.label!r}: inter-action Method II needs a probability range")
            terms.append(BranchTerms(b.label, "sum", (Part(prob.lo, outs.of(conj, b.effect)),),
                                     (Part(prob.hi, outs.of(disj, b.effect)),)))
        else:
            raise ValidationError(f"unknown projection rule {rule!r}")
    return tuple(terms)


def evaluate(terms, phi: Sentence) -> ProjectionResult:
    rows = []
    for t in terms:
        rows.append((t.label, t.lower(phi), t.upper(phi)))
    lo = math.fsum(r[1] for r in rows)
    hi = math.fsum(r[2] for r in rows)
    return ProjectionResult(phi, ProbInterval.clipped(lo, hi), tuple(rows))


def _prepare(a, d0, phi):
    vocab = d0.items[0][0].vocab
    phi.validate(vocab)
    return vocab


def project_concrete(a: ActionDescription, d0: StateDistribution, phi: Sentence) -> ProjectionResult:
    vocab = _prepare(a, d0, phi)
    check_concrete(a, vocab)
    res = evaluate(compile_action(a, d0, None), phi)
    value = math.fsum(r[1] for r in res.breakdown)
    return ProjectionResult(phi, ProbInterval.clipped(value, value), res.breakdown)


def project_abstract_intra_I(a, d0, phi) -> ProjectionResult:
    _prepare(a, d0, phi)
    return evaluate(compile_action(a, d0, "intra1"), phi)


def project_abstract_intra_II(a, d0, phi) -> ProjectionResult:
    _prepare(a, d0, phi)
    return evaluate(compile_action(a, d0, "intra2"), phi)


def project_abstract_inter_I(a, d0, phi) -> ProjectionResult:
    _prepare(a, d0, phi)
    lengths = {len(b.condition.sentences) for b in a.branches if isinstance(b.condition, CondList)}
    if len(lengths) > 1:
        raise ValidationError(f"action {a.name!r}: instance lists differ in length across branches")
    return evaluate(compile_action(a, d0, "inter1"), phi)


def project_abstract_inter_II(a, d0, phi) -> ProjectionResult:
    _prepare(a, d0, phi)
    return evaluate(compile_action(a, d0, "inter2"), phi)


_DISPATCH = {
    None: project_concrete,
    "intra1": project_abstract_intra_I,
    "intra2": project_abstract_intra_II,
    "inter1": project_abstract_inter_I,
    "inter2": project_abstract_inter_II,
}


def project(a: ActionDescription, d0: StateDistribution, phi: Sentence) -> ProjectionResult:
    """Project ``a`` with the rule matching how it was built."""
    return _DISPATCH[a.method](a, d0, phi)
