"""Conditional probabilistic action descriptions.

An action is a list of branches ``(condition, probability, effect, label)``.
Concrete actions use a single condition and a point probability on every
branch.  The abstraction methods produce three further annotations:

* ``CondList`` + ``ProbList``: per-member conditions and probabilities
  (intra- and inter-action Method I);
* ``Single`` + ``Range``: one (disjunctive) condition and a probability
  range (intra-action Method II);
* ``ConjDisj`` + ``Range``: sufficient/necessary condition pair and a
  probability range (inter-action Method II).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

from .errors import ValidationError
from .worldmodel import FALSE, PROB_TOL, TRUE, Sentence, Vocabulary, disjoin, entails

METHODS = ("intra1", "intra2", "inter1", "inter2")


# ----------------------------------------------------------------------------
# Effect constraints


@dataclass(frozen=True)
class Exact:
    value: object

    def resolve(self, current, fluent):
        return {self.value}

    def __str__(self):
        return f":= {self.value}"


@dataclass(frozen=True)
class AmongSet:
    values: frozenset

    def __post_init__(self):
        if not self.values:
            raise ValidationError("empty value set in effect")

    def resolve(self, current, fluent):
        return set(self.values)

    def __str__(self):
        vals = sorted(self.values, key=lambda v: (0, v, "") if isinstance(v, int) else (1, 0, str(v)))
        return "in {" + ", ".join(str(v) for v in vals) + "}"


@dataclass(frozen=True)
class RelativeExact:
    delta: int

    def resolve(self, current, fluent):
        return {current + self.delta}

    def __str__(self):
        return f"+= {self.delta}" if self.delta >= 0 else f"-= {-self.delta}"


@dataclass(frozen=True)
class RelativeRange:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"empty relative range [{self.lo}, {self.hi}]")

    def resolve(self, current, fluent):
        return {current + d for d in range(self.lo, self.hi + 1)}

    def __str__(self):
        return f"+= [{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class MaybeUnchanged:
    """Either the inner constraint applies or the fluent keeps its value."""

    inner: object

    def resolve(self, current, fluent):
        return self.inner.resolve(current, fluent) | {current}

    def __str__(self):
        return f"maybe {self.inner}"


@dataclass(frozen=True)
class Unconstrained:
    def resolve(self, current, fluent):
        return set(fluent.domain)

    def __str__(self):
        return "any"


DETERMINISTIC = (Exact, RelativeExact)


@dataclass(frozen=True)
class Effect:
    """Per-fluent constraints; fluents not listed keep their value."""

    items: tuple = ()

    @classmethod
    def of(cls, mapping: Mapping | None = None, **kwargs):
        merged = dict(mapping or {}, **kwargs)
        return cls(tuple(sorted(merged.items())))

    def as_dict(self):
        return dict(self.items)

    def get(self, name):
        for n, c in self.items:
            if n == name:
                return c
        return None

    def fluents(self):
        return [n for n, _ in self.items]

    @property
    def deterministic(self):
        return all(isinstance(c, DETERMINISTIC) for _, c in self.items)

    def validate(self, vocab: Vocabulary):
        for name, c in self.items:
            f = vocab[name]
            inner = c.inner if isinstance(c, MaybeUnchanged) else c
            if isinstance(inner, MaybeUnchanged):
                raise ValidationError(f"nested 'maybe' on fluent {name!r}")
            if isinstance(inner, Exact) and not f.contains(inner.value):
                raise ValidationError(f"value {inner.value!r} outside the domain of {name!r}")
            if isinstance(inner, AmongSet):
                bad = [v for v in inner.values if not f.contains(v)]
                if bad:
                    raise ValidationError(f"values {bad} outside the domain of {name!r}")
            if isinstance(inner, (RelativeExact, RelativeRange)) and not f.numeric:
                raise ValidationError(f"relative effect on symbolic fluent {name!r}")

    def __str__(self):
        if not self.items:
            return "none"
        return "; ".join(f"{'maybe ' if isinstance(c, MaybeUnchanged) else ''}{n} "
                         f"{c.inner if isinstance(c, MaybeUnchanged) else c}" for n, c in self.items)


NO_EFFECT = Effect()


# ----------------------------------------------------------------------------
# Branch annotations


@dataclass(frozen=True)
class Single:
    sentence: Sentence

    def members(self):
        return (self.sentence,)

    @property
    def reach(self):
        return self.sentence


@dataclass(frozen=True)
class CondList:
    sentences: tuple

    def __post_init__(self):
        if not self.sentences:
            raise ValidationError("empty condition list")

    def members(self):
        return self.sentences

    @property
    def reach(self):
        return disjoin(self.sentences)


@dataclass(frozen=True)
class ConjDisj:
    conj: Sentence
    disj: Sentence

    def members(self):
        return (self.conj, self.disj)

    @property
    def reach(self):
        return self.disj


@dataclass(frozen=True)
class Point:
    p: float

    def __post_init__(self):
        _check_prob(self.p)

    @property
    def lo(self):
        return self.p

    @property
    def hi(self):
        return self.p


@dataclass(frozen=True)
class ProbList:
    ps: tuple

    def __post_init__(self):
        if not self.ps:
            raise ValidationError("empty probability list")
        for p in self.ps:
            _check_prob(p)

    @property
    def lo(self):
        return min(self.ps)

    @property
    def hi(self):
        return max(self.ps)


@dataclass(frozen=True)
class Range:
    lo: float
    hi: float

    def __post_init__(self):
        _check_prob(self.lo)
        _check_prob(self.hi)
        if self.lo > self.hi + PROB_TOL:
            raise ValidationError(f"probability range [{self.lo}, {self.hi}] is inverted")


def _check_prob(p):
    if not isinstance(p, (int, float)) or math.isnan(p) or p < -PROB_TOL or p > 1 + PROB_TOL:
        raise ValidationError(f"probability {p!r} outside [0, 1]")


_PAIRINGS = {
    (Single, Point),
    (CondList, ProbList),
    (Single, Range),
    (ConjDisj, Range),
}


@dataclass(frozen=True)
class Branch:
    condition: object
    prob: object
    effect: Effect = NO_EFFECT
    label: str = ""

    def __post_init__(self):
        if isinstance(self.condition, Sentence):
            object.__setattr__(self, "condition", Single(self.condition))
        if isinstance(self.prob, (int, float)):
            object.__setattr__(self, "prob", Point(float(self.prob)))
        if (type(self.condition), type(self.prob)) not in _PAIRINGS:
            raise ValidationError(
                f"branch {self.label!r}: {type(self.condition).__name__} condition cannot carry "
                f"a {type(self.prob).__name__} probability")
        if isinstance(self.condition, CondList) and len(self.condition.sentences) != len(self.prob.ps):
            raise ValidationError(f"branch {self.label!r}: condition and probability lists differ in length")

    @property
    def concrete(self):
        return isinstance(self.condition, Single) and isinstance(self.prob, Point)


@dataclass(frozen=True)
class ActionDescription:
    """A named action.  ``method`` is None for concrete actions, otherwise
    the abstraction method whose projection rule applies to the branches."""

    name: str
    branches: tuple
    duration: int = 1
    method: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if self.duration < 0 or int(self.duration) != self.duration:
            raise ValidationError(f"action {self.name!r}: duration must be a non-negative integer")
        if self.method is not None and self.method not in METHODS:
            raise ValidationError(f"action {self.name!r}: unknown abstraction method {self.method!r}")
        if not self.branches:
            raise ValidationError(f"action {self.name!r} has no branches")
        labels = [b.label for b in self.branches]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"action {self.name!r}: duplicate branch labels")
        if self.method is None and not all(b.concrete for b in self.branches):
            raise ValidationError(f"concrete action {self.name!r} carries abstract branch annotations")

    @property
    def kind(self):
        return "concrete" if self.method is None else "abstract"

    @property
    def concrete(self):
        return self.method is None

    def branch(self, label) -> Branch:
        for b in self.branches:
            if b.label == label:
                return b
        raise ValidationError(f"action {self.name!r} has no branch {label!r}")

    def conditions(self):
        """Distinct conditions of a concrete action, in first-appearance order."""
        seen = []
        for b in self.branches:
            c = b.condition.sentence
            if c not in seen:
                seen.append(c)
        return seen

    def with_branches(self, branches):
        return replace(self, branches=tuple(branches))


def validate_concrete(a: ActionDescription, v: Vocabulary) -> list[str]:
    """Return one message per violated well-formedness rule (empty when valid)."""
    report = []
    if not a.concrete:
        return [f"action {a.name!r} is not concrete"]
    for b in a.branches:
        try:
            b.condition.sentence.validate(v)
        except ValidationError as exc:
            report.append(f"branch {b.label!r}: condition invalid: {exc}")
        try:
            b.effect.validate(v)
        except ValidationError as exc:
            report.append(f"branch {b.label!r}: effect invalid: {exc}")
        if not b.effect.deterministic:
            report.append(f"branch {b.label!r}: concrete effects must be exact (absolute or relative)")
    if report:
        return report
    conds = a.conditions()
    for c in conds:
        group = [b for b in a.branches if b.condition.sentence == c]
        total = math.fsum(b.prob.p for b in group)
        if total == 0.0 and entails(c, FALSE, v):
            continue  # padding branches

        if abs(total - 1.0) > PROB_TOL:
            report.append(f"condition {c}: probabilities sum to {total:.10g} ≠ 1")
        effects = [b.effect for b in group]
        if len(set(effects)) != len(effects):
            report.append(f"condition {c}: two branches share the same effect")
    for i, c1 in enumerate(conds):
        for c2 in conds[i + 1:]:
            if not entails(c1 & c2, FALSE, v):
                report.append(f"conditions {c1} and {c2} are not mutually exclusive")
    if not entails(TRUE, disjoin(conds), v):
        report.append("conditions are not exhaustive")
    return report


def check_concrete(a: ActionDescription, v: Vocabulary) -> None:
    report = validate_concrete(a, v)
    if report:
        raise ValidationError(f"action {a.name!r}: " + "; ".join(report))


def merge_duplicate_effects(a: ActionDescription) -> ActionDescription:
    """Combine branches sharing both condition and effect, summing probabilities."""
    merged = {}
    order = []
    for b in a.branches:
        key = (b.condition, b.effect)
        if key in merged:
            prev = merged[key]
            merged[key] = replace(prev, prob=Point(prev.prob.p + b.prob.p), label=f"{prev.label}+{b.label}")
        else:
            merged[key] = b
            order.append(key)
    if len(order) == len(a.branches):
        return a
    return a.with_branches(merged[k] for k in order)


def pad_branches(a: ActionDescription, target_count: int) -> ActionDescription:
    """Append (FALSE, 0) branches until the action has ``target_count`` branches."""
    n = len(a.branches)
    if target_count < n:
        raise ValidationError(f"cannot pad {a.name!r} from {n} down to {target_count} branches")
    pads = []
    template = a.branches[0]
    labels = {b.label for b in a.branches}
    i = 0
    while len(pads) < target_count - n:
        label = f"pad{i}"
        i += 1
        if label in labels:
            continue
        pads.append(_false_branch(template, label))
    return a.with_branches(a.branches + tuple(pads))


def _false_branch(template: Branch, label: str) -> Branch:
    if isinstance(template.condition, CondList):
        k = len(template.condition.sentences)
        return Branch(CondList((FALSE,) * k), ProbList((0.0,) * k), template.effect, label)
    if isinstance(template.condition, ConjDisj):
        return Branch(ConjDisj(FALSE, FALSE), Range(0.0, 0.0), template.effect, label)
    if isinstance(template.prob, Range):
        return Branch(Single(FALSE), Range(0.0, 0.0), template.effect, label)
    return Branch(Single(FALSE), Point(0.0), template.effect, label)
