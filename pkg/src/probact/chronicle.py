"""Temporal semantics: effect application, envelopes and plan chronicles.

Fluents persist unless an effect mentions them.  Abstract effects do not
pin down a single successor, so multi-step projection tracks an
:class:`Envelope`: per fluent either a set of symbolic values or an integer
interval.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .actions import (
    AmongSet,
    ActionDescription,
    Branch,
    CondList,
    ConjDisj,
    Exact,
    MaybeUnchanged,
    RelativeExact,
    RelativeRange,
    Unconstrained,
)
from .errors import DomainOverflowError, IncompletenessError, ValidationError
from .worldmodel import PROB_TOL, ProbInterval, Sentence, State, StateDistribution, Vocabulary


def apply_effect(s: State, e, clip=False) -> frozenset:
    """Every state consistent with applying effect ``e`` in state ``s``.

    Out-of-domain values raise, unless ``clip`` is set: an abstract effect
    may over-approximate, and values outside the domain can never occur, so
    they are dropped (possibly leaving no successor at all).
    """
    vocab = s.vocab
    choices = []
    names = []
    for name, c in e.items:
        f = vocab[name]
        vals = c.resolve(s[name], f)
        bad = [v for v in vals if not f.contains(v)]
        if bad:
            if not clip:
                raise DomainOverflowError(name, bad[0])
            vals = [v for v in vals if f.contains(v)]
            if not vals:
                return frozenset()
        names.append(name)
        choices.append(sorted(vals, key=_vkey))
    if not names:
        return frozenset((s,))
    return frozenset(s.replace(dict(zip(names, combo))) for combo in itertools.product(*choices))


def successor(s: State, e) -> State:
    """The unique successor under a deterministic effect."""
    out = apply_effect(s, e)
    if len(out) != 1:
        raise ValidationError("effect is not deterministic")
    return next(iter(out))


def _vkey(v):
    return (0, v, "") if isinstance(v, int) else (1, 0, str(v))


class Envelope:
    """Per-fluent over-approximation of a set of states."""

    __slots__ = ("vocab", "parts", "_hash")

    def __init__(self, vocab: Vocabulary, parts: tuple):
        self.vocab = vocab
        self.parts = parts
        self._hash = hash(parts)

    @classmethod
    def from_state(cls, s: State):
        parts = tuple((v, v) if f.numeric else frozenset((v,)) for f, v in zip(s.vocab.fluents, s.values))
        return cls(s.vocab, parts)

    def values(self, name):
        part = self.parts[self.vocab.index[name]]
        if isinstance(part, tuple):
            return range(part[0], part[1] + 1)
        return sorted(part, key=_vkey)

    def bounds(self, name):
        """(lo, hi) for numeric fluents."""
        return self.parts[self.vocab.index[name]]

    @property
    def is_point(self):
        return all((p[0] == p[1]) if isinstance(p, tuple) else len(p) == 1 for p in self.parts)

    def to_state(self) -> State:
        if not self.is_point:
            raise ValidationError("envelope holds more than one state")
        return State(self.vocab, tuple(p[0] if isinstance(p, tuple) else next(iter(p)) for p in self.parts))

    def size(self):
        return math.prod(len(self.values(n)) for n in self.vocab.names)

    def states(self):
        for combo in itertools.product(*(self.values(n) for n in self.vocab.names)):
            yield State(self.vocab, tuple(combo))

    def _assignments(self, sentence):
        names = sorted(sentence.fluents())
        for combo in itertools.product(*(self.values(n) for n in names)):
            yield dict(zip(names, combo))

    def entails(self, sentence: Sentence) -> bool:
        return all(sentence.holds(a) for a in self._assignments(sentence))

    def meets(self, sentence: Sentence) -> bool:
        return any(sentence.holds(a) for a in self._assignments(sentence))

    def restrict(self, sentence: Sentence):
        """Smallest envelope covering the members that satisfy ``sentence`` (None if none do)."""
        names = sorted(sentence.fluents())
        if not names:
            return self if sentence.holds({}) else None
        kept = {n: set() for n in names}
        any_sat = False
        for a in self._assignments(sentence):
            if sentence.holds(a):
                any_sat = True
                for n in names:
                    kept[n].add(a[n])
        if not any_sat:
            return None
        parts = list(self.parts)
        for n in names:
            i = self.vocab.index[n]
            parts[i] = (min(kept[n]), max(kept[n])) if isinstance(parts[i], tuple) else frozenset(kept[n])
        return Envelope(self.vocab, tuple(parts))

    def apply(self, effect, clip=False):
        """Envelope after ``effect``; with ``clip``, None when nothing stays in the domain."""
        parts = list(self.parts)
        for name, c in effect.items:
            i = self.vocab.index[name]
            parts[i] = _apply_part(self.vocab.fluents[i], parts[i], c, clip)
            if parts[i] is None:
                return None
        return Envelope(self.vocab, tuple(parts))

    def __eq__(self, other):
        return isinstance(other, Envelope) and self.parts == other.parts

    def __hash__(self):
        return self._hash

    def describe(self):
        out = []
        for name, part in zip(self.vocab.names, self.parts):
            if isinstance(part, tuple):
                out.append(f"{name}={part[0]}" if part[0] == part[1] else f"{name}=[{part[0]},{part[1]}]")
            else:
                vals = sorted(part, key=_vkey)
                out.append(f"{name}={vals[0]}" if len(vals) == 1 else f"{name}={{{','.join(map(str, vals))}}}")
        return " ".join(out)

    def __repr__(self):
        return f"Envelope({self.describe()})"


def _apply_part(fluent, part, c, clip=False):
    if isinstance(c, MaybeUnchanged):
        changed = _apply_part(fluent, part, c.inner, clip)
        if changed is None:
            return part
        if fluent.numeric:
            return (min(part[0], changed[0]), max(part[1], changed[1]))
        return part | changed
    if fluent.numeric:
        if isinstance(c, Exact):
            out = (c.value, c.value)
        elif isinstance(c, AmongSet):
            out = (min(c.values), max(c.values))
        elif isinstance(c, RelativeExact):
            out = (part[0] + c.delta, part[1] + c.delta)
        elif isinstance(c, RelativeRange):
            out = (part[0] + c.lo, part[1] + c.hi)
        elif isinstance(c, Unconstrained):
            out = fluent.bounds
        else:
            raise ValidationError(f"unsupported constraint {c!r}")
        lo, hi = fluent.bounds
        if clip:
            out = (max(out[0], lo), min(out[1], hi))
            return out if out[0] <= out[1] else None
        if out[0] < lo:
            raise DomainOverflowError(fluent.name, out[0])
        if out[1] > hi:
            raise DomainOverflowError(fluent.name, out[1])
        return out
    if isinstance(c, Exact):
        return frozenset((c.value,))
    if isinstance(c, AmongSet):
        return frozenset(c.values)
    if isinstance(c, Unconstrained):
        return frozenset(fluent.values)
    raise ValidationError(f"relative effect on symbolic fluent {fluent.name!r}")


def branch_weight(branch: Branch, method: str | None, env: Envelope) -> tuple[float, float]:
    """Bounds on the probability that ``branch`` fires from any state in ``env``."""
    cond, prob = branch.condition, branch.prob
    if isinstance(cond, CondList):
        if method == "inter1":
            lo = min((p if env.entails(c) else 0.0) for c, p in zip(cond.sentences, prob.ps))
            hi = max((p if env.meets(c) else 0.0) for c, p in zip(cond.sentences, prob.ps))
            return lo, hi
        # intra1: members come from one action, so at most one distinct condition holds
        summed = {}
        for c, p in zip(cond.sentences, prob.ps):
            summed[c] = summed.get(c, 0.0) + p
        lo = max((p for c, p in summed.items() if env.entails(c)), default=0.0)
        hi = max((p for c, p in summed.items() if env.meets(c)), default=0.0)
        return lo, hi
    if isinstance(cond, ConjDisj):
        lo = prob.lo if env.entails(cond.conj) else 0.0
        hi = prob.hi if env.meets(cond.disj) else 0.0
        return lo, hi
    s = cond.sentence
    lo = prob.lo if env.entails(s) else 0.0
    hi = prob.hi if env.meets(s) else 0.0
    return lo, hi


def step(action: ActionDescription, env: Envelope):
    """Return ``(branch, lo, hi, successor_envelope)`` for branches that may fire.

    A concrete action applied to a single state must stay inside every
    domain.  Over wider envelopes (or for abstract effects) successors
    outside a domain are spurious and are clipped away.
    """
    clip = not (action.concrete and env.is_point)
    total_hi = 0.0
    out = []
    for b in action.branches:
        lo, hi = branch_weight(b, action.method, env)
        if hi <= 0.0:
            continue
        reach = env.restrict(b.condition.reach)
        if reach is None:
            continue
        nxt = reach.apply(b.effect, clip)
        if nxt is None:
            if action.concrete:
                reach.apply(b.effect)  # raises with the offending fluent
            continue
        total_hi += hi
        out.append((b, lo, hi, nxt))
    if total_hi < 1.0 - 1e-6:
        raise IncompletenessError(
            f"action {action.name!r}: no condition covers the state {env.describe()}")
    return out


@dataclass(frozen=True)
class TimedState:
    time: int
    state: object  # State for exact chronicles, Envelope otherwise

    def __post_init__(self):
        if self.time < 0:
            raise ValidationError("negative time")


@dataclass(frozen=True)
class Chronicle:
    states: tuple
    probability: ProbInterval
    trace: tuple  # ((action name, branch label), ...)

    @property
    def final(self):
        return self.states[-1].state

    @property
    def elapsed(self):
        return self.states[-1].time - self.states[0].time


@dataclass(frozen=True)
class ChronicleSet:
    chronicles: tuple

    def __iter__(self):
        return iter(self.chronicles)

    def __len__(self):
        return len(self.chronicles)

    def total(self):
        return math.fsum(c.probability.lo for c in self.chronicles)


def enumerate_chronicles(plan, d0: StateDistribution) -> ChronicleSet:
    """Every outcome trajectory of ``plan`` from ``d0``.

    Exact for concrete plans; abstract steps give probability intervals
    (products of per-step bounds) and envelope states.
    """
    plan = list(plan)
    if not plan:
        raise ValidationError("plan is empty")
    out = []
    for s0, p0 in d0.support():
        start = TimedState(0, s0)
        _extend(plan, 0, Envelope.from_state(s0), (start,), p0, p0, (), out)
    out.sort(key=lambda c: (tuple(lbl for _, lbl in c.trace), _state_key(c.states[0].state)))
    return ChronicleSet(tuple(out))


def _state_key(s):
    return _vkey_tuple(s.values) if isinstance(s, State) else ()


def _vkey_tuple(values):
    return tuple(_vkey(v) for v in values)


def _extend(plan, i, env, states, lo, hi, trace, out):
    if i == len(plan):
        out.append(Chronicle(states, ProbInterval.clipped(lo, hi), trace))
        return
    action = plan[i]
    t = states[-1].time + action.duration
    for b, blo, bhi, nxt in step(action, env):
        shown = nxt.to_state() if nxt.is_point else nxt
        _extend(plan, i + 1, nxt, states + (TimedState(t, shown),), lo * blo, hi * bhi,
                trace + ((action.name, b.label),), out)


def is_exact(chronicles: ChronicleSet) -> bool:
    return all(c.probability.degenerate and isinstance(c.final, State) for c in chronicles)

