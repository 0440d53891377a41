"""Finite fluent worlds: vocabularies, states, sentences and distributions.

A state assigns one value to every fluent of a vocabulary.  Sentences are
small expression trees over fluent relations; because vocabularies are
finite, every semantic question (models, entailment, lower/upper
probability) is answered by enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from ._lexer import TokenStream, tokenize
from .errors import DegenerateEffectError, DomainSyntaxError, ValidationError

PROB_TOL = 1e-9

_ORDER_OPS = ("<", "<=", ">", ">=")
_EQ_OPS = ("=", "!=")


@dataclass(frozen=True)
class Fluent:
    """A named fluent with a finite domain.

    Numeric fluents range over the integers ``lo..hi``; symbolic ones over
    an explicit tuple of names (``("T", "F")`` for booleans).
    """

    name: str
    values: tuple = ()
    bounds: tuple[int, int] | None = None

    @classmethod
    def symbolic(cls, name, values):
        return cls(name, tuple(values))

    @classmethod
    def int_range(cls, name, lo, hi):
        return cls(name, (), (int(lo), int(hi)))

    @classmethod
    def boolean(cls, name):
        return cls(name, ("T", "F"))

    @property
    def numeric(self):
        return self.bounds is not None

    @property
    def domain(self):
        if self.bounds is not None:
            return range(self.bounds[0], self.bounds[1] + 1)
        return self.values

    @property
    def size(self):
        return len(self.domain)

    def contains(self, value):
        if self.bounds is not None:
            return isinstance(value, int) and not isinstance(value, bool) and self.bounds[0] <= value <= self.bounds[1]
        return value in self.values

    def __str__(self):
        if self.bounds is not None:
            return f"fluent {self.name} {self.bounds[0]}..{self.bounds[1]}"
        return f"fluent {self.name} {{{', '.join(self.values)}}}"


class Vocabulary:
    """Ordered collection of fluents."""

    def __init__(self, fluents: Iterable[Fluent]):
        self.fluents = tuple(fluents)
        self.index = {}
        for i, f in enumerate(self.fluents):
            if f.name in self.index:
                raise ValidationError(f"duplicate fluent {f.name!r}")
            if f.bounds is not None:
                if f.bounds[0] > f.bounds[1]:
                    raise ValidationError(f"fluent {f.name!r} has an empty range")
            elif not f.values:
                raise ValidationError(f"fluent {f.name!r} has an empty domain")
            elif len(set(f.values)) != len(f.values):
                raise ValidationError(f"fluent {f.name!r} repeats a domain value")
            self.index[f.name] = i
        self.names = tuple(f.name for f in self.fluents)

    def __getitem__(self, name) -> Fluent:
        try:
            return self.fluents[self.index[name]]
        except KeyError:
            raise ValidationError(f"unknown fluent {name!r}") from None

    def __contains__(self, name):
        return name in self.index

    def __iter__(self):
        return iter(self.fluents)

    def __len__(self):
        return len(self.fluents)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.fluents == other.fluents

    def __hash__(self):
        return hash(self.fluents)

    def __repr__(self):
        return f"Vocabulary({list(self.names)})"

    @property
    def state_count(self):
        return math.prod(f.size for f in self.fluents)

    def states(self) -> Iterator[State]:
        for values in itertools.product(*(f.domain for f in self.fluents)):
            yield State(self, values)

    def state(self, assignment: Mapping | None = None, **kwargs) -> State:
        assignment = dict(assignment or {}, **kwargs)
        missing = [n for n in self.names if n not in assignment]
        extra = [n for n in assignment if n not in self.index]
        if missing or extra:
            raise ValidationError(f"state must assign exactly the vocabulary fluents (missing {missing}, unknown {extra})")
        values = tuple(assignment[n] for n in self.names)
        for f, v in zip(self.fluents, values):
            if not f.contains(v):
                raise ValidationError(f"value {v!r} outside the domain of fluent {f.name!r}")
        return State(self, values)


class State:
    """One value per vocabulary fluent.  Immutable and hashable."""

    __slots__ = ("vocab", "values", "_hash")

    def __init__(self, vocab: Vocabulary, values: tuple):
        self.vocab = vocab
        self.values = values
        self._hash = hash(values)

    def __getitem__(self, name):
        return self.values[self.vocab.index[name]]

    def get(self, name, default=None):
        i = self.vocab.index.get(name)
        return default if i is None else self.values[i]

    def replace(self, changes: Mapping) -> State:
        values = list(self.values)
        for name, v in changes.items():
            values[self.vocab.index[name]] = v
        return State(self.vocab, tuple(values))

    def as_dict(self):
        return dict(zip(self.vocab.names, self.values))

    def __eq__(self, other):
        return isinstance(other, State) and self.values == other.values

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return _sort_key(self.values) < _sort_key(other.values)

    def __repr__(self):
        return "State(" + ", ".join(f"{n}={v}" for n, v in zip(self.vocab.names, self.values)) + ")"

    def describe(self):
        return " ".join(f"{n}={v}" for n, v in zip(self.vocab.names, self.values))


def _sort_key(values):
    return tuple((0, v, "") if isinstance(v, int) else (1, 0, str(v)) for v in values)


# ----------------------------------------------------------------------------
# Sentences


class Sentence:
    """Base class of the sentence expression tree."""

    def holds(self, state: State, pre: State | None = None) -> bool:
        raise NotImplementedError

    def fluents(self) -> frozenset:
        raise NotImplementedError

    def validate(self, vocab: Vocabulary) -> None:
        pass

    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Const(Sentence):
    value: bool

    def holds(self, state, pre=None):
        return self.value

    def fluents(self):
        return frozenset()

    def __str__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Ref:
    """Reference to a fluent's value before (``start``) or after (``end``) an action."""

    fluent: str
    when: str = "end"
    offset: int = 0

    def read(self, state, pre):
        src = pre if (self.when == "start" and pre is not None) else state
        v = src[self.fluent]
        return v + self.offset if self.offset else v

    def __str__(self):
        s = self.fluent if self.when == "end" else f"{self.fluent}@{self.when}"
        if self.offset > 0:
            s += f" + {self.offset}"
        elif self.offset < 0:
            s += f" - {-self.offset}"
        return s


_COMPARE = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Atom(Sentence):
    """``lhs op rhs`` where rhs is a literal, another fluent reference, or a value set for ``in``."""

    lhs: Ref
    op: str
    rhs: object

    def holds(self, state, pre=None):
        left = self.lhs.read(state, pre)
        if self.op == "in":
            return left in self.rhs
        right = self.rhs.read(state, pre) if isinstance(self.rhs, Ref) else self.rhs
        return _COMPARE[self.op](left, right)

    def fluents(self):
        names = {self.lhs.fluent}
        if isinstance(self.rhs, Ref):
            names.add(self.rhs.fluent)
        return frozenset(names)

    def validate(self, vocab):
        left = vocab[self.lhs.fluent]
        if self.op not in _COMPARE and self.op != "in":
            raise ValidationError(f"unknown relation {self.op!r}")
        if not left.numeric and (self.lhs.offset or self.op in _ORDER_OPS):
            raise ValidationError(f"ordering/arithmetic on symbolic fluent {left.name!r}")
        if self.op == "in":
            bad = [v for v in self.rhs if not left.contains(v)]
            if bad:
                raise ValidationError(f"values {bad} outside the domain of {left.name!r}")
        elif isinstance(self.rhs, Ref):
            right = vocab[self.rhs.fluent]
            if right.numeric != left.numeric:
                raise ValidationError(f"type mismatch between {left.name!r} and {right.name!r}")
            if not right.numeric and self.rhs.offset:
                raise ValidationError(f"arithmetic on symbolic fluent {right.name!r}")
        elif left.numeric:
            if not isinstance(self.rhs, int) or isinstance(self.rhs, bool):
                raise ValidationError(f"numeric fluent {left.name!r} compared with {self.rhs!r}")
        elif self.rhs not in left.values:
            raise ValidationError(f"value {self.rhs!r} outside the domain of {left.name!r}")

    def __str__(self):
        if self.op == "in":
            return f"{self.lhs} in {{{', '.join(str(v) for v in sorted(self.rhs, key=_value_key))}}}"
        return f"{self.lhs} {self.op} {_fmt_value(self.rhs)}"


@dataclass(frozen=True)
class Not(Sentence):
    arg: Sentence

    def holds(self, state, pre=None):
        return not self.arg.holds(state, pre)

    def fluents(self):
        return self.arg.fluents()

    def validate(self, vocab):
        self.arg.validate(vocab)

    def __str__(self):
        return f"not {_wrap(self.arg)}"


@dataclass(frozen=True)
class And(Sentence):
    args: tuple

    def holds(self, state, pre=None):
        return all(a.holds(state, pre) for a in self.args)

    def fluents(self):
        return frozenset().union(*(a.fluents() for a in self.args))

    def validate(self, vocab):
        for a in self.args:
            a.validate(vocab)

    def __str__(self):
        if not self.args:
            return "TRUE"
        return " and ".join(_wrap(a) for a in self.args)


@dataclass(frozen=True)
class Or(Sentence):
    args: tuple

    def holds(self, state, pre=None):
        return any(a.holds(state, pre) for a in self.args)

    def fluents(self):
        return frozenset().union(*(a.fluents() for a in self.args))

    def validate(self, vocab):
        for a in self.args:
            a.validate(vocab)

    def __str__(self):
        if not self.args:
            return "FALSE"
        return " or ".join(_wrap(a) for a in self.args)


def _wrap(s):
    return str(s) if isinstance(s, (Atom, Const)) else f"({s})"


def _value_key(v):
    return (0, v, "") if isinstance(v, int) else (1, 0, str(v))


def _fmt_value(v):
    if isinstance(v, Ref):
        return str(v)
    return str(v)


def conjoin(sentences):
    """Conjunction that drops TRUE and collapses to FALSE/singletons."""
    parts = []
    for s in sentences:
        if s == FALSE:
            return FALSE
        if s != TRUE and s not in parts:
            parts.append(s)
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def disjoin(sentences):
    """Disjunction that drops FALSE and collapses to TRUE/singletons."""
    parts = []
    for s in sentences:
        if s == TRUE:
            return TRUE
        if s != FALSE and s not in parts:
            parts.append(s)
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def eq(fluent, value):
    return Atom(Ref(fluent), "=", value)


# ----------------------------------------------------------------------------
# Semantics


def models(s: Sentence, v: Vocabulary) -> frozenset:
    """All states of ``v`` satisfying ``s``."""
    s.validate(v)
    return frozenset(st for st in v.states() if s.holds(st))


def entails(a: Sentence, b: Sentence, v: Vocabulary) -> bool:
    a.validate(v)
    b.validate(v)
    if a == FALSE or b == TRUE:
        return True
    # only the mentioned fluents matter
    names = sorted(a.fluents() | b.fluents())
    for combo in itertools.product(*(v[n].domain for n in names)):
        point = dict(zip(names, combo))
        if a.holds(point) and not b.holds(point):
            return False
    return True


def equivalent(a: Sentence, b: Sentence, v: Vocabulary) -> bool:
    return entails(a, b, v) and entails(b, a, v)


def lower_prob(phi: Sentence, s_set) -> int:
    """1 when every member of ``s_set`` satisfies ``phi``, else 0.

    Members are states, or ``(pre, post)`` pairs when ``phi`` relates the
    values before and after an action.
    """
    if not s_set:
        raise DegenerateEffectError("lower probability over an empty state set")
    return int(all(_holds(phi, x) for x in s_set))


def upper_prob(phi: Sentence, s_set) -> int:
    """0 when no member of ``s_set`` satisfies ``phi``, else 1."""
    if not s_set:
        raise DegenerateEffectError("upper probability over an empty state set")
    return int(any(_holds(phi, x) for x in s_set))


def _holds(phi, x):
    if isinstance(x, tuple):
        pre, post = x
        return phi.holds(post, pre)
    return phi.holds(x)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi + PROB_TOL:
            raise ValidationError(f"malformed interval [{self.lo}, {self.hi}]")

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def degenerate(self):
        return abs(self.hi - self.lo) <= PROB_TOL

    def contains(self, x, tol=PROB_TOL):
        if isinstance(x, Interval):
            return self.lo - tol <= x.lo and x.hi <= self.hi + tol
        return self.lo - tol <= x <= self.hi + tol

    def __iter__(self):
        yield self.lo
        yield self.hi


@dataclass(frozen=True)
class ProbInterval(Interval):
    """Closed subinterval of [0, 1]."""

    def __post_init__(self):
        super().__post_init__()
        if self.lo < -PROB_TOL or self.hi > 1 + PROB_TOL:
            raise ValidationError(f"probability interval [{self.lo}, {self.hi}] escapes [0, 1]")

    @classmethod
    def clipped(cls, lo, hi):
        lo = min(max(lo, 0.0), 1.0)
        hi = min(max(hi, 0.0), 1.0)
        return cls(lo, max(lo, hi))

    @classmethod
    def point(cls, p):
        return cls(p, p)


@dataclass(frozen=True)
class StateDistribution:
    """Finite distribution over pairwise distinct states."""

    items: tuple = field(default=())

    def __post_init__(self):
        seen = set()
        total = 0.0
        for st, p in self.items:
            if st in seen:
                raise ValidationError(f"state listed twice in distribution: {st!r}")
            seen.add(st)
            if not (-PROB_TOL <= p <= 1 + PROB_TOL):
                raise ValidationError(f"state probability {p} outside [0, 1]")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"state probabilities sum to {total:.12g}, not 1")

    @classmethod
    def from_pairs(cls, pairs):
        return cls(tuple((s, float(p)) for s, p in pairs))

    @classmethod
    def point(cls, state):
        return cls(((state, 1.0),))

    @classmethod
    def uniform(cls, states):
        states = list(states)
        return cls(tuple((s, 1.0 / len(states)) for s in states))

    def support(self):
        return [(s, p) for s, p in self.items if p > 0.0]

    def states(self):
        return [s for s, _ in self.items]

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def mixture(self, other, lam):
        """``lam * self + (1 - lam) * other``."""
        weights = {}
        for s, p in self.items:
            weights[s] = weights.get(s, 0.0) + lam * p
        for s, p in other.items:
            weights[s] = weights.get(s, 0.0) + (1 - lam) * p
        return StateDistribution(tuple(weights.items()))


def prob_of(s: Sentence, d: StateDistribution) -> float:
    return math.fsum(p for st, p in d.items if s.holds(st))


# ----------------------------------------------------------------------------
# Sentence parsing


def parse_sentence(text: str, vocab: Vocabulary, line=None) -> Sentence:
    """Parse sentence text such as ``fuel@end = fuel@start - 8 and muddy = T``."""
    ts = TokenStream(tokenize(text, line), line)
    s = _parse_or(ts, vocab)
    if not ts.done():
        raise ts.error(f"unexpected token {ts.peek().text!r}")
    try:
        s.validate(vocab)
    except ValidationError as exc:
        raise DomainSyntaxError(str(exc), line) from None
    return s


def parse_sentence_tokens(ts: TokenStream, vocab: Vocabulary) -> Sentence:
    s = _parse_or(ts, vocab)
    try:
        s.validate(vocab)
    except ValidationError as exc:
        raise DomainSyntaxError(str(exc), ts.line) from None
    return s


def _parse_or(ts, vocab):
    parts = [_parse_and(ts, vocab)]
    while ts.accept("or"):
        parts.append(_parse_and(ts, vocab))
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def _parse_and(ts, vocab):
    parts = [_parse_not(ts, vocab)]
    while ts.accept("and"):
        parts.append(_parse_not(ts, vocab))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_not(ts, vocab):
    if ts.accept("not"):
        return Not(_parse_not(ts, vocab))
    if ts.accept("("):
        s = _parse_or(ts, vocab)
        ts.expect(")")
        return s
    if ts.accept("TRUE"):
        return TRUE
    if ts.accept("FALSE"):
        return FALSE
    return _parse_atom(ts, vocab)


def _parse_ref(ts, vocab):
    tok = ts.next()
    if tok.kind != "name":
        raise ts.error(f"expected a fluent name, found {tok.text!r}")
    if tok.text not in vocab:
        raise ts.error(f"unknown fluent {tok.text!r}")
    when = "end"
    if ts.accept("@"):
        tag = ts.next().text
        if tag in ("start", "t", "t0"):
            when = "start"
        elif tag in ("end", "t1"):
            when = "end"
        else:
            raise ts.error(f"unknown time tag {tag!r}")
    return Ref(tok.text, when)


def parse_value(ts, fluent: Fluent | None = None):
    neg = bool(ts.accept("-"))
    tok = ts.next()
    if tok.kind == "number":
        if "." in tok.text or "e" in tok.text.lower():
            raise DomainSyntaxError(f"fluent values are integers or names, found {tok.text!r}", ts.line, tok.col)
        return -int(tok.text) if neg else int(tok.text)
    if tok.kind == "name" and not neg:
        return tok.text
    raise DomainSyntaxError(f"expected a value, found {tok.text!r}", ts.line, tok.col)


def _parse_atom(ts, vocab):
    lhs = _parse_ref(ts, vocab)
    tok = ts.next()
    op = tok.text
    if op == "in":
        ts.expect("{")
        values = [parse_value(ts)]
        while ts.accept(","):
            values.append(parse_value(ts))
        ts.expect("}")
        return Atom(lhs, "in", frozenset(values))
    if op not in _COMPARE:
        raise DomainSyntaxError(f"expected a relation, found {op!r}", ts.line, tok.col)
    nxt = ts.peek()
    if nxt is not None and nxt.kind == "name" and nxt.text in vocab:
        rhs = _parse_ref(ts, vocab)
        if ts.at("+", "-"):
            sign = 1 if ts.next().text == "+" else -1
            num = ts.next()
            if num.kind != "number" or "." in num.text:
                raise DomainSyntaxError("expected an integer offset", ts.line, num.col)
            rhs = Ref(rhs.fluent, rhs.when, sign * int(num.text))
        return Atom(lhs, op, rhs)
    return Atom(lhs, op, parse_value(ts))
