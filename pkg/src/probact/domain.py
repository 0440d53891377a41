"""Line-oriented domain files.

::

    fluent weather {snow, sun, cloud}
    fluent fuel 0..20

    initial
      given fuel=20
      0.2 weather=snow
      0.8 weather=sun
    end

    action drive-home dur 1
      branch a when TRUE prob 0.7 effect fuel -= 8
      branch b when TRUE prob 0.3 effect fuel -= 6
    end

    abstract drive inter1 from mountain-road valley-road
      group a, i
      group b
    end

    decompose deliver : drive drive-home
    root deliver

    utility
      fuel 1
      muddy table T=-3 F=0
      elapsed -0.5
    end

Abstract actions may also be written out directly with ``abstract METHOD``
in the action header; their branches then use ``[c1, c2]`` / ``[p1, p2]``
lists, ``conj(c) disj(c)`` pairs and ``range(lo, hi)`` probabilities.
Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ._lexer import TokenStream, tokenize
from .abstraction import GroupingPlan
from .actions import (
    METHODS,
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
)
from .errors import DomainSyntaxError, ValidationError
from .planner import ELAPSED, AbstractionEdge, Network, UtilityFunction, UtilityTerm
from .worldmodel import Fluent, StateDistribution, Vocabulary, parse_sentence_tokens, parse_value

NAME = r"[A-Za-z_][A-Za-z0-9_\-.|+]*"
_FLUENT_SET = re.compile(rf"^fluent\s+({NAME})\s*\{{(.*)\}}\s*$")
_FLUENT_RANGE = re.compile(rf"^fluent\s+({NAME})\s+(-?\d+)\s*\.\.\s*(-?\d+)\s*$")
_ACTION = re.compile(rf"^action\s+({NAME})(?:\s+dur\s+(\d+))?(?:\s+abstract\s+(\w+))?\s*$")
_BRANCH = re.compile(rf"^branch\s+({NAME})\s+when\s+(.+?)\s+prob\s+(.+?)\s+effect\s+(.+)$")
_ABSTRACT = re.compile(rf"^abstract\s+({NAME})\s+(\w+)\s+from\s+(.+)$")
_DECOMPOSE = re.compile(rf"^decompose\s+({NAME})\s*:\s*(.+)$")
_ROOT = re.compile(rf"^root\s+({NAME})\s*$")
_NUMBER = re.compile(r"^-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?$")


@dataclass
class DomainFile:
    vocab: Vocabulary
    initial: StateDistribution | None = None
    actions: list = field(default_factory=list)
    abstractions: list = field(default_factory=list)
    decompositions: dict = field(default_factory=dict)
    root: str | None = None
    utility: UtilityFunction | None = None

    def __eq__(self, other):
        if not isinstance(other, DomainFile):
            return NotImplemented
        return (self.vocab == other.vocab and self.initial == other.initial and self.actions == other.actions
                and self.abstractions == other.abstractions
                and list(self.decompositions.items()) == list(other.decompositions.items())
                and self.root == other.root and self.utility == other.utility)

    def network(self) -> Network:
        return Network(self.vocab, self.actions, self.abstractions, self.decompositions, self.root)

    def descriptions(self) -> dict:
        """Every named action, including those derived from abstraction declarations."""
        return self.network().descriptions

    def action(self, name) -> ActionDescription:
        descs = self.descriptions()
        if name not in descs:
            raise ValidationError(f"no action named {name!r}")
        return descs[name]


# ----------------------------------------------------------------------------
# Parsing


class _Lines:
    def __init__(self, text):
        self.rows = []
        for i, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.split("#", 1)[0].rstrip()
            if stripped.strip():
                indent = len(stripped) - len(stripped.lstrip())
                self.rows.append((i, indent, stripped.strip()))
        self.pos = 0

    def next(self):
        row = self.rows[self.pos]
        self.pos += 1
        return row

    def done(self):
        return self.pos >= len(self.rows)

    def block(self, opener_line, what):
        """Lines up to the matching ``end``."""
        out = []
        while not self.done():
            n, ind, body = self.next()
            if body == "end":
                return out
            out.append((n, ind, body))
        raise DomainSyntaxError(f"{what} block is missing 'end'", opener_line)


def parse_domain(text: str) -> DomainFile:
    """Parse domain text; syntax problems raise DomainSyntaxError, semantic ones ValidationError."""
    rows = _Lines(text)
    fluents = []
    while not rows.done() and rows.rows[rows.pos][2].split()[0] == "fluent":
        n, ind, body = rows.next()
        fluents.append(_parse_fluent(n, ind, body))
    if not fluents:
        first = rows.rows[0][0] if rows.rows else 1
        raise DomainSyntaxError("missing vocabulary: declare at least one fluent first", first, 1)
    try:
        vocab = Vocabulary(fluents)
    except ValidationError as exc:
        raise ValidationError(f"vocabulary: {exc}") from None
    dom = DomainFile(vocab)
    while not rows.done():
        n, ind, body = rows.next()
        head = body.split()[0]
        if head == "initial":
            if dom.initial is not None:
                raise DomainSyntaxError("initial distribution given twice", n, 1)
            dom.initial = _parse_initial(vocab, n, rows.block(n, "initial"))
        elif head == "action":
            dom.actions.append(_parse_action(vocab, n, ind, body, rows.block(n, "action")))
        elif head == "abstract":
            dom.abstractions.append(_parse_abstraction(n, ind, body, rows.block(n, "abstract")))
        elif head == "decompose":
            m = _DECOMPOSE.match(body)
            if not m:
                raise DomainSyntaxError("expected 'decompose TASK : item item ...'", n, ind + 1)
            if m.group(1) in dom.decompositions:
                raise DomainSyntaxError(f"task {m.group(1)!r} decomposed twice", n, ind + 1)
            dom.decompositions[m.group(1)] = tuple(m.group(2).split())
        elif head == "root":
            m = _ROOT.match(body)
            if not m:
                raise DomainSyntaxError("expected 'root TASK'", n, ind + 1)
            dom.root = m.group(1)
        elif head == "fluent":
            raise DomainSyntaxError("fluent declarations must come first", n, ind + 1)
        elif head == "utility":
            if dom.utility is not None:
                raise DomainSyntaxError("utility given twice", n, 1)
            dom.utility = _parse_utility(vocab, n, rows.block(n, "utility"))
        else:
            raise DomainSyntaxError(f"unknown declaration {head!r}", n, ind + 1)
    names = [a.name for a in dom.actions] + [e.name for e in dom.abstractions]
    dup = sorted({x for x in names if names.count(x) > 1})
    if dup:
        raise ValidationError(f"duplicate action names {dup}")
    for a in dom.actions:
        if a.concrete:
            check_concrete(a, vocab)
    if dom.utility is not None:
        dom.utility.validate(vocab)
    return dom


def _parse_fluent(n, ind, body):
    m = _FLUENT_RANGE.match(body)
    if m:
        lo, hi = int(m.group(2)), int(m.group(3))
        if lo > hi:
            raise ValidationError(f"line {n}: fluent {m.group(1)!r} has an empty range")
        return Fluent.int_range(m.group(1), lo, hi)
    m = _FLUENT_SET.match(body)
    if m:
        vals = [v.strip() for v in m.group(2).split(",") if v.strip()]
        for v in vals:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v):
                raise DomainSyntaxError(f"bad symbolic value {v!r}", n, ind + body.index(v) + 1)
        if not vals:
            raise ValidationError(f"line {n}: fluent {m.group(1)!r} has an empty domain")
        return Fluent.symbolic(m.group(1), vals)
    raise DomainSyntaxError("expected 'fluent NAME {v1, v2, ...}' or 'fluent NAME lo..hi'", n, ind + 1)


def _assignment(vocab, n, ind, text, start):
    out = {}
    for m in re.finditer(r"(\S+?)=(\S+)", text):
        name, raw = m.group(1), m.group(2)
        col = ind + start + m.start() + 1
        if name not in vocab:
            raise DomainSyntaxError(f"unknown fluent {name!r}", n, col)
        f = vocab[name]
        val = int(raw) if f.numeric and re.fullmatch(r"-?\d+", raw) else raw
        if not f.contains(val):
            raise ValidationError(f"line {n}: value {raw!r} outside the domain of {name!r}")
        out[name] = val
    leftover = re.sub(r"(\S+?)=(\S+)", "", text).strip()
    if leftover:
        raise DomainSyntaxError(f"expected NAME=VALUE pairs, found {leftover!r}", n, ind + start + text.index(leftover) + 1)
    return out


def _parse_initial(vocab, opener, rows):
    given = {}
    pairs = []
    for n, ind, body in rows:
        if body.startswith("given"):
            given.update(_assignment(vocab, n, ind, body[5:], 5))
            continue
        parts = body.split(None, 1)
        if not _NUMBER.match(parts[0]):
            raise DomainSyntaxError("expected 'PROBABILITY NAME=VALUE ...'", n, ind + 1)
        p = float(parts[0])
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"line {n}: probability {p} outside [0, 1]")
        assign = _assignment(vocab, n, ind, parts[1] if len(parts) > 1 else "", len(parts[0]) + 1)
        pairs.append((n, p, assign))
    if not pairs:
        raise ValidationError(f"line {opener}: initial distribution lists no states")
    items = []
    for n, p, assign in pairs:
        full = dict(given, **assign)
        try:
            items.append((vocab.state(full), p))
        except ValidationError as exc:
            raise ValidationError(f"line {n}: {exc}") from None
    try:
        return StateDistribution(tuple(items))
    except ValidationError as exc:
        raise ValidationError(f"line {opener}: {exc}") from None


def _parse_action(vocab, n, ind, body, rows):
    m = _ACTION.match(body)
    if not m:
        raise DomainSyntaxError("expected 'action NAME [dur D] [abstract METHOD]'", n, ind + 1)
    name, dur, method = m.group(1), int(m.group(2) or 1), m.group(3)
    if method is not None and method not in METHODS:
        raise ValidationError(f"line {n}: unknown abstraction method {method!r}")
    branches = []
    for bn, bind, bbody in rows:
        bm = _BRANCH.match(bbody)
        if not bm:
            raise DomainSyntaxError("expected 'branch LABEL when CONDITION prob P effect EFFECTS'", bn, bind + 1)
        cond = _parse_condition(vocab, bn, bind + bm.start(2), bm.group(2))
        prob = _parse_prob(bn, bind + bm.start(3), bm.group(3))
        effect = _parse_effect(vocab, bn, bind + bm.start(4), bm.group(4))
        try:
            branches.append(Branch(cond, prob, effect, bm.group(1)))
        except ValidationError as exc:
            raise ValidationError(f"line {bn}: {exc}") from None
    if not branches:
        raise ValidationError(f"line {n}: action {name!r} has no branches")
    try:
        return ActionDescription(name, tuple(branches), dur, method)
    except ValidationError as exc:
        raise ValidationError(f"line {n}: {exc}") from None


def _stream(text, n, offset):
    return TokenStream(tokenize(text, n, offset), n)


def _parse_condition(vocab, n, offset, text):
    ts = _stream(text, n, offset)
    if ts.accept("["):
        items = [parse_sentence_tokens(ts, vocab)]
        while ts.accept(","):
            items.append(parse_sentence_tokens(ts, vocab))
        ts.expect("]")
        cond = CondList(tuple(items))
    elif ts.at("conj") and "conj" not in vocab:
        ts.next()
        ts.expect("(")
        conj = parse_sentence_tokens(ts, vocab)
        ts.expect(")")
        ts.expect("disj")
        ts.expect("(")
        disj = parse_sentence_tokens(ts, vocab)
        ts.expect(")")
        cond = ConjDisj(conj, disj)
    else:
        cond = Single(parse_sentence_tokens(ts, vocab))
    if not ts.done():
        raise ts.error(f"unexpected token {ts.peek().text!r} in condition")
    return cond


def _number(ts):
    neg = bool(ts.accept("-"))
    tok = ts.next()
    if tok.kind != "number":
        raise DomainSyntaxError(f"expected a number, found {tok.text!r}", ts.line, tok.col)
    return -float(tok.text) if neg else float(tok.text)


def _parse_prob(n, offset, text):
    ts = _stream(text, n, offset)
    try:
        if ts.accept("["):
            ps = [_number(ts)]
            while ts.accept(","):
                ps.append(_number(ts))
            ts.expect("]")
            prob = ProbList(tuple(ps))
        elif ts.accept("range"):
            ts.expect("(")
            lo = _number(ts)
            ts.expect(",")
            hi = _number(ts)
            ts.expect(")")
            prob = Range(lo, hi)
        else:
            prob = Point(_number(ts))
    except ValidationError as exc:
        raise ValidationError(f"line {n}, column {offset + 1}: {exc}") from None
    if not ts.done():
        raise ts.error(f"unexpected token {ts.peek().text!r} in probability")
    return prob


def _int(ts):
    neg = bool(ts.accept("-"))
    tok = ts.next()
    if tok.kind != "number" or not tok.text.isdigit():
        raise DomainSyntaxError(f"expected an integer, found {tok.text!r}", ts.line, tok.col)
    return -int(tok.text) if neg else int(tok.text)


def _parse_effect(vocab, n, offset, text):
    if text.strip() == "none":
        return Effect()
    items = {}
    pos = 0
    for chunk in text.split(";"):
        ts = _stream(chunk, n, offset + pos)
        pos += len(chunk) + 1
        if not chunk.strip():
            raise DomainSyntaxError("empty effect item", n, offset + pos)
        maybe = bool(ts.accept("maybe"))
        tok = ts.next()
        if tok.text not in vocab:
            raise DomainSyntaxError(f"unknown fluent {tok.text!r}", n, tok.col)
        name = tok.text
        if name in items:
            raise DomainSyntaxError(f"fluent {name!r} appears twice in one effect", n, tok.col)
        op = ts.next()
        if op.text == ":=":
            c = Exact(parse_value(ts))
        elif op.text == "in":
            ts.expect("{")
            vals = [parse_value(ts)]
            while ts.accept(","):
                vals.append(parse_value(ts))
            ts.expect("}")
            c = AmongSet(frozenset(vals))
        elif op.text in ("+=", "-="):
            sign = 1 if op.text == "+=" else -1
            if ts.accept("["):
                lo = _int(ts)
                ts.expect(",")
                hi = _int(ts)
                ts.expect("]")
                lo, hi = sorted((sign * lo, sign * hi))
                c = RelativeExact(lo) if lo == hi else RelativeRange(lo, hi)
            else:
                c = RelativeExact(sign * _int(ts))
        elif op.text == "any":
            c = Unconstrained()
        else:
            raise DomainSyntaxError(f"expected ':=', 'in', '+=', '-=' or 'any', found {op.text!r}", n, op.col)
        if not ts.done():
            raise ts.error(f"unexpected token {ts.peek().text!r} in effect")
        items[name] = MaybeUnchanged(c) if maybe else c
    effect = Effect.of(items)
    try:
        effect.validate(vocab)
    except ValidationError as exc:
        raise ValidationError(f"line {n}: {exc}") from None
    return effect


def _parse_abstraction(n, ind, body, rows):
    m = _ABSTRACT.match(body)
    if not m:
        raise DomainSyntaxError("expected 'abstract NAME METHOD from INSTANCE ...'", n, ind + 1)
    name, method, insts = m.group(1), m.group(2), tuple(m.group(3).split())
    if method not in METHODS:
        raise ValidationError(f"line {n}: unknown abstraction method {method!r}")
    groups = []
    for gn, gind, gbody in rows:
        if not gbody.startswith("group "):
            raise DomainSyntaxError("expected 'group LABEL, LABEL, ...'", gn, gind + 1)
        members = tuple(x.strip() for x in gbody[6:].split(","))
        if not all(members):
            raise DomainSyntaxError("empty member in group", gn, gind + 7)
        groups.append(members)
    return AbstractionEdge(name, method, insts, GroupingPlan(tuple(groups)) if groups else None)


def _parse_utility(vocab, opener, rows):
    terms = []
    for n, ind, body in rows:
        parts = body.split()
        name = parts[0]
        if name != ELAPSED and name not in vocab:
            raise ValidationError(f"line {n}: utility refers to unknown fluent {name!r}")
        if len(parts) >= 2 and parts[1] == "table":
            f = vocab[name]
            table = []
            for entry in parts[2:]:
                if "=" not in entry:
                    raise DomainSyntaxError(f"expected VALUE=NUMBER, found {entry!r}", n, ind + body.index(entry) + 1)
                v, y = entry.split("=", 1)
                if not f.contains(v):
                    raise ValidationError(f"line {n}: value {v!r} outside the domain of {name!r}")
                table.append((v, _float(y, n, ind + body.index(entry) + 1)))
            terms.append(UtilityTerm(name, 1.0, table=tuple(table)))
            continue
        if len(parts) < 2:
            raise DomainSyntaxError("expected 'FLUENT WEIGHT [points (x,y) ...]' or 'FLUENT table V=U ...'", n, ind + 1)
        weight = _float(parts[1], n, ind + body.index(parts[1]) + 1)
        points = ()
        rest = body.split(None, 2)[2] if len(parts) > 2 else ""
        if rest:
            if not rest.startswith("points"):
                raise DomainSyntaxError(f"unexpected {rest!r}", n, ind + body.index(rest) + 1)
            found = re.findall(r"\(\s*(-?[\d.]+)\s*,\s*(-?[\d.eE+-]+)\s*\)", rest)
            if not found:
                raise DomainSyntaxError("expected points (x, y) ...", n, ind + body.index(rest) + 1)
            points = tuple((int(x), float(y)) for x, y in found)
        terms.append(UtilityTerm(name, weight, points=points))
    u = UtilityFunction(tuple(terms))
    try:
        u.validate(vocab)
    except ValidationError as exc:
        raise ValidationError(f"line {opener}: {exc}") from None
    return u


def _float(text, n, col):
    if not _NUMBER.match(text):
        raise DomainSyntaxError(f"expected a number, found {text!r}", n, col)
    return float(text)


# ----------------------------------------------------------------------------
# Serialization


def _num(x):
    return repr(float(x))


def format_condition(cond):
    if isinstance(cond, Single):
        return str(cond.sentence)
    if isinstance(cond, CondList):
        return "[" + ", ".join(str(s) for s in cond.sentences) + "]"
    return f"conj({cond.conj}) disj({cond.disj})"


def format_prob(prob):
    if isinstance(prob, Point):
        return _num(prob.p)
    if isinstance(prob, ProbList):
        return "[" + ", ".join(_num(p) for p in prob.ps) + "]"
    return f"range({_num(prob.lo)}, {_num(prob.hi)})"


def format_effect(effect):
    if not effect.items:
        return "none"
    out = []
    for name, c in effect.items:
        prefix = ""
        if isinstance(c, MaybeUnchanged):
            prefix, c = "maybe ", c.inner
        if isinstance(c, Exact):
            body = f"{name} := {c.value}"
        elif isinstance(c, AmongSet):
            vals = sorted(c.values, key=lambda v: (0, v, "") if isinstance(v, int) else (1, 0, str(v)))
            body = f"{name} in {{{', '.join(str(v) for v in vals)}}}"
        elif isinstance(c, RelativeExact):
            body = f"{name} += {c.delta}" if c.delta >= 0 else f"{name} -= {-c.delta}"
        elif isinstance(c, RelativeRange):
            body = f"{name} += [{c.lo}, {c.hi}]"
        else:
            body = f"{name} any"
        out.append(prefix + body)
    return "; ".join(out)


def format_action(a: ActionDescription) -> str:
    head = f"action {a.name} dur {a.duration}" + (f" abstract {a.method}" if a.method else "")
    lines = [head]
    for b in a.branches:
        lines.append(f"  branch {b.label} when {format_condition(b.condition)} prob {format_prob(b.prob)} "
                     f"effect {format_effect(b.effect)}")
    lines.append("end")
    return "\n".join(lines)


def _fmt_value(v):
    return str(v)


def serialize(dom: DomainFile) -> str:
    out = []
    for f in dom.vocab.fluents:
        out.append(str(f))
    if dom.initial is not None:
        out.append("")
        out.append("initial")
        for s, p in dom.initial.items:
            vals = " ".join(f"{n}={_fmt_value(v)}" for n, v in zip(dom.vocab.names, s.values))
            out.append(f"  {_num(p)} {vals}")
        out.append("end")
    for a in dom.actions:
        out.append("")
        out.append(format_action(a))
    for e in dom.abstractions:
        out.append("")
        out.append(f"abstract {e.name} {e.method} from {' '.join(e.instances)}")
        for g in (e.grouping.groups if e.grouping else ()):
            out.append("  group " + ", ".join(m if isinstance(m, str) else f"{e.instances[m[0]]}:{m[1]}" for m in g))
        out.append("end")
    if dom.decompositions:
        out.append("")
        for t, items in dom.decompositions.items():
            out.append(f"decompose {t} : {' '.join(items)}")
    if dom.root is not None:
        out.append(f"root {dom.root}")
    if dom.utility is not None:
        out.append("")
        out.append("utility")
        for t in dom.utility.terms:
            if t.table:
                out.append(f"  {t.fluent} table " + " ".join(f"{v}={_num(y)}" for v, y in t.table))
            elif t.points:
                out.append(f"  {t.fluent} {_num(t.weight)} points " + " ".join(f"({x}, {_num(y)})" for x, y in t.points))
            else:
                out.append(f"  {t.fluent} {_num(t.weight)}")
        out.append("end")
    return "\n".join(out) + "\n"


def load_domain(path) -> DomainFile:
    with open(path, encoding="utf-8") as fh:
        return parse_domain(fh.read())


def network_domain(net: Network, d0: StateDistribution, u: UtilityFunction) -> DomainFile:
    """Domain-file view of an in-memory network (e.g. a generated one)."""
    return DomainFile(net.vocab, d0, list(net.actions.values()), list(net.abstractions.values()),
                      dict(net.decompositions), net.root, u)
