"""Refinement planning over an abstraction/decomposition network.

Plans mix abstract and concrete actions.  Each plan gets an expected-utility
interval that contains the expected utility of every concrete plan it can
be refined into; plans whose upper bound falls below another plan's lower
bound are discarded, and survivors are refined until only concrete plans
remain.
"""

from __future__ import annotations

import graphlib
import itertools
import math
from dataclasses import dataclass, field

from . import abstraction
from .abstraction import GroupingPlan, _constraint, _join, _normal
from .actions import (
    ActionDescription,
    AmongSet,
    Branch,
    CondList,
    ConjDisj,
    Effect,
    Exact,
    MaybeUnchanged,
    Range,
    RelativeExact,
    RelativeRange,
    Single,
    Unconstrained,
    check_concrete,
)
from .chronicle import Envelope, step
from .errors import NothingToRefine, ValidationError
from .worldmodel import FALSE, TRUE, Interval, StateDistribution, Vocabulary, conjoin, disjoin

TIE_EPSILON = 1e-9
ELAPSED = "elapsed"


# ----------------------------------------------------------------------------
# Utility


@dataclass(frozen=True)
class UtilityTerm:
    """``weight * g(x)`` where g is the identity, a piecewise-linear curve or a lookup table."""

    fluent: str
    weight: float = 1.0
    points: tuple = ()
    table: tuple = ()

    def shape(self, x):
        if self.table:
            return dict(self.table).get(x, 0.0)
        if self.points:
            pts = self.points
            if x <= pts[0][0]:
                return pts[0][1]
            if x >= pts[-1][0]:
                return pts[-1][1]
            for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
                if x0 <= x <= x1:
                    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        return x

    def value(self, x):
        return self.weight * self.shape(x)

    def bounds(self, candidates):
        vals = [self.value(x) for x in candidates]
        return min(vals), max(vals)

    def candidates(self, lo, hi):
        """Points where a piecewise-linear term attains its extremes on [lo, hi]."""
        xs = {lo, hi}
        xs.update(x for x, _ in self.points if lo < x < hi)
        return xs


@dataclass(frozen=True)
class UtilityFunction:
    """Additive utility over final fluent values and elapsed time."""

    terms: tuple

    def validate(self, vocab: Vocabulary):
        for t in self.terms:
            if t.fluent == ELAPSED:
                continue
            f = vocab[t.fluent]
            if not f.numeric and not t.table:
                raise ValidationError(f"utility term on symbolic fluent {t.fluent!r} needs a value table")
            if f.numeric and t.table:
                raise ValidationError(f"utility term on numeric fluent {t.fluent!r} cannot use a table")
            xs = [x for x, _ in t.points]
            if xs != sorted(xs) or len(set(xs)) != len(xs):
                raise ValidationError(f"utility curve for {t.fluent!r} needs strictly increasing breakpoints")

    def __call__(self, state, elapsed=0):
        return math.fsum(t.value(elapsed if t.fluent == ELAPSED else state[t.fluent]) for t in self.terms)

    def bounds(self, env: Envelope, elapsed=0):
        lo = hi = 0.0
        for t in self.terms:
            if t.fluent == ELAPSED:
                v = t.value(elapsed)
                lo += v
                hi += v
                continue
            part = env.bounds(t.fluent)
            if isinstance(part, tuple):
                tlo, thi = t.bounds(t.candidates(*part))
            else:
                tlo, thi = t.bounds(part)
            lo += tlo
            hi += thi
        return lo, hi


# ----------------------------------------------------------------------------
# Sequential summaries for decomposed tasks


def _as_pair(b: Branch, method):
    cond, prob = b.condition, b.prob
    if isinstance(cond, ConjDisj):
        return cond.conj, cond.disj, prob.lo, prob.hi
    if isinstance(cond, Single):
        return cond.sentence, cond.sentence, prob.lo, prob.hi
    if method == "inter1":
        return conjoin(cond.sentences), disjoin(cond.sentences), min(prob.ps), max(prob.ps)
    summed = {}
    for c, p in zip(cond.sentences, prob.ps):
        summed[c] = summed.get(c, 0.0) + p
    reach = disjoin(list(summed))
    return reach, reach, min(summed.values()), max(summed.values())


def compose_constraints(first, second):
    """Constraint describing ``first`` followed by ``second`` on one fluent (None = unchanged)."""
    if second is None:
        return first
    if first is None:
        return second
    if isinstance(second, MaybeUnchanged):
        return _constraint(_join(_normal(first), _normal(compose_constraints(first, second.inner))))
    if isinstance(second, (Exact, AmongSet, Unconstrained)):
        return second
    lo, hi = (second.delta, second.delta) if isinstance(second, RelativeExact) else (second.lo, second.hi)
    if isinstance(first, MaybeUnchanged):
        return _constraint(_join(_normal(second), _normal(compose_constraints(first.inner, second))))
    if isinstance(first, Unconstrained):
        return first
    if isinstance(first, (Exact, AmongSet)):
        base = [first.value] if isinstance(first, Exact) else list(first.values)
        vals = frozenset(v + d for v in base for d in range(lo, hi + 1))
        return Exact(next(iter(vals))) if len(vals) == 1 else AmongSet(vals)
    flo, fhi = (first.delta, first.delta) if isinstance(first, RelativeExact) else (first.lo, first.hi)
    lo, hi = flo + lo, fhi + hi
    return RelativeExact(lo) if lo == hi else RelativeRange(lo, hi)


def compose_effects(e1: Effect, e2: Effect) -> Effect:
    out = {}
    for n in sorted(set(e1.fluents()) | set(e2.fluents())):
        c = compose_constraints(e1.get(n), e2.get(n))
        if c is not None:
            out[n] = c
    return Effect.of(out)


def compose(actions, name: str) -> ActionDescription:
    """Single abstract description covering the sequential execution of ``actions``.

    Branch probabilities multiply; the lower bound survives only when the
    later branch fires unconditionally, because later conditions are
    evaluated on intermediate states the summary does not track.
    """
    actions = list(actions)
    if not actions:
        raise ValidationError(f"task {name!r} has an empty decomposition")
    rows = [(b.label, *_as_pair(b, actions[0].method), b.effect) for b in actions[0].branches]
    for a in actions[1:]:
        nxt = []
        for la, ca, da, loa, hia, ea in rows:
            for b in a.branches:
                cb, db, lob, hib = _as_pair(b, a.method)
                hi = hia * hib
                if hi <= 0.0 or da == FALSE:
                    continue
                conj = ca if cb == TRUE else FALSE
                lo = loa * lob if conj != FALSE else 0.0
                nxt.append((f"{la}.{b.label}", conj, da, lo, hi, compose_effects(ea, b.effect)))
        rows = nxt
    branches = tuple(Branch(ConjDisj(c, d), Range(lo, hi), e, lbl) for lbl, c, d, lo, hi, e in rows)
    return ActionDescription(name, branches, sum(a.duration for a in actions), "inter2")


# ----------------------------------------------------------------------------
# Network


@dataclass(frozen=True)
class AbstractionEdge:
    name: str
    method: str
    instances: tuple
    grouping: GroupingPlan | None = None


class Network:
    """Abstraction/decomposition network with derived action descriptions."""

    def __init__(self, vocab: Vocabulary, actions, abstractions=(), decompositions=None, root=None, params=None):
        self.vocab = vocab
        self.actions = {a.name: a for a in actions}
        self.abstractions = {e.name: e for e in abstractions}
        self.decompositions = {k: tuple(v) for k, v in (decompositions or {}).items()}
        self.params = params
        names = list(self.actions) + list(self.abstractions) + list(self.decompositions)
        if len(set(names)) != len(names):
            raise ValidationError("network node names must be unique")
        for task, subs in self.decompositions.items():
            if not subs:
                raise ValidationError(f"task {task!r} has an empty decomposition")
        deps = {}
        for e in self.abstractions.values():
            deps[e.name] = set(e.instances)
        for t, subs in self.decompositions.items():
            deps[t] = set(subs)
        for n, ds in deps.items():
            for d in ds:
                if d not in self.actions and d not in self.abstractions and d not in self.decompositions:
                    raise ValidationError(f"{n!r} refers to unknown node {d!r}")
        try:
            order = list(graphlib.TopologicalSorter(deps).static_order())
        except graphlib.CycleError as exc:
            raise ValidationError(f"network cycle through {exc.args[1]}") from None
        for a in self.actions.values():
            if a.concrete:
                check_concrete(a, vocab)
        self.descriptions = dict(self.actions)
        for n in order:
            if n in self.decompositions:
                subs = [self.descriptions[s] for s in self.decompositions[n]]
                self.descriptions[n] = compose(subs, n) if len(subs) > 1 else _renamed(subs[0], n)
            elif n in self.abstractions:
                e = self.abstractions[n]
                if e.method.startswith("intra") and len(e.instances) != 1:
                    raise ValidationError(f"intra-action abstraction {n!r} must have exactly one source")
                srcs = [self.descriptions[i] for i in e.instances]
                g = e.grouping
                if g is not None and e.method.startswith("inter"):
                    g = GroupingPlan.of([abstraction.resolve_members(grp, srcs) for grp in g.groups])
                self.descriptions[n] = abstraction.abstract(e.method, srcs, g, n)
        if root is None:
            root = next(iter(self.decompositions), None)
        if root is not None and root not in self.descriptions:
            raise ValidationError(f"root task {root!r} is not in the network")
        self.root = root

    def is_task(self, name):
        return name in self.decompositions

    def is_abstract(self, name):
        return name in self.abstractions

    def is_concrete(self, name):
        return name in self.actions and self.actions[name].concrete

    def refinable(self, name):
        return name in self.abstractions or name in self.decompositions

    def expansion(self, name):
        """Items that replace instance ``name`` when an abstract action is refined to it."""
        return self.decompositions.get(name, (name,))

    def root_items(self, root=None):
        root = root or self.root
        if root is None:
            raise ValidationError("network has no root task to plan for")
        if root not in self.descriptions:
            raise ValidationError(f"root task {root!r} is not in the network")
        return self.decompositions.get(root, (root,))

    # counting

    def completions(self, name) -> int:
        if name in self.abstractions:
            return sum(self._seq_completions(self.expansion(i)) for i in self.abstractions[name].instances)
        if name in self.decompositions:
            return self._seq_completions(self.decompositions[name])
        return 1

    def _seq_completions(self, items):
        return math.prod(self.completions(i) for i in items)

    def concrete_plan_count(self, root=None) -> int:
        return self._seq_completions(self.root_items(root))

    def refinement_tree_size(self, root=None) -> int:
        """Plans evaluated by left-to-right refinement when nothing is ever pruned."""
        return self._seq_tree(self.root_items(root))

    def _tree(self, name):
        if name in self.abstractions:
            return sum(1 + self._seq_tree(self.expansion(i)) for i in self.abstractions[name].instances)
        if name in self.decompositions:
            return 1 + self._seq_tree(self.decompositions[name])
        return 0

    def _seq_tree(self, items):
        if not items:
            return 0
        return self._tree(items[0]) + self.completions(items[0]) * self._seq_tree(items[1:])

    def concrete_plans(self, root=None):
        """Every fully concrete plan (as a tuple of action names)."""
        return self._seq_plans(self.root_items(root))

    def instantiations(self, items):
        """Concrete plans reachable by refining the plan ``items``."""
        return self._seq_plans(tuple(items))

    def _plans(self, name):
        if name in self.abstractions:
            for inst in self.abstractions[name].instances:
                yield from self._seq_plans(self.expansion(inst))
        elif name in self.decompositions:
            yield from self._seq_plans(self.decompositions[name])
        else:
            yield (name,)

    def _seq_plans(self, items):
        if not items:
            yield ()
            return
        for head in self._plans(items[0]):
            for tail in self._seq_plans(items[1:]):
                yield head + tail


def _renamed(a: ActionDescription, name):
    return ActionDescription(name, a.branches, a.duration, a.method)


# ----------------------------------------------------------------------------
# Plans and expected utility


@dataclass(frozen=True)
class CandidatePlan:
    items: tuple
    actions: tuple
    eu: Interval | None = None
    depth: int = 0
    concrete: bool = False

    @property
    def names(self):
        return self.items

    def __str__(self):
        return " ; ".join(self.items)


def make_plan(net: Network, items, depth=0) -> CandidatePlan:
    items = tuple(items)
    return CandidatePlan(items, tuple(net.descriptions[i] for i in items), None, depth,
                         all(net.is_concrete(i) for i in items))


def _expect(rows, lower):
    """Extreme expectation over probability vectors in the box ``[lo, hi]`` summing to one."""
    base = math.fsum(lo * v for lo, _, v in rows)
    rem = 1.0 - math.fsum(lo for lo, _, _ in rows)
    if rem <= 0.0:
        return base
    for lo, hi, v in sorted(rows, key=lambda r: r[2], reverse=not lower):
        take = min(hi - lo, rem)
        if take > 0:
            base += take * v
            rem -= take
            if rem <= 0.0:
                break
    return base


def expected_utility(plan, d0: StateDistribution, u: UtilityFunction) -> Interval:
    """Interval containing the expected utility of every refinement of ``plan``."""
    actions = plan.actions if isinstance(plan, CandidatePlan) else tuple(plan)
    if not actions:
        raise ValidationError("plan is empty")
    vocab = d0.items[0][0].vocab
    u.validate(vocab)
    elapsed = sum(a.duration for a in actions)
    cache = {}

    def node(i, env):
        key = (i, env)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if i == len(actions):
            out = u.bounds(env, elapsed)
        else:
            rows = [(lo, hi, node(i + 1, nxt)) for _, lo, hi, nxt in step(actions[i], env)]
            if all(lo == hi and v[0] == v[1] for lo, hi, v in rows):
                val = math.fsum(lo * v[0] for lo, _, v in rows)
                out = (val, val)
            else:
                out = (_expect([(lo, hi, v[0]) for lo, hi, v in rows], True),
                       _expect([(lo, hi, v[1]) for lo, hi, v in rows], False))
        cache[key] = out
        return out

    lo = hi = 0.0
    for s0, p0 in d0.support():
        vlo, vhi = node(0, Envelope.from_state(s0))
        lo += p0 * vlo
        hi += p0 * vhi
    if hi < lo:
        lo = hi = (lo + hi) / 2
    return Interval(lo, hi)


def dominates(a: CandidatePlan, b: CandidatePlan, tie_epsilon=TIE_EPSILON) -> bool:
    """True when ``b`` can be discarded because ``a`` is certainly better."""
    return b.eu.hi < a.eu.lo - tie_epsilon


def refine(plan: CandidatePlan, net: Network) -> list[CandidatePlan]:
    """Children of ``plan`` obtained by refining its leftmost abstract action or task."""
    for pos, name in enumerate(plan.items):
        if net.is_abstract(name):
            options = [net.expansion(i) for i in net.abstractions[name].instances]
            break
        if net.is_task(name):
            options = [net.decompositions[name]]
            break
    else:
        raise NothingToRefine(f"plan {plan} is fully concrete")
    head, tail = plan.items[:pos], plan.items[pos + 1:]
    return [make_plan(net, head + tuple(opt) + tail, plan.depth + 1) for opt in options]


@dataclass
class SearchStats:
    plans_examined: int = 0
    total_concrete_plans: int = 0
    refinement_tree_size: int = 0
    pruned_per_level: dict = field(default_factory=dict)
    pruned_abstract: int = 0
    refinements: list = field(default_factory=list)  # (parent eu, child eu) pairs
    pruned: list = field(default_factory=list)  # (plan, best eu_lo at the time)
    params: tuple | None = None

    @property
    def examined_fraction(self):
        return self.plans_examined / self.refinement_tree_size if self.refinement_tree_size else 1.0

    @property
    def narrowing_violations(self):
        return sum(1 for p, c in self.refinements if not p.contains(c))

    def as_dict(self):
        return {
            "plans_examined": self.plans_examined,
            "total_concrete_plans": self.total_concrete_plans,
            "refinement_tree_size": self.refinement_tree_size,
            "examined_fraction": self.examined_fraction,
            "pruned_per_level": {str(k): v for k, v in sorted(self.pruned_per_level.items())},
            "pruned_abstract": self.pruned_abstract,
            "narrowing_violations": self.narrowing_violations,
            "params": list(self.params) if self.params else None,
        }


def _evaluate(plan, d0, u):
    return CandidatePlan(plan.items, plan.actions, expected_utility(plan, d0, u), plan.depth, plan.concrete)


def search(net: Network, d0: StateDistribution, u: UtilityFunction, root_task=None, tie_epsilon=TIE_EPSILON,
           prune=True):
    """Find every concrete plan of maximal expected utility.

    The initial plan is the root decomposition; it is evaluated for
    bookkeeping but only counted as examined when it is already concrete.
    With ``prune=False`` every refinement is explored (useful as a baseline).
    """
    stats = SearchStats(total_concrete_plans=net.concrete_plan_count(root_task),
                        refinement_tree_size=net.refinement_tree_size(root_task), params=net.params)
    root = _evaluate(make_plan(net, net.root_items(root_task)), d0, u)
    if root.concrete:
        stats.plans_examined = 1
        stats.refinement_tree_size = max(stats.refinement_tree_size, 1)
    frontier = [root]
    while True:
        best_lo = max(p.eu.lo for p in frontier)
        kept = []
        for p in frontier:
            if prune and p.eu.hi < best_lo - tie_epsilon:
                stats.pruned.append((p, best_lo))
                stats.pruned_per_level[p.depth] = stats.pruned_per_level.get(p.depth, 0) + 1
                if not p.concrete:
                    stats.pruned_abstract += 1
            else:
                kept.append(p)
        frontier = kept
        open_plans = [p for p in frontier if not p.concrete]
        if not open_plans:
            break
        pick = min(open_plans, key=lambda p: (-p.eu.hi, p.depth, p.items))
        frontier.remove(pick)
        for child in refine(pick, net):
            child = _evaluate(child, d0, u)
            stats.plans_examined += 1
            stats.refinements.append((pick.eu, child.eu))
            frontier.append(child)
    best = max(p.eu.lo for p in frontier)
    winners = sorted((p for p in frontier if p.eu.lo >= best - tie_epsilon), key=lambda p: (-p.eu.lo, p.items))
    return winners, stats


def ranked(plans):
    return sorted(plans, key=lambda p: (-p.eu.lo, p.items))


def maximal_pruning_bound(n: int, p: int, k: int) -> int:
    """Plans examined when exactly one child survives every refinement: n * (p + p^2 + ... + p^k)."""
    if min(n, p, k) < 1:
        raise ValidationError("n, p and k must be at least 1")
    return n * sum(p ** i for i in range(1, k + 1))


def exhaustive_plan_count(n: int, p: int, k: int) -> int:
    return n ** sum(p ** i for i in range(1, k + 1))
