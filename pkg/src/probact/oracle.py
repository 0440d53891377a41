"""Brute-force checks of abstraction soundness and planner admissibility.

Sentences over a finite vocabulary are identified with their model sets,
so "every sentence" means every subset of the state space.  Subsets are
encoded as bitmasks and the per-sentence projections are computed for all
of them at once with numpy.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import abstraction
from .abstraction import GroupingPlan
from .actions import (
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
    check_concrete,
)
from .chronicle import apply_effect, enumerate_chronicles
from .errors import BoundError, DomainOverflowError
from .projection import compile_action
from .worldmodel import (
    FALSE,
    TRUE,
    And,
    Atom,
    Fluent,
    Or,
    Ref,
    StateDistribution,
    Vocabulary,
    conjoin,
    disjoin,
    eq,
)

TOLERANCE = 1e-9
MAX_SENTENCE_STATES = 12
MAX_CHECK_STATES = 16
MAX_FLUENTS = 4
MAX_VALUES = 4
METHODS = ("intra1", "intra2", "inter1", "inter2")


# ----------------------------------------------------------------------------
# Sentences as model sets


def _state_index(vocab: Vocabulary):
    states = list(vocab.states())
    return states, {s: i for i, s in enumerate(states)}


def sentence_for_mask(vocab: Vocabulary, mask: int, states=None):
    """Canonical sentence whose models are the states selected by ``mask``."""
    states = states or list(vocab.states())
    terms = []
    for i, s in enumerate(states):
        if mask >> i & 1:
            terms.append(conjoin([eq(n, v) for n, v in zip(vocab.names, s.values)]))
    if len(terms) == len(states):
        return TRUE
    return disjoin(terms)


def all_sentences(v: Vocabulary, max_states: int = MAX_SENTENCE_STATES):
    """One sentence per subset of states, in bitmask order (index 0 is FALSE)."""
    n = v.state_count
    if n > max_states:
        raise BoundError(f"{n} states give 2^{n} sentences; the limit is {max_states} states")
    states = list(v.states())
    return [sentence_for_mask(v, m, states) for m in range(1 << n)]


# ----------------------------------------------------------------------------
# Cases and reports


@dataclass(frozen=True)
class VerificationCase:
    vocab: Vocabulary
    instances: tuple  # concrete actions; one for intra-action methods
    grouping: GroupingPlan
    method: str
    d0: StateDistribution
    seed: object = None
    abstract: ActionDescription | None = None  # override, e.g. a corrupted abstraction

    def build(self) -> ActionDescription:
        if self.abstract is not None:
            return self.abstract
        src = self.instances[0] if self.method.startswith("intra") else list(self.instances)
        return abstraction.abstract(self.method, src, self.grouping)


@dataclass(frozen=True)
class Failure:
    case: object
    method: str
    instance: str
    phi: str
    concrete: float
    interval: tuple

    def describe(self, precision=6):
        lo, hi = self.interval
        return (f"case {self.case} [{self.method}] instance {self.instance}: P({self.phi}) = "
                f"{self.concrete:.{precision}f} outside [{lo:.{precision}f}, {hi:.{precision}f}]")


@dataclass
class VerificationReport:
    cases_run: int = 0
    failures: list = field(default_factory=list)
    elapsed: float = 0.0
    seed: object = None
    per_method: dict = field(default_factory=dict)

    @property
    def sound(self):
        return not self.failures

    @property
    def verdict(self):
        return "sound" if self.sound else "unsound"

    def merge(self, other: VerificationReport):
        self.cases_run += other.cases_run
        self.failures.extend(other.failures)
        self.elapsed += other.elapsed
        for k, v in other.per_method.items():
            self.per_method[k] = self.per_method.get(k, 0) + v
        return self

    def as_dict(self, precision=6, timing=False):
        out = {
            "cases_run": self.cases_run,
            "verdict": self.verdict,
            "seed": self.seed,
            "per_method": dict(sorted(self.per_method.items())),
            "failures": [
                f.describe(precision) if isinstance(f, Failure) else str(f) for f in self.failures
            ],
        }
        if timing:
            out["elapsed"] = round(self.elapsed, 3)
        return out


# ----------------------------------------------------------------------------
# Vectorised projection over every sentence


class _Space:
    def __init__(self, vocab: Vocabulary, max_states=MAX_CHECK_STATES):
        n = vocab.state_count
        if n > max_states:
            raise BoundError(f"{n} states exceed the exhaustive-check limit of {max_states}")
        self.states, self.index = _state_index(vocab)
        self.masks = np.arange(1 << n, dtype=np.int64)
        self.bits = ((self.masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
        self._cache = {}

    def mask_of(self, posts):
        m = 0
        for s in posts:
            m |= 1 << self.index[s]
        return m

    def inside(self, s_mask):
        """Indicator over sentences: every state of ``s_mask`` is a model."""
        key = ("in", s_mask)
        if key not in self._cache:
            self._cache[key] = ((self.masks & s_mask) == s_mask).astype(np.float64)
        return self._cache[key]

    def touches(self, s_mask):
        key = ("meet", s_mask)
        if key not in self._cache:
            self._cache[key] = ((self.masks & s_mask) != 0).astype(np.float64)
        return self._cache[key]


def concrete_vector(space: _Space, a: ActionDescription, d0: StateDistribution):
    """P(phi | a) for every sentence phi, computed by direct simulation."""
    w = np.zeros(len(space.states))
    for s, m in d0.support():
        for b in a.branches:
            if not b.condition.sentence.holds(s):
                continue
            post = dict(zip(s.vocab.names, s.values))
            for name, c in b.effect.items:
                post[name] = c.value if isinstance(c, Exact) else s[name] + c.delta
            w[space.index[s.vocab.state(post)]] += m * b.prob.p
    return space.bits @ w


def abstract_vectors(space: _Space, a: ActionDescription, d0: StateDistribution):
    """Lower and upper projection of the abstract action for every sentence."""
    lo_total = np.zeros(len(space.masks))
    hi_total = np.zeros(len(space.masks))
    for t in compile_action(a, d0):
        lo_vals = [p.coef * _part(space, p, space.inside) for p in t.lo_parts]
        hi_vals = [p.coef * _part(space, p, space.touches) for p in t.hi_parts]
        if t.combine == "sum":
            lo_total += np.sum(lo_vals, axis=0)
            hi_total += np.sum(hi_vals, axis=0)
        else:
            lo_total += np.min(lo_vals, axis=0)
            hi_total += np.max(hi_vals, axis=0)
    return np.clip(lo_total, 0.0, 1.0), np.clip(hi_total, 0.0, 1.0)


def _part(space, part, indicator):
    acc = np.zeros(len(space.masks))
    for mass, pairs in part.outcomes:
        acc += mass * indicator(space.mask_of(post for _, post in pairs))
    return acc


def check_abstraction(case: VerificationCase, space: _Space | None = None, max_failures=5) -> VerificationReport:
    """Every instance's concrete projection lies in the abstract interval, for every sentence."""
    t0 = time.perf_counter()
    space = space or _Space(case.vocab)
    abs_action = case.build()
    lo, hi = abstract_vectors(space, abs_action, case.d0)
    report = VerificationReport(cases_run=1, seed=case.seed, per_method={case.method: 1})
    for inst in case.instances:
        conc = concrete_vector(space, inst, case.d0)
        bad = np.nonzero((conc < lo - TOLERANCE) | (conc > hi + TOLERANCE))[0]
        for m in bad[:max_failures]:
            phi = sentence_for_mask(case.vocab, int(m), space.states)
            report.failures.append(Failure(case.seed, case.method, inst.name, str(phi), float(conc[m]),
                                           (float(lo[m]), float(hi[m]))))
    report.elapsed = time.perf_counter() - t0
    return report


def check_abstract_action(abs_action, instances, d0, vocab, method=None, seed=None):
    case = VerificationCase(vocab, tuple(instances), GroupingPlan(()), method or abs_action.method, d0, seed,
                            abs_action)
    return check_abstraction(case)


def method_ordering_violations(case: VerificationCase) -> int:
    """Sentences where the Method II interval fails to contain the Method I interval."""
    if case.method not in ("intra1", "inter1"):
        raise ValueError("ordering is checked from a Method I case")
    space = _Space(case.vocab)
    m1 = case.build()
    m2 = replace(case, method=case.method[:-1] + "2", abstract=None).build()
    lo1, hi1 = abstract_vectors(space, m1, case.d0)
    lo2, hi2 = abstract_vectors(space, m2, case.d0)
    return int(np.count_nonzero((lo2 > lo1 + TOLERANCE) | (hi2 < hi1 - TOLERANCE)))


# ----------------------------------------------------------------------------
# Random cases


def random_vocabulary(rng: random.Random, max_states=MAX_CHECK_STATES):
    while True:
        fluents = []
        for i in range(rng.randint(1, MAX_FLUENTS)):
            kind = rng.choice(("bool", "sym", "int"))
            name = f"f{i}"
            if kind == "bool":
                fluents.append(Fluent.boolean(name))
            elif kind == "sym":
                fluents.append(Fluent.symbolic(name, [f"v{j}" for j in range(rng.randint(2, MAX_VALUES))]))
            else:
                lo = rng.randint(0, 2)
                fluents.append(Fluent.int_range(name, lo, lo + rng.randint(1, MAX_VALUES - 1)))
        vocab = Vocabulary(fluents)
        if vocab.state_count <= max_states:
            return vocab


def random_distribution(vocab: Vocabulary, rng: random.Random):
    states = list(vocab.states())
    support = rng.sample(states, rng.randint(1, len(states)))
    weights = [rng.randint(1, 9) for _ in support]
    total = sum(weights)
    return StateDistribution.from_pairs((s, w / total) for s, w in zip(support, weights))


def _random_partition(vocab: Vocabulary, rng: random.Random):
    """Mutually exclusive, exhaustive conditions built from one or two fluents."""
    if rng.random() < 0.2:
        return [TRUE]
    chosen = rng.sample(vocab.fluents, min(len(vocab), rng.randint(1, 2)))
    per_fluent = []
    for f in chosen:
        vals = list(f.domain)
        rng.shuffle(vals)
        cut = sorted(rng.sample(range(1, len(vals)), rng.randint(0, len(vals) - 1)))
        blocks = [vals[i:j] for i, j in zip([0] + cut, cut + [len(vals)])]
        per_fluent.append([_block_atom(f, b) for b in blocks])
    conds = per_fluent[0]
    for more in per_fluent[1:]:
        conds = [conjoin([a, b]) for a in conds for b in more]
    return conds


def _block_atom(f: Fluent, block):
    if len(block) == f.size:
        return TRUE
    if len(block) == 1:
        return eq(f.name, block[0])
    return Atom(Ref(f.name), "in", frozenset(block))


def _random_effect(vocab, cond, rng, pres):
    for _ in range(20):
        items = {}
        for f in rng.sample(vocab.fluents, rng.randint(0, min(2, len(vocab)))):
            if f.numeric and rng.random() < 0.5:
                items[f.name] = RelativeExact(rng.choice([-1, 1, 2]))
            else:
                items[f.name] = Exact(rng.choice(list(f.domain)))
        e = Effect.of(items)
        try:
            for s in pres:
                apply_effect(s, e)
        except DomainOverflowError:
            continue
        return e
    return Effect()


def random_concrete_action(vocab: Vocabulary, rng: random.Random, name="a", max_branches=3):
    states = list(vocab.states())
    branches = []
    k = 0
    for cond in _random_partition(vocab, rng):
        pres = [s for s in states if cond.holds(s)]
        effects = []
        for _ in range(rng.randint(1, max_branches)):
            e = _random_effect(vocab, cond, rng, pres)
            if e not in effects:
                effects.append(e)
        weights = [rng.randint(1, 9) for _ in effects]
        total = sum(weights)
        probs = [w / total for w in weights]
        probs[-1] = 1.0 - math.fsum(probs[:-1])
        for e, p in zip(effects, probs):
            branches.append(Branch(Single(cond), Point(p), e, f"{name}{k}"))
            k += 1
    a = ActionDescription(name, tuple(branches))
    check_concrete(a, vocab)
    return a


def _random_groups(items, rng):
    rng.shuffle(items)
    groups = []
    for it in items:
        if groups and rng.random() < 0.5:
            rng.choice(groups).append(it)
        else:
            groups.append([it])
    return groups


def random_case(method: str, rng: random.Random, seed=None) -> VerificationCase:
    vocab = random_vocabulary(rng)
    d0 = random_distribution(vocab, rng)
    if method.startswith("intra"):
        a = random_concrete_action(vocab, rng, "a")
        g = GroupingPlan.of(_random_groups([b.label for b in a.branches], rng))
        return VerificationCase(vocab, (a,), g, method, d0, seed)
    instances = tuple(random_concrete_action(vocab, rng, f"x{i}") for i in range(rng.randint(2, 3)))
    width = max(len(a.branches) for a in instances) + rng.randint(0, 1)
    slots = [[] for _ in range(width)]
    for k, a in enumerate(instances):
        for pos, b in zip(rng.sample(range(width), len(a.branches)), a.branches):
            slots[pos].append((k, b.label))
    g = GroupingPlan.of([s for s in slots if s])
    return VerificationCase(vocab, instances, g, method, d0, seed)


def run_suite(methods=METHODS, cases=1000, seed=0, check=check_abstraction) -> VerificationReport:
    report = VerificationReport(seed=seed)
    t0 = time.perf_counter()
    for method in methods:
        for i in range(cases):
            case_seed = f"{seed}:{method}:{i}"
            case = random_case(method, random.Random(case_seed), case_seed)
            report.merge(check(case))
    report.elapsed = time.perf_counter() - t0
    return report


# ----------------------------------------------------------------------------
# Corrupted abstractions


MUTATIONS = ("narrow_probability", "strengthen_effect", "drop_disjunct")


def mutate(a: ActionDescription, kind: str, index: int = 0) -> ActionDescription:
    """Deliberately unsound variant of ``a`` (changes branch ``index``)."""
    branches = list(a.branches)
    b = branches[index]
    if kind == "narrow_probability":
        p = b.prob
        if isinstance(p, Point):
            new = Point(p.p / 2)
        elif isinstance(p, ProbList):
            new = ProbList(tuple(x / 2 for x in p.ps))
        else:
            new = Range(p.lo / 2, p.hi / 2)
        branches[index] = replace(b, prob=new)
    elif kind == "strengthen_effect":
        items = {}
        for n, c in b.effect.items:
            inner = c.inner if isinstance(c, MaybeUnchanged) else c
            if isinstance(inner, AmongSet):
                inner = Exact(sorted(inner.values, key=str)[0])
            elif isinstance(inner, RelativeRange):
                inner = RelativeExact(inner.lo)
            items[n] = inner
        branches[index] = replace(b, effect=Effect.of(items))
    elif kind == "drop_disjunct":
        cond = b.condition
        if isinstance(cond, ConjDisj):
            new = ConjDisj(FALSE, _drop(cond.disj))
            branches[index] = replace(b, condition=new)
        elif isinstance(cond, CondList):
            sents = list(cond.sentences)
            sents[0] = FALSE
            branches[index] = replace(b, condition=CondList(tuple(sents)))
        else:
            branches[index] = replace(b, condition=Single(_drop(cond.sentence)))
    else:
        raise ValueError(f"unknown mutation {kind!r}")
    return replace(a, branches=tuple(branches))


def _drop(s):
    if isinstance(s, Or):
        return disjoin(s.args[1:])
    return FALSE


# ----------------------------------------------------------------------------
# Planner admissibility


def exact_plan_eu(plan_actions, d0, u) -> float:
    """Expected utility of a concrete plan by enumerating its chronicles."""
    chron = enumerate_chronicles(plan_actions, d0)
    return math.fsum(c.probability.lo * u(c.final, c.elapsed) for c in chron)


def exhaustive_optimum(net, d0, u, root=None, bound=10000, tie_epsilon=1e-9):
    """(best EU, sorted argmax plans, {plan: EU}) over every concrete plan."""
    count = net.concrete_plan_count(root)
    if count > bound:
        raise BoundError(f"{count} concrete plans exceed the bound of {bound}")
    values = {}
    for plan in net.concrete_plans(root):
        values[plan] = exact_plan_eu([net.descriptions[n] for n in plan], d0, u)
    best = max(values.values())
    winners = sorted(p for p, v in values.items() if v >= best - tie_epsilon)
    return best, winners, values


def check_planner(net, d0, u, root=None, bound=10000, seed=None) -> VerificationReport:
    """Search result equals the exhaustive argmax set; pruned plans are truly dominated."""
    from .planner import search

    t0 = time.perf_counter()
    best, winners, values = exhaustive_optimum(net, d0, u, root, bound)
    found, stats = search(net, d0, u, root)
    report = VerificationReport(cases_run=1, seed=seed, per_method={"planner": 1})
    got = sorted(p.items for p in found)
    if got != winners:
        report.failures.append(f"search returned {got}, exhaustive argmax is {winners} (EU {best:.9g})")
    for p in found:
        if not p.eu.contains(values[p.items], 1e-7):
            report.failures.append(f"plan {p.items}: interval {tuple(p.eu)} misses exact EU {values[p.items]}")
    for plan, best_lo in stats.pruned:
        for inst in net.instantiations(plan.items):
            if values[inst] > best_lo + 1e-7:
                report.failures.append(f"pruned {plan.items} but refinement {inst} has EU {values[inst]} "
                                       f"above {best_lo}")
                break
    for parent, child in stats.refinements:
        if not parent.contains(child, 1e-7):
            report.failures.append(f"child interval {tuple(child)} escapes parent {tuple(parent)}")
    report.elapsed = time.perf_counter() - t0
    return report
