"""Building abstract action descriptions.

Intra-action abstraction merges branches of one action; inter-action
abstraction merges analogous actions into one whose instances are the
alternatives.  Each comes in two flavours: Method I keeps per-member
condition/probability lists, Method II compresses them into a condition
(pair) and a probability range.  Grouped effects are replaced by their
least weakening in the per-fluent constraint lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

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
    Unconstrained,
)
from .errors import ValidationError
from .worldmodel import FALSE, Vocabulary, conjoin, disjoin, entails


@dataclass(frozen=True)
class GroupingPlan:
    """Partition of branch labels.

    For intra-action abstraction the members are plain labels.  For
    inter-action abstraction they are ``(instance index, label)`` pairs and
    each group takes at most one branch from each instance.
    """

    groups: tuple

    @classmethod
    def of(cls, groups):
        return cls(tuple(tuple(g) for g in groups))

    @classmethod
    def singletons(cls, a: ActionDescription):
        return cls(tuple((b.label,) for b in a.branches))

    @classmethod
    def by_position(cls, instances):
        width = max(len(a.branches) for a in instances)
        return cls(tuple(
            tuple((k, a.branches[i].label) for k, a in enumerate(instances) if i < len(a.branches))
            for i in range(width)))

    @classmethod
    def parse(cls, text: str, instances=None):
        """``"a,c;b,d"``.  With instances, members may be written ``name:label``."""
        groups = []
        for chunk in text.split(";"):
            members = [m.strip() for m in chunk.split(",") if m.strip()]
            if not members:
                raise ValidationError(f"empty group in grouping {text!r}")
            groups.append(members)
        if instances is None:
            return cls.of(groups)
        return cls.of([resolve_members(g, instances) for g in groups])


def resolve_members(members, instances):
    """Map ``label`` or ``instance:label`` spellings to ``(index, label)`` pairs."""
    out = []
    names = [a.name for a in instances]
    for m in members:
        if isinstance(m, tuple):
            out.append(m)
            continue
        if ":" in m:
            inst, label = m.split(":", 1)
            if inst not in names:
                raise ValidationError(f"grouping names unknown instance {inst!r}")
            out.append((names.index(inst), label))
            continue
        hits = [k for k, a in enumerate(instances) if any(b.label == m for b in a.branches)]
        if len(hits) != 1:
            raise ValidationError(f"branch label {m!r} is {'ambiguous' if hits else 'unknown'}; "
                                  "qualify it as instance:label")
        out.append((hits[0], m))
    return tuple(out)


def _check_intra(a: ActionDescription, g: GroupingPlan):
    labels = [b.label for b in a.branches]
    seen = [m for grp in g.groups for m in grp]
    if any(not grp for grp in g.groups):
        raise ValidationError("grouping contains an empty set")
    if sorted(seen) != sorted(labels):
        raise ValidationError(f"grouping {g.groups} is not a partition of the branches {labels}")


def _check_inter(instances, g: GroupingPlan):
    expected = sorted((k, b.label) for k, a in enumerate(instances) for b in a.branches)
    seen = [m for grp in g.groups for m in grp]
    if any(not grp for grp in g.groups):
        raise ValidationError("grouping contains an empty set")
    if sorted(seen) != expected:
        raise ValidationError("grouping is not a partition of the instances' branches")
    for grp in g.groups:
        ks = [k for k, _ in grp]
        if len(set(ks)) != len(ks):
            raise ValidationError(f"group {grp} takes two branches from one instance")


# ----------------------------------------------------------------------------
# Effect weakening


def _normal(c):
    if c is None:
        return (None, None, True)
    keep = False
    if isinstance(c, MaybeUnchanged):
        keep = True
        c = c.inner
    if isinstance(c, Exact):
        return ("abs", frozenset((c.value,)), keep)
    if isinstance(c, AmongSet):
        return ("abs", frozenset(c.values), keep)
    if isinstance(c, RelativeExact):
        return ("rel", (c.delta, c.delta), keep)
    if isinstance(c, RelativeRange):
        return ("rel", (c.lo, c.hi), keep)
    if isinstance(c, Unconstrained):
        return ("top", None, False)
    raise ValidationError(f"unknown constraint {c!r}")


def _join(x, y):
    kx, px, keepx = x
    ky, py, keepy = y
    keep = keepx or keepy
    if kx is None:
        kind, payload = ky, py
    elif ky is None:
        kind, payload = kx, px
    elif kx == "top" or ky == "top" or kx != ky:
        kind, payload = "top", None
    elif kx == "abs":
        kind, payload = "abs", px | py
    else:
        kind, payload = "rel", (min(px[0], py[0]), max(px[1], py[1]))
    if kind == "top":
        keep = False
    return (kind, payload, keep)


def _constraint(norm):
    kind, payload, keep = norm
    if kind is None:
        return None
    if kind == "top":
        return Unconstrained()
    if kind == "abs":
        base = Exact(next(iter(payload))) if len(payload) == 1 else AmongSet(payload)
    else:
        base = RelativeExact(payload[0]) if payload[0] == payload[1] else RelativeRange(*payload)
    return MaybeUnchanged(base) if keep else base


def weaken_effects(effects) -> Effect:
    """Tightest per-fluent constraint entailed by every effect in ``effects``."""
    effects = list(effects)
    if not effects:
        raise ValidationError("cannot weaken an empty list of effects")
    if len(effects) == 1:
        return effects[0]
    names = sorted({n for e in effects for n in e.fluents()})
    out = {}
    for n in names:
        acc = _normal(effects[0].get(n))
        for e in effects[1:]:
            acc = _join(acc, _normal(e.get(n)))
        c = _constraint(acc)
        if c is not None:
            out[n] = c
    return Effect.of(out)


# ----------------------------------------------------------------------------
# Intra-action abstraction


def _flat_members(a: ActionDescription, branches):
    pairs = []
    for b in branches:
        if isinstance(b.condition, Single) and isinstance(b.prob, Point):
            pairs.append((b.condition.sentence, b.prob.p))
        elif isinstance(b.condition, CondList) and a.method in (None, "intra1"):
            pairs.extend(zip(b.condition.sentences, b.prob.ps))
        else:
            raise ValidationError(f"action {a.name!r}: intra-action abstraction needs a concrete "
                                  "or Method I input")
    return pairs


def _members(a: ActionDescription, g: GroupingPlan):
    _check_intra(a, g)
    by_label = {b.label: b for b in a.branches}
    return [[by_label[m] for m in grp] for grp in g.groups]


def intra_abstract_I(a: ActionDescription, g: GroupingPlan, name: str | None = None) -> ActionDescription:
    if a.method not in (None, "intra1"):
        raise ValidationError(f"action {a.name!r} is not a concrete or Method I description")
    branches = []
    for grp in _members(a, g):
        pairs = _flat_members(a, grp)
        effect = weaken_effects(b.effect for b in grp)
        label = "+".join(b.label for b in grp)
        conds = {c for c, _ in pairs}
        if len(conds) == 1:
            branches.append(Branch(Single(pairs[0][0]), Point(sum(p for _, p in pairs)), effect, label))
        else:
            branches.append(Branch(CondList(tuple(c for c, _ in pairs)), ProbList(tuple(p for _, p in pairs)),
                                   effect, label))
    return ActionDescription(name or a.name, tuple(branches), a.duration, "intra1")


def intra_abstract_II(a: ActionDescription, g: GroupingPlan, name: str | None = None) -> ActionDescription:
    if a.method not in (None, "intra1"):
        raise ValidationError(f"action {a.name!r} is not a concrete or Method I description")
    branches = []
    for grp in _members(a, g):
        # same-condition members collapse to their summed probability first
        summed = {}
        for c, p in _flat_members(a, grp):
            summed[c] = summed.get(c, 0.0) + p
        probs = list(summed.values())
        effect = weaken_effects(b.effect for b in grp)
        label = "+".join(b.label for b in grp)
        branches.append(Branch(Single(disjoin(list(summed))), Range(min(probs), max(probs)), effect, label))
    return ActionDescription(name or a.name, tuple(branches), a.duration, "intra2")


# ----------------------------------------------------------------------------
# Inter-action abstraction


def _check_instances(instances):
    if not instances:
        raise ValidationError("inter-action abstraction needs at least one instance")
    names = [a.name for a in instances]
    if len(set(names)) != len(names):
        raise ValidationError("instances must be distinct actions")
    durations = {a.duration for a in instances}
    if len(durations) != 1:
        raise ValidationError(f"instances have different durations {sorted(durations)}")


def _inter_groups(instances, g):
    _check_inter(instances, g)
    lookup = [{b.label: b for b in a.branches} for a in instances]
    out = []
    for grp in g.groups:
        members = dict(grp)
        out.append([lookup[k][members[k]] if k in members else None for k in range(len(instances))])
    return out


def _default_name(instances):
    return "|".join(a.name for a in instances)


def inter_abstract_I(instances, g: GroupingPlan | None = None, name: str | None = None) -> ActionDescription:
    instances = list(instances)
    _check_instances(instances)
    for a in instances:
        if not all(b.concrete for b in a.branches):
            raise ValidationError(f"instance {a.name!r}: Method I lists cannot be nested; use Method II")
    g = g or GroupingPlan.by_position(instances)
    branches = []
    for row in _inter_groups(instances, g):
        present = [b for b in row if b is not None]
        conds = tuple(b.condition.sentence if b is not None else FALSE for b in row)
        probs = tuple(b.prob.p if b is not None else 0.0 for b in row)
        effect = weaken_effects(b.effect for b in present)
        label = "+".join(b.label for b in present)
        branches.append(Branch(CondList(conds), ProbList(probs), effect, label))
    return ActionDescription(name or _default_name(instances), tuple(branches), instances[0].duration, "inter1")


def _pair(b: Branch):
    cond = b.condition
    if isinstance(cond, ConjDisj):
        return cond.conj, cond.disj
    if isinstance(cond, Single):
        return cond.sentence, cond.sentence
    raise ValidationError(f"branch {b.label!r}: Method I lists cannot be nested; use Method II")


def inter_abstract_II(instances, g: GroupingPlan | None = None, name: str | None = None) -> ActionDescription:
    instances = list(instances)
    _check_instances(instances)
    for a in instances:
        if a.method in ("intra1", "inter1"):
            raise ValidationError(f"instance {a.name!r}: Method I lists cannot be nested; use Method II")
    g = g or GroupingPlan.by_position(instances)
    branches = []
    for row in _inter_groups(instances, g):
        present = [b for b in row if b is not None]
        conjs, disjs = zip(*(_pair(b) for b in present))
        conj = conjoin(list(conjs) + ([FALSE] if len(present) < len(row) else []))
        disj = disjoin(disjs)
        lo = 0.0 if len(present) < len(row) else min(b.prob.lo for b in present)
        hi = max(b.prob.hi for b in present)
        effect = weaken_effects(b.effect for b in present)
        label = "+".join(b.label for b in present)
        branches.append(Branch(ConjDisj(conj, disj), Range(lo, hi), effect, label))
    return ActionDescription(name or _default_name(instances), tuple(branches), instances[0].duration, "inter2")


def weaken_condition_pair(cd: ConjDisj, new_conj, new_disj, vocab: Vocabulary) -> ConjDisj:
    """Replace the sufficient condition by a stronger one and the necessary one by a weaker one."""
    if not entails(new_conj, cd.conj, vocab):
        raise ValidationError(f"{new_conj} does not entail the conjunction {cd.conj}")
    if not entails(cd.disj, new_disj, vocab):
        raise ValidationError(f"{new_disj} is not entailed by the disjunction {cd.disj}")
    if not entails(new_conj, new_disj, vocab):
        raise ValidationError("conjunction must entail disjunction")
    return ConjDisj(new_conj, new_disj)


BUILDERS = {
    "intra1": intra_abstract_I,
    "intra2": intra_abstract_II,
    "inter1": inter_abstract_I,
    "inter2": inter_abstract_II,
}


def abstract(method: str, sources, grouping: GroupingPlan | None = None, name: str | None = None):
    """Dispatch to one of the four builders.  ``sources`` is an action or a list of instances."""
    if method not in BUILDERS:
        raise ValidationError(f"unknown abstraction method {method!r}")
    if method.startswith("intra"):
        a = sources[0] if isinstance(sources, (list, tuple)) else sources
        return BUILDERS[method](a, grouping or GroupingPlan.singletons(a), name)
    return BUILDERS[method](list(sources), grouping, name)
