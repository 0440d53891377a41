"""Command-line front end.

Exit status: 0 success, 1 usage or parse error, 2 validation error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from importlib import resources

from . import abstraction, oracle
from .chronicle import enumerate_chronicles
from .domain import format_action, network_domain, parse_domain, serialize
from .errors import DomainSyntaxError, ProbactError, ValidationError
from .generators import engineered_network, random_uniform_network
from .planner import maximal_pruning_bound, search
from .projection import project
from .worldmodel import State, parse_sentence

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_UNSOUND = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    path: str | None = None
    action: str | None = None
    query: str | None = None
    method: str | None = None
    grouping: str | None = None
    name: str | None = None
    format: str = "human"
    seed: int = 0
    cases: int = 100
    precision: int = 6
    trace: bool = False
    root: str | None = None
    n: int = 2
    p: int = 2
    k: int = 2
    engineered: bool = False

    def validate(self):
        if not 1 <= self.precision <= 12:
            raise UsageError("--precision must be between 1 and 12")
        if self.format not in ("human", "json"):
            raise UsageError("--format must be 'human' or 'json'")
        if self.cases < 1:
            raise UsageError("--cases must be positive")


def bundled_domain_path(name="tomato.domain"):
    return str(resources.files("probact") / "data" / name)


def _read_domain(path):
    if path is None:
        raise UsageError("a domain file is required")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError:
        # bare names fall back to the bundled examples
        try:
            text = (resources.files("probact") / "data" / path).read_text(encoding="utf-8")
        except (OSError, ValueError):
            raise UsageError(f"cannot read domain file {path!r}") from None
    return parse_domain(text)


def _f(x, prec):
    return f"{x:.{prec}f}"


def _interval(lo, hi, prec):
    if abs(hi - lo) <= 1e-12:
        return _f(lo, prec)
    return f"[{_f(lo, prec)}, {_f(hi, prec)}]"


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2)


# ----------------------------------------------------------------------------
# Commands


def cmd_project(cfg: RunConfig):
    dom = _read_domain(cfg.path)
    if not cfg.action or cfg.query is None:
        raise UsageError("project needs --action and --query")
    if dom.initial is None:
        raise ValidationError("the domain declares no initial distribution")
    a = dom.action(cfg.action)
    phi = parse_sentence(cfg.query, dom.vocab)
    res = project(a, dom.initial, phi)
    prec = cfg.precision
    lo, hi = res.interval
    trace = []
    if cfg.trace:
        for c in enumerate_chronicles([a], dom.initial):
            path = " ".join(f"{act}:{lbl}" for act, lbl in c.trace)
            start = c.states[0].state.describe()
            end = c.final.describe() if isinstance(c.final, State) else c.final.describe()
            trace.append({"trace": path, "probability": [round(c.probability.lo, prec), round(c.probability.hi, prec)],
                          "start": start, "end": end})
    if cfg.format == "json":
        return _dump({
            "action": a.name,
            "query": str(phi),
            "lo": round(lo, prec),
            "hi": round(hi, prec),
            "branches": [{"label": l, "lo": round(x, prec), "hi": round(y, prec)} for l, x, y in res.breakdown],
            "chronicles": trace,
        })
    out = [_interval(lo, hi, prec)]
    for label, x, y in res.breakdown:
        out.append(f"  branch {label}: {_interval(x, y, prec)}")
    for t in trace:
        p = _interval(t["probability"][0], t["probability"][1], prec)
        out.append(f"  chronicle {t['trace']} p={p} | {t['start']} -> {t['end']}")
    return "\n".join(out)


def cmd_abstract(cfg: RunConfig):
    dom = _read_domain(cfg.path)
    if not cfg.action or not cfg.method:
        raise UsageError("abstract needs --action and --method")
    names = [x.strip() for x in cfg.action.split(",") if x.strip()]
    sources = [dom.action(n) for n in names]
    if cfg.method.startswith("intra"):
        if len(sources) != 1:
            raise UsageError("intra-action abstraction takes exactly one --action")
        g = abstraction.GroupingPlan.parse(cfg.grouping) if cfg.grouping else None
        result = abstraction.abstract(cfg.method, sources[0], g, cfg.name)
    else:
        g = abstraction.GroupingPlan.parse(cfg.grouping, sources) if cfg.grouping else None
        result = abstraction.abstract(cfg.method, sources, g, cfg.name)
    text = format_action(result)
    if cfg.format == "json":
        return _dump({"action": result.name, "method": result.method, "branches": len(result.branches),
                      "text": text})
    return text


def cmd_plan(cfg: RunConfig):
    dom = _read_domain(cfg.path)
    if dom.initial is None or dom.utility is None:
        raise ValidationError("planning needs an initial distribution and a utility declaration")
    net = dom.network()
    plans, stats = search(net, dom.initial, dom.utility, cfg.root)
    prec = cfg.precision
    if cfg.format == "json":
        return _dump({
            "plans": [{"rank": i + 1, "actions": list(p.items), "eu_lo": round(p.eu.lo, prec),
                       "eu_hi": round(p.eu.hi, prec)} for i, p in enumerate(plans)],
            "stats": {k: (round(v, prec) if isinstance(v, float) else v) for k, v in stats.as_dict().items()},
        })
    out = []
    for i, p in enumerate(plans, start=1):
        out.append(f"rank {i}: {' ; '.join(p.items)}  EU {_interval(p.eu.lo, p.eu.hi, prec)}")
    out.append("stats:")
    out.append(f"  plans examined: {stats.plans_examined}")
    out.append(f"  concrete plans: {stats.total_concrete_plans}")
    out.append(f"  refinement tree size: {stats.refinement_tree_size}")
    out.append(f"  examined fraction: {_f(stats.examined_fraction, prec)}")
    for depth, count in sorted(stats.pruned_per_level.items()):
        out.append(f"  pruned at depth {depth}: {count}")
    return "\n".join(out)


def _methods(text):
    if text in (None, "all"):
        return oracle.METHODS
    ms = tuple(m.strip() for m in text.split(","))
    bad = [m for m in ms if m not in oracle.METHODS]
    if bad:
        raise UsageError(f"unknown methods {bad}")
    return ms


def cmd_verify(cfg: RunConfig):
    if cfg.path is not None:
        dom = _read_domain(cfg.path)
        if dom.initial is None or dom.utility is None:
            raise ValidationError("planner verification needs an initial distribution and a utility")
        report = oracle.check_planner(dom.network(), dom.initial, dom.utility, cfg.root, seed=cfg.seed)
    else:
        report = oracle.run_suite(_methods(cfg.method), cfg.cases, cfg.seed)
    d = report.as_dict(cfg.precision)
    if cfg.format == "json":
        text = _dump(d)
    else:
        out = [f"verdict: {d['verdict']}", f"cases run: {d['cases_run']}", f"seed: {d['seed']}"]
        for m, c in d["per_method"].items():
            out.append(f"  {m}: {c} cases")
        out.append(f"failures: {len(d['failures'])}")
        out.extend(f"  {f}" for f in d["failures"])
        text = "\n".join(out)
    return text, (EXIT_OK if report.sound else EXIT_UNSOUND)


def cmd_gen_network(cfg: RunConfig):
    if min(cfg.n, cfg.p, cfg.k) < 1:
        raise UsageError("--n, --p and --k must be at least 1")
    if cfg.engineered:
        net, d0, u = engineered_network(cfg.n, cfg.p, cfg.k)
    else:
        net, d0, u = random_uniform_network(cfg.n, cfg.p, cfg.k, random.Random(cfg.seed))
    dom = network_domain(net, d0, u)
    header = (f"# uniform network n={cfg.n} p={cfg.p} k={cfg.k}; "
              f"maximal-pruning examined count {maximal_pruning_bound(cfg.n, cfg.p, cfg.k)}\n")
    return header + serialize(dom)


COMMANDS = {
    "project": cmd_project,
    "abstract": cmd_abstract,
    "plan": cmd_plan,
    "verify": cmd_verify,
    "gen-network": cmd_gen_network,
}


def run(config: RunConfig):
    """Execute one command; returns ``(exit status, output text)``."""
    try:
        config.validate()
        if config.command not in COMMANDS:
            raise UsageError(f"unknown command {config.command!r}")
        result = COMMANDS[config.command](config)
    except UsageError as exc:
        return EXIT_USAGE, f"usage error: {exc}"
    except DomainSyntaxError as exc:
        return EXIT_USAGE, f"parse error: {exc}"
    except (ValidationError, ProbactError) as exc:
        return EXIT_INVALID, f"validation error: {exc}"
    if isinstance(result, tuple):
        text, code = result
        return code, text
    return EXIT_OK, result


# ----------------------------------------------------------------------------
# argv handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="probact", description="Abstraction, projection and planning for probabilistic actions.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, domain=True, optional_domain=False):
        if domain:
            p.add_argument("path", nargs="?" if optional_domain else None, help="domain file")
        p.add_argument("--format", choices=("human", "json"), default="human")
        p.add_argument("--precision", type=int, default=6)
        return p

    p = common(sub.add_parser("project", help="project a sentence through an action"))
    p.add_argument("--action", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--trace", action="store_true", help="also list the chronicles")

    p = common(sub.add_parser("abstract", help="build an abstract action"))
    p.add_argument("--action", required=True, help="action name, or comma-separated instances")
    p.add_argument("--method", required=True, choices=oracle.METHODS)
    p.add_argument("--grouping", help='e.g. "a,c;b,d"')
    p.add_argument("--name")

    p = common(sub.add_parser("plan", help="find the plans of maximal expected utility"))
    p.add_argument("--root")

    p = common(sub.add_parser("verify", help="check abstraction soundness or planner admissibility"),
               optional_domain=True)
    p.add_argument("--method", "--methods", dest="method", default="all")
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--root")

    p = common(sub.add_parser("gen-network", help="emit a synthetic uniform network"), domain=False)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--engineered", action="store_true", help="one instance survives every refinement")
    return parser


def parse_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    fields = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
    return RunConfig(**fields)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] in ("-h", "--help") or (len(argv) >= 2 and argv[1] in ("-h", "--help")):
        build_parser().parse_args(argv)  # argparse prints help and exits 0
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code, text = run(cfg)
    stream = sys.stdout if code in (EXIT_OK, EXIT_UNSOUND) else sys.stderr
    print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
