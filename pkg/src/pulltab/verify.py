"""Randomized property suites with reproducible seeds.

Each suite returns a :class:`Report`.  Every graph a suite produces is shown
to the optional ``monitor`` (see :class:`IdMonitor`), so one monitor can
watch decorations across all suites at once.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .graph import CHOICE, Allocator, Graph, graphs_equal
from .generate import div_family, parse_expression_from_entry, random_dag, random_program, random_state
from .program import load_program
from .pulltab import pull_tab, pulltab_candidates
from .represented import assert_nonchoice_invariance, represented_set
from .rewrite import apply_step, redexes
from .strategies import KINDS, StrategyConfig, check_consistency, immediate_dominator, run

SUITES = ("parallel-moves", "pulltab", "nonchoice", "theorem", "dominators")


@dataclass
class Report:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    inconclusive: int = 0
    skipped: int = 0

    @property
    def ok(self):
        return not self.failures

    def summary(self):
        line = f"{self.name}: {self.cases} cases, {len(self.failures)} failures"
        if self.inconclusive:
            line += f", {self.inconclusive} inconclusive"
        if self.skipped:
            line += f", {self.skipped} skipped"
        return line


class IdMonitor:
    """Records the choice id of every node at first sight and flags any
    later state that disagrees."""

    def __init__(self):
        self.seen = {}
        self.states = 0
        self.violations = []

    def __call__(self, g: Graph):
        self.states += 1
        for n, lab in g.labels.items():
            cid = g.cids.get(n) if lab == CHOICE else None
            first = self.seen.setdefault(n, cid)
            if first != cid:
                self.violations.append((n, first, cid))


def _watch(monitor, g):
    if monitor is not None:
        monitor(g)
    return g


def parallel_moves(cases=500, seed=0, monitor=None, allocator: Allocator | None = None) -> Report:
    """Two redexes at distinct nodes commute modulo renaming; a step whose
    node was erased by the other one is a no-op."""
    rng = random.Random(seed)
    rep = Report("parallel-moves")
    while rep.cases < cases:
        prog, g = random_state(rng, allocator)
        steps = redexes(prog, g)
        pairs = [(a, b) for a in steps for b in steps if a.node < b.node]
        if not pairs:
            continue
        a, b = rng.choice(pairs)
        _watch(monitor, g)
        results = []
        for first, second in ((a, b), (b, a)):
            h = _watch(monitor, apply_step(g, first, allocator))
            if second.node in h.labels:
                h = _watch(monitor, apply_step(h, second, allocator))
            results.append(h)
        rep.cases += 1
        if not graphs_equal(*results):
            rep.failures.append((g, a, b))
    return rep


def pulltab_invariance(cases=300, seed=0, monitor=None, allocator: Allocator | None = None,
                       max_ids: int = 4) -> Report:
    """A pull-tab step leaves the represented set unchanged."""
    rng = random.Random(seed)
    rep = Report("pulltab")
    while rep.cases < cases:
        _, g = random_state(rng, allocator, max_ids=max_ids)
        spots = pulltab_candidates(g)
        if not spots:
            continue
        target, index = rng.choice(spots)
        h = pull_tab(_watch(monitor, g), target, index, allocator)
        _watch(monitor, h)
        rep.cases += 1
        if represented_set(g) != represented_set(h):
            rep.failures.append((g, target, index))
    return rep


def nonchoice_invariance(cases=300, seed=0, monitor=None, allocator: Allocator | None = None,
                         bound: int = 50) -> Report:
    """Both claims relating represented sets across a non-choice rewrite."""
    rng = random.Random(seed)
    rep = Report("nonchoice")
    while rep.cases < cases:
        prog, g = random_state(rng, allocator)
        steps = [s for s in redexes(prog, g) if not s.is_choice_step]
        if not steps:
            continue
        step = rng.choice(steps)
        _watch(monitor, g)
        _watch(monitor, apply_step(g, step, allocator))
        rep.cases += 1
        verdict = assert_nonchoice_invariance(prog, g, step, bound=bound, allocator=allocator)
        if verdict is None:
            rep.inconclusive += 1
        elif not verdict:
            rep.failures.append((g, step))
    return rep


def theorem(cases=100, seed=0, monitor=None, allocator: Allocator | None = None,
            budget: int = 5000, traces: list | None = None) -> Report:
    """All four strategies compute the same values on random programs.

    Programs that exhaust the budget under some strategy are counted as
    skipped and replaced, so ``cases`` programs are always compared.
    Pull-tab traces are appended to ``traces`` when given."""
    rng = random.Random(seed)
    rep = Report("theorem")
    while rep.cases < cases:
        text, prog = random_program(rng)
        outcomes = {}
        for kind in KINDS:
            g = parse_expression_from_entry(prog, allocator)
            outcomes[kind] = run(prog, g, StrategyConfig(kind, budget), allocator, monitor)
        if any(o.exhausted for o in outcomes.values()):
            rep.skipped += 1
            continue
        rep.cases += 1
        if traces is not None:
            traces.extend(outcomes["pulltab"].traces)
        forms = {k: o.value_forms() for k, o in outcomes.items()}
        if len(set(map(frozenset, forms.values()))) != 1:
            rep.failures.append(text)
    return rep


def _paths(g: Graph, target):
    out = []
    stack = [(g.root, (g.root,))]
    while stack:
        n, path = stack.pop()
        if n == target:
            out.append(path)
            continue
        for s in set(g.succs[n]):
            stack.append((s, path + (s,)))
    return out


def brute_force_idom(g: Graph, n):
    """Deepest proper dominator of ``n`` by intersecting every root path."""
    paths = _paths(g, n)
    common = set(paths[0][:-1])
    for p in paths[1:]:
        common &= set(p[:-1])
    return next(m for m in reversed(paths[0][:-1]) if m in common)


def dominators_oracle(cases=200, seed=0, allocator: Allocator | None = None, max_nodes: int = 30) -> Report:
    """immediate_dominator agrees with path intersection on random DAGs."""
    rng = random.Random(seed)
    rep = Report("dominators")
    for _ in range(cases):
        g = random_dag(rng, rng.randint(2, max_nodes), allocator=allocator)
        rep.cases += 1
        for n in g.labels:
            if n != g.root and immediate_dominator(g, n) != brute_force_idom(g, n):
                rep.failures.append((g, n))
                break
    return rep


def pulltab_traces_consistent(traces) -> bool:
    return all(check_consistency(t) for t in traces)


def economy(n: int = 20, allocator: Allocator | None = None, budget: int = 200000):
    """Outcomes of copying and pull-tabbing on the div family of depth ``n``."""
    prog = load_program(div_family(n))
    out = {}
    for kind in ("copy", "pulltab"):
        g = parse_expression_from_entry(prog, allocator)
        out[kind] = run(prog, g, StrategyConfig(kind, budget), allocator)
    return out


def run_suite(name: str, cases: int | None = None, seed: int = 0, monitor=None) -> Report:
    fns = {
        "parallel-moves": parallel_moves,
        "pulltab": pulltab_invariance,
        "nonchoice": nonchoice_invariance,
        "theorem": theorem,
        "dominators": dominators_oracle,
    }
    fn = fns[name]
    kw = {"seed": seed}
    if cases is not None:
        kw["cases"] = cases
    if name != "dominators":
        kw["monitor"] = monitor
    return fn(**kw)


__all__ = [
    "Report", "IdMonitor", "SUITES", "parallel_moves", "pulltab_invariance", "nonchoice_invariance",
    "theorem", "dominators_oracle", "brute_force_idom", "economy", "run_suite",
    "pulltab_traces_consistent",
]
