"""Complete evaluation strategies for non-deterministic programs.

All four strategies compute the set of values (constructor normal forms) of a
ground expression.  They differ in how a needed choice ``C[u ? v]`` is
handled:

backtrack
    reduce the choice to ``u``, finish that computation, then do ``v``.
copy
    evaluate fresh clones ``C[u]`` and ``C[v]`` side by side.
bubble
    clone only the part of the context between the choice and its immediate
    dominator, moving the choice up to the dominator.
pulltab
    pull the choice one node up at a time; choices that reach the root are
    reduced consistently with a per-strand ledger of decisions.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .graph import CHOICE, Allocator, Graph, canonicalize, default_allocator, print_linear, redirect
from .program import C1, C2, Program
from .pulltab import pull_tab
from .rewrite import (ChoiceAtRoot, Failure, Step, Value, choice_step, head_step,
                      normal_form_step, rewrite_step)

KINDS = ("backtrack", "copy", "bubble", "pulltab")


@dataclass
class StrategyConfig:
    kind: str = "pulltab"
    max_steps: int = 10000
    max_values: int | None = None
    consistency: bool = True
    hnf_before_pull: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if not self.consistency and self.kind != "pulltab":
            raise ValueError("consistency can only be disabled for pull-tabbing")


@dataclass
class Stats:
    """Cost counters.  ``nodes_cloned`` counts copies of existing context
    nodes (two per pull-tab, two per node of a cloned context)."""

    steps: int = 0
    nodes_allocated: int = 0
    nodes_cloned: int = 0
    strands_forked: int = 0
    strands_failed: int = 0
    pulltabs: int = 0

    def as_dict(self):
        return {
            "steps": self.steps,
            "nodes_allocated": self.nodes_allocated,
            "nodes_cloned": self.nodes_cloned,
            "strands_forked": self.strands_forked,
            "strands_failed": self.strands_failed,
        }


@dataclass
class Outcome:
    values: list
    failures: int
    exhausted: bool
    stats: Stats
    traces: list = field(default_factory=list)

    def value_forms(self):
        return {canonicalize(v) for v in self.values}

    def value_strings(self):
        return [print_linear(v) for v in self.values]


@dataclass
class _Strand:
    graph: Graph
    ledger: dict
    trace: tuple | None = None  # cons list: (step, rest)
    toggle: bool = False

    def extend(self, graph, step):
        self.graph = graph
        self.trace = (step, self.trace)

    def fork(self, graph, step, ledger):
        return _Strand(graph, ledger, (step, self.trace), self.toggle)

    def steps(self):
        out = []
        node = self.trace
        while node is not None:
            out.append(node[0])
            node = node[1]
        out.reverse()
        return out


def check_consistency(trace) -> bool:
    """True iff all choice steps at nodes with the same choice id use the
    same rule."""
    decided = {}
    for step in trace:
        if step.is_choice_step:
            if decided.setdefault(step.choice_id, step.rule.name) != step.rule.name:
                return False
    return True


# -- dominators ----------------------------------------------------------


def _rpo(g: Graph):
    order = []
    seen = {g.root}
    stack = [(g.root, iter(g.succs[g.root]))]
    while stack:
        n, it = stack[-1]
        for s in it:
            if s not in seen:
                seen.add(s)
                stack.append((s, iter(g.succs[s])))
                break
        else:
            stack.pop()
            order.append(n)
    order.reverse()
    return order


def dominators(g: Graph) -> dict:
    """Immediate dominator of every node (the root maps to itself).

    Iterative dataflow over reverse postorder with the two-finger
    intersection of Cooper, Harvey and Kennedy.
    """
    order = _rpo(g)
    index = {n: i for i, n in enumerate(order)}
    preds = {n: [] for n in order}
    for n in order:
        for s in g.succs[n]:
            preds[s].append(n)
    idom = {g.root: g.root}

    def intersect(a, b):
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in order[1:]:
            new = None
            for p in preds[n]:
                if p in idom:
                    new = p if new is None else intersect(p, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    return idom


def immediate_dominator(g: Graph, n):
    if n == g.root:
        raise ValueError("the root has no proper dominator")
    if n not in g.labels:
        raise KeyError(n)
    return dominators(g)[n]


# -- context cloning -----------------------------------------------------


def _context(g: Graph, s):
    """Nodes reachable from the root without passing through ``s``."""
    if g.root == s:
        return set()
    seen = {g.root}
    stack = [g.root]
    while stack:
        n = stack.pop()
        for m in g.succs[n]:
            if m != s and m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def _rename(g: Graph, nodes, alloc):
    fresh = {n: alloc.node() for n in sorted(nodes)}
    f = lambda n: fresh.get(n, n)  # noqa: E731
    return Graph(
        f(g.root),
        {f(n): lab for n, lab in g.labels.items()},
        {f(n): tuple(map(f, ss)) for n, ss in g.succs.items()},
        {f(n): c for n, c in g.cids.items()},
    ), len(fresh)


def copy_split(g: Graph, s, alloc):
    """``C[u]`` and ``C[v]`` for ``g = C[u ? v]`` with the whole context of the
    choice ``s`` freshly cloned in each.  Returns (graphs, nodes_cloned)."""
    ctx = _context(g, s)
    out = []
    cloned = 0
    for alt in g.succs[s]:
        h = redirect(g, s, alt)
        h, k = _rename(h, ctx & set(h.labels), alloc)
        out.append(h)
        cloned += k
    return out, cloned


def bubble(g: Graph, s, alloc):
    """Move the choice ``s`` up to its immediate dominator ``d``, cloning the
    nodes between ``d`` (inclusive) and ``s`` (exclusive) once per
    alternative.  Returns (graph, nodes_cloned)."""
    d = immediate_dominator(g, s)
    below = set()
    stack = [d]
    while stack:
        n = stack.pop()
        if n not in below:
            below.add(n)
            stack.extend(g.succs[n])
    above = {s}
    preds = {}
    for n, ss in g.succs.items():
        for m in ss:
            preds.setdefault(m, []).append(n)
    stack = [s]
    while stack:
        n = stack.pop()
        for p in preds.get(n, ()):
            if p not in above:
                above.add(p)
                stack.append(p)
    region = sorted((below & above) - {s})
    labels, succs, cids = {}, {}, {}
    roots = []
    for alt in g.succs[s]:
        fresh = {n: alloc.node() for n in region}
        for n in region:
            m = fresh[n]
            labels[m] = g.labels[n]
            succs[m] = tuple(alt if c == s else fresh.get(c, c) for c in g.succs[n])
            if n in g.cids:
                cids[m] = g.cids[n]
        roots.append(fresh[d])
    top = alloc.node()
    labels[top] = CHOICE
    succs[top] = tuple(roots)
    cids[top] = g.cids[s]
    return redirect(g, d, top, labels, succs, cids), 2 * len(region)


# -- driver --------------------------------------------------------------


class _Run:
    def __init__(self, program, cfg, alloc, observer):
        self.program = program
        self.cfg = cfg
        self.alloc = alloc
        self.observer = observer
        self.stats = Stats()
        self.values = {}
        self.failures = 0
        self.traces = []
        self.pending = deque()

    def observe(self, g):
        if self.observer is not None:
            self.observer(g)

    # a strand step; returns the strands that continue (possibly none)
    def advance(self, st: _Strand):
        g = st.graph
        act = normal_form_step(self.program, g)
        if act is None:
            self.values.setdefault(canonicalize(g), g)
            self.traces.append(st.steps())
            return []
        if isinstance(act, Failure):
            self.failures += 1
            self.stats.strands_failed += 1
            self.traces.append(st.steps())
            return []
        if isinstance(act, ChoiceAtRoot):
            return self.root_choice(st, act.node)
        step = act.step
        if step.kind == "rewrite":
            self.rewrite(st, step)
            return [st]
        source = g.succs[step.node][step.index]
        return self.needed_choice(st, step, source)

    def rewrite(self, st, step):
        h = rewrite_step(st.graph, step.node, step.rule, self.alloc)
        self.stats.steps += 1
        st.extend(h, step)
        self.observe(h)

    def reduce(self, st, n, which):
        h, step = choice_step(st.graph, n, which)
        self.stats.steps += 1
        st.extend(h, step)
        self.observe(h)

    def fork(self, st, n, ledger_update=None):
        """Reduce choice ``n`` both ways; C1 strand first."""
        out = []
        self.stats.strands_forked += 1
        for which in (1, 2):
            h, step = choice_step(st.graph, n, which)
            self.stats.steps += 1
            ledger = st.ledger
            if ledger_update is not None:
                ledger = dict(ledger)
                ledger[ledger_update] = which
            out.append(st.fork(h, step, ledger))
            self.observe(h)
        return out

    def root_choice(self, st, n):
        return self.fork(st, n)

    def needed_choice(self, st, step, source):
        raise NotImplementedError


class _Backtrack(_Run):
    def needed_choice(self, st, step, source):
        return self.fork(st, source)


class _Copy(_Run):
    def needed_choice(self, st, step, source):
        graphs, cloned = copy_split(st.graph, source, self.alloc)
        self.stats.nodes_cloned += cloned
        self.stats.strands_forked += 1
        cid = st.graph.cids[source]
        out = []
        for h, rule in zip(graphs, (C1, C2)):
            self.stats.steps += 1
            out.append(st.fork(h, Step("rewrite", source, rule, cid), st.ledger))
            self.observe(h)
        return out


class _Bubble(_Run):
    def needed_choice(self, st, step, source):
        h, cloned = bubble(st.graph, source, self.alloc)
        self.stats.nodes_cloned += cloned
        self.stats.steps += 1
        st.extend(h, Step("bubble", source, None, st.graph.cids[source]))
        self.observe(h)
        return [st]


class _PullTab(_Run):
    def root_choice(self, st, n):
        g = st.graph
        cid = g.cids[n]
        if not self.cfg.consistency:
            return self.fork(st, n)
        if cid in st.ledger:
            self.reduce(st, n, st.ledger[cid])
            return [st]
        doomed = self.failing_alternative(g, n)
        if doomed:
            st.ledger = dict(st.ledger)
            st.ledger[cid] = 3 - doomed
            self.reduce(st, n, 3 - doomed)
            return [st]
        return self.fork(st, n, ledger_update=cid)

    def failing_alternative(self, g, n):
        for which, alt in enumerate(g.succs[n], 1):
            if isinstance(head_step(self.program, g, alt), Failure):
                return which
        return 0

    def needed_choice(self, st, step, source):
        self.resolve(st, step)
        return [st]

    def resolve(self, st, step):
        """Perform one step for a needed pull-tab ``step``: pull it, reduce
        the choice per the ledger, commit a surviving alternative, or first
        advance an alternative towards head normal form."""
        g = st.graph
        source = g.succs[step.node][step.index]
        cid = g.cids[source]
        if self.cfg.consistency:
            if cid in st.ledger:
                self.reduce(st, source, st.ledger[cid])
                return
            if self.cfg.hnf_before_pull:
                t1, t2 = g.succs[source]
                r1 = head_step(self.program, g, t1)
                r2 = head_step(self.program, g, t2)
                ready = (Value, ChoiceAtRoot)
                if not (isinstance(r1, ready) or isinstance(r2, ready)):
                    if isinstance(r1, Failure) or isinstance(r2, Failure):
                        keep = 2 if isinstance(r1, Failure) else 1
                        st.ledger = dict(st.ledger)
                        st.ledger[cid] = keep
                        self.reduce(st, source, keep)
                        return
                    # advance the alternatives in turn so neither can starve the other
                    sub = r2 if st.toggle else r1
                    st.toggle = not st.toggle
                    if sub.step.kind == "rewrite":
                        self.rewrite(st, sub.step)
                    else:
                        self.resolve(st, sub.step)
                    return
        h = pull_tab(g, step.node, step.index, self.alloc)
        self.stats.steps += 1
        self.stats.pulltabs += 1
        self.stats.nodes_cloned += 2
        st.extend(h, step)
        self.observe(h)


_RUNNERS = {"backtrack": _Backtrack, "copy": _Copy, "bubble": _Bubble, "pulltab": _PullTab}


def run(program: Program, g: Graph, cfg: StrategyConfig | None = None,
        allocator: Allocator | None = None, observer=None) -> Outcome:
    """Compute the values of ``g`` under the strategy described by ``cfg``.

    ``observer``, if given, is called with every intermediate graph.
    Budget exhaustion is reported through ``Outcome.exhausted``.  A fork
    performs both of its choice steps at once, so ``stats.steps`` may exceed
    ``max_steps`` by one.
    """
    cfg = cfg or StrategyConfig()
    alloc = allocator or default_allocator
    runner = _RUNNERS[cfg.kind](program, cfg, alloc, observer)
    before = alloc.nodes_issued
    runner.observe(g)
    live = deque([_Strand(g, {})])
    depth_first = cfg.kind == "backtrack"
    exhausted = False
    while live:
        if runner.stats.steps >= cfg.max_steps:
            exhausted = True
            break
        if cfg.max_values is not None and len(runner.values) >= cfg.max_values:
            break
        st = live.pop() if depth_first else live.popleft()
        nxt = runner.advance(st)
        if depth_first:
            live.extend(reversed(nxt))
        else:
            live.extend(nxt)
    if exhausted:
        runner.traces.extend(st.steps() for st in live)
    runner.stats.nodes_allocated = alloc.nodes_issued - before
    values = sorted(runner.values.values(), key=print_linear)
    return Outcome(values, runner.failures, exhausted, runner.stats, runner.traces)


def run_backtrack(program, g, max_steps=10000, **kw):
    return run(program, g, StrategyConfig("backtrack", max_steps, kw.pop("max_values", None)), **kw)


def run_copy(program, g, max_steps=10000, **kw):
    return run(program, g, StrategyConfig("copy", max_steps, kw.pop("max_values", None)), **kw)


def run_bubble(program, g, max_steps=10000, **kw):
    return run(program, g, StrategyConfig("bubble", max_steps, kw.pop("max_values", None)), **kw)


def run_pulltab(program, g, max_steps=10000, consistency=True, hnf_before_pull=True, **kw):
    cfg = StrategyConfig("pulltab", max_steps, kw.pop("max_values", None), consistency, hnf_before_pull)
    return run(program, g, cfg, **kw)
