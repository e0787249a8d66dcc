"""Rewrite steps and needed-redex search through definitional trees."""

from __future__ import annotations

from dataclasses import dataclass

from .graph import CHOICE, Allocator, Graph, Var, default_allocator, redirect, topological_order
from .program import C1, C2, Branch, Exempt, Program, Rule, RuleLeaf


class MatchError(Exception):
    pass


@dataclass(frozen=True)
class Step:
    """One computation step.

    ``kind`` is ``"rewrite"`` or ``"pulltab"``.  For a rewrite ``node`` is the
    redex root and ``rule`` the rule applied; for a pull-tab ``node`` is the
    target and ``index`` the position of the source among its successors.
    ``choice_id`` is set for choice steps (C1/C2) and pull-tabs.
    """

    kind: str
    node: int
    rule: Rule | None = None
    choice_id: object = None
    index: int | None = None

    @property
    def is_choice_step(self):
        return self.kind == "rewrite" and self.rule is not None and self.rule.op == CHOICE

    def __str__(self):
        parts = [self.kind, f"@{self.node}"]
        if self.rule is not None:
            parts.append(self.rule.name)
        if self.kind == "pulltab":
            parts.append(f"#{self.index}")
        if self.choice_id is not None:
            parts.append(str(self.choice_id))
        return " ".join(parts)


def format_trace(steps) -> str:
    return "\n".join(str(s) for s in steps)


# head_step results

@dataclass(frozen=True)
class Value:
    node: int


@dataclass(frozen=True)
class Failure:
    node: int


@dataclass(frozen=True)
class ChoiceAtRoot:
    node: int


@dataclass(frozen=True)
class NeedsStep:
    step: Step


# -- rewriting -----------------------------------------------------------


def match(g: Graph, n, pattern, binding=None) -> dict:
    """Bind the variables of a constructor pattern against the subgraph at n."""
    binding = {} if binding is None else binding
    if isinstance(pattern, Var):
        binding[pattern.name] = n
        return binding
    if g.labels[n] != pattern.symbol or len(g.succs[n]) != len(pattern.args):
        raise MatchError(f"{pattern} does not match node {n} labelled {g.labels[n]!r}")
    for s, p in zip(g.succs[n], pattern.args):
        match(g, s, p, binding)
    return binding


def _build(template: Graph, binding, alloc):
    """Fresh copies of the non-variable nodes of ``template``.

    Returns (root, labels, succs, cids) where variable nodes are resolved via
    ``binding`` and every new choice node receives a fresh choice id.
    """
    new = {}
    labels, succs, cids = {}, {}, {}
    for k in topological_order(template):
        lab = template.labels[k]
        if isinstance(lab, Var):
            new[k] = binding[lab.name]
            continue
        n = alloc.node()
        new[k] = n
        labels[n] = lab
        succs[n] = tuple(new[s] for s in template.succs[k])
        if lab == CHOICE:
            cids[n] = alloc.choice()
    return new[template.root], labels, succs, cids


def instantiate(template: Graph, binding, allocator: Allocator | None = None) -> Graph:
    """A standalone graph from a ground template (used for top-level expressions)."""
    alloc = allocator or default_allocator
    root, labels, succs, cids = _build(template, binding, alloc)
    return Graph(root, labels, succs, cids)


def rewrite_step(g: Graph, at, rule: Rule, allocator: Allocator | None = None) -> Graph:
    """``g[at <- rhs instance]``.  The lhs must match at ``at``."""
    alloc = allocator or default_allocator
    binding = match(g, at, rule.lhs)
    root, labels, succs, cids = _build(rule.rhs, binding, alloc)
    return redirect(g, at, root, labels, succs, cids)


def apply_step(g: Graph, step: Step, allocator: Allocator | None = None) -> Graph:
    if step.kind == "rewrite":
        return rewrite_step(g, step.node, step.rule, allocator)
    from .pulltab import pull_tab

    return pull_tab(g, step.node, step.index, allocator)


def choice_step(g: Graph, n, which: int) -> tuple[Graph, Step]:
    """Reduce the choice at ``n`` to alternative ``which`` (1 or 2)."""
    rule = C1 if which == 1 else C2
    step = Step("rewrite", n, rule, g.cids[n])
    return rewrite_step(g, n, rule), step


# -- needed redexes ------------------------------------------------------


def head_step(program: Program, g: Graph, focus) -> object:
    """What to do next to bring the subgraph at ``focus`` to head normal form.

    Returns Value (constructor-rooted), ChoiceAtRoot (``?``-rooted), Failure
    (stuck: the dispatch reached an exempt node) or NeedsStep.  A choice at a
    needed position is reported as a pull-tab whose target is the choice's
    parent on the needed path.
    """
    lab = g.labels[focus]
    if lab == CHOICE:
        return ChoiceAtRoot(focus)
    if program.is_constructor(lab):
        return Value(focus)
    if lab not in program.trees:
        raise MatchError(f"no definitional tree for {lab!r}")
    tree = program.trees[lab]
    while True:
        if isinstance(tree, RuleLeaf):
            return NeedsStep(Step("rewrite", focus, tree.rule))
        if isinstance(tree, Exempt):
            return Failure(focus)
        parent, index = focus, None
        node = focus
        for i in tree.position:
            parent, index = node, i
            node = g.succs[node][i]
        sym = g.labels[node]
        if sym == CHOICE:
            return NeedsStep(Step("pulltab", parent, None, g.cids[node], index))
        if program.is_constructor(sym):
            child = tree.children.get(sym)
            if child is None:
                return Failure(focus)
            tree = child
            continue
        inner = head_step(program, g, node)
        if isinstance(inner, Failure):
            return Failure(focus)
        return inner


def redexes(program: Program, g: Graph):
    """Every step available by plain rewriting (no pull-tabs): each operation
    node whose arguments already match a rule, and both rules at each choice."""
    out = []
    for n, lab in g.labels.items():
        if lab == CHOICE:
            out.append(Step("rewrite", n, C1, g.cids[n]))
            out.append(Step("rewrite", n, C2, g.cids[n]))
        elif program.is_operation(lab):
            rule = _dispatch_without_eval(program, g, n)
            if rule is not None:
                out.append(Step("rewrite", n, rule))
    out.sort(key=lambda s: (s.node, s.rule.name))
    return out


def _dispatch_without_eval(program, g, n):
    tree = program.trees[g.labels[n]]
    while isinstance(tree, Branch):
        node = n
        for i in tree.position:
            node = g.succs[node][i]
        child = tree.children.get(g.labels[node])
        if child is None:
            return None
        tree = child
    return tree.rule if isinstance(tree, RuleLeaf) else None


def normal_form_step(program: Program, g: Graph, start=None, done=None):
    """Next action towards a constructor normal form of the subgraph at
    ``start`` (default: root).  Constructor arguments are handled left to right.

    Returns None when the subgraph is a value, otherwise a head_step-style
    result.  A choice directly below a constructor is reported as a pull-tab
    targeting that constructor.  ``done`` memoizes nodes known to be values.
    """
    done = set() if done is None else done
    start = g.root if start is None else start
    if start in done:
        return None
    lab = g.labels[start]
    if lab == CHOICE:
        return ChoiceAtRoot(start)
    if not program.is_constructor(lab):
        return head_step(program, g, start)
    stack = [(start, 0)]
    while stack:
        n, i = stack[-1]
        ss = g.succs[n]
        if i == len(ss):
            done.add(n)
            stack.pop()
            continue
        stack[-1] = (n, i + 1)
        s = ss[i]
        if s in done:
            continue
        lab = g.labels[s]
        if lab == CHOICE:
            return NeedsStep(Step("pulltab", n, None, g.cids[s], i))
        if not program.is_constructor(lab):
            return head_step(program, g, s)
        stack.append((s, 0))
    return None
