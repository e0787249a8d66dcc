"""Represented sets of decorated graphs and the invariance checks built on them.

The represented set of ``g`` collects every graph obtained by consistently
performing all (and only) the choice steps of ``g``: one decision per choice
identifier, applied to every reachable choice node carrying it.
"""

from __future__ import annotations

import itertools
from collections import deque

from .graph import CHOICE, Graph, canonicalize
from .pulltab import pull_tab
from .rewrite import apply_step, choice_step, redexes


def choice_ids(g: Graph) -> list:
    """Distinct choice ids of ``g`` in preorder of first occurrence."""
    seen = []
    stack = [g.root]
    visited = set()
    while stack:
        n = stack.pop()
        if n in visited:
            continue
        visited.add(n)
        if g.labels[n] == CHOICE and g.cids[n] not in seen:
            seen.append(g.cids[n])
        stack.extend(reversed(g.succs[n]))
    return seen


def _outermost_choice(g: Graph):
    stack = [g.root]
    visited = set()
    while stack:
        n = stack.pop()
        if n in visited:
            continue
        visited.add(n)
        if g.labels[n] == CHOICE:
            return n
        stack.extend(reversed(g.succs[n]))
    return None


def reduce_choices(g: Graph, assignment: dict, rng=None) -> Graph:
    """Perform every choice step of ``g`` according to ``assignment``
    (choice id -> 1 or 2).  Outermost first unless ``rng`` is given, in which
    case a random reachable choice is reduced at each step.  Choices erased by
    an earlier reduction are skipped."""
    while True:
        if rng is None:
            n = _outermost_choice(g)
        else:
            nodes = sorted(m for m, lab in g.labels.items() if lab == CHOICE)
            n = rng.choice(nodes) if nodes else None
        if n is None:
            return g
        g, _ = choice_step(g, n, assignment[g.cids[n]])


def represented_set(g: Graph, rng=None) -> set:
    """The represented set of ``g`` as a set of graphs (equality modulo
    renaming of nodes and choice ids)."""
    ids = choice_ids(g)
    out = set()
    for picks in itertools.product((1, 2), repeat=len(ids)):
        out.add(reduce_choices(g, dict(zip(ids, picks)), rng))
    return out


def assert_pulltab_invariance(g: Graph, target, source_index, allocator=None) -> bool:
    """Pull-tab at (target, source_index) and compare represented sets."""
    h = pull_tab(g, target, source_index, allocator)
    return represented_set(g) == represented_set(h)


def reachable_states(program, start: Graph, bound: int = 50, max_states: int = 20000, allocator=None):
    """Canonical forms of every graph reachable from ``start`` by plain
    rewriting in at most ``bound`` steps.  Returns (forms, truncated)."""
    seen = {canonicalize(start)}
    frontier = deque([(start, 0)])
    truncated = False
    while frontier:
        g, depth = frontier.popleft()
        steps = redexes(program, g)
        if steps and depth >= bound:
            truncated = True
            continue
        for step in steps:
            h = apply_step(g, step, allocator)
            key = canonicalize(h)
            if key in seen:
                continue
            if len(seen) >= max_states:
                return seen, True
            seen.add(key)
            frontier.append((h, depth + 1))
    return seen, truncated


def assert_nonchoice_invariance(program, g: Graph, step, bound: int = 50,
                                max_states: int = 20000, allocator=None):
    """Check both claims relating the represented sets of ``g`` and of the
    graph obtained by the non-choice rewrite ``step``.

    Returns True when both hold, False on a definite counterexample and None
    when the bounded search was cut short before finding a witness.
    """
    if step.is_choice_step or step.kind != "rewrite":
        raise ValueError("expected a non-choice rewrite step")
    h = apply_step(g, step, allocator)
    after = {canonicalize(e) for e in represented_set(h)}
    searches = [reachable_states(program, e, bound, max_states, allocator)
                for e in represented_set(g)]
    any_truncated = any(truncated for _, truncated in searches)
    reached = set().union(*(forms for forms, _ in searches))
    failed = inconclusive = False
    for forms, truncated in searches:  # claim (1)
        if not forms & after:
            if truncated:
                inconclusive = True
            else:
                failed = True
    for form in after:  # claim (2)
        if form not in reached:
            if any_truncated:
                inconclusive = True
            else:
                failed = True
    if failed:
        return False
    return None if inconclusive else True
