"""The pull-tab transformation."""

from __future__ import annotations

from .graph import CHOICE, Allocator, Graph, GraphError, default_allocator, redirect


class PullTabError(GraphError):
    pass


def pull_tab(g: Graph, target, source_index: int, allocator: Allocator | None = None) -> Graph:
    """Pull the choice at successor ``source_index`` of ``target`` above it.

    With ``target = f(s_1, .., ?(t1, t2), .., s_k)`` the result replaces the
    target by ``?(f(.., t1, ..), f(.., t2, ..))``: two copies of the target
    node and one new choice node carrying the source's choice id.  The other
    successors are shared, not copied.
    """
    alloc = allocator or default_allocator
    if target not in g.labels:
        raise PullTabError(f"node {target} is not in the graph")
    label = g.labels[target]
    if label == CHOICE:
        raise PullTabError("the target of a pull-tab cannot be a choice")
    succs = g.succs[target]
    if not 0 <= source_index < len(succs):
        raise PullTabError(f"node {target} has no successor {source_index}")
    source = succs[source_index]
    if g.labels[source] != CHOICE:
        raise PullTabError(f"successor {source_index} of node {target} is not a choice")
    t1, t2 = g.succs[source]
    left, right, top = alloc.node(), alloc.node(), alloc.node()
    labels = {left: label, right: label, top: CHOICE}
    new_succs = {
        left: succs[:source_index] + (t1,) + succs[source_index + 1:],
        right: succs[:source_index] + (t2,) + succs[source_index + 1:],
        top: (left, right),
    }
    return redirect(g, target, top, labels, new_succs, {top: g.cids[source]})


def pulltab_candidates(g: Graph):
    """All (target, index) pairs at which a pull-tab is possible."""
    out = []
    for n in sorted(g.labels):
        if g.labels[n] == CHOICE:
            continue
        for i, s in enumerate(g.succs[n]):
            if g.labels[s] == CHOICE:
                out.append((n, i))
    return out
