"""Rooted term graphs decorated with choice identifiers.

Graphs are persistent values: every operation that "changes" a graph returns a
new one and leaves its input untouched.  Node ids come from an
:class:`Allocator` and are never handed out twice in a session, so a node id
seen in two graphs always denotes the same node (same label, same choice id).
"""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass

CHOICE = "?"
PAIR = "(,)"


class GraphError(Exception):
    """Malformed graph or linear-notation text."""


@dataclass(frozen=True)
class Var:
    """Variable label; only occurs in rule patterns and right-hand sides."""

    name: str

    def __str__(self):
        return self.name


class Allocator:
    """Session-wide source of fresh node ids and choice ids.

    Both counters are monotone and guarded by a lock, so concurrent workers
    never receive the same id.
    """

    def __init__(self, start: int = 1):
        self._nodes = itertools.count(start)
        self._choices = itertools.count(start)
        self._lock = threading.Lock()
        self.nodes_issued = 0
        self.choices_issued = 0

    def node(self) -> int:
        with self._lock:
            self.nodes_issued += 1
            return next(self._nodes)

    def choice(self) -> int:
        with self._lock:
            self.choices_issued += 1
            return next(self._choices)


default_allocator = Allocator()


class Graph:
    """A single-rooted, acyclic term graph.

    ``labels`` maps node -> symbol name (``str``) or :class:`Var`,
    ``succs`` maps node -> tuple of successor nodes, ``cids`` maps every
    ``?``-labelled node to its choice identifier.  Only nodes reachable from
    ``root`` are stored.
    """

    __slots__ = ("root", "labels", "succs", "cids")

    def __init__(self, root, labels, succs, cids=None):
        self.root = root
        self.labels = labels
        self.succs = succs
        self.cids = cids if cids is not None else {}

    def label(self, n):
        return self.labels[n]

    def successors(self, n):
        return self.succs[n]

    def choice_id(self, n):
        return self.cids.get(n)

    def is_choice(self, n):
        return self.labels[n] == CHOICE

    def __contains__(self, n):
        return n in self.labels

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    @property
    def nodes(self):
        return self.labels.keys()

    def subgraph(self, n) -> "Graph":
        """The graph rooted at ``n`` (nodes shared with ``self``)."""
        keep = reachable(self, n)
        return Graph(
            n,
            {m: self.labels[m] for m in keep},
            {m: self.succs[m] for m in keep},
            {m: c for m, c in self.cids.items() if m in keep},
        )

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return graphs_equal(self, other)

    def __hash__(self):
        return hash(canonicalize(self))

    def __repr__(self):
        return f"Graph({print_linear(self)!r})"


def reachable(g: Graph, start=None) -> set:
    start = g.root if start is None else start
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for s in g.succs[n]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def topological_order(g: Graph, start=None) -> list:
    """Nodes reachable from ``start`` in post-order (children first).

    Raises GraphError on a cycle.
    """
    start = g.root if start is None else start
    order = []
    state = {start: 0}
    stack = [(start, iter(g.succs[start]))]
    while stack:
        n, it = stack[-1]
        for s in it:
            st = state.get(s)
            if st is None:
                state[s] = 0
                stack.append((s, iter(g.succs[s])))
                break
            if st == 0:
                raise GraphError(f"cycle through node {s}")
        else:
            stack.pop()
            state[n] = 1
            order.append(n)
    return order


def validate(g: Graph, signature=None) -> Graph:
    """Check the well-formedness invariants of ``g``; return it unchanged.

    ``signature``, when given, maps symbol name -> arity.
    """
    if g.root not in g.labels:
        raise GraphError("root is not a node of the graph")
    if set(g.labels) != set(g.succs):
        raise GraphError("labels and successors disagree on the node set")
    arities = {}
    varnames = {}
    for n, lab in g.labels.items():
        k = len(g.succs[n])
        if isinstance(lab, Var):
            if k:
                raise GraphError(f"variable {lab} has successors")
            if varnames.setdefault(lab.name, n) != n:
                raise GraphError(f"variable {lab} labels two nodes")
            continue
        if lab == CHOICE and k != 2:
            raise GraphError("choice node must have exactly two successors")
        if signature is not None:
            if lab not in signature:
                raise GraphError(f"unknown symbol {lab!r}")
            if signature[lab] != k:
                raise GraphError(f"arity mismatch for {lab!r}: {k} != {signature[lab]}")
        elif arities.setdefault(lab, k) != k:
            raise GraphError(f"symbol {lab!r} used with arities {arities[lab]} and {k}")
        for s in g.succs[n]:
            if s not in g.labels:
                raise GraphError(f"dangling successor {s} of node {n}")
    choice_nodes = {n for n, lab in g.labels.items() if lab == CHOICE}
    if set(g.cids) != choice_nodes:
        raise GraphError("choice ids must decorate exactly the choice nodes")
    if reachable(g) != set(g.labels):
        raise GraphError("graph has unreachable nodes")
    topological_order(g)
    return g


def is_ground(g: Graph) -> bool:
    return not any(isinstance(lab, Var) for lab in g.labels.values())


# -- canonical forms ---------------------------------------------------------

def canonicalize(g: Graph) -> tuple:
    """Canonical form of ``g`` modulo node renaming and choice-id renaming.

    Nodes are numbered in depth-first preorder from the root, following
    successor order; choice ids are numbered by first occurrence in the same
    traversal.  Each entry is ``(ordinal, label, child_ordinals, cid_ordinal)``.
    """
    topological_order(g)  # rejects cycles
    number = {}
    order = []
    stack = [g.root]
    while stack:
        n = stack.pop()
        if n in number:
            continue
        number[n] = len(order)
        order.append(n)
        stack.extend(reversed(g.succs[n]))
    cid_number = {}
    out = []
    for n in order:
        cid = g.cids.get(n)
        if cid is not None:
            cid = cid_number.setdefault(cid, len(cid_number))
        lab = g.labels[n]
        if isinstance(lab, Var):
            lab = ("var", lab.name)
        out.append((number[n], lab, tuple(number[s] for s in g.succs[n]), cid))
    return tuple(out)


def graphs_equal(g1: Graph, g2: Graph) -> bool:
    return canonicalize(g1) == canonicalize(g2)


# -- replacement -------------------------------------------------------------

def _collect(labels, succs, root):
    keep = {root}
    stack = [root]
    while stack:
        n = stack.pop()
        for s in succs[n]:
            if s not in keep:
                keep.add(s)
                stack.append(s)
    return keep


def redirect(g: Graph, n, new_root, new_labels=None, new_succs=None, new_cids=None) -> Graph:
    """``g[n <- new_root]`` where ``new_root`` is either a node of ``g`` or one
    of the freshly built nodes described by ``new_labels``/``new_succs``.

    Every edge into ``n`` is redirected to ``new_root``; unreachable nodes are
    dropped.  Used by :func:`replace_at` and by the step functions, which
    build their replacements directly.
    """
    if n not in g.labels:
        raise GraphError(f"node {n} is not in the graph")
    labels = dict(g.labels)
    succs = dict(g.succs)
    cids = dict(g.cids)
    if new_labels:
        for m, lab in new_labels.items():
            if m in g.labels and (g.labels[m] != lab or g.succs[m] != tuple(new_succs[m])):
                raise GraphError(f"replacement disagrees with graph on node {m}")
            labels[m] = lab
            succs[m] = tuple(new_succs[m])
        if new_cids:
            cids.update(new_cids)
    if n != new_root:
        for m, ss in g.succs.items():
            if n in ss:
                succs[m] = tuple(new_root if s == n else s for s in ss)
    root = new_root if g.root == n else g.root
    keep = _collect(labels, succs, root)
    return Graph(
        root,
        {m: labels[m] for m in keep},
        {m: succs[m] for m in keep},
        {m: c for m, c in cids.items() if m in keep},
    )


def replace_at(g: Graph, n, h: Graph) -> Graph:
    """Replace the subgraph rooted at ``n`` with ``h``.

    ``h`` may share nodes with ``g``; shared nodes must agree on label and
    successors.  Neither ``g`` nor ``h`` is modified.
    """
    return redirect(g, n, h.root, h.labels, h.succs, h.cids)


# -- linear notation ---------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\(,\))|([(),:])|([^\s(),:]+))")


def _tokenize(text):
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GraphError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pair, punct, word = m.groups()
        if pair:
            toks.append(("sym", PAIR))
        elif punct:
            toks.append((punct, punct))
        else:
            toks.append(("sym", word))
        pos = m.end()
    return toks


def parse_linear(text: str, allocator: Allocator | None = None, signature=None) -> Graph:
    """Parse linear notation such as ``(,)(n1:flip(n2:coin), flip(n2))``.

    A name bound with ``name:`` may later appear bare to denote the same
    node.  ``?_k`` pins the choice id of a choice node to ``k``; unpinned
    choices get fresh ids.  Variables are written ``$x``.
    """
    alloc = allocator or default_allocator
    toks = _tokenize(text)
    pos = 0
    labels, succs, cids = {}, {}, {}
    names = {}
    name_labels = {}
    pending = set()  # names whose node is still being parsed
    varnodes = {}

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def expect(kind):
        nonlocal pos
        tok = peek()
        if tok[0] != kind:
            raise GraphError(f"expected {kind!r}, got {tok[1]!r}")
        pos += 1
        return tok[1]

    def expr():
        nonlocal pos
        word = expect("sym")
        name = None
        if peek()[0] == ":":
            pos += 1
            name = word
            if name in names:
                raise GraphError(f"name {name!r} bound twice")
            word = expect("sym")
            pending.add(name)
        elif word in pending and peek()[0] != "(":
            raise GraphError(f"cycle through {word!r}")
        elif word in names and peek()[0] != "(":
            return names[word]
        args = []
        if peek()[0] == "(":
            pos += 1
            args.append(expr())
            while peek()[0] == ",":
                pos += 1
                args.append(expr())
            expect(")")
        pin = None
        if word.startswith(CHOICE + "_") and len(word) > 2:
            word, pin = CHOICE, word[2:]
        if word.startswith("$"):
            if args:
                raise GraphError(f"variable {word} applied to arguments")
            vname = word[1:]
            if vname in varnodes:
                node = varnodes[vname]
            else:
                node = alloc.node()
                varnodes[vname] = node
                labels[node] = Var(vname)
                succs[node] = ()
        else:
            if signature is not None:
                if word not in signature:
                    raise GraphError(f"unknown symbol {word!r}")
                if signature[word] != len(args):
                    raise GraphError(f"arity mismatch for {word!r}")
            if word == CHOICE and len(args) != 2:
                raise GraphError("choice takes two arguments")
            node = alloc.node()
            labels[node] = word
            succs[node] = tuple(args)
            if word == CHOICE:
                cids[node] = pin if pin is not None else alloc.choice()
        if name is not None:
            pending.discard(name)
            names[name] = node
            name_labels[name] = labels[node]
        return node

    root = expr()
    if pos != len(toks):
        raise GraphError(f"trailing input: {toks[pos][1]!r}")
    keep = _collect(labels, succs, root)
    g = Graph(root, {m: labels[m] for m in keep}, {m: succs[m] for m in keep},
              {m: c for m, c in cids.items() if m in keep})
    return validate(g)


def _indegrees(g: Graph) -> dict:
    deg = dict.fromkeys(g.labels, 0)
    for ss in g.succs.values():
        for s in ss:
            deg[s] += 1
    return deg


def _fmt_label(lab, cid, show_ids):
    if isinstance(lab, Var):
        return "$" + lab.name
    if lab == CHOICE and show_ids:
        return f"{CHOICE}_{cid}"
    return lab


def print_linear(g: Graph, show_ids: bool = True) -> str:
    """Linear notation for ``g``; only shared nodes (in-degree >= 2) are named.

    Names are ``n<k>`` with ``k`` the node's preorder position, so the output
    does not depend on node ids.
    """
    deg = _indegrees(g)
    symbols = {lab for lab in g.labels.values() if isinstance(lab, str)}
    order = {n: i for i, n in enumerate(_preorder(g))}
    printed = set()
    out = []

    def name(n):
        base = f"n{order[n]}"
        while base in symbols:
            base = "_" + base
        return base

    stack = [("node", g.root)]
    while stack:
        kind, item = stack.pop()
        if kind == "text":
            out.append(item)
            continue
        n = item
        if n in printed:
            out.append(name(n))
            continue
        printed.add(n)
        if deg[n] >= 2:
            out.append(name(n) + ":")
        out.append(_fmt_label(g.labels[n], g.cids.get(n), show_ids))
        ss = g.succs[n]
        if ss:
            todo = [("text", "(")]
            for i, s in enumerate(ss):
                if i:
                    todo.append(("text", ","))
                todo.append(("node", s))
            todo.append(("text", ")"))
            stack.extend(reversed(todo))
    return "".join(out)


def _preorder(g: Graph):
    seen = set()
    stack = [g.root]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        yield n
        stack.extend(reversed(g.succs[n]))


# -- DOT ---------------------------------------------------------------------

def _dot_quote(s):
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def dot_export(g: Graph, name: str = "G") -> str:
    lines = [f"digraph {_dot_quote(name)} {{", "  node [shape=plaintext];"]
    for n in _preorder(g):
        lab = g.labels[n]
        text = _fmt_label(lab, None, False)
        if lab == CHOICE:
            text = f"? [{g.cids[n]}]"
        lines.append(f"  n{n} [label={_dot_quote(text)}];")
    for n in _preorder(g):
        for i, s in enumerate(g.succs[n], 1):
            lines.append(f'  n{n} -> n{s} [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
