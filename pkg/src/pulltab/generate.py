"""Random programs, expressions and DAGs for the property suites."""

from __future__ import annotations

import random

from .graph import Allocator, Graph, default_allocator
from .program import ProgramError, load_program
from .pulltab import pulltab_candidates
from .rewrite import Step, apply_step, instantiate, redexes

PRELUDE = """\
data Bit = T | F
data Nat = Z | S/1
"""

_CONS = {"Bit": ["T", "F"], "Nat": ["Z", "S"]}


class _ProgramGen:
    """Random terminating LOIS programs.

    Operation ``f<i>`` only calls ``f<j>`` with ``j < i``, so every
    computation terminates.  Definitional trees are drawn first and the rules
    read off their leaves; some leaves stay without a rule so that failures
    occur.
    """

    def __init__(self, rng, max_ops=5, max_choice_depth=3):
        self.rng = rng
        self.max_choice_depth = max_choice_depth
        self.n_ops = rng.randint(1, max_ops - 1)  # plus main
        self.budget = 0  # choices left for the right-hand side being drawn

    def ty(self):
        return self.rng.choice(["Bit", "Bit", "Nat", "Pair"])

    def arg_ty(self):
        return self.rng.choice(["Bit", "Nat"])

    def expr(self, ty, env, ops, depth, choices):
        """Text of a random expression of type ``ty``.

        ``env`` maps variable -> type, ``ops`` lists callable (name, args, res).
        """
        rng = self.rng
        if choices < self.max_choice_depth and self.budget > 0 and depth < 3 and rng.random() < 0.3:
            self.budget -= 1
            left = self.expr(ty, env, ops, depth + 1, choices + 1)
            right = self.expr(ty, env, ops, depth + 1, choices + 1)
            return f"({left} ? {right})"
        options = []
        vs = [v for v, t in env.items() if t == ty]
        if vs:
            options += ["var"] * 3
        callable_ops = [o for o in ops if o[2] == ty]
        if callable_ops and depth < 3:
            options += ["op"] * 3
        options += ["con"] * 2
        kind = rng.choice(options)
        if kind == "var":
            return rng.choice(vs)
        if kind == "op":
            name, args, _ = rng.choice(callable_ops)
            parts = [name] + [self.expr(a, env, ops, depth + 1, choices) for a in args]
            return "(" + " ".join(parts) + ")" if args else name
        if ty == "Pair":
            a = self.expr(rng.choice(["Bit", "Nat"]), env, ops, depth + 1, choices)
            b = self.expr(rng.choice(["Bit", "Nat"]), env, ops, depth + 1, choices)
            return f"({a}, {b})"
        if ty == "Bit":
            return rng.choice(["T", "F"])
        if depth >= 3 or rng.random() < 0.4:
            return "Z"
        return f"(S {self.expr('Nat', env, ops, depth + 1, choices)})"

    def rules(self, name, arg_tys, res, ops):
        lines = []
        counter = [0]

        def fresh():
            counter[0] += 1
            return f"x{counter[0]}"

        # a pattern is a list of (text, type) per argument; the tree refines it
        def grow(pats, env, level):
            rng = self.rng
            vars_ = [(i, v) for i, (v, t) in enumerate(pats) if v in env and env[v] in _CONS]
            if vars_ and level < 2 and rng.random() < 0.6:
                i, v = rng.choice(vars_)
                t = env[v]
                for c in _CONS[t]:
                    sub_env = {k: tt for k, tt in env.items() if k != v}
                    if c == "S":
                        x = fresh()
                        sub_env[x] = "Nat"
                        text = f"(S {x})"
                    else:
                        text = c
                    new_pats = list(pats)
                    new_pats[i] = (text, t)
                    grow_leaf_or_branch(new_pats, sub_env, level + 1, nested=(i, x) if c == "S" else None)
                return
            leaf(pats, env)

        def grow_leaf_or_branch(pats, env, level, nested=None):
            rng = self.rng
            if nested and level < 2 and rng.random() < 0.3:
                i, x = nested
                for c in _CONS["Nat"]:
                    sub_env = {k: tt for k, tt in env.items() if k != x}
                    if c == "S":
                        y = fresh()
                        sub_env[y] = "Nat"
                        inner = f"(S {y})"
                    else:
                        inner = "Z"
                    new_pats = list(pats)
                    new_pats[i] = (f"(S {inner})", "Nat")
                    leaf(new_pats, sub_env)
                return
            grow(pats, env, level)

        def leaf(pats, env):
            if self.rng.random() < 0.15:
                return  # exempt: no rule
            lhs = " ".join([name] + [p for p, _ in pats])
            self.budget = 2
            where = ""
            env2 = dict(env)
            if self.rng.random() < 0.3:
                wt = self.arg_ty()
                env2["w"] = wt
                where = " where w = " + self.expr(wt, env, ops, 1, 0)
            rhs = self.expr(res, env2, ops, 0, 0)
            lines.append(f"{lhs} = {rhs}{where}")

        pats = []
        env = {}
        for t in arg_tys:
            v = fresh()
            pats.append((v, t))
            env[v] = t
        grow(pats, env, 0)
        return lines

    def program(self):
        ops = []
        lines = [PRELUDE]
        for i in range(self.n_ops):
            name = f"f{i}"
            arity = self.rng.randint(0, 2)
            args = [self.arg_ty() for _ in range(arity)]
            res = self.ty()
            rules = self.rules(name, args, res, ops)
            if not rules:
                lines.append(f"op {name}/{arity}")
            lines.extend(rules)
            ops.append((name, args, res))
        # main applies the last operation, often sharing a choice between
        # the call and a second pair component
        name, args, res = ops[-1]
        env, where = {}, ""
        self.budget = 3
        if self.rng.random() < 0.6:
            wt = self.arg_ty()
            env = {"w": wt}
            alts = [self.expr(wt, {}, ops, 2, 1) for _ in range(2)]
            where = f" where w = {alts[0]} ? {alts[1]}"
        parts = [name] + [self.expr(a, env, ops, 1, 0) for a in args]
        body = " ".join(parts)
        if where:
            body = f"({body}, w)"
        elif res != "Pair" and self.rng.random() < 0.4:
            body = f"({body}, {self.expr(self.arg_ty(), env, ops, 1, 0)})"
        body += where
        lines.append(f"main = {body}")
        return "\n".join(lines) + "\n"


def random_program_text(rng: random.Random, max_ops: int = 5, max_choice_depth: int = 3) -> str:
    return _ProgramGen(rng, max_ops, max_choice_depth).program()


def random_program(rng: random.Random, **kw):
    """(text, validated Program) for a random terminating LOIS program."""
    while True:
        text = random_program_text(rng, **kw)
        try:
            return text, load_program(text)
        except ProgramError:  # rare: a dropped leaf broke sequentiality
            continue


def random_walk(program, g: Graph, rng: random.Random, steps: int, allocator: Allocator | None = None,
                pulltabs: bool = True, choice_steps: bool = False, max_nodes: int = 40):
    """Apply up to ``steps`` random steps (non-choice rewrites and, optionally,
    pull-tabs and choice steps).  Returns the final graph and the steps taken."""
    alloc = allocator or default_allocator
    taken = []
    for _ in range(steps):
        options = [s for s in redexes(program, g) if choice_steps or not s.is_choice_step]
        if pulltabs:
            options += [Step("pulltab", t, None, g.cids[g.succs[t][i]], i) for t, i in pulltab_candidates(g)]
        if not options or len(g) > max_nodes:
            break
        pick = rng.choice(options)
        g = apply_step(g, pick, alloc)
        taken.append(pick)
    return g, taken


def random_state(rng: random.Random, allocator: Allocator | None = None, walk: int = 8,
                 max_ids: int = 4, **kw):
    """A random reachable computation state: (program, graph).

    The graph comes from the program's ``main`` after a random walk, so its
    choice decorations arise from real computations (pull-tabs may have
    duplicated identifiers)."""
    from .represented import choice_ids

    while True:
        _, prog = random_program(rng, **kw)
        g = parse_expression_from_entry(prog, allocator)
        g, _ = random_walk(prog, g, rng, rng.randint(0, walk), allocator)
        if len(choice_ids(g)) <= max_ids:
            return prog, g


def parse_expression_from_entry(prog, allocator=None):
    """A fresh instance of the program's ``main`` expression."""
    return instantiate(prog.entry, {}, allocator)


def random_dag(rng: random.Random, n: int, extra: float = 0.6, allocator: Allocator | None = None) -> Graph:
    """Random rooted DAG with ``n`` nodes; node ``k`` successors are later
    nodes.  Labels are ``f<arity>`` so arities stay consistent."""
    alloc = allocator or default_allocator
    ids = [alloc.node() for _ in range(n)]
    succs = {i: [] for i in range(n)}
    for i in range(1, n):
        succs[rng.randrange(i)].append(i)
        while rng.random() < extra / 2:
            succs[rng.randrange(i)].append(i)
    for ss in succs.values():
        rng.shuffle(ss)
    labels = {ids[i]: f"f{len(succs[i])}" for i in range(n)}
    return Graph(ids[0], labels, {ids[i]: tuple(ids[j] for j in succs[i]) for i in range(n)})


def div_family(n: int) -> str:
    """``1 + (2 + (... + (n `div` coin)))`` over Peano naturals, where
    ``coin = 0 ? 1`` and division by zero has no rule."""
    lines = [
        "data Nat = Z | S/1",
        "data Bool = True | False",
        "add x Z = x",
        "add x (S y) = S (add x y)",
        "lt x Z = False",
        "lt Z (S y) = True",
        "lt (S x) (S y) = lt x y",
        "sub x Z = x",
        "sub (S x) (S y) = sub x y",
        "div x (S y) = divh (lt x (S y)) x (S y)",
        "divh True x y = Z",
        "divh False x y = S (div (sub x y) y)",
        "coin = Z ? S Z",
    ]

    def num(k):
        return "Z" if k == 0 else f"(S {num(k - 1)})"

    expr = f"div {num(n)} coin"
    for k in range(n - 1, 0, -1):
        expr = f"add {num(k)} ({expr})"
    lines.append(f"main = {expr}")
    return "\n".join(lines) + "\n"


__all__ = [
    "random_program", "random_program_text", "random_walk", "random_state", "random_dag",
    "div_family", "parse_expression_from_entry",
]
