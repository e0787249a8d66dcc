"""Program files: parsing, LOIS validation and definitional trees.

File format::

    -- comment
    data Bit = 0 | 1
    data Nat = Z | S/1
    op fail/0                      -- operation without rules
    flip 0 = 1
    flip 1 = 0
    coin = 0 ? 1
    main = (flip x, flip x) where x = coin

Constructors are declared by ``data`` lines (``c/k`` gives arity k, default
0); the pair constructor ``(,)`` is built in.  Any other identifier in a
pattern is a variable, ``_`` is an anonymous variable.  Right-hand sides use
curried application, the infix choice ``?`` (lowest precedence, right
associative), tuples ``(a, b)`` and a ``where`` clause whose bindings become
shared nodes.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .graph import CHOICE, PAIR, Allocator, Graph, Var, reachable, validate

# -- data ----------------------------------------------------------------


class ProgramError(Exception):
    """A program failed to parse or is not LOIS.

    ``violations`` lists ``(line, message)`` pairs; line is 0 when unknown.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [(0, violations)]
        self.violations = list(violations)
        super().__init__("; ".join(f"line {ln}: {msg}" if ln else msg for ln, msg in self.violations))


class NotInductivelySequential(ProgramError):
    def __init__(self, op, line=0):
        self.op = op
        super().__init__([(line, f"operation {op!r} is not inductively sequential")])


@dataclass(frozen=True)
class Term:
    """Pattern term: a symbol applied to sub-patterns (Var or Term)."""

    symbol: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(map(str, self.args))})"


@dataclass(eq=False)
class Rule:
    """A rewrite rule ``lhs -> rhs``.

    ``lhs`` is a linear constructor pattern rooted by ``op``; ``rhs`` is a graph
    whose variable nodes stand for the lhs variables.
    """

    name: str
    op: str
    lhs: Term
    rhs: Graph
    line: int = 0

    @property
    def variables(self):
        return list(pattern_vars(self.lhs))

    def __repr__(self):
        return f"Rule({self.name}: {self.lhs} = ...)"


def pattern_vars(p):
    if isinstance(p, Var):
        yield p.name
    else:
        for a in p.args:
            yield from pattern_vars(a)


def _choice_rules():
    # x ? _ = x   and   _ ? y = y
    c1 = Rule("C1", CHOICE, Term(CHOICE, (Var("x"), Var("_1"))),
              Graph(0, {0: Var("x")}, {0: ()}))
    c2 = Rule("C2", CHOICE, Term(CHOICE, (Var("_1"), Var("y"))),
              Graph(0, {0: Var("y")}, {0: ()}))
    return c1, c2


C1, C2 = _choice_rules()


# definitional tree nodes

@dataclass
class Branch:
    pattern: Term
    position: tuple  # path of argument indices (0-based) from the root
    children: dict   # constructor name -> subtree


@dataclass
class RuleLeaf:
    pattern: Term
    rule: Rule


@dataclass
class Exempt:
    pattern: Term


@dataclass
class Program:
    constructors: dict            # name -> arity
    operations: dict              # name -> arity (includes "?")
    ctype: dict                   # constructor -> type name
    types: dict                   # type name -> list of constructors
    rules: list
    trees: dict = field(default_factory=dict)
    entry: Graph | None = None    # rhs of ``main`` if defined

    @property
    def signature(self):
        sig = dict(self.constructors)
        sig.update(self.operations)
        return sig

    def is_constructor(self, sym):
        return sym in self.constructors

    def is_operation(self, sym):
        return sym in self.operations and sym != CHOICE

    def rules_for(self, op):
        return [r for r in self.rules if r.op == op]

    def rule_named(self, name):
        if name == "C1":
            return C1
        if name == "C2":
            return C2
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)


# -- lexing / parsing ----------------------------------------------------

_TOK = re.compile(r"\s*(?:(\(,\))|([()=,;?|])|([A-Za-z0-9_'][A-Za-z0-9_']*(?:/\d+)?))")


def _lex(text, line):
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m or m.end() == pos:
            raise ProgramError([(line, f"syntax error near {text[pos:pos + 12]!r}")])
        pair, punct, word = m.groups()
        toks.append(PAIR if pair else (punct or word))
        pos = m.end()
    return toks


class _Cursor:
    def __init__(self, toks, line):
        self.toks = toks
        self.pos = 0
        self.line = line

    def peek(self, k=0):
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of line")
        self.pos += 1
        return tok

    def expect(self, tok):
        got = self.next()
        if got != tok:
            self.error(f"expected {tok!r}, got {got!r}")

    def error(self, msg):
        raise ProgramError([(self.line, msg)])


_IDENT = re.compile(r"[A-Za-z0-9_'][A-Za-z0-9_']*$")


def _is_ident(tok):
    return tok is not None and tok != "where" and bool(_IDENT.match(tok))


# expression ASTs used between parsing and graph construction
# ("app", sym, [args]) | ("name", ident)


def _parse_expr(cur):
    left = _parse_app(cur)
    if cur.peek() == CHOICE:
        cur.next()
        return ("app", CHOICE, [left, _parse_expr(cur)])
    return left


def _parse_app(cur):
    tok = cur.peek()
    if tok == PAIR:
        cur.next()
        head = PAIR
    elif _is_ident(tok):
        cur.next()
        head = tok
    else:
        return _parse_atom(cur)
    args = []
    while _is_ident(cur.peek()) or cur.peek() in ("(", PAIR):
        if cur.peek() == PAIR:
            cur.next()
            args.append(("name", PAIR))
        else:
            args.append(_parse_atom(cur))
    return ("app", head, args) if args else ("name", head)


def _parse_atom(cur):
    tok = cur.next()
    if _is_ident(tok):
        return ("name", tok)
    if tok == "(":
        inner = _parse_expr(cur)
        if cur.peek() == ",":
            cur.next()
            second = _parse_expr(cur)
            cur.expect(")")
            return ("app", PAIR, [inner, second])
        cur.expect(")")
        return inner
    cur.error(f"unexpected token {tok!r}")


def _parse_pattern(cur, constructors, fresh):
    """pat := con apat* | apat"""
    tok = cur.peek()
    if _is_ident(tok) and tok in constructors and constructors[tok] > 0:
        cur.next()
        args = [_parse_apat(cur, constructors, fresh) for _ in range(constructors[tok])]
        return Term(tok, tuple(args))
    return _parse_apat(cur, constructors, fresh)


def _parse_apat(cur, constructors, fresh):
    tok = cur.next()
    if tok == "_":
        return Var(f"_{next(fresh)}")
    if tok == "(":
        p = _parse_pattern(cur, constructors, fresh)
        if cur.peek() == ",":
            cur.next()
            q = _parse_pattern(cur, constructors, fresh)
            cur.expect(")")
            return Term(PAIR, (p, q))
        cur.expect(")")
        return p
    if _is_ident(tok):
        if tok in constructors:
            if constructors[tok]:
                cur.error(f"constructor {tok!r} needs {constructors[tok]} arguments (parenthesize)")
            return Term(tok)
        if tok[0].isdigit():
            cur.error(f"unknown constructor {tok!r}")
        return Var(tok)
    cur.error(f"unexpected token {tok!r} in pattern")


@dataclass
class _RawRule:
    op: str
    lhs: Term
    body: tuple
    where: list
    line: int


def parse_program(text: str) -> Program:
    """Parse program text into an unvalidated :class:`Program` (no trees)."""
    constructors = {PAIR: 2}
    ctype = {PAIR: "Pair"}
    types = {"Pair": [PAIR]}
    declared_ops = {}
    raw_lines = []
    errors = []

    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("--", 1)[0].strip()
        if not line:
            continue
        try:
            toks = _lex(line, ln)
        except ProgramError as e:
            errors.extend(e.violations)
            continue
        if toks[0] == "data":
            if len(toks) < 4 or toks[2] != "=":
                errors.append((ln, "malformed data declaration"))
                continue
            tname = toks[1]
            cons = []
            for tok in toks[3:]:
                if tok == "|":
                    continue
                name, _, ar = tok.partition("/")
                if name in constructors:
                    errors.append((ln, f"constructor {name!r} declared twice"))
                    continue
                constructors[name] = int(ar) if ar else 0
                ctype[name] = tname
                cons.append(name)
            types.setdefault(tname, []).extend(cons)
        elif toks[0] == "op" and "=" not in toks:
            for tok in toks[1:]:
                name, _, ar = tok.partition("/")
                declared_ops[name] = int(ar) if ar else 0
        else:
            raw_lines.append((ln, toks))

    if errors:
        raise ProgramError(errors)

    # First pass: left-hand sides determine operations and their arities.
    operations = dict(declared_ops)
    raws = []
    fresh = itertools.count(1)
    for ln, toks in raw_lines:
        if "=" not in toks:
            errors.append((ln, "expected a rule 'op pats = rhs'"))
            continue
        cur = _Cursor(toks, ln)
        try:
            op, lhs = _parse_lhs(cur, constructors, fresh)
            cur.expect("=")
            body = _parse_expr(cur)
            where = []
            if cur.peek() == "where":
                cur.next()
                while True:
                    name = cur.next()
                    if not _is_ident(name):
                        cur.error(f"bad where binding {name!r}")
                    cur.expect("=")
                    where.append((name, _parse_expr(cur)))
                    if cur.peek() in (",", ";"):
                        cur.next()
                        continue
                    break
            if cur.peek() is not None:
                cur.error(f"unexpected {cur.peek()!r}")
        except ProgramError as e:
            errors.extend(e.violations)
            continue
        if op in constructors:
            errors.append((ln, f"constructor {op!r} heads a rule"))
            continue
        arity = len(lhs.args)
        if operations.setdefault(op, arity) != arity:
            errors.append((ln, f"arity inconsistency for {op!r}"))
            continue
        raws.append(_RawRule(op, lhs, body, where, ln))

    for raw in raws:
        for v in pattern_vars(raw.lhs):
            if v in operations:
                errors.append((raw.line, f"operation {v!r} in a pattern: rules must be constructor-based"))
    operations[CHOICE] = 2
    counters = {}
    rules = []
    for raw in raws:
        try:
            rhs = _build_rhs(raw, constructors, operations)
        except ProgramError as e:
            errors.extend(e.violations)
            continue
        k = counters[raw.op] = counters.get(raw.op, 0) + 1
        rules.append(Rule(f"{raw.op}#{k}", raw.op, raw.lhs, rhs, raw.line))
    if errors:
        raise ProgramError(errors)
    prog = Program(constructors, operations, ctype, types, rules)
    main = [r for r in rules if r.op == "main" and not r.lhs.args]
    if main:
        prog.entry = main[0].rhs
    return prog


def _parse_lhs(cur, constructors, fresh):
    # infix choice lhs: pat ? pat
    if CHOICE in cur.toks[: cur.toks.index("=")]:
        p = _parse_apat(cur, constructors, fresh)
        cur.expect(CHOICE)
        q = _parse_apat(cur, constructors, fresh)
        return CHOICE, Term(CHOICE, (p, q))
    op = cur.next()
    if not (_is_ident(op) or op == CHOICE):
        cur.error(f"bad rule head {op!r}")
    args = []
    while cur.peek() != "=":
        args.append(_parse_apat(cur, constructors, fresh))
    return op, Term(op, tuple(args))


def _build_rhs(raw, constructors, operations):
    """Turn a rule body (plus where bindings) into a rhs graph with Var nodes."""
    line = raw.line
    lhs_vars = list(pattern_vars(raw.lhs))
    seen = set()
    for v in lhs_vars:
        if v in seen:
            raise ProgramError([(line, f"variable {v!r} occurs twice in the left-hand side")])
        seen.add(v)
    ids = itertools.count()
    labels, succs = {}, {}
    env = {}

    def var_node(name):
        if name not in env:
            k = next(ids)
            labels[k] = Var(name)
            succs[k] = ()
            env[name] = k
        return env[name]

    for v in lhs_vars:
        if not v.startswith("_"):
            var_node(v)
    bound = {}

    def build(ast):
        kind = ast[0]
        if kind == "name":
            name = ast[1]
            if name in bound:
                return bound[name]
            if name in env:
                return env[name]
            if name in constructors or name in operations:
                return build(("app", name, []))
            if name[0].isdigit() or name[0].isupper():
                raise ProgramError([(line, f"unknown symbol {name!r}")])
            raise ProgramError([(line, f"right-hand side variable {name!r} not bound in the left-hand side")])
        _, sym, args = ast
        if sym in env or sym in bound:
            raise ProgramError([(line, f"variable {sym!r} applied to arguments")])
        if sym in constructors:
            arity = constructors[sym]
        elif sym in operations:
            arity = operations[sym]
        else:
            raise ProgramError([(line, f"unknown symbol {sym!r}")])
        if len(args) != arity:
            raise ProgramError([(line, f"{sym!r} expects {arity} arguments, got {len(args)}")])
        kids = tuple(build(a) for a in args)
        k = next(ids)
        labels[k] = sym
        succs[k] = kids
        return k

    for name, ast in raw.where:
        if name in env or name in bound:
            raise ProgramError([(line, f"where binding {name!r} shadows a variable")])
        bound[name] = build(ast)
    root = build(raw.body)
    # drop where bindings that are never used
    g = Graph(root, labels, succs, {k: f"r{k}" for k, lab in labels.items() if lab == CHOICE})
    keep = reachable(g)
    g = Graph(root, {k: labels[k] for k in keep}, {k: succs[k] for k in keep},
              {k: c for k, c in g.cids.items() if k in keep})
    return validate(g)


# -- definitional trees --------------------------------------------------


def _subpattern(p, path):
    for i in path:
        p = p.args[i]
    return p


def _replace(p, path, new):
    if not path:
        return new
    i = path[0]
    args = list(p.args)
    args[i] = _replace(args[i], path[1:], new)
    return Term(p.symbol, tuple(args))


def _var_paths(p, prefix=()):
    """Paths to variables of ``p`` in left-to-right order."""
    if isinstance(p, Var):
        yield prefix
        return
    for i, a in enumerate(p.args):
        yield from _var_paths(a, prefix + (i,))


def _same_shape(p, q):
    """True if patterns are equal up to variable renaming."""
    if isinstance(p, Var) or isinstance(q, Var):
        return isinstance(p, Var) and isinstance(q, Var)
    return p.symbol == q.symbol and len(p.args) == len(q.args) and all(
        _same_shape(a, b) for a, b in zip(p.args, q.args))


def _head_at(p, path):
    """Symbol of ``p`` at ``path``, or None if a variable is on the way."""
    for i in path:
        if isinstance(p, Var):
            return None
        p = p.args[i]
    return None if isinstance(p, Var) else p.symbol


def build_tree(op, rules, arity=None, constructors=None, types=None, ctype=None):
    """Build the definitional tree of ``op`` from its rules.

    At each branch the leftmost variable position at which every remaining
    rule has a constructor is chosen.  Raises NotInductivelySequential when no
    such position exists.  ``constructors``/``types``/``ctype`` describe the
    data declarations; when omitted, the constructors seen in the rules are
    the only ones considered.
    """
    if op == CHOICE:
        raise ValueError("the choice operation has no definitional tree")
    rules = list(rules)
    for r in rules:
        if r.op != op:
            raise ValueError(f"rule {r.name} does not define {op!r}")
    if arity is None:
        arity = len(rules[0].lhs.args) if rules else 0
    if constructors is None:
        constructors = {}
        for r in rules:
            _collect_constructors(r.lhs, constructors, skip_root=True)
    counter = itertools.count(1)
    root = Term(op, tuple(Var(f"v{next(counter)}") for _ in range(arity)))
    line = rules[0].line if rules else 0
    return _tree(root, rules, op, constructors, types, ctype, counter, line)


def _collect_constructors(p, out, skip_root=False):
    if isinstance(p, Var):
        return
    if not skip_root:
        out[p.symbol] = len(p.args)
    for a in p.args:
        _collect_constructors(a, out)


def _tree(pattern, rules, op, constructors, types, ctype, counter, line):
    if not rules:
        return Exempt(pattern)
    exact = [r for r in rules if _same_shape(r.lhs, pattern)]
    if exact:
        if len(rules) > 1:
            raise NotInductivelySequential(op, line)
        return RuleLeaf(pattern, exact[0])
    for path in _var_paths(pattern):
        heads = [_head_at(r.lhs, path) for r in rules]
        if all(h is not None for h in heads):
            break
    else:
        raise NotInductivelySequential(op, line)
    # constructors to branch on: every constructor of every type involved
    cons = []
    for h in heads:
        group = types[ctype[h]] if types and ctype and h in ctype else [h]
        for c in group:
            if c not in cons:
                cons.append(c)
    children = {}
    for c in cons:
        sub = Term(c, tuple(Var(f"v{next(counter)}") for _ in range(constructors[c])))
        child_pattern = _replace(pattern, path, sub)
        child_rules = [r for r, h in zip(rules, heads) if h == c]
        children[c] = _tree(child_pattern, child_rules, op, constructors, types, ctype, counter, line)
    return Branch(pattern, path, children)


def tree_leaves(tree):
    if isinstance(tree, Branch):
        for child in tree.children.values():
            yield from tree_leaves(child)
    else:
        yield tree


def validate_lois(p: Program) -> Program:
    """Check that ``p`` is LOIS and attach a definitional tree to every
    operation.  All violations are reported together."""
    errors = []
    for r in p.rules:
        names = list(pattern_vars(r.lhs))
        if len(names) != len(set(names)):
            errors.append((r.line, f"rule {r.name} is not left-linear"))
        if r.op != CHOICE:
            for a in r.lhs.args:
                if _has_operation(a, p):
                    errors.append((r.line, f"rule {r.name} is not constructor-based"))
                    break
    user_choice = [r for r in p.rules if r.op == CHOICE]
    kinds = []
    for r in user_choice:
        if _same_shape(r.lhs, C1.lhs) and _is_projection(r, 0):
            kinds.append(1)
        elif _same_shape(r.lhs, C2.lhs) and _is_projection(r, 1):
            kinds.append(2)
        else:
            errors.append((r.line, "the choice operation may only be defined by 'x ? _ = x' and '_ ? y = y'"))
    if len(user_choice) > 2:
        errors.append((user_choice[2].line, "extra rule for the choice operation"))
    elif len(kinds) == len(user_choice) and user_choice and sorted(kinds) != [1, 2]:
        errors.append((user_choice[0].line, "the choice operation must keep both of its rules"))
    trees = {}
    single = None
    for op, arity in p.operations.items():
        if op == CHOICE:
            continue
        rs = [r for r in p.rules_for(op)]
        if any(not _linear(r.lhs) for r in rs):
            continue
        try:
            trees[op] = build_tree(op, rs, arity, p.constructors, p.types, p.ctype)
        except NotInductivelySequential as e:
            if not errors:
                single = e
            errors.extend(e.violations)
    if len(errors) == 1 and single is not None:
        raise single
    if errors:
        raise ProgramError(errors)
    p.rules = [r for r in p.rules if r.op != CHOICE]
    p.trees = trees
    return p


def _is_projection(r, index):
    lab = r.rhs.labels[r.rhs.root]
    return isinstance(lab, Var) and lab == r.lhs.args[index]


def _linear(p):
    names = list(pattern_vars(p))
    return len(names) == len(set(names))


def _has_operation(p, prog):
    if isinstance(p, Var):
        return False
    if p.symbol not in prog.constructors:
        return True
    return any(_has_operation(a, prog) for a in p.args)


def load_program(text: str) -> Program:
    return validate_lois(parse_program(text))


def parse_expression(text: str, program: Program, allocator: Allocator | None = None) -> Graph:
    """Parse a ground expression in program syntax (``flip coin``, ``(x, x)
    where x = coin``) into a fresh top-level graph."""
    from .rewrite import instantiate

    toks = _lex(text, 0)
    cur = _Cursor(toks, 0)
    body = _parse_expr(cur)
    where = []
    if cur.peek() == "where":
        cur.next()
        while True:
            name = cur.next()
            cur.expect("=")
            where.append((name, _parse_expr(cur)))
            if cur.peek() in (",", ";"):
                cur.next()
                continue
            break
    if cur.peek() is not None:
        cur.error(f"unexpected {cur.peek()!r}")
    raw = _RawRule("<expr>", Term("<expr>"), body, where, 0)
    template = _build_rhs(raw, program.constructors, program.operations)
    return instantiate(template, {}, allocator)
