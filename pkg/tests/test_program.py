import itertools

import pytest

from pulltab import (CHOICE, Branch, Exempt, NotInductivelySequential, ProgramError, RuleLeaf, Var,
                     build_tree, graphs_equal, load_program, parse_expression, parse_linear,
                     parse_program, print_linear, validate, validate_lois)
from pulltab.graph import Graph
from pulltab.program import tree_leaves
from pulltab.rewrite import match

PEANO = """\
data Nat = Z | S/1
data Bool = True | False
add x Z = x
add x (S y) = S (add x y)
lt x Z = False
lt Z (S y) = True
lt (S x) (S y) = lt x y
half Z = Z
half (S Z) = Z
half (S (S n)) = S (half n)
"""


def test_parse_flip(flip_text):
    p = parse_program(flip_text)
    assert set(p.constructors) == {"0", "1", "(,)"}
    assert {o for o in p.operations if o != CHOICE} == {"flip", "coin", "main"}
    assert len([r for r in p.rules if r.op in ("flip", "coin")]) == 3


def test_where_binding_is_shared(flip):
    (main,) = flip.rules_for("main")
    rhs = main.rhs
    left, right = rhs.succs[rhs.root]
    assert rhs.labels[left] == rhs.labels[right] == "flip"
    assert rhs.succs[left] == rhs.succs[right]
    assert print_linear(rhs) == "(,)(flip(n2:coin),flip(n2))"
    assert graphs_equal(flip.entry, parse_linear("(,)(flip(c:coin), flip(c))"))


def test_where_multiple_bindings():
    p = load_program("data B = T | F\nnot T = F\nnot F = T\n"
                     "main = (y, y) where x = T ? F, y = not x\n")
    rhs = p.entry
    a, b = rhs.succs[rhs.root]
    assert a == b and rhs.labels[a] == "not"


def test_rhs_variable_unbound():
    with pytest.raises(ProgramError) as exc:
        parse_program("data B = T | F\nf x = g y\ng x = x\n")
    assert any("y" in msg for _, msg in exc.value.violations)


@pytest.mark.parametrize("text", [
    "data B = T | F\nf T = \n",            # syntax
    "data B = T | F\nf x = T T\n",          # constructor arity
    "data B = T | F\nf x = x\ng = f T F\n",  # operation arity
    "data B = T | F\nf x = unknown\n",      # unknown symbol
    "data B = T | F\nT = F\n",              # constructor heads a rule
])
def test_parse_errors(text):
    with pytest.raises(ProgramError):
        load_program(text)


def test_comments_and_blank_lines():
    p = load_program("-- header\n\ndata B = T | F  -- two values\nid x = x -- trailing\n")
    assert "id" in p.trees


def test_constructor_arity_suffix():
    p = load_program(PEANO)
    assert p.constructors["S"] == 1 and p.constructors["Z"] == 0
    assert p.ctype["S"] == "Nat" and p.types["Bool"] == ["True", "False"]


def test_flip_tree(flip):
    tree = flip.trees["flip"]
    assert isinstance(tree, Branch) and tree.position == (0,)
    assert set(tree.children) == {"0", "1"}
    for c, child in tree.children.items():
        assert isinstance(child, RuleLeaf)
        assert child.rule.lhs.args[0].symbol == c


def test_zero_rule_operation_is_exempt():
    p = load_program("data B = T | F\nop undefined/1\nmain = undefined T\n")
    assert isinstance(p.trees["undefined"], Exempt)
    assert isinstance(build_tree("g", [], arity=2), Exempt)


def test_partial_operation_has_exempt_leaf():
    p = load_program("data B = T | F\nonlyT T = T\n")
    tree = p.trees["onlyT"]
    assert isinstance(tree.children["F"], Exempt)


def test_overlapping_rules_rejected():
    with pytest.raises(NotInductivelySequential) as exc:
        load_program("data B = 0 | 1\nf 0 x = 0\nf x 0 = 1\n")
    assert exc.value.op == "f"


def test_build_tree_direct_overlap():
    p = parse_program("data B = 0 | 1\nf 0 x = 0\nf x 0 = 1\n")
    with pytest.raises(NotInductivelySequential):
        build_tree("f", p.rules_for("f"))


def test_nested_patterns():
    p = load_program(PEANO)
    tree = p.trees["half"]
    assert tree.position == (0,)
    inner = tree.children["S"]
    assert isinstance(inner, Branch) and inner.position == (0, 0)


def test_leftmost_position_chosen():
    p = load_program("data B = T | F\nand T T = T\nand T F = F\nand F T = F\nand F F = F\n")
    assert p.trees["and"].position == (0,)


def test_leaves_biject_with_rules():
    p = load_program(PEANO)
    for op in ("add", "lt", "half"):
        leaves = list(tree_leaves(p.trees[op]))
        rules = [leaf.rule for leaf in leaves if isinstance(leaf, RuleLeaf)]
        assert sorted(r.name for r in rules) == sorted(r.name for r in p.rules_for(op))
        assert len(set(map(id, rules))) == len(rules)


def test_choice_redefinition_rejected():
    text = "data B = 0 | 1\nx ? _ = x\n_ ? y = y\nx ? y = y\n"
    with pytest.raises(ProgramError) as exc:
        load_program(text)
    assert any("choice" in m for _, m in exc.value.violations)
    with pytest.raises(ProgramError):
        load_program("data B = 0 | 1\nx ? y = x\n")


def test_choice_rules_restated_are_accepted():
    p = load_program("data B = 0 | 1\nx ? _ = x\n_ ? y = y\ncoin = 0 ? 1\n")
    assert "coin" in p.trees and CHOICE not in p.trees


def test_non_left_linear_rejected():
    with pytest.raises(ProgramError) as exc:
        load_program("data Bool = true | false\neq x x = true\n")
    assert "line 2" in str(exc.value)


def test_violations_are_aggregated():
    text = "data B = 0 | 1\nf 0 x = 0\nf x 0 = 1\nx ? y = y\n"
    with pytest.raises(ProgramError) as exc:
        load_program(text)
    assert len(exc.value.violations) >= 2


def test_validate_is_idempotent(flip):
    assert validate_lois(flip) is flip


def test_rule_rhs_variables_are_lhs_variables():
    p = load_program(PEANO)
    for r in p.rules:
        rhs_vars = {lab.name for lab in r.rhs.labels.values() if isinstance(lab, Var)}
        assert rhs_vars <= set(r.variables)


def test_parse_expression(flip):
    g = validate(parse_expression("(flip x, flip x) where x = coin", flip), flip.signature)
    assert graphs_equal(g, flip.entry)
    with pytest.raises(ProgramError):
        parse_expression("flip", flip)


def _terms(program, depth):
    """Every constructor term up to ``depth`` over the program's constructors."""
    if depth == 0:
        return []
    smaller = _terms(program, depth - 1)
    out = []
    for c, k in program.constructors.items():
        if k == 0:
            out.append(c)
        else:
            for args in itertools.product(smaller, repeat=k):
                out.append(f"{c}({', '.join(args)})")
    return out


def _dispatch(program, g):
    tree = program.trees[g.labels[g.root]]
    while isinstance(tree, Branch):
        node = g.root
        for i in tree.position:
            node = g.succs[node][i]
        tree = tree.children.get(g.labels[node])
        if tree is None:
            return None
    return tree.rule if isinstance(tree, RuleLeaf) else None


@pytest.mark.parametrize("src", [PEANO, "data B = T | F\nand T y = y\nand F y = F\nnot T = F\nnot F = T\n"])
def test_dispatch_selects_matching_rule(src):
    p = load_program(src)
    terms = _terms(p, 2)
    for op, arity in p.operations.items():
        if op == CHOICE:
            continue
        for args in itertools.product(terms, repeat=arity):
            text = f"{op}({', '.join(args)})" if args else op
            g = parse_linear(text)
            rule = _dispatch(p, g)
            matching = []
            for r in p.rules_for(op):
                try:
                    match(g, g.root, r.lhs)
                    matching.append(r)
                except Exception:
                    pass
            assert len(matching) <= 1
            assert (rule is None and not matching) or matching == [rule]


def test_rule_rhs_is_a_graph(flip):
    for r in flip.rules:
        assert isinstance(r.rhs, Graph)
