import random

import pytest

from pulltab import (C1, C2, KINDS, Allocator, Step, StrategyConfig, bubble, check_consistency,
                     copy_split, dominators, graphs_equal, immediate_dominator, instantiate,
                     load_program, parse_expression, parse_linear, print_linear, run, run_backtrack,
                     run_bubble, run_copy, run_pulltab)
from pulltab.generate import div_family, parse_expression_from_entry, random_dag, random_program
from pulltab.verify import IdMonitor, brute_force_idom

LOOP = "data Bit = 0 | 1\nloop = loop\nmain = loop ? 0\n"


def _values(outcome):
    return sorted(print_linear(v) for v in outcome.values)


@pytest.mark.parametrize("kind", KINDS)
def test_flip_all_strategies(flip, kind):
    out = run(flip, instantiate(flip.entry, {}), StrategyConfig(kind))
    assert _values(out) == ["(,)(0,0)", "(,)(1,1)"]
    assert not out.exhausted and out.failures == 0


def test_flip_unsound_pulltab_mixes(flip):
    out = run_pulltab(flip, instantiate(flip.entry, {}), consistency=False)
    assert _values(out) == ["(,)(0,0)", "(,)(0,1)", "(,)(1,0)", "(,)(1,1)"]


def test_unsound_only_for_pulltab():
    with pytest.raises(ValueError):
        StrategyConfig("copy", consistency=False)
    with pytest.raises(ValueError):
        StrategyConfig("depth-first")


@pytest.mark.parametrize("kind", KINDS)
def test_coin(flip, kind):
    out = run(flip, parse_expression("coin", flip), StrategyConfig(kind))
    assert _values(out) == ["0", "1"]
    assert out.stats.nodes_cloned == 0


def test_backtrack_visits_two_leaves(flip):
    out = run_backtrack(flip, instantiate(flip.entry, {}))
    assert len(out.traces) == 2 and out.stats.strands_forked == 1
    assert out.stats.nodes_cloned == 0


def test_value_takes_no_steps(flip):
    for kind in KINDS:
        out = run(flip, parse_linear("(,)(0, 1)"), StrategyConfig(kind))
        assert _values(out) == ["(,)(0,1)"] and out.stats.steps == 0


def test_backtrack_incomplete_on_divergent_alternative():
    p = load_program(LOOP)
    out = run_backtrack(p, instantiate(p.entry, {}), max_steps=300)
    assert out.exhausted and out.values == []


@pytest.mark.parametrize("runner", [run_copy, run_bubble, run_pulltab])
def test_interleaving_strategies_are_fair(runner):
    p = load_program(LOOP)
    out = runner(p, instantiate(p.entry, {}), max_steps=300)
    assert out.exhausted and _values(out) == ["0"]


def test_copy_clones_whole_context(flip):
    out = run_copy(flip, instantiate(flip.entry, {}))
    # the pair and both flips are cloned once per alternative
    assert out.stats.nodes_cloned >= 2 * 3
    assert out.stats.strands_forked == 1


def test_copy_split_fresh_ids(flip):
    g = parse_linear("(,)(flip(c:?_a(0,1)), flip(c))")
    alloc = Allocator(10 ** 6)
    (h1, h2), cloned = copy_split(g, g.succs[g.succs[g.root][0]][0], alloc)
    assert cloned == 6
    assert graphs_equal(h1, parse_linear("(,)(flip(z:0), flip(z))"))
    assert graphs_equal(h2, parse_linear("(,)(flip(o:1), flip(o))"))
    assert not set(h1.labels) & set(h2.labels) - {n for n in g.labels if g.labels[n] in "01"}


def test_dominator_of_shared_coin_is_root(flip):
    g = instantiate(flip.entry, {})
    coin = g.succs[g.succs[g.root][0]][0]
    assert immediate_dominator(g, coin) == g.root


def test_dominator_chain():
    g = parse_linear("f(g(n:x))")
    gn = g.succs[g.root][0]
    assert immediate_dominator(g, g.succs[gn][0]) == gn
    with pytest.raises(ValueError):
        immediate_dominator(g, g.root)


def test_dominators_against_paths():
    rng = random.Random(5)
    for _ in range(60):
        g = random_dag(rng, rng.randint(2, 20))
        idom = dominators(g)
        for n in g.labels:
            if n != g.root:
                assert idom[n] == brute_force_idom(g, n)


def test_bubble_matches_figure(flip):
    g = parse_linear("(,)(flip(c:?_a(0,1)), flip(c))")
    c = g.succs[g.succs[g.root][0]][0]
    h, cloned = bubble(g, c, Allocator(10 ** 6))
    assert graphs_equal(h, parse_linear("?_a((,)(flip(z:0),flip(z)), (,)(flip(o:1),flip(o)))"))
    assert cloned == 6


def test_bubble_single_predecessor_is_pull_tab():
    from pulltab import pull_tab

    g = parse_linear("f(?_a(a,b))")
    h, cloned = bubble(g, g.succs[g.root][0], Allocator(10 ** 6))
    assert cloned == 2
    assert graphs_equal(h, pull_tab(g, g.root, 0))


def test_check_consistency_examples():
    steps = [Step("rewrite", 1, C1, "a"), Step("rewrite", 2, C1, "a"), Step("rewrite", 3, C2, "b")]
    assert check_consistency(steps)
    assert not check_consistency([Step("rewrite", 1, C1, "a"), Step("rewrite", 2, C2, "a")])
    assert check_consistency([])


def test_pulltab_traces_consistent_and_ledger_monotone():
    rng = random.Random(8)
    for _ in range(40):
        _, p = random_program(rng)
        out = run_pulltab(p, parse_expression_from_entry(p), max_steps=5000)
        for trace in out.traces:
            assert check_consistency(trace)
        assert out.stats.nodes_cloned == 2 * out.stats.pulltabs


def test_unsound_traces_can_be_inconsistent(flip):
    out = run_pulltab(flip, instantiate(flip.entry, {}), consistency=False)
    assert not all(check_consistency(t) for t in out.traces)


def test_failure_pruning_avoids_forks():
    p = load_program(div_family(4))
    pt = run_pulltab(p, instantiate(p.entry, {}))
    cp = run_copy(p, instantiate(p.entry, {}))
    expected = "S(" * 10 + "Z" + ")" * 10  # 1 + (2 + (3 + 4/1))
    assert _values(pt) == _values(cp) == [expected]
    assert pt.stats.strands_forked == 0 and cp.stats.strands_forked == 1
    assert pt.stats.nodes_cloned < cp.stats.nodes_cloned


def test_ledger_reuses_decision():
    p = load_program("data B = T | F\nnot T = F\nnot F = T\n")
    g = parse_expression("(not x, not (not x)) where x = T ? F", p)
    out = run_pulltab(p, g)
    assert _values(out) == ["(,)(F,T)", "(,)(T,F)"]
    assert out.stats.strands_forked == 1


def test_hnf_before_pull_flag_keeps_values():
    rng = random.Random(9)
    for _ in range(30):
        _, p = random_program(rng)
        a = run_pulltab(p, parse_expression_from_entry(p), max_steps=5000)
        b = run_pulltab(p, parse_expression_from_entry(p), max_steps=5000, hnf_before_pull=False)
        if not (a.exhausted or b.exhausted):
            assert a.value_forms() == b.value_forms()


def test_max_values_stops_early(flip):
    out = run(flip, parse_expression("coin", flip), StrategyConfig("backtrack", max_values=1))
    assert _values(out) == ["0"]


def test_budget_exhaustion_reported(flip):
    out = run_copy(flip, instantiate(flip.entry, {}), max_steps=2)
    # a fork performs both choice steps at once, so the budget may be passed by one
    assert out.exhausted and 2 <= out.stats.steps <= 3


def test_stats_record():
    p = load_program(div_family(3))
    out = run_pulltab(p, instantiate(p.entry, {}))
    assert set(out.stats.as_dict()) == {"steps", "nodes_allocated", "nodes_cloned",
                                        "strands_forked", "strands_failed"}
    assert out.stats.nodes_allocated > 0


@pytest.mark.parametrize("kind", KINDS)
def test_decorations_immutable_during_runs(kind):
    rng = random.Random(10)
    monitor = IdMonitor()
    for _ in range(15):
        _, p = random_program(rng)
        run(p, parse_expression_from_entry(p), StrategyConfig(kind, 2000), observer=monitor)
    assert monitor.states > 0 and not monitor.violations


def test_strategies_agree_on_small_corpus():
    rng = random.Random(13)
    for _ in range(25):
        _, p = random_program(rng)
        forms = [run(p, parse_expression_from_entry(p), StrategyConfig(k, 5000)) for k in KINDS]
        if not any(o.exhausted for o in forms):
            assert len({frozenset(o.value_forms()) for o in forms}) == 1
