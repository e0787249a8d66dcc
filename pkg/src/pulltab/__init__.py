"""Term-graph rewriting for functional-logic programs with pull-tabbing.

The main entry points::

    from pulltab import load_program, parse_expression, run_pulltab

    prog = load_program(open("flip.fl").read())
    out = run_pulltab(prog, parse_expression("(flip x, flip x) where x = coin", prog))
    out.value_strings()
"""

from .graph import (CHOICE, PAIR, Allocator, Graph, GraphError, Var, canonicalize, default_allocator,
                    dot_export, graphs_equal, is_ground, parse_linear, print_linear, reachable, redirect,
                    replace_at, topological_order, validate)
from .program import (C1, C2, Branch, Exempt, NotInductivelySequential, Program, ProgramError, Rule,
                      RuleLeaf, Term, build_tree, load_program, parse_expression, parse_program,
                      validate_lois)
from .pulltab import PullTabError, pull_tab, pulltab_candidates
from .represented import (assert_nonchoice_invariance, assert_pulltab_invariance, choice_ids,
                          reduce_choices, represented_set)
from .rewrite import (ChoiceAtRoot, Failure, MatchError, NeedsStep, Step, Value, apply_step, choice_step,
                      format_trace, head_step, instantiate, normal_form_step, redexes, rewrite_step)
from .strategies import (KINDS, Outcome, Stats, StrategyConfig, bubble, check_consistency, copy_split,
                         dominators, immediate_dominator, run, run_backtrack, run_bubble, run_copy,
                         run_pulltab)

__version__ = "0.1.0"
