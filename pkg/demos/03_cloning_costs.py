"""How much context each strategy copies when one alternative fails.

The expression is 1 + (2 + (... + (n div coin))) over Peano numbers with
coin = 0 ? 1.  Division by zero has no rule, so one alternative fails almost
at once.  Copying clones the whole sum before finding that out.
"""

from pulltab import StrategyConfig, instantiate, load_program, run
from pulltab.generate import div_family

print(f"{'n':>3} {'strategy':>9} {'steps':>6} {'cloned':>7} {'allocated':>9} {'forks':>5}")
for n in (2, 5, 10, 20):
    prog = load_program(div_family(n))
    for kind in ("copy", "bubble", "pulltab"):
        out = run(prog, instantiate(prog.entry, {}), StrategyConfig(kind, 200000))
        s = out.stats
        print(f"{n:>3} {kind:>9} {s.steps:>6} {s.nodes_cloned:>7} {s.nodes_allocated:>9} {s.strands_forked:>5}")
