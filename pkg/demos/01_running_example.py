"""Two flips of one shared coin, under each strategy.

The coin is bound once, so both flips see the same choice.  Only the pairs
(0,0) and (1,1) are values.  Pull-tabbing without the ledger of decisions
also produces the mixed pairs.
"""

from pathlib import Path

from pulltab import KINDS, StrategyConfig, instantiate, load_program, print_linear, run

prog = load_program((Path(__file__).parent / "flip.fl").read_text())
start = instantiate(prog.entry, {})
print("start graph:", print_linear(start))

for kind in KINDS:
    out = run(prog, instantiate(prog.entry, {}), StrategyConfig(kind))
    print(f"{kind:>9}: {out.value_strings()}  {out.stats.as_dict()}")

# the same computation with consistency switched off
out = run(prog, start, StrategyConfig("pulltab", consistency=False))
print("  unsound:", out.value_strings())

# one pull-tab trace, step by step
out = run(prog, instantiate(prog.entry, {}), StrategyConfig("pulltab"))
for i, trace in enumerate(out.traces):
    print(f"strand {i}:", ", ".join(str(s) for s in trace))
