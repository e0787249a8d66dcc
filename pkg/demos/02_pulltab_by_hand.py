"""Pulling a choice up by hand and watching what the graph represents.

A pull-tab copies only the target node.  The graph changes but the set of
choice-free graphs it stands for does not.
"""

from pulltab import parse_linear, print_linear, pull_tab, pulltab_candidates, represented_set


def show(title, g):
    print(title)
    print("  graph:      ", print_linear(g))
    print("  represents: ", sorted(print_linear(e) for e in represented_set(g)))


g = parse_linear("(,)(f1:flip(c:?_a(0,1)), f2:flip(c))")
show("shared choice below two flips", g)

left = g.succs[g.root][0]
g = pull_tab(g, left, 0)
show("after pulling along the left path", g)

# the right flip still points at the original choice: pull it too
target, index = next((t, i) for t, i in pulltab_candidates(g) if g.labels[t] == "flip")
g = pull_tab(g, target, index)
show("after pulling along the right path", g)

# both choices now carry id a; picking a side for a picks it everywhere
target, index = pulltab_candidates(g)[0]
g = pull_tab(g, target, index)
show("both choices under the pair pulled once more", g)

# identifiers matter: same id, two nodes
show("same id on distinct nodes", parse_linear("(,)(?_a(0,1), ?_a(2,3))"))
show("different ids", parse_linear("(,)(?_a(0,1), ?_b(2,3))"))
