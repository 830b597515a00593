"""How similar can two Laplacian columns be?

Prints the mutual coherence of the Laplacian for a few graph families next
to the degree-based bounds, and shows a graph on which the projected energy
of a node onto nearer columns is not always larger.
"""

from graphgic.coherence import monotonicity_violations, mutual_coherence
from graphgic.graph import build_graph, generate_named, laplacian


def show(name, g):
    rep = mutual_coherence(laplacian(g))
    print(f"{name:<18} mu={rep.mu:.4f}  bounds=[{rep.lower_bound:.4f}, {rep.upper_bound:.4f}]  "
          f"degrees {rep.d_min}..{rep.d_max}")


def main():
    for n in (6, 12, 40):
        show(f"cycle n={n}", generate_named("cycle", {"n": n}))
    show("grid 6x6", generate_named("grid2d", {"rows": 6, "cols": 6}))
    show("erdos-renyi", generate_named("erdos_renyi", {"n": 30, "p": 0.2}, 1))

    # a leaf hanging off a hub: the hub column overlaps the leaf less than a
    # two-hop neighbor's column does
    star = build_graph(7, [(0, 1), (1, 2), (1, 3), (1, 4), (1, 5), (2, 6)])
    found = monotonicity_violations(star, limit=3)
    print("\nprojection-energy order flips on a star with a tail:")
    for m, k, j, ek, ej in found:
        print(f"  target {m}: nearer node {k} gives {ek:.3f}, farther node {j} gives {ej:.3f}")


if __name__ == "__main__":
    main()
