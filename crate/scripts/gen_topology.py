#!/usr/bin/env python3
"""Generate a sparse, WAN-like test topology in the wanroute edge-list format.

Nodes are scattered in the unit square. Each node links to its nearest
neighbours, a few extra links are added with a Waxman-style distance bias,
and components are stitched together by their closest node pairs.

    python3 scripts/gen_topology.py --nodes 50 --links 130 --seed 7 > data/wan50.topo
"""
import argparse
import math
import random


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=50)
    ap.add_argument("--links", type=int, default=80)
    ap.add_argument("--nearest", type=int, default=2)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--capacity", type=float, default=1.0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    n = args.nodes
    pos = [(rng.random(), rng.random()) for _ in range(n)]

    def dist(a, b):
        return math.dist(pos[a], pos[b])

    edges = set()

    def add(a, b):
        if a != b:
            edges.add((min(a, b), max(a, b)))

    for a in range(n):
        near = sorted((b for b in range(n) if b != a), key=lambda b: dist(a, b))
        for b in near[: args.nearest]:
            add(a, b)

    # stitch components together by their closest pair
    while True:
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in edges:
            parent[find(a)] = find(b)
        roots = {find(x) for x in range(n)}
        if len(roots) == 1:
            break
        comp0 = [x for x in range(n) if find(x) == find(0)]
        rest = [x for x in range(n) if find(x) != find(0)]
        a, b = min(((a, b) for a in comp0 for b in rest), key=lambda p: dist(*p))
        add(a, b)

    scale = max(dist(a, b) for a in range(n) for b in range(n))
    while len(edges) < args.links:
        a, b = rng.randrange(n), rng.randrange(n)
        if a == b or (min(a, b), max(a, b)) in edges:
            continue
        if rng.random() < 0.9 * math.exp(-dist(a, b) / (0.15 * scale)):
            add(a, b)

    print(f"# synthetic WAN: {n} nodes, {len(edges)} links, seed {args.seed}")
    print(f"# generated by scripts/gen_topology.py --nodes {n} --links {args.links} "
          f"--nearest {args.nearest} --seed {args.seed}")
    print(f"nodes {n}")
    for a, b in sorted(edges):
        print(f"{a} {b} {args.capacity:g}")


if __name__ == "__main__":
    main()
