"""Seeded random instances for property tests and the ``gen`` command."""

from __future__ import annotations

import random
from fractions import Fraction

from .core import AtomicMeasure, Edge, PathCurve, Point, TransportNetwork
from .decomposition import CurveMeasure

DENOMINATORS = (1, 2, 3, 4, 5, 6, 8, 10)


def _composition(rng: random.Random, total: int, parts: int) -> list[int]:
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    return [b - a for a, b in zip([0, *cuts], [*cuts, total])]


def _points(rng: random.Random, count: int) -> list[tuple[int, int]]:
    side = max(4, 2 * count)
    cells = rng.sample(range(side * side), count)
    return [divmod(c, side) for c in cells]


def random_instance(seed: int, sources: int, targets: int, junctions: int | None = None) -> TransportNetwork:
    """Cycle-free transport path on a random tree.

    Vertices are ``x1..xM``, ``y1..yN`` and junctions ``J1..JK`` at distinct
    integer grid points.  Source masses are ``p/d`` with ``p`` in 1..9 and
    a random denominator ``d``; target masses split the same total.  Every
    tree edge carries the net mass that must cross it; edges with nothing
    to carry are dropped, as are junctions left without edges.
    """
    if sources < 1 or targets < 1:
        raise ValueError("need at least one source and one target")
    rng = random.Random(seed)
    k = rng.randint(0, sources + targets) if junctions is None else junctions
    total_nodes = sources + targets + k
    masses = [rng.randint(1, 9) for _ in range(sources)]
    while sum(masses) < targets:
        masses[rng.randrange(sources)] += 1
    demands = _composition(rng, sum(masses), targets)
    d = rng.choice(DENOMINATORS)
    net_supply = [Fraction(m, d) for m in masses] + [-Fraction(m, d) for m in demands] + [Fraction(0)] * k

    order = list(range(total_nodes))
    rng.shuffle(order)
    parent = {order[0]: None}
    for pos in range(1, total_nodes):
        parent[order[pos]] = order[rng.randrange(pos)]
    subtree = list(net_supply)
    for v in reversed(order[1:]):
        subtree[parent[v]] += subtree[v]

    edges = []
    for v in order[1:]:
        flow = subtree[v]
        if flow > 0:
            edges.append(Edge(v, parent[v], flow))
        elif flow < 0:
            edges.append(Edge(parent[v], v, -flow))
    used = {e.tail for e in edges} | {e.head for e in edges} | set(range(sources + targets))
    coords = _points(rng, total_nodes)
    names = [f"x{i + 1}" for i in range(sources)] + [f"y{j + 1}" for j in range(targets)]
    names += [f"J{t + 1}" for t in range(k)]
    keep = [v for v in range(total_nodes) if v in used]
    return TransportNetwork(
        tuple(Point(v, coords[v]) for v in keep),
        tuple(edges),
        AtomicMeasure(tuple((i, net_supply[i]) for i in range(sources))),
        AtomicMeasure(tuple((sources + j, -net_supply[sources + j]) for j in range(targets))),
        tuple((v, names[v]) for v in keep),
    )


def add_chord(network: TransportNetwork, rng: random.Random) -> TransportNetwork:
    """Superpose a circulation around a new edge and the support path closing it.

    The new edge ``u -> v`` gets weight ``c`` and the path from ``v`` back to
    ``u`` gets ``c`` added along its edges' orientation (subtracted where it
    runs against them), with ``c`` below every weight it subtracts from.
    """
    from .cycles import find_curve_on

    chain = network.chain()
    vids = [p.id for p in network.vertices]
    for _ in range(100):
        u, v = rng.sample(vids, 2)
        path = find_curve_on(chain, v, u, directed=False)
        if path is not None:
            break
    else:
        raise ValueError("no connected pair of vertices")
    against = [network.edges[e].weight for e, s in zip(path.edges, path.directions) if s == -1]
    cap = min(against) if against else Fraction(rng.randint(1, 9))
    c = cap * Fraction(rng.randint(1, 9), 10)
    weights = list(network.weights)
    for e, s in zip(path.edges, path.directions):
        weights[e] += s * c
    grown = network.with_weights(weights)
    return TransportNetwork(
        grown.vertices, grown.edges + (Edge(u, v, c),), grown.source, grown.target, grown.labels
    )


def random_matrix(rng: random.Random, rows: int, cols: int, high: int = 5, density: float = 0.6):
    return tuple(
        tuple(Fraction(rng.randint(1, high)) if rng.random() < density else Fraction(0) for _ in range(cols))
        for _ in range(rows)
    )


def random_superposition(seed: int) -> tuple[TransportNetwork, CurveMeasure]:
    """Network built from random source-to-target routes, with its curve measure.

    Up to three sources and three targets with integer masses in {1, 2, 3}.
    Every route passes through one of one or two hubs (sometimes via a
    relay junction), so many four-cell combinations cancel.  Edge weights are
    the superposed route weights, so the routes form a good decomposition.
    """
    rng = random.Random(seed)
    while True:
        m, n = rng.randint(2, 3), rng.randint(2, 3)
        A = [[rng.randint(0, 2) for _ in range(n)] for _ in range(m)]
        rs, cs = [sum(r) for r in A], [sum(c) for c in zip(*A)]
        if all(1 <= s <= 3 for s in rs + cs):
            break
    hubs = rng.randint(1, 2)
    xs, ys = list(range(m)), list(range(m, m + n))
    hub_ids = list(range(m + n, m + n + hubs))
    relay = m + n + hubs
    coords = _points(rng, relay + 1)
    tails: dict[tuple[int, int], int] = {}
    edge_list: list[tuple[int, int]] = []

    def edge(a: int, b: int) -> int:
        if (a, b) not in tails:
            tails[(a, b)] = len(edge_list)
            edge_list.append((a, b))
        return tails[(a, b)]

    routes: list[tuple[list[int], int]] = []
    for i in range(m):
        for j in range(n):
            a = A[i][j]
            if not a:
                continue
            pieces = [a] if a == 1 or rng.random() < 0.5 else [1, a - 1]
            for w in pieces:
                h = rng.choice(hub_ids)
                if rng.random() < 0.3:
                    path = [edge(xs[i], relay), edge(relay, h), edge(h, ys[j])]
                else:
                    path = [edge(xs[i], h), edge(h, ys[j])]
                routes.append((path, w))
    load = [0] * len(edge_list)
    for path, w in routes:
        for e in path:
            load[e] += w
    used = sorted({v for ab in edge_list for v in ab} | set(xs) | set(ys))
    names = {**{x: f"x{k + 1}" for k, x in enumerate(xs)}, **{y: f"y{k + 1}" for k, y in enumerate(ys)}}
    names.update({h: f"H{k + 1}" for k, h in enumerate(hub_ids)})
    names[relay] = "R"
    net = TransportNetwork(
        tuple(Point(v, coords[v]) for v in used),
        tuple(Edge(a, b, w) for (a, b), w in zip(edge_list, load)),
        AtomicMeasure(tuple((xs[i], rs[i]) for i in range(m))),
        AtomicMeasure(tuple((ys[j], cs[j]) for j in range(n))),
        tuple((v, names[v]) for v in used),
    )
    eta = CurveMeasure(net, tuple((PathCurve.from_edges(net, p), w) for p, w in routes))
    return net, eta
