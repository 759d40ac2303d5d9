"""Cycle certificates, curve search and the M_alpha perturbation check."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import networkx as nx

from .core import (
    EdgeChain,
    PathCurve,
    TransportNetwork,
    boundary,
    chain_cost_alpha,
    is_on,
    require_valid,
)
from .errors import DomainError, PreconditionError

CYCLE_FREE = "cycle-free"


@dataclass(frozen=True)
class CycleCertificate:
    """Either a nonzero cycle on the network or the verdict ``cycle-free``."""

    chain: EdgeChain | None = None
    vertices: tuple[int, ...] = ()

    @property
    def cycle_free(self) -> bool:
        return self.chain is None

    def __str__(self) -> str:
        if self.chain is None:
            return CYCLE_FREE
        return f"cycle through {len(self.vertices)} vertices: {self.chain!r}"


def support_graph(network: TransportNetwork, edges: Iterable[int] | None = None) -> nx.MultiDiGraph:
    """Directed multigraph of positive-weight edges, keyed by edge index."""
    g = nx.MultiDiGraph()
    g.add_nodes_from(network.vertex_ids)
    for k in range(len(network.edges)) if edges is None else edges:
        e = network.edges[k]
        if e.weight > 0:
            g.add_edge(e.tail, e.head, key=k)
    return g


def find_cycle(network: TransportNetwork) -> CycleCertificate:
    """Search the undirected support for a cycle and certify it.

    The certificate carries ``+eps`` on edges walked along their orientation
    and ``-eps`` on edges walked against it, where ``eps`` is the smallest
    weight on the cycle.
    """
    require_valid(network)
    return _cycle_on(network, support_graph(network))


def _cycle_on(network: TransportNetwork, graph: nx.MultiDiGraph) -> CycleCertificate:
    try:
        walk = nx.find_cycle(graph, orientation="ignore")
    except nx.NetworkXNoCycle:
        return CycleCertificate()
    eps = min(network.edges[k].weight for _, _, k, _ in walk)
    coeffs = {k: (eps if way == "forward" else -eps) for _, _, k, way in walk}
    verts = tuple(u if way == "forward" else v for u, v, _, way in walk)
    return CycleCertificate(EdgeChain(network, coeffs), verts)


def forest_identity(network: TransportNetwork) -> bool:
    """True iff the positive-weight support satisfies |E| = |V| - #components."""
    g = nx.MultiGraph(support_graph(network))
    return g.number_of_edges() == g.number_of_nodes() - nx.number_connected_components(g)


def _shortest_path(
    out_arcs: dict[int, list[tuple[int, int, int]]],
    in_arcs: dict[int, list[tuple[int, int, int]]],
    start: int,
    stop: int,
) -> list[tuple[int, int]] | None:
    """Minimum-hop path as ``(edge, direction)`` steps.

    Arcs are ``(edge index, direction, other endpoint)``.  Among all
    minimum-hop paths the one whose edge-index sequence is lexicographically
    smallest is returned.
    """
    dist = {stop: 0}
    queue = deque([stop])
    while queue:
        v = queue.popleft()
        for _, _, u in in_arcs.get(v, ()):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    if start not in dist or start == stop:
        return None
    steps: list[tuple[int, int]] = []
    v = start
    while v != stop:
        want = dist[v] - 1
        e, d, v = min(a for a in out_arcs.get(v, ()) if dist.get(a[2]) == want)
        steps.append((e, d))
    return steps


def _arcs(network: TransportNetwork, usable: Iterable[tuple[int, int]]):
    out_arcs: dict[int, list[tuple[int, int, int]]] = {}
    in_arcs: dict[int, list[tuple[int, int, int]]] = {}
    for k, d in usable:
        e = network.edges[k]
        a, b = (e.tail, e.head) if d == 1 else (e.head, e.tail)
        out_arcs.setdefault(a, []).append((k, d, b))
        in_arcs.setdefault(b, []).append((k, d, a))
    return out_arcs, in_arcs


def find_curve(network: TransportNetwork, source: int, target: int) -> PathCurve | None:
    """Directed curve from ``source`` to ``target`` along positive-weight edges.

    On a cycle-free network such a curve is unique when it exists.  In
    general the minimum-hop curve with the lexicographically smallest edge
    sequence is returned.
    """
    usable = [(k, 1) for k, e in enumerate(network.edges) if e.weight > 0]
    return _curve(network, usable, source, target)


def find_curve_on(chain: EdgeChain, source: int, target: int, *, directed: bool = True) -> PathCurve | None:
    """Curve from ``source`` to ``target`` inside the support of ``chain``.

    With ``directed`` each edge may only be walked in the direction of the
    sign of its coefficient; otherwise both directions are allowed.
    """
    usable: list[tuple[int, int]] = []
    for k, c in chain.items():
        sign = 1 if c > 0 else -1
        usable.append((k, sign))
        if not directed:
            usable.append((k, -sign))
    return _curve(chain.network, usable, source, target)


def _curve(network: TransportNetwork, usable, source: int, target: int) -> PathCurve | None:
    if not (network.has_vertex(source) and network.has_vertex(target)):
        return None
    steps = _shortest_path(*_arcs(network, usable), source, target)
    if steps is None:
        return None
    edges, dirs = zip(*steps)
    return PathCurve.from_edges(network, edges, dirs)


class PerturbationCosts(NamedTuple):
    cost_plus: float
    cost_minus: float
    cost_T: float

    @property
    def best(self) -> float:
        return min(self.cost_plus, self.cost_minus)

    @property
    def margin(self) -> float:
        """Relative improvement of the better perturbation over the base cost."""
        return (self.cost_T - self.best) / self.cost_T if self.cost_T else 0.0


def perturbation_inequality(network: TransportNetwork, S: EdgeChain, alpha: float) -> PerturbationCosts:
    """Costs of ``T + S``, ``T - S`` and ``T`` for a cycle ``S`` on ``T``."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not is_on(S, network):
        raise PreconditionError("S is not on T: some |S(e)| exceeds w(e)")
    if not boundary(S).is_zero():
        raise PreconditionError("S is not a cycle: its boundary is nonzero")
    T = network.chain()
    plus, minus = T + S, T - S
    # |S| <= w keeps both perturbations nonnegative, hence transport paths
    # with the same boundary as T.
    assert all(c >= 0 for _, c in plus.items()) and all(c >= 0 for _, c in minus.items())
    assert boundary(plus) == boundary(T) == boundary(minus)
    return PerturbationCosts(
        chain_cost_alpha(plus, alpha),
        chain_cost_alpha(minus, alpha),
        chain_cost_alpha(T, alpha),
    )
