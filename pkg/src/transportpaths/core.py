"""Value types for atomic measures, transport networks, 1-chains and curves.

A transport path between two finite atomic measures is stored as a weighted
directed graph whose vertices carry Euclidean coordinates.  Masses, weights
and chain coefficients are exact ``Fraction`` values so that balance and
cancellation identities hold exactly; edge lengths and costs are floats.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import DomainError, PreconditionError

Rational = Union[int, str, Fraction]

__all__ = [
    "AtomicMeasure",
    "Edge",
    "EdgeChain",
    "PathCurve",
    "Point",
    "SignedNodeMeasure",
    "TransportNetwork",
    "Violation",
    "boundary",
    "chain_cost_alpha",
    "cost_alpha",
    "fraction",
    "format_fraction",
    "is_on",
    "is_subcurrent",
    "mass",
    "validate_network",
]


def fraction(value: Rational | float) -> Fraction:
    """Convert ``value`` to an exact ``Fraction``.

    Strings may be integers, decimals (``"0.25"``) or ratios (``"3/4"``).
    Floats are read through their shortest decimal representation, so
    ``0.1`` becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if text.lower() in {"nan", "inf", "-inf", "+inf", "infinity", "-infinity"}:
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(text)
    return Fraction(value)


def format_fraction(value: Fraction) -> str:
    """Render ``value`` as ``p`` or ``p/q``."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Point:
    id: int
    coords: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(fraction(c) for c in self.coords))


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    weight: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "weight", fraction(self.weight))


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite sum of weighted Dirac masses, kept in insertion order.

    The order of atoms fixes the indexing of sources ``x_1, x_2, ...`` and
    targets ``y_1, y_2, ...`` everywhere a matrix is built.
    """

    atoms: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "atoms", tuple((int(v), fraction(m)) for v, m in self.atoms)
        )

    @classmethod
    def from_dict(cls, masses: Mapping[int, Rational]) -> "AtomicMeasure":
        return cls(tuple(masses.items()))

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def total(self) -> Fraction:
        return sum((m for _, m in self.atoms), Fraction(0))

    def as_dict(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for v, m in self.atoms:
            out[v] = out.get(v, Fraction(0)) + m
        return out

    def mass_at(self, vertex: int) -> Fraction:
        return self.as_dict().get(vertex, Fraction(0))

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class TransportNetwork:
    """Weighted directed multigraph with source and target measures.

    Edges are addressed by their position in ``edges``.  ``labels`` maps
    vertex ids to display names such as ``x1`` or ``J2``.
    """

    vertices: tuple[Point, ...]
    edges: tuple[Edge, ...]
    source: AtomicMeasure = field(default_factory=AtomicMeasure)
    target: AtomicMeasure = field(default_factory=AtomicMeasure)
    labels: tuple[tuple[int, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "labels", tuple(self.labels))

    @cached_property
    def _points(self) -> dict[int, Point]:
        return {p.id: p for p in self.vertices}

    @cached_property
    def _label_of(self) -> dict[int, str]:
        return dict(self.labels)

    @cached_property
    def _id_of(self) -> dict[str, int]:
        return {name: v for v, name in self.labels}

    @cached_property
    def _lengths(self) -> tuple[float, ...]:
        out = []
        for e in self.edges:
            a, b = self._points.get(e.tail), self._points.get(e.head)
            if a is None or b is None or len(a.coords) != len(b.coords):
                out.append(math.nan)
            else:
                out.append(math.dist([float(c) for c in a.coords], [float(c) for c in b.coords]))
        return tuple(out)

    @property
    def vertex_ids(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.vertices)

    def has_vertex(self, vertex: int) -> bool:
        return vertex in self._points

    def point(self, vertex: int) -> Point:
        return self._points[vertex]

    def label(self, vertex: int) -> str:
        return self._label_of.get(vertex, str(vertex))

    def vertex(self, name: str | int) -> int:
        """Resolve a label (or an integer id) to a vertex id."""
        if isinstance(name, int):
            if name not in self._points:
                raise KeyError(name)
            return name
        if name in self._id_of:
            return self._id_of[name]
        if name.lstrip("-").isdigit() and int(name) in self._points:
            return int(name)
        raise KeyError(name)

    def length(self, edge: int) -> float:
        return self._lengths[edge]

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(e.weight for e in self.edges)

    @property
    def sources(self) -> tuple[int, ...]:
        return self.source.ids

    @property
    def targets(self) -> tuple[int, ...]:
        return self.target.ids

    @property
    def dimension(self) -> int:
        return len(self.vertices[0].coords) if self.vertices else 0

    def chain(self) -> "EdgeChain":
        """The network itself as a 1-chain (coefficient = weight)."""
        return EdgeChain(self, {k: e.weight for k, e in enumerate(self.edges)})

    def with_weights(self, weights: Sequence[Rational]) -> "TransportNetwork":
        """Copy with new edge weights; zero-weight edges are kept."""
        edges = tuple(Edge(e.tail, e.head, w) for e, w in zip(self.edges, weights, strict=True))
        return TransportNetwork(self.vertices, edges, self.source, self.target, self.labels)

    def with_measures(self, source: AtomicMeasure, target: AtomicMeasure) -> "TransportNetwork":
        return TransportNetwork(self.vertices, self.edges, source, target, self.labels)

    def without_edges(self, drop: Iterable[int]) -> "TransportNetwork":
        gone = set(drop)
        edges = tuple(e for k, e in enumerate(self.edges) if k not in gone)
        return TransportNetwork(self.vertices, edges, self.source, self.target, self.labels)

    def out_edges(self, vertex: int) -> list[int]:
        return self._adjacency[0].get(vertex, [])

    def in_edges(self, vertex: int) -> list[int]:
        return self._adjacency[1].get(vertex, [])

    @cached_property
    def _adjacency(self) -> tuple[dict[int, list[int]], dict[int, list[int]]]:
        outs: dict[int, list[int]] = defaultdict(list)
        ins: dict[int, list[int]] = defaultdict(list)
        for k, e in enumerate(self.edges):
            outs[e.tail].append(k)
            ins[e.head].append(k)
        return dict(outs), dict(ins)


class _SparseVector:
    """Exact sparse vector keyed by integers; zero entries are never stored."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, Rational] | Iterable[tuple[int, Rational]] = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        c: dict[int, Fraction] = {}
        for k, v in items:
            v = fraction(v)
            if v:
                c[int(k)] = c.get(int(k), Fraction(0)) + v
                if not c[int(k)]:
                    del c[int(k)]
        self._c = c

    def __getitem__(self, key: int) -> Fraction:
        return self._c.get(key, Fraction(0))

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._c))

    def __len__(self) -> int:
        return len(self._c)

    def items(self) -> list[tuple[int, Fraction]]:
        return sorted(self._c.items())

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def support(self) -> list[int]:
        return sorted(self._c)


class SignedNodeMeasure(_SparseVector):
    """Signed finite measure on vertices (for instance a boundary)."""

    @classmethod
    def of(cls, measure: AtomicMeasure) -> "SignedNodeMeasure":
        return cls(measure.atoms)

    def __add__(self, other: "SignedNodeMeasure") -> "SignedNodeMeasure":
        return SignedNodeMeasure(list(self._c.items()) + list(other._c.items()))

    def __neg__(self) -> "SignedNodeMeasure":
        return SignedNodeMeasure({k: -v for k, v in self._c.items()})

    def __sub__(self, other: "SignedNodeMeasure") -> "SignedNodeMeasure":
        return self + (-other)

    def __mul__(self, scalar: Rational) -> "SignedNodeMeasure":
        s = fraction(scalar)
        return SignedNodeMeasure({k: s * v for k, v in self._c.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SignedNodeMeasure):
            return self._c == other._c
        if isinstance(other, Mapping):
            return self == SignedNodeMeasure(other)
        return NotImplemented

    def total_variation(self) -> Fraction:
        return sum((abs(v) for v in self._c.values()), Fraction(0))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {format_fraction(v)}" for k, v in self.items())
        return f"SignedNodeMeasure({{{body}}})"


class EdgeChain(_SparseVector):
    """A 1-chain: exact coefficients over the edges of a fixed network.

    A positive coefficient runs along the edge's orientation, a negative
    one against it.
    """

    __slots__ = ("network",)

    def __init__(self, network: TransportNetwork, coeffs: Mapping[int, Rational] | Iterable[tuple[int, Rational]] = ()):
        super().__init__(coeffs)
        n = len(network.edges)
        for k in self._c:
            if not 0 <= k < n:
                raise IndexError(f"edge index {k} not in network with {n} edges")
        self.network = network

    @classmethod
    def zero(cls, network: TransportNetwork) -> "EdgeChain":
        return cls(network)

    def _check(self, other: "EdgeChain") -> None:
        if other.network is not self.network and other.network != self.network:
            raise ValueError("chains live on different networks")

    def __add__(self, other: "EdgeChain") -> "EdgeChain":
        self._check(other)
        return EdgeChain(self.network, list(self._c.items()) + list(other._c.items()))

    def __neg__(self) -> "EdgeChain":
        return EdgeChain(self.network, {k: -v for k, v in self._c.items()})

    def __sub__(self, other: "EdgeChain") -> "EdgeChain":
        return self + (-other)

    def __mul__(self, scalar: Rational) -> "EdgeChain":
        s = fraction(scalar)
        return EdgeChain(self.network, {k: s * v for k, v in self._c.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar: Rational) -> "EdgeChain":
        return self * (1 / fraction(scalar))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeChain):
            return NotImplemented
        return self._c == other._c and (
            self.network is other.network or self.network == other.network
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {format_fraction(v)}" for k, v in self.items())
        return f"EdgeChain({{{body}}})"


@dataclass(frozen=True)
class PathCurve:
    """A simple polyhedral curve given as a sequence of traversed edges.

    ``directions[k]`` is ``+1`` when the k-th edge is walked from tail to
    head and ``-1`` when it is walked backwards.  Curves produced by the
    decomposition routines only use forward traversals; backward steps
    occur when a cell has to be realized along an undirected route.
    """

    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    directions: tuple[int, ...]

    @classmethod
    def from_edges(
        cls,
        network: TransportNetwork,
        edges: Sequence[int],
        directions: Sequence[int] | None = None,
    ) -> "PathCurve":
        edges = tuple(int(e) for e in edges)
        if not edges:
            raise PreconditionError("a curve needs at least one edge")
        dirs = tuple(directions) if directions is not None else (1,) * len(edges)
        if len(dirs) != len(edges) or any(d not in (1, -1) for d in dirs):
            raise PreconditionError("directions must be +1 or -1, one per edge")
        verts: list[int] = []
        for k, (e, d) in enumerate(zip(edges, dirs)):
            if not 0 <= e < len(network.edges):
                raise PreconditionError(f"edge index {e} out of range")
            edge = network.edges[e]
            start, end = (edge.tail, edge.head) if d == 1 else (edge.head, edge.tail)
            if k == 0:
                verts.append(start)
            elif verts[-1] != start:
                raise PreconditionError(f"edges {edges[k - 1]} and {e} are not consecutive")
            verts.append(end)
        if len(set(verts)) != len(verts):
            raise PreconditionError("curve revisits a vertex")
        return cls(tuple(verts), edges, dirs)

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def is_forward(self) -> bool:
        return all(d == 1 for d in self.directions)

    def chain(self, network: TransportNetwork) -> EdgeChain:
        return EdgeChain(network, zip(self.edges, self.directions))

    def reversed(self) -> "PathCurve":
        return PathCurve(
            self.vertices[::-1], self.edges[::-1], tuple(-d for d in self.directions[::-1])
        )

    def length(self, network: TransportNetwork) -> float:
        return sum(network.length(e) for e in self.edges)

    def describe(self, network: TransportNetwork) -> str:
        return "->".join(network.label(v) for v in self.vertices)


def boundary(chain: EdgeChain) -> SignedNodeMeasure:
    """Each edge contributes ``coeff * (delta_head - delta_tail)``."""
    out: list[tuple[int, Fraction]] = []
    edges = chain.network.edges
    for k, c in chain.items():
        out.append((edges[k].head, c))
        out.append((edges[k].tail, -c))
    return SignedNodeMeasure(out)


def mass(chain: EdgeChain) -> float:
    """Sum of ``|coeff| * length`` over edges, in edge-index order."""
    net = chain.network
    return math.fsum(float(abs(c)) * net.length(k) for k, c in chain.items())


def chain_cost_alpha(chain: EdgeChain, alpha: float) -> float:
    """Ramified cost of a chain: ``sum |coeff|**alpha * length`` over its support."""
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    net = chain.network
    return math.fsum(float(abs(c)) ** alpha * net.length(k) for k, c in chain.items())


def cost_alpha(network: TransportNetwork, alpha: float) -> float:
    """M_alpha cost of the network; ``alpha = 1`` gives its mass."""
    return chain_cost_alpha(network.chain(), alpha)


def is_on(S: EdgeChain, T: TransportNetwork) -> bool:
    """``|S(e)| <= w(e)`` on every edge (orientation may be reversed)."""
    edges = T.edges
    return all(0 <= k < len(edges) and abs(c) <= edges[k].weight for k, c in S.items())


def is_subcurrent(S: EdgeChain, T: TransportNetwork) -> bool:
    """``0 <= S(e) <= w(e)`` on every edge."""
    edges = T.edges
    return all(0 <= k < len(edges) and 0 <= c <= edges[k].weight for k, c in S.items())


@dataclass(frozen=True)
class Violation:
    """One failed network invariant.  ``amount`` is set for imbalances."""

    kind: str
    where: str
    message: str
    amount: Fraction | None = None

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.message}"


def validate_network(network: TransportNetwork) -> list[Violation]:
    """List every violated invariant; an empty list means the network is valid."""
    out: list[Violation] = []
    seen: set[int] = set()
    dims = {len(p.coords) for p in network.vertices}
    for p in network.vertices:
        if p.id in seen:
            out.append(Violation("structure", f"vertex {p.id}", "duplicate vertex id"))
        seen.add(p.id)
        if not p.coords:
            out.append(Violation("structure", f"vertex {p.id}", "vertex has no coordinates"))
    if len(dims) > 1:
        out.append(Violation("structure", "vertices", f"mixed coordinate dimensions {sorted(dims)}"))

    lab = network.label
    for k, e in enumerate(network.edges):
        where = f"edge {k}"
        missing = [v for v in (e.tail, e.head) if v not in seen]
        if missing:
            out.append(Violation("structure", where, f"endpoint(s) {missing} not in the vertex list"))
            continue
        if e.tail == e.head:
            out.append(Violation("structure", where, f"self-loop at {lab(e.tail)}"))
        elif network.point(e.tail).coords == network.point(e.head).coords:
            out.append(Violation("structure", where, "zero-length edge"))
        if e.weight <= 0:
            out.append(Violation("structure", where, f"non-positive weight {format_fraction(e.weight)}"))

    for name, measure in (("source", network.source), ("target", network.target)):
        ids: set[int] = set()
        for v, m in measure.atoms:
            where = f"{name} atom {lab(v)}"
            if v not in seen:
                out.append(Violation("structure", where, "atom not on a network vertex"))
            if v in ids:
                out.append(Violation("structure", where, "duplicate atom"))
            ids.add(v)
            if m <= 0:
                out.append(Violation("structure", where, f"non-positive mass {format_fraction(m)}"))
    overlap = set(network.sources) & set(network.targets)
    for v in sorted(overlap):
        out.append(Violation("structure", f"vertex {lab(v)}", "vertex is both a source and a target atom"))
    if network.source.total != network.target.total:
        diff = network.source.total - network.target.total
        out.append(
            Violation(
                "mass",
                "measures",
                f"source total {format_fraction(network.source.total)} != "
                f"target total {format_fraction(network.target.total)}",
                diff,
            )
        )

    # out-weight minus in-weight must equal source mass minus target mass
    net: dict[int, Fraction] = defaultdict(Fraction)
    for e in network.edges:
        net[e.tail] += e.weight
        net[e.head] -= e.weight
    src, tgt = network.source.as_dict(), network.target.as_dict()
    for v in network.vertex_ids:
        expected = src.get(v, Fraction(0)) - tgt.get(v, Fraction(0))
        diff = net.get(v, Fraction(0)) - expected
        if diff:
            out.append(
                Violation(
                    "balance",
                    f"vertex {lab(v)}",
                    f"out-in weight {format_fraction(net.get(v, Fraction(0)))} "
                    f"expected {format_fraction(expected)} (imbalance {format_fraction(diff)})",
                    diff,
                )
            )
    return out


def require_valid(network: TransportNetwork) -> None:
    problems = validate_network(network)
    if problems:
        raise PreconditionError("invalid network: " + "; ".join(map(str, problems)))
