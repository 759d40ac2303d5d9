"""Curve measures, good decompositions and the better-decomposition pivot."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from itertools import combinations
from typing import Iterable, Sequence

from .core import (
    AtomicMeasure,
    EdgeChain,
    PathCurve,
    SignedNodeMeasure,
    TransportNetwork,
    boundary,
    fraction,
    format_fraction,
    require_valid,
)
from .errors import PreconditionError, StructuralError

Matrix = tuple[tuple[Fraction, ...], ...]
Cell = tuple[int, int]


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    """Freeze a nested sequence into a tuple-of-tuples of ``Fraction``."""
    out = tuple(tuple(fraction(x) for x in row) for row in rows)
    if out and len({len(r) for r in out}) != 1:
        raise ValueError("ragged matrix")
    return out


def graded_key(cell: Cell) -> tuple[int, int]:
    """Sort key of the graded lexicographic order (1,1),(1,2),(2,1),(1,3),..."""
    i, j = cell
    return (i + j, i)


def graded_cells(rows: int, cols: int) -> list[Cell]:
    return sorted(((i, j) for i in range(rows) for j in range(cols)), key=graded_key)


@dataclass(frozen=True)
class RepresentingMatrix:
    """``entries[i][j]`` is the mass of curves running from ``x_i`` to ``y_j``."""

    entries: Matrix
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", as_matrix(self.entries))
        m = len(self.entries)
        n = len(self.entries[0]) if m else len(self.col_labels)
        if not self.row_labels:
            object.__setattr__(self, "row_labels", tuple(f"x{i + 1}" for i in range(m)))
        if not self.col_labels:
            object.__setattr__(self, "col_labels", tuple(f"y{j + 1}" for j in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_labels), len(self.col_labels)

    def row_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(r, Fraction(0)) for r in self.entries)

    def col_sums(self) -> tuple[Fraction, ...]:
        n = self.shape[1]
        return tuple(sum((r[j] for r in self.entries), Fraction(0)) for j in range(n))

    def __getitem__(self, cell: Cell) -> Fraction:
        i, j = cell
        return self.entries[i][j]

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RepresentingMatrix):
            return self.entries == other.entries
        if isinstance(other, (list, tuple)):
            try:
                return self.entries == as_matrix(other)
            except (TypeError, ValueError):
                return False
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return "\n".join(" ".join(format_fraction(x) for x in row) for row in self.entries)


@dataclass(frozen=True)
class CurveMeasure:
    """Finitely supported measure on simple curves of a network.

    Repeated curves are merged and zero weights dropped on construction.
    Cells are indexed by the positions of the curve endpoints in the
    network's source and target measures (0-based).
    """

    network: TransportNetwork
    atoms: tuple[tuple[PathCurve, Fraction], ...] = field(default=())

    def __post_init__(self) -> None:
        merged: dict[PathCurve, Fraction] = {}
        for curve, w in self.atoms:
            w = fraction(w)
            if w < 0:
                raise PreconditionError("curve weights must be nonnegative")
            merged[curve] = merged.get(curve, Fraction(0)) + w
        object.__setattr__(self, "atoms", tuple((c, w) for c, w in merged.items() if w))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.network.source), len(self.network.target)

    @property
    def total(self) -> Fraction:
        return sum((w for _, w in self.atoms), Fraction(0))

    def _index(self) -> tuple[dict[int, int], dict[int, int]]:
        rows = {v: i for i, v in enumerate(self.network.sources)}
        cols = {v: j for j, v in enumerate(self.network.targets)}
        return rows, cols

    def cell_of(self, curve: PathCurve) -> Cell:
        rows, cols = self._index()
        try:
            return rows[curve.start], cols[curve.end]
        except KeyError:
            lab = self.network.label
            raise PreconditionError(
                f"curve {lab(curve.start)}->{lab(curve.end)} does not join a source atom to a target atom"
            ) from None

    def cells(self) -> dict[Cell, list[tuple[PathCurve, Fraction]]]:
        out: dict[Cell, list[tuple[PathCurve, Fraction]]] = defaultdict(list)
        for curve, w in self.atoms:
            out[self.cell_of(curve)].append((curve, w))
        return dict(out)

    def matrix(self) -> RepresentingMatrix:
        m, n = self.shape
        rows = [[Fraction(0)] * n for _ in range(m)]
        for (i, j), items in self.cells().items():
            rows[i][j] = sum((w for _, w in items), Fraction(0))
        lab = self.network.label
        return RepresentingMatrix(
            as_matrix(rows),
            tuple(lab(v) for v in self.network.sources),
            tuple(lab(v) for v in self.network.targets),
        )

    def induced_chain(self) -> EdgeChain:
        """The superposition ``sum weight * chain(curve)``."""
        items: list[tuple[int, Fraction]] = []
        for curve, w in self.atoms:
            items.extend((e, w * d) for e, d in zip(curve.edges, curve.directions))
        return EdgeChain(self.network, items)

    def start_measure(self) -> SignedNodeMeasure:
        return SignedNodeMeasure((c.start, w) for c, w in self.atoms)

    def end_measure(self) -> SignedNodeMeasure:
        return SignedNodeMeasure((c.end, w) for c, w in self.atoms)

    def endpoint_pairs(self) -> dict[tuple[int, int], Fraction]:
        out: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for c, w in self.atoms:
            out[(c.start, c.end)] += w
        return dict(out)

    def restrict(self, keep) -> "CurveMeasure":
        """Sub-measure of curves whose cell satisfies ``keep(i, j)``."""
        return CurveMeasure(self.network, tuple((c, w) for c, w in self.atoms if keep(*self.cell_of(c))))

    def reversed(self) -> "CurveMeasure":
        return CurveMeasure(self.network, tuple((c.reversed(), w) for c, w in self.atoms))

    def describe(self) -> list[str]:
        return [f"{format_fraction(w)} : {c.describe(self.network)}" for c, w in self.atoms]


@dataclass(frozen=True)
class GoodReport:
    """Outcome of checking the good-decomposition conditions."""

    ok: bool
    edge_failures: tuple[str, ...] = ()
    orientation_failures: tuple[str, ...] = ()
    atom_failures: tuple[str, ...] = ()
    condition_b: bool = True

    def __bool__(self) -> bool:
        return self.ok

    def lines(self) -> list[str]:
        if self.ok:
            return ["good decomposition: all conditions hold"]
        out = ["good decomposition: FAILED"]
        out += [f"  edge: {m}" for m in self.edge_failures]
        out += [f"  orientation: {m}" for m in self.orientation_failures]
        out += [f"  atom: {m}" for m in self.atom_failures]
        if not self.condition_b:
            out.append("  boundary mass differs from twice the total curve mass")
        return out


def verify_good_decomposition(network: TransportNetwork, eta: CurveMeasure) -> GoodReport:
    """Check that ``eta`` decomposes ``network`` without cancellation.

    Every curve must walk its edges forward, the curve weights through each
    edge must add up to the edge weight, and the start and end points must
    push ``eta`` forward to the source and target measures.
    """
    lab = network.label
    orient: list[str] = []
    load: dict[int, Fraction] = defaultdict(Fraction)
    for curve, w in eta.atoms:
        if not curve.is_forward:
            back = [e for e, d in zip(curve.edges, curve.directions) if d == -1]
            orient.append(f"curve {curve.describe(network)} walks edge(s) {back} backwards")
        for e in curve.edges:
            load[e] += w
    edges: list[str] = []
    for k, e in enumerate(network.edges):
        if load.get(k, Fraction(0)) != e.weight:
            edges.append(
                f"edge {k} {lab(e.tail)}->{lab(e.head)}: curves carry "
                f"{format_fraction(load.get(k, Fraction(0)))}, weight is {format_fraction(e.weight)}"
            )
    for k in sorted(set(load) - set(range(len(network.edges)))):
        edges.append(f"edge {k} is not in the network")
    atoms: list[str] = []
    for name, measure, pushed in (
        ("source", network.source, eta.start_measure()),
        ("target", network.target, eta.end_measure()),
    ):
        want = SignedNodeMeasure.of(measure)
        for v in sorted(set(want.support()) | set(pushed.support())):
            if want[v] != pushed[v]:
                atoms.append(
                    f"{name} {lab(v)}: curves give {format_fraction(pushed[v])}, "
                    f"measure has {format_fraction(want[v])}"
                )
    cond_b = boundary(network.chain()).total_variation() == 2 * eta.total
    ok = not (orient or edges or atoms) and cond_b
    return GoodReport(ok, tuple(edges), tuple(orient), tuple(atoms), cond_b)


def _directed_order(network: TransportNetwork) -> list[int]:
    graph: dict[int, set[int]] = {v: set() for v in network.vertex_ids}
    for e in network.edges:
        if e.weight > 0:
            graph[e.head].add(e.tail)
    try:
        return list(TopologicalSorter(graph).static_order())
    except CycleError as exc:
        cyc = exc.args[1]
        names = "->".join(network.label(v) for v in reversed(cyc))
        raise StructuralError(f"directed cycle {names}: flow is not acyclic") from None


def extract_good_decomposition(network: TransportNetwork) -> CurveMeasure:
    """Strip source-to-target paths off the network until no weight is left.

    The walk starts at the first source atom with remaining mass, always
    follows the outgoing edge with the largest remaining weight (lowest
    index on ties) and stops at the first target atom that still has
    demand.  The bottleneck amount is removed along the path.
    """
    require_valid(network)
    _directed_order(network)
    lab = network.label
    resid = list(network.weights)
    supply = network.source.as_dict()
    demand = network.target.as_dict()
    found: list[tuple[PathCurve, Fraction]] = []
    for s in network.sources:
        while supply[s] > 0:
            v, path = s, []
            while not (path and demand.get(v, 0) > 0):
                live = [k for k in network.out_edges(v) if resid[k] > 0]
                if not live:
                    raise StructuralError(f"dead end at {lab(v)} while routing from {lab(s)}")
                k = max(live, key=lambda k: (resid[k], -k))
                path.append(k)
                v = network.edges[k].head
            amount = min([supply[s], demand[v]] + [resid[k] for k in path])
            for k in path:
                resid[k] -= amount
            supply[s] -= amount
            demand[v] -= amount
            found.append((PathCurve.from_edges(network, path), amount))
    left = [k for k, r in enumerate(resid) if r]
    if left:
        k = left[0]
        e = network.edges[k]
        raise StructuralError(
            f"edge {k} {lab(e.tail)}->{lab(e.head)} keeps unconsumed weight {format_fraction(resid[k])}"
        )
    return CurveMeasure(network, tuple(found))


def cell_chain(eta: CurveMeasure, i: int, j: int) -> EdgeChain:
    """Normalized average chain of the curves in cell ``(i, j)``; zero if empty."""
    items = eta.cells().get((i, j), [])
    return _average(eta.network, items)


def _average(network: TransportNetwork, items: Sequence[tuple[PathCurve, Fraction]]) -> EdgeChain:
    total = sum((w for _, w in items), Fraction(0))
    if not total:
        return EdgeChain(network)
    coeffs: list[tuple[int, Fraction]] = []
    for curve, w in items:
        coeffs.extend((e, w * d / total) for e, d in zip(curve.edges, curve.directions))
    return EdgeChain(network, coeffs)


@dataclass(frozen=True)
class VanishingCycle:
    chain: EdgeChain
    sign: int | None

    @property
    def vanishes(self) -> bool:
        return self.chain.is_zero()


def _combination(S: dict[Cell, EdgeChain], a: Cell, b: Cell, network: TransportNetwork) -> EdgeChain:
    (i1, j1), (i2, j2) = a, b
    zero = EdgeChain(network)
    return S.get((i1, j1), zero) - S.get((i1, j2), zero) - S.get((i2, j1), zero) + S.get((i2, j2), zero)


def vanishing_cycle(eta: CurveMeasure, first: Cell, second: Cell) -> VanishingCycle:
    """The four-cell combination ``S11 - S12 - S21 + S22`` and its common sign.

    The sign is ``None`` unless all four cells are empty (0) or all four
    are occupied (1).
    """
    (i1, j1), (i2, j2) = first, second
    if not (i1 < i2 and j1 < j2):
        raise PreconditionError("need i1 < i2 and j1 < j2")
    A = eta.matrix()
    corners = [(i1, j1), (i1, j2), (i2, j1), (i2, j2)]
    S = {c: cell_chain(eta, *c) for c in corners}
    signs = {int(A[c] > 0) for c in corners}
    return VanishingCycle(_combination(S, first, second, eta.network), signs.pop() if len(signs) == 1 else None)


def _candidates(
    a: list[list[Fraction]], S: dict[Cell, EdgeChain], base: Cell, network: TransportNetwork
) -> set[Cell]:
    i0, j0 = base
    if a[i0][j0] <= 0:
        return set()
    out = set()
    for i in range(i0 + 1, len(a)):
        if a[i][j0] <= 0:
            continue
        for j in range(j0 + 1, len(a[0])):
            if a[i0][j] > 0 and a[i][j] > 0 and _combination(S, base, (i, j), network).is_zero():
                out.add((i, j))
    return out


def _cell_chains(eta: CurveMeasure) -> dict[Cell, EdgeChain]:
    return {c: _average(eta.network, items) for c, items in eta.cells().items()}


def candidate_set(eta: CurveMeasure, base: Cell) -> set[Cell]:
    """Cells ``(i, j)`` below and right of ``base`` whose four-cell chain vanishes with sign 1."""
    a = [list(r) for r in eta.matrix().entries]
    return _candidates(a, _cell_chains(eta), base, eta.network)


def is_better(eta: CurveMeasure) -> bool:
    """True iff every candidate set is empty."""
    a = [list(r) for r in eta.matrix().entries]
    S = _cell_chains(eta)
    m, n = eta.shape
    return not any(_candidates(a, S, (i, j), eta.network) for i in range(m) for j in range(n))


def better_violations(eta: CurveMeasure) -> list[tuple[Cell, Cell]]:
    """Literal check: rectangles whose combination vanishes while some corner is occupied."""
    A = eta.matrix()
    S = _cell_chains(eta)
    m, n = eta.shape
    bad = []
    for i1, i2 in combinations(range(m), 2):
        for j1, j2 in combinations(range(n), 2):
            corners = [A[i1, j1], A[i1, j2], A[i2, j1], A[i2, j2]]
            if any(corners) and _combination(S, (i1, j1), (i2, j2), eta.network).is_zero():
                bad.append(((i1, j1), (i2, j2)))
    return bad


@dataclass(frozen=True)
class Pivot:
    """One pivot step: ``m`` moved around the rectangle ``base``-``corner``."""

    base: Cell
    corner: Cell
    amount: Fraction
    positive_cells: int


def better_decompose(eta: CurveMeasure, *, log: list[Pivot] | None = None) -> CurveMeasure:
    """Turn a good decomposition into a better one.

    Bases are swept in graded lexicographic order.  While a base has
    candidates, the smallest one ``(i, j)`` (same order) receives the pivot
    ``m = min(a[ik][j], a[i][jk])``: mass ``m`` moves onto the base and the
    opposite corner and off the two mixed corners.  Curves inside a cell
    are rescaled proportionally, so every cell keeps its normalized chain.
    """
    net = eta.network
    report = verify_good_decomposition(net, eta)
    if not report:
        raise PreconditionError("input is not a good decomposition: " + "; ".join(report.lines()[1:]))
    m, n = eta.shape
    cells = {c: [[curve, w] for curve, w in items] for c, items in eta.cells().items()}
    a = [[Fraction(0)] * n for _ in range(m)]
    for (i, j), items in cells.items():
        a[i][j] = sum((w for _, w in items), Fraction(0))
    # a cell's normalized chain never changes while the cell stays occupied,
    # and emptied cells are never refilled
    S = _cell_chains(eta)

    def shift(cell: Cell, delta: Fraction) -> None:
        i, j = cell
        factor = (a[i][j] + delta) / a[i][j]
        cells[cell] = [[curve, w * factor] for curve, w in cells[cell] if w * factor]
        a[i][j] += delta

    for base in graded_cells(m, n):
        ik, jk = base
        while True:
            cands = _candidates(a, S, base, net)
            if not cands:
                break
            i, j = min(cands, key=graded_key)
            amount = min(a[ik][j], a[i][jk])
            shift(base, amount)
            shift((i, j), amount)
            shift((ik, j), -amount)
            shift((i, jk), -amount)
            if log is not None:
                log.append(Pivot(base, (i, j), amount, sum(x > 0 for row in a for x in row)))
    atoms = tuple((curve, w) for c in sorted(cells) for curve, w in cells[c])
    return CurveMeasure(net, atoms)


def precc_check(eta_tilde: CurveMeasure, eta: CurveMeasure) -> bool:
    """Every cell occupied by ``eta_tilde`` is occupied by ``eta`` with the same normalized chain."""
    S_tilde, S = _cell_chains(eta_tilde), _cell_chains(eta)
    for cell, chain in S_tilde.items():
        if cell not in S or S[cell] != chain:
            return False
    return True


def measures_from_matrix(A: RepresentingMatrix | Matrix, network: TransportNetwork) -> tuple[AtomicMeasure, AtomicMeasure]:
    """Source and target measures given by the row and column sums of ``A``."""
    M = A if isinstance(A, RepresentingMatrix) else RepresentingMatrix(A)
    src = AtomicMeasure(tuple((v, s) for v, s in zip(network.sources, M.row_sums()) if s))
    tgt = AtomicMeasure(tuple((v, s) for v, s in zip(network.targets, M.col_sums()) if s))
    return src, tgt
