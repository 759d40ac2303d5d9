"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import math
from fractions import Fraction

from transportpaths import load_fixture
from transportpaths.core import AtomicMeasure, Edge, PathCurve, Point, TransportNetwork
from transportpaths.decomposition import CurveMeasure, as_matrix

F = Fraction


def doc(name):
    return load_fixture(name)


def ids(net, *names):
    return tuple(net.vertex(n) for n in names)


def names(net, vertices):
    return [net.label(v) for v in vertices]


def matrix(rows):
    return as_matrix(rows)


def hub_network(row_sums, col_sums):
    """Sources on the left, targets on the right, every route through one hub."""
    m, n = len(row_sums), len(col_sums)
    pts = [Point(i, (0, i)) for i in range(m)] + [Point(m + j, (4, j)) for j in range(n)]
    hub = m + n
    pts.append(Point(hub, (2, F(1, 2))))
    edges = [Edge(i, hub, row_sums[i]) for i in range(m)] + [Edge(hub, m + j, col_sums[j]) for j in range(n)]
    labels = [(i, f"x{i + 1}") for i in range(m)] + [(m + j, f"y{j + 1}") for j in range(n)] + [(hub, "H")]
    keep = [e for e in edges if e.weight > 0]
    return TransportNetwork(
        tuple(pts),
        tuple(keep),
        AtomicMeasure(tuple((i, row_sums[i]) for i in range(m) if row_sums[i])),
        AtomicMeasure(tuple((m + j, col_sums[j]) for j in range(n) if col_sums[j])),
        tuple(labels),
    )


def hub_measure(B):
    """Network and curve measure whose representing matrix is ``B`` (no zero margins)."""
    B = as_matrix(B)
    rs = [sum(r, F(0)) for r in B]
    cs = [sum((r[j] for r in B), F(0)) for j in range(len(B[0]))]
    net = hub_network(rs, cs)
    index = {(e.tail, e.head): k for k, e in enumerate(net.edges)}
    m = len(B)
    hub = len(rs) + len(cs)
    atoms = []
    for i, row in enumerate(B):
        for j, b in enumerate(row):
            if b:
                atoms.append((PathCurve.from_edges(net, [index[(i, hub)], index[(hub, m + j)]]), b))
    return net, CurveMeasure(net, tuple(atoms))


def nw_oracle(A):
    """Comonotone coupling of the row and column marginals.

    Entry (i, j) is the overlap of the i-th row interval and the j-th
    column interval when both marginals are laid out on one line.
    """
    A = as_matrix(A)
    rows = [sum(r, F(0)) for r in A]
    cols = [sum((r[j] for r in A), F(0)) for j in range(len(A[0]))]
    R = [F(0)]
    for r in rows:
        R.append(R[-1] + r)
    C = [F(0)]
    for c in cols:
        C.append(C[-1] + c)
    return tuple(
        tuple(max(F(0), min(R[i + 1], C[j + 1]) - max(R[i], C[j])) for j in range(len(cols)))
        for i in range(len(rows))
    )


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def union_find_has_cycle(net):
    uf = UnionFind(net.vertex_ids)
    return any(not uf.union(e.tail, e.head) for e in net.edges if e.weight > 0)


def component_count(net):
    uf = UnionFind(net.vertex_ids)
    for e in net.edges:
        if e.weight > 0:
            uf.union(e.tail, e.head)
    return len({uf.find(v) for v in net.vertex_ids})


def euclid(net, k):
    e = net.edges[k]
    a, b = net.point(e.tail).coords, net.point(e.head).coords
    return math.sqrt(sum(float(x - y) ** 2 for x, y in zip(a, b)))


def integer_matrices(rows, cols, allowed):
    """All nonnegative integer matrices with the given margins supported on ``allowed`` cells."""
    m, n = len(rows), len(cols)
    cells = sorted(allowed)
    out = []

    def rec(k, r, c, acc):
        if k == len(cells):
            if all(x == 0 for x in r) and all(x == 0 for x in c):
                out.append(dict(acc))
            return
        i, j = cells[k]
        for v in range(min(r[i], c[j]) + 1):
            r[i] -= v
            c[j] -= v
            acc[(i, j)] = v
            rec(k + 1, r, c, acc)
            r[i] += v
            c[j] += v
        acc.pop((i, j), None)

    rec(0, list(rows), list(cols), {})
    return [tuple(tuple(F(d.get((i, j), 0)) for j in range(n)) for i in range(m)) for d in out]



def plan_of(document):
    """Plan matrix of a document's ``[matrix]`` section, keyed by vertex ids."""
    from transportpaths.splitting import TransportPlanMatrix

    net, M = document.network, document.matrix
    return TransportPlanMatrix(
        tuple(net.vertex(r) for r in M.rows), tuple(net.vertex(c) for c in M.cols), M.entries
    )


def mapping_by_label(net, assignment):
    return {net.label(a): net.label(b) for a, b in assignment.items()}
