from __future__ import annotations

import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import doc, euclid, ids
from transportpaths.core import (
    AtomicMeasure,
    Edge,
    EdgeChain,
    PathCurve,
    Point,
    SignedNodeMeasure,
    TransportNetwork,
    boundary,
    cost_alpha,
    fraction,
    is_on,
    is_subcurrent,
    mass,
    validate_network,
)
from transportpaths.errors import DomainError, PreconditionError
from transportpaths.generate import random_instance


def one_edge(weight=1, length=1):
    return TransportNetwork(
        (Point(0, (0, 0)), Point(1, (length, 0))),
        (Edge(0, 1, weight),),
        AtomicMeasure(((0, weight),)),
        AtomicMeasure(((1, weight),)),
        ((0, "x"), (1, "y")),
    )


def triangle():
    """Directed 3-cycle with no atoms."""
    return TransportNetwork(
        (Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (0, 1))),
        (Edge(0, 1, 1), Edge(1, 2, 1), Edge(2, 0, 1)),
    )


@pytest.fixture
def ex31():
    return doc("example3_1").network


def test_fraction_parsing():
    assert fraction("0.25") == F(1, 4)
    assert fraction("3/4") == F(3, 4)
    assert fraction(0.1) == F(1, 10)
    with pytest.raises(ValueError):
        fraction("nan")


def test_boundary_single_edge():
    net = one_edge()
    assert boundary(EdgeChain(net, {0: 1})) == {0: -1, 1: 1}


def test_boundary_example_network(ex31):
    x1, x2, y1, y2 = ids(ex31, "x1", "x2", "y1", "y2")
    assert boundary(ex31.chain()) == {x1: -4, x2: -2, y1: 3, y2: 3}


def test_boundary_of_directed_cycle_vanishes():
    net = triangle()
    assert boundary(EdgeChain(net, {0: F(5, 3), 1: F(5, 3), 2: F(5, 3)})).is_zero()


def test_mass_values(ex31):
    assert mass(EdgeChain(one_edge())) == 0
    assert mass(EdgeChain(one_edge(length=2), {0: 1})) == 2
    # 4, 2, 3, 3 on edges of length sqrt(1/2); 6 on the unit trunk
    assert mass(ex31.chain()) == pytest.approx(12 * math.sqrt(0.5) + 6, abs=1e-12)
    assert mass(ex31.chain()) == pytest.approx(14.4853, abs=1e-4)


def test_mass_triangle_inequality(ex31):
    A = EdgeChain(ex31, {0: 1, 2: -3})
    B = EdgeChain(ex31, {0: -2, 3: 5})
    assert mass(A + B) <= mass(A) + mass(B)


def test_cost_alpha(ex31):
    assert cost_alpha(ex31, 1) == mass(ex31.chain())
    assert cost_alpha(ex31, 0) == pytest.approx(4 * math.sqrt(0.5) + 1, abs=1e-12)
    assert cost_alpha(one_edge(weight=4), 0.5) == pytest.approx(2.0)
    for bad in (-0.1, 1.5):
        with pytest.raises(DomainError):
            cost_alpha(ex31, bad)


def test_is_on_and_subcurrent(ex31):
    T = ex31.chain()
    assert is_on(T, ex31) and is_subcurrent(T, ex31)
    assert not is_on(2 * T, ex31)
    assert is_subcurrent(EdgeChain(ex31), ex31)
    x2, y2 = ids(ex31, "x2", "y2")
    gamma22 = PathCurve.from_edges(ex31, [1, 2, 4])
    assert (gamma22.start, gamma22.end) == (x2, y2)
    assert is_subcurrent(gamma22.chain(ex31), ex31)


def test_crossing_circulation_is_on_but_not_sub():
    net = doc("remark4_crossing").network
    # forward along the upper middle segment, backward along the lower one
    S = EdgeChain(net, {1: 1, 2: 1, 3: 1, 6: -1, 7: -1, 8: -1})
    assert boundary(S).is_zero()
    assert is_on(S, net)
    assert not is_subcurrent(S, net)


def test_validate_example_is_clean(ex31):
    assert validate_network(ex31) == []


def test_validate_reports_junction_imbalance(ex31):
    weights = list(ex31.weights)
    weights[2] = 5
    problems = validate_network(ex31.with_weights(weights))
    assert len(problems) == 2
    assert {p.kind for p in problems} == {"balance"}
    assert sorted(p.amount for p in problems) == [-1, 1]
    assert {p.where for p in problems} == {"vertex J1", "vertex J2"}


def test_validate_atom_on_missing_vertex(ex31):
    src = AtomicMeasure(((99, 4), (ex31.vertex("x2"), 2)))
    problems = validate_network(ex31.with_measures(src, ex31.target))
    structural = [p for p in problems if p.kind == "structure"]
    assert len(structural) == 1
    assert "not on a network vertex" in structural[0].message


def test_validate_structural_cases():
    pts = (Point(0, (0, 0)), Point(1, (0, 0)), Point(2, (1, 1)))
    net = TransportNetwork(
        pts,
        (Edge(0, 0, 1), Edge(0, 1, 1), Edge(1, 2, 0)),
        AtomicMeasure(((2, 1),)),
        AtomicMeasure(((2, 1),)),
    )
    messages = " | ".join(p.message for p in validate_network(net))
    assert "self-loop" in messages
    assert "zero-length edge" in messages
    assert "non-positive weight" in messages
    assert "both a source and a target" in messages


def test_degenerate_empty_network():
    net = TransportNetwork((Point(0, (0,)),), ())
    assert validate_network(net) == []


def test_path_curve_checks(ex31):
    with pytest.raises(PreconditionError):
        PathCurve.from_edges(ex31, [0, 3])
    with pytest.raises(PreconditionError):
        PathCurve.from_edges(ex31, [])
    c = PathCurve.from_edges(ex31, [1, 2, 3])
    r = c.reversed()
    assert r.chain(ex31) == -c.chain(ex31)
    assert r.start == c.end and r.end == c.start


def test_chain_algebra(ex31):
    A = EdgeChain(ex31, {0: F(1, 3), 1: 2})
    assert A - A == EdgeChain(ex31)
    assert (A * 3)[0] == 1
    assert (A / 2)[1] == 1
    with pytest.raises(IndexError):
        EdgeChain(ex31, {7: 1})


def test_signed_measure_from_atoms():
    mu = AtomicMeasure(((3, F(1, 2)), (4, 2)))
    assert SignedNodeMeasure.of(mu) - SignedNodeMeasure({3: F(1, 2)}) == {4: 2}


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 10_000),
    st.lists(rationals, min_size=12, max_size=12),
    st.lists(rationals, min_size=12, max_size=12),
    rationals,
    rationals,
)
def test_boundary_is_linear(seed, ca, cb, a, b):
    net = random_instance(seed, 3, 3)
    n = len(net.edges)
    A = EdgeChain(net, dict(enumerate(ca[:n])))
    B = EdgeChain(net, dict(enumerate(cb[:n])))
    assert boundary(a * A + b * B) == a * boundary(A) + b * boundary(B)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 6))
def test_boundary_of_valid_network_is_target_minus_source(seed, m, n):
    net = random_instance(seed, m, n)
    assert validate_network(net) == []
    expected = SignedNodeMeasure.of(net.target) - SignedNodeMeasure.of(net.source)
    assert boundary(net.chain()) == expected
    # alpha = 1 reproduces the mass exactly on rational coordinates
    assert cost_alpha(net, 1.0) == mass(net.chain())


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(-8, 40), min_size=16, max_size=16))
def test_subcurrent_matches_mass_identity(seed, quarters):
    net = random_instance(seed, 3, 4)
    T = net.chain()
    # coefficients on a grid of quarters, scaled by each edge weight
    S = EdgeChain(net, {k: e.weight * F(q, 16) for (k, e), q in zip(enumerate(net.edges), quarters)})
    sub = is_subcurrent(S, net)
    identity = math.isclose(mass(T - S) + mass(S), mass(T), rel_tol=1e-9, abs_tol=1e-9)
    assert sub == identity
    if sub:
        assert is_on(S, net)
    # the per-edge lengths used by mass are plain Euclidean distances
    for k in range(len(net.edges)):
        assert net.length(k) == pytest.approx(euclid(net, k))
