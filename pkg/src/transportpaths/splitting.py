"""Splitting a transport path into map-compatible and plan-compatible parts."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from .core import (
    AtomicMeasure,
    EdgeChain,
    SignedNodeMeasure,
    TransportNetwork,
    boundary,
    format_fraction,
    is_subcurrent,
)
from .cycles import find_curve_on, find_cycle
from .decomposition import CurveMeasure, Matrix, as_matrix, is_better, verify_good_decomposition
from .errors import PreconditionError, StructuralError
from .stairs import NotStairShaped, is_stair_shaped

Pairs = dict[tuple[int, int], Fraction]


@dataclass(frozen=True)
class TransportMapAssignment:
    """A map between atoms together with the measure it pushes forward."""

    assignment: Mapping[int, int]
    domain: AtomicMeasure
    image: AtomicMeasure

    def pushforward(self) -> SignedNodeMeasure:
        return SignedNodeMeasure((self.assignment[v], m) for v, m in self.domain.atoms)

    def is_consistent(self) -> bool:
        return self.pushforward() == SignedNodeMeasure.of(self.image)

    def plan(self) -> Pairs:
        """The plan ``(id x map)_# domain`` as a pair dictionary."""
        out: Pairs = defaultdict(Fraction)
        for v, m in self.domain.atoms:
            out[(v, self.assignment[v])] += m
        return dict(out)


@dataclass(frozen=True)
class TransportPlanMatrix:
    """Plan ``pi[i][j]`` between listed row and column atoms."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    entries: Matrix

    def pairs(self) -> Pairs:
        return {
            (self.rows[i], self.cols[j]): x
            for i, row in enumerate(self.entries)
            for j, x in enumerate(row)
            if x
        }

    def first_marginal(self) -> SignedNodeMeasure:
        return SignedNodeMeasure((v, sum(r, Fraction(0))) for v, r in zip(self.rows, self.entries))

    def second_marginal(self) -> SignedNodeMeasure:
        return SignedNodeMeasure(
            (v, sum((r[j] for r in self.entries), Fraction(0))) for j, v in enumerate(self.cols)
        )


Plan = Union[TransportPlanMatrix, TransportMapAssignment, Mapping[tuple[int, int], Fraction]]


def plan_pairs(plan: Plan) -> Pairs:
    if isinstance(plan, TransportPlanMatrix):
        return plan.pairs()
    if isinstance(plan, TransportMapAssignment):
        return plan.plan()
    return {k: Fraction(v) for k, v in plan.items() if v}


@dataclass(frozen=True)
class SplitPart:
    label: str
    chain: EdgeChain
    source: AtomicMeasure
    target: AtomicMeasure
    witness: CurveMeasure


@dataclass(frozen=True)
class SplitResult:
    parts: tuple[SplitPart, ...]
    blocks: tuple[tuple[int, ...], ...] = ()
    witness: CurveMeasure | None = None
    extras: dict = field(default_factory=dict)

    def part(self, label: str) -> SplitPart:
        for p in self.parts:
            if p.label == label:
                return p
        raise KeyError(label)

    def total(self) -> EdgeChain:
        chains = [p.chain for p in self.parts]
        out = chains[0]
        for c in chains[1:]:
            out = out + c
        return out


def _measure(items) -> AtomicMeasure:
    acc: dict[int, Fraction] = {}
    for v, m in items:
        if m:
            acc[v] = acc.get(v, Fraction(0)) + m
    return AtomicMeasure(tuple(acc.items()))


def _part(label: str, witness: CurveMeasure, *, reverse: bool = False) -> SplitPart:
    w = witness.reversed() if reverse else witness
    chain = w.induced_chain()
    src = _measure((c.start, x) for c, x in w.atoms)
    tgt = _measure((c.end, x) for c, x in w.atoms)
    if boundary(chain) != SignedNodeMeasure.of(tgt) - SignedNodeMeasure.of(src):
        raise StructuralError(f"part {label}: boundary differs from target minus source")
    return SplitPart(label, chain, src, tgt, w)


def _require_good(network: TransportNetwork, eta: CurveMeasure) -> None:
    report = verify_good_decomposition(network, eta)
    if not report:
        raise PreconditionError("not a good decomposition: " + "; ".join(report.lines()[1:]))


def split_single_target(network: TransportNetwork, eta_better: CurveMeasure) -> SplitResult:
    """Split into ``T_0`` and single-target parts ``T_1 .. T_N``.

    ``X_j`` collects the sources sending mass to ``y_j``.  Sources shared by
    two targets form ``B_0``; the remaining sources of ``X_j`` form ``B_j``
    and are carried entirely to ``y_j`` by ``T_j``.
    """
    _require_good(network, eta_better)
    if not is_better(eta_better):
        raise PreconditionError("decomposition is not better: some candidate set is nonempty")
    if not find_cycle(network).cycle_free:
        raise PreconditionError("network is not cycle-free")
    A = eta_better.matrix().entries
    m, n = eta_better.shape
    X = [{i for i in range(m) if A[i][j] > 0} for j in range(n)]
    B0: set[int] = set()
    lab = network.label
    for j1 in range(n):
        for j2 in range(j1 + 1, n):
            common = X[j1] & X[j2]
            if len(common) >= 2:
                names = ", ".join(lab(network.sources[i]) for i in sorted(common))
                raise PreconditionError(
                    f"targets {lab(network.targets[j1])} and {lab(network.targets[j2])} share "
                    f"sources {names}: input is not better or the network has a cycle"
                )
            B0 |= common
    if len(B0) > n * (n - 1) // 2:
        raise StructuralError("B_0 is larger than N choose 2")
    Bj = [sorted(X[j] - B0) for j in range(n)]
    parts = [_part("T0", eta_better.restrict(lambda i, j: i in B0))]
    for j in range(n):
        members = set(Bj[j])
        parts.append(_part(f"T{j + 1}", eta_better.restrict(lambda i, jj, j=j: jj == j and i in members)))
    result = SplitResult(tuple(parts), (tuple(sorted(B0)),) + tuple(tuple(b) for b in Bj), eta_better)
    _check_parts(network, result)
    return result


def _check_parts(network: TransportNetwork, result: SplitResult) -> None:
    if result.total() != network.chain():
        raise StructuralError("parts do not add up to the network")
    for p in result.parts:
        if not is_subcurrent(p.chain, network):
            raise StructuralError(f"part {p.label} is not a subcurrent")


@dataclass(frozen=True)
class MapPlanSplit:
    phi_part: SplitPart
    phi: TransportMapAssignment
    pi_part: SplitPart
    pi: TransportPlanMatrix
    single: SplitResult
    phi_report: "CompatibilityReport"
    pi_report: "CompatibilityReport"


def split_map_plan(network: TransportNetwork, eta_better: CurveMeasure) -> MapPlanSplit:
    """``T = T_pi + T_phi`` with ``T_phi`` compatible with a map and ``T_pi`` with a plan."""
    single = split_single_target(network, eta_better)
    B0, *Bj = single.blocks
    src, tgt = network.sources, network.targets
    mass = network.source.as_dict()
    assignment = {src[i]: tgt[j] for j, members in enumerate(Bj) for i in members}
    domain = AtomicMeasure(tuple((src[i], mass[src[i]]) for j, members in enumerate(Bj) for i in members))
    image = _measure((assignment[v], m) for v, m in domain.atoms)
    phi = TransportMapAssignment(assignment, domain, image)
    if not phi.is_consistent():
        raise StructuralError("map does not push its domain onto its image")

    A = eta_better.matrix().entries
    rows = tuple(src[i] for i in B0)
    pi = TransportPlanMatrix(rows, tgt, tuple(A[i] for i in B0))
    for i in B0:
        if sum(1 for x in A[i] if x > 0) < 2:
            raise StructuralError(f"source {network.label(src[i])} in B_0 feeds fewer than two targets")

    shared = set(B0)
    phi_witness = eta_better.restrict(lambda i, j: i not in shared)
    phi_part = _part("T_phi", phi_witness)
    pi_part = single.parts[0]
    if pi.first_marginal() != SignedNodeMeasure.of(pi_part.source):
        raise StructuralError("plan rows do not match the plan part's source measure")
    if pi.second_marginal() != SignedNodeMeasure.of(pi_part.target):
        raise StructuralError("plan columns do not match the plan part's target measure")
    phi_report = verify_compatibility(phi_part.chain, phi, phi_witness)
    pi_report = verify_compatibility(pi_part.chain, pi, pi_part.witness)
    return MapPlanSplit(
        SplitPart("T_phi", phi_part.chain, phi_part.source, phi_part.target, phi_witness),
        phi,
        SplitPart("T_pi", pi_part.chain, pi_part.source, pi_part.target, pi_part.witness),
        pi,
        single,
        phi_report,
        pi_report,
    )


@dataclass(frozen=True)
class TwoMapSplit:
    B1: Matrix
    B2: Matrix
    T1: SplitPart
    T2: SplitPart
    phi: TransportMapAssignment
    psi: TransportMapAssignment
    phi_report: "CompatibilityReport"
    psi_report: "CompatibilityReport"


def split_two_maps(network: TransportNetwork, eta_stair: CurveMeasure) -> TwoMapSplit:
    """Split a stair-shaped decomposition into a forward map part and a reverse map part.

    ``B1`` keeps the last positive entry of every row and ``B2`` the rest.
    ``T1`` carries ``x_i`` to ``phi(x_i)``; ``-T2`` carries ``y_j`` back to
    ``psi(y_j)``.
    """
    B = eta_stair.matrix().entries
    if isinstance(is_stair_shaped(B), NotStairShaped):
        raise PreconditionError("representing matrix is not stair-shaped")
    _require_good(network, eta_stair)
    m, n = eta_stair.shape
    B1 = [[Fraction(0)] * n for _ in range(m)]
    B2 = [list(r) for r in B]
    for i, row in enumerate(B):
        pos = [j for j, x in enumerate(row) if x > 0]
        if pos:
            B1[i][pos[-1]] = row[pos[-1]]
            B2[i][pos[-1]] = Fraction(0)
    for j in range(n):
        if sum(1 for i in range(m) if B2[i][j] > 0) > 1:
            raise StructuralError(f"column {j + 1} of B2 has more than one positive entry")
    src, tgt = network.sources, network.targets
    first = {(i, j) for i in range(m) for j in range(n) if B1[i][j] > 0}
    T1 = _part("T1", eta_stair.restrict(lambda i, j: (i, j) in first))
    T2 = _part("T2", eta_stair.restrict(lambda i, j: (i, j) not in first))

    phi = TransportMapAssignment(
        {src[i]: tgt[j] for i, j in first},
        T1.source,
        T1.target,
    )
    psi_map = {tgt[j]: src[i] for i in range(m) for j in range(n) if B2[i][j] > 0}
    psi = TransportMapAssignment(psi_map, T2.target, T2.source)
    for name, f in (("phi", phi), ("psi", psi)):
        if not f.is_consistent():
            raise StructuralError(f"{name} does not push its domain onto its image")
    if T1.chain + T2.chain != network.chain():
        raise StructuralError("T1 + T2 differs from the network")
    for p in (T1, T2):
        if not is_subcurrent(p.chain, network):
            raise StructuralError(f"{p.label} is not a subcurrent")
    phi_report = verify_compatibility(T1.chain, phi, T1.witness)
    reverse = T2.witness.reversed()
    psi_report = verify_compatibility(-T2.chain, psi, reverse)
    return TwoMapSplit(as_matrix(B1), as_matrix(B2), T1, T2, phi, psi, phi_report, psi_report)


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    chain_ok: bool
    plan_ok: bool
    curves_ok: bool
    missing: tuple[tuple[int, int], ...] = ()
    messages: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def verify_compatibility(chain: EdgeChain, plan: Plan, witness: CurveMeasure | None = None) -> CompatibilityReport:
    """Check that ``chain`` and ``plan`` share a curve-measure witness.

    With an explicit ``witness`` its superposition must equal ``chain``,
    its endpoint pairs must reproduce ``plan`` and each curve must follow
    the orientation of ``chain``.  Without one, the witness is built from
    the directed curves ``g_ij`` inside the support of ``chain``; a pair
    with positive plan mass but no such curve makes the pair incompatible.
    """
    net = chain.network
    lab = net.label
    pairs = plan_pairs(plan)
    messages: list[str] = []
    missing: list[tuple[int, int]] = []
    # pairs with mass need a directed curve along the chain
    for (x, y), q in sorted(pairs.items()):
        if q > 0 and find_curve_on(chain, x, y) is None:
            missing.append((x, y))
            messages.append(f"no directed curve from {lab(x)} to {lab(y)} carrying {format_fraction(q)}")
    if witness is None:
        atoms = []
        for (x, y), q in sorted(pairs.items()):
            curve = find_curve_on(chain, x, y)
            if curve is not None:
                atoms.append((curve, q))
        witness = CurveMeasure(net, tuple(atoms))
    curves_ok = not missing
    for curve, _ in witness.atoms:
        if any(chain[e] * d <= 0 for e, d in zip(curve.edges, curve.directions)):
            curves_ok = False
            messages.append(f"curve {curve.describe(net)} leaves the oriented support")
    chain_ok = witness.induced_chain() == chain
    if not chain_ok:
        messages.append("curve superposition differs from the chain")
    plan_ok = witness.endpoint_pairs() == pairs
    if not plan_ok:
        messages.append("endpoint pairs of the curves differ from the plan")
    ok = chain_ok and plan_ok and curves_ok
    return CompatibilityReport(ok, chain_ok, plan_ok, curves_ok, tuple(missing), tuple(messages))
