"""Command line interface.

Exit status is 0 when the command succeeds or the checked property holds,
1 when the property fails, and 2 for unreadable input or bad usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, TextIO

from . import plotting
from .core import EdgeChain, TransportNetwork, cost_alpha, format_fraction, mass, validate_network
from .cycles import find_cycle
from .decomposition import (
    CurveMeasure,
    better_decompose,
    extract_good_decomposition,
    is_better,
    verify_good_decomposition,
)
from .docformat import Document, LabeledMatrix, emit_document, emit_matrix_csv, parse_document, parse_matrix_csv, to_dot
from .errors import DomainError, ParseError, PreconditionError, StructuralError
from .fixtures import fixture_text
from .generate import random_instance
from .splitting import (
    TransportPlanMatrix,
    split_map_plan,
    split_single_target,
    split_two_maps,
    verify_compatibility,
)
from .stairs import (
    NoBlockStructure,
    NotStairShaped,
    blockwise_stairify,
    detect_blocks,
    is_stair_shaped,
    rescale_measure,
    stairify,
)


class InputError(Exception):
    """Bad input: reported with exit status 2."""


class Reporter:
    """Collects a human-readable report and a JSON payload side by side."""

    def __init__(self, fmt: str, out: TextIO):
        self.fmt = fmt
        self.out = out
        self.data: dict[str, Any] = {}
        self.lines: list[str] = []

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def put(self, key: str, value: Any) -> None:
        self.data[key] = value

    def flush(self) -> None:
        if self.fmt == "json":
            self.out.write(json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        elif self.lines:
            self.out.write("\n".join(self.lines) + "\n")


def _q(x: Fraction) -> str:
    return format_fraction(x)


def _matrix_json(M) -> list[list[str]]:
    return [[_q(x) for x in row] for row in M]


def _matrix_lines(M, rows=None, cols=None) -> list[str]:
    cells = [[_q(x) for x in row] for row in M]
    rows = list(rows) if rows else [f"x{i + 1}" for i in range(len(cells))]
    cols = list(cols) if cols else [f"y{j + 1}" for j in range(len(cells[0]) if cells else 0)]
    width = max([len(c) for r in cells for c in r] + [len(c) for c in cols] + [1])
    lw = max([len(r) for r in rows] + [1])
    out = [" " * lw + "  " + " ".join(c.rjust(width) for c in cols)]
    for label, r in zip(rows, cells):
        out.append(label.ljust(lw) + "  " + " ".join(c.rjust(width) for c in r))
    return out


def _chain_json(chain: EdgeChain) -> dict[str, str]:
    return {str(k): _q(c) for k, c in chain.items()}


def _chain_lines(chain: EdgeChain) -> list[str]:
    net = chain.network
    out = []
    for k, c in chain.items():
        e = net.edges[k]
        out.append(f"  edge {k} {net.label(e.tail)}->{net.label(e.head)}: {_q(c)}")
    return out


def _curves_json(eta: CurveMeasure) -> list[dict[str, Any]]:
    net = eta.network
    return [
        {
            "weight": _q(w),
            "edges": [str(e) if d == 1 else f"~{e}" for e, d in zip(c.edges, c.directions)],
            "path": [net.label(v) for v in c.vertices],
        }
        for c, w in eta.atoms
    ]


def _read_input(spec: str) -> tuple[str, str]:
    path = Path(spec)
    if path.is_file():
        return path.read_text(encoding="utf-8"), path.name
    try:
        return fixture_text(spec)
    except FileNotFoundError:
        raise InputError(f"no such file or fixture: {spec}") from None


def load_document(spec: str) -> Document:
    text, name = _read_input(spec)
    if name.endswith(".csv"):
        raise InputError(f"{spec} is a bare matrix; this command needs a network document")
    return parse_document(text)


def load_matrix(spec: str) -> LabeledMatrix:
    text, name = _read_input(spec)
    if name.endswith(".csv"):
        return parse_matrix_csv(text)
    doc = parse_document(text)
    if doc.matrix is not None:
        return doc.matrix
    if doc.curves is not None:
        M = doc.curves.matrix()
        return LabeledMatrix(M.row_labels, M.col_labels, M.entries)
    raise InputError(f"{spec} has neither a [matrix] nor a [curves] section")


def _eta(doc: Document, extract: bool = True) -> CurveMeasure:
    if doc.curves is not None:
        return doc.curves
    if not extract:
        raise InputError("document has no [curves] section")
    return extract_good_decomposition(doc.network)


# commands ------------------------------------------------------------------


def cmd_validate(args, rep: Reporter) -> int:
    doc = load_document(args.input)
    problems = validate_network(doc.network)
    rep.put("valid", not problems)
    rep.put("violations", [{"kind": p.kind, "where": p.where, "message": p.message} for p in problems])
    rep.line("valid" if not problems else f"{len(problems)} violation(s):")
    rep.lines += [f"  {p}" for p in problems]
    return 0 if not problems else 1


def cmd_cycles(args, rep: Reporter) -> int:
    doc = load_document(args.input)
    cert = find_cycle(doc.network)
    net = doc.network
    rep.put("cycle_free", cert.cycle_free)
    if cert.cycle_free:
        rep.line("cycle-free")
        return 0
    rep.put("certificate", _chain_json(cert.chain))
    rep.put("cycle", [net.label(v) for v in cert.vertices])
    rep.line("not cycle-free; certificate cycle " + " ".join(net.label(v) for v in cert.vertices))
    rep.lines += _chain_lines(cert.chain)
    return 1


def _report_eta(rep: Reporter, eta: CurveMeasure, key: str = "curves") -> None:
    M = eta.matrix()
    rep.put(key, _curves_json(eta))
    rep.put("matrix", _matrix_json(M.entries))
    rep.line("curves:")
    rep.lines += [f"  {s}" for s in eta.describe()]
    rep.line("representing matrix:")
    rep.lines += ["  " + s for s in _matrix_lines(M.entries, M.row_labels, M.col_labels)]


def _write_doc(path: str | None, doc: Document) -> None:
    if path:
        Path(path).write_text(emit_document(doc), encoding="utf-8")


def cmd_good(args, rep: Reporter) -> int:
    doc = load_document(args.input)
    if args.action == "extract":
        eta = extract_good_decomposition(doc.network)
        _report_eta(rep, eta)
        _write_doc(args.output, Document(doc.network, eta, doc.matrix))
        return 0
    eta = _eta(doc, extract=False)
    report = verify_good_decomposition(doc.network, eta)
    rep.put("good", report.ok)
    rep.put("failures", list(report.edge_failures + report.orientation_failures + report.atom_failures))
    rep.lines += report.lines()
    return 0 if report.ok else 1


def cmd_better(args, rep: Reporter) -> int:
    doc = load_document(args.input)
    eta = _eta(doc)
    out = better_decompose(eta)
    _report_eta(rep, out)
    rep.put("better", is_better(out))
    _write_doc(args.output, Document(doc.network, out, doc.matrix))
    return 0


def cmd_stairify(args, rep: Reporter) -> int:
    M = load_matrix(args.input)
    if args.blockwise:
        blocks = detect_blocks(M.entries)
        if isinstance(blocks, NoBlockStructure):
            rep.put("blocks", None)
            rep.put("error", str(blocks))
            rep.line(str(blocks))
            return 1
        B = blockwise_stairify(M.entries)
        rep.put("blocks", [[b.top + 1, b.left + 1, b.bottom + 1, b.right + 1] for b in blocks])
        rep.line("blocks (1-based, inclusive):")
        rep.lines += [f"  rows {b.top + 1}-{b.bottom + 1}, cols {b.left + 1}-{b.right + 1}" for b in blocks]
    else:
        B = stairify(M.entries)
    profile = is_stair_shaped(B)
    rep.put("matrix", _matrix_json(B))
    rep.put("profile", [[i + 1, j + 1] for i, j in profile.positions])
    rep.lines += _matrix_lines(B, M.rows, M.cols)
    if args.csv:
        Path(args.csv).write_text(emit_matrix_csv(LabeledMatrix(M.rows, M.cols, B)), encoding="utf-8")
    if args.figure:
        fig = plotting.matrices_figure([("input", M.entries), ("stair-shaped", B)], M.rows, M.cols)
        plotting.save(fig, args.figure)
    return 0


def _measure_json(net: TransportNetwork, measure) -> dict[str, str]:
    return {net.label(v): _q(m) for v, m in measure.atoms}


def _map_json(net: TransportNetwork, assignment) -> dict[str, str]:
    return {net.label(k): net.label(v) for k, v in sorted(assignment.items())}


def cmd_split(args, rep: Reporter) -> int:
    doc = load_document(args.input)
    net = doc.network
    lab = net.label
    eta = _eta(doc)
    parts: list[tuple[str, EdgeChain]]
    if args.kind in ("single-target", "map-plan"):
        eta = better_decompose(eta) if not is_better(eta) else eta
        if args.kind == "single-target":
            res = split_single_target(net, eta)
            parts = [(p.label, p.chain) for p in res.parts]
            blocks = [[lab(net.sources[i]) for i in b] for b in res.blocks]
            rep.put("B", blocks)
            rep.put("parts", {p.label: {"chain": _chain_json(p.chain), "source": _measure_json(net, p.source),
                                        "target": _measure_json(net, p.target)} for p in res.parts})
            for k, b in enumerate(blocks):
                rep.line(f"B{k} = {{{', '.join(b)}}}")
            for p in res.parts:
                rep.line(f"{p.label}: {' + '.join(f'{_q(m)} {lab(v)}' for v, m in p.source.atoms) or '0'}"
                         f" -> {' + '.join(f'{_q(m)} {lab(v)}' for v, m in p.target.atoms) or '0'}")
            ok = True
        else:
            res = split_map_plan(net, eta)
            parts = [("T_phi", res.phi_part.chain), ("T_pi", res.pi_part.chain)]
            rep.put("phi", _map_json(net, res.phi.assignment))
            rep.put("pi", {f"{lab(x)},{lab(y)}": _q(q) for (x, y), q in sorted(res.pi.pairs().items())})
            rep.put("compatible", {"T_phi": res.phi_report.ok, "T_pi": res.pi_report.ok})
            rep.line("phi: " + (", ".join(f"{a}->{b}" for a, b in _map_json(net, res.phi.assignment).items()) or "(empty)"))
            rep.line("pi:  " + (", ".join(f"{_q(q)} ({lab(x)},{lab(y)})" for (x, y), q in sorted(res.pi.pairs().items())) or "(empty)"))
            rep.line(f"(T_phi, phi) compatible: {res.phi_report.ok}")
            rep.line(f"(T_pi, pi) compatible: {res.pi_report.ok}")
            ok = res.phi_report.ok and res.pi_report.ok
    else:
        eta, note = _stair_measure(net, eta)
        if eta is None:
            rep.put("error", note)
            rep.line(note)
            return 1
        res = split_two_maps(net, eta)
        parts = [("T1", res.T1.chain), ("T2", res.T2.chain)]
        rep.put("B1", _matrix_json(res.B1))
        rep.put("B2", _matrix_json(res.B2))
        rep.put("phi", _map_json(net, res.phi.assignment))
        rep.put("psi", _map_json(net, res.psi.assignment))
        rep.put("compatible", {"T1": res.phi_report.ok, "-T2": res.psi_report.ok})
        M = eta.matrix()
        if note:
            rep.line(note)
        rep.line("B1:")
        rep.lines += ["  " + s for s in _matrix_lines(res.B1, M.row_labels, M.col_labels)]
        rep.line("B2:")
        rep.lines += ["  " + s for s in _matrix_lines(res.B2, M.row_labels, M.col_labels)]
        rep.line("phi: " + ", ".join(f"{a}->{b}" for a, b in _map_json(net, res.phi.assignment).items()))
        rep.line("psi: " + ", ".join(f"{a}->{b}" for a, b in _map_json(net, res.psi.assignment).items()))
        rep.line(f"(T1, phi) compatible: {res.phi_report.ok}; (-T2, psi) compatible: {res.psi_report.ok}")
        ok = res.phi_report.ok and res.psi_report.ok
    if args.dot:
        Path(args.dot).write_text(to_dot(net, parts, name=args.kind), encoding="utf-8")
    if args.figure:
        plotting.save(plotting.parts_figure(net, parts), args.figure)
    return 0 if ok else 1


def _stair_measure(net: TransportNetwork, eta: CurveMeasure) -> tuple[CurveMeasure | None, str]:
    """A stair-shaped good decomposition derived from ``eta``, if one can be verified."""
    A = eta.matrix().entries
    if not isinstance(is_stair_shaped(A), NotStairShaped):
        return eta, ""
    blocks = detect_blocks(A)
    B = blockwise_stairify(A) if not isinstance(blocks, NoBlockStructure) else stairify(A)
    try:
        eta_B = rescale_measure(eta, B)
    except DomainError as exc:
        return None, f"stair-shaped decomposition not available: {exc}"
    if not verify_good_decomposition(net, eta_B):
        return None, "stair-shaped decomposition not verified as good"
    how = "blockwise " if not isinstance(blocks, NoBlockStructure) else ""
    return eta_B, f"using {how}stairified decomposition"


def cmd_cost(args, rep: Reporter) -> int:
    doc = load_document(args.input)
    costs = {}
    for a in args.alpha:
        try:
            costs[a] = cost_alpha(doc.network, a)
        except DomainError as exc:
            raise InputError(str(exc)) from None
    rep.put("costs", {f"{a:g}": c for a, c in costs.items()})
    rep.put("mass", mass(doc.network.chain()))
    rep.lines += [f"M_{a:g} = {c:.12g}" for a, c in costs.items()]
    return 0


def _plan_from(doc: Document) -> TransportPlanMatrix:
    if doc.matrix is None:
        raise InputError("compat verify needs the plan as a [matrix] section")
    net = doc.network
    try:
        rows = tuple(net.vertex(r) for r in doc.matrix.rows)
        cols = tuple(net.vertex(c) for c in doc.matrix.cols)
    except KeyError as exc:
        raise InputError(f"plan refers to unknown vertex {exc.args[0]!r}") from None
    return TransportPlanMatrix(rows, cols, doc.matrix.entries)


def cmd_compat(args, rep: Reporter) -> int:
    doc = load_document(args.input)
    report = verify_compatibility(doc.network.chain(), _plan_from(doc), doc.curves)
    net = doc.network
    rep.put("compatible", report.ok)
    rep.put("checks", {"chain": report.chain_ok, "plan": report.plan_ok, "curves": report.curves_ok})
    rep.put("missing", [[net.label(x), net.label(y)] for x, y in report.missing])
    rep.line("compatible" if report.ok else "not compatible")
    rep.lines += [f"  {m}" for m in report.messages]
    return 0 if report.ok else 1


def cmd_export(args, rep: Reporter) -> int:
    doc = load_document(args.input)
    if not (args.dot or args.figure):
        raise InputError("export needs --dot and/or --figure")
    if args.dot:
        text = to_dot(doc.network)
        if args.dot == "-":
            rep.out.write(text)
        else:
            Path(args.dot).write_text(text, encoding="utf-8")
    if args.figure:
        plotting.save(plotting.network_figure(doc.network), args.figure)
    return 0


def cmd_gen(args, rep: Reporter) -> int:
    if args.sources < 1 or args.targets < 1:
        raise InputError("--sources and --targets must be positive")
    net = random_instance(args.seed, args.sources, args.targets, args.junctions)
    text = emit_document(Document(net))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        rep.out.write(text)
    return 0


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_report(args, rep: Reporter) -> int:
    """Run the whole pipeline and write figures plus CSV tables to a directory."""
    doc = load_document(args.input)
    net = doc.network
    lab = net.label
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    def keep(path: Path) -> None:
        written.append(str(path))

    problems = validate_network(net)
    if problems:
        rep.put("valid", False)
        rep.lines += [f"invalid network: {p}" for p in problems]
        return 1
    keep(plotting.save(plotting.network_figure(net, title="transport path"), out / "network.png"))
    alphas = [0.0, 0.25, 0.5, 0.75, 1.0]
    path = out / "costs.csv"
    _write_csv(path, ["alpha", "cost"], [[a, repr(cost_alpha(net, a))] for a in alphas])
    keep(path)
    path = out / "edges.csv"
    _write_csv(path, ["edge", "tail", "head", "weight", "length"],
               [[k, lab(e.tail), lab(e.head), _q(e.weight), repr(net.length(k))] for k, e in enumerate(net.edges)])
    keep(path)

    cert = find_cycle(net)
    eta = _eta(doc)
    better = better_decompose(eta)
    A, Bt = eta.matrix(), better.matrix()
    panels = [("decomposition", A.entries), ("better", Bt.entries)]
    for name, M in (("matrix_input.csv", A), ("matrix_better.csv", Bt)):
        path = out / name
        path.write_text(emit_matrix_csv(LabeledMatrix(M.row_labels, M.col_labels, M.entries)), encoding="utf-8")
        keep(path)
    stair, note = _stair_measure(net, eta)
    if stair is None:
        stair, note = _stair_measure(net, better)
    if stair is not None:
        S = stair.matrix()
        panels.append(("stair-shaped", S.entries))
        path = out / "matrix_stair.csv"
        path.write_text(emit_matrix_csv(LabeledMatrix(S.row_labels, S.col_labels, S.entries)), encoding="utf-8")
        keep(path)
    keep(plotting.save(plotting.matrices_figure(panels, A.row_labels, A.col_labels), out / "matrices.png"))

    rows: list[list[Any]] = []
    parts: list[tuple[str, EdgeChain]] = []
    if cert.cycle_free:
        split = split_map_plan(net, better)
        parts = [("T_phi", split.phi_part.chain), ("T_pi", split.pi_part.chain)]
        if stair is not None:
            two = split_two_maps(net, stair)
            parts += [("T1", two.T1.chain), ("T2", two.T2.chain)]
        for label, chain in parts:
            for k, c in chain.items():
                rows.append([label, k, lab(net.edges[k].tail), lab(net.edges[k].head), _q(c)])
        path = out / "parts.csv"
        _write_csv(path, ["part", "edge", "tail", "head", "coefficient"], rows)
        keep(path)
        keep(plotting.save(plotting.parts_figure(net, parts), out / "parts.png"))

    rep.put("cycle_free", cert.cycle_free)
    rep.put("better_matrix", _matrix_json(Bt.entries))
    rep.put("files", written)
    rep.line(f"cycle-free: {cert.cycle_free}")
    if note:
        rep.line(note)
    rep.line("wrote:")
    rep.lines += [f"  {p}" for p in written]
    return 0


# parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json"), default="human", help="report style")

    parser = argparse.ArgumentParser(
        prog="transportpaths",
        description="Decompose, stairify and split transport paths between atomic measures.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check balance and structural invariants")
    p.add_argument("input")
    p = add("cycles", cmd_cycles, "find a cycle on the support or certify cycle-freeness")
    p.add_argument("input")
    p = add("good", cmd_good, "extract or verify a good decomposition")
    p.add_argument("action", choices=("extract", "verify"))
    p.add_argument("input")
    p.add_argument("--output", help="write the document with the extracted curves")
    p = add("better", cmd_better, "compute a better decomposition")
    p.add_argument("input")
    p.add_argument("--output", help="write the document with the better curves")
    p = add("stairify", cmd_stairify, "stairify a matrix")
    p.add_argument("input")
    p.add_argument("--blockwise", action="store_true", help="stairify detected positive blocks one by one")
    p.add_argument("--csv", help="also write the result as CSV")
    p.add_argument("--figure", help="write a heatmap of input and result (PNG, PDF, SVG)")
    p = add("split", cmd_split, "split the transport path")
    p.add_argument("kind", choices=("single-target", "map-plan", "two-maps"))
    p.add_argument("input")
    p.add_argument("--dot", help="write the parts as a DOT graph")
    p.add_argument("--figure", help="draw the parts to an image file")
    p = add("cost", cmd_cost, "M_alpha cost")
    p.add_argument("input")
    p.add_argument("--alpha", type=float, action="append", required=True)
    p = add("compat", cmd_compat, "check compatibility with a plan")
    p.add_argument("action", choices=("verify",))
    p.add_argument("input")
    p = add("export", cmd_export, "export the network as DOT and/or a figure")
    p.add_argument("input")
    p.add_argument("--dot", nargs="?", const="-", help="DOT output file (stdout if omitted)")
    p.add_argument("--figure", help="image file")
    p = add("gen", cmd_gen, "generate a random cycle-free instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sources", type=int, required=True)
    p.add_argument("--targets", type=int, required=True)
    p.add_argument("--junctions", type=int)
    p.add_argument("--output", "-o")
    p = add("report", cmd_report, "run the pipeline; write figures and CSV tables")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def run_command(argv: list[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rep = Reporter(args.format, out)
    try:
        status = args.func(args, rep)
    except (InputError, ParseError, PreconditionError, DomainError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return 2
    except StructuralError as exc:
        rep.put("error", str(exc))
        rep.line(f"error: {exc}")
        status = 1
    rep.flush()
    return status


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
