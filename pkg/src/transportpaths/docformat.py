"""Plain-text document format, CSV matrices and DOT export.

A document is a sequence of bracketed sections; ``#`` starts a comment::

    [vertices]          # <id> <coord> <coord> ...
    0 -1 1
    [labels]            # <id> <name>
    0 x1
    [edges]             # <tail> <head> <weight>, indexed from 0 in order
    0 2 4
    [source]            # <vertex> <mass>
    x1 4
    [target]
    y1 3
    [curves]            # <weight> : <edge> ...   (~k walks edge k backwards)
    2 : 0 2 3
    [matrix]
    cols y1 y2
    row x1 2 2

Vertices may be referenced by integer id or by label.  Numbers are exact:
integers, decimals or ``p/q`` ratios.  ``emit_document`` writes the
canonical form, which ``parse_document`` reads back unchanged.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import AtomicMeasure, Edge, EdgeChain, PathCurve, Point, TransportNetwork, format_fraction, fraction
from .decomposition import CurveMeasure, Matrix, RepresentingMatrix, as_matrix
from .errors import ParseError, PreconditionError

SECTIONS = ("vertices", "labels", "edges", "source", "target", "curves", "matrix")


@dataclass(frozen=True)
class LabeledMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    entries: Matrix

    @classmethod
    def plain(cls, entries) -> "LabeledMatrix":
        M = RepresentingMatrix(entries)
        return cls(M.row_labels, M.col_labels, M.entries)


@dataclass(frozen=True)
class Document:
    network: TransportNetwork
    curves: CurveMeasure | None = None
    matrix: LabeledMatrix | None = None


@dataclass
class _Token:
    text: str
    line: int
    column: int


def _tokens(line: str, lineno: int) -> list[_Token]:
    body = line.split("#", 1)[0]
    out, k = [], 0
    while k < len(body):
        if body[k].isspace():
            k += 1
            continue
        start = k
        while k < len(body) and not body[k].isspace():
            k += 1
        out.append(_Token(body[start:k], lineno, start + 1))
    return out


def _number(tok: _Token) -> Fraction:
    try:
        return fraction(tok.text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"malformed number {tok.text!r}", tok.line, tok.column) from None


def _int(tok: _Token) -> int:
    try:
        return int(tok.text)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok.text!r}", tok.line, tok.column) from None


def parse_document(text: str) -> Document:
    """Parse document text; errors carry 1-based line and column."""
    section: str | None = None
    seen: set[str] = set()
    verts: list[tuple[int, list[Fraction], _Token]] = []
    labels: dict[int, str] = {}
    edges_raw: list[tuple[_Token, _Token, Fraction]] = []
    atoms: dict[str, list[tuple[_Token, Fraction]]] = {"source": [], "target": []}
    curves_raw: list[tuple[Fraction, list[_Token]]] = []
    cols: list[str] | None = None
    rows: list[tuple[str, list[Fraction]]] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line, lineno)
        if not toks:
            continue
        head = toks[0]
        if head.text.startswith("["):
            name = " ".join(t.text for t in toks)
            if not (name.startswith("[") and name.endswith("]")) or name[1:-1].strip() not in SECTIONS:
                raise ParseError(f"unknown section {name!r}", head.line, head.column)
            section = name[1:-1].strip()
            if section in seen:
                raise ParseError(f"section [{section}] repeated", head.line, head.column)
            seen.add(section)
            continue
        if section is None:
            raise ParseError("content before the first section header", head.line, head.column)
        if section == "vertices":
            if len(toks) < 2:
                raise ParseError("vertex needs an id and coordinates", head.line, head.column)
            verts.append((_int(head), [_number(t) for t in toks[1:]], head))
        elif section == "labels":
            if len(toks) != 2:
                raise ParseError("label line is '<id> <name>'", head.line, head.column)
            name = toks[1]
            if name.text.lstrip("-").isdigit():
                raise ParseError("labels must not be integers", name.line, name.column)
            vid = _int(head)
            if vid in labels:
                raise ParseError(f"vertex {vid} labelled twice", head.line, head.column)
            if name.text in labels.values():
                raise ParseError(f"label {name.text!r} used twice", name.line, name.column)
            labels[vid] = name.text
        elif section == "edges":
            if len(toks) != 3:
                raise ParseError("edge line is '<tail> <head> <weight>'", head.line, head.column)
            edges_raw.append((toks[0], toks[1], _number(toks[2])))
        elif section in ("source", "target"):
            if len(toks) != 2:
                raise ParseError("atom line is '<vertex> <mass>'", head.line, head.column)
            atoms[section].append((toks[0], _number(toks[1])))
        elif section == "curves":
            if len(toks) < 3 or toks[1].text != ":":
                raise ParseError("curve line is '<weight> : <edge> ...'", head.line, head.column)
            curves_raw.append((_number(head), toks[2:]))
        elif section == "matrix":
            if head.text == "cols":
                if cols is not None:
                    raise ParseError("matrix columns declared twice", head.line, head.column)
                cols = [t.text for t in toks[1:]]
            elif head.text == "row":
                if cols is None:
                    raise ParseError("'cols' must precede the rows", head.line, head.column)
                if len(toks) != len(cols) + 2:
                    raise ParseError(
                        f"row has {len(toks) - 2} entries, expected {len(cols)}", head.line, head.column
                    )
                rows.append((toks[1].text, [_number(t) for t in toks[2:]]))
            else:
                raise ParseError("matrix lines start with 'cols' or 'row'", head.line, head.column)

    ids: set[int] = set()
    for vid, _, tok in verts:
        if vid in ids:
            raise ParseError(f"duplicate vertex id {vid}", tok.line, tok.column)
        ids.add(vid)
    for vid in labels:
        if vid not in ids:
            raise ParseError(f"label for unknown vertex {vid}", 0, 0)
    by_label = {name: vid for vid, name in labels.items()}

    def ref(tok: _Token) -> int:
        if tok.text.lstrip("-").isdigit():
            vid = int(tok.text)
            if vid in ids:
                return vid
        elif tok.text in by_label:
            return by_label[tok.text]
        raise ParseError(f"unknown vertex {tok.text!r}", tok.line, tok.column)

    edges = tuple(Edge(ref(t), ref(h), w) for t, h, w in edges_raw)
    measures = {}
    for name, items in atoms.items():
        got: list[tuple[int, Fraction]] = []
        for tok, m in items:
            v = ref(tok)
            if any(v == u for u, _ in got):
                raise ParseError(f"duplicate {name} atom {tok.text!r}", tok.line, tok.column)
            got.append((v, m))
        measures[name] = AtomicMeasure(tuple(got))
    network = TransportNetwork(
        tuple(Point(vid, tuple(c)) for vid, c, _ in verts),
        edges,
        measures["source"],
        measures["target"],
        tuple(sorted(labels.items())),
    )

    curves = None
    if "curves" in seen:
        found = []
        for w, toks in curves_raw:
            es, ds = [], []
            for t in toks:
                back = t.text.startswith("~")
                k = _int(_Token(t.text[1:] if back else t.text, t.line, t.column))
                if not 0 <= k < len(edges):
                    raise ParseError(f"edge index {k} out of range", t.line, t.column)
                es.append(k)
                ds.append(-1 if back else 1)
            try:
                found.append((PathCurve.from_edges(network, es, ds), w))
            except PreconditionError as exc:
                raise ParseError(str(exc), toks[0].line, toks[0].column) from None
        try:
            curves = CurveMeasure(network, tuple(found))
        except PreconditionError as exc:
            raise ParseError(str(exc)) from None

    matrix = None
    if "matrix" in seen:
        if cols is None:
            raise ParseError("matrix section without 'cols'")
        matrix = LabeledMatrix(tuple(r for r, _ in rows), tuple(cols), as_matrix(v for _, v in rows))
    return Document(network, curves, matrix)


def _curve_text(curve: PathCurve) -> str:
    return " ".join(str(e) if d == 1 else f"~{e}" for e, d in zip(curve.edges, curve.directions))


def emit_document(doc: Document) -> str:
    """Canonical text for ``doc``."""
    net = doc.network
    name = net.label
    out = ["[vertices]"]
    out += [" ".join([str(p.id)] + [format_fraction(c) for c in p.coords]) for p in net.vertices]
    if net.labels:
        out.append("[labels]")
        out += [f"{v} {n}" for v, n in net.labels]
    out.append("[edges]")
    out += [f"{name(e.tail)} {name(e.head)} {format_fraction(e.weight)}" for e in net.edges]
    for title, measure in (("source", net.source), ("target", net.target)):
        out.append(f"[{title}]")
        out += [f"{name(v)} {format_fraction(m)}" for v, m in measure.atoms]
    if doc.curves is not None:
        out.append("[curves]")
        out += [f"{format_fraction(w)} : {_curve_text(c)}" for c, w in doc.curves.atoms]
    if doc.matrix is not None:
        out.append("[matrix]")
        out.append(" ".join(["cols", *doc.matrix.cols]))
        for label, row in zip(doc.matrix.rows, doc.matrix.entries):
            out.append(" ".join(["row", label, *map(format_fraction, row)]))
    return "\n".join(out) + "\n"


def parse_matrix_csv(text: str) -> LabeledMatrix:
    """Read a matrix from CSV.

    A header row is detected when its first cell is empty or not a number;
    row labels are detected the same way in the first column.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    rows = [r for r in rows if not r[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty matrix")

    def numeric(cell: str) -> bool:
        try:
            fraction(cell)
            return True
        except (ValueError, ZeroDivisionError):
            return False

    header = None
    if not all(numeric(c) for c in rows[0][1:]) or not rows[0][0].strip():
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    has_labels = any(not numeric(r[0]) for r in rows)
    body, labels = [], []
    for lineno, r in enumerate(rows, start=2 if header else 1):
        cells = r[1:] if has_labels else r
        if has_labels:
            labels.append(r[0].strip())
        vals = []
        for col, c in enumerate(cells, start=2 if has_labels else 1):
            try:
                vals.append(fraction(c))
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"malformed number {c!r}", lineno, col) from None
        body.append(vals)
    if len({len(r) for r in body}) != 1:
        raise ParseError("rows have different lengths")
    n = len(body[0])
    cols = tuple(header[1:] if has_labels else header) if header else tuple(f"y{j + 1}" for j in range(n))
    if len(cols) != n:
        raise ParseError("header length does not match the rows", 1, 1)
    rlabels = tuple(labels) if has_labels else tuple(f"x{i + 1}" for i in range(len(body)))
    return LabeledMatrix(rlabels, cols, as_matrix(body))


def emit_matrix_csv(matrix: LabeledMatrix | Matrix, rows: Iterable[str] | None = None, cols: Iterable[str] | None = None) -> str:
    if not isinstance(matrix, LabeledMatrix):
        plain = LabeledMatrix.plain(matrix)
        matrix = LabeledMatrix(tuple(rows) if rows else plain.rows, tuple(cols) if cols else plain.cols, plain.entries)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *matrix.cols])
    for label, row in zip(matrix.rows, matrix.entries):
        w.writerow([label, *map(format_fraction, row)])
    return buf.getvalue()


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(network: TransportNetwork, parts: Iterable[tuple[str, EdgeChain]] | None = None, name: str = "T") -> str:
    """DOT digraph of the network, or of labelled chains on it.

    A negative chain coefficient is drawn as an arrow against the edge's
    orientation.
    """
    lab = network.label
    src, tgt = set(network.sources), set(network.targets)
    out = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;"]
    for p in network.vertices:
        shape = "box" if p.id in src else "doublecircle" if p.id in tgt else "circle"
        pos = ",".join(f"{float(c):g}" for c in p.coords[:2])
        out.append(f"  {_dot_id(lab(p.id))} [shape={shape}, pos={_dot_id(pos)}];")
    chains = list(parts) if parts is not None else [("T", network.chain())]
    for label, chain in chains:
        for k, c in chain.items():
            e = network.edges[k]
            a, b = (e.tail, e.head) if c > 0 else (e.head, e.tail)
            attrs = f"label={_dot_id(format_fraction(abs(c)))}, edge={k}"
            if parts is not None:
                attrs += f", part={_dot_id(label)}"
            out.append(f"  {_dot_id(lab(a))} -> {_dot_id(lab(b))} [{attrs}];")
    out.append("}")
    return "\n".join(out) + "\n"
