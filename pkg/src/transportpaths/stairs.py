"""Stair-shaped matrices, stairification, congruences and rescaled measures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import sympy

from .core import PathCurve
from .cycles import find_curve, find_curve_on
from .decomposition import CurveMeasure, Matrix, RepresentingMatrix, as_matrix
from .errors import DomainError, PreconditionError

NOT_STAIR_SHAPED = "not stair-shaped"
NOT_VERIFIED = "not verified"
NO_BLOCK_STRUCTURE = "no block structure"


def _mat(A) -> Matrix:
    if isinstance(A, RepresentingMatrix):
        return A.entries
    return as_matrix(A)


def _shape(A: Matrix) -> tuple[int, int]:
    return len(A), (len(A[0]) if A else 0)


def row_sums(A) -> tuple[Fraction, ...]:
    return tuple(sum(r, Fraction(0)) for r in _mat(A))


def col_sums(A) -> tuple[Fraction, ...]:
    A = _mat(A)
    return tuple(sum((r[j] for r in A), Fraction(0)) for j in range(_shape(A)[1]))


@dataclass(frozen=True)
class StairProfile:
    """Monotone lattice path from the top-left to the bottom-right cell (0-based)."""

    positions: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pos = self.positions
        if not pos:
            return
        if pos[0] != (0, 0):
            raise ValueError("a profile starts at (0, 0)")
        for k, (i, j) in enumerate(pos):
            if i + j != k:
                raise ValueError(f"position {k} = {(i, j)} is off the staircase")
            if k and (i < pos[k - 1][0] or j < pos[k - 1][1]):
                raise ValueError("profile coordinates must be non-decreasing")

    def __contains__(self, cell: object) -> bool:
        return cell in set(self.positions)


@dataclass(frozen=True)
class NotStairShaped:
    """Two positive entries that cannot lie on one staircase."""

    first: tuple[int, int]
    second: tuple[int, int]

    def __str__(self) -> str:
        return f"{NOT_STAIR_SHAPED}: entries {self.first} and {self.second} conflict"

    def __bool__(self) -> bool:
        return False


def is_stair_shaped(A) -> StairProfile | NotStairShaped:
    """Profile covering every positive entry, or the first conflicting pair.

    The positive entries must form a chain in the product order.  Between
    consecutive positives the path steps down before stepping right.
    """
    A = _mat(A)
    m, n = _shape(A)
    if any(x < 0 for row in A for x in row):
        raise PreconditionError("matrix has negative entries")
    if m == 0 or n == 0:
        return StairProfile(())
    pos = [(i, j) for i in range(m) for j in range(n) if A[i][j] > 0]
    for p, q in zip(pos, pos[1:]):
        if q[1] < p[1]:
            return NotStairShaped(p, q)
    path = [(0, 0)]
    for goal in pos + [(m - 1, n - 1)]:
        i, j = path[-1]
        while i < goal[0]:
            i += 1
            path.append((i, j))
        while j < goal[1]:
            j += 1
            path.append((i, j))
    return StairProfile(tuple(path))


def stairify(A) -> Matrix:
    """Stair-shaped matrix with the row and column sums of ``A``.

    Walks from the top-left cell comparing the row remainder ``R`` with the
    column remainder ``C``.  When ``R <= C`` the cell takes ``R`` and the
    walk moves down, otherwise it takes ``C`` and moves right.
    """
    A = _mat(A)
    m, n = _shape(A)
    if any(x < 0 for row in A for x in row):
        raise PreconditionError("matrix has negative entries")
    rows, cols = list(row_sums(A)), list(col_sums(A))
    B = [[Fraction(0)] * n for _ in range(m)]
    i = j = 0
    while i < m and j < n:
        R, C = rows[i], cols[j]
        if R <= C:
            B[i][j] = R
            cols[j] -= R
            rows[i] = Fraction(0)
            i += 1
        else:
            B[i][j] = C
            rows[i] -= C
            cols[j] = Fraction(0)
            j += 1
    return as_matrix(B)


@dataclass(frozen=True)
class ElementaryMove:
    """``amount * E[(i1, j1), (i2, j2)]``: +1 on the main corners, -1 on the others."""

    first: tuple[int, int]
    second: tuple[int, int]
    amount: Fraction

    def __post_init__(self) -> None:
        (i1, j1), (i2, j2) = self.first, self.second
        if not (i1 < i2 and j1 < j2):
            raise ValueError("need i1 < i2 and j1 < j2")

    def corners(self) -> list[tuple[tuple[int, int], int]]:
        (i1, j1), (i2, j2) = self.first, self.second
        return [((i1, j1), 1), ((i2, j2), 1), ((i1, j2), -1), ((i2, j1), -1)]

    def admissible(self, A) -> bool:
        A = _mat(A)
        return all(A[i][j] > 0 for (i, j), _ in self.corners())


def apply_moves(A, moves: Sequence[ElementaryMove]) -> Matrix:
    out = [list(r) for r in _mat(A)]
    for mv in moves:
        for (i, j), s in mv.corners():
            out[i][j] += s * mv.amount
    return as_matrix(out)


@dataclass(frozen=True)
class Congruence:
    ok: bool
    witness: tuple[ElementaryMove, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def congruent(A, B) -> Congruence:
    """Equal row and column sums, with an explicit move list when they agree.

    The witness anchors every move at the bottom-right cell: the move for
    interior cell ``(i, j)`` carries ``B[i][j] - A[i][j]``.
    """
    A, B = _mat(A), _mat(B)
    if _shape(A) != _shape(B):
        raise PreconditionError("matrices differ in shape")
    if row_sums(A) != row_sums(B) or col_sums(A) != col_sums(B):
        return Congruence(False)
    m, n = _shape(A)
    moves = tuple(
        ElementaryMove((i, j), (m - 1, n - 1), B[i][j] - A[i][j])
        for i in range(m - 1)
        for j in range(n - 1)
        if B[i][j] != A[i][j]
    )
    return Congruence(True, moves)


def admissible_moves_witness(A, B) -> tuple[ElementaryMove, ...] | str:
    """Moves admissible to ``A`` summing to ``B - A``, or ``"not verified"``.

    Solves exactly for ``B - A`` in the span of all elementary matrices whose
    four corners are positive in ``A``.
    """
    A, B = _mat(A), _mat(B)
    if not congruent(A, B):
        raise PreconditionError("matrices are not congruent")
    m, n = _shape(A)
    D = [B[i][j] - A[i][j] for i in range(m) for j in range(n)]
    if not any(D):
        return ()
    moves = [
        ((i1, j1), (i2, j2))
        for i1, i2 in combinations(range(m), 2)
        for j1, j2 in combinations(range(n), 2)
        if A[i1][j1] > 0 and A[i1][j2] > 0 and A[i2][j1] > 0 and A[i2][j2] > 0
    ]
    if not moves:
        return NOT_VERIFIED
    E = sympy.zeros(m * n, len(moves))
    for k, mv in enumerate(moves):
        for (i, j), s in ElementaryMove(*mv, Fraction(0)).corners():
            E[i * n + j, k] = s
    rhs = sympy.Matrix([sympy.Rational(d.numerator, d.denominator) for d in D])
    try:
        sol, params = E.gauss_jordan_solve(rhs)
    except ValueError:
        return NOT_VERIFIED
    sol = sol.subs({p: 0 for p in params})
    out = []
    for k, mv in enumerate(moves):
        t = sympy.Rational(sol[k])
        if t:
            out.append(ElementaryMove(*mv, Fraction(int(t.p), int(t.q))))
    result = tuple(out)
    assert apply_moves(A, result) == B
    return result


@dataclass(frozen=True)
class Block:
    """Inclusive 0-based cell range ``[top..bottom] x [left..right]``."""

    top: int
    left: int
    bottom: int
    right: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.bottom - self.top + 1, self.right - self.left + 1

    def __contains__(self, cell: object) -> bool:
        i, j = cell  # type: ignore[misc]
        return self.top <= i <= self.bottom and self.left <= j <= self.right

    def cells(self):
        for i in range(self.top, self.bottom + 1):
            for j in range(self.left, self.right + 1):
                yield i, j


@dataclass(frozen=True)
class NoBlockStructure:
    reason: str

    def __str__(self) -> str:
        return f"{NO_BLOCK_STRUCTURE}: {self.reason}"

    def __bool__(self) -> bool:
        return False


def detect_blocks(A) -> list[Block] | NoBlockStructure:
    """Chain of all-positive blocks starting at the top-left cell.

    Each block spans the positive run to the right of its first cell and
    the positive run below it.  The next block starts at the previous
    block's bottom-right corner when the matrix continues both right and
    down from there, one step down or right when it continues in only one
    direction, and diagonally otherwise.  Every positive entry must be
    covered by some block.
    """
    A = _mat(A)
    m, n = _shape(A)
    if m == 0 or n == 0 or A[0][0] <= 0:
        return NoBlockStructure("top-left entry is not positive")
    blocks: list[Block] = []
    i, j = 0, 0
    while True:
        right = j
        while right + 1 < n and A[i][right + 1] > 0:
            right += 1
        bottom = i
        while bottom + 1 < m and A[bottom + 1][j] > 0:
            bottom += 1
        block = Block(i, j, bottom, right)
        for c in block.cells():
            if A[c[0]][c[1]] <= 0:
                return NoBlockStructure(f"block starting at {(i, j)} has a zero entry at {c}")
        blocks.append(block)
        go_right = right + 1 < n and A[bottom][right + 1] > 0
        go_down = bottom + 1 < m and A[bottom + 1][right] > 0
        if go_right and go_down:
            nxt = (bottom, right)
        elif go_down:
            nxt = (bottom + 1, right)
        elif go_right:
            nxt = (bottom, right + 1)
        elif bottom + 1 < m and right + 1 < n and A[bottom + 1][right + 1] > 0:
            nxt = (bottom + 1, right + 1)
        else:
            break
        if nxt == (i, j):
            break
        i, j = nxt
    for r in range(m):
        for c in range(n):
            if A[r][c] > 0 and not any((r, c) in b for b in blocks):
                return NoBlockStructure(f"positive entry {(r, c)} lies outside every block")
    return blocks


def blockwise_stairify(A) -> Matrix:
    """Stairify each detected block in turn, on the running matrix."""
    A = _mat(A)
    blocks = detect_blocks(A)
    if isinstance(blocks, NoBlockStructure):
        raise PreconditionError(str(blocks))
    W = [list(r) for r in A]
    for b in blocks:
        sub = [W[i][b.left : b.right + 1] for i in range(b.top, b.bottom + 1)]
        for di, row in enumerate(stairify(sub)):
            W[b.top + di][b.left : b.right + 1] = list(row)
    return as_matrix(W)


def rescale_measure(eta_A: CurveMeasure, B, *, allow_new_cells: bool = False) -> CurveMeasure:
    """Rescale each cell of ``eta_A`` to the mass prescribed by ``B``.

    A cell that is empty in ``eta_A`` but positive in ``B`` is a domain
    error, unless ``allow_new_cells`` is set: the cell is then realized by a
    single curve, directed if the support has one and otherwise walked along
    the undirected support.
    """
    B = _mat(B)
    A = eta_A.matrix().entries
    if _shape(A) != _shape(B):
        raise PreconditionError(f"shape mismatch: {_shape(A)} vs {_shape(B)}")
    cells = eta_A.cells()
    net = eta_A.network
    support = eta_A.induced_chain()
    atoms: list[tuple[PathCurve, Fraction]] = []
    for i, row in enumerate(B):
        for j, b in enumerate(row):
            if b < 0:
                raise DomainError(f"negative entry at {(i, j)}")
            if not b:
                continue
            a = A[i][j]
            if a > 0:
                atoms.extend((curve, w * b / a) for curve, w in cells[(i, j)])
                continue
            x, y = net.sources[i], net.targets[j]
            if not allow_new_cells:
                raise DomainError(
                    f"B is positive at ({net.label(x)}, {net.label(y)}) where the measure has no curves"
                )
            curve = find_curve(net, x, y) or find_curve_on(support, x, y, directed=False)
            if curve is None:
                raise DomainError(f"no route from {net.label(x)} to {net.label(y)} on the support")
            atoms.append((curve, b))
    return CurveMeasure(net, tuple(atoms))
