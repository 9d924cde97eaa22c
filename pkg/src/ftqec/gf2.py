"""Bit-packed GF(2) linear algebra.

Matrices store each row as an arbitrary-precision Python integer whose
bit ``j`` is the entry in column ``j`` (column 0 is the least significant
bit).  Vectors are plain integers under the same convention.  This keeps
row operations (XOR) single machine instructions per word and makes
popcounts (`int.bit_count`) the inner loop of every weight computation.

Large enumerations (weight distributions, coset-leader searches) are
delegated to :mod:`ftqec._kernels`, which provides a compiled kernel and
a pure-numpy fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import DimensionTooLarge, InvalidParameters

#: Default cap on the dimension of a space enumerated exhaustively (2**28 words).
DEFAULT_MAX_DIM = 28

#: Maximum number of columns supported (soft sanity bound for text I/O).
MAX_COLS = 1024


@dataclass(frozen=True)
class BinaryMatrix:
    """Immutable GF(2) matrix with integer-packed rows."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self) -> None:
        if not 0 <= self.ncols <= MAX_COLS:
            raise InvalidParameters(f"column count {self.ncols} outside [0, {MAX_COLS}]")
        mask = (1 << self.ncols) - 1
        for r in self.rows:
            if r & ~mask:
                raise InvalidParameters("row has bits beyond the declared column count")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def row_weights(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def column(self, j: int) -> int:
        """Return column ``j`` packed as an integer (bit i = row i)."""
        out = 0
        for i, r in enumerate(self.rows):
            out |= ((r >> j) & 1) << i
        return out

    def to_bit_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.ncols)] for r in self.rows]

    def __iter__(self) -> Iterator[int]:
        return iter(self.rows)


def from_rows(rows: Iterable[int], ncols: int) -> BinaryMatrix:
    return BinaryMatrix(tuple(rows), ncols)


def from_bit_lists(bits: Sequence[Sequence[int]], ncols: int | None = None) -> BinaryMatrix:
    if ncols is None:
        ncols = len(bits[0]) if bits else 0
    rows = []
    for row in bits:
        if len(row) != ncols:
            raise InvalidParameters("ragged rows in bit-list input")
        rows.append(sum((1 if b else 0) << j for j, b in enumerate(row)))
    return BinaryMatrix(tuple(rows), ncols)


def identity(n: int) -> BinaryMatrix:
    return BinaryMatrix(tuple(1 << j for j in range(n)), n)


def zeros(nrows: int, ncols: int) -> BinaryMatrix:
    return BinaryMatrix((0,) * nrows, ncols)


def vstack(*mats: BinaryMatrix) -> BinaryMatrix:
    ncols = mats[0].ncols
    if any(m.ncols != ncols for m in mats):
        raise InvalidParameters("vstack requires equal column counts")
    rows: list[int] = []
    for m in mats:
        rows.extend(m.rows)
    return BinaryMatrix(tuple(rows), ncols)


def transpose(m: BinaryMatrix) -> BinaryMatrix:
    return BinaryMatrix(tuple(m.column(j) for j in range(m.ncols)), m.nrows)


def dot(u: int, v: int) -> int:
    """GF(2) inner product of two packed vectors."""
    return (u & v).bit_count() & 1


def matmul(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    """GF(2) matrix product ``a @ b``."""
    if a.ncols != b.nrows:
        raise InvalidParameters(f"shape mismatch: {a.nrows}x{a.ncols} @ {b.nrows}x{b.ncols}")
    out_rows = []
    for ar in a.rows:
        acc = 0
        r = ar
        while r:
            j = (r & -r).bit_length() - 1
            acc ^= b.rows[j]
            r &= r - 1
        out_rows.append(acc)
    return BinaryMatrix(tuple(out_rows), b.ncols)


def mat_vec(m: BinaryMatrix, v: int) -> int:
    """Apply ``m`` to a column vector: returns packed vector of row dot products."""
    out = 0
    for i, r in enumerate(m.rows):
        out |= dot(r, v) << i
    return out


def vec_mat(v: int, m: BinaryMatrix) -> int:
    """Row-vector times matrix: XOR of the rows selected by the bits of ``v``."""
    acc = 0
    while v:
        j = (v & -v).bit_length() - 1
        acc ^= m.rows[j]
        v &= v - 1
    return acc


def rref(m: BinaryMatrix) -> tuple[BinaryMatrix, int]:
    """Reduced row-echelon form.

    Returns the RREF with zero rows dropped, plus the rank.  Idempotent:
    ``rref(rref(m)[0])[0] == rref(m)[0]``.
    """
    rows = list(m.rows)
    pivots: list[tuple[int, int]] = []  # (pivot column, row value)
    for row in rows:
        for col, prow in pivots:
            if (row >> col) & 1:
                row ^= prow
        if row:
            pcol = (row & -row).bit_length() - 1
            # Back-substitute into existing pivot rows.
            updated = []
            for col, prow in pivots:
                if (prow >> pcol) & 1:
                    prow ^= row
                updated.append((col, prow))
            pivots = updated
            pivots.append((pcol, row))
    pivots.sort(key=lambda cr: cr[0])
    reduced = tuple(prow for _, prow in pivots)
    return BinaryMatrix(reduced, m.ncols), len(reduced)


def rank(m: BinaryMatrix) -> int:
    return rref(m)[1]


def pivot_columns(m: BinaryMatrix) -> list[int]:
    """Pivot columns of the RREF of ``m`` (ascending)."""
    reduced, _ = rref(m)
    return [(r & -r).bit_length() - 1 for r in reduced.rows]


def null_space(m: BinaryMatrix) -> BinaryMatrix:
    """Basis of the right null space: rows ``v`` with ``m · vᵀ = 0``.

    The returned basis is in RREF, so it is canonical for the space.
    """
    reduced, rk = rref(m)
    n = m.ncols
    pivots = [(r & -r).bit_length() - 1 for r in reduced.rows]
    pivot_set = set(pivots)
    free_cols = [j for j in range(n) if j not in pivot_set]
    basis = []
    for f in free_cols:
        v = 1 << f
        for pcol, prow in zip(pivots, reduced.rows):
            if (prow >> f) & 1:
                v |= 1 << pcol
        basis.append(v)
    nullmat, nullrank = rref(BinaryMatrix(tuple(basis), n))
    assert nullrank == n - rk
    return nullmat


def solve(m: BinaryMatrix, target: int) -> int | None:
    """Solve ``x · m = target`` for a packed row vector ``x``, or None.

    ``x`` selects a combination of the rows of ``m``.
    """
    pivots: dict[int, tuple[int, int]] = {}  # pivot col -> (row, combo)
    for i, row in enumerate(m.rows):
        combo = 1 << i
        while row:
            col = (row & -row).bit_length() - 1
            if col not in pivots:
                pivots[col] = (row, combo)
                break
            prow, pcombo = pivots[col]
            row ^= prow
            combo ^= pcombo
    x = 0
    residue = target
    # Pivot rows have their pivot column as lowest set bit, so clearing the
    # lowest residue bit never disturbs columns already cleared.
    while residue:
        col = (residue & -residue).bit_length() - 1
        if col not in pivots:
            return None
        prow, pcombo = pivots[col]
        residue ^= prow
        x ^= pcombo
    return x


def inverse(m: BinaryMatrix) -> BinaryMatrix:
    """Inverse of a square GF(2) matrix (raises if singular)."""
    n = m.ncols
    if m.nrows != n:
        raise InvalidParameters("inverse requires a square matrix")
    aug = [row | (1 << (n + i)) for i, row in enumerate(m.rows)]
    reduced, rk = rref(BinaryMatrix(tuple(aug), 2 * n))
    if rk != n or any(((r & -r).bit_length() - 1) >= n for r in reduced.rows):
        raise InvalidParameters("matrix is singular over GF(2)")
    mask = (1 << n) - 1
    inv_rows = [r >> n for r in reduced.rows]
    assert all((r & mask) == (1 << i) for i, r in enumerate(reduced.rows))
    return BinaryMatrix(tuple(inv_rows), n)


def row_space_contains(m: BinaryMatrix, v: int) -> bool:
    """True when packed vector ``v`` lies in the row space of ``m``."""
    reduced, _ = rref(m)
    for row in reduced.rows:
        pcol = (row & -row).bit_length() - 1
        if (v >> pcol) & 1:
            v ^= row
    return v == 0


def same_row_space(a: BinaryMatrix, b: BinaryMatrix) -> bool:
    return rref(a)[0] == rref(b)[0]


def enumerate_row_space(m: BinaryMatrix, max_dim: int = DEFAULT_MAX_DIM) -> Iterator[int]:
    """Yield every word of the row space (2**rank words, Gray order)."""
    reduced, rk = rref(m)
    if rk > max_dim:
        raise DimensionTooLarge(f"row space has dimension {rk} > budget {max_dim}")
    word = 0
    yield word
    for i in range(1, 1 << rk):
        j = (i & -i).bit_length() - 1
        word ^= reduced.rows[j]
        yield word


def is_self_orthogonal(m: BinaryMatrix) -> bool:
    """True when every pair of rows (including each row with itself) has even overlap.

    Equivalent to: the row space is contained in its own dual.
    """
    rows = m.rows
    for i, ri in enumerate(rows):
        if ri.bit_count() & 1:
            return False
        for rj in rows[i + 1:]:
            if (ri & rj).bit_count() & 1:
                return False
    return True


def weight_distribution(m: BinaryMatrix, max_dim: int = DEFAULT_MAX_DIM) -> dict[int, int]:
    """Exact weight distribution of the row space of ``m``.

    Returns ``{weight: count}`` with counts summing to ``2**rank``.
    Raises :class:`DimensionTooLarge` when the rank exceeds ``max_dim``.
    """
    from . import _kernels

    reduced, rk = rref(m)
    if rk > max_dim:
        raise DimensionTooLarge(f"row space has dimension {rk} > budget {max_dim}")
    counts = _kernels.weight_counts(list(reduced.rows), reduced.ncols)
    return {w: int(c) for w, c in enumerate(counts) if c}


class CosetLeader(NamedTuple):
    """Minimum-weight representative of ``shift + rowspace(space)``."""

    vector: int
    weight: int
    certified: bool  # True: exhaustive search; False: greedy descent only.


def min_weight_coset_representative(
    space: BinaryMatrix, shift: int, budget: int = DEFAULT_MAX_DIM
) -> CosetLeader:
    """Minimum-weight word of the coset ``shift + rowspace(space)``.

    Exhaustive (certified) when the space dimension is within ``budget``;
    otherwise a greedy bit-flip descent over basis combinations, flagged
    as heuristic.  Ties are broken toward the numerically smallest word
    so results are reproducible.
    """
    from . import _kernels

    reduced, rk = rref(space)
    if shift >> space.ncols:
        raise InvalidParameters("shift has bits beyond the column count")
    if rk <= budget:
        weight, vector = _kernels.min_coset_weight(list(reduced.rows), shift, reduced.ncols)
        return CosetLeader(vector=vector, weight=weight, certified=True)
    # Greedy descent: repeatedly apply the single basis row that lowers the
    # weight the most (ties toward smaller word value), until a local optimum.
    current = shift
    improved = True
    while improved:
        improved = False
        best = current
        for row in reduced.rows:
            cand = current ^ row
            if (cand.bit_count(), cand) < (best.bit_count(), best):
                best = cand
        if best != current:
            current = best
            improved = True
    return CosetLeader(vector=current, weight=current.bit_count(), certified=False)


# ---------------------------------------------------------------------------
# Matrix text format: one row per line of '0'/'1' characters; '#' starts a
# comment; blank lines ignored.
# ---------------------------------------------------------------------------

def format_matrix(m: BinaryMatrix, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    for r in m.rows:
        lines.append("".join("1" if (r >> j) & 1 else "0" for j in range(m.ncols)))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> tuple[BinaryMatrix, list[str]]:
    """Parse the text format; returns the matrix and the comment lines."""
    comments: list[str] = []
    rows: list[int] = []
    ncols: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        if set(line) - {"0", "1"}:
            raise InvalidParameters(f"line {lineno}: expected only '0'/'1' characters")
        if ncols is None:
            ncols = len(line)
        elif len(line) != ncols:
            raise InvalidParameters(f"line {lineno}: row length {len(line)} != {ncols}")
        rows.append(sum((1 if ch == "1" else 0) << j for j, ch in enumerate(line)))
    if ncols is None:
        raise InvalidParameters("no matrix rows found")
    return BinaryMatrix(tuple(rows), ncols), comments
