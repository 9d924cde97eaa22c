"""CSS quantum codes built from nested pairs of classical binary codes.

A code here is specified by a subcode C0 ⊆ C of GF(2)^n.  Basis states of
the encoded block are uniform superpositions over cosets of C0 inside C:

    |u> = sum_{x in C0} |x + u · D~>

where the rows of D~ are minimum-weight representatives of a quotient
basis C/C0.  X-type stabilizers are the rows of H~ (a basis of C0),
Z-type stabilizers a basis of the dual of C.  Logical operators:

    X~_u = X(u · D~)          Z~_u = Z(u · (D~ D~^T)^{-1} · D~)

which gives the canonical pairing  Z~_u X~_v = (-1)^{u·v} X~_v Z~_u.

The dual-containing construction (C contains its dual, C0 = C^perp)
yields an [[n, 2k_c - n, d]] code; the asymmetric 15-qubit code uses a
hand-picked pair instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import gf2
from .classical import ClassicalCode, _doubly_even_by_congruence, punctured_reed_muller
from .errors import InvalidParameters, NotDualContaining, SingularDDT

#: total enumeration budget (number of words visited) for exact quantum
#: distance searches: 2**k - 1 cosets, 2**dim words each.
_DISTANCE_BUDGET_LOG2 = 28


@dataclass(frozen=True)
class PauliProduct:
    """n-qubit Pauli operator up to phase, as X and Z bit masks."""

    x_mask: int
    z_mask: int
    n: int

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def commutes_with(self, other: "PauliProduct") -> bool:
        if self.n != other.n:
            raise InvalidParameters("Pauli products act on different block sizes")
        sym = (self.x_mask & other.z_mask).bit_count() + (self.z_mask & other.x_mask).bit_count()
        return sym % 2 == 0


@dataclass(frozen=True)
class CssCode:
    """[[n, k, d]] CSS code with explicit encoded-operator data."""

    n: int
    k: int
    d: int
    dx: int
    dz: int
    d_exact: bool
    #: basis of C0 (RREF) = X-type stabilizer generators.
    h_tilde: gf2.BinaryMatrix
    #: k x n minimum-weight coset representatives (rows generate C/C0).
    d_tilde: gf2.BinaryMatrix
    #: Z-logical generator matrix  (D~ D~^T)^{-1} D~.
    z_tilde: gf2.BinaryMatrix
    stabilizer_x: gf2.BinaryMatrix
    stabilizer_z: gf2.BinaryMatrix
    ddt: gf2.BinaryMatrix
    ddt_inverse: gf2.BinaryMatrix
    #: whether every coset representative was certified minimum weight.
    leaders_certified: bool
    #: mean check-row-weight metadata consumed by the overhead model.
    w: float
    name: str = ""
    source: ClassicalCode | None = None
    params: dict = field(default_factory=dict)

    @property
    def ddt_is_identity(self) -> bool:
        return self.ddt == gf2.identity(self.k)

    def __str__(self) -> str:
        flag = "" if self.d_exact else "(design)"
        return f"[[{self.n},{self.k},{self.d}{flag}]]"


def _complete_basis(h_tilde: gf2.BinaryMatrix, full_rows: tuple[int, ...],
                    ncols: int) -> list[int]:
    """Rows extending the C0 basis to a basis of C0 + span(full_rows).

    Forward elimination keyed on each row's lowest set bit (the pivot
    convention used throughout the GF(2) layer).
    """
    echelon: dict[int, int] = {(row & -row).bit_length() - 1: row for row in h_tilde.rows}
    reps = []
    for row in full_rows:
        reduced = row
        while reduced:
            pivot = (reduced & -reduced).bit_length() - 1
            if pivot not in echelon:
                echelon[pivot] = reduced
                reps.append(reduced)
                break
            reduced ^= echelon[pivot]
    return reps


def _exact_side_distance(space: gf2.BinaryMatrix, logical_rows: tuple[int, ...]) -> int | None:
    """Exact minimum weight over all nontrivial cosets u·L + space, or None.

    This is the distance of one Pauli type: the lightest operator that
    acts as a nonidentity encoded operator of that type.
    """
    k = len(logical_rows)
    dim = space.nrows
    if k == 0:
        return None
    if dim > gf2.DEFAULT_MAX_DIM or k + dim > _DISTANCE_BUDGET_LOG2:
        return None
    best = None
    for u in range(1, 1 << k):
        shift = 0
        for i in range(k):
            if (u >> i) & 1:
                shift ^= logical_rows[i]
        leader = gf2.min_weight_coset_representative(space, shift)
        assert leader.certified
        if best is None or leader.weight < best:
            best = leader.weight
    return best


def _build_css(
    c0_basis: gf2.BinaryMatrix,
    full_rows: tuple[int, ...],
    *,
    w: float,
    design_d: int,
    design_exact: bool,
    name: str,
    source: ClassicalCode | None,
    params: dict | None = None,
) -> CssCode:
    n = c0_basis.ncols
    h_tilde, c0_dim = gf2.rref(c0_basis)
    reps = _complete_basis(h_tilde, full_rows, n)
    k = len(reps)

    leaders = [gf2.min_weight_coset_representative(h_tilde, rep) for rep in reps]
    certified = all(ld.certified for ld in leaders)
    d_tilde = gf2.from_rows([ld.vector for ld in leaders], n)

    ddt = gf2.matmul(d_tilde, gf2.transpose(d_tilde))
    if k == 0:
        ddt_inv = gf2.zeros(0, 0)
    else:
        try:
            ddt_inv = gf2.inverse(ddt)
        except InvalidParameters as exc:
            raise SingularDDT(
                "the coset-representative Gram matrix D~ D~^T is singular; "
                "encoded Z operators cannot be normalized"
            ) from exc
    z_tilde = gf2.matmul(ddt_inv, d_tilde) if k else gf2.BinaryMatrix((), n)

    full_space = gf2.rref(gf2.from_rows(list(h_tilde.rows) + list(d_tilde.rows), n))[0]
    stabilizer_z = gf2.null_space(full_space)

    # Structural sanity: logical pairing and stabilizer commutation.
    if k:
        pairing = gf2.matmul(d_tilde, gf2.transpose(z_tilde))
        assert pairing == gf2.identity(k), "logical X/Z pairing is not canonical"
        cross = gf2.matmul(h_tilde, gf2.transpose(z_tilde))
        assert not any(cross.rows), "encoded Z operators fail to commute with X stabilizers"
    overlap = gf2.matmul(h_tilde, gf2.transpose(stabilizer_z))
    assert not any(overlap.rows), "X and Z stabilizers do not commute"

    dx = _exact_side_distance(h_tilde, d_tilde.rows)
    dz = _exact_side_distance(stabilizer_z, z_tilde.rows) if k else None
    if dx is not None and dz is not None and certified:
        d, d_exact = min(dx, dz), True
    else:
        d, d_exact = design_d, design_exact and k == 0
        dx = dx if dx is not None else design_d
        dz = dz if dz is not None else design_d
    return CssCode(
        n=n,
        k=k,
        d=d,
        dx=dx,
        dz=dz,
        d_exact=d_exact,
        h_tilde=h_tilde,
        d_tilde=d_tilde,
        z_tilde=z_tilde,
        stabilizer_x=h_tilde,
        stabilizer_z=stabilizer_z,
        ddt=ddt,
        ddt_inverse=ddt_inv,
        leaders_certified=certified,
        w=w,
        name=name,
        source=source,
        params=params or {},
    )


def css_from_classical(code: ClassicalCode, name: str = "") -> CssCode:
    """[[n, 2k_c - n, d]] code from a dual-containing classical code."""
    check_self_orth = gf2.is_self_orthogonal(code.check)
    if 2 * code.k_c < code.n or not check_self_orth:
        raise NotDualContaining(
            f"{code} does not contain its dual; the symmetric construction needs "
            "C^perp ⊆ C"
        )
    return _build_css(
        code.check,
        code.generator.rows,
        w=code.w,
        design_d=code.d,
        design_exact=code.d_exact,
        name=name or f"css-{code.family.lower()}-{code.n}",
        source=code,
        params=dict(code.params),
    )


def reed_muller_1513() -> CssCode:
    """The asymmetric [[15,1,3]] code from the punctured Reed-Muller pair.

    C0 is spanned by the four degree-one monomial indicator rows (each of
    weight 8) over the nonzero evaluation points; C adds the all-ones
    row, i.e. C is the punctured RM(1,4) code [15,5,7].  The minimum
    coset representative has weight 7, giving dz = 3, dx = 7.
    """
    n = 15
    c0_rows = []
    for i in range(4):
        row = 0
        for j in range(1, n + 1):
            if (j >> i) & 1:
                row |= 1 << (j - 1)
        c0_rows.append(row)
    classical = punctured_reed_muller(1, 4)
    return _build_css(
        gf2.from_rows(c0_rows, n),
        classical.generator.rows,
        w=8.0,
        design_d=3,
        design_exact=False,
        name="rm15",
        source=classical,
        params={"r": 1, "m": 4},
    )


def derive_smaller_code(code: CssCode, times: int = 1) -> CssCode:
    """Trade one stabilizer row and one coordinate for one more encoded qubit.

    Take the first row of H~, whose pivot column is its lowest set bit;
    add it to every other row sharing that column, then delete the row
    and the column.  The result is an [[n-1, k+1, d-1]] code; double
    evenness and self-orthogonality of the check rows are preserved
    exactly (the added row overlaps each other row evenly).
    """
    if times < 1:
        raise InvalidParameters("times must be >= 1")
    if code.h_tilde.nrows == 0:
        raise InvalidParameters("no stabilizer rows left to remove")
    pivot_row = code.h_tilde.rows[0]
    col = (pivot_row & -pivot_row).bit_length() - 1
    low_mask = (1 << col) - 1
    new_rows = []
    for row in code.h_tilde.rows[1:]:
        if (row >> col) & 1:
            row ^= pivot_row
        new_rows.append((row & low_mask) | ((row >> (col + 1)) << col))
    new_h = gf2.from_rows(new_rows, code.n - 1)
    assert gf2.is_self_orthogonal(new_h), "derivation broke self-orthogonality"
    derived = _build_css(
        new_h,
        gf2.null_space(new_h).rows,
        w=code.w,
        design_d=code.d - 1,
        design_exact=False,
        name=f"{code.name}-derived" if not code.name.endswith("-derived") else code.name,
        source=code.source,
        params={**code.params, "derived_from": f"[[{code.n},{code.k},{code.d}]]"},
    )
    return derive_smaller_code(derived, times - 1) if times > 1 else derived


def encoded_x(code: CssCode, u: int) -> PauliProduct:
    """The encoded X operator acting as u on the logical qubits."""
    if not 0 <= u < (1 << code.k):
        raise InvalidParameters(f"logical pattern {u} out of range for k={code.k}")
    return PauliProduct(x_mask=gf2.vec_mat(u, code.d_tilde), z_mask=0, n=code.n)


def encoded_z(code: CssCode, u: int) -> PauliProduct:
    """The encoded Z operator acting as u on the logical qubits."""
    if not 0 <= u < (1 << code.k):
        raise InvalidParameters(f"logical pattern {u} out of range for k={code.k}")
    return PauliProduct(x_mask=0, z_mask=gf2.vec_mat(u, code.z_tilde), n=code.n)


def syndrome(code: CssCode, error: PauliProduct) -> tuple[int, int]:
    """(x_syndrome, z_syndrome) of a physical Pauli error.

    Bit i of x_syndrome is the parity of the error's X part against the
    i-th Z-type stabilizer; bit i of z_syndrome the parity of the Z part
    against the i-th X-type stabilizer row.
    """
    if error.n != code.n:
        raise InvalidParameters("error length does not match the code")
    x_syn = 0
    for i, row in enumerate(code.stabilizer_z.rows):
        if (row & error.x_mask).bit_count() % 2:
            x_syn |= 1 << i
    z_syn = 0
    for i, row in enumerate(code.stabilizer_x.rows):
        if (row & error.z_mask).bit_count() % 2:
            z_syn |= 1 << i
    return x_syn, z_syn


def check_lemma_conditions(code: CssCode) -> dict[str, bool]:
    """Which whole-block gate constructions the code structure supports.

    lemma2: block-transversal CNOT between two blocks (any code here).
    lemma3: block-transversal Hadamard-type and controlled-Z gates
            (requires the symmetric construction, C0 = C^perp).
    lemma4: bitwise phase gates (requires C0 doubly even).
    ddt_identity: the Gram matrix D~ D~^T is the identity, making the
            lemma-3/-5 gates act bitwise without logical remixing.
    """
    return {
        "lemma2": True,
        "lemma3": gf2.same_row_space(code.stabilizer_z, code.h_tilde),
        "lemma4": _doubly_even_by_congruence(code.h_tilde),
        "ddt_identity": code.ddt_is_identity,
    }
