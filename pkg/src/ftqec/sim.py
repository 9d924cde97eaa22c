"""Exact sparse simulation of encoded blocks under bitwise gates.

States live on ``blocks`` registers of ``n`` qubits each, stored as a
sparse map from packed basis keys (block b occupies key bits
[b*n, (b+1)*n)) to complex amplitudes.  The gate vocabulary is exactly
the whole-block operations the code constructions legitimize:

* masked X / Z on one block,
* bitwise phase gates P, and their two- and three-block controlled
  versions acting on matching bit positions (all angles multiples of
  pi/4, applied through an exact eighth-root-of-unity table),
* block-transversal CNOT / CZ / CCZ (the latter two optionally masked),
* the all-bit Hadamard of one block, evaluated in closed form on states
  whose per-block support is an affine subspace with character phases
  (anything else raises UnsupportedOnState).

Measurements are destructive and branch-complete: they return every
outcome with its probability and post-measurement state.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .css import CssCode
from .errors import (
    DimensionTooLarge,
    InvalidParameters,
    UnsupportedOnState,
    WeightCongruenceViolated,
)

#: exact values of exp(i*pi/4)**j; every phase in the gate set is a
#: multiple of pi/4, so amplitudes stay in Z[e^{i*pi/4}] scaled by
#: powers of sqrt(2).
_EIGHTH_ROOTS = tuple(cmath.exp(1j * math.pi * j / 4) for j in range(8))

_SQRT_HALF = math.sqrt(0.5)

_AMP_TOL = 1e-12


def _omega(exponent: int) -> complex:
    return _EIGHTH_ROOTS[exponent % 8]


@dataclass(frozen=True)
class BitwiseGate:
    """One whole-block operation.

    kind: x | z | p | cp | ccp | cx | cz | ccz | h
    blocks: the block indices acted on (control first for cx).
    mask: bit mask restricting which positions participate (x, z, cz,
        ccz); defaults to all bits.
    eighths: phase angle in units of pi/4 (p, cp, ccp).
    """

    kind: str
    blocks: tuple[int, ...]
    mask: int | None = None
    eighths: int = 0


class LogicalState:
    """Sparse state over `blocks` registers of `n` qubits each."""

    __slots__ = ("n", "blocks", "amplitudes")

    def __init__(self, n: int, blocks: int, amplitudes: dict[int, complex]):
        self.n = n
        self.blocks = blocks
        self.amplitudes = amplitudes

    # -- constructors ------------------------------------------------------

    @classmethod
    def basis(cls, n: int, blocks: int, key: int) -> "LogicalState":
        return cls(n, blocks, {key: 1.0 + 0j})

    def copy(self) -> "LogicalState":
        return LogicalState(self.n, self.blocks, dict(self.amplitudes))

    # -- inspection --------------------------------------------------------

    def norm_squared(self) -> float:
        return sum((amp * amp.conjugate()).real for amp in self.amplitudes.values())

    def block_word(self, key: int, block: int) -> int:
        return (key >> (block * self.n)) & ((1 << self.n) - 1)

    def is_close(self, other: "LogicalState", tol: float = 1e-9) -> bool:
        if (self.n, self.blocks) != (other.n, other.blocks):
            return False
        keys = set(self.amplitudes) | set(other.amplitudes)
        return all(
            abs(self.amplitudes.get(k, 0j) - other.amplitudes.get(k, 0j)) <= tol
            for k in keys
        )

    def scaled(self, factor: complex) -> "LogicalState":
        return LogicalState(
            self.n, self.blocks, {k: a * factor for k, a in self.amplitudes.items()}
        )

    def __len__(self) -> int:
        return len(self.amplitudes)


def tensor(a: LogicalState, b: LogicalState) -> LogicalState:
    """Concatenate registers: b's blocks are appended after a's."""
    if a.n != b.n:
        raise InvalidParameters("tensor requires equal block sizes")
    shift = a.blocks * a.n
    out: dict[int, complex] = {}
    for ka, va in a.amplitudes.items():
        for kb, vb in b.amplitudes.items():
            out[ka | (kb << shift)] = va * vb
    return LogicalState(a.n, a.blocks + b.blocks, out)


def encode_basis(code: CssCode, u: int = 0) -> LogicalState:
    """The encoded basis state |u>: uniform over the coset u.D~ + C0."""
    if not 0 <= u < (1 << code.k):
        raise InvalidParameters(f"logical word {u} out of range for k={code.k}")
    dim = code.h_tilde.nrows
    if dim > 24:
        raise DimensionTooLarge(f"encoding enumerates 2**{dim} kets")
    shift = gf2.vec_mat(u, code.d_tilde)
    amp = 2.0 ** (-dim / 2)
    amplitudes = {x ^ shift: amp + 0j for x in gf2.enumerate_row_space(code.h_tilde)}
    return LogicalState(code.n, 1, amplitudes)


def plus_state(code: CssCode) -> LogicalState:
    """Uniform superposition of all encoded basis states: uniform over C."""
    full = gf2.rref(
        gf2.from_rows(list(code.h_tilde.rows) + list(code.d_tilde.rows), code.n)
    )[0]
    dim = full.nrows
    if dim > 24:
        raise DimensionTooLarge(f"encoding enumerates 2**{dim} kets")
    amp = 2.0 ** (-dim / 2)
    return LogicalState(code.n, 1, {x: amp + 0j for x in gf2.enumerate_row_space(full)})


def cat_state(n: int) -> LogicalState:
    """(|00...0> + |11...1>)/sqrt(2) on one n-bit block."""
    return LogicalState(n, 1, {0: _SQRT_HALF + 0j, (1 << n) - 1: _SQRT_HALF + 0j})


# ---------------------------------------------------------------------------
# Gate application
# ---------------------------------------------------------------------------

def apply(state: LogicalState, gate: BitwiseGate) -> LogicalState:
    n = state.n
    full = (1 << n) - 1
    mask = full if gate.mask is None else gate.mask
    blocks = gate.blocks
    for b in blocks:
        if not 0 <= b < state.blocks:
            raise InvalidParameters(f"block {b} out of range")
    amps = state.amplitudes
    kind = gate.kind

    if kind == "x":
        (b,) = blocks
        shifted = mask << (b * n)
        return LogicalState(n, state.blocks, {k ^ shifted: v for k, v in amps.items()})

    if kind == "z":
        (b,) = blocks
        shifted = mask << (b * n)
        return LogicalState(
            n,
            state.blocks,
            {k: (-v if (k & shifted).bit_count() % 2 else v) for k, v in amps.items()},
        )

    if kind == "p":
        (b,) = blocks
        off = b * n
        out = {
            k: v * _omega(gate.eighths * ((k >> off) & mask).bit_count())
            for k, v in amps.items()
        }
        return LogicalState(n, state.blocks, out)

    if kind == "cp":
        a, b = blocks
        oa, ob = a * n, b * n
        out = {
            k: v * _omega(gate.eighths * ((k >> oa) & (k >> ob) & mask).bit_count())
            for k, v in amps.items()
        }
        return LogicalState(n, state.blocks, out)

    if kind == "ccp":
        a, b, c = blocks
        oa, ob, oc = a * n, b * n, c * n
        out = {
            k: v
            * _omega(
                gate.eighths * ((k >> oa) & (k >> ob) & (k >> oc) & mask).bit_count()
            )
            for k, v in amps.items()
        }
        return LogicalState(n, state.blocks, out)

    if kind == "cx":
        c, t = blocks
        oc, ot = c * n, t * n
        return LogicalState(
            n,
            state.blocks,
            {k ^ ((((k >> oc) & full) & mask) << ot): v for k, v in amps.items()},
        )

    if kind == "cz":
        a, b = blocks
        oa, ob = a * n, b * n
        out = {
            k: (-v if ((k >> oa) & (k >> ob) & mask).bit_count() % 2 else v)
            for k, v in amps.items()
        }
        return LogicalState(n, state.blocks, out)

    if kind == "ccz":
        a, b, c = blocks
        oa, ob, oc = a * n, b * n, c * n
        out = {
            k: (-v if ((k >> oa) & (k >> ob) & (k >> oc) & mask).bit_count() % 2 else v)
            for k, v in amps.items()
        }
        return LogicalState(n, state.blocks, out)

    if kind == "h":
        (b,) = blocks
        return _hadamard_block(state, b)

    raise InvalidParameters(f"unknown gate kind {gate.kind!r}")


def apply_all(state: LogicalState, gates: list[BitwiseGate]) -> LogicalState:
    for gate in gates:
        state = apply(state, gate)
    return state


def _affine_support(words: list[int], n: int) -> tuple[int, gf2.BinaryMatrix | None]:
    """(base word, basis of the difference space) or (w0, None) if not affine."""
    w0 = words[0]
    echelon: dict[int, int] = {}
    for word in words[1:]:
        reduced = word ^ w0
        while reduced:
            pivot = (reduced & -reduced).bit_length() - 1
            if pivot not in echelon:
                echelon[pivot] = reduced
                break
            reduced ^= echelon[pivot]
    if len(words) != (1 << len(echelon)):
        return w0, None
    return w0, gf2.from_rows([echelon[p] for p in sorted(echelon)], n)


def _hadamard_block(state: LogicalState, block: int) -> LogicalState:
    """All-bit Hadamard on one block via affine-support duality.

    Requires every conditional block state (grouping the other blocks'
    key bits) to be uniform-magnitude over an affine set w0 + V with
    phases forming a character (-1)^{a.v}; the transform maps it to the
    dual affine set a + V^perp with phases (-1)^{w0.z}.
    """
    n = state.n
    off = block * n
    full = (1 << n) - 1
    groups: dict[int, list[tuple[int, complex]]] = {}
    for key, amp in state.amplitudes.items():
        rest = key & ~(full << off)
        groups.setdefault(rest, []).append(((key >> off) & full, amp))

    out: dict[int, complex] = {}
    for rest, members in groups.items():
        words = [w for w, _ in members]
        amp_by_word = dict(members)
        w0, basis = _affine_support(words, n)
        if basis is None:
            raise UnsupportedOnState(
                "block support is not an affine subspace; the all-bit Hadamard "
                "would leave the simulable state family"
            )
        rank = basis.nrows
        c0 = amp_by_word[w0]
        magnitude = abs(c0)
        if magnitude <= _AMP_TOL:
            raise UnsupportedOnState("zero-amplitude group")
        # Solve for the character a: basis_i . a = sign bit of the ratio.
        sign_bits = 0
        for i, v in enumerate(basis.rows):
            ratio = amp_by_word[w0 ^ v] / c0
            if abs(ratio - 1) <= 1e-9:
                pass
            elif abs(ratio + 1) <= 1e-9:
                sign_bits |= 1 << i
            else:
                raise UnsupportedOnState("block phases are not a real character")
        a = gf2.solve(gf2.transpose(basis), sign_bits)
        assert a is not None  # rows are independent, system always solvable
        # Verify the character on the whole support.
        for w, amp in members:
            expected = c0 * (-1) ** ((a & (w ^ w0)).bit_count() % 2)
            if abs(amp - expected) > 1e-9 * magnitude:
                raise UnsupportedOnState("block phases are not a character")
        dual = gf2.null_space(basis)
        if dual.nrows > 24:
            raise DimensionTooLarge(f"dual support enumerates 2**{dual.nrows} kets")
        new_amp = c0 * (2.0 ** (rank - n / 2))
        for z_off in gf2.enumerate_row_space(dual):
            z = z_off ^ a
            sign = -1 if (z & w0).bit_count() % 2 else 1
            out_key = rest | (z << off)
            out[out_key] = out.get(out_key, 0j) + sign * new_amp
    return LogicalState(n, state.blocks, {k: v for k, v in out.items() if abs(v) > _AMP_TOL})


# ---------------------------------------------------------------------------
# Destructive measurement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementBranch:
    """One outcome of a destructive block measurement."""

    word: int
    probability: float
    state: LogicalState


def _drop_block(key: int, block: int, n: int) -> int:
    """Remove block's bits from a packed key; higher blocks shift down."""
    off = block * n
    low = key & ((1 << off) - 1)
    high = key >> (off + n)
    return low | (high << off)


def measure_block(state: LogicalState, block: int, basis: str = "Z") -> list[MeasurementBranch]:
    """Measure every qubit of one block and discard it.

    Z basis: one branch per block word in the support.  X basis: one
    branch per word of nonzero probability (the block is Hadamard-dualized
    analytically; post-states are computed once per sign class and shared
    between the words of that class).  Branches are sorted by word.
    """
    if not 0 <= block < state.blocks:
        raise InvalidParameters(f"block {block} out of range")
    if basis == "Z":
        return _measure_block_z(state, block)
    if basis == "X":
        return _measure_block_x(state, block)
    raise InvalidParameters(f"unknown basis {basis!r}")


def _measure_block_z(state: LogicalState, block: int) -> list[MeasurementBranch]:
    n = state.n
    off = block * n
    full = (1 << n) - 1
    by_word: dict[int, dict[int, complex]] = {}
    for key, amp in state.amplitudes.items():
        word = (key >> off) & full
        by_word.setdefault(word, {})[_drop_block(key, block, n)] = amp
    branches = []
    for word in sorted(by_word):
        rest = by_word[word]
        prob = sum((a * a.conjugate()).real for a in rest.values())
        if prob <= _AMP_TOL**2:
            continue
        scale = 1 / math.sqrt(prob)
        post = LogicalState(n, state.blocks - 1, {k: a * scale for k, a in rest.items()})
        branches.append(MeasurementBranch(word, prob, post))
    return branches


def _measure_block_x(state: LogicalState, block: int) -> list[MeasurementBranch]:
    """All nonzero outcomes of an all-bit X-basis measurement of one block.

    The outcome amplitude for word z on the remaining registers is
    2**(-n/2) * sum_y psi(y, rest) (-1)^{y.z}; as a function of z it only
    depends on the parities z.d for d in the span of support differences,
    so outcomes fall into sign classes (cosets of that span's dual) that
    share a post-state.
    """
    n = state.n
    off = block * n
    full = (1 << n) - 1
    rest_of: dict[int, dict[int, complex]] = {}
    words_seen: list[int] = []
    for key, amp in state.amplitudes.items():
        word = (key >> off) & full
        if word not in rest_of:
            rest_of[word] = {}
            words_seen.append(word)
        rest_of[word][_drop_block(key, block, n)] = amp
    y0 = words_seen[0]
    diffs = gf2.rref(gf2.from_rows([y ^ y0 for y in words_seen], n))[0]
    rank = diffs.nrows
    if n - rank > 24:
        raise DimensionTooLarge(
            f"X measurement would enumerate 2**{n - rank} outcome words per class"
        )
    if rank > 20:
        raise DimensionTooLarge(f"X measurement would enumerate 2**{rank} sign classes")
    # The class of z is determined by the parities z.b for the rank basis
    # rows b; members of a class form a coset of the dual of the diff span.
    dual = gf2.null_space(diffs)
    class_size = 1 << (n - rank)
    branches: list[MeasurementBranch] = []
    norm = 2.0 ** (-n / 2)
    for bits in range(1 << rank):
        # A representative z with the prescribed parities.
        z_rep = gf2.solve(gf2.transpose(diffs), bits)
        if z_rep is None:  # pragma: no cover - rows independent, always solvable
            raise AssertionError("sign-class system must be solvable")
        combined: dict[int, complex] = {}
        for y in words_seen:
            sign = -1 if ((y ^ y0) & z_rep).bit_count() % 2 else 1
            for rest_key, amp in rest_of[y].items():
                combined[rest_key] = combined.get(rest_key, 0j) + sign * amp
        weight = sum((a * a.conjugate()).real for a in combined.values())
        prob_per_word = weight * norm * norm
        if prob_per_word * class_size <= 1e-20:
            continue
        scale = 1 / math.sqrt(weight)
        base_post = {k: a * scale for k, a in combined.items()}
        for z_off in gf2.enumerate_row_space(dual):
            z = z_off ^ z_rep
            # Post-states differ between class members only by the global
            # phase (-1)^{y0.z}, which we keep for exactness.
            sign = -1 if (y0 & z).bit_count() % 2 else 1
            post = LogicalState(
                n, state.blocks - 1, {k: sign * a for k, a in base_post.items()}
            )
            branches.append(MeasurementBranch(z, prob_per_word, post))
    branches.sort(key=lambda br: br.word)
    return branches


# ---------------------------------------------------------------------------
# Logical action extraction and closed-form phase-gate verification
# ---------------------------------------------------------------------------

def derive_logical_action(
    code: CssCode, gates: list[BitwiseGate], blocks: int = 1
) -> np.ndarray:
    """Exact logical matrix of a circuit acting on encoded blocks.

    Feeds every logical basis word through the circuit and reads off the
    encoded-basis amplitudes; raises UnsupportedOnState if any output
    leaves the code space.
    """
    k, n = code.k, code.n
    dim_c0 = code.h_tilde.nrows
    if blocks * (k + dim_c0) > 26:
        raise DimensionTooLarge("logical-action extraction budget exceeded")
    size = 1 << (blocks * k)
    matrix = np.zeros((size, size), dtype=np.complex128)
    logical_mask = (1 << k) - 1
    for v in range(size):
        psi = None
        for b in range(blocks):
            part = encode_basis(code, (v >> (b * k)) & logical_mask)
            psi = part if psi is None else tensor(psi, part)
        psi = apply_all(psi, gates)
        # Read alpha_u from the coset representative key of u.
        recon: dict[int, complex] = {}
        factor = 2.0 ** (blocks * dim_c0 / 2)
        for u in range(size):
            key = 0
            for b in range(blocks):
                key |= gf2.vec_mat((u >> (b * k)) & logical_mask, code.d_tilde) << (b * n)
            alpha = psi.amplitudes.get(key, 0j) * factor
            if abs(alpha) > 1e-12:
                matrix[u, v] = alpha
                ref = None
                for b in range(blocks):
                    part = encode_basis(code, (u >> (b * k)) & logical_mask)
                    ref = part if ref is None else tensor(ref, part)
                for kk, aa in ref.amplitudes.items():
                    recon[kk] = recon.get(kk, 0j) + alpha * aa
        # The reconstruction must reproduce psi exactly, else the circuit
        # left the code space.
        all_keys = set(psi.amplitudes) | set(recon)
        for kk in all_keys:
            if abs(psi.amplitudes.get(kk, 0j) - recon.get(kk, 0j)) > 1e-9:
                raise UnsupportedOnState(
                    "circuit output is not supported on the encoded basis"
                )
    return matrix


def _coset_residues_for_code(code: CssCode, w: int) -> dict[int, int | None]:
    if code.h_tilde.nrows > 24 or code.k > 12:
        raise DimensionTooLarge("residue enumeration budget exceeded")
    residues: dict[int, int | None] = {}
    for u in range(1 << code.k):
        shift = gf2.vec_mat(u, code.d_tilde)
        seen: set[int] = set()
        for x in gf2.enumerate_row_space(code.h_tilde):
            seen.add((x ^ shift).bit_count() % w)
            if len(seen) > 1:
                break
        residues[u] = seen.pop() if len(seen) == 1 else None
    return residues


def verify_lemma1(code: CssCode, w: int) -> dict:
    """Mechanically verify the bitwise phase-gate family at modulus w.

    Preconditions: every coset of C0 in C has constant weight mod w
    (WeightCongruenceViolated otherwise) and 8/w must be an integer
    number of pi/4 units (w in {1, 2, 4, 8}).

    Checks by exact simulation that

    * bitwise P(2*pi/w) acts as the diagonal logical phase r(u),
    * bitwise two-block CP(4*pi/w) as r(u) + r(v) - r(u^v),
    * bitwise three-block CCP(8*pi/w) by inclusion-exclusion,

    with all phases relative to the coset residues r mod w.
    """
    if w not in (1, 2, 4, 8):
        raise InvalidParameters(f"w={w} is not a supported phase modulus (1, 2, 4, 8)")
    residues = _coset_residues_for_code(code, w)
    violations = {u: r for u, r in residues.items() if r is None}
    if violations:
        raise WeightCongruenceViolated(
            f"cosets {sorted(violations)} do not have constant weight mod {w}"
        )
    m1 = 8 // w  # P angle 2*pi/w in units of pi/4
    k = code.k
    report: dict = {"w": w, "r0": residues[0], "residues": residues}

    # P: bitwise phase on one block.
    p_ok = True
    for u in range(1 << k):
        psi = encode_basis(code, u)
        got = apply(psi, BitwiseGate("p", (0,), eighths=m1))
        expect = psi.scaled(_omega(m1 * residues[u]))
        p_ok &= got.is_close(expect, tol=1e-12)
    report["p_ok"] = p_ok

    # CP: bitwise two-block controlled phase.
    cp_ok = True
    pairs = [(u, v) for u in range(1 << k) for v in range(1 << k)]
    if len(pairs) > 16:
        pairs = [(u, v) for (u, v) in pairs if u.bit_count() <= 1 and v.bit_count() <= 1]
    for u, v in pairs:
        psi = tensor(encode_basis(code, u), encode_basis(code, v))
        got = apply(psi, BitwiseGate("cp", (0, 1), eighths=2 * m1))
        phase = m1 * (residues[u] + residues[v] - residues[u ^ v])
        cp_ok &= got.is_close(psi.scaled(_omega(phase)), tol=1e-12)
    report["cp_ok"] = cp_ok

    # CCP: bitwise three-block doubly-controlled phase.
    if 3 * code.h_tilde.nrows > 18:
        report["cp_ok"] = cp_ok
        report["ccp_ok"] = None  # three tensored blocks exceed the key budget
        report["all_ok"] = p_ok and cp_ok
        return report
    ccp_ok = True
    triples = [(u, v, t) for u in range(1 << k) for v in range(1 << k) for t in range(1 << k)]
    if len(triples) > 8:
        triples = [
            (u, v, t)
            for (u, v, t) in triples
            if u.bit_count() <= 1 and v.bit_count() <= 1 and t.bit_count() <= 1
        ][:27]
    for u, v, t in triples:
        psi = tensor(tensor(encode_basis(code, u), encode_basis(code, v)), encode_basis(code, t))
        got = apply(psi, BitwiseGate("ccp", (0, 1, 2), eighths=4 * m1))
        r = residues
        phase = m1 * (
            r[u ^ v ^ t] + r[u] + r[v] + r[t] - r[u ^ v] - r[u ^ t] - r[v ^ t]
        )
        # 8*pi/w per joint bit is (4*m1) eighths; the inclusion-exclusion
        # identity holds at half that angle applied to the weight sum.
        ccp_ok &= got.is_close(psi.scaled(_omega(phase)), tol=1e-12)
    report["ccp_ok"] = ccp_ok
    report["all_ok"] = p_ok and cp_ok and ccp_ok
    return report


def verify_lemma5(code: CssCode) -> dict:
    """Verify the cat-mediated three-block CCZ phase identity.

    For encoded words u, v and a shared-ancilla bit value a (the cat
    block in the computational word a·11...1), bitwise CCZ across the two
    data blocks and the cat block must act as the phase
    (-1)^{a * u.(D~D~^T).v^T}.
    """
    k, n = code.k, code.n
    cases = []
    all_match = True
    logicals = range(1 << k) if k <= 2 else [0, 1, 2, 3]
    for u in logicals:
        for v in logicals:
            for a in (0, 1):
                psi = tensor(encode_basis(code, u), encode_basis(code, v))
                cat_word = ((1 << n) - 1) if a else 0
                psi = tensor(psi, LogicalState.basis(n, 1, cat_word))
                got = apply(psi, BitwiseGate("ccz", (0, 1, 2)))
                exponent = a * (
                    (gf2.vec_mat(u, code.ddt) & v).bit_count() % 2
                )
                expect = psi.scaled(-1.0 if exponent else 1.0)
                match = got.is_close(expect, tol=1e-12)
                all_match &= match
                cases.append(
                    {"u": u, "v": v, "a": a, "phase_exponent": exponent, "match": match}
                )
    return {"cases": cases, "all_match": all_match, "ddt_identity": code.ddt_is_identity}

