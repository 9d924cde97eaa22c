"""Fault-tolerant gadgets built from whole-block operations.

Each gadget is a fixed schedule of block-level steps: ancilla preparations,
bitwise two-/three-block gates, destructive block measurements, merged
(logical-operator) measurements, and conditional whole-block operations.
A gadget is verified by exact branch-complete simulation: every measurement
outcome pattern is followed, and the resulting Kraus operator on the logical
space must equal a Pauli times the intended logical map.  The Pauli parts of
the recovery are not hard-wired; they are derived mechanically from the
simulation and stored as the gadget's correction table.  Non-Pauli
corrections (conditional CNOT / CZ blocks) are part of the step schedule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import gf2, sim
from .css import CssCode, check_lemma_conditions
from .errors import InvalidParameters, LemmaUnsupported, UnsupportedOnState
from .sim import BitwiseGate, LogicalState

_TOL = 1e-9
_PRUNE = 1e-15


# ---------------------------------------------------------------------------
# Ancilla preparation / verification cost model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AncillaSpec:
    """Cost summary for preparing and verifying one encoded ancilla block."""

    n: int
    k: int
    d: int
    w: float
    prep_time_steps: int
    prep_gate_count: int
    verification: tuple[dict, ...]
    verification_cnots: float


def ancilla_cost(code: CssCode) -> AncillaSpec:
    """Cost of preparing and verifying an encoded zero block.

    Preparation writes one check row per time step: a Hadamard on the pivot
    qubit followed by CNOT fan-out onto the remaining bits of the row, so a
    weight-``w_r`` row costs ``w_r`` gates.  Verification re-checks every
    X-type generator (about ``w`` CNOTs each, using the code's mean check
    weight) and each logical qubit (``d + 1`` CNOTs each).
    """
    rows = code.h_tilde.rows
    prep_gate_count = sum(r.bit_count() for r in rows)
    checks: list[dict] = []
    for i, row in enumerate(rows):
        checks.append({"check": "stabilizer", "index": i, "cnots": code.w})
    for i in range(code.k):
        checks.append({"check": "logical", "index": i, "cnots": code.d + 1})
    total = code.w * len(rows) + (code.d + 1) * code.k
    if float(total).is_integer():
        total = int(total)
    return AncillaSpec(
        n=code.n,
        k=code.k,
        d=code.d,
        w=code.w,
        prep_time_steps=len(rows),
        prep_gate_count=prep_gate_count,
        verification=tuple(checks),
        verification_cnots=total,
    )


# ---------------------------------------------------------------------------
# Gadget description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    """One scheduled block-level operation.

    ``op`` selects the operation; ``regs`` names the registers it touches.
    ``patterns`` holds logical bit patterns (preparation superposition
    patterns, measured-operator patterns, or decode patterns for destructive
    measurements).  ``mask`` is a raw physical mask for masked bitwise gates.
    ``outcome`` labels the classical bit(s) a measurement produces;
    ``condition`` names the outcome bit that gates a conditional step.
    """

    op: str
    regs: tuple[str, ...] = ()
    patterns: tuple[int, ...] = ()
    mask: int | None = None
    outcome: str = ""
    condition: str = ""

    def to_dict(self) -> dict:
        data: dict = {"op": self.op, "regs": list(self.regs)}
        if self.patterns:
            data["patterns"] = list(self.patterns)
        if self.mask is not None:
            data["mask"] = self.mask
        if self.outcome:
            data["outcome"] = self.outcome
        if self.condition:
            data["condition"] = self.condition
        return data


def _json_correction(entry: dict) -> dict:
    out = dict(entry)
    phase = out.get("phase")
    if isinstance(phase, complex):
        out["phase"] = [phase.real, phase.imag]
    return out


@dataclass
class Gadget:
    """A fault-tolerant gadget: registers, schedule, and recovery data."""

    name: str
    kind: str
    code_name: str
    input_regs: tuple[str, ...]
    output_regs: tuple[str, ...]
    ancilla_regs: tuple[str, ...]
    steps: tuple[Step, ...]
    outcome_labels: tuple[str, ...]
    recoveries: int
    ancilla_blocks: int
    expected_leaves: int
    metadata: dict = field(default_factory=dict)
    corrections: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "code": self.code_name,
            "input_regs": list(self.input_regs),
            "output_regs": list(self.output_regs),
            "ancilla_regs": list(self.ancilla_regs),
            "steps": [s.to_dict() for s in self.steps],
            "outcome_labels": list(self.outcome_labels),
            "recoveries": self.recoveries,
            "ancilla_blocks": self.ancilla_blocks,
            "expected_leaves": self.expected_leaves,
            "metadata": dict(self.metadata),
            "corrections": {
                ",".join(f"{l}={v}" for l, v in zip(self.outcome_labels, key)):
                    _json_correction(val)
                for key, val in self.corrections.items()
            },
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


# ---------------------------------------------------------------------------
# Factored sparse state over named registers
# ---------------------------------------------------------------------------


class FactoredState:
    """Sparse state over named blocks, kept factored until blocks interact.

    Each factor is a tuple ``(regs, state)`` where ``state`` is a sparse
    ``LogicalState`` whose block ``i`` carries register ``regs[i]``.  Gates
    that span two factors merge them lazily; destructive measurements remove
    a register and, when a factor empties, fold its phase into ``scalar``.
    """

    __slots__ = ("n", "factors", "scalar")

    def __init__(self, n: int):
        self.n = n
        self.factors: list[tuple[list[str], LogicalState]] = []
        self.scalar: complex = 1.0 + 0.0j

    # -- bookkeeping --------------------------------------------------------

    def copy(self) -> "FactoredState":
        out = FactoredState(self.n)
        out.factors = [(list(regs), state.copy()) for regs, state in self.factors]
        out.scalar = self.scalar
        return out

    def add_register(self, reg: str, state: LogicalState) -> None:
        if state.n != self.n:
            raise InvalidParameters("register block length mismatch")
        if any(reg in regs for regs, _ in self.factors):
            raise InvalidParameters(f"register {reg!r} already exists")
        self.factors.append(([reg], state))

    def registers(self) -> set[str]:
        return {r for regs, _ in self.factors for r in regs}

    def locate(self, reg: str) -> tuple[int, int]:
        for fi, (regs, _) in enumerate(self.factors):
            if reg in regs:
                return fi, regs.index(reg)
        raise InvalidParameters(f"unknown register {reg!r}")

    def _merge(self, fi: int, fj: int) -> int:
        if fi == fj:
            return fi
        a, b = sorted((fi, fj))
        regs_a, state_a = self.factors[a]
        regs_b, state_b = self.factors[b]
        merged = sim.tensor(state_a, state_b)
        self.factors[a] = (regs_a + regs_b, merged)
        del self.factors[b]
        return a

    def ensure_together(self, regs: tuple[str, ...]) -> int:
        fi, _ = self.locate(regs[0])
        for reg in regs[1:]:
            fj, _ = self.locate(reg)
            fi = self._merge(fi, fj)
        return fi

    def total_support(self) -> int:
        return sum(len(state.amplitudes) for _, state in self.factors)

    # -- unitary steps ------------------------------------------------------

    def apply_gate(self, kind: str, regs: tuple[str, ...], mask: int | None = None,
                   eighths: int = 0) -> None:
        fi = self.ensure_together(regs)
        factor_regs, state = self.factors[fi]
        blocks = tuple(factor_regs.index(r) for r in regs)
        gate = BitwiseGate(kind=kind, blocks=blocks, mask=mask, eighths=eighths)
        self.factors[fi] = (factor_regs, sim.apply(state, gate))

    # -- merged (projective) measurements ------------------------------------

    def split_parity(self, terms: tuple[tuple[str, int], ...]) -> list[tuple[int, float, "FactoredState"]]:
        """Measure a product of Z-type operators: split by joint key parity."""
        fi = self.ensure_together(tuple(r for r, _ in terms))
        factor_regs, state = self.factors[fi]
        shifted = 0
        for reg, mask in terms:
            shifted |= mask << (factor_regs.index(reg) * self.n)
        buckets: list[dict[int, complex]] = [{}, {}]
        for key, amp in state.amplitudes.items():
            buckets[(key & shifted).bit_count() & 1][key] = amp
        return self._finish_split(fi, buckets)

    def split_x_projector(self, reg: str, mask: int) -> list[tuple[int, float, "FactoredState"]]:
        """Measure an X-type operator: project with (1 +/- X(mask)) / 2."""
        fi, idx = self.locate(reg)
        factor_regs, state = self.factors[fi]
        shifted = mask << (idx * self.n)
        amps = state.amplitudes
        keys = set(amps)
        keys.update(k ^ shifted for k in amps)
        buckets: list[dict[int, complex]] = [{}, {}]
        for key in keys:
            a = amps.get(key, 0.0)
            b = amps.get(key ^ shifted, 0.0)
            plus = (a + b) / 2.0
            minus = (a - b) / 2.0
            if abs(plus) > _PRUNE:
                buckets[0][key] = plus
            if abs(minus) > _PRUNE:
                buckets[1][key] = minus
        return self._finish_split(fi, buckets)

    def _finish_split(self, fi: int, buckets: list[dict[int, complex]]) -> list[tuple[int, float, "FactoredState"]]:
        factor_regs, state = self.factors[fi]
        out = []
        for bit, amps in enumerate(buckets):
            prob = sum((a * a.conjugate()).real for a in amps.values())
            if prob < _PRUNE:
                continue
            scale = 1.0 / math.sqrt(prob)
            normed = {k: a * scale for k, a in amps.items()}
            branch = self.copy()
            branch.factors[fi] = (list(factor_regs), LogicalState(state.n, state.blocks, normed))
            out.append((bit, prob, branch))
        return out

    # -- destructive measurements -------------------------------------------

    def measure_destructive(self, reg: str, basis: str,
                            decode_masks: tuple[int, ...]) -> list[tuple[int, float, "FactoredState"]]:
        """Destructively measure a block, reporting only the decoded bits.

        Projects each decode functional in turn (diagonal splits for Z,
        X-operator projectors for X), then verifies the block factors out of
        the remaining state and removes it.  Outcome classes that would split
        further than the decode bits indicate the block still carries data
        and fall back to a full per-word split.
        """
        nodes: list[tuple[int, float, FactoredState]] = [(0, 1.0, self)]
        for bit_index, mask in enumerate(decode_masks):
            next_nodes = []
            for value, prob, fs in nodes:
                if basis == "Z":
                    splits = fs.split_parity(((reg, mask),))
                else:
                    splits = fs.split_x_projector(reg, mask)
                for bit, p, branch in splits:
                    next_nodes.append((value | (bit << bit_index), prob * p, branch))
            nodes = next_nodes
        out = []
        for value, prob, fs in nodes:
            fs._drop_product_block(reg)
            out.append((value, prob, fs))
        return out

    def _drop_product_block(self, reg: str) -> None:
        """Remove a block that must be in a product with the rest of its factor."""
        fi, idx = self.locate(reg)
        factor_regs, state = self.factors[fi]
        n = self.n
        off = idx * n
        block_mask = (1 << n) - 1
        slices: dict[int, dict[int, complex]] = {}
        for key, amp in state.amplitudes.items():
            word = (key >> off) & block_mask
            rest = (key & ((1 << off) - 1)) | ((key >> (off + n)) << off)
            slices.setdefault(word, {})[rest] = amp
        ref_word = min(slices)
        ref = slices[ref_word]
        ref_key = min(ref)
        ref_amp = ref[ref_key]
        for word, sl in slices.items():
            if set(sl) != set(ref):
                raise UnsupportedOnState(
                    "measured block is still entangled beyond its decode bits")
            ratio = sl[ref_key] / ref_amp
            for k, a in sl.items():
                if abs(a - ratio * ref[k]) > _TOL:
                    raise UnsupportedOnState(
                        "measured block is still entangled beyond its decode bits")
        norm = math.sqrt(sum((a * a.conjugate()).real for a in ref.values()))
        post = {k: a / norm for k, a in ref.items()}
        remaining = [r for r in factor_regs if r != reg]
        if remaining:
            self.factors[fi] = (remaining, LogicalState(n, state.blocks - 1, post))
        else:
            self.scalar *= post[0]
            del self.factors[fi]


# ---------------------------------------------------------------------------
# Gadget construction
# ---------------------------------------------------------------------------

_GADGET_KINDS = ("teleport", "intra_block_cx", "toffoli", "switch_out",
                 "switch_in", "merged_measure")


def _require(code: CssCode, kind: str, conditions: tuple[str, ...]) -> None:
    have = check_lemma_conditions(code)
    missing = [c for c in conditions if not have.get(c, False)]
    if missing:
        raise LemmaUnsupported(
            f"gadget {kind!r} needs whole-block conditions {missing} "
            f"which {code.name or 'the code'} does not satisfy")


def _all_patterns(k: int) -> tuple[int, ...]:
    return tuple(1 << i for i in range(k))


def build_gadget(code: CssCode, kind: str, *, qubit: int = 0, control: int = 0,
                 target: int = 1, flavor: str = "zx", basis: str = "X",
                 pattern: int | None = None) -> Gadget:
    """Construct one of the supported gadget schedules for ``code``.

    Kinds: ``teleport`` (moves a block through an entangled pair),
    ``intra_block_cx`` (CNOT between two logical qubits of one block),
    ``toffoli`` (doubly-controlled NOT across three single-qubit blocks),
    ``switch_out`` / ``switch_in`` (move one logical qubit out of / into a
    block), ``merged_measure`` (measure one logical operator via an encoded
    ancilla).
    """
    if kind not in _GADGET_KINDS:
        raise InvalidParameters(f"unknown gadget kind {kind!r}")
    builder = {
        "teleport": _build_teleport,
        "intra_block_cx": _build_intra_block_cx,
        "toffoli": _build_toffoli,
        "switch_out": _build_switch_out,
        "switch_in": _build_switch_in,
        "merged_measure": _build_merged_measure,
    }[kind]
    return builder(code, qubit=qubit, control=control, target=target,
                   flavor=flavor, basis=basis, pattern=pattern)


def _build_teleport(code: CssCode, *, flavor: str = "zx", **_ignored) -> Gadget:
    _require(code, "teleport", ("lemma2", "lemma3", "ddt_identity"))
    if flavor not in ("zx", "xz"):
        raise InvalidParameters("teleport flavor must be 'zx' or 'xz'")
    k = code.k
    full = (1 << k) - 1
    decode = _all_patterns(k)
    if flavor == "zx":
        steps = (
            Step("prepare_bell", ("M", "B"), patterns=(full, full)),
            Step("cx", ("M", "A")),
            Step("measure_z", ("A",), patterns=decode, outcome="m1"),
            Step("measure_x", ("M",), patterns=decode, outcome="m2"),
        )
    else:
        steps = (
            Step("prepare_bell", ("M", "B"), patterns=(full, full)),
            Step("cx", ("A", "M")),
            Step("measure_x", ("A",), patterns=decode, outcome="m1"),
            Step("measure_z", ("M",), patterns=decode, outcome="m2"),
        )
    return Gadget(
        name=f"teleport[{flavor}]",
        kind="teleport",
        code_name=code.name or str(code),
        input_regs=("A",),
        output_regs=("B",),
        ancilla_regs=("M", "B"),
        steps=steps,
        outcome_labels=("m1", "m2"),
        recoveries=2,
        ancilla_blocks=2,
        expected_leaves=(1 << k) ** 2,
        metadata={"flavor": flavor},
    )


def _build_intra_block_cx(code: CssCode, *, control: int = 0, target: int = 1,
                          **_ignored) -> Gadget:
    _require(code, "intra_block_cx", ("lemma2",))
    k = code.k
    if not (0 <= control < k and 0 <= target < k) or control == target:
        raise InvalidParameters("intra-block CNOT needs two distinct logical qubits")
    ei = 1 << control
    ej = 1 << target
    steps = (
        # Relocate the control qubit into slot `target` of holder block M.
        Step("prepare_superpos", ("M",), patterns=(ej,)),
        Step("measure_joint_zz", ("D", "M"), patterns=(ei, ej), outcome="m1"),
        Step("measure_merged_x", ("D",), patterns=(ei,), outcome="m2"),
        # Slot-aligned block CNOT now acts as CNOT control->target on the data.
        Step("cx", ("M", "D")),
        # Relocate the control qubit back into slot `control` of D.
        Step("measure_joint_zz", ("D", "M"), patterns=(ei, ej), outcome="m3"),
        Step("measure_x", ("M",), patterns=(ej,), outcome="m4"),
    )
    return Gadget(
        name=f"intra_block_cx[{control}->{target}]",
        kind="intra_block_cx",
        code_name=code.name or str(code),
        input_regs=("D",),
        output_regs=("D",),
        ancilla_regs=("M",),
        steps=steps,
        outcome_labels=("m1", "m2", "m3", "m4"),
        recoveries=4,
        ancilla_blocks=2,
        expected_leaves=16,
        metadata={
            "control": control,
            "target": target,
            "note": "holder block plus one merged-measurement ancilla, reused",
            "default_inputs": _intra_default_inputs(k, control, target),
        },
    )


def _intra_default_inputs(k: int, control: int, target: int) -> tuple[int, ...]:
    ei, ej = 1 << control, 1 << target
    inputs = [0, ei, ej, ei | ej]
    spectators = [l for l in range(k) if l not in (control, target)]
    if spectators:
        inputs.append(1 << spectators[0])
        inputs.append((1 << k) - 1)
    return tuple(dict.fromkeys(inputs))


def _build_toffoli(code: CssCode, **_ignored) -> Gadget:
    if code.k != 1:
        raise InvalidParameters("the Toffoli gadget uses single-qubit blocks")
    _require(code, "toffoli", ("lemma2", "lemma3", "lemma4", "ddt_identity"))
    z_mask = code.z_tilde.rows[0]
    steps = (
        Step("prepare_plus", ("A1",)),
        Step("prepare_plus", ("A2",)),
        Step("prepare_plus", ("A3",)),
        Step("prepare_cat", ("cat",)),
        Step("ccz", ("A1", "A2", "cat")),
        Step("cz", ("cat", "A3"), mask=z_mask),
        Step("measure_cat_x", ("cat",), outcome="p"),
        # Entangle the magic block with the data, one data block at a time.
        Step("measure_joint_zz", ("A1", "D1"), patterns=(1, 1), outcome="x1"),
        Step("measure_x", ("D1",), patterns=(1,), outcome="z1"),
        Step("measure_joint_zz", ("A2", "D2"), patterns=(1, 1), outcome="x2"),
        Step("measure_x", ("D2",), patterns=(1,), outcome="z2"),
        Step("cond_cx", ("A2", "A3"), condition="x1"),
        Step("cond_cx", ("A1", "A3"), condition="x2"),
        Step("cx", ("D3", "A3")),
        Step("measure_x", ("D3",), patterns=(1,), outcome="z3"),
        Step("cond_cz", ("A1", "A2"), condition="z3"),
    )
    return Gadget(
        name="toffoli",
        kind="toffoli",
        code_name=code.name or str(code),
        input_regs=("D1", "D2", "D3"),
        output_regs=("A1", "A2", "A3"),
        ancilla_regs=("A1", "A2", "A3", "cat"),
        steps=steps,
        outcome_labels=("p", "x1", "z1", "x2", "z2", "z3"),
        recoveries=8,
        ancilla_blocks=4,
        expected_leaves=64,
        metadata={"cat_repetitions": code.d},
    )


def _build_switch_out(code: CssCode, *, qubit: int = 0, **_ignored) -> Gadget:
    _require(code, "switch_out", ("lemma2",))
    if not 0 <= qubit < code.k:
        raise InvalidParameters("logical qubit index out of range")
    ei = 1 << qubit
    steps = (
        Step("prepare_superpos", ("B",), patterns=(ei,)),
        Step("cx", ("B", "D")),
        Step("measure_merged_z", ("D",), patterns=(ei,), outcome="m"),
    )
    return Gadget(
        name=f"switch_out[{qubit}]",
        kind="switch_out",
        code_name=code.name or str(code),
        input_regs=("D",),
        output_regs=("D", "B"),
        ancilla_regs=("B",),
        steps=steps,
        outcome_labels=("m",),
        recoveries=1,
        ancilla_blocks=1,
        expected_leaves=2,
        metadata={"qubit": qubit},
    )


def _build_switch_in(code: CssCode, *, qubit: int = 0, **_ignored) -> Gadget:
    _require(code, "switch_in", ("lemma2",))
    if not 0 <= qubit < code.k:
        raise InvalidParameters("logical qubit index out of range")
    ei = 1 << qubit
    steps = (
        Step("cx", ("A", "D")),
        Step("measure_x", ("A",), patterns=(ei,), outcome="m"),
    )
    return Gadget(
        name=f"switch_in[{qubit}]",
        kind="switch_in",
        code_name=code.name or str(code),
        input_regs=("A", "D"),
        output_regs=("D",),
        ancilla_regs=(),
        steps=steps,
        outcome_labels=("m",),
        recoveries=1,
        ancilla_blocks=0,
        expected_leaves=2,
        metadata={"qubit": qubit},
    )


def _build_merged_measure(code: CssCode, *, basis: str = "X",
                          pattern: int | None = None, **_ignored) -> Gadget:
    _require(code, "merged_measure", ("lemma2",))
    if basis not in ("X", "Z"):
        raise InvalidParameters("merged measurement basis must be 'X' or 'Z'")
    if basis == "Z" and not code.ddt_is_identity:
        raise LemmaUnsupported(
            "the bitwise-CZ route measures the pattern through the overlap "
            "matrix; it is only a plain logical Z measurement when that "
            "matrix is the identity")
    u = (1 << code.k) - 1 if pattern is None else pattern
    if not 0 < u < (1 << code.k):
        raise InvalidParameters("measured pattern out of range")
    interact = Step("cx", ("E", "D")) if basis == "X" else Step("cz", ("E", "D"))
    steps = (
        Step("prepare_superpos", ("E",), patterns=(u,)),
        interact,
        Step("measure_x", ("E",), patterns=(u,), outcome="m"),
    )
    return Gadget(
        name=f"merged_measure[{basis},{u}]",
        kind="merged_measure",
        code_name=code.name or str(code),
        input_regs=("D",),
        output_regs=("D",),
        ancilla_regs=("E",),
        steps=steps,
        outcome_labels=("m",),
        recoveries=1,
        ancilla_blocks=1,
        expected_leaves=2,
        metadata={"basis": basis, "pattern": u},
    )


# ---------------------------------------------------------------------------
# Branch-complete simulation
# ---------------------------------------------------------------------------


def _prepare(code: CssCode, fs: FactoredState, step: Step) -> None:
    if step.op == "prepare_zero":
        fs.add_register(step.regs[0], sim.encode_basis(code, 0))
    elif step.op == "prepare_plus":
        fs.add_register(step.regs[0], sim.plus_state(code))
    elif step.op == "prepare_superpos":
        zero = sim.encode_basis(code, 0)
        other = sim.encode_basis(code, step.patterns[0])
        amps = {k: a / math.sqrt(2.0) for k, a in zero.amplitudes.items()}
        for k, a in other.amplitudes.items():
            amps[k] = amps.get(k, 0.0) + a / math.sqrt(2.0)
        fs.add_register(step.regs[0], LogicalState(code.n, 1, amps))
    elif step.op == "prepare_bell":
        u1, u2 = step.patterns
        a = sim.tensor(sim.encode_basis(code, 0), sim.encode_basis(code, 0))
        b = sim.tensor(sim.encode_basis(code, u1), sim.encode_basis(code, u2))
        amps = {k: v / math.sqrt(2.0) for k, v in a.amplitudes.items()}
        for k, v in b.amplitudes.items():
            amps[k] = amps.get(k, 0.0) + v / math.sqrt(2.0)
        existing = fs.registers()
        for reg in step.regs:
            if reg in existing:
                raise InvalidParameters(f"register {reg!r} already exists")
        fs.factors.append(([step.regs[0], step.regs[1]],
                           LogicalState(code.n, 2, amps)))
    elif step.op == "prepare_cat":
        fs.add_register(step.regs[0], sim.cat_state(code.n))
    else:  # pragma: no cover - guarded by caller
        raise InvalidParameters(f"unknown preparation {step.op!r}")


def _decode_masks(code: CssCode, basis: str, patterns: tuple[int, ...]) -> tuple[int, ...]:
    table = code.z_tilde if basis == "Z" else code.d_tilde
    return tuple(gf2.vec_mat(p, table) for p in patterns)


def _walk_branches(gadget: Gadget, code: CssCode, input_bits: int,
                   ) -> list[tuple[tuple[int, ...], float, np.ndarray]]:
    """Run every measurement branch for one logical basis input.

    Returns ``(outcome_values, probability, logical_amplitudes)`` per leaf,
    with outcomes ordered as ``gadget.outcome_labels``.
    """
    k = code.k
    fs = FactoredState(code.n)
    for pos, reg in enumerate(gadget.input_regs):
        bits = (input_bits >> (pos * k)) & ((1 << k) - 1)
        fs.add_register(reg, sim.encode_basis(code, bits))
    nodes: list[tuple[FactoredState, dict[str, int], float]] = [(fs, {}, 1.0)]

    for step in gadget.steps:
        op = step.op
        if op.startswith("prepare_"):
            for fs, _, _ in nodes:
                _prepare(code, fs, step)
        elif op in ("cx", "cz", "ccz"):
            for fs, _, _ in nodes:
                fs.apply_gate(op, step.regs, mask=step.mask)
        elif op == "cond_cx" or op == "cond_cz":
            for fs, outcomes, _ in nodes:
                if outcomes[step.condition] & 1:
                    fs.apply_gate(op[5:], step.regs, mask=step.mask)
        elif op == "measure_merged_z":
            mask = _decode_masks(code, "Z", step.patterns)[0]
            nodes = _fork(nodes, step,
                          lambda fs, reg=step.regs[0], m=mask: fs.split_parity(((reg, m),)))
        elif op == "measure_joint_zz":
            mask_a = gf2.vec_mat(step.patterns[0], code.z_tilde)
            mask_b = gf2.vec_mat(step.patterns[1], code.z_tilde)
            nodes = _fork(nodes, step,
                          lambda fs, ra=step.regs[0], rb=step.regs[1], ma=mask_a,
                          mb=mask_b: fs.split_parity(((ra, ma), (rb, mb))))
        elif op == "measure_merged_x":
            mask = _decode_masks(code, "X", step.patterns)[0]
            nodes = _fork(nodes, step,
                          lambda fs, reg=step.regs[0], m=mask: fs.split_x_projector(reg, m))
        elif op == "measure_z":
            masks = _decode_masks(code, "Z", step.patterns)
            nodes = _fork(nodes, step,
                          lambda fs, reg=step.regs[0], ms=masks:
                          fs.measure_destructive(reg, "Z", ms))
        elif op == "measure_x":
            masks = _decode_masks(code, "X", step.patterns)
            nodes = _fork(nodes, step,
                          lambda fs, reg=step.regs[0], ms=masks:
                          fs.measure_destructive(reg, "X", ms))
        elif op == "measure_cat_x":
            full = (1 << code.n) - 1
            nodes = _fork(nodes, step,
                          lambda fs, reg=step.regs[0], m=full:
                          fs.measure_destructive(reg, "X", (m,)))
        else:
            raise InvalidParameters(f"unknown step operation {op!r}")

    leaves = []
    for fs, outcomes, prob in nodes:
        alpha = _decode_output(gadget, code, fs)
        key = tuple(outcomes[label] for label in gadget.outcome_labels)
        leaves.append((key, prob, alpha))
    return leaves


def _fork(nodes, step, splitter):
    next_nodes = []
    for fs, outcomes, prob in nodes:
        for value, p, branch in splitter(fs):
            new_outcomes = dict(outcomes)
            new_outcomes[step.outcome] = value
            next_nodes.append((branch, new_outcomes, prob * p))
    return next_nodes


def _decode_output(gadget: Gadget, code: CssCode, fs: FactoredState) -> np.ndarray:
    if fs.registers() != set(gadget.output_regs):
        raise UnsupportedOnState(
            f"registers {sorted(fs.registers())} remain; expected outputs "
            f"{sorted(gadget.output_regs)}")
    fi = fs.ensure_together(tuple(gadget.output_regs))
    factor_regs, state = fs.factors[fi]
    k = code.k
    n = code.n
    dim_c0 = code.h_tilde.nrows
    k_out = k * len(gadget.output_regs)
    scale = 2.0 ** (dim_c0 * len(gadget.output_regs) / 2.0)
    alpha = np.zeros(1 << k_out, dtype=np.complex128)
    for word in range(1 << k_out):
        key = 0
        for pos, reg in enumerate(gadget.output_regs):
            bits = (word >> (pos * k)) & ((1 << k) - 1)
            key |= gf2.vec_mat(bits, code.d_tilde) << (factor_regs.index(reg) * n)
        amp = state.amplitudes.get(key)
        if amp is not None:
            alpha[word] = amp * scale * fs.scalar
    total = float(np.sum(np.abs(alpha) ** 2))
    if abs(total - 1.0) > 1e-6:
        raise UnsupportedOnState(
            "output state leaked outside the coded logical subspace")
    return alpha


def _target_map(gadget: Gadget, code: CssCode):
    """Return (k_in, k_out, fn) where fn maps input basis -> output basis."""
    k = code.k
    kind = gadget.kind
    if kind == "teleport":
        return k, k, lambda v: v
    if kind == "intra_block_cx":
        c = gadget.metadata["control"]
        t = gadget.metadata["target"]
        return k, k, lambda v: v ^ (((v >> c) & 1) << t)
    if kind == "toffoli":
        return 3, 3, lambda v: v ^ (((v & 1) & ((v >> 1) & 1)) << 2)
    if kind == "switch_out":
        q = gadget.metadata["qubit"]
        return k, 2 * k, lambda v: (v & ~(1 << q)) | (((v >> q) & 1) << (k + q))
    if kind == "switch_in":
        q = gadget.metadata["qubit"]
        # Input layout: register A in bits [0, k), register D in bits [k, 2k).
        return 2 * k, k, lambda v: ((v >> k) ^ (v & (1 << q)))
    raise InvalidParameters(f"gadget kind {kind!r} has no unitary target")


def _switch_in_inputs(code: CssCode, qubit: int) -> tuple[int, ...]:
    """Valid input patterns: A holds {0, e_q}; D has qubit `qubit` clear."""
    k = code.k
    ei = 1 << qubit
    d_patterns = [0]
    others = [l for l in range(k) if l != qubit]
    if others:
        d_patterns.append(1 << others[0])
        rest = sum(1 << l for l in others)
        if rest not in d_patterns:
            d_patterns.append(rest)
    return tuple(a | (d << k) for d in d_patterns for a in (0, ei))


@dataclass
class GadgetReport:
    """Outcome of branch-complete verification of one gadget."""

    gadget: str
    kind: str
    leaves: int
    expected_leaves: int
    outcome_classes: tuple[tuple[int, ...], ...]
    input_patterns: tuple[int, ...]
    pauli_ok: bool
    completeness_ok: bool
    corrections: dict
    max_probability_error: float
    all_ok: bool


def simulate_gadget(gadget: Gadget, code: CssCode,
                    input_patterns: tuple[int, ...] | None = None) -> GadgetReport:
    """Follow every measurement branch and derive the recovery table.

    For each logical basis input the gadget is simulated exactly; branch
    leaves are grouped by outcome pattern into Kraus columns.  Every Kraus
    operator must equal ``phase * Pauli * target`` with a branch-independent
    probability weight; the Pauli parts form the correction table stored on
    the gadget.  Completeness requires the branch probabilities of each
    input to sum to one.
    """
    k = code.k
    if gadget.kind == "merged_measure":
        return _simulate_merged_measure(gadget, code)
    k_in, k_out, target = _target_map(gadget, code)
    if input_patterns is None:
        if "default_inputs" in gadget.metadata:
            input_patterns = tuple(gadget.metadata["default_inputs"])
        elif gadget.kind == "switch_in":
            input_patterns = _switch_in_inputs(code, gadget.metadata["qubit"])
        elif k_in <= 4:
            input_patterns = tuple(range(1 << k_in))
        else:
            input_patterns = tuple(dict.fromkeys(
                [0] + [1 << i for i in range(k_in)] + [(1 << k_in) - 1]))

    collected: dict[tuple[int, ...], dict[int, np.ndarray]] = {}
    prob_error = 0.0
    for bits in input_patterns:
        total = 0.0
        for key, prob, alpha in _walk_branches(gadget, code, bits):
            collected.setdefault(key, {})[bits] = math.sqrt(prob) * alpha
            total += prob
        prob_error = max(prob_error, abs(total - 1.0))
    completeness_ok = prob_error < 1e-9

    pauli_ok = True
    corrections = {}
    for key in sorted(collected):
        columns = collected[key]
        entry = _extract_pauli(columns, target, k_out)
        if entry is None:
            pauli_ok = False
            continue
        corrections[key] = entry
    gadget.corrections = corrections

    all_ok = (pauli_ok and completeness_ok
              and len(collected) == gadget.expected_leaves)
    return GadgetReport(
        gadget=gadget.name,
        kind=gadget.kind,
        leaves=len(collected),
        expected_leaves=gadget.expected_leaves,
        outcome_classes=tuple(sorted(collected)),
        input_patterns=tuple(input_patterns),
        pauli_ok=pauli_ok,
        completeness_ok=completeness_ok,
        corrections=corrections,
        max_probability_error=prob_error,
        all_ok=all_ok,
    )


def _extract_pauli(columns: dict[int, np.ndarray], target, k_out: int):
    """Fit ``column_v = weight * phase * X(x) Z(z) |target(v)>`` to the data.

    Returns a correction entry ``{"x": ..., "z": ..., "phase": ...,
    "probability": ...}`` (the Pauli to invert and the branch probability)
    or ``None`` if the branch is not a Pauli deformation of the target.
    """
    views = []
    for v, col in columns.items():
        nz = np.flatnonzero(np.abs(col) > _TOL)
        if len(nz) == 0:
            continue
        if len(nz) != 1:
            return None
        views.append((v, int(nz[0]), complex(col[nz[0]])))
    if not views:
        return None
    v0, row0, val0 = views[0]
    x_mask = row0 ^ target(v0)
    weight = abs(val0)
    constraints = []
    bits = []
    for v, row, val in views:
        if row != (target(v) ^ x_mask):
            return None
        if abs(abs(val) - weight) > _TOL:
            return None
        ratio = val / val0
        if abs(ratio - 1.0) <= _TOL:
            bit = 0
        elif abs(ratio + 1.0) <= _TOL:
            bit = 1
        else:
            return None
        constraints.append(target(v) ^ target(v0))
        bits.append(bit)
    matrix = gf2.from_rows(constraints, k_out)
    rhs = 0
    for i, bit in enumerate(bits):
        rhs |= bit << i
    z_mask = gf2.solve(gf2.transpose(matrix), rhs)
    if z_mask is None:
        return None
    sign = -1.0 if (z_mask & target(v0)).bit_count() & 1 else 1.0
    phase = val0 / (weight * sign)
    # Verify the fit on every column.
    for v, row, val in views:
        s = -1.0 if (z_mask & target(v)).bit_count() & 1 else 1.0
        if abs(val - weight * phase * s) > 1e-8:
            return None
    return {
        "x": x_mask,
        "z": z_mask,
        "phase": complex(phase),
        "probability": float(weight * weight),
    }


def _simulate_merged_measure(gadget: Gadget, code: CssCode) -> GadgetReport:
    """Verify the ancilla-mediated logical measurement against projectors."""
    k = code.k
    u = gadget.metadata["pattern"]
    basis = gadget.metadata["basis"]
    dim = 1 << k
    pauli = np.zeros((dim, dim), dtype=np.complex128)
    for v in range(dim):
        if basis == "X":
            pauli[v ^ u, v] = 1.0
        else:
            pauli[v, v] = -1.0 if (u & v).bit_count() & 1 else 1.0
    kraus = {m: (np.eye(dim) + (1 - 2 * m) * pauli) / 2.0 for m in (0, 1)}

    collected: dict[tuple[int, ...], dict[int, np.ndarray]] = {}
    prob_error = 0.0
    patterns = tuple(range(dim)) if k <= 4 else tuple(
        dict.fromkeys([0] + [1 << i for i in range(k)] + [dim - 1]))
    for bits in patterns:
        total = 0.0
        for key, prob, alpha in _walk_branches(gadget, code, bits):
            collected.setdefault(key, {})[bits] = math.sqrt(prob) * alpha
            total += prob
        prob_error = max(prob_error, abs(total - 1.0))
    # Branch operators must match the projective Kraus operators exactly,
    # up to one global phase per branch.
    pauli_ok = True
    corrections = {}
    for key, columns in collected.items():
        m = key[0]
        expected = kraus[m]
        ref = None
        for v, col in columns.items():
            nz = np.flatnonzero(np.abs(expected[:, v]) > _TOL)
            if len(nz) and abs(col[nz[0]]) > _TOL:
                ref = col[nz[0]] / expected[nz[0], v]
                break
        if ref is None or abs(abs(ref) - 1.0) > 1e-8:
            pauli_ok = False
            continue
        err = max(
            float(np.max(np.abs(col - ref * expected[:, v])))
            for v, col in columns.items()
        )
        if err > 1e-8:
            pauli_ok = False
            continue
        # The recovery flips the post-measurement state back into the +1
        # eigenspace when the outcome was -1: any logical Pauli that
        # anticommutes with the measured operator works, so use the one
        # acting on the lowest qubit of the pattern.
        if m == 1:
            lowest = u & -u
            recovery_x = lowest if basis == "Z" else 0
            recovery_z = lowest if basis == "X" else 0
        else:
            recovery_x = recovery_z = 0
        corrections[key] = {"x": recovery_x, "z": recovery_z,
                            "phase": complex(ref), "probability": None}
    gadget.corrections = corrections
    completeness_ok = prob_error < 1e-9
    all_ok = (pauli_ok and completeness_ok
              and len(collected) == gadget.expected_leaves)
    return GadgetReport(
        gadget=gadget.name,
        kind=gadget.kind,
        leaves=len(collected),
        expected_leaves=gadget.expected_leaves,
        outcome_classes=tuple(sorted(collected)),
        input_patterns=patterns,
        pauli_ok=pauli_ok,
        completeness_ok=completeness_ok,
        corrections=corrections,
        max_probability_error=prob_error,
        all_ok=all_ok,
    )


# ---------------------------------------------------------------------------
# Stand-alone merged measurement (both routes, for cross-validation)
# ---------------------------------------------------------------------------


def merged_measurement(code: CssCode, state: LogicalState, block: int,
                       basis: str, pattern: int, route: str = "ancilla",
                       ) -> list[tuple[int, float, LogicalState]]:
    """Measure a logical operator on ``block`` without decoding the block.

    ``basis='X'`` measures the X-type logical operator of ``pattern``;
    ``basis='Z'`` the Z-type one.  ``route='ancilla'`` interacts an encoded
    ancilla block with the data bitwise and reads the outcome from the
    ancilla; ``route='projector'`` applies the eigenspace projectors
    directly.  Both must agree branch by branch.
    """
    if basis not in ("X", "Z"):
        raise InvalidParameters("basis must be 'X' or 'Z'")
    if not 0 <= block < state.blocks:
        raise InvalidParameters("block index out of range")
    if not 0 < pattern < (1 << code.k):
        raise InvalidParameters("pattern out of range")
    if basis == "Z" and not code.ddt_is_identity:
        raise LemmaUnsupported(
            "bitwise-CZ merged measurement needs the identity overlap matrix")
    if route == "projector":
        return _merged_projector(code, state, block, basis, pattern)
    if route != "ancilla":
        raise InvalidParameters("route must be 'ancilla' or 'projector'")

    zero = sim.encode_basis(code, 0)
    other = sim.encode_basis(code, pattern)
    amps = {k: a / math.sqrt(2.0) for k, a in zero.amplitudes.items()}
    for k, a in other.amplitudes.items():
        amps[k] = amps.get(k, 0.0) + a / math.sqrt(2.0)
    ancilla = LogicalState(code.n, 1, amps)
    joint = sim.tensor(state, ancilla)
    e_block = state.blocks
    gate_kind = "cx" if basis == "X" else "cz"
    joint = sim.apply(joint, BitwiseGate(kind=gate_kind, blocks=(e_block, block)))

    decode_mask = gf2.vec_mat(pattern, code.d_tilde)
    out = []
    for branch in sim.measure_block(joint, e_block, basis="X"):
        m = 1 if (branch.word & decode_mask).bit_count() & 1 else 0
        out.append((m, branch.probability, branch.state))
    # Group physical ancilla words by decoded outcome; posts within a group
    # agree up to a global phase, so keep the lowest-word representative.
    grouped: dict[int, tuple[float, LogicalState]] = {}
    for m, prob, post in sorted(out, key=lambda t: t[0]):
        if m in grouped:
            prev_prob, prev_post = grouped[m]
            grouped[m] = (prev_prob + prob, prev_post)
        else:
            grouped[m] = (prob, post)
    return [(m, p, s) for m, (p, s) in sorted(grouped.items())]


def _merged_projector(code: CssCode, state: LogicalState, block: int,
                      basis: str, pattern: int) -> list[tuple[int, float, LogicalState]]:
    off = block * state.n
    out = []
    if basis == "Z":
        mask = gf2.vec_mat(pattern, code.z_tilde) << off
        buckets: list[dict[int, complex]] = [{}, {}]
        for key, amp in state.amplitudes.items():
            buckets[(key & mask).bit_count() & 1][key] = amp
    else:
        mask = gf2.vec_mat(pattern, code.d_tilde) << off
        amps = state.amplitudes
        keys = set(amps)
        keys.update(k ^ mask for k in amps)
        buckets = [{}, {}]
        for key in keys:
            a = amps.get(key, 0.0)
            b = amps.get(key ^ mask, 0.0)
            if abs(a + b) > _PRUNE:
                buckets[0][key] = (a + b) / 2.0
            if abs(a - b) > _PRUNE:
                buckets[1][key] = (a - b) / 2.0
    for m, amps in enumerate(buckets):
        prob = sum((a * a.conjugate()).real for a in amps.values())
        if prob < _PRUNE:
            continue
        scale = 1.0 / math.sqrt(prob)
        out.append((m, prob, LogicalState(state.n, state.blocks,
                                          {k: a * scale for k, a in amps.items()})))
    return out


# ---------------------------------------------------------------------------
# Discipline checks
# ---------------------------------------------------------------------------

_PREP_OPS = ("prepare_zero", "prepare_plus", "prepare_superpos",
             "prepare_bell", "prepare_cat")
_DESTRUCTIVE_OPS = ("measure_z", "measure_x", "measure_cat_x")


def validate_gadget(gadget: Gadget, code: CssCode) -> dict:
    """Static fault-tolerance discipline check of a gadget schedule.

    Verifies that every register is prepared before use and never used after
    its destructive measurement, that conditional steps reference earlier
    outcomes, that declared outputs survive to the end, and that the
    whole-block operations used are licensed by the code's structural
    conditions (transversal CNOT always; plus-type preparations need the
    self-dual condition; diagonal two-/three-block gates need doubly-even
    checks and the identity overlap matrix).
    """
    conditions = check_lemma_conditions(code)
    alive = set(gadget.input_regs)
    outcomes_seen: set[str] = set()
    notes: list[str] = []
    for idx, step in enumerate(gadget.steps):
        where = f"step {idx} ({step.op})"
        if step.op in _PREP_OPS:
            for reg in step.regs:
                if reg in alive:
                    raise InvalidParameters(f"{where}: register {reg!r} prepared twice")
                alive.add(reg)
            if step.op in ("prepare_plus", "prepare_bell") and not conditions["lemma3"]:
                raise LemmaUnsupported(
                    f"{where}: plus-type preparation needs the self-dual condition")
            continue
        for reg in step.regs:
            if reg not in alive:
                raise InvalidParameters(f"{where}: register {reg!r} is not live")
        if step.op in ("cz", "ccz", "cond_cz") and not conditions["ddt_identity"]:
            raise LemmaUnsupported(
                f"{where}: diagonal block gate needs the identity overlap matrix")
        if step.op.startswith("cond_"):
            if step.condition not in outcomes_seen:
                raise InvalidParameters(
                    f"{where}: condition {step.condition!r} precedes its measurement")
        if step.outcome:
            if step.outcome in outcomes_seen:
                raise InvalidParameters(f"{where}: outcome {step.outcome!r} reused")
            outcomes_seen.add(step.outcome)
        if step.op in _DESTRUCTIVE_OPS:
            alive.discard(step.regs[0])
            if step.regs[0] in gadget.output_regs:
                raise InvalidParameters(
                    f"{where}: destructive measurement of an output register")
    missing = set(gadget.output_regs) - alive
    if missing:
        raise InvalidParameters(f"output registers {sorted(missing)} are not live at the end")
    if set(gadget.outcome_labels) != outcomes_seen:
        raise InvalidParameters("declared outcome labels do not match the schedule")
    notes.append(f"{len(gadget.steps)} steps, {len(outcomes_seen)} outcome bits")
    return {"ok": True, "notes": notes, "conditions": conditions}
