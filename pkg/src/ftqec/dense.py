"""Dense state-vector oracle for cross-checking the sparse simulator.

Straight-line numpy implementation of the same gate vocabulary on the
full 2**(blocks*n) vector.  Deliberately independent of the sparse
engine: X gates permute indices, diagonal gates use vectorized
popcounts, the block Hadamard is a literal bit-by-bit butterfly.
Intended for small registers only (blocks*n <= 22).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import DimensionTooLarge, InvalidParameters
from .sim import BitwiseGate, LogicalState

_OMEGA = np.array([cmath.exp(1j * math.pi * j / 4) for j in range(8)], dtype=np.complex128)


def to_dense(state: LogicalState) -> np.ndarray:
    total = state.blocks * state.n
    if total > 22:
        raise DimensionTooLarge(f"dense vector of 2**{total} amplitudes")
    vec = np.zeros(1 << total, dtype=np.complex128)
    for key, amp in state.amplitudes.items():
        vec[key] = amp
    return vec


def max_abs_diff(state: LogicalState, vec: np.ndarray) -> float:
    return float(np.max(np.abs(to_dense(state) - vec))) if vec.size else 0.0


def apply_dense(vec: np.ndarray, gate: BitwiseGate, n: int, blocks: int) -> np.ndarray:
    size = vec.size
    idx = np.arange(size, dtype=np.uint64)
    full = (1 << n) - 1
    mask = full if gate.mask is None else gate.mask
    kind = gate.kind

    def word(block: int) -> np.ndarray:
        return (idx >> np.uint64(block * n)) & np.uint64(full)

    if kind == "x":
        (b,) = gate.blocks
        out = np.empty_like(vec)
        out[idx ^ np.uint64(mask << (b * n))] = vec
        return out

    if kind == "z":
        (b,) = gate.blocks
        par = np.bitwise_count(word(b) & np.uint64(mask)) & np.uint64(1)
        return vec * np.where(par == 1, -1.0, 1.0)

    if kind == "p":
        (b,) = gate.blocks
        counts = np.bitwise_count(word(b) & np.uint64(mask)).astype(np.int64)
        return vec * _OMEGA[(gate.eighths * counts) % 8]

    if kind == "cp":
        a, b = gate.blocks
        counts = np.bitwise_count(word(a) & word(b) & np.uint64(mask)).astype(np.int64)
        return vec * _OMEGA[(gate.eighths * counts) % 8]

    if kind == "ccp":
        a, b, c = gate.blocks
        joint = word(a) & word(b) & word(c) & np.uint64(mask)
        counts = np.bitwise_count(joint).astype(np.int64)
        return vec * _OMEGA[(gate.eighths * counts) % 8]

    if kind == "cx":
        c, t = gate.blocks
        out = np.empty_like(vec)
        out[idx ^ ((word(c) & np.uint64(mask)) << np.uint64(t * n))] = vec
        return out

    if kind == "cz":
        a, b = gate.blocks
        par = np.bitwise_count(word(a) & word(b) & np.uint64(mask)) & np.uint64(1)
        return vec * np.where(par == 1, -1.0, 1.0)

    if kind == "ccz":
        a, b, c = gate.blocks
        joint = word(a) & word(b) & word(c) & np.uint64(mask)
        par = np.bitwise_count(joint) & np.uint64(1)
        return vec * np.where(par == 1, -1.0, 1.0)

    if kind == "h":
        (b,) = gate.blocks
        out = vec.copy()
        scale = math.sqrt(0.5)
        for bit in range(n):
            step = np.uint64(1 << (b * n + bit))
            lo = idx[(idx & step) == 0]
            hi = lo | step
            top, bottom = out[lo], out[hi]
            out[lo] = (top + bottom) * scale
            out[hi] = (top - bottom) * scale
        return out

    raise InvalidParameters(f"unknown gate kind {gate.kind!r}")


def apply_dense_all(vec: np.ndarray, gates: list[BitwiseGate], n: int, blocks: int) -> np.ndarray:
    for gate in gates:
        vec = apply_dense(vec, gate, n, blocks)
    return vec


def measure_probs_z(vec: np.ndarray, block: int, n: int) -> dict[int, float]:
    """Marginal outcome distribution of a computational block measurement."""
    idx = np.arange(vec.size, dtype=np.uint64)
    words = ((idx >> np.uint64(block * n)) & np.uint64((1 << n) - 1)).astype(np.int64)
    probs = np.abs(vec) ** 2
    out: dict[int, float] = {}
    for w in np.unique(words):
        p = float(probs[words == w].sum())
        if p > 1e-18:
            out[int(w)] = p
    return out


def measure_probs_x(vec: np.ndarray, block: int, n: int, blocks: int) -> dict[int, float]:
    """X-basis distribution: Hadamard the block, then read words."""
    rotated = apply_dense(vec, BitwiseGate("h", (block,)), n, blocks)
    return measure_probs_z(rotated, block, n)
