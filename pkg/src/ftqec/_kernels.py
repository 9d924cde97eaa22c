"""Enumeration kernels: compiled (numba) with a pure-numpy fallback.

The hot loops of the package are exhaustive walks over all 2**r words of
an r-dimensional GF(2) row space (weight distributions, coset-leader
searches, minimum-distance scans).  Words are packed into 64-bit lanes
and visited in Gray-code order so each step is one XOR per lane.

Backend selection:

* default: numba ``@njit`` kernels (cached to disk after first compile);
* ``FTQEC_NO_NUMBA=1`` in the environment (or numba unavailable):
  a vectorised numpy fallback that enumerates in batches.

``BACKEND`` records which implementation is active; both are exercised
by ``benchmarks/bench_kernels.py`` and cross-checked in the test suite.
"""

from __future__ import annotations

import os

import numpy as np

_WORD_BITS = 64


def _pack_rows(rows: list[int], ncols: int) -> np.ndarray:
    """Pack integer rows into a (len(rows), W) uint64 array, W = ceil(ncols/64)."""
    nwords = max(1, -(-ncols // _WORD_BITS))
    out = np.zeros((len(rows), nwords), dtype=np.uint64)
    mask = (1 << _WORD_BITS) - 1
    for i, r in enumerate(rows):
        for w in range(nwords):
            out[i, w] = (r >> (w * _WORD_BITS)) & mask
    return out


def _unpack_word(words: np.ndarray) -> int:
    value = 0
    for w in range(words.shape[0] - 1, -1, -1):
        value = (value << _WORD_BITS) | int(words[w])
    return value


# ---------------------------------------------------------------------------
# Pure-numpy fallback implementations
# ---------------------------------------------------------------------------

_BATCH_DIM = 16  # enumerate 2**16 words per vectorised batch


def _split_tables(packed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split the basis into a batched low table and the remaining high rows.

    Returns ``(lo_table, hi_rows)`` where ``lo_table`` holds all XOR
    combinations of the first ``min(r, _BATCH_DIM)`` rows.
    """
    r = packed.shape[0]
    lo = min(r, _BATCH_DIM)
    table = np.zeros((1, packed.shape[1]), dtype=np.uint64)
    for i in range(lo):
        table = np.vstack([table, table ^ packed[i]])
    return table, packed[lo:]


def _iter_hi_words(hi_rows: np.ndarray):
    """Yield the XOR-accumulated word for each Gray-code step over hi_rows."""
    current = np.zeros(hi_rows.shape[1], dtype=np.uint64)
    yield current
    for i in range(1, 1 << hi_rows.shape[0]):
        j = (i & -i).bit_length() - 1
        current = current ^ hi_rows[j]
        yield current


def _weight_counts_np(packed: np.ndarray, ncols: int) -> np.ndarray:
    counts = np.zeros(ncols + 1, dtype=np.int64)
    lo_table, hi_rows = _split_tables(packed)
    for hi in _iter_hi_words(hi_rows):
        batch = lo_table ^ hi
        weights = np.bitwise_count(batch).sum(axis=1)
        counts += np.bincount(weights, minlength=ncols + 1)[: ncols + 1]
    return counts


def _min_coset_np(packed: np.ndarray, shift: np.ndarray, ncols: int) -> tuple[int, int]:
    lo_table, hi_rows = _split_tables(packed)
    best_weight = ncols + 1
    best_value: int | None = None
    for hi in _iter_hi_words(hi_rows):
        batch = lo_table ^ hi ^ shift
        weights = np.bitwise_count(batch).sum(axis=1)
        batch_min = int(weights.min())
        if batch_min > best_weight:
            continue
        if batch_min < best_weight:
            best_weight = batch_min
            best_value = None
        for idx in np.nonzero(weights == batch_min)[0]:
            value = _unpack_word(batch[idx])
            if best_value is None or value < best_value:
                best_value = value
    assert best_value is not None
    return best_weight, best_value


# ---------------------------------------------------------------------------
# Numba kernels
# ---------------------------------------------------------------------------

def _build_numba_kernels():
    import numba

    @numba.njit(numba.uint64(numba.uint64), cache=True, inline="always")
    def popcount64(x):
        x = x - ((x >> 1) & numba.uint64(0x5555555555555555))
        x = (x & numba.uint64(0x3333333333333333)) + ((x >> 2) & numba.uint64(0x3333333333333333))
        x = (x + (x >> 4)) & numba.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * numba.uint64(0x0101010101010101)) >> numba.uint64(56)

    @numba.njit(cache=True)
    def weight_counts_kernel(basis, ncols):
        r, nwords = basis.shape
        counts = np.zeros(ncols + 1, dtype=np.int64)
        state = np.zeros(nwords, dtype=np.uint64)
        weight = 0
        counts[0] += 1
        for i in range(1, 1 << r):
            t = i
            j = 0
            while t & 1 == 0:
                t >>= 1
                j += 1
            for w in range(nwords):
                old = state[w]
                new = old ^ basis[j, w]
                state[w] = new
                weight += int(popcount64(new)) - int(popcount64(old))
            counts[weight] += 1
        return counts

    @numba.njit(cache=True)
    def min_coset_kernel(basis, shift, ncols):
        r, nwords = basis.shape
        state = shift.copy()
        best = state.copy()
        best_weight = 0
        for w in range(nwords):
            best_weight += int(popcount64(state[w]))
        weight = best_weight
        for i in range(1, 1 << r):
            t = i
            j = 0
            while t & 1 == 0:
                t >>= 1
                j += 1
            for w in range(nwords):
                old = state[w]
                new = old ^ basis[j, w]
                state[w] = new
                weight += int(popcount64(new)) - int(popcount64(old))
            if weight < best_weight:
                best_weight = weight
                best[:] = state
            elif weight == best_weight:
                # Tie-break toward the numerically smaller packed value.
                smaller = False
                for w in range(nwords - 1, -1, -1):
                    if state[w] < best[w]:
                        smaller = True
                        break
                    if state[w] > best[w]:
                        break
                if smaller:
                    best[:] = state
        return best_weight, best
    return weight_counts_kernel, min_coset_kernel


_FORCE_NUMPY = os.environ.get("FTQEC_NO_NUMBA", "").strip() not in ("", "0")

if _FORCE_NUMPY:
    BACKEND = "numpy"
    _numba_kernels = None
else:
    try:
        _numba_kernels = _build_numba_kernels()
        BACKEND = "numba"
    except Exception:  # pragma: no cover - exercised only without numba installed
        _numba_kernels = None
        BACKEND = "numpy"


# ---------------------------------------------------------------------------
# Public wrappers
# ---------------------------------------------------------------------------

def weight_counts(rows: list[int], ncols: int) -> np.ndarray:
    """Weight histogram over all 2**len(rows) XOR combinations of ``rows``.

    ``rows`` must be linearly independent (callers pass an RREF basis).
    Returns an int64 array of length ``ncols + 1``.
    """
    if not rows:
        counts = np.zeros(ncols + 1, dtype=np.int64)
        counts[0] = 1
        return counts
    packed = _pack_rows(rows, ncols)
    if _numba_kernels is not None:
        return _numba_kernels[0](packed, ncols)
    return _weight_counts_np(packed, ncols)


def min_coset_weight(rows: list[int], shift: int, ncols: int) -> tuple[int, int]:
    """Minimum weight and lexicographically-least achiever of ``shift + span(rows)``."""
    if not rows:
        return shift.bit_count(), shift
    packed = _pack_rows(rows, ncols)
    shift_packed = _pack_rows([shift], ncols)[0]
    if _numba_kernels is not None:
        weight, words = _numba_kernels[1](packed, shift_packed, ncols)
        return int(weight), _unpack_word(words)
    return _min_coset_np(packed, shift_packed, ncols)
