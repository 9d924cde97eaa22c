"""Benchmark the enumeration kernels: compiled backend vs numpy fallback.

The backend is selected at import time by the ``FTQEC_NO_NUMBA``
environment variable, so this script measures each backend in a child
process and prints a comparison table.  Both backends must produce
identical results; the parent cross-checks digests of every case.

Usage::

    python3 benchmarks/bench_kernels.py            # quick sizes
    python3 benchmarks/bench_kernels.py --dims 16 20 24 --repeats 5
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import subprocess
import sys
import time
from pathlib import Path

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))


def _random_basis(rng: random.Random, dim: int, ncols: int) -> list[int]:
    """Deterministic full-rank GF(2) basis of the requested dimension."""
    from ftqec import gf2

    while True:
        matrix = gf2.from_rows(
            [rng.getrandbits(ncols) | 1 for _ in range(dim)], ncols)
        reduced, rank = gf2.rref(matrix)
        if rank == dim:
            return list(reduced.rows)


def run_cases(dims: list[int], ncols: int, repeats: int) -> dict:
    from ftqec import _kernels

    rng = random.Random(20240817)
    cases = []
    for dim in dims:
        basis = _random_basis(rng, dim, ncols)
        shift = rng.getrandbits(ncols)

        _kernels.weight_counts(basis[:2], ncols)          # warm the kernels
        _kernels.min_coset_weight(basis[:2], shift, ncols)

        start = time.perf_counter()
        for _ in range(repeats):
            counts = _kernels.weight_counts(basis, ncols)
        weight_time = (time.perf_counter() - start) / repeats

        start = time.perf_counter()
        for _ in range(repeats):
            coset = _kernels.min_coset_weight(basis, shift, ncols)
        coset_time = (time.perf_counter() - start) / repeats

        digest = hashlib.sha256(
            (",".join(map(str, counts)) + f"|{coset[0]},{coset[1]}").encode()
        ).hexdigest()[:16]
        cases.append({
            "dim": dim,
            "words": 1 << dim,
            "weight_time": weight_time,
            "coset_time": coset_time,
            "digest": digest,
        })
    return {"backend": _kernels.BACKEND, "ncols": ncols, "cases": cases}


def _child(argv: list[str], force_numpy: bool) -> dict:
    env = dict(os.environ)
    if force_numpy:
        env["FTQEC_NO_NUMBA"] = "1"
    else:
        env.pop("FTQEC_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, __file__, "--emit-json", *argv],
        check=True, capture_output=True, text=True, env=env)
    return json.loads(out.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dims", type=int, nargs="+", default=[14, 18, 20, 22],
                        help="row-space dimensions to enumerate (2**dim words)")
    parser.add_argument("--ncols", type=int, default=127,
                        help="word length in bits")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--emit-json", action="store_true",
                        help=argparse.SUPPRESS)  # child-process mode
    args = parser.parse_args()

    if args.emit_json:
        json.dump(run_cases(args.dims, args.ncols, args.repeats), sys.stdout)
        return 0

    argv = ["--ncols", str(args.ncols), "--repeats", str(args.repeats),
            "--dims", *map(str, args.dims)]
    fast = _child(argv, force_numpy=False)
    fallback = _child(argv, force_numpy=True)

    if fast["backend"] == fallback["backend"]:
        print(f"note: both children report the {fast['backend']} backend "
              "(compiled backend unavailable?)")
    print(f"enumeration kernels, {args.ncols}-bit words, "
          f"mean of {args.repeats} runs")
    print(f"{'dim':>4s} {'words':>10s} "
          f"{'weights ' + fast['backend']:>16s} {'weights ' + fallback['backend']:>16s} {'ratio':>7s} "
          f"{'coset ' + fast['backend']:>14s} {'coset ' + fallback['backend']:>14s} {'ratio':>7s}")
    mismatches = 0
    for a, b in zip(fast["cases"], fallback["cases"]):
        if a["digest"] != b["digest"]:
            mismatches += 1
        weight_ratio = b["weight_time"] / a["weight_time"]
        coset_ratio = b["coset_time"] / a["coset_time"]
        print(f"{a['dim']:4d} {a['words']:10d} "
              f"{a['weight_time']:14.4f} s {b['weight_time']:14.4f} s {weight_ratio:6.1f}x "
              f"{a['coset_time']:12.4f} s {b['coset_time']:12.4f} s {coset_ratio:6.1f}x")
    if mismatches:
        print(f"ERROR: {mismatches} case(s) disagree between backends")
        return 1
    print("backends agree on every case")
    return 0


if __name__ == "__main__":
    sys.exit(main())
