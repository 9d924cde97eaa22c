"""Closed-form noise-budget and machine-size model.

Given code parameters ``(n, k, d)``, the mean check-row weight ``w`` and
two noise rates (``gamma`` per gate, ``epsilon`` per qubit per time
step), this module counts the error opportunities in one recovery cycle,
evaluates the probability that a block accumulates an uncorrectable
error, solves for the largest noise rates a computation of ``K`` logical
qubits and ``Q`` sequential gate slots can tolerate, and derives the
hardware scale-up and ancilla duty factors.  Everything is either a
deterministic closed form or a bisection over one; nothing here samples.

The module also embeds the published reference table these formulas were
calibrated against (seven named codes at ``KQ = 2.15e12``) so that
reproduction runs need no external data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

from .errors import Infeasible, InvalidParameters

__all__ = [
    "DEFAULT_KQ",
    "DEFAULT_K",
    "DEFAULT_Q",
    "ANCILLA_BUDGET",
    "ROTATION_BASE_COSINE",
    "OverheadParams",
    "AncillaSufficiency",
    "DoubleFailureCheck",
    "OverheadReport",
    "CodeSpec",
    "TableRow",
    "NoiseTable",
    "TABLE1_CODES",
    "TABLE1_REFERENCE",
    "REFERENCE_PROVENANCE",
    "scale_up",
    "error_opportunities",
    "failure_probability",
    "failure_probability_from_counts",
    "plim",
    "solve_gamma_max",
    "ancilla_sufficiency",
    "double_failure_check",
    "s_from_gate_counts",
    "rotation_synthesis",
    "evaluate",
    "table1",
    "compare_with_reference",
    "round_to_sig_figs",
]

#: Product K*Q the reference table was computed for: a 430-bit factoring
#: run needs about K = 5*430 logical qubits and Q ~ 1e9 gate slots.
DEFAULT_KQ = 2.15e12
DEFAULT_K = 2150.0
DEFAULT_Q = 1.0e9

#: Ancilla duty budget: with two fresh ancilla blocks available per data
#: block after the first extraction round, repeat-until-agreement needs
#: the non-zero-syndrome rate to stay below 2/7 (seven further rounds
#: sharing two blocks' worth of preparation capacity).
ANCILLA_BUDGET = 2.0 / 7.0

#: cos(phi) of the base rotation out of which arbitrary small rotations
#: are synthesised; equals rotation_synthesis(pi/2).
ROTATION_BASE_COSINE = 3.0 / 5.0

#: Relative truncation threshold for the binomial tail accumulation.
_TRUNCATION = 1e-30

#: Relative tolerance of the noise-rate bisection.
_BISECT_RTOL = 1e-6

#: Bisection bracket for the maximum tolerable gate error rate.
_GAMMA_LO = 1e-12
_GAMMA_HI = 1e-1


@dataclass(frozen=True)
class OverheadParams:
    """Inputs of the analytic model.

    ``n, k, d``
        Quantum code parameters.
    ``w``
        Mean check-row weight of the stabilizer basis (family rule:
        ``2**(m-1)`` for BCH-derived codes, the starting self-dual
        code's minimum distance for quadratic-residue-derived codes,
        the measured mean otherwise).
    ``mean_D_weight``
        Mean row weight of the logical-representative matrix; defaults
        to ``d + 1``.
    ``K, Q``
        Logical qubits and sequential gate slots of the target
        computation.  Only the product enters the per-block budget.
    ``gamma, epsilon``
        Gate and per-time-step memory error probabilities.  When
        ``epsilon`` is not given it defaults to ``gamma *
        epsilon_ratio`` with ``epsilon_ratio`` defaulting to ``1/n``.
    ``r``
        Syndrome-extraction repetitions; defaults to ``t + 1`` where
        ``t = (d - 1) // 2`` is the number of correctable errors.
    """

    n: int
    k: int
    d: int
    w: float
    mean_D_weight: float | None = None
    K: float = DEFAULT_K
    Q: float = DEFAULT_Q
    gamma: float = 0.0
    epsilon: float | None = None
    epsilon_ratio: float | None = None
    r: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1 or not 0 <= self.k <= self.n or self.d < 1:
            raise InvalidParameters(f"bad code parameters [[{self.n},{self.k},{self.d}]]")
        if self.w < 0:
            raise InvalidParameters("mean check-row weight must be nonnegative")
        if self.K < 1 or self.Q < 1:
            raise InvalidParameters("K and Q must be at least 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidParameters("gamma must lie in [0, 1]")
        if self.epsilon is not None and not 0.0 <= self.epsilon <= 1.0:
            raise InvalidParameters("epsilon must lie in [0, 1]")
        if self.epsilon_ratio is not None and self.epsilon_ratio < 0:
            raise InvalidParameters("epsilon_ratio must be nonnegative")
        if self.r is not None and self.r < 0:
            raise InvalidParameters("repetition count must be nonnegative")

    @property
    def t(self) -> int:
        """Number of correctable errors, (d - 1) // 2."""
        return (self.d - 1) // 2

    @property
    def resolved_r(self) -> int:
        return self.r if self.r is not None else self.t + 1

    @property
    def resolved_mean_D_weight(self) -> float:
        return self.mean_D_weight if self.mean_D_weight is not None else float(self.d + 1)

    @property
    def resolved_epsilon_ratio(self) -> float:
        """epsilon/gamma coupling used when epsilon is not pinned explicitly."""
        if self.epsilon_ratio is not None:
            return self.epsilon_ratio
        if self.epsilon is not None and self.gamma > 0:
            return self.epsilon / self.gamma
        return 1.0 / self.n

    def resolve_rates(self, gamma: float | None = None,
                      epsilon: float | None = None) -> tuple[float, float]:
        """Noise rates with overrides applied.

        An explicit ``epsilon`` wins; a stored ``epsilon`` applies only
        when ``gamma`` is not being overridden (an override re-couples
        epsilon through the ratio so that sweeps move both rates).
        """
        g = self.gamma if gamma is None else gamma
        if epsilon is not None:
            e = epsilon
        elif gamma is None and self.epsilon is not None:
            e = self.epsilon
        else:
            e = g * self.resolved_epsilon_ratio
        if not 0.0 <= g <= 1.0 or not 0.0 <= e <= 1.0:
            raise InvalidParameters("noise rates must lie in [0, 1]")
        return g, e


def scale_up(n: int, k: int, K: float, accumulator_blocks: float = 3.0) -> tuple[float, float]:
    """Machine size per logical qubit, and its large-computation limit.

    Returns ``(S, S_limit)`` where ``S = (5n+4)/k * (1 +
    accumulator_blocks*k/K)`` and ``S_limit = (5n+4)/k`` is the value as
    ``K`` grows without bound.  ``accumulator_blocks`` is the number of
    blocks reserved as a shared accumulator; 3 by default, with larger
    sizings (for example ``K/(4k)``) selectable through the flag.
    """
    if k < 1:
        raise InvalidParameters("scale-up needs at least one logical qubit per block")
    if K < k:
        raise InvalidParameters("computation must hold at least one block (K >= k)")
    if accumulator_blocks < 0:
        raise InvalidParameters("accumulator_blocks must be nonnegative")
    limit = (5.0 * n + 4.0) / k
    return limit * (1.0 + accumulator_blocks * k / K), limit


def error_opportunities(params: OverheadParams) -> tuple[int, float]:
    """Per-recovery counts of gate opportunities ``g`` and memory
    opportunities ``s``.

    ``g = n(4r+1)`` counts the physical gates touching a block during
    one recovery (four transversal interactions per repetition round
    plus the data's own gate).  ``s = n((w+2)(n-k)/2 + (mean_D+1)k +
    n(2+r/2))`` counts qubit-time-steps of waiting: ancilla encoding and
    verification, logical-pattern checks, and the block's idle time
    while rounds complete.  ``s`` is half-integral when ``n*r`` is odd.
    """
    n, k = params.n, params.k
    r = params.resolved_r
    g = n * (4 * r + 1)
    s = n * ((params.w + 2.0) * (n - k) / 2.0
             + (params.resolved_mean_D_weight + 1.0) * k
             + n * (2.0 + r / 2.0))
    return g, s


def _binomial_tail(g: int, x: float, start: int) -> float:
    """``2 * sum_{i=start}^{g} C(g, i) x**i`` in log space.

    Terms are accumulated until they fall below ``_TRUNCATION`` of the
    running sum on the decreasing side of the mode.  Saturates to
    ``inf`` rather than overflowing for per-opportunity rates near 1.
    """
    if x <= 0.0 or start > g:
        return 0.0
    log_x = math.log(x)
    lg_g = math.lgamma(g + 1)
    total = 0.0
    for i in range(start, g + 1):
        log_term = lg_g - math.lgamma(i + 1) - math.lgamma(g - i + 1) + i * log_x
        term = math.exp(log_term) if log_term < 709.0 else math.inf
        total += term
        if math.isinf(total):
            return math.inf
        # Past the mode the term ratio (g-i)x/(i+1) is below 1, so the
        # truncation test is safe once terms are falling.
        if term < _TRUNCATION * total and (g - i) * x < i + 1:
            break
    return 2.0 * total


def failure_probability_from_counts(g: int, s: float, t: int,
                                    gamma: float, epsilon: float) -> float:
    """Block failure probability from raw opportunity counts.

    Each of the ``g`` gate opportunities fails with an effective rate
    ``x = 2*gamma/3 + (s/g)(2*epsilon/3)`` (memory exposure amortised
    over the gates); the block fails once more than ``t`` opportunities
    misfire, giving ``2 * sum_{i=t+1}^{g} C(g,i) x**i``.
    """
    if g < 1:
        raise InvalidParameters("need at least one error opportunity")
    if not 0.0 <= gamma <= 1.0 or not 0.0 <= epsilon <= 1.0:
        raise InvalidParameters("noise rates must lie in [0, 1]")
    x = 2.0 * gamma / 3.0 + (s / g) * (2.0 * epsilon / 3.0)
    return _binomial_tail(g, x, t + 1)


def failure_probability(params: OverheadParams, gamma: float | None = None,
                        epsilon: float | None = None) -> float:
    """Probability that one block accumulates an uncorrectable error
    during a recovery cycle, at the given (or stored) noise rates."""
    g, e = params.resolve_rates(gamma, epsilon)
    opportunities, waiting = error_opportunities(params)
    return failure_probability_from_counts(opportunities, waiting, params.t, g, e)


def plim(k: int, K: float, Q: float) -> float:
    """Per-recovery failure budget ``k / (8 K Q)``.

    A computation of ``K`` logical qubits and ``Q`` sequential gate
    slots performs about ``8 Q`` recoveries of each of its ``K/k``
    blocks, so each recovery may fail with probability at most this.
    """
    if K < 1 or Q < 1:
        raise InvalidParameters("K and Q must be at least 1")
    if k < 1:
        raise InvalidParameters("budget needs at least one logical qubit per block")
    return k / (8.0 * K * Q)


def solve_gamma_max(params: OverheadParams) -> tuple[float, float]:
    """Largest gate error rate meeting the per-recovery budget.

    Bisects ``gamma`` in ``[1e-12, 1e-1]`` (memory rate coupled through
    ``epsilon_ratio``) until the failure probability matches the budget
    to relative ``1e-6``.  Returns ``(gamma_max, epsilon_max)``.
    Raises :class:`Infeasible` when the budget is missed even at the
    bottom of the bracket.
    """
    target = plim(params.k, params.K, params.Q)
    ratio = params.resolved_epsilon_ratio
    lo, hi = _GAMMA_LO, _GAMMA_HI

    p_lo = failure_probability(params, gamma=lo)
    if p_lo > target:
        raise Infeasible(
            f"failure probability {p_lo:.3e} at gamma={lo:.0e} already exceeds "
            f"the per-recovery budget {target:.3e}")
    if failure_probability(params, gamma=hi) <= target:
        return hi, hi * ratio

    log_lo, log_hi = math.log(lo), math.log(hi)
    mid = lo
    for _ in range(200):
        log_mid = 0.5 * (log_lo + log_hi)
        mid = math.exp(log_mid)
        p_mid = failure_probability(params, gamma=mid)
        if abs(p_mid - target) <= _BISECT_RTOL * target:
            break
        if p_mid > target:
            log_hi = log_mid
        else:
            log_lo = log_mid
    return mid, mid * ratio


@dataclass(frozen=True)
class AncillaSufficiency:
    """Non-zero-syndrome rate of freshly verified ancillas, two ways.

    ``closed_form`` is the small-rate linearisation ``32 n r gamma / 3``
    (valid when ``epsilon = gamma/n``); ``full_sum`` evaluates the same
    opportunity model summed from one failure upward, ``2((1+x)^g - 1)``.
    The two disagree at the ten-percent level for the rates of interest,
    so both are reported and ``variants_disagree`` flags the gap.  The
    verdict uses the (larger) full sum against :data:`ANCILLA_BUDGET`.
    """

    closed_form: float
    full_sum: float
    relative_gap: float
    variants_disagree: bool
    threshold: float
    sufficient: bool


def ancilla_sufficiency(params: OverheadParams, gamma: float | None = None) -> AncillaSufficiency:
    """Rate of non-zero syndromes among prepared ancillas, with verdict.

    Repeat-until-agreement consumes one fresh ancilla pair per non-zero
    syndrome, so preparation keeps up exactly when this rate stays below
    :data:`ANCILLA_BUDGET`.
    """
    g_rate, _ = params.resolve_rates(gamma)
    r = params.resolved_r
    closed = 32.0 * params.n * r * g_rate / 3.0
    opportunities, waiting = error_opportunities(params)
    eps = g_rate * params.resolved_epsilon_ratio
    x = 2.0 * g_rate / 3.0 + (waiting / opportunities) * (2.0 * eps / 3.0)
    full = 2.0 * math.expm1(opportunities * math.log1p(x)) if x > 0 else 0.0
    gap = (full - closed) / full if full > 0 else 0.0
    return AncillaSufficiency(
        closed_form=closed,
        full_sum=full,
        relative_gap=gap,
        variants_disagree=abs(gap) > 0.05,
        threshold=ANCILLA_BUDGET,
        sufficient=full <= ANCILLA_BUDGET,
    )


@dataclass(frozen=True)
class DoubleFailureCheck:
    """Accumulation-over-two-recoveries failure channel, reported.

    A recovery that wrongly accepts an all-zero syndrome lets errors
    from two consecutive recoveries accumulate; with roughly twice the
    opportunities that event has probability about ``2**(t+1) * P``.
    It only occurs together with the wrong-zero-syndrome event itself,
    whose probability is bounded by ``wrong_syndrome_bound =
    2**-(t+1)``; the combined rate therefore stays below ``P`` (and so
    below the budget) whenever that bound holds.  This is a reported
    consistency check, not an assumption used elsewhere.
    """

    accumulation_probability: float
    wrong_syndrome_bound: float
    combined_rate: float
    plim: float
    below_budget: bool


def double_failure_check(params: OverheadParams, gamma: float | None = None,
                         wrong_syndrome_probability: float | None = None) -> DoubleFailureCheck:
    p = failure_probability(params, gamma=gamma)
    budget = plim(params.k, params.K, params.Q)
    bound = 2.0 ** -(params.t + 1)
    accumulation = 2.0 ** (params.t + 1) * p
    q = wrong_syndrome_probability if wrong_syndrome_probability is not None else bound
    combined = q * accumulation
    return DoubleFailureCheck(
        accumulation_probability=accumulation,
        wrong_syndrome_bound=bound,
        combined_rate=combined,
        plim=budget,
        below_budget=(q <= bound and combined <= budget * (1.0 + 10.0 * _BISECT_RTOL)),
    )


def s_from_gate_counts(params: OverheadParams) -> float:
    """Memory-opportunity count rebuilt from explicit gate tallies.

    The closed form for ``s`` is an approximation; this variant
    reassembles the same quantity from the encoding and verification
    gate counts the gadget layer uses (sum of check-row weights for the
    encoding circuit, check-row plus logical-pattern CNOTs for
    verification) plus the identical idle term, and is reported next to
    the closed form for comparison.
    """
    n, k = params.n, params.k
    rows = (n - k) / 2.0
    encoding = params.w * rows
    verification = params.w * rows + params.resolved_mean_D_weight * k
    idle = n * (2.0 + params.resolved_r / 2.0)
    return n * (encoding + verification + idle)


def rotation_synthesis(alpha: float) -> float:
    """Angle of the conditional phase rotation that, applied within one
    round of the synthesis recursion, advances a target rotation by
    ``alpha``: ``cos(phi) = (6 + 10 cos(alpha)) / (10 + 6 cos(alpha))``.

    The base case ``alpha = pi/2`` gives ``cos(phi) = 3/5``
    (:data:`ROTATION_BASE_COSINE`); ``alpha = 0`` and ``alpha = pi`` map
    to ``0`` and ``pi``.
    """
    c = math.cos(alpha)
    cos_phi = (6.0 + 10.0 * c) / (10.0 + 6.0 * c)
    return math.acos(min(1.0, max(-1.0, cos_phi)))


@dataclass(frozen=True)
class OverheadReport:
    """Full evaluation of the model for one code.

    ``P``/``P1``/``ancilla``/``double_failure`` are evaluated at the
    stored ``gamma`` when one was supplied, otherwise at the solved
    ``gamma_max`` (the operating point of the reference table).  ``P1``
    is the closed-form ancilla rate; the ``ancilla`` sub-report carries
    both variants.  ``s_gate_count`` is the alternative memory count of
    :func:`s_from_gate_counts`.
    """

    g: int
    s: float
    P: float
    Plim: float
    P1: float
    S: float
    gamma_max: float
    feasible: bool
    epsilon_max: float
    scale_up_limit: float
    gamma: float
    epsilon: float
    ancilla: AncillaSufficiency
    double_failure: DoubleFailureCheck
    s_gate_count: float


def evaluate(params: OverheadParams, accumulator_blocks: float = 3.0) -> OverheadReport:
    """Evaluate every model quantity for one code."""
    g, s = error_opportunities(params)
    budget = plim(params.k, params.K, params.Q)
    S, limit = scale_up(params.n, params.k, params.K, accumulator_blocks)

    try:
        gamma_max, epsilon_max = solve_gamma_max(params)
        solvable = True
    except Infeasible:
        gamma_max, epsilon_max = math.nan, math.nan
        solvable = False

    if params.gamma > 0 or params.epsilon is not None:
        gamma_point, epsilon_point = params.resolve_rates()
    elif solvable:
        gamma_point, epsilon_point = gamma_max, epsilon_max
    else:
        gamma_point, epsilon_point = _GAMMA_LO, _GAMMA_LO * params.resolved_epsilon_ratio

    p = failure_probability(params, gamma=gamma_point, epsilon=epsilon_point)
    ancilla = ancilla_sufficiency(params, gamma=gamma_point)
    double = double_failure_check(params, gamma=gamma_point)
    return OverheadReport(
        g=g,
        s=s,
        P=p,
        Plim=budget,
        P1=ancilla.closed_form,
        S=S,
        gamma_max=gamma_max,
        feasible=solvable and p <= budget * (1.0 + 10.0 * _BISECT_RTOL),
        epsilon_max=epsilon_max,
        scale_up_limit=limit,
        gamma=gamma_point,
        epsilon=epsilon_point,
        ancilla=ancilla,
        double_failure=double,
        s_gate_count=s_from_gate_counts(params),
    )


@dataclass(frozen=True)
class CodeSpec:
    """Code parameters sufficient for the analytic model."""

    name: str
    n: int
    k: int
    d: int
    w: float


#: The seven named codes of the reference table, with the mean
#: check-row weight each family rule assigns (2**(m-1) for the BCH
#: codes of length 2**m - 1; the starting self-dual code's minimum
#: distance, 20/12/16, for the three quadratic-residue-derived codes).
TABLE1_CODES: tuple[CodeSpec, ...] = (
    CodeSpec("[[99,5,15]]", 99, 5, 15, 20.0),
    CodeSpec("[[127,29,15]]", 127, 29, 15, 64.0),
    CodeSpec("[[255,143,15]]", 255, 143, 15, 128.0),
    CodeSpec("[[127,43,13]]", 127, 43, 13, 64.0),
    CodeSpec("[[63,27,7]]", 63, 27, 7, 32.0),
    CodeSpec("[[47,1,11]]", 47, 1, 11, 12.0),
    CodeSpec("[[79,1,15]]", 79, 1, 15, 16.0),
)

#: Published reference rows at KQ = 2.15e12, in the printed units:
#: (P / 1e-14, gamma / 1e-6, epsilon / 1e-6, scale-up).
TABLE1_REFERENCE: dict[str, tuple[float, float, float, int]] = {
    "[[99,5,15]]": (29.0, 28.0, 0.28, 100),
    "[[127,29,15]]": (169.0, 20.0, 0.16, 22),
    "[[255,143,15]]": (831.0, 11.0, 0.04, 9),
    "[[127,43,13]]": (250.0, 13.0, 0.10, 15),
    "[[63,27,7]]": (157.0, 1.4, 0.02, 12),
    "[[47,1,11]]": (5.8, 14.0, 0.30, 239),
    "[[79,1,15]]": (5.8, 30.0, 0.38, 399),
}

REFERENCE_PROVENANCE = "published reference table (KQ = 2.15e12)"

#: Comparison tolerances: budget and scale-up columns are exact closed
#: forms (matched to the printed precision), solved noise columns carry
#: the model's approximation slack.
_COMPARE_TOLERANCES = {"plim": 0.0, "gamma": 0.40, "epsilon": 0.40, "scaleup": 0.0}

_CSV_HEADER = "code,P (10^-14),gamma (10^-6),epsilon (10^-6),(5n+4)/k"

_JSON_ROW_KEYS = ("code", "n", "k", "d", "w", "plim", "gamma_max",
                  "epsilon_max", "scaleup", "p1", "feasible")


@dataclass(frozen=True)
class TableRow:
    """One evaluated code row of the noise-requirement table."""

    code: str
    n: int
    k: int
    d: int
    w: float
    plim: float
    gamma_max: float | None
    epsilon_max: float | None
    scaleup: float
    p1: float | None
    feasible: bool

    def to_dict(self) -> dict:
        return {key: getattr(self, key) for key in _JSON_ROW_KEYS}


@dataclass(frozen=True)
class NoiseTable:
    """Noise-requirement table over a list of codes at fixed KQ."""

    kq: float
    rows: tuple[TableRow, ...]

    def to_csv(self) -> str:
        lines = [_CSV_HEADER]
        for row in self.rows:
            gamma = f"{row.gamma_max / 1e-6:.4g}" if row.feasible else "-"
            eps = f"{row.epsilon_max / 1e-6:.4g}" if row.feasible else "-"
            lines.append(
                f"{row.code},{row.plim / 1e-14:.4g},{gamma},{eps},{round(row.scaleup)}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self, indent: int = 2) -> str:
        payload = {"kq": self.kq, "rows": [row.to_dict() for row in self.rows]}
        return json.dumps(payload, indent=indent)


def _as_spec(code) -> CodeSpec:
    """Accept CodeSpec, quantum-code objects, mappings, or bare tuples."""
    if isinstance(code, CodeSpec):
        return code
    if isinstance(code, dict):
        return CodeSpec(str(code.get("name", "")) or _default_name(code["n"], code["k"], code["d"]),
                        int(code["n"]), int(code["k"]), int(code["d"]), float(code["w"]))
    if isinstance(code, (tuple, list)):
        n, k, d, w = code
        return CodeSpec(_default_name(n, k, d), int(n), int(k), int(d), float(w))
    name = getattr(code, "name", "") or _default_name(code.n, code.k, code.d)
    return CodeSpec(str(name), int(code.n), int(code.k), int(code.d), float(code.w))


def _default_name(n, k, d) -> str:
    return f"[[{n},{k},{d}]]"


def table1(codes=TABLE1_CODES, KQ: float = DEFAULT_KQ,
           accumulator_blocks: float = 3.0) -> NoiseTable:
    """Evaluate the noise-requirement table for the given codes.

    Each row solves for the maximum tolerable rates under the
    per-recovery budget ``k/(8 KQ)`` with ``epsilon = gamma/n``, and
    reports the large-computation scale-up ``(5n+4)/k``.  Rows whose
    budget is unreachable are marked infeasible rather than failing the
    run.  Rows are independent, deterministic, and emitted in input
    order.
    """
    if KQ < 1:
        raise InvalidParameters("KQ must be at least 1")
    rows = []
    for raw in codes:
        spec = _as_spec(raw)
        params = OverheadParams(n=spec.n, k=spec.k, d=spec.d, w=spec.w, K=KQ, Q=1.0)
        budget = plim(spec.k, KQ, 1.0)
        _, limit = scale_up(spec.n, spec.k, KQ, accumulator_blocks)
        try:
            gamma_max, epsilon_max = solve_gamma_max(params)
            p1 = ancilla_sufficiency(params, gamma=gamma_max).closed_form
            rows.append(TableRow(spec.name, spec.n, spec.k, spec.d, spec.w,
                                 budget, gamma_max, epsilon_max, limit, p1, True))
        except Infeasible:
            rows.append(TableRow(spec.name, spec.n, spec.k, spec.d, spec.w,
                                 budget, None, None, limit, None, False))
    return NoiseTable(kq=KQ, rows=tuple(rows))


def round_to_sig_figs(value: float, sig: int) -> float:
    """Round to ``sig`` significant figures (0 rounds to 0)."""
    if value == 0 or not math.isfinite(value):
        return value
    magnitude = math.floor(math.log10(abs(value)))
    return round(value, sig - 1 - magnitude)


def _sig_figs_of(printed: float) -> int:
    text = f"{printed:g}".replace("-", "").replace(".", "").lstrip("0")
    return len(text.rstrip("0")) if text.strip("0") else 1


def compare_with_reference(table: NoiseTable,
                           reference: dict[str, tuple[float, float, float, int]] | None = None) -> list[dict]:
    """Column-by-column comparison of a computed table against the
    embedded published reference rows.

    Budget and scale-up columns must match the printed values exactly
    after rounding to the printed precision; the solved noise columns
    are compared at the model's documented tolerance.  Every entry
    carries a provenance annotation naming the reference source.
    """
    reference = TABLE1_REFERENCE if reference is None else reference
    results = []
    for row in table.rows:
        if row.code not in reference:
            continue
        ref_p, ref_gamma, ref_eps, ref_scale = reference[row.code]
        checks = [
            ("plim", row.plim / 1e-14, ref_p),
            ("gamma", (row.gamma_max / 1e-6) if row.gamma_max is not None else math.nan, ref_gamma),
            ("epsilon", (row.epsilon_max / 1e-6) if row.epsilon_max is not None else math.nan, ref_eps),
            ("scaleup", row.scaleup, ref_scale),
        ]
        for column, computed, ref_value in checks:
            tol = _COMPARE_TOLERANCES[column]
            if tol == 0.0:
                sig = _sig_figs_of(ref_value)
                if column == "scaleup":
                    within = round(computed) == ref_value
                else:
                    within = round_to_sig_figs(computed, sig) == ref_value
            else:
                within = (math.isfinite(computed)
                          and abs(computed - ref_value) <= tol * abs(ref_value))
            results.append({
                "code": row.code,
                "column": column,
                "computed": computed,
                "reference": ref_value,
                "tolerance": tol,
                "within": bool(within),
                "provenance": REFERENCE_PROVENANCE,
            })
    return results


# Keep dataclass field order stable for serialisation consumers.
assert [f.name for f in fields(TableRow)] == list(_JSON_ROW_KEYS)
