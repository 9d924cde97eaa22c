"""Unit tests for the analytic noise-budget model.

Expected values marked ORACLE were frozen from an independent
exact-arithmetic evaluation (``fractions.Fraction`` rates, ``math.comb``
binomial terms, 90-step interval bisection) that shares no code with the
module under test.  Values marked PRINTED are the published reference
rows embedded in the module.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import pytest

from ftqec import overhead
from ftqec.errors import Infeasible, InvalidParameters
from ftqec.overhead import OverheadParams

# name -> (g, s, plim, gamma_max, epsilon_max)   [ORACLE]
TABLE_ORACLE = {
    "[[99,5,15]]": (3267, 169587.0, 2.906977e-13, 2.816787e-05, 2.845239e-07),
    "[[127,29,15]]": (4191, 570103.0, 1.686047e-12, 2.012101e-05, 1.584332e-07),
    "[[255,143,15]]": (8415, 2866455.0, 8.313953e-12, 1.083809e-05, 4.250232e-08),
    "[[127,43,13]]": (3683, 522668.5, 2.500000e-12, 1.295354e-05, 1.019964e-07),
    "[[63,27,7]]": (1071, 69741.0, 1.569767e-12, 1.436651e-06, 2.280399e-08),
    "[[47,1,11]]": (1175, 26790.0, 5.813953e-14, 1.429483e-05, 3.041454e-07),
    "[[79,1,15]]": (2607, 94247.0, 5.813953e-14, 3.020299e-05, 3.823163e-07),
}

SPECS = {spec.name: spec for spec in overhead.TABLE1_CODES}


def params_for(name: str, **overrides) -> OverheadParams:
    spec = SPECS[name]
    kwargs = dict(n=spec.n, k=spec.k, d=spec.d, w=spec.w, K=overhead.DEFAULT_KQ, Q=1.0)
    kwargs.update(overrides)
    return OverheadParams(**kwargs)


class TestScaleUp:
    def test_limit_values(self):
        _, limit = overhead.scale_up(127, 29, 1e6)
        assert limit == pytest.approx((5 * 127 + 4) / 29)
        assert round(limit) == 22
        _, limit47 = overhead.scale_up(47, 1, 1e6)
        assert limit47 == 239.0

    def test_all_reference_rows_round_to_printed_column(self):
        for spec in overhead.TABLE1_CODES:
            _, limit = overhead.scale_up(spec.n, spec.k, overhead.DEFAULT_KQ)
            assert round(limit) == overhead.TABLE1_REFERENCE[spec.name][3], spec.name

    def test_single_block_machine_is_four_times_limit(self):
        s, limit = overhead.scale_up(127, 29, 29)
        assert s == pytest.approx(4 * limit)

    def test_large_computation_approaches_limit(self):
        s, limit = overhead.scale_up(127, 29, 1e18)
        assert s == pytest.approx(limit, rel=1e-12)

    def test_alternative_accumulator_sizing(self):
        n, k, K = 127, 29, 2.15e12
        s, limit = overhead.scale_up(n, k, K, accumulator_blocks=K / (4 * k))
        assert s == pytest.approx(limit * 1.25)

    def test_invalid_arguments(self):
        with pytest.raises(InvalidParameters):
            overhead.scale_up(127, 0, 1e6)
        with pytest.raises(InvalidParameters):
            overhead.scale_up(127, 29, 5)
        with pytest.raises(InvalidParameters):
            overhead.scale_up(127, 29, 1e6, accumulator_blocks=-1)


class TestErrorOpportunities:
    def test_frozen_counts_for_all_reference_codes(self):
        for name, (g_exp, s_exp, *_rest) in TABLE_ORACLE.items():
            g, s = overhead.error_opportunities(params_for(name))
            assert g == g_exp, name
            assert s == pytest.approx(s_exp, abs=1e-9), name

    def test_explicit_arithmetic_for_main_row(self):
        g, s = overhead.error_opportunities(params_for("[[127,29,15]]"))
        assert g == 127 * (4 * 8 + 1) == 4191
        assert s == 127 * (66 * 49 + 17 * 29 + 127 * 6) == 570103

    def test_half_integral_waiting_count(self):
        _, s = overhead.error_opportunities(params_for("[[127,43,13]]"))
        assert s == 522668.5 and s != int(s)

    def test_no_repetitions_leaves_one_gate_per_qubit(self):
        g, _ = overhead.error_opportunities(params_for("[[127,29,15]]", r=0))
        assert g == 127

    def test_mean_pattern_weight_override(self):
        base = overhead.error_opportunities(params_for("[[127,29,15]]"))[1]
        explicit = overhead.error_opportunities(
            params_for("[[127,29,15]]", mean_D_weight=16.0))[1]
        heavier = overhead.error_opportunities(
            params_for("[[127,29,15]]", mean_D_weight=20.0))[1]
        assert explicit == base
        assert heavier == base + 127 * 4 * 29


class TestFailureProbability:
    def test_zero_rates_give_zero(self):
        assert overhead.failure_probability(params_for("[[127,29,15]]")) == 0.0

    def test_single_opportunity_closed_form(self):
        # n=1, k=1, d=1, r=0 collapses to one opportunity and a
        # five-step memory exposure (s = 3 + 2).
        params = OverheadParams(n=1, k=1, d=1, w=0.0, r=0, K=10, Q=10)
        g, s = overhead.error_opportunities(params)
        assert (g, s) == (1, 5.0)
        gamma, eps = 1e-3, 2e-4
        expected = 2 * (2 * gamma / 3 + 5.0 * 2 * eps / 3)
        got = overhead.failure_probability(params, gamma=gamma, epsilon=eps)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_main_row_value(self):
        p = overhead.failure_probability(params_for("[[127,29,15]]"), gamma=2e-5)
        assert p == pytest.approx(1.606485e-12, rel=1e-4)  # ORACLE
        assert 1.0e-12 <= p <= 2.5e-12
        assert abs(p - 1.686047e-12) <= 0.25 * 1.686047e-12

    def test_tiny_rate_is_positive_and_finite(self):
        p = overhead.failure_probability(params_for("[[127,29,15]]"), gamma=1e-12)
        assert 0.0 < p < 1e-60 and math.isfinite(p)

    def test_saturates_instead_of_overflowing(self):
        p = overhead.failure_probability_from_counts(4000, 4000 * 200.0, 3, 0.5, 0.5)
        assert math.isinf(p)

    def test_rate_validation(self):
        with pytest.raises(InvalidParameters):
            overhead.failure_probability_from_counts(10, 10.0, 1, -0.1, 0.0)
        with pytest.raises(InvalidParameters):
            overhead.failure_probability_from_counts(0, 10.0, 1, 0.1, 0.0)
        with pytest.raises(InvalidParameters):
            overhead.failure_probability(params_for("[[127,29,15]]"), gamma=1.5)


class TestPlim:
    def test_reference_budgets(self):
        assert overhead.plim(29, 2.15e12, 1.0) == pytest.approx(1.686047e-12, rel=1e-6)
        assert overhead.plim(1, 2.15e12, 1.0) == pytest.approx(5.813953e-14, rel=1e-6)
        assert overhead.plim(143, 2.15e12, 1.0) == pytest.approx(8.313953e-12, rel=1e-6)

    def test_budget_product_inverts_exactly(self):
        for k in (1, 5, 27, 29, 43, 143):
            kq = 2.15e12
            assert overhead.plim(k, kq, 1.0) * (8 * kq / k) == pytest.approx(1.0, rel=1e-14)
            # The algebraic identity is exact over the rationals.
            assert Fraction(k) / (8 * Fraction(kq)) * (8 * Fraction(kq) / k) == 1

    def test_splitting_the_product_does_not_matter(self):
        assert overhead.plim(29, 2150.0, 1.0e9) == pytest.approx(
            overhead.plim(29, 2.15e12, 1.0), rel=1e-12)

    def test_validation(self):
        with pytest.raises(InvalidParameters):
            overhead.plim(0, 10.0, 10.0)
        with pytest.raises(InvalidParameters):
            overhead.plim(1, 0.5, 10.0)


class TestSolveGammaMax:
    def test_matches_oracle_for_all_rows(self):
        for name, (_, _, _, gamma_exp, eps_exp) in TABLE_ORACLE.items():
            gamma_max, eps_max = overhead.solve_gamma_max(params_for(name))
            assert gamma_max == pytest.approx(gamma_exp, rel=1e-3), name
            assert eps_max == pytest.approx(eps_exp, rel=1e-3), name
            assert eps_max == pytest.approx(gamma_max / SPECS[name].n)

    def test_within_forty_percent_of_printed_columns(self):
        for spec in overhead.TABLE1_CODES:
            _, ref_gamma, ref_eps, _ = overhead.TABLE1_REFERENCE[spec.name]
            gamma_max, eps_max = overhead.solve_gamma_max(params_for(spec.name))
            assert abs(gamma_max / 1e-6 - ref_gamma) <= 0.40 * ref_gamma, spec.name
            assert abs(eps_max / 1e-6 - ref_eps) <= 0.40 * ref_eps, spec.name

    def test_main_row_within_thirty_percent(self):
        gamma_max, _ = overhead.solve_gamma_max(params_for("[[127,29,15]]"))
        assert abs(gamma_max - 20e-6) <= 0.30 * 20e-6

    def test_round_trip_to_budget(self):
        for name in TABLE_ORACLE:
            params = params_for(name)
            gamma_max, _ = overhead.solve_gamma_max(params)
            p = overhead.failure_probability(params, gamma=gamma_max)
            budget = overhead.plim(params.k, params.K, params.Q)
            assert abs(p - budget) / budget <= 1e-5, name

    def test_harder_computation_scales_distance15_rates_by_a_third(self):
        for name in ("[[99,5,15]]", "[[127,29,15]]", "[[255,143,15]]", "[[79,1,15]]"):
            base, _ = overhead.solve_gamma_max(params_for(name))
            scaled, _ = overhead.solve_gamma_max(
                params_for(name, K=overhead.DEFAULT_KQ * 3 ** 8))
            assert 0.32 <= scaled / base <= 0.35, name

    def test_trivial_code_solves_exactly(self):
        # One opportunity, s = 5, epsilon = gamma: P = 8*gamma, budget 1/8.
        params = OverheadParams(n=1, k=1, d=1, w=0.0, r=0, K=1, Q=1, epsilon_ratio=1.0)
        gamma_max, eps_max = overhead.solve_gamma_max(params)
        assert gamma_max == pytest.approx(1 / 64, rel=1e-5)
        assert eps_max == pytest.approx(gamma_max)

    def test_infeasible_budget_raises(self):
        with pytest.raises(Infeasible):
            overhead.solve_gamma_max(params_for("[[47,1,11]]", K=1e60))


class TestAncillaSufficiency:
    def test_closed_form_127(self):
        report = overhead.ancilla_sufficiency(params_for("[[127,29,15]]"), gamma=2e-5)
        assert report.closed_form == pytest.approx(32 * 127 * 8 * 2e-5 / 3)
        assert report.closed_form == pytest.approx(0.216747, rel=1e-4)  # ORACLE
        assert report.full_sum == pytest.approx(0.245389, rel=1e-3)  # ORACLE
        assert report.variants_disagree
        assert report.relative_gap == pytest.approx(0.1167, abs=0.01)
        assert report.sufficient  # 0.245 <= 2/7

    def test_closed_form_255(self):
        report = overhead.ancilla_sufficiency(params_for("[[255,143,15]]"), gamma=1.1e-5)
        assert report.closed_form == pytest.approx(0.239360, rel=1e-4)  # ORACLE
        assert report.full_sum == pytest.approx(0.310098, rel=1e-3)  # ORACLE
        assert report.variants_disagree
        assert not report.sufficient  # 0.310 > 2/7

    def test_reducing_the_rate_restores_sufficiency(self):
        report = overhead.ancilla_sufficiency(params_for("[[255,143,15]]"), gamma=1.0e-5)
        assert report.full_sum == pytest.approx(0.280024, rel=1e-3)  # ORACLE
        assert report.sufficient

    def test_within_published_tolerance_and_flagged(self):
        # PRINTED duty factors 0.25 and 0.31 for the two largest rows.
        for name, gamma, printed in (("[[127,29,15]]", 2e-5, 0.25),
                                     ("[[255,143,15]]", 1.1e-5, 0.31)):
            report = overhead.ancilla_sufficiency(params_for(name), gamma=gamma)
            assert abs(report.closed_form - printed) <= 0.35 * printed, name
            assert report.variants_disagree, name
            assert abs(report.full_sum - printed) <= 0.02 * printed, name

    def test_zero_rate(self):
        report = overhead.ancilla_sufficiency(params_for("[[127,29,15]]"), gamma=0.0)
        assert report.closed_form == report.full_sum == 0.0
        assert not report.variants_disagree
        assert report.sufficient


class TestDoubleFailureCheck:
    def test_reported_consistency_at_solved_rate(self):
        params = params_for("[[127,29,15]]")
        gamma_max, _ = overhead.solve_gamma_max(params)
        check = overhead.double_failure_check(params, gamma=gamma_max)
        p = overhead.failure_probability(params, gamma=gamma_max)
        assert check.accumulation_probability == pytest.approx(2 ** 8 * p)
        assert check.wrong_syndrome_bound == 2.0 ** -8
        assert check.combined_rate == pytest.approx(p)
        assert check.below_budget

    def test_violated_bound_is_reported_not_hidden(self):
        params = params_for("[[127,29,15]]")
        check = overhead.double_failure_check(
            params, gamma=2e-5, wrong_syndrome_probability=0.5)
        assert not check.below_budget


class TestGateCountCrossCheck:
    def test_explicit_tally_for_main_row(self):
        s_alt = overhead.s_from_gate_counts(params_for("[[127,29,15]]"))
        assert s_alt == 127 * (64 * 49 + (64 * 49 + 16 * 29) + 127 * 6) == 952246

    def test_same_order_of_magnitude_as_closed_form(self):
        for name in TABLE_ORACLE:
            params = params_for(name)
            _, s = overhead.error_opportunities(params)
            ratio = overhead.s_from_gate_counts(params) / s
            assert 0.5 <= ratio <= 3.0, name


class TestRotationSynthesis:
    def test_base_case(self):
        phi = overhead.rotation_synthesis(math.pi / 2)
        assert math.cos(phi) == pytest.approx(3 / 5)
        assert phi == pytest.approx(math.acos(overhead.ROTATION_BASE_COSINE))
        assert overhead.ROTATION_BASE_COSINE == 0.6

    def test_endpoints(self):
        assert overhead.rotation_synthesis(0.0) == pytest.approx(0.0, abs=1e-7)
        assert overhead.rotation_synthesis(math.pi) == pytest.approx(math.pi)

    def test_monotone_on_half_turn(self):
        angles = [overhead.rotation_synthesis(a / 50 * math.pi) for a in range(51)]
        assert all(b > a for a, b in zip(angles, angles[1:]))


class TestEvaluate:
    def test_report_at_solved_operating_point(self):
        report = overhead.evaluate(params_for("[[127,29,15]]"))
        g_exp, s_exp, plim_exp, gamma_exp, eps_exp = TABLE_ORACLE["[[127,29,15]]"]
        assert report.g == g_exp and report.s == s_exp
        assert report.Plim == pytest.approx(plim_exp, rel=1e-6)
        assert report.gamma_max == pytest.approx(gamma_exp, rel=1e-3)
        assert report.epsilon_max == pytest.approx(eps_exp, rel=1e-3)
        assert abs(report.P - report.Plim) / report.Plim <= 1e-5
        assert report.feasible
        assert report.P1 == report.ancilla.closed_form
        assert report.double_failure.below_budget
        assert report.s_gate_count == 952246
        assert round(report.scale_up_limit) == 22

    def test_scale_up_uses_actual_computation_size(self):
        report = overhead.evaluate(params_for("[[127,29,15]]", K=2150.0, Q=1.0e9))
        limit = (5 * 127 + 4) / 29
        assert report.S == pytest.approx(limit * (1 + 3 * 29 / 2150.0))
        assert report.scale_up_limit == pytest.approx(limit)

    def test_explicit_rate_above_budget_is_infeasible(self):
        report = overhead.evaluate(params_for("[[127,29,15]]", gamma=1e-3))
        assert not report.feasible
        assert report.gamma == 1e-3
        assert report.P > report.Plim
        assert math.isfinite(report.gamma_max)

    def test_unreachable_budget_reports_nan_rate(self):
        report = overhead.evaluate(params_for("[[47,1,11]]", K=1e60))
        assert not report.feasible
        assert math.isnan(report.gamma_max)


@pytest.fixture(scope="module")
def table():
    return overhead.table1()


class TestNoiseTable:
    def test_row_identities(self, table):
        assert [row.code for row in table.rows] == [s.name for s in overhead.TABLE1_CODES]
        assert all(row.feasible for row in table.rows)

    def test_scaleup_column_rounds_to_printed_integers(self, table):
        assert [round(row.scaleup) for row in table.rows] == [100, 22, 9, 15, 12, 239, 399]

    def test_budget_column_matches_printed_significant_figures(self, table):
        printed = [29.0, 169.0, 831.0, 250.0, 157.0, 5.8, 5.8]
        for row, ref in zip(table.rows, printed):
            sig = overhead._sig_figs_of(ref)
            assert overhead.round_to_sig_figs(row.plim / 1e-14, sig) == ref, row.code

    def test_compare_with_reference_all_within(self, table):
        results = overhead.compare_with_reference(table)
        assert len(results) == 28
        assert all(entry["within"] for entry in results), [
            e for e in results if not e["within"]]
        assert all(entry["provenance"] == overhead.REFERENCE_PROVENANCE
                   for entry in results)

    def test_csv_layout_and_determinism(self, table):
        csv = table.to_csv()
        lines = csv.splitlines()
        assert lines[0] == "code,P (10^-14),gamma (10^-6),epsilon (10^-6),(5n+4)/k"
        assert len(lines) == 8 and csv.endswith("\n")
        assert lines[2].startswith("[[127,29,15]],168.6,20.1")
        rebuilt = overhead.table1()
        assert rebuilt.to_csv() == csv
        assert rebuilt.to_json() == table.to_json()

    def test_json_schema(self, table):
        payload = json.loads(table.to_json())
        assert payload["kq"] == 2.15e12
        assert len(payload["rows"]) == 7
        for row in payload["rows"]:
            assert tuple(row.keys()) == ("code", "n", "k", "d", "w", "plim",
                                         "gamma_max", "epsilon_max", "scaleup",
                                         "p1", "feasible")
        main = payload["rows"][1]
        assert main["code"] == "[[127,29,15]]"
        assert main["gamma_max"] == pytest.approx(2.012101e-05, rel=1e-3)
        assert main["p1"] > 0 and main["feasible"] is True

    def test_empty_input(self):
        table = overhead.table1(codes=())
        assert table.rows == ()
        assert table.to_csv() == "code,P (10^-14),gamma (10^-6),epsilon (10^-6),(5n+4)/k\n"

    def test_accepts_bare_parameter_tuples(self):
        table = overhead.table1(codes=[(7, 1, 3, 4.0)])
        row = table.rows[0]
        assert row.code == "[[7,1,3]]" and row.feasible and row.gamma_max > 0

    def test_infeasible_row_marked_without_failing_the_run(self):
        table = overhead.table1(
            codes=[overhead.CodeSpec("[[47,1,11]]", 47, 1, 11, 12.0)], KQ=1e60)
        row = table.rows[0]
        assert not row.feasible
        assert row.gamma_max is None and row.epsilon_max is None and row.p1 is None
        assert table.to_csv().splitlines()[1] == "[[47,1,11]],1.25e-47,-,-,239"
        assert json.loads(table.to_json())["rows"][0]["gamma_max"] is None

    def test_scaled_up_computation_keeps_distance15_rows_feasible(self, table):
        scaled = overhead.table1(KQ=overhead.DEFAULT_KQ * 3 ** 8)
        for base_row, scaled_row in zip(table.rows, scaled.rows):
            if base_row.d != 15:
                continue
            assert scaled_row.feasible, base_row.code
            assert 0.32 <= scaled_row.gamma_max / base_row.gamma_max <= 0.35


class TestMonotonicityGrid:
    def test_property_grid(self):
        from property_suites import run_overhead_monotonicity_grid

        assert run_overhead_monotonicity_grid(100) == 100
