from fractions import Fraction

import pytest

from strahler import asymptotics as asym
from strahler.expectations import ExpectationEngine
from strahler.observables import parse


@pytest.fixture(scope="module")
def engine():
    return ExpectationEngine()


def test_laurent_examples():
    assert asym.laurent_at_infinity(parse("S1^2")) == asym.AsymptoticCoeffs(
        2, Fraction(1), Fraction(0)
    )
    assert asym.laurent_at_infinity(parse("S1*(S1-1)")) == asym.AsymptoticCoeffs(
        2, Fraction(1), Fraction(-1)
    )
    assert asym.laurent_at_infinity(
        parse("(S1-1)/(2*(2*S1-3))")
    ) == asym.AsymptoticCoeffs(0, Fraction(1, 4), Fraction(1, 8))


def test_laurent_negative_dominant_order():
    coeffs = asym.laurent_at_infinity(parse("1/S1"))
    assert (coeffs.k, coeffs.a1, coeffs.b1) == (-1, 1, 0)


def test_laurent_rejects_zero_numerator():
    with pytest.raises(ValueError):
        asym.laurent_at_infinity(parse("0"))


def test_zero_leading_coefficient_rejected():
    with pytest.raises(ValueError):
        asym.AsymptoticCoeffs(1, Fraction(0), Fraction(1))


MOON = asym.AsymptoticCoeffs(k=1, a1=Fraction(1), b1=Fraction(0))


def test_coeff_recursion_examples():
    assert asym.coeff_recursion(MOON, 2) == asym.OrderCoeffs(
        2, Fraction(1, 4), Fraction(1, 8)
    )
    assert asym.coeff_recursion(MOON, 1) == asym.OrderCoeffs(1, Fraction(1), Fraction(0))


def test_coeff_recursion_shifted_initial_order():
    init = asym.AsymptoticCoeffs(k=1, a1=Fraction(1, 16), b1=Fraction(-1, 32), r0=2)
    coeffs = asym.coeff_recursion(init, 3)
    assert coeffs.a_r == Fraction(1, 64)
    assert coeffs.b_r == Fraction(-1, 32) + Fraction(1, 16) * Fraction(3, 24)
    with pytest.raises(ValueError):
        asym.coeff_recursion(init, 1)


def test_leading_coefficient_invariant():
    for k in (0, 1, 2, 3):
        init = asym.AsymptoticCoeffs(k=k, a1=Fraction(5, 3), b1=Fraction(2, 7))
        for r in range(1, 13):
            coeffs = asym.coeff_recursion(init, r)
            assert coeffs.a_r * Fraction(4) ** (k * (r - 1)) == init.a1


def test_general_recurrence_note_reproduces_b():
    for k in (1, 2, 3):
        init = asym.AsymptoticCoeffs(k=k, a1=Fraction(3, 7), b1=Fraction(-2, 5))
        s = Fraction(1, 4 ** (k - 1))
        t = Fraction(k * k) * init.a1 / 2
        u = Fraction(1, 4**k)
        for r in range(1, 13):
            closed = asym.general_recurrence_closed_form(init.b1, s, t, u, r)
            assert closed == asym.coeff_recursion(init, r).b_r


def test_general_recurrence_guards_degenerate_ratio():
    with pytest.raises(ValueError):
        asym.general_recurrence_closed_form(
            Fraction(1), Fraction(1, 4), Fraction(1), Fraction(1, 4), 3
        )


def test_expectation_asymptotic_examples():
    assert asym.expectation_asymptotic(MOON, 2, 100) == Fraction(201, 8)
    # Zero iterations: plain two-term polynomial.
    init = asym.AsymptoticCoeffs(k=2, a1=Fraction(3), b1=Fraction(-1, 2))
    for n in (5, 40):
        assert asym.expectation_asymptotic(init, 1, n) == 3 * n**2 - Fraction(n, 2)
    ex3 = asym.AsymptoticCoeffs(k=0, a1=Fraction(1, 4), b1=Fraction(1, 8))
    assert asym.expectation_asymptotic(ex3, 2, 100) == Fraction(1, 4) + Fraction(1, 200)


def test_expectation_asymptotic_matches_order_coeffs():
    for k in (0, 1, 2):
        init = asym.AsymptoticCoeffs(k=k, a1=Fraction(2, 9), b1=Fraction(1, 3))
        for r in (1, 2, 3, 5):
            coeffs = asym.coeff_recursion(init, r)
            for n in (4, 25, 250):
                expansion = asym.expectation_asymptotic(init, r, n)
                direct = coeffs.a_r * Fraction(n) ** k + coeffs.b_r * Fraction(n) ** (
                    k - 1
                )
                assert expansion == direct


def test_expectation_asymptotic_leading_truncation():
    assert asym.expectation_asymptotic(MOON, 3, 80, leading_only=True) == Fraction(5)


def test_ratio_asymptotic_examples():
    value = asym.ratio_asymptotic(MOON, 1, 1000)
    assert value.value == Fraction(3998, 1000)
    assert value.limit == 4
    sq = asym.AsymptoticCoeffs(k=2, a1=Fraction(1), b1=Fraction(0))
    value = asym.ratio_asymptotic(sq, 1, 1000)
    assert value.value == 16 - Fraction(16 * 4, 2000)
    assert value.limit == 16
    inv = asym.AsymptoticCoeffs(k=-1, a1=Fraction(2), b1=Fraction(1))
    assert asym.ratio_asymptotic(inv, 1, 50).limit == Fraction(1, 4)


def test_ratio_matches_moon_horton_form():
    for r in (1, 2, 3):
        for n in (100, 1000):
            value = asym.ratio_asymptotic(MOON, r, n)
            assert value.value == 4 - Fraction(4**r, 2 * n)


def test_multivariable_ratio_expansion_matches_engine(engine):
    # Two-variable initial data (k=0, 1/4, 1/8) pushed one order up must track
    # the exact values of E[S3/S2] with an O(n^-2) remainder; this is the
    # empirical check of the multivariable expansion claim.
    init = asym.AsymptoticCoeffs(k=0, a1=Fraction(1, 4), b1=Fraction(1, 8))
    ratio = parse("S2/S1")
    for r in (2, 3):
        assert asym.expectation_asymptotic(init, r, 300) == Fraction(1, 4) + Fraction(
            4 ** (r - 2), 600
        )
        residuals = []
        for n in (150, 300):
            predicted = asym.expectation_asymptotic(init, r, n)
            exact = engine.expectation_exact(n, r, ratio)
            residuals.append(abs(float(exact - predicted)))
        # Doubling n should shrink the remainder about 4x.
        assert 2.5 <= residuals[0] / residuals[1] <= 6.0


def test_fit_initial_coeffs_recovers_ratio_data(engine):
    fitted = asym.fit_initial_coeffs(engine, parse("S2/S1"), ns=(120, 200, 300))
    assert fitted.k == 0
    assert abs(float(fitted.a1) - 0.25) < 1e-3
    assert abs(float(fitted.b1) - 0.125) < 0.05


def test_convergence_report_ratio_slope(engine):
    report = asym.convergence_report(
        engine, parse("S1"), 1, [50, 100, 200, 300], kind="ratio"
    )
    assert report.fitted_slope is not None
    assert report.fitted_slope <= -1.7
    assert report.slope_ok


def test_convergence_report_expectation_slope(engine):
    report = asym.convergence_report(engine, parse("S1"), 2, [50, 100, 200, 300])
    assert report.fitted_slope is not None
    assert report.fitted_slope <= 1 - 2 + 0.3
    assert report.slope_ok


def test_convergence_report_constant_observable(engine):
    report = asym.convergence_report(engine, parse("1"), 2, [10, 20, 40])
    assert report.converged
    assert report.fitted_slope is None
    assert report.slope_ok
    assert all(row.residual == 0 for row in report.rows)


def test_variance_pipeline_report(engine):
    report = asym.variance_pipeline_report(engine, [50, 100, 150])
    assert report.pipeline_a == Fraction(1, 64)
    assert report.total_variance_a == Fraction(5, 256)
    assert report.supported == "total_variance"
    assert report.max_rel_residual < 0.05
