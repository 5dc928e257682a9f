from fractions import Fraction
import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ordcalc import orderings as o
from ordcalc.errors import NonScalarDifference, VerificationFailure
from ordcalc.fock import FockConfig
from ordcalc.gwt import (
    bch_contraction, bch_three_step, bch_three_step_trace, general_contraction,
    pq_to_normal_contraction, reorder_exponential,
)
from ordcalc.orderings import (
    ANTINORMAL, NORMAL, PQ, QP, LinearForm, NormalPolynomial, Ordering, OrderingKind,
    gaussian_rational,
)

import oracles

ORDERINGS = [PQ, QP, NORMAL, ANTINORMAL]
coeff = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)
disc = st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False)
fractions = st.fractions(min_value=-3, max_value=3, max_denominator=20)


def exact(z):
    return gaussian_rational(Fraction(z.real), Fraction(z.imag))


def test_pq_to_normal_examples():
    assert general_contraction(PQ, NORMAL, LinearForm.unraveling(1, 1)).value == pytest.approx(0.5)
    assert general_contraction(PQ, NORMAL, LinearForm.unraveling(1 + 1j, 1)).value == pytest.approx(1 - 1j)
    assert general_contraction(NORMAL, NORMAL, LinearForm.unraveling(1, 1)).value == 0


@given(fractions, fractions, st.sampled_from([1, -1]))
def test_exact_contraction_matches_closed_form(x, y, sign):
    z = gaussian_rational(x, y)
    C = general_contraction(PQ, NORMAL, LinearForm.unraveling(z, sign))
    assert C.exact is not None
    zc = gaussian_rational(x, -y)
    quarter = gaussian_rational(Fraction(1, 4))
    want = (zc * zc - z * z) * quarter + gaussian_rational((x * x + y * y) * sign / 2)
    assert not (C.exact - want)


@given(disc, st.sampled_from([1, -1]))
def test_float_contraction_matches_closed_form(z, sign):
    C = general_contraction(PQ, NORMAL, LinearForm.unraveling(z, sign))
    assert abs(C.value - pq_to_normal_contraction(z, sign).value) <= 1e-14


@given(st.sampled_from(ORDERINGS), st.sampled_from(ORDERINGS), coeff, coeff)
def test_contraction_is_antisymmetric(first, second, alpha, beta):
    X = LinearForm(alpha, beta)
    assert general_contraction(first, second, X).value == pytest.approx(
        -general_contraction(second, first, X).value, abs=1e-12)


@given(st.sampled_from(ORDERINGS), st.sampled_from(ORDERINGS), st.sampled_from(ORDERINGS), coeff, coeff)
def test_contractions_chain(first, mid, last, alpha, beta):
    X = LinearForm(alpha, beta)
    total = general_contraction(first, mid, X).value + general_contraction(mid, last, X).value
    assert total == pytest.approx(general_contraction(first, last, X).value, abs=1e-12)


@given(st.sampled_from(ORDERINGS), st.sampled_from(ORDERINGS), coeff, coeff, coeff)
def test_contraction_is_quadratic_in_the_form(first, second, alpha, beta, t):
    base = general_contraction(first, second, LinearForm(alpha, beta)).value
    scaled = general_contraction(first, second, LinearForm(alpha * t, beta * t)).value
    assert scaled == pytest.approx(t * t * base, abs=1e-12)


def test_weyl_contraction_from_custom_table():
    weyl = OrderingKind.custom(o.Q2, o.P2, o.ANTICOMMUTATOR_HALF, name="weyl")
    X = LinearForm(gaussian_rational(2), gaussian_rational(3))
    # p q - (pq + qp)/2 = -i/2, times 2 alpha beta / 2
    assert general_contraction(PQ, weyl, X).value == pytest.approx(-3j)


def test_malformed_table_raises_non_scalar_difference():
    broken = OrderingKind(Ordering.PQ, o.Q2 + NormalPolynomial.adag() * NormalPolynomial.a(),
                          o.P2, o.PQ_PRODUCT, name="broken")
    with pytest.raises(NonScalarDifference) as err:
        general_contraction(broken, NORMAL, LinearForm(1, 0))
    assert not err.value.residue.is_scalar()


@pytest.mark.parametrize("z", [0.5, 0.3 - 0.8j])
def test_reorder_exponential_pq_to_normal(z):
    cfg = FockConfig(40, 12)
    X = LinearForm.unraveling(z, 1)
    C, report = reorder_exponential(PQ, NORMAL, X, cfg)
    assert report.passed and report.residual < 1e-9
    back, report2 = reorder_exponential(NORMAL, PQ, X, cfg)
    assert back.value == pytest.approx(-C.value)
    assert report2.residual < 1e-9


def test_reorder_exponential_matches_taylor_oracle():
    z = 0.7 + 0.4j
    X = LinearForm.unraveling(z, -1)
    C = general_contraction(PQ, NORMAL, X)
    lhs = oracles.pq_ordered_exp(complex(X.alpha), complex(X.beta), 40)
    rhs = oracles.normal_ordered_exp(complex(X.alpha), complex(X.beta), 40)
    assert np.linalg.norm(lhs[:12, :12] - C.prefactor * rhs[:12, :12]) < 1e-9


@pytest.mark.parametrize("first,second", [(QP, NORMAL), (ANTINORMAL, PQ), (QP, ANTINORMAL)])
def test_reorder_exponential_other_pairs(first, second):
    _, report = reorder_exponential(first, second, LinearForm(0.4 - 0.2j, 0.3 + 0.5j), FockConfig(40, 12))
    assert report.residual < 1e-9


def test_reorder_exponential_reports_failure():
    with pytest.raises(VerificationFailure) as err:
        reorder_exponential(PQ, NORMAL, LinearForm.unraveling(0.9, 1), FockConfig(40, 12), tolerance=1e-30)
    assert err.value.residual > err.value.tolerance


def test_bch_single_term():
    assert bch_three_step(1, 0) == pytest.approx(0.25)
    assert bch_three_step(0, 1) == pytest.approx(0.25)


@given(coeff, coeff)
def test_bch_matches_closed_form(alpha, beta):
    assert bch_three_step(alpha, beta) == pytest.approx(
        (alpha ** 2 + beta ** 2) / 4 - 0.5j * alpha * beta, abs=1e-13)


def test_bch_steps_are_logged(caplog):
    a, b = 0.5, 0.25j
    with caplog.at_level(logging.DEBUG, logger="ordcalc.gwt"):
        steps = bch_three_step_trace(a, b)
    assert [s.scalar for s in steps] == pytest.approx([b * b / 4, a * a / 4, -0.5j * a * b])
    assert sum("BCH step" in r.message for r in caplog.records) == 3


@given(st.sampled_from(ORDERINGS), st.sampled_from(ORDERINGS), coeff, coeff)
def test_bch_route_agrees_for_every_pair(first, second, alpha, beta):
    X = LinearForm(alpha, beta)
    assert bch_contraction(first, second, X) == pytest.approx(
        general_contraction(first, second, X).value, abs=1e-12)


def test_prefactor_is_exponential_of_value():
    C = pq_to_normal_contraction(0.2 + 0.1j, -1)
    assert C.prefactor == pytest.approx(np.exp(C.value))
    with pytest.raises(ValueError):
        pq_to_normal_contraction(1, 0)
