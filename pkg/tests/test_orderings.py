from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ordcalc import orderings as o
from ordcalc.errors import ConvergenceError, OrderingError
from ordcalc.fock import FockConfig
from ordcalc.orderings import (
    ANTINORMAL, NORMAL, PQ, QP, LinearForm, NormalPolynomial, OrderingKind,
    gaussian_rational, ordered_exp_linear, ordered_exp_pq_bilinear,
)

import oracles

a, ad = NormalPolynomial.a(), NormalPolynomial.adag()
HALF = gaussian_rational(Fraction(1, 2))

small_ints = st.integers(-3, 3)
monomials = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), small_ints, max_size=4)


def poly(d):
    return NormalPolynomial(d)


def test_canonical_commutator():
    assert a * ad == ad * a + 1
    assert a * ad - ad * a == NormalPolynomial.constant(1)


def test_reordering_of_higher_powers():
    # a^2 a_dag^2 = a_dag^2 a^2 + 4 a_dag a + 2
    assert a * a * ad * ad == poly({(2, 2): 1, (1, 1): 4, (0, 0): 2})
    assert (a ** 2) * (ad ** 2) == a * a * ad * ad


def test_zero_coefficients_are_dropped():
    assert len(ad * a - ad * a) == 0
    assert poly({(1, 1): 0, (0, 0): 3}).terms == {(0, 0): 3}
    with pytest.raises(ValueError):
        poly({(-1, 0): 1})


def test_scalar_queries():
    p = poly({(0, 0): 5, (1, 0): 2})
    assert not p.is_scalar()
    assert p.scalar_part() == 5
    assert p.non_scalar_part() == poly({(1, 0): 2})
    assert p.degree == 1
    assert NormalPolynomial.constant(3).is_scalar()


def test_formatting_shows_exact_fractions():
    text = str(o.QP_PRODUCT)
    assert "i" in text and "1/2" in text
    assert repr(a * ad) == "NormalPolynomial(a† a + 1)"


@given(monomials, monomials, monomials)
def test_multiplication_is_associative(x, y, z):
    x, y, z = poly(x), poly(y), poly(z)
    assert (x * y) * z == x * (y * z)


@given(monomials, monomials, monomials)
def test_multiplication_distributes(x, y, z):
    x, y, z = poly(x), poly(y), poly(z)
    assert x * (y + z) == x * y + x * z


@given(monomials, monomials)
def test_evaluation_is_a_homomorphism_on_trusted_block(x, y):
    cfg = FockConfig(24, 8)
    x, y = poly(x), poly(y)
    lhs = (x * y).evaluate(cfg)
    rhs = x.evaluate(cfg) @ y.evaluate(cfg)
    assert lhs.residual(rhs) < 1e-10


def test_exact_moment_tables_against_matrices():
    cfg = FockConfig(30, 10)
    q, p = oracles.quadratures(30)
    cases = {
        "q2": (o.Q2, q @ q), "p2": (o.P2, p @ p),
        "qp": (o.QP_PRODUCT, q @ p), "pq": (o.PQ_PRODUCT, p @ q),
        "sym": (o.ANTICOMMUTATOR_HALF, (q @ p + p @ q) / 2),
    }
    for name, (exact, mat) in cases.items():
        assert exact.is_exact, name
        assert np.abs(exact.evaluate(cfg).block() - mat[:10, :10]).max() < 1e-13, name


def test_float_polynomials_match_exact_ones():
    q = NormalPolynomial.q()
    assert (q * q).allclose(o.Q2.to_complex())


def test_ordering_tables_differ_from_normal_by_scalars():
    for ordering, offsets in [(PQ, (HALF, HALF, -HALF * o._I)), (QP, (HALF, HALF, HALF * o._I)),
                              (ANTINORMAL, (1, 1, 0)), (NORMAL, (0, 0, 0))]:
        got = (ordering.q2 - NORMAL.q2, ordering.p2 - NORMAL.p2, ordering.qp - NORMAL.qp)
        for diff, want in zip(got, offsets):
            assert diff.is_scalar()
            assert diff == NormalPolynomial.constant(want), ordering.name


def test_custom_ordering_validation():
    weyl = OrderingKind.custom(o.Q2, o.P2, o.ANTICOMMUTATOR_HALF, name="weyl")
    assert not weyl.realizable
    with pytest.raises(OrderingError):
        OrderingKind.custom(o.Q2 + ad * a, o.P2, o.ANTICOMMUTATOR_HALF)
    with pytest.raises(OrderingError):
        ordered_exp_linear(weyl, LinearForm(1, 0), FockConfig(10))


def test_from_name():
    assert OrderingKind.from_name("PQ") is PQ
    assert OrderingKind.from_name("anti-normal") is ANTINORMAL
    with pytest.raises(OrderingError):
        OrderingKind.from_name("weyl")


def test_ordered_square_is_exact_for_exact_input():
    X = LinearForm(gaussian_rational(1, 2), 3)
    sq = o.ordered_square(PQ, X)
    assert sq.is_exact
    assert o.ordered_square(PQ, LinearForm(1, 0)) == o.Q2


def test_linear_form_ladder_coefficients():
    X = LinearForm(0.3 - 0.1j, 0.7j)
    lp, lm = X.ladder
    assert lp == pytest.approx((X.alpha + 1j * X.beta) / math.sqrt(2))
    assert lm == pytest.approx((X.alpha - 1j * X.beta) / math.sqrt(2))
    assert X.polynomial().allclose(NormalPolynomial.q() * X.alpha + NormalPolynomial.p() * X.beta)
    with pytest.raises(ValueError):
        LinearForm(float("nan"), 0)


def test_unraveling_form():
    z = 0.4 + 0.9j
    X = LinearForm.unraveling(z, -1)
    assert X.alpha == pytest.approx(-z.conjugate())
    assert X.beta == pytest.approx(1j * z)


@pytest.mark.parametrize("ordering,build", [
    (PQ, lambda al, be, n: oracles.pq_ordered_exp(al, be, n)),
    (NORMAL, lambda al, be, n: oracles.normal_ordered_exp(al, be, n)),
])
def test_ordered_exponential_against_taylor_oracle(ordering, build):
    alpha, beta = 0.5 - 0.3j, -0.2 + 0.6j
    cfg = FockConfig(30, 10)
    got = ordered_exp_linear(ordering, LinearForm(alpha, beta), cfg)
    assert np.abs(got.block() - build(alpha, beta, 30)[:10, :10]).max() < 1e-11


def test_qp_and_antinormal_exponentials_against_taylor_oracle():
    alpha, beta = 0.4 + 0.2j, -0.3j
    n, pad = 30, 120
    q, p = oracles.quadratures(n + pad)
    qp = (oracles.taylor_expm(alpha * q) @ oracles.taylor_expm(beta * p))[:10, :10]
    cfg = FockConfig(n, 10)
    assert np.abs(ordered_exp_linear(QP, LinearForm(alpha, beta), cfg).block() - qp).max() < 1e-11
    A = oracles.annihilation(n + pad)
    lp = (alpha + 1j * beta) / math.sqrt(2)
    lm = (alpha - 1j * beta) / math.sqrt(2)
    anti = (oracles.taylor_expm(lm * A) @ oracles.taylor_expm(lp * A.conj().T))[:10, :10]
    assert np.abs(ordered_exp_linear(ANTINORMAL, LinearForm(alpha, beta), cfg).block() - anti).max() < 1e-11


def test_pq_bilinear_series_reproduces_scaled_squeeze():
    r = 0.3
    mu = math.exp(r)
    cfg = FockConfig(80, 20)
    series = ordered_exp_pq_bilinear(1 - 1 / mu, cfg)
    ref = oracles.squeeze_matrix(r, 80)
    assert np.linalg.norm(series.block() / math.sqrt(mu) - ref[:20, :20]) < 1e-7


def test_pq_bilinear_series_rejects_unit_kappa():
    with pytest.raises(ConvergenceError):
        ordered_exp_pq_bilinear(1.0, FockConfig(20))
    with pytest.raises(ConvergenceError):
        ordered_exp_pq_bilinear(0.9, FockConfig(40), max_terms=3)
