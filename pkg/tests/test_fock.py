import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ordcalc import fock
from ordcalc.errors import ConfigError, ConvergenceError
from ordcalc.fock import FockConfig, TruncatedOperator

import oracles


def test_config_defaults_and_validation():
    cfg = FockConfig(60)
    assert (cfg.N, cfg.M) == (60, 20)
    assert cfg.tolerance == 1e-10
    for bad in [dict(truncation=1), dict(truncation=10, trusted_block=11),
                dict(truncation=10, trusted_block=0), dict(truncation=10, tolerance=0.0)]:
        with pytest.raises(ConfigError):
            FockConfig(**bad)


def test_ladder_commutator_on_trusted_block():
    cfg = FockConfig(20, 10)
    a, ad = fock.ladder_ops(cfg)
    comm = (a @ ad - ad @ a).block()
    assert np.abs(comm - np.eye(10)).max() < 1e-12
    # the truncation artifact sits in the last diagonal entry only
    full = (a @ ad - ad @ a).matrix
    assert full[-1, -1] == pytest.approx(-(cfg.N - 1))


def test_ladder_action():
    a, ad = fock.ladder_ops(FockConfig(8, 4))
    for n in range(1, 8):
        assert a.matrix[n - 1, n] == pytest.approx(math.sqrt(n))
    assert np.array_equal(ad.matrix, a.matrix.conj().T)


def test_canonical_commutator_for_quadratures():
    q, p = fock.quadrature_ops(FockConfig(20, 10))
    comm = q @ p - p @ q
    assert np.linalg.norm(comm.block() - 1j * np.eye(10)) < 1e-12


def test_number_operator_is_adag_a():
    cfg = FockConfig(12, 4)
    a, ad = fock.ladder_ops(cfg)
    assert (ad @ a).residual(fock.number_op(cfg), size=12) < 1e-13


def test_operator_is_read_only():
    op = fock.identity(FockConfig(4, 2))
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2


def test_operator_rejects_bad_shapes():
    with pytest.raises(ConfigError):
        TruncatedOperator(np.zeros((3, 4)))
    with pytest.raises(ConfigError):
        TruncatedOperator(np.zeros((1, 1)))
    with pytest.raises(ConfigError):
        TruncatedOperator(np.zeros((4, 4)), 5)


def test_arithmetic_keeps_smaller_trusted_block():
    x = TruncatedOperator(np.eye(6), 4)
    y = TruncatedOperator(np.eye(6), 2)
    assert (x + y).trusted_block == 2
    assert (x @ y).trusted_block == 2
    assert (2 * x - x / 2).residual(1.5 * x) == 0
    with pytest.raises(ConfigError):
        x + TruncatedOperator(np.eye(5))


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_adjoint_is_an_involution(n, seed):
    rng = np.random.default_rng(seed)
    mat = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    op = TruncatedOperator(mat)
    assert np.array_equal(op.H.H.matrix, op.matrix)


def test_exp_of_zero_is_identity():
    out = fock.matrix_exp(TruncatedOperator(np.zeros((5, 5))))
    assert np.array_equal(out.matrix, np.eye(5))


def test_exp_of_diagonal_phases():
    out = fock.matrix_exp(TruncatedOperator(np.diag([0, 1j * math.pi]), 2))
    assert np.abs(out.matrix - np.diag([1, -1])).max() < 1e-12


def test_squeeze_generator_exponential_is_unitary_and_matches_taylor():
    cfg = FockConfig(60, 20)
    a, ad = fock.ladder_ops(cfg)
    S = fock.matrix_exp((a @ a - ad @ ad) * 0.15)
    assert np.linalg.norm((S.H @ S).block() - np.eye(20)) < 1e-9
    ref = oracles.squeeze_matrix(0.3, 60)
    assert np.abs(S.block() - ref[:20, :20]).max() < 1e-12


def test_exp_times_exp_of_negative_is_identity():
    cfg = FockConfig(40, 12)
    a, ad = fock.ladder_ops(cfg)
    A = (a @ a * 0.2 - ad @ ad * 0.1j)
    prod = fock.matrix_exp(A) @ fock.matrix_exp(-A)
    assert prod.residual(fock.identity(cfg)) < 1e-9


def test_overflow_reports_norm_and_depth():
    with pytest.raises(ConvergenceError, match="1-norm"):
        fock.matrix_exp(TruncatedOperator(np.diag([1000.0, 0.0])))


@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_exp_of_adjoint_is_adjoint_of_exp(n, seed):
    rng = np.random.default_rng(seed)
    A = TruncatedOperator(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)), n)
    lhs = fock.matrix_exp(A).H
    rhs = fock.matrix_exp(A.H)
    assert lhs.residual(rhs) < 1e-10 * max(1.0, np.linalg.norm(lhs.matrix))


@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                min_size=3, max_size=3),
       st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                min_size=3, max_size=3))
def test_exp_is_multiplicative_for_commuting_diagonals(d1, d2):
    A = TruncatedOperator(np.diag(d1), 3)
    B = TruncatedOperator(np.diag(d2), 3)
    lhs = fock.matrix_exp(A + B)
    rhs = fock.matrix_exp(A) @ fock.matrix_exp(B)
    assert lhs.residual(rhs) < 1e-10 * max(1.0, np.abs(lhs.matrix).max())


def test_hermite_functions_are_orthonormal():
    x, w = np.polynomial.hermite.hermgauss(80)
    table = fock._hermite_poly_table(30, x)
    gram = (table * w) @ table.T
    assert np.abs(gram - np.eye(31)).max() < 1e-10
    overlap = np.sum(w * np.exp(x * x) * fock.hermite_function(2, x) * fock.hermite_function(3, x))
    assert abs(overlap) < 1e-10


def test_hermite_function_low_orders():
    x = 0.7
    g = math.pi ** -0.25 * math.exp(-x * x / 2)
    assert fock.hermite_function(0, x) == pytest.approx(g)
    assert fock.hermite_function(1, x) == pytest.approx(math.sqrt(2) * x * g)
    assert fock.hermite_function(2, x) == pytest.approx((2 * x * x - 1) / math.sqrt(2) * g)


def test_hermite_function_order_limits():
    with pytest.raises(ValueError):
        fock.hermite_function(-1, 0.0)
    with pytest.raises(ValueError):
        fock.hermite_function(fock.HERMITE_MAX_ORDER + 1, 0.0)


def test_exp_creation_matches_matrix_exponential():
    lam = 0.4 - 0.3j
    ref = oracles.taylor_expm(lam * oracles.annihilation(25).conj().T)
    assert np.abs(fock.exp_creation(lam, 25) - ref).max() < 1e-13
    batch = fock.exp_creation(np.array([lam, 0.1]), 25)
    assert batch.shape == (2, 25, 25)


@pytest.mark.parametrize("which", ["q", "p"])
def test_exp_quadrature_columns_match_padded_taylor(which):
    c = 0.6 + 0.2j
    q, p = oracles.quadratures(200)
    ref = oracles.taylor_expm(c * (q if which == "q" else p))
    out = fock.exp_quadrature([c], which, 20)[0]
    assert np.abs(out[:20] - ref[:20, :20]).max() < 1e-12
