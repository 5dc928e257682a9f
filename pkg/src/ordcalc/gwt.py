"""Reordering exponentials of linear forms between two orderings.

For any two orderings O', O and any linear form X in q, p:

    O' exp(X) = exp(C) O exp(X),   C = (O' X**2 - O X**2) / 2,

and C is a c-number.  C is computed here on exact normal-form
polynomials; matrices are only used to check the identity.
"""

from dataclasses import dataclass, field
import logging
from math import sqrt

import numpy as np

from .errors import NonScalarDifference, OrderingError, VerificationFailure
from .orderings import (
    NORMAL,
    PQ,
    Ordering,
    ordered_exp_linear,
    ordered_square,
    _as_complex,
    _HALF,
)

log = logging.getLogger(__name__)

__all__ = [
    "Contraction",
    "ReorderReport",
    "BCHStep",
    "general_contraction",
    "reorder_exponential",
    "pq_to_normal_contraction",
    "bch_three_step",
    "bch_three_step_trace",
    "bch_contraction",
    "REORDER_TOLERANCE",
]

REORDER_TOLERANCE = 1e-8


@dataclass(frozen=True)
class Contraction:
    """The c-number ``C`` with ``O' exp(X) = exp(C) O exp(X)``."""

    value: complex
    exact: object = field(default=None, compare=False, repr=False)

    def __complex__(self):
        return complex(self.value)

    def __neg__(self):
        return Contraction(-self.value, None if self.exact is None else -self.exact)

    @property
    def prefactor(self):
        return complex(np.exp(self.value))


def general_contraction(Oprime, O, X):
    """Half the difference of the ordered squares of ``X``.

    Raises :class:`NonScalarDifference` if the difference carries any
    non-constant monomial (only possible for a malformed custom table).
    """
    diff = ordered_square(Oprime, X) - ordered_square(O, X)
    if not diff.is_scalar():
        raise NonScalarDifference(diff.non_scalar_part())
    twice = diff.scalar_part()
    exact = None
    if diff.is_exact:
        exact = twice * _HALF if twice else 0
    return Contraction(_as_complex(twice) / 2, exact)


@dataclass(frozen=True)
class ReorderReport:
    contraction: Contraction
    residual: float
    tolerance: float
    dim: int
    trusted_block: int

    @property
    def passed(self):
        return self.residual <= self.tolerance


def reorder_exponential(Oprime, O, X, cfg, tolerance=REORDER_TOLERANCE):
    """Return ``(C, report)`` after checking ``O' e^X = e^C O e^X`` numerically.

    Both sides are built from their factored forms on ``cfg.N`` states and
    compared on the trusted block.  A residual above ``tolerance`` raises
    :class:`VerificationFailure`.
    """
    C = general_contraction(Oprime, O, X)
    lhs = ordered_exp_linear(Oprime, X, cfg)
    rhs = ordered_exp_linear(O, X, cfg) * C.prefactor
    report = ReorderReport(C, lhs.residual(rhs), tolerance, cfg.N, cfg.M)
    if not report.passed:
        raise VerificationFailure(
            f"{Oprime.name} vs {O.name} reordering", report.residual, tolerance)
    return C, report


def pq_to_normal_contraction(z, sign=1):
    """``(conj(z)**2 - z**2)/4 + sign |z|**2 / 2``: PQ to normal for ``X = i z p + sign conj(z) q``."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    z = complex(z)
    zc = z.conjugate()
    return Contraction((zc * zc - z * z) / 4 + sign * (z * zc).real / 2)


@dataclass(frozen=True)
class BCHStep:
    description: str
    scalar: complex


def _commutator(A, B):
    # [u a_dag + v a, u' a_dag + v' a] = v u' - u v'
    (u, v), (u2, v2) = A, B
    return v * u2 - u * v2


def _bch_scalar(A, B):
    """Scalar in ``e^A e^B = e^(A + B + [A, B]/2)`` for central commutators."""
    return _commutator(A, B) / 2


def bch_three_step_trace(a, b):
    """Normal-order ``O_PQ exp(a q + b p) = exp(b p) exp(a q)`` one BCH step at a time.

    Each factor is written as ``u a_dag + v a``.  Returns the three
    scalar exponents produced on the way:

    1. disentangle ``exp(b p)`` into ``exp(u a_dag) exp(v a)``,
    2. the same for ``exp(a q)``,
    3. move ``exp(v_p a)`` right past ``exp(u_q a_dag)``.
    """
    a, b = _as_complex(a), _as_complex(b)
    p_part = (-b / (1j * sqrt(2)), b / (1j * sqrt(2)))
    q_part = (a / sqrt(2), a / sqrt(2))
    steps = []

    # e^(A+B) = e^A e^B e^(-[A,B]/2)
    up, vp = (p_part[0], 0), (0, p_part[1])
    steps.append(BCHStep("split exp(b p) into exp(u a†) exp(v a)", -_bch_scalar(up, vp)))
    uq, vq = (q_part[0], 0), (0, q_part[1])
    steps.append(BCHStep("split exp(a q) into exp(u a†) exp(v a)", -_bch_scalar(uq, vq)))
    # e^B e^A = e^A e^B e^([B,A]/2 - [A,B]/2)
    steps.append(BCHStep("swap exp(v_p a) past exp(u_q a†)",
                         _bch_scalar(vp, uq) - _bch_scalar(uq, vp)))
    for i, step in enumerate(steps, 1):
        log.debug("BCH step %d: %s -> %s", i, step.description, step.scalar)
    return steps


def bch_three_step(a, b):
    """Prefactor exponent ``(a**2 + b**2)/4 - i a b / 2`` assembled from three BCH steps."""
    total = 0j
    for step in bch_three_step_trace(a, b):
        total += step.scalar
    return total


def _weyl_offset(ordering, X):
    # s with  O e^X = e^s e^X, from one BCH merge of the factored form
    a, b = _as_complex(X.alpha), _as_complex(X.beta)
    lp, lm = X.ladder
    tag = ordering.tag
    if tag is Ordering.PQ:
        return _bch_scalar((-b / (1j * sqrt(2)), b / (1j * sqrt(2))), (a / sqrt(2), a / sqrt(2)))
    if tag is Ordering.QP:
        return _bch_scalar((a / sqrt(2), a / sqrt(2)), (-b / (1j * sqrt(2)), b / (1j * sqrt(2))))
    if tag is Ordering.NORMAL:
        return _bch_scalar((lp, 0), (0, lm))
    if tag is Ordering.ANTINORMAL:
        return _bch_scalar((0, lm), (lp, 0))
    raise OrderingError(f"no BCH route for ordering {ordering.name!r}")


def bch_contraction(Oprime, O, X):
    """Contraction obtained by merging each factored form with BCH.

    For the PQ to normal pair this uses :func:`bch_three_step`.
    """
    if Oprime is PQ and O is NORMAL:
        return bch_three_step(X.alpha, X.beta)
    if Oprime is NORMAL and O is PQ:
        return -bch_three_step(X.alpha, X.beta)
    return _weyl_offset(Oprime, X) - _weyl_offset(O, X)
