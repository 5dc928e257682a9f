"""Normal-form polynomial algebra and the catalogue of operator orderings.

A :class:`NormalPolynomial` is a finite sum of monomials ``a_dag**m a**n``
kept in canonical (normal) form.  Coefficients are either exact Gaussian
rationals (``sympy``'s ``QQ_I`` domain, plus plain ``int``) or Python
``complex``; mixing the two degrades to ``complex``.

An :class:`OrderingKind` is defined operationally by where it sends the
three second moments ``q**2``, ``p**2`` and ``q p`` (ordering symbols treat
their arguments as commuting, so the image of ``p q`` equals that of
``q p``).  Those images are exact NormalPolynomials.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import comb, factorial, sqrt
import numbers

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational

from . import fock
from .errors import ConvergenceError, OrderingError
from .fock import TruncatedOperator

__all__ = [
    "NormalPolynomial",
    "LinearForm",
    "OrderingKind",
    "Ordering",
    "PQ",
    "QP",
    "NORMAL",
    "ANTINORMAL",
    "ordered_square",
    "ordered_exp_linear",
    "ordered_exp_linear_batch",
    "ordered_exp_pq_bilinear",
    "gaussian_rational",
]


def gaussian_rational(re, im=0):
    """Exact ``re + i im`` with rational parts (ints or ``fractions.Fraction``)."""
    def conv(x):
        x = Fraction(x)
        return QQ_I.convert(x.numerator) / QQ_I.convert(x.denominator)

    return conv(re) + conv(im) * QQ_I(0, 1)


def _is_exact(c):
    return isinstance(c, (GaussianRational, numbers.Integral)) and not isinstance(c, bool)


def _as_complex(c):
    if isinstance(c, GaussianRational):
        return complex(float(c.x), float(c.y))
    return complex(c)


def _coerce(x, y):
    if _is_exact(x) and _is_exact(y):
        return x, y
    return _as_complex(x), _as_complex(y)


def _is_zero(c):
    return not c


class NormalPolynomial:
    """Polynomial in ``a_dag``, ``a`` stored as ``{(m, n): coeff}`` for ``a_dag**m a**n``.

    Products are reduced to canonical form with

        a**n a_dag**k = sum_j C(n, j) C(k, j) j! a_dag**(k-j) a**(n-j).

    Instances are immutable.

    >>> a, ad = NormalPolynomial.a(), NormalPolynomial.adag()
    >>> a * ad
    NormalPolynomial(a† a + 1)
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        for key, c in (terms or {}).items():
            m, n = key
            if m < 0 or n < 0:
                raise ValueError(f"negative power in monomial {key}")
            if not _is_exact(c):
                c = _as_complex(c)
            if _is_zero(c):
                continue
            clean[(int(m), int(n))] = c
        self._terms = clean

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def a(cls):
        return cls({(0, 1): 1})

    @classmethod
    def adag(cls):
        return cls({(1, 0): 1})

    @classmethod
    def q(cls):
        """``(a + a_dag)/sqrt 2`` (irrational, so complex coefficients)."""
        s = 1 / sqrt(2)
        return cls({(0, 1): complex(s), (1, 0): complex(s)})

    @classmethod
    def p(cls):
        """``(a - a_dag)/(i sqrt 2)``."""
        s = 1 / (1j * sqrt(2))
        return cls({(0, 1): s, (1, 0): -s})

    @property
    def terms(self):
        return dict(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms.items()))

    def __len__(self):
        return len(self._terms)

    def coefficient(self, m, n):
        return self._terms.get((m, n), 0)

    def scalar_part(self):
        return self._terms.get((0, 0), 0)

    def is_scalar(self):
        return all(key == (0, 0) for key in self._terms)

    def non_scalar_part(self):
        return NormalPolynomial({k: c for k, c in self._terms.items() if k != (0, 0)})

    @property
    def degree(self):
        return max((m + n for m, n in self._terms), default=0)

    @property
    def is_exact(self):
        return all(_is_exact(c) for c in self._terms.values())

    def to_complex(self):
        return NormalPolynomial({k: _as_complex(c) for k, c in self._terms.items()})

    def _add(self, other, sign):
        if not isinstance(other, NormalPolynomial):
            if isinstance(other, (numbers.Number, GaussianRational)):
                other = NormalPolynomial.constant(other)
            else:
                return NotImplemented
        out = dict(self._terms)
        for key, c in other._terms.items():
            if key in out:
                x, y = _coerce(out[key], c)
                out[key] = x + y if sign > 0 else x - y
            else:
                out[key] = c if sign > 0 else -c
        return NormalPolynomial(out)

    def __add__(self, other):
        return self._add(other, +1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._add(other, -1)

    def __rsub__(self, other):
        return (-self)._add(other, +1)

    def __neg__(self):
        return NormalPolynomial({k: -c for k, c in self._terms.items()})

    def _scale(self, s):
        out = {}
        for key, c in self._terms.items():
            x, y = _coerce(c, s)
            out[key] = x * y
        return NormalPolynomial(out)

    def __mul__(self, other):
        if isinstance(other, (numbers.Number, GaussianRational)):
            return self._scale(other)
        if not isinstance(other, NormalPolynomial):
            return NotImplemented
        out = {}
        for (m1, n1), c1 in self._terms.items():
            for (m2, n2), c2 in other._terms.items():
                x, y = _coerce(c1, c2)
                c = x * y
                for j in range(min(n1, m2) + 1):
                    weight = comb(n1, j) * comb(m2, j) * factorial(j)
                    key = (m1 + m2 - j, n1 + n2 - j)
                    term = c * weight
                    if key in out:
                        u, v = _coerce(out[key], term)
                        out[key] = u + v
                    else:
                        out[key] = term
        return NormalPolynomial(out)

    def __rmul__(self, other):
        if isinstance(other, (numbers.Number, GaussianRational)):
            return self._scale(other)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = NormalPolynomial.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (numbers.Number, GaussianRational)):
            other = NormalPolynomial.constant(other)
        if not isinstance(other, NormalPolynomial):
            return NotImplemented
        if self._terms.keys() != other._terms.keys():
            return False
        for key, c in self._terms.items():
            x, y = _coerce(c, other._terms[key])
            # QQ_I elements never compare equal to plain ints; test the difference
            if not _is_zero(x - y):
                return False
        return True

    def __hash__(self):
        return hash(frozenset((k, _as_complex(c)) for k, c in self._terms.items()))

    def allclose(self, other, atol=1e-12):
        diff = self - other
        return all(abs(_as_complex(c)) <= atol for c in diff._terms.values())

    def evaluate(self, cfg):
        """Matrix of the polynomial on the lowest ``cfg.N`` Fock states.

        Each ``a_dag**m a**n`` is built directly, so every entry is exact;
        truncation only enters when matrices are multiplied afterwards.
        """
        dim = cfg.N
        out = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        for (m, n), c in self._terms.items():
            # <k+m-n| a_dag^m a^n |k> = sqrt(k!/(k-n)!) sqrt((k-n+m)!/(k-n)!)
            k = idx[(idx >= n) & (idx - n + m < dim)]
            if k.size == 0:
                continue
            base = k - n
            amp = np.exp(0.5 * (_lgamma_vec(k + 1) - _lgamma_vec(base + 1))
                         + 0.5 * (_lgamma_vec(base + m + 1) - _lgamma_vec(base + 1)))
            out[base + m, k] += _as_complex(c) * amp
        return TruncatedOperator(out, cfg.M)

    def __repr__(self):
        return f"NormalPolynomial({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (m, n), c in sorted(self._terms.items(), key=lambda kv: (-sum(kv[0]), -kv[0][0])):
            mono = " ".join(x for x in (_power("a†", m), _power("a", n)) if x)
            cs = _format_coeff(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{cs} {mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _power(sym, k):
    if k == 0:
        return ""
    return sym if k == 1 else f"{sym}^{k}"


def _format_coeff(c):
    if isinstance(c, GaussianRational):
        im = {1: "i", -1: "-i"}.get(c.y) or (f"({c.y})i" if "/" in str(c.y) else f"{c.y}i")
        if c.y == 0:
            return str(c.x)
        if c.x == 0:
            return im
        return f"({c.x}+{im})".replace("+-", "-")
    if isinstance(c, numbers.Integral):
        return str(c)
    c = complex(c)
    if c.imag == 0:
        return f"{c.real:.12g}"
    return f"({c.real:.12g}{c.imag:+.12g}i)"


def _lgamma_vec(x):
    from scipy.special import gammaln

    return gammaln(np.asarray(x, dtype=float))


# exact building blocks: x_plus = a + a_dag, x_minus = a - a_dag
_A = NormalPolynomial.a()
_AD = NormalPolynomial.adag()
_XP = _A + _AD
_XM = _A - _AD
_HALF = gaussian_rational(Fraction(1, 2))
_I = QQ_I(0, 1)

#: q**2, p**2, q p, p q as exact normal-form polynomials
Q2 = _XP * _XP * _HALF
P2 = _XM * _XM * (-_HALF)
QP_PRODUCT = _XP * _XM * (_HALF * -_I)   # 1/(2i) = -i/2
PQ_PRODUCT = _XM * _XP * (_HALF * -_I)
ANTICOMMUTATOR_HALF = (QP_PRODUCT + PQ_PRODUCT) * _HALF


@dataclass(frozen=True)
class LinearForm:
    """``X = alpha q + beta p`` with complex coefficients."""

    alpha: complex = 0
    beta: complex = 0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not np.isfinite(_as_complex(v)):
                raise ValueError(f"{name} must be finite, got {v!r}")

    @property
    def ladder(self):
        """``(lam_plus, lam_minus)`` with ``X = lam_plus a_dag + lam_minus a``."""
        a, b = _as_complex(self.alpha), _as_complex(self.beta)
        return (a + 1j * b) / sqrt(2), (a - 1j * b) / sqrt(2)

    def __mul__(self, s):
        return LinearForm(self.alpha * s, self.beta * s)

    __rmul__ = __mul__

    def __neg__(self):
        return LinearForm(-self.alpha, -self.beta)

    def polynomial(self):
        lp, lm = self.ladder
        return NormalPolynomial({(1, 0): lp, (0, 1): lm})

    @classmethod
    def unraveling(cls, z, sign=1):
        """The exponent ``i z p + sign * conj(z) q`` used when unraveling ``exp(i kappa p q)``.

        A Gaussian-rational ``z`` gives exact coefficients.
        """
        if isinstance(z, GaussianRational):
            return cls(alpha=sign * QQ_I(z.x, -z.y), beta=_I * z)
        z = complex(z)
        return cls(alpha=sign * z.conjugate(), beta=1j * z)


class Ordering(Enum):
    PQ = "pq"
    QP = "qp"
    NORMAL = "normal"
    ANTINORMAL = "antinormal"
    CUSTOM = "custom"


@dataclass(frozen=True)
class OrderingKind:
    """An ordering symbol, given by its images of ``q**2``, ``p**2`` and ``q p``."""

    tag: Ordering
    q2: NormalPolynomial
    p2: NormalPolynomial
    qp: NormalPolynomial
    name: str = None

    def __post_init__(self):
        if self.name is None:
            object.__setattr__(self, "name", self.tag.value)
        if self.tag is Ordering.CUSTOM:
            for label, entry, ref in (("q^2", self.q2, NORMAL_Q2),
                                      ("p^2", self.p2, NORMAL_P2),
                                      ("qp", self.qp, ANTICOMMUTATOR_HALF)):
                if not (entry - ref).is_scalar():
                    raise OrderingError(
                        f"custom image of {label} differs from the normal one by "
                        f"a non-scalar operator: {entry - ref}")

    @classmethod
    def custom(cls, q2, p2, qp, name="custom"):
        return cls(Ordering.CUSTOM, q2, p2, qp, name)

    @property
    def realizable(self):
        return self.tag is not Ordering.CUSTOM

    @property
    def moments(self):
        return {"q2": self.q2, "p2": self.p2, "qp": self.qp}

    def __repr__(self):
        return f"OrderingKind({self.name})"

    @classmethod
    def from_name(cls, name):
        key = name.strip().lower().replace("-", "").replace("_", "")
        table = {"pq": PQ, "qp": QP, "normal": NORMAL, "n": NORMAL,
                 "antinormal": ANTINORMAL, "a": ANTINORMAL}
        if key not in table:
            raise OrderingError(f"unknown ordering {name!r}; expected one of pq, qp, normal, antinormal")
        return table[key]


NORMAL_Q2 = Q2 - _HALF
NORMAL_P2 = P2 - _HALF

PQ = OrderingKind(Ordering.PQ, Q2, P2, PQ_PRODUCT)
QP = OrderingKind(Ordering.QP, Q2, P2, QP_PRODUCT)
NORMAL = OrderingKind(Ordering.NORMAL, NORMAL_Q2, NORMAL_P2, ANTICOMMUTATOR_HALF)
# not used by the squeeze derivation; mirror of NORMAL with the opposite constants
ANTINORMAL = OrderingKind(Ordering.ANTINORMAL, Q2 + _HALF, P2 + _HALF, ANTICOMMUTATOR_HALF)


def ordered_square(ordering, X):
    """``O X**2 = alpha**2 O(q**2) + beta**2 O(p**2) + 2 alpha beta O(q p)``.

    Exact when ``alpha`` and ``beta`` are exact (ints or Gaussian rationals);
    otherwise the result carries complex coefficients.
    """
    a, b = X.alpha, X.beta
    return ordering.q2 * (a * a) + ordering.p2 * (b * b) + ordering.qp * (2 * a * b)


def _check_realizable(ordering):
    if not ordering.realizable:
        raise OrderingError(f"ordering {ordering.name!r} has no factored matrix realization")


def ordered_exp_linear_batch(ordering, alphas, betas, dim, pad=None):
    """Stacked matrices of ``O exp(alpha q + beta p)`` on ``dim`` states.

    Factored forms used:

    * PQ: ``exp(beta p) exp(alpha q)``
    * QP: ``exp(alpha q) exp(beta p)``
    * normal: ``exp(lam_+ a_dag) exp(lam_- a)``
    * antinormal: ``exp(lam_- a) exp(lam_+ a_dag)``

    The q and p factors are Taylor-summed in a padded space (see
    :func:`fock.exp_quadrature`); the normal factors are exact; the
    antinormal product is summed over a padded intermediate index.
    """
    _check_realizable(ordering)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    betas = np.atleast_1d(np.asarray(betas, dtype=complex))
    tag = ordering.tag
    if tag in (Ordering.NORMAL, Ordering.ANTINORMAL):
        lp = (alphas + 1j * betas) / sqrt(2)
        lm = (alphas - 1j * betas) / sqrt(2)
        if tag is Ordering.NORMAL:
            return np.matmul(fock.exp_creation(lp, dim), np.swapaxes(fock.exp_creation(lm, dim), -1, -2))
        if pad is None:
            lmax = float(max(np.max(np.abs(lp)), np.max(np.abs(lm)), 0.0))
            pad = int(min(160, 40 + np.ceil(4 * lmax * lmax)))
        work = dim + pad
        left = np.swapaxes(fock.exp_creation(lm, work), -1, -2)[..., :dim, :]
        right = fock.exp_creation(lp, work)[..., :, :dim]
        return np.matmul(left, right)
    if pad is None:
        cmax = float(max(np.max(np.abs(alphas)), np.max(np.abs(betas)), 0.0))
        pad = int(min(160, 40 + np.ceil(4 * cmax * cmax)))
    work = dim + pad
    if tag is Ordering.PQ:
        left = fock.exp_quadrature(betas, "p", dim, work, transpose=True)    # (P, work, dim) = exp(bp)[:dim,:work].T
        right = fock.exp_quadrature(alphas, "q", dim, work)                  # exp(aq)[:work,:dim]
    else:
        left = fock.exp_quadrature(alphas, "q", dim, work, transpose=True)
        right = fock.exp_quadrature(betas, "p", dim, work)
    return np.matmul(np.swapaxes(left, -1, -2), right)


def ordered_exp_linear(ordering, X, cfg):
    """Matrix of ``O exp(X)`` for a built-in ordering.

    Custom orderings raise :class:`OrderingError`.
    """
    mat = ordered_exp_linear_batch(ordering, [_as_complex(X.alpha)], [_as_complex(X.beta)], cfg.N)[0]
    return TruncatedOperator(mat, cfg.M)


def ordered_exp_pq_bilinear(kappa, cfg, max_terms=400):
    """``O_PQ exp(i kappa p q) = sum_n (i kappa)**n p**n q**n / n!``.

    Terms are generated as ``T_n = (i kappa / n) p T_{n-1} q`` in a space
    padded by ``max_terms`` so every retained term is exact on the returned
    block.  Summation stops once two consecutive terms are each below
    ``cfg.tolerance / 10`` on the trusted block.
    """
    kappa = float(kappa)
    if not abs(kappa) < 1:
        raise ConvergenceError(f"PQ bilinear series needs |kappa| < 1, got {kappa}")
    import scipy.sparse as sp

    dim, m = cfg.N, cfg.M
    work = dim + max_terms
    a = sp.diags(np.sqrt(np.arange(1, work, dtype=float)), 1, format="csr")
    ad = a.T.tocsr()
    q = ((a + ad) / sqrt(2)).astype(complex).tocsr()
    p = ((a - ad) / (1j * sqrt(2))).tocsr()
    qt = q.T.tocsr()
    term = np.eye(work, dtype=complex)
    total = term.copy()
    cutoff = cfg.tolerance / 10
    quiet = 0
    history = []
    for n in range(1, max_terms + 1):
        # p @ term @ q, with the right product done as (q^T term^T)^T
        term = (p @ (qt @ term.T).T) * (1j * kappa / n)
        total += term
        size = float(np.abs(term[:m, :m]).max())
        history.append(size)
        quiet = quiet + 1 if size < cutoff else 0
        if quiet >= 2:
            return TruncatedOperator(total[:dim, :dim], m)
        if not np.isfinite(size):
            break
    raise ConvergenceError(
        f"PQ bilinear series did not converge in {max_terms} terms at kappa={kappa}; "
        f"last term sizes {history[-3:]}")
