"""The single-mode squeeze operator, built several independent ways.

``S = exp(r/2 (a^2 - a_dag^2))`` squeezes ``q`` to ``e^-r q``.  With
``mu = e^r`` and ``kappa = 1 - 1/mu`` this module realizes S

* directly from its generator in ladder or quadrature form,
* from the position-space kernel ``mu^-1/2 int |q/mu><q| dq``,
* as the PQ-ordered exponential ``mu^-1/2 O_PQ exp(i kappa p q)``,
* as the Gaussian integral over normal-ordered linear exponentials that
  the generalized Wick theorem produces,
* from the closed normal-ordered form
  ``cosh(r)^-1/2 exp(-tanh(r)/2 a_dag^2) cosh(r)^(-a_dag a) exp(tanh(r)/2 a^2)``,

and derives the normal-ordered coefficients both by substitution and by
evaluating the Gaussian integral.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from . import _parallel, fock
from .errors import ConvergenceError, DivergentUnraveling
from .fock import TruncatedOperator, matrix_exp
from .gaussian import (
    GaussianIntegralSpec,
    QuadratureGrid,
    UnravelKernel,
    closed_form,
    matrix_quadrature_radius,
)
from .gwt import pq_to_normal_contraction
from .orderings import (
    NORMAL,
    _as_complex,
    ordered_exp_linear_batch,
    ordered_exp_pq_bilinear,
)

__all__ = [
    "SqueezeParams",
    "NormalOrderedSqueezeCoeffs",
    "squeeze_exact",
    "squeeze_qp",
    "verify_squeeze_action",
    "squeeze_position_integral",
    "squeeze_ode_residual",
    "squeeze_pq_ordered",
    "squeeze_unraveled",
    "normal_ordered_coefficients",
    "normal_ordered_coefficients_from_integral",
    "ladder_coefficients",
    "squeeze_normal_factored",
    "squeezed_vacuum_amplitude",
    "squeezed_commutator_residual",
    "ladder_form_coefficients",
    "normal_ordered_coefficients_cc",
]


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezing ``r`` with the derived ``mu = e^r``, ``kappa = 1 - 1/mu`` and ``sign(kappa)``."""

    r: float

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r):
            raise ValueError("r must be finite")
        object.__setattr__(self, "r", r)

    @classmethod
    def from_mu(cls, mu):
        mu = float(mu)
        if not mu > 0:
            raise ValueError(f"mu must be positive, got {mu}")
        return cls(math.log(mu))

    @property
    def mu(self):
        return math.exp(self.r)

    @property
    def kappa(self):
        # 1 - e^-r without cancellation near r = 0
        return -math.expm1(-self.r)

    @property
    def sign_kappa(self):
        return -1 if self.kappa < 0 else 1


@dataclass(frozen=True)
class NormalOrderedSqueezeCoeffs:
    """``S = prefactor * N exp(c_pq p q + c_sq (p^2 + q^2))``
    ``  = prefactor * N exp(c_a2 a^2 + c_ad2 a_dag^2 + c_n a_dag a)``."""

    prefactor: float
    c_pq: complex
    c_sq: float
    c_a2: float
    c_ad2: float
    c_n: float

    def as_dict(self):
        values = {
            "prefactor": self.prefactor,
            "c_pq_re": self.c_pq.real,
            "c_pq_im": self.c_pq.imag,
            "c_sq": self.c_sq,
            "c_a2": self.c_a2,
            "c_ad2": self.c_ad2,
            "c_n": self.c_n,
        }
        # + 0.0 turns -0.0 into 0.0
        return {k: v + 0.0 for k, v in values.items()}

    def max_difference(self, other):
        mine, theirs = self.as_dict(), other.as_dict()
        return max(abs(mine[k] - theirs[k]) for k in mine)


def _generator(p, cfg):
    a, ad = fock.ladder_ops(cfg)
    return (a @ a - ad @ ad) * (p.r / 2)


def squeeze_exact(p, cfg):
    """``exp(r/2 (a^2 - a_dag^2))`` by matrix exponential."""
    return matrix_exp(_generator(p, cfg))


def squeeze_qp(p, cfg):
    """``exp(i r/2 {q, p})`` by matrix exponential."""
    q, pp = fock.quadrature_ops(cfg)
    return matrix_exp((q @ pp + pp @ q) * (0.5j * p.r))


def verify_squeeze_action(p, cfg):
    """Residuals of ``S^dag q S = e^-r q`` and ``S^dag p S = e^r p`` on the trusted block.

    ``p`` is stretched by ``e^+r``: anything else would break ``[q, p] = i``.
    """
    S = squeeze_exact(p, cfg)
    q, pp = fock.quadrature_ops(cfg)
    qs = S.H @ q @ S
    ps = S.H @ pp @ S
    return qs.residual(q * math.exp(-p.r)), ps.residual(pp * math.exp(p.r))


def squeezed_commutator_residual(p, cfg):
    """``|| [S^dag q S, S^dag p S] - i ||`` on the trusted block."""
    S = squeeze_exact(p, cfg)
    q, pp = fock.quadrature_ops(cfg)
    qs = S.H @ q @ S
    ps = S.H @ pp @ S
    comm = qs @ ps - ps @ qs
    return comm.residual(fock.identity(cfg) * 1j)


def _position_kernel(mu, dim, nodes):
    # (1/sqrt mu) int psi_m(q/mu) psi_n(q) dq, Gauss-Hermite after q = x / sqrt(s)
    s = 0.5 * (1.0 + 1.0 / (mu * mu))
    x, w = np.polynomial.hermite.hermgauss(nodes)
    left = fock._hermite_poly_table(dim - 1, x / (mu * math.sqrt(s)))
    right = fock._hermite_poly_table(dim - 1, x / math.sqrt(s))
    return (left * w) @ right.T / math.sqrt(s * mu)


def squeeze_position_integral(p, cfg, quad_points=None):
    """``<m|S|n> = mu^-1/2 int psi_m(q/mu) psi_n(q) dq`` by Gauss-Hermite quadrature.

    The integrand is a polynomial of degree m + n times a Gaussian, so
    ``quad_points >= N`` nodes integrate it exactly; the result is checked
    against a run with twice the nodes.
    """
    dim = cfg.N
    nodes = quad_points or dim + 20
    mat = _position_kernel(p.mu, dim, nodes)
    check = _position_kernel(p.mu, dim, 2 * nodes)
    m = cfg.M
    drift = float(np.abs(mat[:m, :m] - check[:m, :m]).max())
    if drift > cfg.tolerance:
        raise ConvergenceError(
            f"position quadrature under-resolved: {nodes} vs {2 * nodes} nodes differ by {drift:.3e}")
    return TruncatedOperator(mat, m)


def squeeze_ode_residual(p, cfg, dmu=1e-3, form="anticommutator"):
    """Central-difference residual of ``dS/dmu = (i / 2mu) {q, p} S``.

    ``form="pq"`` uses the equivalent right-hand side
    ``(-1/(2mu) + (i/mu) p q) S``.  Raises :class:`ConvergenceError` when
    halving ``dmu`` makes the residual grow, i.e. rounding dominates.
    """
    res = _ode_residual(p, cfg, dmu, form)
    finer = _ode_residual(p, cfg, dmu / 2, form)
    if finer > res and res > 0:
        raise ConvergenceError(
            f"finite-difference step {dmu:g} too small: residual rose from {res:.3e} to {finer:.3e}")
    return res


def _ode_residual(p, cfg, dmu, form):
    mu = p.mu
    if not dmu < mu:
        raise ValueError(f"step {dmu} must be smaller than mu={mu}")
    up = squeeze_exact(SqueezeParams.from_mu(mu + dmu), cfg)
    down = squeeze_exact(SqueezeParams.from_mu(mu - dmu), cfg)
    S = squeeze_exact(p, cfg)
    q, pp = fock.quadrature_ops(cfg)
    if form == "anticommutator":
        rhs = (q @ pp + pp @ q) * (0.5j / mu) @ S
    elif form == "pq":
        rhs = (fock.identity(cfg) * (-0.5 / mu) + (pp @ q) * (1j / mu)) @ S
    else:
        raise ValueError(f"unknown form {form!r}")
    fd = (up - down) / (2 * dmu)
    return fd.residual(rhs)


def squeeze_pq_ordered(p, cfg):
    """``mu^-1/2 O_PQ exp(i kappa p q)`` from the PQ-ordered series."""
    return ordered_exp_pq_bilinear(p.kappa, cfg) / math.sqrt(p.mu)


def squeeze_unraveled(p, cfg, grid=None):
    """Numerical form of ``N int exp(i z p +- z* q + C(z) - |z|^2/|kappa|) d^2z / (pi sqrt(mu) |kappa|)``.

    ``C(z)`` is the PQ-to-normal contraction and the sign is that of kappa.
    At ``r = 0`` the weight collapses to a delta function and the identity
    is returned.
    """
    kappa = p.kappa
    if kappa == 0:
        return fock.identity(cfg)
    if kappa >= 1:
        raise DivergentUnraveling(f"kappa={kappa} >= 1: the unraveled integrand does not decay")
    kernel = UnravelKernel(kappa)
    sign = p.sign_kappa
    grid = grid or QuadratureGrid(points=96)
    rate = kernel.envelope_rate
    radius = grid.radius or matrix_quadrature_radius(rate, cfg.M)
    z, w = grid.nodes(radius)
    zc = z.conj()
    contraction = np.array([pq_to_normal_contraction(zz, sign).value for zz in z])
    w = w * kernel.weight(z) * np.exp(contraction) / math.sqrt(p.mu)
    alpha, beta = sign * zc, 1j * z
    dim = cfg.N

    def chunk_sum(sl):
        mats = ordered_exp_linear_batch(NORMAL, alpha[sl], beta[sl], dim)
        return np.tensordot(w[sl], mats, axes=1)

    slices = [slice(i, i + grid.chunk) for i in range(0, z.size, grid.chunk)]
    return TruncatedOperator(_parallel.ordered_sum(chunk_sum, slices), cfg.M)


def ladder_coefficients(c_pq, c_sq):
    """Rewrite ``N exp(c_pq p q + c_sq (p^2 + q^2))`` in ladder form.

    Uses the normal-ordered images of ``p q`` and ``p^2 + q^2`` as exact
    polynomials and returns ``(c_a2, c_ad2, c_n)``.
    """
    exponent = NORMAL.qp * complex(c_pq) + (NORMAL.q2 + NORMAL.p2) * complex(c_sq)
    if exponent.scalar_part() != 0 or exponent.degree > 2:
        raise ArithmeticError(f"unexpected normal-ordered exponent {exponent}")
    return (complex(exponent.coefficient(0, 2)),
            complex(exponent.coefficient(2, 0)),
            complex(exponent.coefficient(1, 1)))


def _pack(prefactor, c_pq, c_sq):
    c_a2, c_ad2, c_n = ladder_coefficients(c_pq, c_sq)
    return NormalOrderedSqueezeCoeffs(
        prefactor=float(prefactor.real) if isinstance(prefactor, complex) else float(prefactor),
        c_pq=complex(c_pq),
        c_sq=float(complex(c_sq).real),
        c_a2=c_a2.real,
        c_ad2=c_ad2.real,
        c_n=c_n.real,
    )


def normal_ordered_coefficients(p):
    """Coefficients of the normal-ordered squeeze operator by direct substitution.

    ``prefactor = sqrt(2 mu / (1 + mu^2))``, ``c_pq = i (mu^2 - 1)/(1 + mu^2)``,
    ``c_sq = -(mu - 1)^2 / (2 (1 + mu^2))``.
    """
    mu = p.mu
    den = 1 + mu * mu
    return _pack(math.sqrt(2 * mu / den), 1j * (mu * mu - 1) / den, -0.5 * (mu - 1) ** 2 / den)


def ladder_form_coefficients(p):
    """``(prefactor, c_a2, c_ad2, c_n) = (cosh^-1/2, tanh/2, -tanh/2, 1/cosh - 1)`` at ``r``."""
    ch = math.cosh(p.r)
    th = math.tanh(p.r)
    return 1 / math.sqrt(ch), th / 2, -th / 2, 1 / ch - 1


def normal_ordered_coefficients_cc(p):
    """Coefficients read from the cosh/tanh ladder form, mapped back to ``(c_pq, c_sq)``.

    Only ``a_dag^2`` comes from ``p q`` and only ``a_dag a`` from
    ``p^2 + q^2``, so each quadrature coefficient is one division.
    """
    prefactor, _, c_ad2, c_n = ladder_form_coefficients(p)
    c_pq = c_ad2 / _as_complex(NORMAL.qp.coefficient(2, 0))
    c_sq = c_n / _as_complex((NORMAL.q2 + NORMAL.p2).coefficient(1, 1))
    return _pack(prefactor, c_pq, c_sq)


def normal_ordered_coefficients_from_integral(p):
    """Coefficients obtained by evaluating the unraveled Gaussian integral.

    Inside the normal ordering ``p`` and ``q`` act as numbers, so the
    integral is the closed form with ``zeta = -|1/kappa - 1/2|``,
    ``xi = i p``, ``eta = sign * q``, ``f = -1/4``, ``g = 1/4``.  The plane
    is rescaled by ``sqrt|kappa|`` first, which keeps every coefficient
    finite as ``kappa -> 0``.  The quadratic form in (p, q) is read off by
    probing the closed form.
    """
    kappa = p.kappa
    if kappa == 0:
        return _pack(1.0, 0j, 0.0)
    sign = p.sign_kappa
    k = abs(kappa)
    # z -> sqrt(k) z: zeta k = -|1 - kappa/2|, f k, g k, and the measure gives k
    zeta = -abs(1 - kappa / 2)

    def value(u, v):
        # u = sqrt(k) p, v = sqrt(k) q
        spec = GaussianIntegralSpec(zeta=zeta, xi=1j * u, eta=sign * v, f=-k / 4, g=k / 4)
        return closed_form(spec)

    base = value(0, 0)
    c_pp = cmath.log(value(1, 0) / base) * k
    c_qq = cmath.log(value(0, 1) / base) * k
    c_pq = cmath.log(value(1, 1) / base) * k - c_pp - c_qq
    if abs(c_pp - c_qq) > 1e-12 * max(1.0, abs(c_pp)):
        raise ArithmeticError(f"p^2 and q^2 coefficients differ: {c_pp} vs {c_qq}")
    return _pack(complex(base / math.sqrt(p.mu)), c_pq, c_pp)


def squeeze_normal_factored(p, cfg):
    """``cosh(r)^-1/2 exp(-tanh(r)/2 a_dag^2) cosh(r)^(-a_dag a) exp(tanh(r)/2 a^2)``.

    The middle factor is an exact diagonal.
    """
    a, ad = fock.ladder_ops(cfg)
    th = math.tanh(p.r)
    ch = math.cosh(p.r)
    left = matrix_exp(ad @ ad * (-th / 2))
    right = matrix_exp(a @ a * (th / 2))
    middle = TruncatedOperator(np.diag(ch ** -np.arange(cfg.N, dtype=float)), cfg.M)
    return (left @ middle @ right) * (1 / math.sqrt(ch))


def squeezed_vacuum_amplitude(r, n):
    """``<2n|S|0> = cosh(r)^-1/2 (-tanh(r)/2)^n sqrt((2n)!) / n!``."""
    return (math.cosh(r) ** -0.5 * (-math.tanh(r) / 2) ** n
            * math.sqrt(math.factorial(2 * n)) / math.factorial(n))
