"""Complex-plane Gaussian integrals and the unraveling of exp(i kappa p q).

The integral handled here is

    I = int exp(zeta |z|^2 + xi z + eta z* + f z^2 + g z*^2) d^2z / pi
      = (zeta^2 - 4 f g)^(-1/2) exp[(-zeta xi eta + xi^2 g + eta^2 f) / (zeta^2 - 4 f g)],

with the square root continued from ``-zeta`` at ``f = g = 0``.  A tensor
Gauss-Legendre rule on a box serves as an independent check.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _parallel
from .errors import DegenerateQuadratic, DivergentIntegral, TailBoundError
from .orderings import PQ, ordered_exp_linear_batch, ordered_exp_pq_bilinear

__all__ = [
    "GaussianIntegralSpec",
    "UnravelKernel",
    "QuadratureGrid",
    "closed_form",
    "quadrature",
    "unravel_matrix",
    "unravel_check",
    "matrix_quadrature_radius",
    "TAIL_LOG",
]

#: ``-ln(1e-12)``: required log-ratio between peak and box edge
TAIL_LOG = -math.log(1e-12)


@dataclass(frozen=True)
class GaussianIntegralSpec:
    """Coefficients of the exponent ``zeta|z|^2 + xi z + eta z* + f z^2 + g z*^2``.

    Construction fails with :class:`DivergentIntegral` unless the real part
    of the quadratic form is negative definite in (Re z, Im z).
    """

    zeta: complex
    xi: complex = 0
    eta: complex = 0
    f: complex = 0
    g: complex = 0

    def __post_init__(self):
        for name in ("zeta", "xi", "eta", "f", "g"):
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        rates = self.decay_rates()
        if not rates.min() > 0:
            raise DivergentIntegral(
                f"real part of the quadratic form is not negative definite "
                f"(eigenvalues {-rates[0]:.6g}, {-rates[1]:.6g})")

    def real_form(self):
        """2x2 real symmetric matrix of Re(quadratic part) in (x, y)."""
        s, d = self.f + self.g, self.f - self.g
        return np.array([[(self.zeta + s).real, -d.imag],
                         [-d.imag, (self.zeta - s).real]])

    def decay_rates(self):
        """Ascending positive rates ``-eig(real_form)`` (non-positive if divergent)."""
        return np.sort(-np.linalg.eigvalsh(self.real_form()))

    @property
    def discriminant(self):
        return self.zeta * self.zeta - 4 * self.f * self.g

    def center(self):
        """Stationary point of the real part of the exponent."""
        lin = np.array([(self.xi + self.eta).real, (1j * (self.xi - self.eta)).real])
        return np.linalg.solve(-2 * self.real_form(), lin)

    def exponent(self, z):
        z = np.asarray(z, dtype=complex)
        zc = z.conj()
        return (self.zeta * z * zc + self.xi * z + self.eta * zc
                + self.f * z * z + self.g * zc * zc)


def _continued_sqrt(spec, steps=256):
    # follow sqrt(zeta^2 - 4 t^2 f g) from t=0 (root -zeta) to t=1 without jumps
    root = -spec.zeta
    fg4 = 4 * spec.f * spec.g
    if fg4 == 0:
        return root
    for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
        cand = cmath.sqrt(spec.zeta * spec.zeta - t * t * fg4)
        root = cand if abs(cand - root) <= abs(cand + root) else -cand
    return root


def closed_form(spec):
    """Closed-form value of the integral described by ``spec``.

    At ``f = g = 0`` this is ``(-1/zeta) exp(-xi eta / zeta)``.
    """
    disc = spec.discriminant
    if abs(disc) <= 1e-300:
        raise DegenerateQuadratic("zeta**2 - 4 f g vanishes")
    root = _continued_sqrt(spec)
    expo = (-spec.zeta * spec.xi * spec.eta + spec.xi ** 2 * spec.g + spec.eta ** 2 * spec.f) / disc
    return cmath.exp(expo) / root


def default_radius(spec):
    """Smallest box half-width meeting the tail bound, with 25% headroom."""
    return 1.25 * math.sqrt(TAIL_LOG / spec.decay_rates()[0])


def quadrature(spec, radius=None, points=200):
    """Tensor Gauss-Legendre estimate of the integral on a box.

    The box is centred on the stationary point of the real exponent and has
    half-width ``radius``.  The Gaussian envelope at the box edge must be
    below ``1e-12`` of its peak, otherwise :class:`TailBoundError`.
    """
    rate = spec.decay_rates()[0]
    if radius is None:
        radius = default_radius(spec)
    if rate * radius * radius < TAIL_LOG:
        raise TailBoundError(
            f"radius {radius:g} too small: envelope at edge is "
            f"exp(-{rate * radius * radius:.3g}), need below 1e-12")
    x, w = leggauss(int(points))
    cx, cy = spec.center()
    xs = cx + radius * x
    ys = cy + radius * x
    ws = radius * w
    z = xs[:, None] + 1j * ys[None, :]
    vals = np.exp(spec.exponent(z))
    return complex(ws @ vals @ ws) / math.pi


@dataclass(frozen=True)
class QuadratureGrid:
    """Box half-width (``None`` picks one automatically) and Gauss-Legendre points per axis."""

    radius: float = None
    points: int = 80
    chunk: int = 512

    def nodes(self, radius):
        x, w = leggauss(int(self.points))
        xs, ws = radius * x, radius * w
        z = (xs[:, None] + 1j * xs[None, :]).ravel()
        weights = np.outer(ws, ws).ravel()
        return z, weights


@dataclass(frozen=True)
class UnravelKernel:
    """Weight ``exp(-|z|^2/|kappa|) / (pi |kappa|)`` used to unravel ``exp(i kappa p q)``."""

    kappa: float

    def __post_init__(self):
        k = float(self.kappa)
        if k == 0 or not math.isfinite(k):
            raise ValueError("kappa must be finite and nonzero")
        object.__setattr__(self, "kappa", k)

    @property
    def sign(self):
        return 1 if self.kappa > 0 else -1

    def weight(self, z):
        k = abs(self.kappa)
        return np.exp(-np.abs(z) ** 2 / k) / (math.pi * k)

    @property
    def envelope_rate(self):
        """Decay rate of weight times ``|exp(C)|``: ``|1/kappa - 1/2|``."""
        return abs(1 / self.kappa - 0.5)

    def normalization(self, points=200):
        spec = GaussianIntegralSpec(zeta=-1 / abs(self.kappa))
        return quadrature(spec, points=points) / abs(self.kappa)


def matrix_quadrature_radius(rate, block, log_tail=36.0):
    """Box half-width for matrix-valued Gaussian integrals.

    Entries of the integrand on a ``block`` x ``block`` trusted block grow at
    most like ``(sqrt2 |z|)^(2 block - 2) / (block - 1)!``; the radius is
    the smallest one where that growth times ``exp(-rate |z|^2)`` is below
    ``exp(-log_tail)``.
    """
    degree = 2 * (block - 1)
    shift = math.lgamma(block)

    def margin(r):
        return rate * r * r - degree * max(0.0, math.log(math.sqrt(2) * r)) + shift

    r = 1.25 * math.sqrt(TAIL_LOG / rate)
    while margin(r) < log_tail:
        r *= 1.02
    return r


def unravel_matrix(kappa, cfg, grid=None, pad=80):
    """Quadrature of ``weight(z) O_PQ exp(i z p + sign conj(z) q)`` over the plane."""
    kernel = UnravelKernel(kappa)
    grid = grid or QuadratureGrid()
    radius = grid.radius
    if radius is None:
        radius = matrix_quadrature_radius(kernel.envelope_rate, cfg.M)
    if kernel.envelope_rate * radius * radius < TAIL_LOG:
        raise TailBoundError(f"radius {radius:g} too small for kappa={kappa}")
    z, w = grid.nodes(radius)
    w = w * kernel.weight(z)
    alpha = kernel.sign * z.conj()
    beta = 1j * z
    dim = cfg.N

    def chunk_sum(sl):
        mats = ordered_exp_linear_batch(PQ, alpha[sl], beta[sl], dim, pad=pad)
        return np.tensordot(w[sl], mats, axes=1)

    slices = [slice(i, i + grid.chunk) for i in range(0, z.size, grid.chunk)]
    return _parallel.ordered_sum(chunk_sum, slices)


def unravel_check(kappa, cfg, grid=None):
    """Residual between the unraveled quadrature and the PQ series for ``O_PQ exp(i kappa p q)``.

    Requires ``0 < |kappa| < 1``.
    """
    if not 0 < abs(kappa) < 1:
        raise ValueError(f"unravel check needs 0 < |kappa| < 1, got {kappa}")
    quad = unravel_matrix(kappa, cfg, grid)
    series = ordered_exp_pq_bilinear(kappa, cfg)
    return series.residual(quad)
