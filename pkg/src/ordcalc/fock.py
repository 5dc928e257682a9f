"""Truncated Fock-space matrices for a single bosonic mode.

Everything here is numeric.  Operators are N x N complex matrices on the
lowest N number states; comparisons are made on a leading M x M "trusted
block" where truncation artifacts are negligible.  Units: hbar = 1 and
[q, p] = i, with c = (q + i p) / sqrt(2).
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
import scipy.linalg

from .errors import ConfigError, ConvergenceError

__all__ = [
    "FockConfig",
    "TruncatedOperator",
    "ladder_ops",
    "quadrature_ops",
    "number_op",
    "identity",
    "matrix_exp",
    "hermite_function",
    "hermite_table",
    "exp_creation",
    "exp_quadrature",
    "HERMITE_MAX_ORDER",
]

#: Largest order accepted by :func:`hermite_function`.
HERMITE_MAX_ORDER = 200


@dataclass(frozen=True)
class FockConfig:
    """Fock truncation ``N``, trusted block ``M`` and default tolerance.

    ``trusted_block`` defaults to ``N // 3``.
    """

    truncation: int
    trusted_block: int = None
    tolerance: float = 1e-10

    def __post_init__(self):
        n = self.truncation
        if not isinstance(n, (int, np.integer)) or n < 2:
            raise ConfigError(f"truncation must be an integer >= 2, got {n!r}")
        if self.trusted_block is None:
            object.__setattr__(self, "trusted_block", max(1, n // 3))
        m = self.trusted_block
        if not isinstance(m, (int, np.integer)) or not 1 <= m <= n:
            raise ConfigError(f"trusted block must satisfy 1 <= M <= N={n}, got {m!r}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance!r}")

    @property
    def N(self):
        return self.truncation

    @property
    def M(self):
        return self.trusted_block


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """An operator restricted to the lowest ``dim`` Fock states.

    The wrapped matrix is made read-only on construction.  Arithmetic
    between two operators keeps the smaller trusted block.
    """

    matrix: np.ndarray
    trusted_block: int = field(default=None)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ConfigError(f"operator matrix must be square, got shape {mat.shape}")
        if mat.shape[0] < 2:
            raise ConfigError("operator dimension must be >= 2")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        m = self.trusted_block
        if m is None:
            m = max(1, mat.shape[0] // 3)
        if not 1 <= m <= mat.shape[0]:
            raise ConfigError(f"trusted block {m} outside 1..{mat.shape[0]}")
        object.__setattr__(self, "trusted_block", int(m))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def block(self, size=None):
        """Top-left ``size`` x ``size`` submatrix (default: the trusted block)."""
        size = self.trusted_block if size is None else size
        return self.matrix[:size, :size]

    def adjoint(self):
        return TruncatedOperator(self.matrix.conj().T, self.trusted_block)

    @property
    def H(self):
        return self.adjoint()

    def residual(self, other, size=None):
        """Frobenius norm of ``self - other`` on the common trusted block."""
        if size is None:
            size = min(self.trusted_block, _trusted(other, self.trusted_block))
        other_mat = other.matrix if isinstance(other, TruncatedOperator) else np.asarray(other)
        return float(np.linalg.norm(self.matrix[:size, :size] - other_mat[:size, :size]))

    def _combine(self, other, op):
        if isinstance(other, TruncatedOperator):
            if other.dim != self.dim:
                raise ConfigError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return TruncatedOperator(op(self.matrix, other.matrix),
                                     min(self.trusted_block, other.trusted_block))
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __matmul__(self, other):
        return self._combine(other, np.matmul)

    def __mul__(self, scalar):
        if isinstance(scalar, TruncatedOperator):
            return NotImplemented
        return TruncatedOperator(self.matrix * complex(scalar), self.trusted_block)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TruncatedOperator(self.matrix / complex(scalar), self.trusted_block)

    def __neg__(self):
        return TruncatedOperator(-self.matrix, self.trusted_block)

    def __repr__(self):
        return f"TruncatedOperator(dim={self.dim}, trusted_block={self.trusted_block})"


def _trusted(other, default):
    return other.trusted_block if isinstance(other, TruncatedOperator) else default


def _annihilation_matrix(n):
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def ladder_ops(cfg):
    """Return ``(a, a_dag)`` with ``a|n> = sqrt(n)|n-1>`` truncated at ``cfg.N``."""
    a = _annihilation_matrix(cfg.N)
    return (TruncatedOperator(a, cfg.M), TruncatedOperator(a.conj().T, cfg.M))


def quadrature_ops(cfg):
    """Return ``(q, p)`` with ``q = (a + a_dag)/sqrt 2`` and ``p = (a - a_dag)/(i sqrt 2)``."""
    a = _annihilation_matrix(cfg.N)
    ad = a.conj().T
    q = (a + ad) / math.sqrt(2)
    p = (a - ad) / (1j * math.sqrt(2))
    return TruncatedOperator(q, cfg.M), TruncatedOperator(p, cfg.M)


def number_op(cfg):
    return TruncatedOperator(np.diag(np.arange(cfg.N, dtype=complex)), cfg.M)


def identity(cfg):
    return TruncatedOperator(np.eye(cfg.N, dtype=complex), cfg.M)


def matrix_exp(op):
    """Matrix exponential of a truncated operator.

    Uses Pade scaling-and-squaring (:func:`scipy.linalg.expm`).  The result
    is checked for finiteness; on failure a :class:`ConvergenceError`
    reports the 1-norm of the input and the squaring depth it implies.
    """
    mat = op.matrix if isinstance(op, TruncatedOperator) else np.asarray(op, dtype=complex)
    trusted = _trusted(op, None)
    if not np.all(np.isfinite(mat)):
        raise ConvergenceError("matrix exponential of a non-finite matrix")
    with np.errstate(over="ignore", invalid="ignore"):
        out = scipy.linalg.expm(mat)
    if not np.all(np.isfinite(out)):
        norm = float(np.linalg.norm(mat, 1))
        depth = max(0, math.ceil(math.log2(norm))) if norm > 0 else 0
        raise ConvergenceError(
            f"matrix exponential overflowed (1-norm {norm:.3e}, scaling depth {depth})")
    return TruncatedOperator(out, trusted)


def hermite_table(nmax, x):
    """Oscillator eigenfunctions ``psi_0 .. psi_nmax`` evaluated at ``x``.

    Returns an array of shape ``(nmax + 1,) + np.shape(x)``.  Built with the
    normalized three-term recurrence

        psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1},

    which never forms factorials or raw Hermite polynomials.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _hermite_poly_table(nmax, x):
    # psi_n(x) * exp(x**2 / 2); same recurrence, no Gaussian factor
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = np.pi ** -0.25
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_function(n, x):
    """Normalized harmonic-oscillator eigenfunction ``psi_n(x)``.

    Orders above :data:`HERMITE_MAX_ORDER` are rejected.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"order must be a non-negative integer, got {n!r}")
    if n > HERMITE_MAX_ORDER:
        raise ValueError(f"order {n} exceeds HERMITE_MAX_ORDER={HERMITE_MAX_ORDER}")
    val = hermite_table(n, x)[n]
    return float(val) if np.ndim(val) == 0 else val


@lru_cache(maxsize=64)
def _creation_kernel(dim):
    # K[m, j] = sqrt(m!/j!) / (m-j)!  for m >= j, so exp(lam a_dag) = K * lam**(m-j)
    m = np.arange(dim)[:, None]
    j = np.arange(dim)[None, :]
    diff = m - j
    lower = diff >= 0
    logk = np.where(
        lower,
        0.5 * (_lgamma(m + 1) - _lgamma(j + 1)) - _lgamma(np.maximum(diff, 0) + 1),
        -np.inf,
    )
    kernel = np.exp(logk)
    kernel.setflags(write=False)
    return kernel, np.where(lower, diff, 0)


def _lgamma(x):
    return np.vectorize(math.lgamma, otypes=[float])(x)


def exp_creation(lam, dim):
    """``exp(lam * a_dag)`` on the lowest ``dim`` states, exact entry by entry.

    ``lam`` may be an array; the result then has shape ``lam.shape + (dim, dim)``.
    ``exp(lam * a)`` is the transpose.
    """
    kernel, diff = _creation_kernel(dim)
    lam = np.asarray(lam, dtype=complex)
    powers = lam[..., None, None] ** diff
    return kernel * powers


@lru_cache(maxsize=16)
def _quadrature_power_table(which, dim, work_dim, transpose):
    # rows: X^k / k! restricted to [:work_dim, :dim], flattened; k < work_dim - dim is exact
    a = _annihilation_matrix(work_dim)
    ad = a.conj().T
    if which == "q":
        x = (a + ad) / math.sqrt(2)
    else:
        x = (a - ad) / (1j * math.sqrt(2))
    if transpose:
        x = x.T.copy()
    terms = work_dim
    table = np.empty((terms, work_dim, dim), dtype=complex)
    t = np.eye(work_dim, dtype=complex)[:, :dim]
    for k in range(terms):
        table[k] = t
        t = x @ t / (k + 1)
    table = table.reshape(terms, -1)
    table.setflags(write=False)
    return table


def exp_quadrature(coeffs, which, dim, work_dim=None, transpose=False):
    """Columns of ``exp(c X)`` for ``X`` in {q, p}, by direct Taylor summation.

    Returns ``exp(c X)[:work_dim, :dim]`` for each coefficient in ``coeffs``
    (shape ``(len(coeffs), work_dim, dim)``).  With ``transpose=True`` the
    rows ``exp(c X)[:dim, :work_dim]`` are returned transposed instead.

    The series is summed term by term in a padded space of size
    ``work_dim``.  Scaling-and-squaring is avoided on purpose: the truncated
    quadrature has norm ~ sqrt(2 work_dim), and squaring would mix that
    growth into the low-lying entries, while direct summation keeps every
    term with k < work_dim - dim exact on the returned columns.
    """
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if which not in ("q", "p"):
        raise ValueError(f"which must be 'q' or 'p', got {which!r}")
    if work_dim is None:
        cmax = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
        work_dim = dim + int(min(160, 40 + math.ceil(4 * cmax * cmax)))
    table = _quadrature_power_table(which, dim, work_dim, transpose)
    ks = np.arange(table.shape[0])
    with np.errstate(over="ignore", invalid="ignore"):
        vander = coeffs[:, None] ** ks
    vander[:, 0] = 1.0
    out = (vander @ table).reshape(len(coeffs), work_dim, dim)
    return out
