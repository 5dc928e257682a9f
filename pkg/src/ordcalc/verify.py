"""The acceptance suite as data: one check per identity, one report.

Every default (truncations, grids, seeds, tolerances) lives in
:data:`DEFAULTS`.  A check returns a :class:`CheckResult` made of
parts; the check passes when every part is within its own tolerance.
"""

from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
import copy
import json
import math
import time

import numpy as np

from . import gaussian, gwt, squeeze
from .errors import ConfigError, OrdcalcError
from .fock import FockConfig
from .orderings import NORMAL, PQ, LinearForm, _as_complex, gaussian_rational, ordered_exp_linear_batch

__all__ = [
    "DEFAULTS",
    "CHECKS",
    "CheckPart",
    "CheckResult",
    "VerifyReport",
    "VerifySettings",
    "run_check",
    "run_verify",
]

DEFAULTS = {
    "version": 1,
    "N": 80,
    "M": 20,
    "r_grid": [-0.5, -0.2, 0.0, 0.2, 0.5],
    "headline_r": [-0.5, -0.2, 0.2, 0.5, 0.7],
    "gwt_N": 40,
    "gwt_M": 13,
    "gwt_samples": 50,
    "scalar_samples": 100,
    "gaussian_samples": 20,
    "unravel_kappas": [0.5, -0.5],
    "unravel_N": 40,
    "unravel_M": 10,
    "ode_dmu": 1e-3,
    "ode_min_order": 1.8,
    "mu_grid": {"start": 0.25, "stop": 4.0, "points": 50},
    "seed": 20240517,
    "tolerances": {
        "headline_factorization": 1e-8,
        "gwt_matrix_identity": 1e-8,
        "contraction_closed_form": 1e-14,
        "bch_matches_gwt": 1e-14,
        "gaussian_integral": 1e-6,
        "unraveling": 1e-6,
        "construction_agreement": {
            "exact": 1e-10,
            "qp": 1e-10,
            "position": 1e-6,
            "pq_series": 1e-6,
            "unraveled": 1e-5,
            "factored": 1e-8,
            "vacuum_amplitude": 1e-8,
        },
        "ode_residual": 1e-6,
        "squeezing_action": 1e-7,
        "coefficient_consistency": 1e-12,
    },
}

IDENTITIES = {
    "headline_factorization": "normal-ordered cosh/tanh factorization",
    "gwt_matrix_identity": "reordering of a linear exponential",
    "contraction_closed_form": "PQ to normal contraction",
    "bch_matches_gwt": "three-step BCH disentangling",
    "gaussian_integral": "complex Gaussian integral",
    "unraveling": "Gaussian unraveling of exp(i kappa p q)",
    "construction_agreement": "independent constructions of S",
    "ode_residual": "dS/dmu differential equation",
    "squeezing_action": "squeezing action on q and p",
    "coefficient_consistency": "normal-ordered coefficients",
}


@dataclass(frozen=True)
class VerifySettings:
    """Truncation, r grid and tolerance overrides for one verify run."""

    N: int = DEFAULTS["N"]
    M: int = DEFAULTS["M"]
    r_grid: tuple = tuple(DEFAULTS["r_grid"])
    tolerance: float = None
    check_tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.N, int) or not isinstance(self.M, int) or not 1 <= self.M <= self.N:
            raise ConfigError(f"need integers 1 <= M <= N, got N={self.N}, M={self.M}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        for name, tol in self.check_tolerances.items():
            if name not in CHECKS:
                raise ConfigError(f"unknown check {name!r}")
            if not tol > 0:
                raise ConfigError(f"tolerance for {name} must be positive, got {tol}")
        object.__setattr__(self, "r_grid", tuple(float(r) for r in self.r_grid))

    @property
    def truncation_limited(self):
        """True when N < 2M, where edge artifacts reach the trusted block."""
        return self.N < 2 * self.M

    def warnings(self):
        out = []
        if self.truncation_limited:
            out.append(f"N={self.N} < 2M={2 * self.M}: failures are expected to be truncation-dominated")
        wide = [r for r in self.r_grid if abs(r) > 0.7]
        if wide:
            out.append(f"r values {wide} exceed |r| <= 0.7 where N=80 is calibrated")
        return out

    def tolerance_for(self, name, part=None):
        if self.tolerance is not None:
            return self.tolerance
        if name in self.check_tolerances:
            return self.check_tolerances[name]
        tol = DEFAULTS["tolerances"][name]
        return tol[part] if isinstance(tol, dict) else tol

    def fock(self):
        return FockConfig(self.N, self.M)


@dataclass(frozen=True)
class CheckPart:
    """One measured value against its bound.

    ``bound="max"`` (a residual) passes when ``residual <= tolerance``;
    ``bound="min"`` (e.g. a convergence order) passes when ``residual >= tolerance``.
    """

    params: dict
    residual: float
    tolerance: float
    bound: str = "max"

    @property
    def passed(self):
        if self.bound == "min":
            return bool(self.residual >= self.tolerance)
        return bool(self.residual <= self.tolerance)

    @property
    def badness(self):
        """How far past (above 1) or inside (below 1) the bound the value is."""
        if self.bound == "min":
            return self.tolerance / self.residual if self.residual > 0 else math.inf
        return self.residual / self.tolerance


@dataclass(frozen=True)
class CheckResult:
    name: str
    identity: str
    parts: tuple
    error: str = None
    truncation_dominated: bool = False

    @property
    def passed(self):
        return self.error is None and all(p.passed for p in self.parts)

    @property
    def worst(self):
        """The part with the largest residual-to-tolerance ratio."""
        if not self.parts:
            return None
        return max(self.parts, key=lambda p: p.badness)

    def to_dict(self):
        worst = self.worst
        return {
            "name": self.name,
            "identity": self.identity,
            "passed": self.passed,
            "residual": None if worst is None else worst.residual,
            "tolerance": None if worst is None else worst.tolerance,
            "truncation_dominated": self.truncation_dominated,
            "error": self.error,
            "parts": [
                {"params": p.params, "residual": p.residual, "tolerance": p.tolerance,
                 "bound": p.bound, "passed": p.passed}
                for p in self.parts
            ],
        }

    @classmethod
    def from_dict(cls, d):
        parts = tuple(CheckPart(p["params"], p["residual"], p["tolerance"], p["bound"]) for p in d["parts"])
        return cls(d["name"], d["identity"], parts, d["error"], d["truncation_dominated"])


@dataclass(frozen=True)
class VerifyReport:
    """All check results plus the configuration that produced them.

    ``wall_time`` is kept out of :meth:`to_json` unless asked for, so equal
    inputs serialize to identical bytes.
    """

    config: dict
    checks: tuple
    wall_time: float = None

    @property
    def total(self):
        return len(self.checks)

    @property
    def passed(self):
        return sum(c.passed for c in self.checks)

    @property
    def ok(self):
        return self.passed == self.total

    def to_dict(self, include_timing=False):
        summary = {"total": self.total, "passed": self.passed}
        if include_timing and self.wall_time is not None:
            summary["wall_time"] = self.wall_time
        return {
            "version": DEFAULTS["version"],
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "summary": summary,
        }

    def to_json(self, include_timing=False):
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        checks = tuple(CheckResult.from_dict(c) for c in d["checks"])
        return cls(d["config"], checks, d["summary"].get("wall_time"))

    def render_text(self):
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            worst = c.worst
            if c.error is not None:
                detail = f"error: {c.error}"
            else:
                detail = f"residual {worst.residual:.3e} (tol {worst.tolerance:.1e}) at {_fmt_params(worst.params)}"
            flag = "  [truncation-dominated]" if c.truncation_dominated and not c.passed else ""
            lines.append(f"{status}  {c.name:<26} {detail}{flag}")
        tail = f"{self.passed}/{self.total} checks passed"
        if self.wall_time is not None:
            tail += f" in {self.wall_time:.1f} s"
        lines.append(tail)
        return "\n".join(lines)


def _fmt_params(params):
    return ", ".join(f"{k}={v}" for k, v in params.items()) or "-"


def _rng(offset):
    return np.random.default_rng(DEFAULTS["seed"] + offset)


def _random_disc(rng, n, radius=1.0):
    rad = radius * np.sqrt(rng.uniform(0, 1, n))
    ang = rng.uniform(0, 2 * math.pi, n)
    return rad * np.exp(1j * ang)


def _exact(z):
    return gaussian_rational(Fraction(z.real), Fraction(z.imag))


# --- checks -----------------------------------------------------------------

def check_headline_factorization(s):
    cfg = s.fock()
    tol = s.tolerance_for("headline_factorization")
    parts = []
    for r in DEFAULTS["headline_r"]:
        p = squeeze.SqueezeParams(r)
        res = squeeze.squeeze_normal_factored(p, cfg).residual(squeeze.squeeze_exact(p, cfg))
        parts.append(CheckPart({"r": r}, float(res), tol))
    return parts


def check_gwt_matrix_identity(s):
    cfg = FockConfig(DEFAULTS["gwt_N"], DEFAULTS["gwt_M"])
    tol = s.tolerance_for("gwt_matrix_identity")
    zs = _random_disc(_rng(2), DEFAULTS["gwt_samples"])
    alphas, betas, prefactors, labels = [], [], [], []
    for i, z in enumerate(zs):
        for sign in (1, -1):
            X = LinearForm.unraveling(_exact(z), sign)
            C = gwt.general_contraction(PQ, NORMAL, X)
            alphas.append(_as_complex(X.alpha))
            betas.append(_as_complex(X.beta))
            prefactors.append(C.prefactor)
            labels.append((i, sign))
    lhs = ordered_exp_linear_batch(PQ, alphas, betas, cfg.N)
    rhs = ordered_exp_linear_batch(NORMAL, alphas, betas, cfg.N)
    m = cfg.M
    diff = lhs[:, :m, :m] - np.asarray(prefactors)[:, None, None] * rhs[:, :m, :m]
    res = np.linalg.norm(diff, axis=(1, 2))
    worst = int(np.argmax(res))
    i, sign = labels[worst]
    return [CheckPart({"samples": len(labels), "worst_z": str(complex(zs[i])), "worst_sign": sign,
                       "N": cfg.N, "M": m}, float(res[worst]), tol)]


def check_contraction_closed_form(s):
    tol = s.tolerance_for("contraction_closed_form")
    zs = _random_disc(_rng(3), DEFAULTS["scalar_samples"])
    worst, where = 0.0, None
    for z in zs:
        for sign in (1, -1):
            C = gwt.general_contraction(PQ, NORMAL, LinearForm.unraveling(complex(z), sign))
            zc = z.conjugate()
            expected = 0.25 * (zc * zc - z * z) + sign * 0.5 * abs(z) ** 2
            err = abs(C.value - expected)
            if err > worst or where is None:
                worst, where = max(worst, err), (str(complex(z)), sign)
    return [CheckPart({"samples": 2 * len(zs), "worst_z": where[0], "worst_sign": where[1]}, float(worst), tol)]


def check_bch_matches_gwt(s):
    tol = s.tolerance_for("bch_matches_gwt")
    rng = _rng(4)
    a_s = _random_disc(rng, DEFAULTS["scalar_samples"])
    b_s = _random_disc(rng, DEFAULTS["scalar_samples"])
    worst, where = -1.0, None
    for a, b in zip(a_s, b_s):
        bch = gwt.bch_three_step(a, b)
        one_step = gwt.general_contraction(PQ, NORMAL, LinearForm(complex(a), complex(b))).value
        err = abs(bch - one_step)
        if err > worst:
            worst, where = err, (str(complex(a)), str(complex(b)))
    return [CheckPart({"samples": len(a_s), "worst_a": where[0], "worst_b": where[1]}, float(worst), tol)]


def random_gaussian_specs(rng, count):
    """Convergent integral specs with nonzero ``f`` and ``g``."""
    specs = []
    while len(specs) < count:
        zeta = complex(-rng.uniform(0.8, 2.0), rng.uniform(-0.5, 0.5))
        xi, eta = _random_disc(rng, 2, 1.0)
        f, g = _random_disc(rng, 2, 0.4)
        try:
            specs.append(gaussian.GaussianIntegralSpec(zeta, xi, eta, f, g))
        except OrdcalcError:
            continue
    return specs


def check_gaussian_integral(s):
    tol = s.tolerance_for("gaussian_integral")
    parts = []
    for i, spec in enumerate(random_gaussian_specs(_rng(5), DEFAULTS["gaussian_samples"])):
        res = abs(gaussian.closed_form(spec) - gaussian.quadrature(spec))
        parts.append(CheckPart({"sample": i}, float(res), tol))
    return parts


def check_unraveling(s):
    cfg = FockConfig(DEFAULTS["unravel_N"], DEFAULTS["unravel_M"])
    tol = s.tolerance_for("unraveling")
    return [CheckPart({"kappa": k, "N": cfg.N, "M": cfg.M}, float(gaussian.unravel_check(k, cfg)), tol)
            for k in DEFAULTS["unravel_kappas"]]


CONSTRUCTIONS = {
    "exact": squeeze.squeeze_exact,
    "qp": squeeze.squeeze_qp,
    "position": squeeze.squeeze_position_integral,
    "pq_series": squeeze.squeeze_pq_ordered,
    "unraveled": squeeze.squeeze_unraveled,
    "factored": squeeze.squeeze_normal_factored,
}


def check_construction_agreement(s):
    """Every pair of routes, held to the looser of the two route tolerances."""
    cfg = s.fock()
    parts = []
    names = list(CONSTRUCTIONS)
    for r in s.r_grid:
        p = squeeze.SqueezeParams(r)
        mats = {name: build(p, cfg) for name, build in CONSTRUCTIONS.items()}
        for i, first in enumerate(names):
            for second in names[i + 1:]:
                tol = max(s.tolerance_for("construction_agreement", first),
                          s.tolerance_for("construction_agreement", second))
                res = mats[first].residual(mats[second])
                parts.append(CheckPart({"r": r, "pair": f"{first}/{second}"}, float(res), tol))
        vac = mats["position"].matrix[0, 0]
        parts.append(CheckPart({"r": r, "pair": "position/<0|S|0>"},
                               float(abs(vac - math.cosh(r) ** -0.5)),
                               s.tolerance_for("construction_agreement", "vacuum_amplitude")))
    return parts


def check_ode_residual(s):
    """Residual at ``dmu`` below tolerance, and residual ratio on halving showing order two."""
    cfg = s.fock()
    tol = s.tolerance_for("ode_residual")
    dmu = DEFAULTS["ode_dmu"]
    parts = []
    for r in s.r_grid:
        p = squeeze.SqueezeParams(r)
        coarse = squeeze._ode_residual(p, cfg, dmu, "anticommutator")
        fine = squeeze._ode_residual(p, cfg, dmu / 2, "anticommutator")
        order = math.log2(coarse / fine) if fine > 0 and coarse > 0 else math.inf
        parts.append(CheckPart({"r": r, "dmu": dmu, "measure": "residual"}, float(coarse), tol))
        parts.append(CheckPart({"r": r, "dmu": dmu, "measure": "order on halving"},
                               float(order), DEFAULTS["ode_min_order"], "min"))
    return parts


def check_squeezing_action(s):
    cfg = s.fock()
    tol = s.tolerance_for("squeezing_action")
    parts = []
    for r in s.r_grid:
        p = squeeze.SqueezeParams(r)
        rq, rp = squeeze.verify_squeeze_action(p, cfg)
        rc = squeeze.squeezed_commutator_residual(p, cfg)
        parts.append(CheckPart({"r": r, "relation": "S^dag q S = e^-r q"}, float(rq), tol))
        parts.append(CheckPart({"r": r, "relation": "S^dag p S = e^+r p"}, float(rp), tol))
        parts.append(CheckPart({"r": r, "relation": "[q', p'] = i"}, float(rc), tol))
    return parts


HAND_VALUES_MU2 = {"prefactor": math.sqrt(0.8), "c_pq_re": 0.0, "c_pq_im": 0.6,
                   "c_sq": -0.1, "c_a2": 0.3, "c_ad2": -0.3, "c_n": -0.2}


def check_coefficient_consistency(s):
    tol = s.tolerance_for("coefficient_consistency")
    g = DEFAULTS["mu_grid"]
    worst_cc, worst_int, at_cc, at_int = 0.0, 0.0, None, None
    for mu in np.geomspace(g["start"], g["stop"], g["points"]):
        p = squeeze.SqueezeParams.from_mu(mu)
        ref = squeeze.normal_ordered_coefficients(p)
        d_cc = ref.max_difference(squeeze.normal_ordered_coefficients_cc(p))
        d_int = ref.max_difference(squeeze.normal_ordered_coefficients_from_integral(p))
        if at_cc is None or d_cc > worst_cc:
            worst_cc, at_cc = d_cc, float(mu)
        if at_int is None or d_int > worst_int:
            worst_int, at_int = d_int, float(mu)
    got = squeeze.normal_ordered_coefficients(squeeze.SqueezeParams.from_mu(2.0)).as_dict()
    hand = max(abs(got[k] - v) for k, v in HAND_VALUES_MU2.items())
    return [
        CheckPart({"routes": "substitution/cosh-tanh", "worst_mu": at_cc}, float(worst_cc), tol),
        CheckPart({"routes": "substitution/gaussian-integral", "worst_mu": at_int}, float(worst_int), tol),
        CheckPart({"routes": "substitution/hand values", "mu": 2.0}, float(hand), tol),
    ]


CHECKS = {
    "headline_factorization": check_headline_factorization,
    "gwt_matrix_identity": check_gwt_matrix_identity,
    "contraction_closed_form": check_contraction_closed_form,
    "bch_matches_gwt": check_bch_matches_gwt,
    "gaussian_integral": check_gaussian_integral,
    "unraveling": check_unraveling,
    "construction_agreement": check_construction_agreement,
    "ode_residual": check_ode_residual,
    "squeezing_action": check_squeezing_action,
    "coefficient_consistency": check_coefficient_consistency,
}

# checks whose Fock truncation follows the run's N and M
_USES_RUN_TRUNCATION = {"headline_factorization", "construction_agreement",
                        "ode_residual", "squeezing_action"}


def run_check(name, settings=None):
    settings = settings or VerifySettings()
    try:
        parts = tuple(CHECKS[name](settings))
        error = None
    except OrdcalcError as exc:
        parts, error = (), f"{type(exc).__name__}: {exc}"
    flagged = settings.truncation_limited and name in _USES_RUN_TRUNCATION
    return CheckResult(name, IDENTITIES[name], parts, error, flagged)


def settings_dict(settings):
    d = asdict(settings)
    d["r_grid"] = list(d["r_grid"])
    d["check_tolerances"] = dict(sorted(d["check_tolerances"].items()))
    return d


def resolved_config(settings=None):
    """The defaults table with run settings applied, as printed by ``verify --show-config``."""
    settings = settings or VerifySettings()
    cfg = copy.deepcopy(DEFAULTS)
    cfg["N"], cfg["M"], cfg["r_grid"] = settings.N, settings.M, list(settings.r_grid)
    for name in CHECKS:
        tol = cfg["tolerances"][name]
        if isinstance(tol, dict):
            cfg["tolerances"][name] = {k: settings.tolerance_for(name, k) for k in tol}
        else:
            cfg["tolerances"][name] = settings.tolerance_for(name)
    return cfg


def run_verify(settings=None, checks=None, progress=None):
    """Run ``checks`` (default: all, in table order) and return a :class:`VerifyReport`."""
    settings = settings or VerifySettings()
    names = list(CHECKS) if checks is None else list(checks)
    start = time.perf_counter()
    results = []
    for name in names:
        result = run_check(name, settings)
        if progress is not None:
            progress(result)
        results.append(result)
    report = VerifyReport(settings_dict(settings), tuple(results))
    return replace(report, wall_time=time.perf_counter() - start)
