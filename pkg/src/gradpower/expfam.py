"""One-parameter exponential-family models.

A model is the density ``exp{-log zeta(theta) - alpha(theta) d(x) + v(x)}``
on its support, with ``beta(theta) = zeta'(theta) / (zeta(theta) alpha'(theta))``
and Fisher information ``K(theta) = alpha'(theta) beta'(theta)``.  The module
ships a nine-entry catalog (normal with either parameter tested, inverse
normal likewise, gamma, truncated extreme value, Pareto, Laplace, power),
analytic cumulants, maximum likelihood estimation, and seedable samplers.

All catalog callables are module-level functions bound with
``functools.partial`` so models pickle cleanly across process boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, EstimationError

__all__ = [
    "CATALOG_NAMES",
    "CumulantSet",
    "ExpFamModel",
    "Support",
    "catalog_model",
    "cumulants",
    "load_data",
    "mle",
    "mle_from_dbar",
    "model_info",
    "sample",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Support:
    """Interval of observable values, with open/closed endpoints."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_open: bool = True
    hi_open: bool = True

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        lo_ok = (x > self.lo) if self.lo_open else (x >= self.lo)
        hi_ok = (x < self.hi) if self.hi_open else (x <= self.hi)
        return bool(np.all(np.isfinite(x) & lo_ok & hi_ok))

    def __str__(self) -> str:
        lb = "(" if self.lo_open else "["
        rb = ")" if self.hi_open else "]"
        return f"{lb}{self.lo}, {self.hi}{rb}"


@dataclass(frozen=True)
class ExpFamModel:
    """A one-parameter exponential-family model definition.

    ``alpha`` and ``beta`` come with analytic first/second derivatives;
    numerical differentiation is deliberately avoided so the cumulant chain
    stays auditable.  ``sampler(theta, n, rng)`` must consume only the given
    ``numpy.random.Generator`` and return ``n`` i.i.d. draws.
    """

    name: str
    alpha: Callable[[float], float]
    alpha_d1: Callable[[float], float]
    alpha_d2: Callable[[float], float]
    log_zeta: Callable[[float], float]
    beta: Callable[[float], float]
    beta_d1: Callable[[float], float]
    beta_d2: Callable[[float], float]
    d: Callable
    v: Callable
    support: Support
    param_space: tuple[float, float]
    sampler: Callable[[float, int, np.random.Generator], np.ndarray]
    fixed_params: Mapping[str, float] = field(default_factory=dict)
    mle_closed_form: Callable[[float], float] | None = None
    mle_bracket: Callable[[float], tuple[float, float]] | None = None

    def in_param_space(self, theta: float) -> bool:
        lo, hi = self.param_space
        return math.isfinite(theta) and lo < theta < hi

    def require_theta(self, theta: float) -> None:
        if not self.in_param_space(theta):
            lo, hi = self.param_space
            raise DomainError(
                f"theta={theta} outside parameter space ({lo}, {hi}) of {self.name!r}"
            )

    def fisher_information(self, theta: float) -> float:
        self.require_theta(theta)
        return self.alpha_d1(theta) * self.beta_d1(theta)


@dataclass(frozen=True)
class CumulantSet:
    """Per-observation log-likelihood cumulants at a fixed parameter value.

    ``k_tt`` is the expected second derivative (negative Fisher information),
    ``k_ttt`` the expected third derivative, ``k_t_tt`` the score-Hessian
    cross moment, ``k_t_t_t`` the third score cumulant, and ``k_inv`` the
    reciprocal ``-1/k_tt``.
    """

    k_tt: float
    k_ttt: float
    k_t_tt: float
    k_t_t_t: float
    k_inv: float


def cumulants(model: ExpFamModel, theta: float) -> CumulantSet:
    """Evaluate the four third-order cumulants from the analytic derivatives."""
    model.require_theta(theta)
    ap = model.alpha_d1(theta)
    app = model.alpha_d2(theta)
    bp = model.beta_d1(theta)
    bpp = model.beta_d2(theta)
    k_tt = -ap * bp
    return CumulantSet(
        k_tt=k_tt,
        k_ttt=-(2.0 * app * bp + ap * bpp),
        k_t_tt=app * bp,
        k_t_t_t=ap * bpp - app * bp,
        k_inv=-1.0 / k_tt,
    )


# ------------------------------------------------------------------ #
# Sampling primitives (uniform-driven, fully determined by the stream)
# ------------------------------------------------------------------ #


def _open_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    # uniforms in the open interval (0, 1); Generator.random() covers [0, 1)
    u = rng.random(n)
    zeros = u == 0.0
    if zeros.any():
        u[zeros] = 2.0 ** -54
    return u


def _standard_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    # Box-Muller on uniform pairs; consumption order is fixed by n alone
    m = (n + 1) // 2
    u1 = _open_unit(rng, m)
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * math.pi * u2
    z = np.concatenate([r * np.cos(ang), r * np.sin(ang)])
    return z[:n]


def _gamma_unit_rate(rng: np.random.Generator, shape: float, n: int) -> np.ndarray:
    # Marsaglia-Tsang squeeze-rejection, valid for all shape > 0 via the
    # u^(1/shape) boost below one.
    k = shape if shape >= 1.0 else shape + 1.0
    dd = k - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * dd)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = n - filled
        z = _standard_normal(rng, m)
        u = _open_unit(rng, m)
        v = (1.0 + c * z) ** 3
        pos = v > 0.0
        vsafe = np.where(pos, v, 1.0)
        squeeze = u < 1.0 - 0.0331 * z ** 4
        full = np.log(u) < 0.5 * z * z + dd * (1.0 - vsafe + np.log(vsafe))
        ok = pos & (squeeze | full)
        acc = dd * v[ok]
        out[filled : filled + acc.size] = acc
        filled += acc.size
    if shape < 1.0:
        out *= _open_unit(rng, n) ** (1.0 / shape)
    return out


def _invgauss(rng: np.random.Generator, mu: float, lam: float, n: int) -> np.ndarray:
    # Michael-Schucany-Haas: one squared normal, one uniform per draw
    z = _standard_normal(rng, n)
    y = z * z
    x1 = mu + mu * mu * y / (2.0 * lam) - (mu / (2.0 * lam)) * np.sqrt(
        4.0 * mu * lam * y + (mu * y) ** 2
    )
    x1 = np.maximum(x1, 1e-300)
    u = rng.random(n)
    return np.where(u <= mu / (mu + x1), x1, mu * mu / x1)


def _sample_normal_variance(mu, theta, n, rng):
    return mu + math.sqrt(theta) * _standard_normal(rng, n)


def _sample_normal_mean(var, theta, n, rng):
    return theta + math.sqrt(var) * _standard_normal(rng, n)


def _sample_invnormal_theta(mu, theta, n, rng):
    return _invgauss(rng, mu, theta, n)


def _sample_invnormal_mu(lam, theta, n, rng):
    return _invgauss(rng, theta, lam, n)


def _sample_gamma(k, theta, n, rng):
    return _gamma_unit_rate(rng, k, n) / theta


def _sample_tev(theta, n, rng):
    e = -np.log(_open_unit(rng, n))
    return np.log1p(theta * e)


def _sample_pareto(k, theta, n, rng):
    return k * _open_unit(rng, n) ** (-1.0 / theta)


def _sample_laplace(k, theta, n, rng):
    s = _open_unit(rng, n) - 0.5
    return k - theta * np.sign(s) * np.log1p(-2.0 * np.abs(s))


def _sample_power(phi, theta, n, rng):
    return phi * _open_unit(rng, n) ** (1.0 / theta)


# ------------------------------------------------------------------ #
# Catalog building blocks
# ------------------------------------------------------------------ #


def _identity(t):
    return t


def _const(c, t):
    return c


def _neg(t):
    return -t


def _recip(t):
    return 1.0 / t


def _neg_recip_sq(t):
    return -1.0 / (t * t)


def _two_over_cube(t):
    return 2.0 / t ** 3


def _log(t):
    return math.log(t)


# normal, variance tested (mean fixed)
def _nv_alpha(t):
    return 0.5 / t


def _nv_alpha_d1(t):
    return -0.5 / (t * t)


def _nv_alpha_d2(t):
    return 1.0 / t ** 3


def _nv_log_zeta(t):
    return 0.5 * math.log(t)


def _nv_d(mu, x):
    return (x - mu) ** 2


def _nv_v(x):
    return x * 0.0 - 0.5 * _LOG_2PI


# normal, mean tested (variance fixed)
def _nm_alpha(var, t):
    return -t / var


def _nm_alpha_d1(var, t):
    return -1.0 / var


def _nm_log_zeta(var, t):
    return t * t / (2.0 * var)


def _nm_v(var, x):
    return -x * x / (2.0 * var) - 0.5 * math.log(2.0 * math.pi * var)


# inverse normal, shape tested (mean fixed)
def _ivt_log_zeta(t):
    return -0.5 * math.log(t)


def _ivt_beta(t):
    return -0.5 / t


def _ivt_beta_d1(t):
    return 0.5 / (t * t)


def _ivt_beta_d2(t):
    return -1.0 / t ** 3


def _ivt_d(mu, x):
    return (x - mu) ** 2 / (2.0 * mu * mu * x)


def _ivt_v(x):
    return -0.5 * (_LOG_2PI + 3.0 * np.log(x))


# inverse normal, mean tested (shape fixed)
def _ivm_alpha(lam, t):
    return lam / (2.0 * t * t)


def _ivm_alpha_d1(lam, t):
    return -lam / t ** 3


def _ivm_alpha_d2(lam, t):
    return 3.0 * lam / t ** 4


def _ivm_log_zeta(lam, t):
    return -lam / t


def _ivm_v(lam, x):
    return -lam / (2.0 * x) + 0.5 * (math.log(lam) - _LOG_2PI - 3.0 * np.log(x))


# gamma, rate tested (shape fixed)
def _gam_log_zeta(k, t):
    return -k * math.log(t)


def _gam_beta(k, t):
    return -k / t


def _gam_beta_d1(k, t):
    return k / (t * t)


def _gam_beta_d2(k, t):
    return -2.0 * k / t ** 3


def _gam_v(k, x):
    return (k - 1.0) * np.log(x) - math.lgamma(k)


# truncated extreme value
def _tev_d(x):
    return np.expm1(x)


# Pareto, exponent tested (scale fixed)
def _par_alpha(t):
    return 1.0 + t


def _par_log_zeta(k, t):
    return -math.log(t) - t * math.log(k)


def _par_beta(k, t):
    return -1.0 / t - math.log(k)


def _par_beta_d1(t):
    return 1.0 / (t * t)


def _par_beta_d2(t):
    return -2.0 / t ** 3


def _log_d(x):
    return np.log(x)


def _zero_v(x):
    return x * 0.0


# Laplace, scale tested (location fixed)
def _lap_log_zeta(t):
    return math.log(2.0 * t)


def _lap_d(k, x):
    return np.abs(x - k)


# power, exponent tested (upper endpoint fixed)
def _pow_alpha(t):
    return 1.0 - t


def _pow_log_zeta(phi, t):
    return t * math.log(phi) - math.log(t)


def _pow_beta(phi, t):
    return 1.0 / t - math.log(phi)


def _pow_beta_d1(t):
    return -1.0 / (t * t)


# closed-form MLE roots of beta(theta) + dbar = 0
def _mle_dbar(dbar):
    return dbar


def _mle_half_recip(dbar):
    return 0.5 / dbar


def _mle_scaled_recip(k, dbar):
    return k / dbar


def _mle_pareto(logk, dbar):
    return 1.0 / (dbar - logk)


def _mle_power(logphi, dbar):
    return 1.0 / (logphi - dbar)


def _bracket_positive(closed, dbar):
    c = closed(dbar)
    if not (math.isfinite(c) and c > 0.0):
        raise EstimationError(f"cannot bracket MLE for dbar={dbar}")
    return (c / 16.0, c * 16.0)


def _bracket_real(closed, dbar):
    c = closed(dbar)
    if not math.isfinite(c):
        raise EstimationError(f"cannot bracket MLE for dbar={dbar}")
    w = 8.0 * (1.0 + abs(c))
    return (c - w, c + w)


_POSITIVE = (0.0, math.inf)
_REAL = (-math.inf, math.inf)


def _require_fixed(name: str, fixed: Mapping[str, float], key: str, positive: bool):
    if key not in fixed:
        raise DomainError(f"model {name!r} requires fixed constant {key!r}")
    val = float(fixed[key])
    if not math.isfinite(val):
        raise DomainError(f"fixed constant {key}={fixed[key]} must be finite")
    if positive and val <= 0.0:
        raise DomainError(f"fixed constant {key}={val} must be positive for {name!r}")
    extra = set(fixed) - {key}
    if extra:
        raise DomainError(f"model {name!r} got unexpected fixed constants {sorted(extra)}")
    return val


def _build_normal_variance(fixed):
    mu = _require_fixed("normal-variance", fixed, "mu", positive=False)
    closed = _mle_dbar
    return ExpFamModel(
        name="normal-variance",
        alpha=_nv_alpha,
        alpha_d1=_nv_alpha_d1,
        alpha_d2=_nv_alpha_d2,
        log_zeta=_nv_log_zeta,
        beta=_neg,
        beta_d1=partial(_const, -1.0),
        beta_d2=partial(_const, 0.0),
        d=partial(_nv_d, mu),
        v=_nv_v,
        support=Support(),
        param_space=_POSITIVE,
        sampler=partial(_sample_normal_variance, mu),
        fixed_params={"mu": mu},
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_positive, closed),
    )


def _build_normal_mean(fixed):
    var = _require_fixed("normal-mean", fixed, "theta", positive=True)
    closed = _mle_dbar
    return ExpFamModel(
        name="normal-mean",
        alpha=partial(_nm_alpha, var),
        alpha_d1=partial(_nm_alpha_d1, var),
        alpha_d2=partial(_const, 0.0),
        log_zeta=partial(_nm_log_zeta, var),
        beta=_neg,
        beta_d1=partial(_const, -1.0),
        beta_d2=partial(_const, 0.0),
        d=_identity,
        v=partial(_nm_v, var),
        support=Support(),
        param_space=_REAL,
        sampler=partial(_sample_normal_mean, var),
        fixed_params={"theta": var},
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_real, closed),
    )


def _build_invnormal_theta(fixed):
    mu = _require_fixed("invnormal-theta", fixed, "mu", positive=True)
    closed = _mle_half_recip
    return ExpFamModel(
        name="invnormal-theta",
        alpha=_identity,
        alpha_d1=partial(_const, 1.0),
        alpha_d2=partial(_const, 0.0),
        log_zeta=_ivt_log_zeta,
        beta=_ivt_beta,
        beta_d1=_ivt_beta_d1,
        beta_d2=_ivt_beta_d2,
        d=partial(_ivt_d, mu),
        v=_ivt_v,
        support=Support(lo=0.0),
        param_space=_POSITIVE,
        sampler=partial(_sample_invnormal_theta, mu),
        fixed_params={"mu": mu},
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_positive, closed),
    )


def _build_invnormal_mu(fixed):
    lam = _require_fixed("invnormal-mu", fixed, "theta", positive=True)
    closed = _mle_dbar
    return ExpFamModel(
        name="invnormal-mu",
        alpha=partial(_ivm_alpha, lam),
        alpha_d1=partial(_ivm_alpha_d1, lam),
        alpha_d2=partial(_ivm_alpha_d2, lam),
        log_zeta=partial(_ivm_log_zeta, lam),
        beta=_neg,
        beta_d1=partial(_const, -1.0),
        beta_d2=partial(_const, 0.0),
        d=_identity,
        v=partial(_ivm_v, lam),
        support=Support(lo=0.0),
        param_space=_POSITIVE,
        sampler=partial(_sample_invnormal_mu, lam),
        fixed_params={"theta": lam},
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_positive, closed),
    )


def _build_gamma(fixed):
    k = _require_fixed("gamma", fixed, "k", positive=True)
    closed = partial(_mle_scaled_recip, k)
    return ExpFamModel(
        name="gamma",
        alpha=_identity,
        alpha_d1=partial(_const, 1.0),
        alpha_d2=partial(_const, 0.0),
        log_zeta=partial(_gam_log_zeta, k),
        beta=partial(_gam_beta, k),
        beta_d1=partial(_gam_beta_d1, k),
        beta_d2=partial(_gam_beta_d2, k),
        d=_identity,
        v=partial(_gam_v, k),
        support=Support(lo=0.0),
        param_space=_POSITIVE,
        sampler=partial(_sample_gamma, k),
        fixed_params={"k": k},
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_positive, closed),
    )


def _build_tev(fixed):
    if fixed:
        raise DomainError(f"model 'tev' takes no fixed constants, got {sorted(fixed)}")
    closed = _mle_dbar
    return ExpFamModel(
        name="tev",
        alpha=_recip,
        alpha_d1=_neg_recip_sq,
        alpha_d2=_two_over_cube,
        log_zeta=_log,
        beta=_neg,
        beta_d1=partial(_const, -1.0),
        beta_d2=partial(_const, 0.0),
        d=_tev_d,
        v=_identity,
        support=Support(lo=0.0),
        param_space=_POSITIVE,
        sampler=_sample_tev,
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_positive, closed),
    )


def _build_pareto(fixed):
    k = _require_fixed("pareto", fixed, "k", positive=True)
    closed = partial(_mle_pareto, math.log(k))
    return ExpFamModel(
        name="pareto",
        alpha=_par_alpha,
        alpha_d1=partial(_const, 1.0),
        alpha_d2=partial(_const, 0.0),
        log_zeta=partial(_par_log_zeta, k),
        beta=partial(_par_beta, k),
        beta_d1=_par_beta_d1,
        beta_d2=_par_beta_d2,
        d=_log_d,
        v=_zero_v,
        support=Support(lo=k),
        param_space=_POSITIVE,
        sampler=partial(_sample_pareto, k),
        fixed_params={"k": k},
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_positive, closed),
    )


def _build_laplace(fixed):
    k = _require_fixed("laplace", fixed, "k", positive=False)
    closed = _mle_dbar
    # the density only normalizes on the whole real line, so the support is R
    return ExpFamModel(
        name="laplace",
        alpha=_recip,
        alpha_d1=_neg_recip_sq,
        alpha_d2=_two_over_cube,
        log_zeta=_lap_log_zeta,
        beta=_neg,
        beta_d1=partial(_const, -1.0),
        beta_d2=partial(_const, 0.0),
        d=partial(_lap_d, k),
        v=_zero_v,
        support=Support(),
        param_space=_POSITIVE,
        sampler=partial(_sample_laplace, k),
        fixed_params={"k": k},
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_positive, closed),
    )


def _build_power(fixed):
    phi = _require_fixed("power", fixed, "phi", positive=True)
    closed = partial(_mle_power, math.log(phi))
    # theta * phi^-theta * x^(theta-1) integrates to one on (0, phi)
    return ExpFamModel(
        name="power",
        alpha=_pow_alpha,
        alpha_d1=partial(_const, -1.0),
        alpha_d2=partial(_const, 0.0),
        log_zeta=partial(_pow_log_zeta, phi),
        beta=partial(_pow_beta, phi),
        beta_d1=_pow_beta_d1,
        beta_d2=_two_over_cube,
        d=_log_d,
        v=_zero_v,
        support=Support(lo=0.0, hi=phi),
        param_space=_POSITIVE,
        sampler=partial(_sample_power, phi),
        fixed_params={"phi": phi},
        mle_closed_form=closed,
        mle_bracket=partial(_bracket_positive, closed),
    )


_BUILDERS = {
    "normal-variance": _build_normal_variance,
    "normal-mean": _build_normal_mean,
    "invnormal-theta": _build_invnormal_theta,
    "invnormal-mu": _build_invnormal_mu,
    "gamma": _build_gamma,
    "tev": _build_tev,
    "pareto": _build_pareto,
    "laplace": _build_laplace,
    "power": _build_power,
}

CATALOG_NAMES = tuple(_BUILDERS)

_INFO = {
    "normal-variance": {
        "distribution": "normal with known mean mu, variance theta tested",
        "alpha": "1/(2 theta)",
        "zeta": "sqrt(theta)",
        "d": "(x - mu)^2",
        "v": "-log(2 pi)/2",
        "mle": "theta_hat = mean((x - mu)^2)",
        "fixed": "mu (real)",
        "support": "(-inf, inf)",
        "param_space": "theta > 0",
    },
    "normal-mean": {
        "distribution": "normal with known variance theta, mean tested",
        "alpha": "-mu/theta",
        "zeta": "exp(mu^2/(2 theta))",
        "d": "x",
        "v": "-x^2/(2 theta) - log(2 pi theta)/2",
        "mle": "mu_hat = mean(x)",
        "fixed": "theta (> 0)",
        "support": "(-inf, inf)",
        "param_space": "mu real",
    },
    "invnormal-theta": {
        "distribution": "inverse normal with known mean mu, shape theta tested",
        "alpha": "theta",
        "zeta": "theta^(-1/2)",
        "d": "(x - mu)^2 / (2 mu^2 x)",
        "v": "-log(2 pi x^3)/2",
        "mle": "theta_hat = 1 / (2 mean(d))",
        "fixed": "mu (> 0)",
        "support": "x > 0",
        "param_space": "theta > 0",
    },
    "invnormal-mu": {
        "distribution": "inverse normal with known shape theta, mean mu tested",
        "alpha": "theta/(2 mu^2)",
        "zeta": "exp(-theta/mu)",
        "d": "x",
        "v": "-theta/(2x) + log(theta/(2 pi x^3))/2",
        "mle": "mu_hat = mean(x)",
        "fixed": "theta (> 0)",
        "support": "x > 0",
        "param_space": "mu > 0",
    },
    "gamma": {
        "distribution": "gamma with known shape k, rate theta tested",
        "alpha": "theta",
        "zeta": "theta^(-k)",
        "d": "x",
        "v": "(k-1) log(x) - log(Gamma(k))",
        "mle": "theta_hat = k / mean(x)",
        "fixed": "k (> 0)",
        "support": "x > 0",
        "param_space": "theta > 0",
    },
    "tev": {
        "distribution": "truncated extreme value, scale theta tested",
        "alpha": "1/theta",
        "zeta": "theta",
        "d": "exp(x) - 1",
        "v": "x",
        "mle": "theta_hat = mean(exp(x) - 1)",
        "fixed": "none",
        "support": "x > 0",
        "param_space": "theta > 0",
    },
    "pareto": {
        "distribution": "Pareto with known scale k, exponent theta tested",
        "alpha": "1 + theta",
        "zeta": "1/(theta k^theta)",
        "d": "log(x)",
        "v": "0",
        "mle": "theta_hat = 1 / mean(log(x/k))",
        "fixed": "k (> 0)",
        "support": "x > k",
        "param_space": "theta > 0",
    },
    "laplace": {
        "distribution": "Laplace with known location k, scale theta tested",
        "alpha": "1/theta",
        "zeta": "2 theta",
        "d": "|x - k|",
        "v": "0",
        "mle": "theta_hat = mean(|x - k|)",
        "fixed": "k (real)",
        "support": "(-inf, inf)",
        "param_space": "theta > 0",
    },
    "power": {
        "distribution": "power on (0, phi) with known phi, exponent theta tested",
        "alpha": "1 - theta",
        "zeta": "phi^theta / theta",
        "d": "log(x)",
        "v": "0",
        "mle": "theta_hat = 1 / mean(log(phi/x))",
        "fixed": "phi (> 0)",
        "support": "0 < x < phi",
        "param_space": "theta > 0",
    },
}


def catalog_model(name: str, fixed: Mapping[str, float] | None = None) -> ExpFamModel:
    """Build a catalog model by name, binding its fixed constants."""
    if name not in _BUILDERS:
        raise DomainError(
            f"unknown model {name!r}; available: {', '.join(CATALOG_NAMES)}"
        )
    return _BUILDERS[name](dict(fixed or {}))


def model_info(name: str) -> Mapping[str, str]:
    """Static description of a catalog entry (functional forms, MLE, support)."""
    if name not in _INFO:
        raise DomainError(
            f"unknown model {name!r}; available: {', '.join(CATALOG_NAMES)}"
        )
    return dict(_INFO[name])


# ------------------------------------------------------------------ #
# Estimation
# ------------------------------------------------------------------ #


def _brent(f, a: float, b: float, xtol: float = 1e-14, maxiter: int = 200) -> float:
    # classic Brent root finder: bisection / secant / inverse quadratic
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise EstimationError(f"root not bracketed on [{a}, {b}]")
    c, fc = a, fa
    d = e = b - a
    for _ in range(maxiter):
        if fb * fc > 0.0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * 2.220446049250313e-16 * abs(b) + 0.5 * xtol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)
    return b


def mle_from_dbar(model: ExpFamModel, d_bar: float, n_hint: int = 1) -> float:
    """Solve ``beta(theta) + d_bar = 0`` for theta.

    Uses the model's closed form when available, otherwise Brent iteration on
    the model-supplied bracket.  Raises :class:`EstimationError` when the root
    is absent or lands outside the parameter space (degenerate samples).
    """
    if not math.isfinite(d_bar):
        raise EstimationError(f"non-finite sufficient-statistic mean {d_bar}")
    if model.mle_closed_form is not None:
        try:
            theta = float(model.mle_closed_form(d_bar))
        except ZeroDivisionError:
            raise EstimationError(f"degenerate sample: dbar={d_bar}") from None
    elif model.mle_bracket is not None:
        lo, hi = model.mle_bracket(d_bar)
        theta = _brent(lambda t: model.beta(t) + d_bar, lo, hi)
    else:
        raise EstimationError(
            f"model {model.name!r} provides neither a closed-form MLE nor a bracket"
        )
    if not model.in_param_space(theta):
        raise EstimationError(
            f"MLE {theta} outside parameter space of {model.name!r} (dbar={d_bar})"
        )
    resid = model.beta(theta) + d_bar
    if abs(resid) > 1e-12 * (1.0 + abs(d_bar)):
        raise EstimationError(
            f"MLE residual {resid} too large for {model.name!r} at theta={theta}"
        )
    return theta


def mle(model: ExpFamModel, data) -> float:
    """Maximum likelihood estimate of theta from observations."""
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise DomainError("data must be nonempty")
    if not model.support.contains(x):
        raise DomainError(
            f"data contain values outside the support {model.support} of {model.name!r}"
        )
    return mle_from_dbar(model, float(np.mean(model.d(x))), n_hint=x.size)


def sample(
    model: ExpFamModel, theta: float, n: int, stream: np.random.Generator
) -> np.ndarray:
    """Draw ``n`` i.i.d. observations at ``theta``, consuming only ``stream``."""
    model.require_theta(theta)
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    return model.sampler(theta, int(n), stream)


def load_data(path) -> np.ndarray:
    """Read one observation per line; blank lines and ``#`` comments ignored."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise DomainError(f"{path}:{lineno}: cannot parse {text!r} as a number")
    if not values:
        raise DomainError(f"{path}: no observations found")
    return np.asarray(values, dtype=float)
