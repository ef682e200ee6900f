"""Local power of the four tests in one-parameter exponential families.

For the null ``theta = theta0`` against ``theta = theta0 + eps/sqrt(n)`` the
rejection probability of each criterion expands as

    Pi_i = 1 - G_{1,lam}(x) - n^{-1/2} * sum_k a_ik G_{1+2k,lam}(x),

with ``x`` the chi-square(1) critical value, ``lam = K(theta0) eps^2 / 2``,
and a 4 x 4 coefficient array ``a_ik`` built from ``alpha``/``beta``
derivatives at ``theta0``.  Pairwise power differences telescope into sums of
noncentral chi-square densities, which yields sign certificates that are
uniform in the critical value; :func:`power_ordering` turns those into an
ordered partition of the four tests.

Two conventions exist for the leading gradient coefficient ``a_40``; they
disagree whenever ``alpha'' != 0``.  The default ``consistent-chain`` source
enforces the zero-sum normalization of the underlying expansion; the
``table`` source reproduces the alternative tabulated sign, under which the
gradient row no longer sums to zero.  Both are exposed, and the montecarlo
module arbitrates empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DomainError
from .expansion import ClampedProbability
from .expfam import ExpFamModel
from .specfun import ChiSquareParams, central_chisq_quantile, nc_chisq_cdf, nc_chisq_pdf
from .teststats import ALL_KINDS, TestKind

__all__ = [
    "CoefficientTable",
    "OrderingReport",
    "PairCertificate",
    "PowerQuery",
    "SOURCES",
    "SOURCE_CHAIN",
    "SOURCE_TABLE",
    "local_power",
    "power_coefficients",
    "power_difference",
    "power_ordering",
]

SOURCE_CHAIN = "consistent-chain"
SOURCE_TABLE = "table"
SOURCES = (SOURCE_CHAIN, SOURCE_TABLE)

_DEFAULT_EPS_GRID = (0.25, 0.5, 1.0, 2.0)
# equality threshold for coefficient-level comparisons
_COEF_TOL = 1e-13


def _check_source(source: str) -> str:
    if source not in SOURCES:
        raise DomainError(f"unknown coefficient source {source!r}; use one of {SOURCES}")
    return source


@dataclass(frozen=True)
class CoefficientTable:
    """Rows LR, Wald, score, gradient; columns mixture index k = 0..3."""

    a: np.ndarray
    source: str
    eps: float
    theta0: float

    def row(self, kind: TestKind) -> np.ndarray:
        return self.a[kind - 1]


@dataclass(frozen=True)
class PowerQuery:
    """A local power evaluation point."""

    model: ExpFamModel
    theta0: float
    eps: float
    n: float
    alpha: float

    def __post_init__(self):
        self.model.require_theta(self.theta0)
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (self.n >= 1):
            raise DomainError(f"n must be >= 1, got {self.n}")
        if math.isfinite(self.n):
            drifted = self.theta0 + self.eps / math.sqrt(self.n)
            if not self.model.in_param_space(drifted):
                raise DomainError(
                    f"drifted parameter {drifted} leaves the parameter space"
                )


def power_coefficients(
    model: ExpFamModel, theta0: float, eps: float, source: str = SOURCE_CHAIN
) -> CoefficientTable:
    """The 4 x 4 local power coefficient array at ``theta0``."""
    _check_source(source)
    model.require_theta(theta0)
    if not math.isfinite(eps):
        raise DomainError(f"eps must be finite, got {eps}")
    ap = model.alpha_d1(theta0)
    app = model.alpha_d2(theta0)
    bp = model.beta_d1(theta0)
    bpp = model.beta_d2(theta0)
    K = ap * bp
    if K <= 0.0:
        raise DomainError(f"Fisher information must be positive at theta0={theta0}")

    P = 2.0 * app * bp + ap * bpp  # minus the third-derivative cumulant
    Q = app * bp
    R = ap * bpp - app * bp
    e = eps
    e3 = eps ** 3

    a_shared0 = -P * e3 / 6.0
    lr = (a_shared0, Q * e3 / 2.0, R * e3 / 6.0, 0.0)
    w1 = Q * e3 / 2.0 - P * e / (2.0 * K)
    wald = (a_shared0, w1, -w1, P * e3 / 6.0)
    score = (a_shared0, Q * e3 / 2.0 - R * e / (2.0 * K), R * e / (2.0 * K), R * e3 / 6.0)
    grad0 = a_shared0 if source == SOURCE_CHAIN else -R * e3 / 6.0
    grad = (
        grad0,
        Q * e3 / 2.0 + P * e / (4.0 * K),
        ap * bpp * e3 / 4.0 - P * e / (4.0 * K),
        -P * e3 / 12.0,
    )
    a = np.array([lr, wald, score, grad], dtype=float)
    return CoefficientTable(a=a, source=source, eps=eps, theta0=theta0)


def _crit(alpha: float) -> float:
    return central_chisq_quantile(1.0, 1.0 - alpha)


def local_power(
    query: PowerQuery, test: TestKind, source: str = SOURCE_CHAIN
) -> ClampedProbability:
    """Second-order rejection probability of one test at the query point."""
    table = power_coefficients(query.model, query.theta0, query.eps, source)
    lam = 0.5 * query.model.fisher_information(query.theta0) * query.eps ** 2
    x = _crit(query.alpha)
    raw = 1.0 - nc_chisq_cdf(ChiSquareParams(1.0, lam), x)
    scale = 0.0 if math.isinf(query.n) else 1.0 / math.sqrt(query.n)
    if scale != 0.0:
        row = table.row(test)
        for k in range(4):
            if row[k] != 0.0:
                raw -= scale * row[k] * nc_chisq_cdf(ChiSquareParams(1.0 + 2 * k, lam), x)
    value = min(max(raw, 0.0), 1.0)
    return ClampedProbability(value=value, raw=raw, clamped=value != raw)


def _difference_terms(table: CoefficientTable, i: TestKind, j: TestKind):
    # c_k = a_jk - a_ik; C_m = sum_{k >= m} c_k; csum = sum_k c_k.
    # Pi_i - Pi_j = n^{-1/2} [ csum * G_1 - 2 * sum_m C_m g_{1+2m} ]   (telescoped)
    c = table.row(j) - table.row(i)
    C = (c[1] + c[2] + c[3], c[2] + c[3], c[3])
    return float(c.sum()), C


def power_difference(
    query: PowerQuery, i: TestKind, j: TestKind, source: str = SOURCE_CHAIN
) -> float:
    """Pi_i - Pi_j via the telescoped density representation (exact antisymmetry)."""
    table = power_coefficients(query.model, query.theta0, query.eps, source)
    csum, C = _difference_terms(table, i, j)
    lam = 0.5 * query.model.fisher_information(query.theta0) * query.eps ** 2
    x = _crit(query.alpha)
    scale = 0.0 if math.isinf(query.n) else 1.0 / math.sqrt(query.n)
    total = csum * nc_chisq_cdf(ChiSquareParams(1.0, lam), x)
    for m, Cm in enumerate(C, start=1):
        if Cm != 0.0:
            total -= 2.0 * Cm * nc_chisq_pdf(ChiSquareParams(1.0 + 2 * m, lam), x)
    return scale * total


@dataclass(frozen=True)
class PairCertificate:
    """Sign analysis of Pi_i - Pi_j across the eps grid.

    ``relation`` is one of ``greater``/``less``/``equal``/``mixed`` and refers
    to test i versus test j.  When ``uniform`` is true the relation holds for
    every critical value; otherwise it was established pointwise on a grid.
    ``csum`` and ``partial`` retain the certificate weights for the last grid
    eps: the difference equals
    ``n^{-1/2} [csum G_1 - 2 (C_1 g_3 + C_2 g_5 + C_3 g_7)]``.
    """

    i: TestKind
    j: TestKind
    relation: str
    uniform: bool
    csum: float
    partial: tuple[float, float, float]


def _relation_from_weights(csum: float, C, tol: float) -> str:
    # positive contribution to Pi_i - Pi_j: csum > 0 or C_m < 0
    vals = (-csum,) + tuple(C)
    if all(abs(v) <= tol for v in vals):
        return "equal"
    if all(v <= tol for v in vals):
        return "greater"
    if all(v >= -tol for v in vals):
        return "less"
    return "mixed"


@dataclass(frozen=True)
class OrderingReport:
    """Ordered partition of the four tests by second-order local power."""

    groups: tuple[tuple[TestKind, ...], ...]
    uniform: bool
    direction: str
    source: str
    eps_grid: tuple[float, ...]
    certificates: Mapping[tuple[TestKind, TestKind], PairCertificate]

    def describe(self) -> str:
        names = {
            TestKind.LR: "lr",
            TestKind.WALD: "wald",
            TestKind.SCORE: "score",
            TestKind.GRADIENT: "gradient",
        }
        parts = [" = ".join(names[k] for k in grp) for grp in self.groups]
        tag = "uniform in x" if self.uniform else "grid-certified only"
        return " > ".join(parts) + f" ({tag})"


def power_ordering(
    model: ExpFamModel,
    theta0: float,
    eps_sign: str,
    alpha: float,
    source: str = SOURCE_CHAIN,
    eps_grid: tuple[float, ...] = _DEFAULT_EPS_GRID,
) -> OrderingReport:
    """Rank the four tests by local power for alternatives on one side.

    ``eps_sign`` is ``"above"`` (eps > 0) or ``"below"`` (eps < 0).  Each pair
    gets a telescoped-density sign certificate; when the certificate weights
    share one sign for every eps on the grid the relation is uniform in the
    critical value, otherwise the pair is compared pointwise and flagged.
    """
    _check_source(source)
    if eps_sign not in ("above", "below"):
        raise DomainError(f"eps_sign must be 'above' or 'below', got {eps_sign!r}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not eps_grid or any(e <= 0.0 for e in eps_grid):
        raise DomainError("eps_grid must contain positive magnitudes")
    sign = 1.0 if eps_sign == "above" else -1.0

    certificates = {}
    for idx, i in enumerate(ALL_KINDS):
        for j in ALL_KINDS[idx + 1 :]:
            relations = set()
            csum = 0.0
            C = (0.0, 0.0, 0.0)
            for eps in eps_grid:
                table = power_coefficients(model, theta0, sign * eps, source)
                csum, C = _difference_terms(table, i, j)
                tol = _COEF_TOL * max(1.0, float(np.max(np.abs(table.a))))
                relations.add(_relation_from_weights(csum, C, tol))
            if len(relations) == 1 and "mixed" not in relations:
                relation = relations.pop()
                uniform = True
            else:
                relation = _grid_relation(model, theta0, sign, eps_grid, alpha, source, i, j)
                uniform = False
            certificates[(i, j)] = PairCertificate(
                i=i, j=j, relation=relation, uniform=uniform, csum=csum, partial=C
            )

    groups = _assemble_groups(certificates)
    uniform = all(cert.uniform for cert in certificates.values())
    return OrderingReport(
        groups=groups,
        uniform=uniform,
        direction=eps_sign,
        source=source,
        eps_grid=tuple(eps_grid),
        certificates=certificates,
    )


def _grid_relation(model, theta0, sign, eps_grid, alpha, source, i, j) -> str:
    # pointwise comparison at a spread of critical values; n > 0 only scales
    signs = set()
    for eps in eps_grid:
        for a in sorted({0.01, 0.025, alpha, 0.10, 0.20}):
            q = PowerQuery(model=model, theta0=theta0, eps=sign * eps, n=1.0, alpha=a)
            diff = power_difference(q, i, j, source)
            if abs(diff) > 1e-14:
                signs.add(1 if diff > 0 else -1)
    if not signs:
        return "equal"
    if signs == {1}:
        return "greater"
    if signs == {-1}:
        return "less"
    return "mixed"


def _assemble_groups(certificates) -> tuple[tuple[TestKind, ...], ...]:
    # union equal pairs, then order the equality classes by the strict relations
    parent = {k: k for k in ALL_KINDS}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for (i, j), cert in certificates.items():
        if cert.relation == "equal":
            parent[find(i)] = find(j)

    roots = {}
    for k in ALL_KINDS:
        roots.setdefault(find(k), []).append(k)
    classes = list(roots.values())

    def wins(members):
        total = 0
        for (i, j), cert in certificates.items():
            if cert.relation == "greater" and i in members:
                total += 1
            elif cert.relation == "greater" and j in members:
                total -= 1
            elif cert.relation == "less" and j in members:
                total += 1
            elif cert.relation == "less" and i in members:
                total -= 1
        return total

    classes.sort(key=wins, reverse=True)
    return tuple(tuple(sorted(cls)) for cls in classes)
