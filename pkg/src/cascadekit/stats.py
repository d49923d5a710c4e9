"""Rank correlation, rank-sum test, Pearson core and OLS with t-tests."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _sps
from scipy.stats import rankdata

from .exceptions import CollinearPredictors, InsufficientData, LengthMismatch, ZeroVariance

# smallest positive p reported; a perfect correlation has t -> inf
P_FLOOR = np.finfo(float).tiny


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_value: float
    n_a: int
    n_b: int
    z: float


@dataclass(frozen=True)
class Coefficient:
    estimate: float
    std_error: float
    t: float
    p_value: float


@dataclass(frozen=True)
class RegressionResult:
    coefficients: dict = field(default_factory=dict)  # name -> Coefficient, incl. "intercept"
    r_squared: float = 0.0
    n: int = 0

    def __getitem__(self, name):
        return self.coefficients[name]


def _as_vector(x, name):
    arr = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def pearson(x, y) -> float:
    """Pearson correlation with population moments.

    Raises :class:`ZeroVariance` when either input is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(np.mean(xc * xc)))
    sy = math.sqrt(float(np.mean(yc * yc)))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("constant input")
    r = float(np.mean(xc * yc)) / (sx * sy)
    return max(-1.0, min(1.0, r))


def _t_pvalue(r, n):
    if abs(r) >= 1.0:
        return P_FLOOR
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return max(P_FLOOR, float(2.0 * _sps.t.sf(abs(t), n - 2)))


def spearman(x, y, *, exact: bool = False) -> CorrelationResult:
    """Tie-corrected Spearman correlation (Pearson on average ranks).

    The two-sided p-value uses the t approximation with n-2 degrees of
    freedom. With ``exact=True`` and n < 10 it is instead the fraction of
    all n! reorderings of ``y`` whose |rho| reaches the observed |rho|.
    """
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.size != y.size:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    n = x.size
    if n < 3:
        raise InsufficientData(f"need at least 3 observations, got {n}")
    rx, ry = rankdata(x), rankdata(y)
    rho = pearson(rx, ry)
    if exact and n < 10:
        rxc = rx - rx.mean()
        perms = np.array(list(itertools.permutations(ry)))
        pc = perms - perms.mean(axis=1, keepdims=True)
        num = pc @ rxc
        den = np.sqrt((pc * pc).sum(axis=1) * (rxc @ rxc))
        null = num / den
        p = float(np.mean(np.abs(null) >= abs(rho) - 1e-12))
    else:
        p = _t_pvalue(rho, n)
    return CorrelationResult(rho=rho, p_value=p, n=n)


def mann_whitney_u(a, b) -> MannWhitneyResult:
    """Two-sided rank-sum test.

    ``u`` is the statistic for sample ``a`` (number of pairs with a > b, ties
    counting one half). The p-value is the tie-corrected normal approximation
    with continuity correction.
    """
    a = _as_vector(a, "a")
    b = _as_vector(b, "b")
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise InsufficientData(f"both groups need at least 2 values, got {na} and {nb}")
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    u = float(ranks[:na].sum() - na * (na + 1) / 2.0)
    n = na + nb
    _, counts = np.unique(pooled, return_counts=True)
    tie = float(np.sum(counts ** 3 - counts))
    var = na * nb / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    mu = na * nb / 2.0
    if var <= 0:
        return MannWhitneyResult(u=u, p_value=1.0, n_a=na, n_b=nb, z=0.0)
    z = (abs(u - mu) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    p = min(1.0, float(2.0 * _sps.norm.sf(z)))
    return MannWhitneyResult(u=u, p_value=p, n_a=na, n_b=nb, z=math.copysign(z, u - mu))


def ols_regression(y, predictors: dict) -> RegressionResult:
    """Least squares with an intercept and two-sided t-tests per coefficient."""
    y = _as_vector(y, "y")
    names = list(predictors)
    cols = [_as_vector(predictors[k], k) for k in names]
    n, k = y.size, len(names) + 1
    for name, c in zip(names, cols):
        if c.size != n:
            raise LengthMismatch(f"predictor {name!r} has {c.size} values, y has {n}")
    if n <= k:
        raise InsufficientData(f"need more than {k} observations, got {n}")
    X = np.column_stack([np.ones(n)] + cols)
    for name, c in zip(names, cols):
        if np.ptp(c) == 0:
            raise CollinearPredictors(f"predictor {name!r} is constant")
    if np.linalg.matrix_rank(X) < k:
        raise CollinearPredictors("predictors are exactly collinear")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    dof = n - k
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / tot if tot > 0 else 1.0
    coefs = {}
    for name, b, s in zip(["intercept"] + names, beta, se):
        if s > 0:
            t = float(b / s)
            p = float(2.0 * _sps.t.sf(abs(t), dof))
        else:
            t = math.copysign(math.inf, b) if b != 0 else 0.0
            p = 0.0 if b != 0 else 1.0
        coefs[name] = Coefficient(float(b), float(s), t, p)
    return RegressionResult(coefficients=coefs, r_squared=max(0.0, min(1.0, r2)), n=n)
