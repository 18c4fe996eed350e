"""Generalized linear models (logistic, gaussian) and likelihood-ratio tests.

This is the statistical engine behind the conditional-independence tests.
Logistic fits use iteratively reweighted least squares with step-halving;
gaussian fits are exact least squares with the log-likelihood evaluated at
the maximum-likelihood variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaincc

LOGISTIC = "logistic"
GAUSSIAN = "gaussian"

# L2 coefficient norm beyond which a logistic fit is treated as separated
SEPARATION_NORM = 30.0


class GlmError(ValueError):
    """Raised on invalid designs or test preconditions."""


@dataclass(frozen=True)
class GlmFit:
    family: str
    coefficients: np.ndarray
    log_likelihood: float
    converged: bool
    iterations: int
    n_obs: int
    separated: bool = False
    rank_deficient: bool = False

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """P(y=1 | X) for logistic fits; fitted mean for gaussian fits."""
        eta = np.clip(np.asarray(X) @ self.coefficients, -500.0, 500.0)
        return expit(eta) if self.family == LOGISTIC else eta


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    df: int
    p_value: float
    independent: bool
    alpha: float

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "df": self.df,
                "p_value": self.p_value, "independent": self.independent,
                "alpha": self.alpha}


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail P(X > x) of the chi-square distribution with df degrees
    of freedom, via the regularized upper incomplete gamma function."""
    if x < 0:
        raise GlmError(f"chi-square statistic must be >= 0, got {x}")
    if df <= 0:
        raise GlmError(f"degrees of freedom must be positive, got {df}")
    return float(gammaincc(df / 2.0, x / 2.0))


def _logistic_ll(y: np.ndarray, eta: np.ndarray) -> float:
    # sum y*eta - log(1 + exp(eta)), stable at both tails
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _fit_logistic(y, X, max_iter, tol):
    n, p = X.shape
    beta = np.zeros(p)
    rank_deficient = False
    # a constant response has its maximum at infinite coefficients; the
    # iterations below stop at a finite capped iterate, so flag it up front
    separated = y.min() == y.max()
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        eta = np.clip(X @ beta, -500.0, 500.0)
        mu = expit(eta)
        score = X.T @ (y - mu)
        if np.max(np.abs(score)) < tol:
            converged = True
            iterations -= 1
            break
        w = np.clip(mu * (1.0 - mu), 1e-10, None)
        z = eta + (y - mu) / w
        Xw = X * w[:, None]
        try:
            solution = np.linalg.solve(X.T @ Xw, Xw.T @ z)
        except np.linalg.LinAlgError:
            # singular gram matrix: fall back to the minimum-norm solution
            rank_deficient = True
            sw = np.sqrt(w)
            solution, _, rank, _ = np.linalg.lstsq(X * sw[:, None], z * sw,
                                                   rcond=None)
        # step-halving: never accept a step that decreases the likelihood
        ll_cur = _logistic_ll(y, eta)
        step = solution - beta
        for _ in range(20):
            cand = beta + step
            if _logistic_ll(y, np.clip(X @ cand, -500.0, 500.0)) >= ll_cur - 1e-12:
                break
            step = step / 2.0
        beta = beta + step
        if np.linalg.norm(beta) > SEPARATION_NORM:
            separated = True
            break
    ll = _logistic_ll(y, np.clip(X @ beta, -500.0, 500.0))
    if separated:
        converged = False
    return beta, ll, bool(converged), iterations, bool(separated), \
        bool(rank_deficient)


def _fit_gaussian(y, X):
    n, p = X.shape
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    sigma2 = max(float(resid @ resid) / n, 1e-30)
    ll = -0.5 * n * (np.log(2.0 * np.pi * sigma2) + 1.0)
    return beta, ll, bool(rank < p)


def fit_glm(y, X, family: str = LOGISTIC, max_iter: int = 50,
            tol: float = 1e-8) -> GlmFit:
    """Fit y on the design matrix X (intercept column included by caller).

    Logistic fits run IRLS until the score max-norm drops below ``tol``;
    coefficient L2 norm above 30 is flagged as separation and stops the fit
    with ``converged=False`` (the capped likelihood is still reported so
    downstream tests keep running). Rank-deficient designs use the
    minimum-norm solution and are flagged.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise GlmError(f"incompatible shapes y{y.shape} X{X.shape}")
    if np.isnan(y).any() or np.isnan(X).any():
        raise GlmError("fit_glm requires fully observed y and X")
    n, p = X.shape
    if n <= p:
        raise GlmError(f"need more observations ({n}) than coefficients ({p})")
    if family == LOGISTIC:
        if not np.isin(y, (0.0, 1.0)).all():
            raise GlmError("logistic family requires a 0/1 response")
        beta, ll, converged, iterations, separated, rank_def = _fit_logistic(
            y, X, max_iter, tol)
        return GlmFit(LOGISTIC, beta, ll, converged, iterations, n,
                      separated, rank_def)
    if family == GAUSSIAN:
        beta, ll, rank_def = _fit_gaussian(y, X)
        return GlmFit(GAUSSIAN, beta, ll, True, 0, n, False, rank_def)
    raise GlmError(f"unknown family {family!r}")


def likelihood_ratio_test(null_fit: GlmFit, full_fit: GlmFit,
                          alpha: float) -> CiTestResult:
    """Chi-square LRT of nested fits; ``independent`` means p_value >= alpha.

    The statistic 2*(ll_full - ll_null) is clamped at zero, which absorbs
    round-off on identical designs.
    """
    if null_fit.family != full_fit.family:
        raise GlmError("cannot compare fits from different families")
    if null_fit.n_obs != full_fit.n_obs:
        raise GlmError(f"fits use different sample sizes "
                       f"({null_fit.n_obs} vs {full_fit.n_obs})")
    df = full_fit.coefficients.size - null_fit.coefficients.size
    if df < 0:
        raise GlmError("full design must extend the null design")
    statistic = max(0.0, 2.0 * (full_fit.log_likelihood -
                                null_fit.log_likelihood))
    if df == 0:
        # identical designs: the test degenerates to statistic 0, p-value 1
        if statistic > 1e-6:
            raise GlmError("designs have equal size but different likelihoods;"
                           " they are not nested")
        return CiTestResult(statistic=0.0, df=0, p_value=1.0,
                            independent=True, alpha=alpha)
    p_value = chi_square_sf(statistic, df)
    return CiTestResult(statistic=statistic, df=df, p_value=p_value,
                        independent=p_value >= alpha, alpha=alpha)


def design_matrix(n: int, *columns) -> np.ndarray:
    """Stack an intercept column ahead of the given regressor columns."""
    return np.column_stack([np.ones(n), *columns]) if columns else np.ones((n, 1))
