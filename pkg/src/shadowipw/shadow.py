"""Odds-ratio-factorized missingness propensity and its estimation.

The response propensity is parameterized as

    p(R=1 | y, z) = pi0(z) / (pi0(z) + eta(y) * (1 - pi0(z)))

with a baseline pi0(z) = expit(beta . z) at the outcome reference value
y_ref, and an odds-ratio term eta(y) = exp(gamma * (y - y_ref)) so that
eta(y_ref) = 1. The k+1 parameters (beta, gamma) are the root of k+1
mean-zero moment conditions

    mean over rows of (R / p(R=1 | y, z) - 1) * h_j,

where h_j = z_j for j = 1..k, and the last h is either the sample mean of
the treatment (mode "a_mean") or the per-row treatment (mode "a_row").
Rows with R = 0 contribute -h_j, so only observed outcomes are used.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import expit

from .data import Dataset

H_MODE_A_MEAN = "a_mean"
H_MODE_A_ROW = "a_row"
H_MODES = (H_MODE_A_MEAN, H_MODE_A_ROW)

_SAT = 500.0  # saturation bound for expit/exp arguments
_P_MIN = np.finfo(float).tiny
_P_MAX = 1.0 - np.finfo(float).epsneg


class ShadowError(ValueError):
    """Raised on invalid joints or adjustment sets."""


@dataclass(frozen=True)
class ShadowPropensityModel:
    beta: np.ndarray
    gamma: float
    y_ref: float
    adjustment: tuple[str, ...]
    residual_norm: float
    converged: bool
    iterations: int
    degenerate: bool = False   # no-missingness data: propensity is 1
    used_fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "beta": list(np.asarray(self.beta, dtype=float)),
            "gamma": self.gamma,
            "y_ref": self.y_ref,
            "adjustment": list(self.adjustment),
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "degenerate": self.degenerate,
            "used_fallback": self.used_fallback,
        }

    @classmethod
    def trivial(cls, adjustment) -> "ShadowPropensityModel":
        adjustment = tuple(adjustment)
        return cls(beta=np.zeros(len(adjustment)), gamma=0.0, y_ref=0.0,
                   adjustment=adjustment, residual_norm=0.0, converged=True,
                   iterations=0, degenerate=True)


@dataclass(frozen=True)
class MomentVector:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=float))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def or_blend(pi0, eta):
    """Propensity from baseline pi0 and odds-ratio value eta (the core
    factorization formula); clamped into the open unit interval."""
    pi0 = np.asarray(pi0, dtype=float)
    eta = np.asarray(eta, dtype=float)
    out = pi0 / (pi0 + eta * (1.0 - pi0))
    return np.clip(out, _P_MIN, _P_MAX)


def or_propensity(y, z, model: ShadowPropensityModel):
    """Evaluate p(R=1 | y, z) under the fitted model. Accepts scalars or
    arrays (z has the adjustment coordinates on the last axis)."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape[-1:] != (len(model.adjustment),):
        raise ShadowError(
            f"z has {z.shape[-1] if z.ndim else 0} coordinates, expected "
            f"{len(model.adjustment)}")
    zdot = z @ model.beta
    if model.degenerate:
        out = np.ones(np.broadcast_shapes(y.shape, np.shape(zdot)))
    else:
        pi0 = expit(np.clip(zdot, -_SAT, _SAT))
        eta = np.exp(np.clip(model.gamma * (y - model.y_ref), -_SAT, _SAT))
        out = or_blend(pi0, eta)
    return float(out) if out.ndim == 0 else out


def reconstruct_propensity_from_joint(joint) -> np.ndarray:
    """Recover p(R=1 | Y, Z) from a discrete joint p(R, Y | Z).

    ``joint`` has shape (2, n_y, n_z): axis 0 is R in (0, 1), axis 1 the
    outcome levels with index 0 as the reference value, axis 2 the Z strata
    (each stratum normalized). The baseline and odds-ratio pieces are read
    off the joint and recombined through the factorization formula, which
    must agree with direct conditioning.
    """
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 3 or joint.shape[0] != 2:
        raise ShadowError(f"joint must have shape (2, n_y, n_z), "
                          f"got {joint.shape}")
    if (joint <= 0).any():
        raise ShadowError("joint must be strictly positive in every cell")
    sums = joint.sum(axis=(0, 1))
    if not np.allclose(sums, 1.0, atol=1e-9):
        raise ShadowError("joint must be normalized within each Z stratum")
    # pi0(z) = p(R=1 | Y=y_ref, z)
    pi0 = joint[1, 0, :] / (joint[0, 0, :] + joint[1, 0, :])
    # eta(y, z) = odds ratio of (R=0, y) against references (R=1, y_ref)
    eta = (joint[0, :, :] / joint[1, :, :]) * (joint[1, 0, :] / joint[0, 0, :])
    return or_blend(pi0[None, :], eta)


def _design(ds: Dataset, model_adjustment):
    if not model_adjustment:
        return np.empty((ds.n_rows, 0))
    return np.column_stack([ds.column(z) for z in model_adjustment])


def _moment_pieces(ds: Dataset, adjustment, h_mode):
    roles = ds.roles
    if roles is None:
        raise ShadowError("dataset has no roles assigned")
    for z in adjustment:
        if z not in roles.covariates:
            raise ShadowError(f"adjustment column {z!r} is not a covariate")
    if h_mode not in H_MODES:
        raise ShadowError(f"unknown h mode {h_mode!r}")
    r = ds.column(roles.response)
    y = np.nan_to_num(ds.column(roles.outcome))  # y enters only where r == 1
    Z = _design(ds, adjustment)
    a = ds.column(roles.treatment)
    if h_mode == H_MODE_A_MEAN:
        h_last = np.full(ds.n_rows, float(np.mean(a)))
    else:
        h_last = a
    H = np.column_stack([Z, h_last])
    return r, y, Z, H


def _residuals(theta, r, y, Z, H):
    k = Z.shape[1]
    beta, gamma = theta[:k], theta[k]
    # logistic form of the factorization: p = expit(beta.z - gamma*(y - y_ref))
    u = np.clip(Z @ beta - gamma * y, -_SAT, _SAT)
    p = np.clip(expit(u), _P_MIN, _P_MAX)
    w = np.where(r == 1.0, 1.0 / p - 1.0, -1.0)
    return H.T @ w / r.size


def _jacobian(theta, r, y, Z, H):
    k = Z.shape[1]
    beta, gamma = theta[:k], theta[k]
    u = np.clip(Z @ beta - gamma * y, -_SAT, _SAT)
    p = np.clip(expit(u), _P_MIN, _P_MAX)
    # d(1/p)/d(theta) = -(1-p)/p * du/d(theta); rows with r == 0 are constant
    c = np.where(r == 1.0, -(1.0 - p) / p, 0.0)
    dU = np.column_stack([Z, -y])
    return H.T @ (dU * c[:, None]) / r.size


def moment_residuals(ds: Dataset, model: ShadowPropensityModel,
                     h_mode: str = H_MODE_A_MEAN) -> MomentVector:
    """Empirical means of the k+1 estimating equations at the model's
    parameters (with the model's y_ref folded in)."""
    r, y, Z, H = _moment_pieces(ds, model.adjustment, h_mode)
    if model.degenerate:
        w = np.where(r == 1.0, 0.0, -1.0)
        return MomentVector(H.T @ w / r.size)
    theta = np.append(model.beta, model.gamma)
    return MomentVector(_residuals(theta, r, y - model.y_ref, Z, H))


def solve_propensity(ds: Dataset, Z, h_mode: str = H_MODE_A_MEAN,
                     init=None, tol: float = 1e-8,
                     max_iter: int = 100, y_ref: float = 0.0
                     ) -> ShadowPropensityModel:
    """Solve the estimating equations for (beta, gamma) by damped Newton.

    Newton steps use the analytic Jacobian with step-halving on the residual
    L2 norm; convergence is declared when the residual max-norm drops below
    ``tol``. If Newton stalls, a derivative-free minimization of the squared
    residual norm takes over and the fallback is reported on the model.

    An empty adjustment set is the gamma-only limit: the baseline is the
    constant one half and the single moment condition pins gamma.
    """
    adjustment = tuple(Z)
    r, y, Zm, H = _moment_pieces(ds, adjustment, h_mode)
    y = y - y_ref
    k = Zm.shape[1]
    if (r == 1.0).all():
        warnings.warn("all outcomes observed; returning the trivial "
                      "propensity model (p = 1)", stacklevel=2)
        return ShadowPropensityModel.trivial(adjustment)
    if (r == 0.0).all():
        raise ShadowError("no observed outcomes; propensity is not estimable")

    theta = (np.zeros(k + 1) if init is None
             else np.asarray(init, dtype=float).copy())
    if theta.size != k + 1:
        raise ShadowError(f"init has {theta.size} entries, expected {k + 1}")

    res = _residuals(theta, r, y, Zm, H)
    iterations = 0
    stalled = False
    for iterations in range(1, max_iter + 1):
        if np.max(np.abs(res)) < tol:
            iterations -= 1
            break
        try:
            step = np.linalg.solve(_jacobian(theta, r, y, Zm, H), -res)
        except np.linalg.LinAlgError:
            stalled = True
            break
        norm0 = np.linalg.norm(res)
        accepted = False
        for _ in range(21):
            cand = theta + step
            cand_res = _residuals(cand, r, y, Zm, H)
            if np.linalg.norm(cand_res) < norm0:
                theta, res = cand, cand_res
                accepted = True
                break
            step = step / 2.0
        if not accepted:
            stalled = True
            break

    used_fallback = False
    if np.max(np.abs(res)) >= tol and stalled:
        used_fallback = True

        def objective(th):
            return float(np.sum(_residuals(th, r, y, Zm, H) ** 2))

        sol = optimize.minimize(objective, theta, method="Nelder-Mead",
                                options={"maxiter": 5000, "fatol": tol ** 2 * 1e-4,
                                         "xatol": 1e-12})
        cand_res = _residuals(sol.x, r, y, Zm, H)
        if np.linalg.norm(cand_res) < np.linalg.norm(res):
            theta, res = sol.x, cand_res

    residual_norm = float(np.max(np.abs(res)))
    return ShadowPropensityModel(
        beta=theta[:k], gamma=float(theta[k]), y_ref=y_ref,
        adjustment=adjustment, residual_norm=residual_norm,
        converged=residual_norm < tol, iterations=iterations,
        used_fallback=used_fallback)
