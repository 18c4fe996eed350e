"""Average-causal-effect estimators.

The main estimator weights each observed-outcome row by the inverse of the
product of the response propensity p(R=1 | y, z) and the treatment-arm
probability p(A=a | z), both clipped away from 0 and 1, and averages over
all rows (rows with a missing outcome contribute zero). Two deliberately
biased baselines are provided for comparison experiments: complete-case
IPW that ignores the missingness mechanism, and the full pipeline run on a
deliberately insufficient adjustment set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, subset_observed
from .glm import GlmFit, design_matrix, fit_glm
from .shadow import ShadowPropensityModel, or_propensity

METHOD_FULL = "full"
METHOD_ORACLE_SEARCH = "oracle_search"
METHOD_IGNORE_MISSINGNESS = "ignore_missingness"
METHOD_WRONG_ADJUSTMENT = "wrong_adjustment"

DEFAULT_CLIP = (0.01, 0.99)


@dataclass(frozen=True)
class AceEstimate:
    mean_treated: float
    mean_control: float
    ace: float
    n: int
    n_observed: int
    clipped_fraction: float
    method: str

    def to_dict(self) -> dict:
        return {
            "mean_treated": self.mean_treated,
            "mean_control": self.mean_control,
            "ace": self.ace,
            "n": self.n,
            "n_observed": self.n_observed,
            "clipped_fraction": self.clipped_fraction,
            "method": self.method,
        }

    def to_csv_row(self) -> str:
        return ",".join([
            self.method, repr(self.ace), repr(self.mean_treated),
            repr(self.mean_control), str(self.n), str(self.n_observed),
            repr(self.clipped_fraction)])


def clip(p, lo: float = DEFAULT_CLIP[0], hi: float = DEFAULT_CLIP[1]):
    """Truncate propensities into [lo, hi]."""
    if not (0.0 < lo < hi < 1.0):
        raise ValueError(f"need 0 < lo < hi < 1, got ({lo}, {hi})")
    return np.minimum(hi, np.maximum(lo, p))


def fit_treatment_propensity(ds: Dataset, Z) -> GlmFit:
    """Logistic fit of the treatment on the adjustment set, over all rows."""
    roles = ds.roles
    a = ds.column(roles.treatment)
    X = design_matrix(ds.n_rows, *(ds.column(z) for z in Z))
    return fit_glm(a, X)


def _arm_probability(treat: GlmFit, X: np.ndarray, arm: int) -> np.ndarray:
    p1 = treat.predict_proba(X)
    return p1 if arm == 1 else 1.0 - p1


def ipw_ace(ds: Dataset, Z, shadow: ShadowPropensityModel, treat: GlmFit,
            clip_bounds=DEFAULT_CLIP, method: str = METHOD_FULL
            ) -> AceEstimate:
    """Double inverse-probability-weighted ACE over treatment arms 1 and 0."""
    lo, hi = clip_bounds
    roles = ds.roles
    Z = tuple(Z)
    if Z != tuple(shadow.adjustment):
        raise ValueError(f"adjustment set {Z} does not match the fitted "
                         f"response-propensity model {shadow.adjustment}")
    n = ds.n_rows
    r = ds.column(roles.response)
    a = ds.column(roles.treatment)
    y = ds.column(roles.outcome)
    obs = r == 1.0
    Zm = np.column_stack([ds.column(z) for z in Z]) if Z else np.empty((n, 0))
    X = design_matrix(n, *(ds.column(z) for z in Z))

    p_r = or_propensity(np.nan_to_num(y[obs]), Zm[obs], shadow)
    p_r = np.atleast_1d(p_r)
    p_r_clipped = clip(p_r, lo, hi)
    n_clipped = int(np.sum(p_r != p_r_clipped))
    n_weights = p_r.size

    means = {}
    for arm in (1, 0):
        p_a = _arm_probability(treat, X, arm)[obs]
        p_a_clipped = clip(p_a, lo, hi)
        n_clipped += int(np.sum((p_a != p_a_clipped) & (a[obs] == arm)))
        n_weights += int(np.sum(a[obs] == arm))
        term = np.where(a[obs] == arm,
                        y[obs] / (p_r_clipped * p_a_clipped), 0.0)
        means[arm] = float(np.sum(term) / n)

    return AceEstimate(
        mean_treated=means[1], mean_control=means[0],
        ace=means[1] - means[0], n=n, n_observed=int(obs.sum()),
        clipped_fraction=(n_clipped / n_weights if n_weights else 0.0),
        method=method)


def baseline_ignore_missingness(ds: Dataset, Z, clip_bounds=DEFAULT_CLIP
                                ) -> AceEstimate:
    """Complete-case IPW with treatment weights only: subset to observed
    outcomes and ignore the missingness mechanism entirely."""
    lo, hi = clip_bounds
    obs = subset_observed(ds)
    roles = obs.roles
    n = obs.n_rows
    a = obs.column(roles.treatment)
    y = obs.column(roles.outcome)
    treat = fit_treatment_propensity(obs, Z)
    X = design_matrix(n, *(obs.column(z) for z in Z))
    n_clipped = 0
    means = {}
    for arm in (1, 0):
        p_a = _arm_probability(treat, X, arm)
        p_a_clipped = clip(p_a, lo, hi)
        n_clipped += int(np.sum((p_a != p_a_clipped) & (a == arm)))
        term = np.where(a == arm, y / p_a_clipped, 0.0)
        means[arm] = float(np.sum(term) / n)
    return AceEstimate(
        mean_treated=means[1], mean_control=means[0],
        ace=means[1] - means[0], n=ds.n_rows, n_observed=n,
        clipped_fraction=(n_clipped / n if n else 0.0),
        method=METHOD_IGNORE_MISSINGNESS)


def baseline_wrong_adjustment(ds: Dataset, Z=("W2", "W3"),
                              h_mode: str = "a_mean",
                              clip_bounds=DEFAULT_CLIP) -> AceEstimate:
    """Full pipeline (response and treatment propensities, double IPW) run
    with a deliberately insufficient adjustment set."""
    from .shadow import solve_propensity

    shadow = solve_propensity(ds, Z, h_mode)
    treat = fit_treatment_propensity(ds, Z)
    est = ipw_ace(ds, Z, shadow, treat, clip_bounds,
                  method=METHOD_WRONG_ADJUSTMENT)
    return est
