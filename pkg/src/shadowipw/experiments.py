"""Monte Carlo experiment harnesses for the search and the estimators.

Trials are embarrassingly parallel; each trial derives its own seed from the
base seed so reports are byte-identical regardless of the worker count.
Positive and negative search trials use disjoint seed offsets.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import estimate, search, shadow
from .search import FOUND, GraphOracleTester, find_adjustment_set
from .simulate import (SCENARIO_ADD_A_TO_RY, SCENARIO_BASE, SCENARIO_HIDE_W4,
                       DgpConfig, default_config, generate, roles_for,
                       scenario_graph, true_ace)

CORRECT_SET = ("W2", "W3", "W4")
_NEGATIVE_SEED_STRIDE = 1_000_003  # keeps positive/negative streams disjoint

ALL_METHODS = (estimate.METHOD_FULL, estimate.METHOD_ORACLE_SEARCH,
               estimate.METHOD_IGNORE_MISSINGNESS,
               estimate.METHOD_WRONG_ADJUSTMENT)


@dataclass(frozen=True)
class SearchCell:
    sample_size: int
    alpha: float
    tp: int
    fn: int
    tn: int
    fp: int

    @property
    def sensitivity(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else float("nan")

    @property
    def specificity(self) -> float:
        return self.tn / (self.tn + self.fp) if (self.tn + self.fp) else float("nan")

    def to_dict(self) -> dict:
        return {"sample_size": self.sample_size, "alpha": self.alpha,
                "tp": self.tp, "fn": self.fn, "tn": self.tn, "fp": self.fp,
                "sensitivity": self.sensitivity,
                "specificity": self.specificity}


@dataclass(frozen=True)
class SearchExperimentReport:
    cells: tuple[SearchCell, ...]
    trials_positive: int
    trials_negative: int
    alpha: float
    seed: int
    rows: tuple[tuple, ...]   # (sample_size, kind, trial, scenario, status, correct)

    def cell(self, sample_size: int) -> SearchCell:
        for c in self.cells:
            if c.sample_size == sample_size:
                return c
        raise KeyError(sample_size)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "seed": self.seed,
                "trials_positive": self.trials_positive,
                "trials_negative": self.trials_negative,
                "cells": [c.to_dict() for c in self.cells]}

    def rows_csv(self) -> str:
        lines = ["sample_size,kind,trial,scenario,status,correct"]
        lines += [",".join(str(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def _run_search(config, alpha, oracle):
    ds = generate(config)
    tester = None
    if oracle:
        tester = GraphOracleTester(scenario_graph(config.scenario), ds.roles)
    return find_adjustment_set(ds, alpha, tester=tester)


def _positive_trial(args):
    n, alpha, seed, base_config, oracle = args
    config = replace(base_config, n=n, seed=seed, scenario=SCENARIO_BASE)
    outcome = _run_search(config, alpha, oracle)
    correct = (outcome.status == FOUND
               and tuple(sorted(outcome.adjustment_set)) == CORRECT_SET)
    return (n, "positive", seed, SCENARIO_BASE, outcome.status, correct)


def _negative_trial(args):
    n, alpha, seed, base_config, oracle = args
    coin = np.random.Generator(np.random.Philox(key=seed % (1 << 64))).uniform()
    scenario = SCENARIO_ADD_A_TO_RY if coin < 0.5 else SCENARIO_HIDE_W4
    config = replace(base_config, n=n, seed=seed, scenario=scenario)
    outcome = _run_search(config, alpha, oracle)
    correct = outcome.status != FOUND
    return (n, "negative", seed, scenario, outcome.status, correct)


def _run_jobs(fn, jobs_args, jobs: int):
    if jobs <= 1:
        return [fn(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, jobs_args, chunksize=4))


def run_search_experiment(sample_sizes, trials: int, alpha: float,
                          seed: int = 0, jobs: int = 1,
                          base_config: DgpConfig | None = None,
                          oracle: bool = False) -> SearchExperimentReport:
    """Confusion counts of the adjustment-set search over simulated trials.

    Per sample size, ``trials`` positive trials draw from the base scenario
    (a true positive requires returning exactly the correct set) and
    ``trials`` negative trials draw one of the two broken scenarios with
    equal probability (a true negative is any run that returns no set).
    With ``oracle=True`` the likelihood-ratio tests are replaced by
    d-separation on the generating graph.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base_config = base_config or default_config()
    rows = []
    cells = []
    for idx, n in enumerate(sample_sizes):
        block = 2 * trials * idx
        pos_args = [(n, alpha, seed + block + t, base_config, oracle)
                    for t in range(trials)]
        neg_args = [(n, alpha,
                     seed + _NEGATIVE_SEED_STRIDE + block + t, base_config,
                     oracle)
                    for t in range(trials)]
        pos = _run_jobs(_positive_trial, pos_args, jobs)
        neg = _run_jobs(_negative_trial, neg_args, jobs)
        tp = sum(row[5] for row in pos)
        tn = sum(row[5] for row in neg)
        cells.append(SearchCell(n, alpha, tp=tp, fn=trials - tp,
                                tn=tn, fp=trials - tn))
        rows += pos + neg
    return SearchExperimentReport(tuple(cells), trials, trials, alpha, seed,
                                  tuple(rows))


@dataclass(frozen=True)
class EstimationCell:
    sample_size: int
    method: str
    estimates: tuple[float, ...]
    n_not_found: int

    @property
    def median(self) -> float:
        return float(np.median(self.estimates)) if self.estimates else float("nan")

    def quantiles(self, qs=(0.25, 0.5, 0.75)) -> tuple[float, ...]:
        if not self.estimates:
            return tuple(float("nan") for _ in qs)
        return tuple(float(v) for v in np.quantile(self.estimates, qs))

    def median_abs_error(self, truth: float) -> float:
        if not self.estimates:
            return float("nan")
        return float(np.median(np.abs(np.asarray(self.estimates) - truth)))

    def to_dict(self, truth: float) -> dict:
        q25, q50, q75 = self.quantiles()
        return {"sample_size": self.sample_size, "method": self.method,
                "trials": len(self.estimates) + self.n_not_found,
                "n_not_found": self.n_not_found, "median": q50,
                "q25": q25, "q75": q75,
                "median_abs_error": self.median_abs_error(truth)}


@dataclass(frozen=True)
class EstimationExperimentReport:
    cells: tuple[EstimationCell, ...]
    ground_truth: float
    alpha: float
    seed: int
    rows: tuple[tuple, ...]   # (sample_size, trial, method, ace or "")

    def cell(self, sample_size: int, method: str) -> EstimationCell:
        for c in self.cells:
            if c.sample_size == sample_size and c.method == method:
                return c
        raise KeyError((sample_size, method))

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "seed": self.seed,
                "ground_truth": self.ground_truth,
                "cells": [c.to_dict(self.ground_truth) for c in self.cells]}

    def rows_csv(self) -> str:
        lines = ["sample_size,trial,method,ace"]
        lines += [",".join(str(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def _estimation_trial(args):
    n, alpha, seed, methods, h_mode, base_config = args
    config = replace(base_config, n=n, seed=seed, scenario=SCENARIO_BASE)
    ds = generate(config)
    results = {}
    for method in methods:
        if method == estimate.METHOD_FULL:
            outcome = find_adjustment_set(ds, alpha)
            if outcome.status != FOUND:
                results[method] = None
                continue
            Z = outcome.adjustment_set
        elif method == estimate.METHOD_ORACLE_SEARCH:
            tester = GraphOracleTester(scenario_graph(config.scenario),
                                       ds.roles)
            outcome = find_adjustment_set(ds, alpha, tester=tester)
            if outcome.status != FOUND:
                results[method] = None
                continue
            Z = outcome.adjustment_set
        elif method == estimate.METHOD_IGNORE_MISSINGNESS:
            results[method] = estimate.baseline_ignore_missingness(
                ds, CORRECT_SET).ace
            continue
        elif method == estimate.METHOD_WRONG_ADJUSTMENT:
            results[method] = estimate.baseline_wrong_adjustment(
                ds, h_mode=h_mode).ace
            continue
        else:
            raise ValueError(f"unknown method {method!r}")
        model = shadow.solve_propensity(ds, Z, h_mode)
        treat = estimate.fit_treatment_propensity(ds, Z)
        results[method] = estimate.ipw_ace(ds, Z, model, treat,
                                           method=method).ace
    return seed, results


def run_estimation_experiment(sample_sizes, trials: int, alpha: float,
                              methods=ALL_METHODS, seed: int = 0,
                              jobs: int = 1, h_mode: str = shadow.H_MODE_A_MEAN,
                              base_config: DgpConfig | None = None,
                              n_oracle: int = 1_000_000
                              ) -> EstimationExperimentReport:
    """ACE estimates per (sample size, method) across simulated trials.

    ``full``-method trials where the search finds no set are recorded as
    missing estimates and excluded from the summaries; the exclusion count
    is reported alongside.
    """
    methods = tuple(methods)
    for m in methods:
        if m not in ALL_METHODS:
            raise ValueError(f"unknown method {m!r}")
    base_config = base_config or default_config()
    truth = true_ace(base_config, n_oracle)
    rows = []
    cells = []
    for idx, n in enumerate(sample_sizes):
        args = [(n, alpha, seed + trials * idx + t, methods, h_mode,
                 base_config) for t in range(trials)]
        outputs = _run_jobs(_estimation_trial, args, jobs)
        for method in methods:
            estimates = []
            not_found = 0
            for trial_seed, results in outputs:
                ace = results[method]
                if ace is None:
                    not_found += 1
                    rows.append((n, trial_seed, method, ""))
                else:
                    estimates.append(ace)
                    rows.append((n, trial_seed, method, repr(ace)))
            cells.append(EstimationCell(n, method, tuple(estimates),
                                        not_found))
    return EstimationExperimentReport(tuple(cells), truth, alpha, seed,
                                      tuple(rows))


def default_jobs() -> int:
    return os.cpu_count() or 1
