"""Command-line front end.

Subcommands: ``simulate``, ``search``, ``estimate``, ``pipeline``, and the
``experiment`` group (``search`` / ``estimate``). Reports are emitted as
JSON with the fully resolved configuration and seed embedded, so any run
can be reproduced exactly. Exit codes: 0 success, 3 the incentive/response
gate failed, 4 no adjustment set found (2 is reserved by the argument
parser for usage errors).

Role columns are taken from a JSON config file (``--config``) and/or
individual flags; flags override file values. The default seed can be set
through the SHADOWIPW_SEED environment variable.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__, estimate, experiments, search, shadow
from .data import DataError, RoleMap, load_csv, write_csv
from .glm import GlmError
from .search import C1_FAILED, FOUND, NOT_FOUND, find_adjustment_set
from .simulate import SCENARIOS, default_config, generate

EXIT_OK = 0
EXIT_C1_FAILED = 3
EXIT_NOT_FOUND = 4

_STATUS_EXIT = {FOUND: EXIT_OK, C1_FAILED: EXIT_C1_FAILED,
                NOT_FOUND: EXIT_NOT_FOUND}


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        config = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"config file {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise click.ClickException(f"config file {path} must hold an object")
    return config


def _resolve(flag_value, config: dict, key: str, default=None):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _resolve_roles(config: dict, treatment, outcome, response, incentive,
                   covariates) -> RoleMap:
    values = {
        "treatment": _resolve(treatment, config, "treatment"),
        "outcome": _resolve(outcome, config, "outcome"),
        "response": _resolve(response, config, "response"),
        "incentive": _resolve(incentive, config, "incentive"),
    }
    cov = _resolve(covariates, config, "covariates")
    if isinstance(cov, str):
        cov = [c.strip() for c in cov.split(",") if c.strip()]
    values["covariates"] = cov
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise click.ClickException(
            "missing role configuration: " + ", ".join(sorted(missing)))
    try:
        return RoleMap.from_dict(values)
    except DataError as exc:
        raise click.ClickException(str(exc)) from exc


_ROLE_OPTIONS = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="JSON config file with roles/settings."),
    click.option("--treatment", default=None),
    click.option("--outcome", default=None),
    click.option("--response", default=None),
    click.option("--incentive", default=None),
    click.option("--covariates", default=None,
                 help="Comma-separated covariate column names."),
]


def _with_role_options(fn):
    for option in reversed(_ROLE_OPTIONS):
        fn = option(fn)
    return fn


seed_option = click.option("--seed", type=int, default=None,
                           envvar="SHADOWIPW_SEED", show_envvar=True,
                           help="Base seed (default 0).")


@click.group()
@click.version_option(version=__version__, prog_name="shadowipw")
def main():
    """Identification tests and weighting estimators for causal effects
    when the outcome censors its own reporting."""


@main.command("simulate")
@click.option("--n", type=int, default=10000, show_default=True)
@seed_option
@click.option("--scenario", type=click.Choice(SCENARIOS), default="base",
              show_default=True)
@click.option("--out", required=True, type=click.Path(),
              help="Output CSV path; oracle columns go to a sibling file.")
def cmd_simulate(n, seed, scenario, out):
    """Draw a synthetic dataset and write it as CSV."""
    config = default_config(n=n, seed=seed or 0, scenario=scenario)
    ds = generate(config)
    write_csv(ds, out)
    click.echo(json.dumps({"n": n, "seed": config.seed, "scenario": scenario,
                           "out": str(out), "mean_response":
                           float(ds.column("R").mean())}, sort_keys=True))


def _read_dataset(data_path, roles):
    try:
        return load_csv(data_path, roles)
    except DataError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command("search")
@click.argument("data", type=click.Path(exists=True))
@_with_role_options
@click.option("--alpha", type=float, default=None, help="Test level.")
@click.option("--max-subset-size", type=int, default=None)
@click.option("--out", default=None, help="Report path (default stdout).")
def cmd_search(data, config_path, treatment, outcome, response, incentive,
               covariates, alpha, max_subset_size, out):
    """Search for a witness and adjustment set on a CSV dataset."""
    config = _load_config_file(config_path)
    roles = _resolve_roles(config, treatment, outcome, response, incentive,
                           covariates)
    alpha = _resolve(alpha, config, "alpha", 0.05)
    max_subset_size = _resolve(max_subset_size, config, "max_subset_size")
    ds = _read_dataset(data, roles)
    try:
        outcome_ = find_adjustment_set(ds, alpha, max_subset_size)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    report = {"command": "search", "data": str(data), "alpha": alpha,
              "max_subset_size": max_subset_size, "roles": roles.to_dict(),
              "outcome": outcome_.to_dict()}
    _emit(report, out)
    sys.exit(_STATUS_EXIT[outcome_.status])


@main.command("estimate")
@click.argument("data", type=click.Path(exists=True))
@_with_role_options
@click.option("--adjustment", required=True,
              help="Comma-separated adjustment-set columns.")
@click.option("--h-mode", type=click.Choice(shadow.H_MODES), default=None)
@click.option("--clip-lo", type=float, default=None)
@click.option("--clip-hi", type=float, default=None)
@click.option("--out", default=None)
def cmd_estimate(data, config_path, treatment, outcome, response, incentive,
                 covariates, adjustment, h_mode, clip_lo, clip_hi, out):
    """Estimate the average causal effect with a given adjustment set."""
    config = _load_config_file(config_path)
    roles = _resolve_roles(config, treatment, outcome, response, incentive,
                           covariates)
    h_mode = _resolve(h_mode, config, "h_mode", shadow.H_MODE_A_MEAN)
    clip_lo = _resolve(clip_lo, config, "clip_lo", 0.01)
    clip_hi = _resolve(clip_hi, config, "clip_hi", 0.99)
    Z = tuple(c.strip() for c in adjustment.split(",") if c.strip())
    ds = _read_dataset(data, roles)
    try:
        model = shadow.solve_propensity(ds, Z, h_mode)
        treat = estimate.fit_treatment_propensity(ds, Z)
        est = estimate.ipw_ace(ds, Z, model, treat, (clip_lo, clip_hi))
    except (shadow.ShadowError, GlmError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    report = {"command": "estimate", "data": str(data),
              "roles": roles.to_dict(), "adjustment": list(Z),
              "h_mode": h_mode, "clip": [clip_lo, clip_hi],
              "response_propensity": model.to_dict(),
              "estimate": est.to_dict()}
    _emit(report, out)


@main.command("pipeline")
@click.argument("data", type=click.Path(exists=True))
@_with_role_options
@click.option("--alpha", type=float, default=None)
@click.option("--max-subset-size", type=int, default=None)
@click.option("--h-mode", type=click.Choice(shadow.H_MODES), default=None)
@click.option("--clip-lo", type=float, default=None)
@click.option("--clip-hi", type=float, default=None)
@seed_option
@click.option("--out", default=None)
def cmd_pipeline(data, config_path, treatment, outcome, response, incentive,
                 covariates, alpha, max_subset_size, h_mode, clip_lo,
                 clip_hi, seed, out):
    """Run the three-step procedure: gate test, search, then estimation."""
    config = _load_config_file(config_path)
    roles = _resolve_roles(config, treatment, outcome, response, incentive,
                           covariates)
    alpha = _resolve(alpha, config, "alpha", 0.05)
    if not 0.0 < alpha < 1.0:
        raise click.ClickException(f"alpha must lie in (0, 1), got {alpha}")
    max_subset_size = _resolve(max_subset_size, config, "max_subset_size")
    h_mode = _resolve(h_mode, config, "h_mode", shadow.H_MODE_A_MEAN)
    clip_lo = _resolve(clip_lo, config, "clip_lo", 0.01)
    clip_hi = _resolve(clip_hi, config, "clip_hi", 0.99)
    seed = _resolve(seed, config, "seed", 0)

    ds = _read_dataset(data, roles)
    resolved = {"alpha": alpha, "max_subset_size": max_subset_size,
                "h_mode": h_mode, "clip": [clip_lo, clip_hi], "seed": seed,
                "roles": roles.to_dict()}
    try:
        outcome_ = find_adjustment_set(ds, alpha, max_subset_size)
        report = {"command": "pipeline", "data": str(data),
                  "config": resolved, "search": outcome_.to_dict(),
                  "response_propensity": None, "treatment_propensity": None,
                  "estimate": None}
        if outcome_.status == FOUND:
            Z = outcome_.adjustment_set
            model = shadow.solve_propensity(ds, Z, h_mode)
            treat = estimate.fit_treatment_propensity(ds, Z)
            est = estimate.ipw_ace(ds, Z, model, treat, (clip_lo, clip_hi))
            report["response_propensity"] = model.to_dict()
            report["treatment_propensity"] = {
                "coefficients": [float(c) for c in treat.coefficients],
                "converged": treat.converged, "separated": treat.separated}
            report["estimate"] = est.to_dict()
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    _emit(report, out)
    sys.exit(_STATUS_EXIT[outcome_.status])


@main.group("experiment")
def cmd_experiment():
    """Monte Carlo reproductions of the search and estimation studies."""


_GRID_DEFAULT = "500,2500,5000,10000"


def _parse_grid(text: str):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise click.ClickException(f"bad sample-size grid {text!r}") from None


@cmd_experiment.command("search")
@click.option("--n-grid", default=_GRID_DEFAULT, show_default=True)
@click.option("--trials", type=int, default=200, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@seed_option
@click.option("--jobs", type=int, default=None,
              help="Parallel workers (default: logical cores).")
@click.option("--oracle", is_flag=True,
              help="Replace the tests with the d-separation oracle.")
@click.option("--out-dir", type=click.Path(), default=None,
              help="Write summary JSON and per-trial CSV here.")
def cmd_experiment_search(n_grid, trials, alpha, seed, jobs, oracle, out_dir):
    """Sensitivity/specificity of the adjustment-set search."""
    seed = 0 if seed is None else seed
    jobs = jobs or experiments.default_jobs()
    report = experiments.run_search_experiment(
        _parse_grid(n_grid), trials, alpha, seed=seed, jobs=jobs,
        oracle=oracle)
    summary = {"command": "experiment search", "oracle": oracle,
               "jobs_invariant": True, **report.to_dict()}
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "search_summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
        (out / "search_trials.csv").write_text(report.rows_csv())
        click.echo(f"wrote {out / 'search_summary.json'}")
    else:
        _emit(summary, None)


@cmd_experiment.command("estimate")
@click.option("--n-grid", default=_GRID_DEFAULT, show_default=True)
@click.option("--trials", type=int, default=200, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--methods", default=",".join(experiments.ALL_METHODS),
              show_default=True)
@seed_option
@click.option("--jobs", type=int, default=None)
@click.option("--h-mode", type=click.Choice(shadow.H_MODES),
              default=shadow.H_MODE_A_MEAN, show_default=True)
@click.option("--out-dir", type=click.Path(), default=None)
def cmd_experiment_estimate(n_grid, trials, alpha, methods, seed, jobs,
                            h_mode, out_dir):
    """Compare the full estimator against the oracle search and baselines."""
    seed = 0 if seed is None else seed
    jobs = jobs or experiments.default_jobs()
    method_list = tuple(m.strip() for m in methods.split(",") if m.strip())
    try:
        report = experiments.run_estimation_experiment(
            _parse_grid(n_grid), trials, alpha, methods=method_list,
            seed=seed, jobs=jobs, h_mode=h_mode)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    summary = {"command": "experiment estimate", **report.to_dict()}
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "estimate_summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
        (out / "estimate_trials.csv").write_text(report.rows_csv())
        click.echo(f"wrote {out / 'estimate_summary.json'}")
    else:
        _emit(summary, None)


if __name__ == "__main__":
    main()
