"""Seeded Monte Carlo runs comparing estimators on a common sample covariance per trial."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import NumericalFault, SolverOptions, run_coordinate_descent
from .metrics import RocCurve, default_nu_grid, roc_sweep
from .model import ConfigError, ScenarioConfig, draw_scenario, generate_pilots, spawn_streams

log = logging.getLogger(__name__)

SWEEPABLE = ("M", "K_c", "A_c", "snr_db", "D_c")


def trial_seed(master_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1, np.uint64)[0])


def solver_seed(master_seed: int, trial: int, solver_index: int) -> int:
    ss = np.random.SeedSequence([master_seed, trial, solver_index + 1])
    return int(ss.generate_state(1, np.uint64)[0])


def matrix_digest(S: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(S).tobytes()).hexdigest()


@dataclass
class SolverOutcome:
    kind: str
    gamma_hat: np.ndarray | None
    final_cost: float
    sweeps: int
    converged: bool
    wall_time: float
    error_l2: float = float("nan")
    error_linf: float = float("nan")
    fault: str | None = None


@dataclass
class TrialResult:
    trial: int
    seed: int
    support: np.ndarray
    gamma_true: np.ndarray
    sigma_hat_digest: str
    outcomes: list

    @property
    def flagged(self) -> bool:
        return any(o.fault for o in self.outcomes)


@dataclass
class RunRecord:
    config: ScenarioConfig
    solvers: list
    master_seed: int
    trials: int
    fixed_pilots: bool
    per_trial: list
    nu_grid: np.ndarray
    roc: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    flagged_trials: int = 0
    label: str | None = None

    def pd_at_pfa(self, kind: str, p_fa: float) -> float:
        return self.roc[kind].pd_at_pfa(p_fa)

    def summary(self) -> dict:
        """JSON-ready digest: config echo, aggregates and per-trial statistics."""
        per_trial = []
        for t in self.per_trial:
            per_trial.append({
                "trial": t.trial,
                "seed": t.seed,
                "support": t.support.tolist(),
                "sigma_hat_sha256": t.sigma_hat_digest,
                "flagged": t.flagged,
                "solvers": {
                    o.kind: {
                        "final_cost": o.final_cost,
                        "sweeps": o.sweeps,
                        "converged": o.converged,
                        "wall_time": o.wall_time,
                        "error_l2": o.error_l2,
                        "error_linf": o.error_linf,
                        "fault": o.fault,
                    }
                    for o in t.outcomes
                },
            })
        return {
            "label": self.label,
            "config": self.config.to_dict(),
            "solvers": [s.to_dict() for s in self.solvers],
            "master_seed": self.master_seed,
            "trials": self.trials,
            "valid_trials": self.trials - self.flagged_trials,
            "flagged_trials": self.flagged_trials,
            "fixed_pilots": self.fixed_pilots,
            "aggregates": {
                kind: {
                    "pd_at_pfa_1e-2": self.roc[kind].pd_at_pfa(1e-2) if kind in self.roc else None,
                    **self.errors.get(kind, {}),
                }
                for kind in (s.kind.value for s in self.solvers)
            },
            "per_trial": per_trial,
        }


def _run_trial(cfg, solvers, master_seed, trial, pilots):
    seed = trial_seed(master_seed, trial)
    scen = draw_scenario(cfg.replace(rng_seed=seed), pilots=pilots)
    sigma_hat = scen.sigma_hat
    sigma_hat.flags.writeable = False
    digest = matrix_digest(sigma_hat)
    gamma_true = scen.activity.gamma
    outcomes = []
    for j, opts in enumerate(solvers):
        opts = replace(opts, seed=solver_seed(master_seed, trial, j))
        t0 = time.perf_counter()
        try:
            if matrix_digest(sigma_hat) != digest:
                raise RuntimeError("sample covariance changed between solvers")
            gamma_hat, diag = run_coordinate_descent(sigma_hat, scen.A, cfg.sigma2, opts)
        except (NumericalFault, np.linalg.LinAlgError, FloatingPointError) as exc:
            outcomes.append(SolverOutcome(opts.kind.value, None, float("nan"), 0, False,
                                          time.perf_counter() - t0, fault=repr(exc)))
            continue
        err = gamma_hat - gamma_true
        outcomes.append(SolverOutcome(
            opts.kind.value, gamma_hat, diag.final_cost, diag.sweeps, diag.converged,
            time.perf_counter() - t0,
            error_l2=float(np.linalg.norm(err)),
            error_linf=float(np.max(np.abs(err))),
        ))
    return TrialResult(trial, seed, scen.activity.support, gamma_true, digest, outcomes)


def _run_trial_args(args):
    return _run_trial(*args)


def run_scenario(
    cfg: ScenarioConfig,
    solvers,
    trials: int,
    master_seed: int,
    fixed_pilots: bool = True,
    nu_grid=None,
    workers: int = 1,
    label: str | None = None,
) -> RunRecord:
    """Run ``trials`` independent draws of ``cfg`` through every solver.

    Trial i uses the scenario seed ``trial_seed(master_seed, i)``; with
    ``fixed_pilots`` one pilot codebook drawn from ``master_seed`` is shared
    by all trials.  The record is identical for any ``workers`` count.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    solvers = [s if isinstance(s, SolverOptions) else SolverOptions(estimator_kind=s) for s in solvers]
    nu_grid = default_nu_grid() if nu_grid is None else np.asarray(nu_grid, dtype=float)
    pilots = generate_pilots(cfg, spawn_streams(master_seed)["pilots"]) if fixed_pilots else None
    jobs = [(cfg, solvers, master_seed, i, pilots) for i in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial_args, jobs))
    else:
        results = [_run_trial(*job) for job in jobs]
    results.sort(key=lambda r: r.trial)

    record = RunRecord(cfg, solvers, master_seed, trials, fixed_pilots, results, nu_grid, label=label)
    valid = [r for r in results if not r.flagged]
    record.flagged_trials = len(results) - len(valid)
    if record.flagged_trials:
        log.warning("%d of %d trials flagged by solver faults", record.flagged_trials, trials)
    for j, opts in enumerate(solvers):
        kind = opts.kind.value
        if not valid:
            continue
        outs = [r.outcomes[j] for r in valid]
        record.roc[kind] = roc_sweep(
            [(o.gamma_hat, r.support) for o, r in zip(outs, valid)], cfg.sigma2, nu_grid
        )
        l2 = np.array([o.error_l2 for o in outs])
        linf = np.array([o.error_linf for o in outs])
        record.errors[kind] = {
            "error_l2_mean": float(l2.mean()),
            "error_l2_median": float(np.median(l2)),
            "error_linf_mean": float(linf.mean()),
            "error_linf_median": float(np.median(linf)),
            "sweeps_mean": float(np.mean([o.sweeps for o in outs])),
            "converged_fraction": float(np.mean([o.converged for o in outs])),
        }
    return record


def derived_config(base: ScenarioConfig, parameter: str, value) -> ScenarioConfig:
    if parameter not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {parameter!r}; choose from {SWEEPABLE}")
    if parameter == "snr_db":
        return base.replace(snr_db_active=float(value))
    return base.replace(**{parameter: int(value)})


def sweep_parameter(base_cfg, parameter, values, solvers, trials, master_seed, **kw):
    """One RunRecord per value; invalid derived configs are skipped and logged."""
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    records = []
    for v in values:
        try:
            cfg = derived_config(base_cfg, parameter, v)
        except ConfigError as exc:
            if parameter not in SWEEPABLE:
                raise
            log.warning("skipping %s=%s: %s", parameter, v, exc)
            continue
        records.append(run_scenario(cfg, solvers, trials, master_seed, label=f"{parameter}={v}", **kw))
    return records


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def emit_results(record: RunRecord, out_dir, formats=("csv", "json_summary")) -> dict:
    """Write ROC CSVs, a JSON summary and a manifest with SHA-256 hashes.

    Returns the manifest as a dict mapping file names to digests.
    """
    formats = set(formats)
    unknown = formats - {"csv", "json_summary"}
    if unknown:
        raise ValueError(f"unknown output formats {sorted(unknown)}")
    written = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        if "csv" in formats:
            for kind, roc in record.roc.items():
                name = f"roc_{kind}.csv"
                roc.write_csv(os.path.join(out_dir, name))
                written.append(name)
        if "json_summary" in formats:
            with open(os.path.join(out_dir, "summary.json"), "w") as fh:
                json.dump(record.summary(), fh, indent=2, default=_json_default)
                fh.write("\n")
            written.append("summary.json")
        manifest = {name: _sha256_file(os.path.join(out_dir, name)) for name in written}
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump({"files": manifest}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"writing results to {out_dir}: {exc}") from exc
    return manifest


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
