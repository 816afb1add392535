"""Threshold detection, detection/false-alarm rates and ROC curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def default_nu_grid(n: int = 100, lo: float = 1e-4, hi: float = 1e2) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), n)


@dataclass(frozen=True)
class DetectionOutcome:
    estimated_active: frozenset
    nu: float


def threshold_detect(gamma_hat, sigma2: float, nu: float) -> DetectionOutcome:
    """Users whose estimate strictly exceeds ``nu * sigma2``."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    return DetectionOutcome(frozenset(np.flatnonzero(gamma_hat > nu * sigma2).tolist()), float(nu))


def detection_rates(truth, outcome, K_c: int) -> tuple[float, float]:
    """(p_D, p_FA) of an estimated active set against the true support.

    ``truth`` is an ActivityPattern or an iterable of active indices.  When
    nobody is active p_D is 1; when everybody is, p_FA is 0.
    """
    support = set(np.asarray(getattr(truth, "support", truth)).tolist())
    est = outcome.estimated_active if isinstance(outcome, DetectionOutcome) else set(outcome)
    if any(not 0 <= i < K_c for i in support | set(est)):
        raise ValueError("index outside [0, K_c)")
    n_active = len(support)
    p_d = len(support & est) / n_active if n_active else 1.0
    p_fa = len(est - support) / (K_c - n_active) if K_c > n_active else 0.0
    return p_d, p_fa


@dataclass
class RocCurve:
    nu: np.ndarray
    p_d: np.ndarray
    p_fa: np.ndarray
    trials: int

    @property
    def points(self):
        return list(zip(self.nu.tolist(), self.p_d.tolist(), self.p_fa.tolist()))

    def pd_at_pfa(self, target: float) -> float:
        """p_D at false-alarm rate ``target``, linear interpolation along the curve."""
        # p_fa decreases with nu; interpolate on the increasing reversed sequence
        pfa = self.p_fa[::-1]
        pd = self.p_d[::-1]
        if target <= pfa[0]:
            return float(pd[0])
        if target >= pfa[-1]:
            return float(pd[-1])
        j = np.searchsorted(pfa, target, side="right")
        # several grid points can share a p_fa value; take the best p_D among them
        lo_val = pfa[j - 1]
        lo_pd = pd[pfa == lo_val].max()
        hi_val = pfa[j]
        hi_pd = pd[pfa == hi_val].min()
        w = (target - lo_val) / (hi_val - lo_val)
        return float(lo_pd + w * (hi_pd - lo_pd))

    def to_csv(self) -> str:
        rows = ["nu,p_d,p_fa"]
        rows += [f"{n:.17g},{d:.17g},{f:.17g}" for n, d, f in zip(self.nu, self.p_d, self.p_fa)]
        return "\n".join(rows) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _trial_counts(gamma_hat, support, sigma2, nu_grid):
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    active = np.zeros(gamma_hat.size, dtype=bool)
    active[np.asarray(support, dtype=int)] = True
    above = gamma_hat[None, :] > nu_grid[:, None] * sigma2
    return above[:, active].sum(axis=1), above[:, ~active].sum(axis=1), int(active.sum())


def roc_sweep(per_trial, sigma2: float, nu_grid=None) -> RocCurve:
    """Average p_D and p_FA over trials for each threshold of ``nu_grid``.

    ``per_trial`` holds ``(gamma_hat, truth)`` pairs, ``truth`` being an
    ActivityPattern or the array of active indices.
    """
    per_trial = list(per_trial)
    if not per_trial:
        raise ValueError("roc_sweep needs at least one trial")
    nu_grid = default_nu_grid() if nu_grid is None else np.asarray(nu_grid, dtype=float)
    if nu_grid.size < 2 or np.any(np.diff(nu_grid) <= 0):
        raise ValueError("nu_grid must be strictly increasing with at least 2 points")
    p_d = np.zeros(nu_grid.size)
    p_fa = np.zeros(nu_grid.size)
    for gamma_hat, truth in per_trial:
        support = getattr(truth, "support", truth)
        hits, false_alarms, n_active = _trial_counts(gamma_hat, support, sigma2, nu_grid)
        K = np.asarray(gamma_hat).size
        p_d += hits / n_active if n_active else 1.0
        p_fa += false_alarms / (K - n_active) if K > n_active else 0.0
    n = len(per_trial)
    return RocCurve(nu_grid, p_d / n, p_fa / n, n)
