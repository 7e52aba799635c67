"""Trajectories of the double autoregression started from zero."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import LengthMismatch
from .noise import sample_noise
from .params import ModelConfig, ScheduleSample, sample_schedule

__all__ = ["Trajectory", "generate", "generate_with_noise", "write_csv"]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One realised path.

    ``V`` holds V_1..V_n (Python index ``k - 1``); ``eps`` and ``X`` hold
    indices 0..n with ``eps[0] = X[0] = 0``.
    """

    n: int
    V: np.ndarray
    eps: np.ndarray
    X: np.ndarray
    schedule: ScheduleSample
    sigma: float = 1.0


def _path(V: np.ndarray, schedule: ScheduleSample, sigma: float) -> Trajectory:
    V = np.ascontiguousarray(V, dtype=np.float64)
    eps, X = _kernels.ar_path(V, schedule.theta_n, schedule.rho_n)
    for arr in (V, eps, X):
        arr.setflags(write=False)
    return Trajectory(V.shape[0], V, eps, X, schedule, sigma)


def generate(config: ModelConfig, seed: int) -> Trajectory:
    """Simulate ``config.n`` steps with noise drawn from ``config.noise`` under ``seed``."""
    schedule = sample_schedule(config)
    V = sample_noise(config.noise, config.n, seed)
    return _path(V, schedule, config.sigma)


def generate_with_noise(config: ModelConfig, V, schedule: ScheduleSample | None = None) -> Trajectory:
    """Apply the recursion to caller-supplied noise ``V_1..V_n``.

    ``schedule`` pins the coefficients (e.g. ``kappa = 10`` on a two-step path,
    which no ``n ** delta`` reaches); by default it is evaluated at ``config.n``.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 1 or V.shape[0] != config.n:
        raise LengthMismatch(f"noise has shape {V.shape}, expected ({config.n},)")
    return _path(V, schedule or sample_schedule(config), config.sigma)


def write_csv(traj: Trajectory, dest: "str | Path | io.TextIOBase") -> None:
    """Dump ``k,V,eps,X`` rows; the ``k = 0`` row leaves ``V`` empty."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "V", "eps", "X"])
        w.writerow([0, "", repr(float(traj.eps[0])), repr(float(traj.X[0]))])
        for k in range(1, traj.n + 1):
            w.writerow([k, repr(float(traj.V[k - 1])), repr(float(traj.eps[k])), repr(float(traj.X[k]))])
    finally:
        if own:
            fh.close()
