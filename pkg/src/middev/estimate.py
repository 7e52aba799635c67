"""Two-stage least squares and the Durbin-Watson statistic.

Index conventions matter: the ``rho`` denominator runs over lagged residuals
(``k - 1``), the Durbin-Watson denominator over current ones (``k``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ZeroDenominator
from .params import Case, ScheduleSample
from .simulate import Trajectory

__all__ = [
    "EstimateSet",
    "estimate_theta",
    "residuals",
    "estimate_rho",
    "durbin_watson",
    "full_estimate",
    "scalings",
    "sign_flip",
    "SignFlipReport",
    "CSV_HEADER",
]

CSV_HEADER = (
    "seed", "n", "case", "theta_hat", "rho_hat", "d_hat",
    "theta_star", "rho_star", "d_star", "z_theta", "z_rho", "z_d",
)


def estimate_theta(traj: Trajectory) -> float:
    X = traj.X
    den = _kernels.cdot(X[:-1], X[:-1])
    if den == 0.0:
        raise ZeroDenominator("theta", "sum of X_{k-1}^2 is zero")
    return _kernels.cdot(X[1:], X[:-1]) / den


def residuals(traj: Trajectory, theta_hat: float) -> np.ndarray:
    X = traj.X
    out = np.empty_like(X)
    out[0] = 0.0
    out[1:] = X[1:] - theta_hat * X[:-1]
    return out


def estimate_rho(res: np.ndarray) -> float:
    res = np.asarray(res, dtype=np.float64)
    den = _kernels.cdot(res[:-1], res[:-1])
    if den == 0.0:
        raise ZeroDenominator("rho", "sum of lagged residuals squared is zero")
    return _kernels.cdot(res[1:], res[:-1]) / den


def durbin_watson(res: np.ndarray) -> float:
    res = np.asarray(res, dtype=np.float64)
    den = _kernels.cdot(res[1:], res[1:])
    if den == 0.0:
        raise ZeroDenominator("d", "sum of residuals squared is zero")
    diff = np.diff(res)
    return _kernels.cdot(diff, diff) / den


def scalings(case: Case, n: int, kappa: float) -> tuple[float, float, float]:
    """Normalising factors for ``(theta, rho, d)`` deviations."""
    if case is Case.I:
        return math.sqrt(n * kappa**3), math.sqrt(n * kappa), math.sqrt(n * kappa)
    s = math.sqrt(n / kappa)
    return s, s, s


@dataclass(frozen=True, eq=False)
class EstimateSet:
    theta_hat: float
    rho_hat: float
    d_hat: float
    residuals: np.ndarray
    theta_star: float
    rho_star: float
    d_star: float
    z_theta: float
    z_rho: float
    z_d: float
    case: Case
    n: int

    def row(self, seed: int | str = "") -> list:
        return [
            seed, self.n, self.case.value, self.theta_hat, self.rho_hat, self.d_hat,
            self.theta_star, self.rho_star, self.d_star, self.z_theta, self.z_rho, self.z_d,
        ]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "case": self.case.value,
            "theta_hat": self.theta_hat,
            "rho_hat": self.rho_hat,
            "d_hat": self.d_hat,
            "centering": {"theta_star": self.theta_star, "rho_star": self.rho_star, "d_star": self.d_star},
            "normalized": {"z_theta": self.z_theta, "z_rho": self.z_rho, "z_d": self.z_d},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def full_estimate(traj: Trajectory) -> EstimateSet:
    """Estimates, centerings and ``a_n``-normalised deviations for one path."""
    sch: ScheduleSample = traj.schedule
    theta_hat = estimate_theta(traj)
    res = residuals(traj, theta_hat)
    rho_hat = estimate_rho(res)
    d_hat = durbin_watson(res)
    case = sch.case
    s_theta, s_rho, s_d = scalings(case, traj.n, sch.kappa)
    a = sch.a_n
    res.setflags(write=False)
    return EstimateSet(
        theta_hat=theta_hat,
        rho_hat=rho_hat,
        d_hat=d_hat,
        residuals=res,
        theta_star=sch.theta_star,
        rho_star=sch.rho_star,
        d_star=sch.d_star,
        z_theta=s_theta * (theta_hat - sch.theta_star) / a,
        z_rho=s_rho * (rho_hat - sch.rho_star) / a,
        z_d=s_d * (d_hat - sch.d_star) / a,
        case=case,
        n=traj.n,
    )


@dataclass(frozen=True, eq=False)
class SignFlipReport:
    """Estimates on the alternating-sign path next to their predicted values."""

    Y: np.ndarray
    eta_hat: np.ndarray
    alpha_hat: float
    beta_hat: float
    e_hat: float
    alpha_star: float
    beta_star: float
    e_star: float
    theta_hat: float
    rho_hat: float
    d_hat: float
    max_abs_error: float
    max_rel_error: float
    theta_rho_rel_error: float
    dw_exact_rel_error: float


def _stars(a: float, b: float) -> tuple[float, float, float]:
    s = (a + b) / (1.0 + a * b)
    r = a * b * s
    return s, r, 2.0 * (1.0 - r)


def sign_flip(traj: Trajectory) -> tuple[Trajectory, SignFlipReport]:
    """Map ``Y_k = (-1)^k X_k`` and check the estimator correspondences.

    Under symmetric noise the flipped path is a path of the same model with
    parameters ``(-theta_n, -rho_n)``. ``max_abs_error`` / ``max_rel_error``
    cover the mapping ``alpha_hat = -theta_hat``, ``beta_hat = -rho_hat``,
    ``e_hat = d_hat`` together with the matching centerings.
    ``theta_rho_rel_error`` covers only the first two and their centerings.

    The flipped residuals are ``(-1)^k`` times the original ones, so the
    Durbin-Watson pair actually satisfies ``e_hat = 4 - d_hat - 2 f_n`` with
    ``f_n = e_n^2 / J_n``, and ``e_star = 4 - d_star``;
    ``dw_exact_rel_error`` checks that relation.
    """
    signs = np.where(np.arange(traj.n + 1) % 2 == 0, 1.0, -1.0)
    Y = signs * traj.X
    eta = signs * traj.eps
    W = signs[1:] * traj.V
    sch = traj.schedule
    alpha, beta = -sch.theta_n, -sch.rho_n
    a_star, b_star, e_star = _stars(alpha, beta)
    flipped_sched = replace(
        sch, theta_n=alpha, rho_n=beta, theta_star=a_star, rho_star=b_star, d_star=e_star
    )
    for arr in (Y, eta, W):
        arr.setflags(write=False)
    flipped = Trajectory(traj.n, W, eta, Y, flipped_sched, traj.sigma)

    theta_hat = estimate_theta(traj)
    alpha_hat = estimate_theta(flipped)
    res = residuals(traj, theta_hat)
    eta_hat = residuals(flipped, alpha_hat)
    rho_hat, beta_hat = estimate_rho(res), estimate_rho(eta_hat)
    d_hat, e_hat = durbin_watson(res), durbin_watson(eta_hat)

    def rel(pairs):
        return max(abs(a - b) / max(1.0, abs(a), abs(b)) for a, b in pairs)

    signs_ok = [
        (alpha_hat, -theta_hat),
        (beta_hat, -rho_hat),
        (a_star, -sch.theta_star),
        (b_star, -sch.rho_star),
    ]
    stated = signs_ok + [(e_hat, d_hat), (e_star, sch.d_star)]
    f_n = res[-1] ** 2 / _kernels.cdot(res[1:], res[1:])
    exact_dw = [(e_hat, 4.0 - d_hat - 2.0 * f_n), (e_star, 4.0 - sch.d_star)]
    report = SignFlipReport(
        Y, eta_hat, alpha_hat, beta_hat, e_hat, a_star, b_star, e_star,
        theta_hat, rho_hat, d_hat,
        max_abs_error=max(abs(a - b) for a, b in stated),
        max_rel_error=rel(stated),
        theta_rho_rel_error=rel(signs_ok),
        dw_exact_rel_error=rel(exact_dw),
    )
    return flipped, report
