"""Limiting covariance matrices and quadratic rate functions.

Everything here is closed form in ``(gamma1, gamma2, sigma)``. The joint rate
for Case I is ``x' Gamma^-1 x / 2`` with ``Gamma`` diagonal, so no general
matrix inversion is ever needed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import noise as _noise
from .errors import ConfigError, ConsistencyFailure, InvalidRegime
from .noise import NoiseSpec, make_noise

__all__ = [
    "RateModel",
    "RATE_NAMES",
    "build",
    "eval_rate",
    "stationary_variances",
    "consistency_check",
    "ConsistencyReport",
]

RATE_NAMES = ("I_theta", "I_rho", "I_joint", "J", "I_d", "J_d", "I_L", "I_Lambda")
KAPPA_GRID = (1e2, 1e3, 1e4)


@dataclass(frozen=True, eq=False)
class RateModel:
    gamma1: float
    gamma2: float
    sigma: float
    Gamma: np.ndarray
    Theta: np.ndarray
    ThetaTilde: np.ndarray
    Upsilon: np.ndarray
    UpsilonTilde: np.ndarray
    noise: NoiseSpec = field(repr=False, default=None)

    def I_theta(self, x: float) -> float:
        g1, g2 = self.gamma1, self.gamma2
        return -x * x / (g1 * g2 * (g1 + g2))

    def I_rho(self, x: float) -> float:
        return -x * x / (4.0 * (self.gamma1 + self.gamma2))

    def I_joint(self, x) -> float:
        x1, x2 = (float(v) for v in x)
        return 0.5 * (x1 * x1 / self.Gamma[0, 0] + x2 * x2 / self.Gamma[1, 1])

    def J_rate(self, x: float) -> float:
        g1, g2 = self.gamma1, self.gamma2
        return -((g1 + g2) ** 3) * x * x / (16.0 * g1 * g2)

    def I_d(self, x: float) -> float:
        return -x * x / (16.0 * (self.gamma1 + self.gamma2))

    def J_d(self, x: float) -> float:
        g1, g2 = self.gamma1, self.gamma2
        return -((g1 + g2) ** 3) * x * x / (64.0 * g1 * g2)

    def variance(self, name: str) -> float:
        """Gaussian-limit variance matching the quadratic rate ``name``."""
        curv = {
            "I_theta": self.I_theta,
            "I_rho": self.I_rho,
            "J": self.J_rate,
            "I_d": self.I_d,
            "J_d": self.J_d,
        }[name](1.0)
        return 0.5 / curv

    def to_dict(self) -> dict:
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "sigma": self.sigma,
            "Gamma": self.Gamma.tolist(),
            "Theta": self.Theta.tolist(),
            "ThetaTilde": self.ThetaTilde.tolist(),
            "Upsilon": self.Upsilon.tolist(),
            "UpsilonTilde": self.UpsilonTilde.tolist(),
            "noise": self.noise.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def build(gamma1: float, gamma2: float, sigma: float = 1.0, noise: NoiseSpec | None = None) -> RateModel:
    if not (gamma1 < 0 and gamma2 < 0):
        raise InvalidRegime(f"gamma1 and gamma2 must be negative, got {gamma1}, {gamma2}")
    if not sigma > 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    g1, g2, s2 = float(gamma1), float(gamma2), float(sigma) ** 2
    g = g1 + g2
    s4 = s2 * s2
    Gamma = np.array([[-g1 * g2 * g / 2.0, 0.0], [0.0, -2.0 * g]])
    Theta = np.array([
        [-s4 / (2.0 * g1 * g2 * g), s4 / (2.0 * g2 * g)],
        [s4 / (2.0 * g2 * g), -s4 / (2.0 * g2)],
    ])
    ThetaTilde = np.array([
        [-g * s4 / (8.0 * g1 * g2), -s4 / (4.0 * g2)],
        [-s4 / (4.0 * g2), -s4 / (2.0 * g2)],
    ])
    Upsilon = np.array([
        [-g1 * g2 * g / s2, 0.0],
        [-2.0 * g1 * g / s2, -2.0 * g / s2],
    ])
    u = 8.0 * g1 * g2 / (g * g * s2)
    UpsilonTilde = np.array([u, -u])
    spec = noise if noise is not None else make_noise("Gaussian", sigma)
    for arr in (Gamma, Theta, ThetaTilde, Upsilon, UpsilonTilde):
        arr.setflags(write=False)
    return RateModel(g1, g2, float(sigma), Gamma, Theta, ThetaTilde, Upsilon, UpsilonTilde, spec)


def eval_rate(model: RateModel, name: str, x) -> float:
    if name == "I_joint":
        return model.I_joint(x)
    x = float(x)
    if name == "I_L":
        return _noise.rate_L(model.noise, x)
    if name == "I_Lambda":
        return _noise.rate_Lambda(model.noise, x)
    fn = {
        "I_theta": model.I_theta,
        "I_rho": model.I_rho,
        "J": model.J_rate,
        "I_d": model.I_d,
        "J_d": model.J_d,
    }.get(name)
    if fn is None:
        raise ConfigError(f"unknown rate {name!r}; expected one of {RATE_NAMES}")
    return fn(x)


def stationary_variances(theta: float, rho: float) -> tuple[float, float, float]:
    """Asymptotic variances of ``sqrt(n)(theta_hat - theta*)``, the rho and DW
    analogues, for fixed ``|theta|, |rho| < 1`` and unit noise variance."""
    tr = theta * rho
    v_theta = (1 - theta**2) * (1 - tr) * (1 - rho**2) / (1 + tr) ** 3
    v_rho = (
        (1 - tr)
        * ((theta + rho) ** 2 * (1 + tr) ** 2 + tr**2 * (1 - theta**2) * (1 - rho**2))
        / (1 + tr) ** 3
    )
    return v_theta, v_rho, 4.0 * v_rho


@dataclass
class ConsistencyReport:
    gamma1: float
    gamma2: float
    sigma: float
    checks: list[dict]

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "sigma": self.sigma,
            "passed": self.passed,
            "checks": self.checks,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _limit_check(name: str, values: list[float], target: float, tol: float) -> dict:
    errs = [_rel(v, target) for v in values]
    # first-order Richardson step on a geometric grid with ratio 10
    extrap = (10.0 * values[-1] - values[-2]) / 9.0
    extrap_err = _rel(extrap, target)
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    return {
        "name": name,
        "kappa": list(KAPPA_GRID),
        "values": [float(v) for v in values],
        "target": target,
        "rel_errors": errs,
        "richardson": float(extrap),
        "residual": extrap_err,
        "passed": bool(decreasing and errs[-1] <= tol and extrap_err < errs[-1]),
    }


def consistency_check(
    model: RateModel, tol: float = 1e-10, j_tol: float = 1e-12, limit_tol: float = 1e-2, strict: bool = True,
) -> ConsistencyReport:
    """Algebraic consistency of the limiting objects.

    1. ``Upsilon Theta Upsilon' = Gamma`` entrywise (relative to ``max|Gamma|``).
    2. ``J(x) * 2 UpsilonTilde_1^2 ThetaTilde_11 = x^2`` on a grid of ``x``.
    3. Fixed-coefficient variances, evaluated along the schedules at
       ``kappa = 1e2, 1e3, 1e4`` and rescaled by the case normalisation,
       converge to the limiting constants with an O(1/kappa) trend.
    4. At ``theta = 1 + g, rho = -1 - g`` the fixed-coefficient variances reduce
       to the quoted ``sigma^2_{1+g}``, ``sigma^2_{-1-g}`` and both lie below
       ``-1/g`` on a grid of ``g`` in ``(-1, 0)``.

    The matching (3, 4) is for unit noise variance; the model's ``sigma`` only
    enters 1 and 2.
    """
    g1, g2 = model.gamma1, model.gamma2
    g = g1 + g2
    checks = []

    prod = model.Upsilon @ model.Theta @ model.Upsilon.T
    r = float(np.max(np.abs(prod - model.Gamma)) / np.max(np.abs(model.Gamma)))
    checks.append({"name": "Upsilon*Theta*Upsilon^T=Gamma", "residual": r, "passed": bool(r <= tol)})

    c = 2.0 * model.UpsilonTilde[0] ** 2 * model.ThetaTilde[0, 0]
    xs = np.linspace(-3.0, 3.0, 13)
    r = max(abs(model.J_rate(x) * c - x * x) / max(1.0, x * x) for x in xs)
    checks.append({"name": "J*2*UpsilonTilde1^2*ThetaTilde11=x^2", "residual": r, "passed": bool(r <= j_tol)})

    r = max(
        max(abs(model.I_d(x) - model.I_rho(x / 2)), abs(model.J_d(x) - model.J_rate(x / 2)))
        for x in xs
    )
    checks.append({"name": "I_d(x)=I_rho(x/2),J_d(x)=J(x/2)", "residual": r, "passed": bool(r <= j_tol)})

    case1 = [stationary_variances(1 + g1 / k, 1 + g2 / k) for k in KAPPA_GRID]
    case2 = [stationary_variances(1 + g1 / k, -1 - g2 / k) for k in KAPPA_GRID]
    t_ii = -8.0 * g1 * g2 / g**3
    checks.append(_limit_check(
        "CaseI:kappa^3*var_theta", [k**3 * v[0] for k, v in zip(KAPPA_GRID, case1)], -g1 * g2 * g / 2.0, limit_tol))
    checks.append(_limit_check(
        "CaseI:kappa*var_rho", [k * v[1] for k, v in zip(KAPPA_GRID, case1)], -2.0 * g, limit_tol))
    checks.append(_limit_check(
        "CaseI:kappa*var_d", [k * v[2] for k, v in zip(KAPPA_GRID, case1)], -8.0 * g, limit_tol))
    checks.append(_limit_check(
        "CaseII:var_theta/kappa", [v[0] / k for k, v in zip(KAPPA_GRID, case2)], t_ii, limit_tol))
    checks.append(_limit_check(
        "CaseII:var_rho/kappa", [v[1] / k for k, v in zip(KAPPA_GRID, case2)], t_ii, limit_tol))

    worst_formula, worst_margin = 0.0, math.inf
    for gam in np.linspace(-0.95, -0.05, 19):
        a2 = (1 + gam) ** 2
        s_pos = -(gam**2 + 2 * gam + 2) / (gam**2 + 2 * gam)
        s_neg = a2 * a2 * s_pos
        vt, vr, _ = stationary_variances(1 + gam, -1 - gam)
        worst_formula = max(worst_formula, _rel(vt, s_pos), _rel(vr, s_neg))
        worst_margin = min(worst_margin, -1.0 / gam - s_pos, -1.0 / gam - s_neg)
    checks.append({
        "name": "time-invariant variances below -1/gamma",
        "residual": worst_formula,
        "margin": worst_margin,
        "passed": bool(worst_formula <= 1e-12 and worst_margin > 0.0),
    })

    report = ConsistencyReport(g1, g2, model.sigma, checks)
    if strict:
        for ch in checks:
            if not ch["passed"]:
                raise ConsistencyFailure(ch["name"], ch["residual"])
    return report
