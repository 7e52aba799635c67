"""Parameter schedules and growth-condition checks for both regimes.

Case I puts both roots near +1::

    theta_n = 1 + gamma1 / kappa_n,   rho_n = 1 + gamma2 / kappa_n

Case II flips the error root towards -1::

    theta_n = 1 + gamma1 / kappa_n,   rho_n = -1 - gamma2 / kappa_n

with ``kappa_n = n ** delta`` and ``gamma1, gamma2 < 0``. The deviation scale
``a_n`` is ``b_n`` in Case I and ``lambda_n`` in Case II.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .errors import ConfigError, NonStationaryAtN
from .noise import NoiseSpec, make_noise

__all__ = [
    "Case",
    "Scale",
    "ModelConfig",
    "ScheduleSample",
    "ConditionRecord",
    "ConditionReport",
    "sample_schedule",
    "validate_conditions",
]


class Case(str, Enum):
    I = "CaseI"
    II = "CaseII"

    @classmethod
    def parse(cls, value: "str | Case") -> "Case":
        if isinstance(value, Case):
            return value
        key = str(value).replace(" ", "").replace("_", "").lower()
        if key in ("casei", "i", "1"):
            return cls.I
        if key in ("caseii", "ii", "2"):
            return cls.II
        raise ConfigError(f"unknown case {value!r}")


@dataclass(frozen=True)
class Scale:
    """Deviation scale ``a_n``: ``n ** beta`` (``kind="PowerLaw"``) or ``sqrt(log n)``."""

    kind: str = "SqrtLog"
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("PowerLaw", "SqrtLog"):
            raise ConfigError(f"scale kind must be PowerLaw or SqrtLog, got {self.kind!r}")
        if self.kind == "PowerLaw" and not (self.beta is not None and self.beta > 0):
            raise ConfigError("PowerLaw scale needs beta > 0")

    def __call__(self, n: float) -> float:
        if self.kind == "PowerLaw":
            return float(n) ** self.beta
        return math.sqrt(math.log(n))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "beta": self.beta}

    @classmethod
    def power_law(cls, beta: float) -> "Scale":
        return cls("PowerLaw", float(beta))

    @classmethod
    def sqrt_log(cls) -> "Scale":
        return cls("SqrtLog", None)


@dataclass(frozen=True)
class ModelConfig:
    case: Case
    gamma1: float
    gamma2: float
    delta: float
    scale: Scale = field(default_factory=Scale)
    sigma: float = 1.0
    n: int = 1000
    noise: NoiseSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "case", Case.parse(self.case))
        if not (self.gamma1 < 0 and self.gamma2 < 0):
            raise ConfigError(f"gamma1 and gamma2 must be negative, got {self.gamma1}, {self.gamma2}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.noise is None:
            object.__setattr__(self, "noise", make_noise("Gaussian", self.sigma))
        elif self.noise.sigma != self.sigma:
            raise ConfigError(f"noise sigma {self.noise.sigma} differs from model sigma {self.sigma}")

    def kappa(self, n: int | None = None) -> float:
        return float(self.n if n is None else n) ** self.delta

    def with_n(self, n: int) -> "ModelConfig":
        return replace(self, n=n)

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "delta": self.delta,
            "scale": self.scale.to_dict(),
            "sigma": self.sigma,
            "n": self.n,
            "noise": self.noise.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        try:
            scale = data.get("scale") or {"kind": "SqrtLog"}
            sigma = float(data.get("sigma", 1.0))
            noise = data.get("noise") or {"family": "Gaussian", "sigma": sigma}
            return cls(
                case=Case.parse(data["case"]),
                gamma1=float(data["gamma1"]),
                gamma2=float(data["gamma2"]),
                delta=float(data["delta"]),
                scale=Scale(scale["kind"], scale.get("beta")),
                sigma=sigma,
                n=int(data["n"]),
                noise=make_noise(noise["family"], float(noise.get("sigma", sigma))),
            )
        except KeyError as exc:
            raise ConfigError(f"model config missing key {exc.args[0]!r}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ScheduleSample:
    """Schedule values at one sample size.

    ``one_minus_abs_theta`` and ``one_minus_abs_rho`` are computed from
    ``gamma / kappa`` without cancellation.
    """

    n: int
    kappa: float
    theta_n: float
    rho_n: float
    a_n: float
    theta_star: float
    rho_star: float
    d_star: float
    one_minus_abs_theta: float
    one_minus_abs_rho: float
    case: Case = Case.I


def sample_schedule(config: ModelConfig, n: int | None = None) -> ScheduleSample:
    """Evaluate every schedule value at sample size ``n`` (default ``config.n``)."""
    n = config.n if n is None else int(n)
    if n < 2:
        raise ConfigError(f"n must be >= 2, got {n}")
    kappa = float(n) ** config.delta
    theta = 1.0 + config.gamma1 / kappa
    if config.case is Case.I:
        rho = 1.0 + config.gamma2 / kappa
    else:
        rho = -1.0 - config.gamma2 / kappa
    if not (abs(theta) < 1.0 and abs(rho) < 1.0):
        raise NonStationaryAtN(n, theta, rho)
    tr = theta * rho
    theta_star = (theta + rho) / (1.0 + tr)
    rho_star = tr * theta_star
    return ScheduleSample(
        n=n,
        kappa=kappa,
        theta_n=theta,
        rho_n=rho,
        a_n=config.scale(n),
        theta_star=theta_star,
        rho_star=rho_star,
        d_star=2.0 * (1.0 - rho_star),
        one_minus_abs_theta=-config.gamma1 / kappa,
        one_minus_abs_rho=-config.gamma2 / kappa,
        case=config.case,
    )


# --- growth conditions -------------------------------------------------------

# (name, n exponent, a_n exponent, kappa exponent, log-n exponent) of each ratio
# that must diverge; the bare a_n -> infinity requirement is handled separately.
_RATIOS = {
    Case.I: (
        ("H-I:n/(a^6 k^2)", 1, -6, -2, 0),
        ("H-I:n/(a^2 k^5)", 1, -2, -5, 0),
        ("H-I:n a^2/(k^5 log^2 n)", 1, 2, -5, -2),
    ),
    Case.II: (
        ("H-II:n/(a^6 k^6)", 1, -6, -6, 0),
        ("H-II:n/(a^2 k^11)", 1, -2, -11, 0),
        ("H-II:n a^2/(k^7 log^2 n)", 1, 2, -7, -2),
    ),
}


@dataclass
class ConditionRecord:
    name: str
    analytic_pass: bool
    exponent: float | None
    ratios: list[tuple[int, float]]
    numeric_increasing: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "analytic_pass": self.analytic_pass,
            "exponent": self.exponent,
            "ratios": [{"n": n, "value": v} for n, v in self.ratios],
            "numeric_increasing": self.numeric_increasing,
        }


@dataclass
class ConditionReport:
    case: Case
    records: list[ConditionRecord]

    @property
    def passed(self) -> bool:
        return all(r.analytic_pass for r in self.records)

    def record(self, name: str) -> ConditionRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "passed": self.passed,
            "conditions": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def validate_conditions(config: ModelConfig, n_grid: Sequence[int]) -> ConditionReport:
    """Check the growth conditions on ``a_n`` and ``kappa_n`` plus the noise flags.

    For ``PowerLaw`` scales the verdict is the sign of the power of ``n`` in
    each ratio (log factors never flip a strictly positive power). For
    ``SqrtLog`` the power of ``a_n`` is zero, so the verdict is the sign of the
    remaining power of ``n``. Each ratio is also evaluated on ``n_grid``.
    """
    grid = [int(n) for n in n_grid]
    if not grid:
        raise ConfigError("n_grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("n_grid must be strictly increasing")
    if grid[0] < 2:
        raise ConfigError("n_grid values must be >= 2")

    beta = config.scale.beta if config.scale.kind == "PowerLaw" else 0.0
    d = config.delta
    records = []
    for name, pn, pa, pk, plog in _RATIOS[config.case]:
        exponent = pn + pa * beta + pk * d
        ratios = []
        for n in grid:
            a = config.scale(n)
            value = n**pn * a**pa * (n**d) ** pk * math.log(n) ** plog
            ratios.append((n, value))
        values = [v for _, v in ratios]
        increasing = all(b > a for a, b in zip(values, values[1:]))
        records.append(ConditionRecord(name, exponent > 0.0, exponent, ratios, increasing))

    a_values = [(n, config.scale(n)) for n in grid]
    records.insert(
        0,
        ConditionRecord(
            "a_n->inf",
            True,
            beta if config.scale.kind == "PowerLaw" else None,
            a_values,
            all(b[1] > a[1] for a, b in zip(a_values, a_values[1:])),
        ),
    )
    records.append(ConditionRecord("C-L", config.noise.chen_ledoux, None, [], True))
    records.append(ConditionRecord("exp-moment", config.noise.gaussian_integrable, None, [], True))
    return ConditionReport(config.case, records)
