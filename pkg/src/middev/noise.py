"""I.i.d. noise families with exact moment functionals.

Only light-tailed laws ship (Gaussian and bounded ones): each has
``E exp(t0 V^2) < inf`` for some ``t0 > 0`` and satisfies the Chen-Ledoux tail
condition, so both flags are always true.

Sampling is keyed on a Philox counter-based generator. Gaussian draws use the
Box-Muller transform on ``Generator.random()`` doubles::

    u1, u2 = consecutive uniforms in [0, 1)
    r = sqrt(-2 * log1p(-u1))
    z = r * cos(2 pi u2), r * sin(2 pi u2)       (interleaved)

so a given ``(spec, n, seed)`` gives the same values on every platform whose
libm agrees on ``log1p``/``cos``/``sin``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DegenerateFourthMoment, DegenerateSecondMoment

__all__ = [
    "Family",
    "NoiseSpec",
    "make_noise",
    "sample_noise",
    "rng_for",
    "rate_L",
    "rate_Lambda",
    "truncated_moments",
]

_SEED_LIMIT = 1 << 128


class Family(str, Enum):
    GAUSSIAN = "Gaussian"
    UNIFORM = "Uniform"
    TWO_POINT = "ScaledTwoPointSymmetric"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        for member in cls:
            if value.lower() in (member.value.lower(), member.name.lower()):
                return member
        aliases = {"twopoint": cls.TWO_POINT, "two-point": cls.TWO_POINT, "normal": cls.GAUSSIAN}
        try:
            return aliases[value.lower()]
        except KeyError:
            raise ConfigError(
                f"unsupported noise family {value!r}; heavy-tailed laws void the "
                "Gaussian integrability hypothesis and are not provided"
            ) from None


@dataclass(frozen=True)
class NoiseSpec:
    """Immutable description of the noise law.

    Attributes
    ----------
    family : Family
    sigma : float
        Target standard deviation.
    m4 : float
        ``E V^4``.
    var_sq : float
        ``E (V^2 - sigma^2)^2``.
    var_quart : float
        ``E (V^4 - E V^4)^2``.
    gaussian_integrable, chen_ledoux : bool
        Analytic hypothesis flags.
    """

    family: Family
    sigma: float
    m4: float
    var_sq: float
    var_quart: float
    gaussian_integrable: bool = True
    chen_ledoux: bool = True

    @property
    def degenerate(self) -> bool:
        return self.var_sq == 0.0

    @property
    def symmetric(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"family": self.family.value, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseSpec":
        return make_noise(data["family"], data["sigma"])


def make_noise(family: "str | Family", sigma: float) -> NoiseSpec:
    """Build a NoiseSpec with moments filled in analytically."""
    fam = Family.parse(family)
    sigma = float(sigma)
    if not sigma > 0.0 or not math.isfinite(sigma):
        raise ConfigError(f"sigma must be a positive finite number, got {sigma!r}")
    s2 = sigma * sigma
    s4 = s2 * s2
    if fam is Family.GAUSSIAN:
        # E V^4 = 3, E V^6 = 15, E V^8 = 105 for the standard normal
        m4, m8 = 3.0 * s4, 105.0 * s4 * s4
    elif fam is Family.UNIFORM:
        # V ~ U(-c, c), c^2 = 3 sigma^2, E V^{2k} = c^{2k} / (2k + 1)
        c2 = 3.0 * s2
        m4, m8 = c2 * c2 / 5.0, c2**4 / 9.0
    else:
        m4, m8 = s4, s4 * s4
    var_sq = m4 - s4
    var_quart = m8 - m4 * m4
    if fam is Family.TWO_POINT:
        var_sq = var_quart = 0.0
    return NoiseSpec(fam, sigma, m4, var_sq, var_quart)


def rng_for(seed: int) -> np.random.Generator:
    """Philox generator keyed directly by a non-negative integer below 2**128."""
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise ConfigError(f"seed must lie in [0, 2**128), got {seed}")
    return np.random.Generator(np.random.Philox(key=seed))


def _box_muller(u: np.ndarray, n: int) -> np.ndarray:
    u1 = u[0::2]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * math.pi * u2
    z = np.empty(u.size, dtype=np.float64)
    z[0::2] = r * np.cos(angle)
    z[1::2] = r * np.sin(angle)
    return z[:n]


def sample_noise(spec: NoiseSpec, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` i.i.d. values from ``spec``; deterministic in ``(spec, n, seed)``."""
    n = int(n)
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    gen = rng_for(seed)
    if spec.family is Family.GAUSSIAN:
        m = n + (n & 1)
        v = _box_muller(gen.random(m), n)
        v *= spec.sigma
        return v
    u = gen.random(n)
    if spec.family is Family.UNIFORM:
        c = spec.sigma * math.sqrt(3.0)
        return c * (2.0 * u - 1.0)
    return np.where(u < 0.5, -spec.sigma, spec.sigma)


def rate_L(spec: NoiseSpec, x: float) -> float:
    """Moderate-deviation rate of ``(L_n - n sigma^2) / (sqrt(n) a_n)``."""
    if spec.var_sq <= 0.0:
        raise DegenerateSecondMoment(f"{spec.family.value} noise has E(V^2 - sigma^2)^2 = 0")
    return x * x / (2.0 * spec.var_sq)


def rate_Lambda(spec: NoiseSpec, x: float) -> float:
    """Moderate-deviation rate of ``(Lambda_n - n E V^4) / (sqrt(n) a_n)``."""
    if spec.var_quart <= 0.0:
        raise DegenerateFourthMoment(f"{spec.family.value} noise has E(V^4 - EV^4)^2 = 0")
    return x * x / (2.0 * spec.var_quart)


def truncated_moments(spec: NoiseSpec, level: float) -> tuple[float, float]:
    """Mean and variance of ``V 1{|V| <= level}`` centred by its own mean.

    Returns ``(E[V 1{|V|<=c}], E(V^(n))^2)``. Every shipped family is symmetric,
    so the mean is exactly zero.
    """
    c = float(level)
    s = spec.sigma
    if spec.family is Family.GAUSSIAN:
        t = c / s
        phi = math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
        second = s * s * (math.erf(t / math.sqrt(2.0)) - 2.0 * t * phi)
    elif spec.family is Family.UNIFORM:
        a = s * math.sqrt(3.0)
        second = s * s if c >= a else c**3 / (3.0 * a)
    else:
        second = s * s if c >= s else 0.0
    return 0.0, second
