"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MiddevError(Exception):
    """Base class for all package errors."""


class ConfigError(MiddevError, ValueError):
    """A configuration violates its invariants."""


class NonStationaryAtN(MiddevError, ValueError):
    """theta_n or rho_n left the open interval (-1, 1) at this sample size."""

    def __init__(self, n: int, theta: float, rho: float):
        self.n = n
        self.theta = theta
        self.rho = rho
        super().__init__(
            f"non-stationary at n={n}: theta_n={theta!r}, rho_n={rho!r} "
            "(kappa_n must exceed max(|gamma1|, |gamma2|))"
        )


class InvalidRegime(MiddevError, ValueError):
    """Drift parameters outside gamma1 < 0, gamma2 < 0."""


class DegenerateSecondMoment(MiddevError, ValueError):
    """E(V^2 - sigma^2)^2 is zero, so the L_n rate function is undefined."""


class DegenerateFourthMoment(MiddevError, ValueError):
    """E(V^4 - EV^4)^2 is zero, so the Lambda_n rate function is undefined."""


class LengthMismatch(MiddevError, ValueError):
    """Injected noise does not have length n."""


class ZeroDenominator(MiddevError, ArithmeticError):
    """A least-squares ratio has an empty denominator.

    ``stage`` names the estimator that failed: ``"theta"``, ``"rho"`` or ``"d"``.
    """

    def __init__(self, stage: str, message: str | None = None):
        self.stage = stage
        super().__init__(message or f"zero denominator in {stage} stage")


class DivergentIdentity(MiddevError, ArithmeticError):
    """An exact decomposition identity failed its residual tolerance."""

    def __init__(self, name: str, rel_residual: float, tol: float):
        self.name = name
        self.rel_residual = rel_residual
        self.tol = tol
        super().__init__(f"identity {name} diverged: rel_residual={rel_residual:.3e} > {tol:.1e}")


class InequalityViolated(MiddevError, ArithmeticError):
    def __init__(self, name: str, margin: float):
        self.name = name
        self.margin = margin
        super().__init__(f"inequality {name} violated by {margin:.3e}")


class ConsistencyFailure(MiddevError, ArithmeticError):
    def __init__(self, check: str, residual: float):
        self.check = check
        self.residual = residual
        super().__init__(f"consistency check {check} failed: residual={residual:.3e}")


class AllReplicasDegenerate(MiddevError, RuntimeError):
    """Every Monte Carlo replica hit a zero denominator."""
