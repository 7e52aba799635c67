"""Auxiliary sums, martingales and remainders for one trajectory, and the
exact decomposition identities and deterministic inequalities they satisfy.

Notation follows the usual two-stage least-squares analysis: for ``1 <= l <= n``::

    M_l = sum_{k<=l} X_{k-1} V_k      N_l = sum_{2<=k<=l} X_{k-2} V_k
    U_l = sum_{k<=l} eps_{k-1} V_k
    P_l = sum X_k X_{k-1}   Q_l = sum X_k eps_k   S_l = sum X_k^2
    T_l = sum eps_k^2       W_n = sum_{k>=2} X_k X_{k-2}
    I_l = sum e_k e_{k-1}   J_l = sum e_k^2       (e = first-stage residuals)

and un-subscripted symbols denote ``l = n``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DivergentIdentity, InequalityViolated, ZeroDenominator
from .estimate import EstimateSet
from .noise import NoiseSpec, make_noise, truncated_moments
from .params import Case, ScheduleSample
from .simulate import Trajectory

__all__ = [
    "StatLedger",
    "IdentityRecord",
    "IdentityReport",
    "InequalityRecord",
    "InequalityReport",
    "TruncationDiagnostics",
    "build_ledger",
    "ledger_from_sums",
    "accumulate",
    "check_identities",
    "check_inequalities",
    "bercu_touati",
    "bercu_touati_grid",
    "truncation_diagnostics",
    "IDENTITY_NAMES",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9
IDENTITY_NAMES = (
    "ID-THETA", "ID-P", "ID-S", "ID-Q", "ID-W",
    "ID-J", "ID-RHO", "ID-H", "ID-XI", "ID-D",
)


@dataclass(frozen=True)
class StatLedger:
    theta: float
    rho: float
    theta_star: float
    rho_star: float
    d_star: float
    sigma: float
    theta_hat: float
    rho_hat: float
    d_hat: float
    # (1 + theta rho) P - (theta + rho) S_{n-1} = (1 + theta rho)(theta_hat - theta*) S_{n-1},
    # formed without rounding theta_hat or theta*
    theta_dev_scaled: float
    # martingales
    M: float
    N: float
    U: float
    # path sums
    S: float
    S_prev: float
    S_prev2: float
    P: float
    P_prev: float
    Q: float
    Q_prev: float
    T: float
    T_prev: float
    W: float
    L: float
    Lambda: float
    bracket_M: float
    # residual sums
    I_sum: float
    J_sum: float
    J_prev: float
    # end-point terms
    X_n: float
    X_nm1: float
    eps_n: float
    eps_hat_n: float
    xi_P: float
    xi_Q: float
    xi_I: float
    xi_J: float
    F: float
    G: float
    H: float
    R_n1: float
    R_n3: float
    R_n3_as_printed: float
    R_n4: float
    Delta_1: float
    Delta_2: float
    f_n: float
    R_d: float
    maxX2: float
    maxEps2: float
    maxV2: float
    # predictable (co)variations at l = n
    qv_M: float
    qv_N: float
    qv_U: float
    cv_MN: float
    cv_MU: float

    def to_dict(self) -> dict:
        return asdict(self)


def _derive(base: dict, sch: ScheduleSample, sigma: float) -> StatLedger:
    th, rh = sch.theta_n, sch.rho_n
    ts, rs = sch.theta_star, sch.rho_star
    tr, sm = th * rh, th + rh
    th_hat = base["theta_hat"]
    Xn, Xm = base["X_n"], base["X_nm1"]
    S, P, W = base["S"], base["P"], base["W"]
    M, N = base["M"], base["N"]

    xi_P = tr * Xn * Xm - sm * Xn**2
    xi_Q = ts * xi_P - sm * Xn * Xm + tr * (Xn**2 + Xm**2)
    xi_I = th_hat * Xn**2 - th_hat**2 * Xn * Xm + (1 + ts**2) / (1 + tr) * xi_P - ts * xi_Q
    xi_J = -(Xn**2) + 2 * th_hat * Xn * Xm - th_hat**2 * (Xn**2 + Xm**2) - 2 * ts / (1 + tr) * xi_P
    F = S + W - (th_hat + ts) * P
    G = 2 * P - (th_hat + ts) * S
    H = F - rs * G

    R_n1 = (
        (2 * tr * sm * ts - sm**2 - tr**2) * Xn**2
        + (2 * sm - 2 * tr * ts) * M
        - 2 * tr * N
        + (2 * tr * sm - 2 * tr**2 * ts) * Xn * Xm
        - tr**2 * Xm**2
    )
    R_n3 = N + sm / (1 + tr) * M - sm / (1 + tr) * Xn * Xm + tr * (Xn**2 + Xm**2) - sm * ts * Xn**2
    R_n3_as_printed = (
        N + sm / (1 + tr) * M - sm * (1 - tr) / (1 + tr) * Xn * Xm + tr * (Xn + Xm) - sm * ts * Xn**2
    )
    R_n4 = R_n3 - 2 * (ts + rs) * (M / (1 + tr) + tr / (1 + tr) * Xn * Xm - ts * Xn**2)

    Delta_1 = tr * (1 - th**2) * (1 - rh**2) / (1 + tr) ** 3 * Xn * Xm + rs * (ts + 1) * (ts - 1) * Xm**2
    dsq = th_hat**2 - ts**2
    Delta_2 = (
        (-dsq + 2 * rs * (ts - th_hat)) * Xn * Xm
        + (rs * dsq + (th_hat - ts)) * Xn**2
        + rs * dsq * Xm**2
    )
    J = base["J_sum"]
    f_n = base["eps_hat_n"] ** 2 / J if J != 0.0 else math.nan
    rho_hat = base["rho_hat"]
    R_d = 2 * (rho_hat - rs) * f_n + (2 * rs - 1) * f_n

    s2 = sigma * sigma
    return StatLedger(
        theta=th, rho=rh, theta_star=ts, rho_star=rs, d_star=sch.d_star, sigma=sigma,
        theta_hat=th_hat, rho_hat=rho_hat, d_hat=base["d_hat"], theta_dev_scaled=base["theta_dev_scaled"],
        M=M, N=N, U=base["U"],
        S=S, S_prev=base["S_prev"], S_prev2=base["S_prev2"],
        P=P, P_prev=base["P_prev"], Q=base["Q"], Q_prev=base["Q_prev"],
        T=base["T"], T_prev=base["T_prev"], W=W,
        L=base["L"], Lambda=base["Lambda"], bracket_M=base["bracket_M"],
        I_sum=base["I_sum"], J_sum=J, J_prev=base["J_prev"],
        X_n=Xn, X_nm1=Xm, eps_n=base["eps_n"], eps_hat_n=base["eps_hat_n"],
        xi_P=xi_P, xi_Q=xi_Q, xi_I=xi_I, xi_J=xi_J, F=F, G=G, H=H,
        R_n1=R_n1, R_n3=R_n3, R_n3_as_printed=R_n3_as_printed, R_n4=R_n4,
        Delta_1=Delta_1, Delta_2=Delta_2, f_n=f_n, R_d=R_d,
        maxX2=base["maxX2"], maxEps2=base["maxEps2"], maxV2=base["maxV2"],
        qv_M=s2 * base["S_prev"], qv_N=s2 * base["S_prev2"], qv_U=s2 * base["T_prev"],
        cv_MN=s2 * base["P_prev"], cv_MU=s2 * base["Q_prev"],
    )


def build_ledger(traj: Trajectory, est: EstimateSet) -> StatLedger:
    """Every ledger quantity by direct compensated summation over the stored path."""
    X, eps, V = traj.X, traj.eps, traj.V
    res = est.residuals
    dot = _kernels.cdot
    n = traj.n
    V2 = V * V
    base = {
        "theta_hat": est.theta_hat,
        "rho_hat": est.rho_hat,
        "d_hat": est.d_hat,
        "theta_dev_scaled": _kernels.lag_deviation(X, traj.schedule.theta_n, traj.schedule.rho_n),
        "M": dot(X[:-1], V),
        "N": dot(X[:-2], V[1:]) if n >= 2 else 0.0,
        "U": dot(eps[:-1], V),
        "S": dot(X[1:], X[1:]),
        "S_prev": dot(X[1:-1], X[1:-1]),
        "S_prev2": dot(X[1:-2], X[1:-2]) if n >= 3 else 0.0,
        "P": dot(X[1:], X[:-1]),
        "P_prev": dot(X[1:-1], X[:-2]),
        "Q": dot(X[1:], eps[1:]),
        "Q_prev": dot(X[1:-1], eps[1:-1]),
        "T": dot(eps[1:], eps[1:]),
        "T_prev": dot(eps[1:-1], eps[1:-1]),
        "W": dot(X[2:], X[:-2]),
        "L": _kernels.csum(V2),
        "Lambda": dot(V2, V2),
        "bracket_M": _kernels.cdot3(X[:-1], X[:-1], V2),
        "I_sum": dot(res[1:], res[:-1]),
        "J_sum": dot(res[1:], res[1:]),
        "J_prev": dot(res[1:-1], res[1:-1]),
        "X_n": float(X[n]),
        "X_nm1": float(X[n - 1]),
        "eps_n": float(eps[n]),
        "eps_hat_n": float(res[n]),
        "maxX2": float(np.max(X[1:] ** 2)),
        "maxEps2": float(np.max(eps[1:] ** 2)),
        "maxV2": float(np.max(V2)),
    }
    return _derive(base, traj.schedule, traj.sigma)


def accumulate(V: np.ndarray, sch: ScheduleSample) -> np.ndarray:
    """Terminal sums for noise ``V`` in one pass (see ``_kernels.ACC_FIELDS``)."""
    return _kernels.accumulate(np.ascontiguousarray(V, dtype=np.float64), sch.theta_n, sch.rho_n)


def ledger_from_sums(acc: np.ndarray, sch: ScheduleSample, sigma: float) -> StatLedger:
    """Ledger from single-pass sums.

    Residual sums are expanded in path sums, e.g.
    ``J_n = S - 2 theta_hat P + theta_hat^2 S_{n-1}`` and
    ``I_n = P - theta_hat (W + S_{n-1}) + theta_hat^2 P_{n-1}``.

    Raises ZeroDenominator (with the failing stage) like ``full_estimate``.
    """
    g = dict(zip(_kernels.ACC_FIELDS, (float(v) for v in acc)))
    Xn, Xm, en = g["X_n"], g["X_nm1"], g["eps_n"]
    S_prev = g["S"] - Xn * Xn
    P_prev = g["P"] - Xn * Xm
    if S_prev == 0.0:
        raise ZeroDenominator("theta")
    th_hat = g["P"] / S_prev
    J = g["S"] - 2.0 * th_hat * g["P"] + th_hat * th_hat * S_prev
    eh_n = Xn - th_hat * Xm
    J_prev = J - eh_n * eh_n
    I = g["P"] - th_hat * (g["W"] + S_prev) + th_hat * th_hat * P_prev
    if J_prev <= 0.0:
        raise ZeroDenominator("rho")
    if J <= 0.0:
        raise ZeroDenominator("d")
    base = {
        **g,
        "theta_hat": th_hat,
        "theta_dev_scaled": (1.0 + sch.theta_n * sch.rho_n) * g["P"] - (sch.theta_n + sch.rho_n) * S_prev,
        "rho_hat": I / J_prev,
        "d_hat": (J + J_prev - 2.0 * I) / J,
        "S_prev": S_prev,
        "S_prev2": math.nan,
        "P_prev": P_prev,
        "Q_prev": g["Q"] - Xn * en,
        "T_prev": g["T"] - en * en,
        "I_sum": I,
        "J_sum": J,
        "J_prev": J_prev,
        "eps_hat_n": eh_n,
    }
    return _derive(base, sch, sigma)


# --- identities --------------------------------------------------------------


@dataclass(frozen=True)
class IdentityRecord:
    name: str
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    passed: bool


@dataclass
class IdentityReport:
    records: list[IdentityRecord]
    tol: float = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def max_rel_residual(self) -> float:
        return max(r.rel_residual for r in self.records)

    def __getitem__(self, name: str) -> IdentityRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_csv(self, dest: "str | Path | io.TextIOBase | None" = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["identity", "lhs", "rhs", "abs_residual", "rel_residual", "pass"])
        for r in self.records:
            w.writerow([r.name, repr(r.lhs), repr(r.rhs), repr(r.abs_residual), repr(r.rel_residual), r.passed])
        text = buf.getvalue()
        if isinstance(dest, (str, Path)):
            Path(dest).write_text(text)
        elif dest is not None:
            dest.write(text)
        return text


def _pairs(lg: StatLedger) -> list[tuple[str, float, float]]:
    th, rh, ts, rs = lg.theta, lg.rho, lg.theta_star, lg.rho_star
    tr, sm = th * rh, th + rh
    Xn, Xm = lg.X_n, lg.X_nm1
    dth = lg.theta_hat - ts
    gap = (1 - tr) * (1 - th**2) * (1 - rh**2) / (1 + tr)
    h_coef = (1 - tr) * (1 - th) * (1 - rh) * (1 + ts) / (1 + tr)
    return [
        ("ID-THETA", lg.theta_dev_scaled, lg.M + tr * Xn * Xm),
        ("ID-P", lg.P, ts * lg.S_prev + lg.M / (1 + tr) + tr * Xn * Xm / (1 + tr)),
        ("ID-S", lg.S * gap, lg.L + lg.R_n1),
        ("ID-Q", lg.Q, ((1 - th**2) * lg.S + th**2 * Xn**2 + lg.T) / 2),
        ("ID-W", lg.W, (sm * ts - tr) * lg.S + lg.R_n3),
        ("ID-J", lg.J_prev, (1 + ts) * (1 - ts) * lg.S - 2 * ts / (1 + tr) * lg.M - dth * lg.G + lg.xi_J),
        (
            "ID-RHO",
            lg.J_prev * (lg.rho_hat - rs),
            ((1 + ts * rs) / (1 + tr) - ts / th) * lg.M
            + ts / th * lg.U
            - dth * lg.H
            + lg.xi_I
            - rs * lg.xi_J,
        ),
        ("ID-H", lg.H, h_coef * lg.S + dth * (rs * lg.S - lg.P) + lg.R_n4),
        ("ID-XI", lg.xi_I - rs * lg.xi_J, lg.Delta_1 + lg.Delta_2),
        ("ID-D", lg.d_hat - lg.d_star, -2 * (lg.rho_hat - rs) + lg.R_d),
    ]


def check_identities(
    traj: Trajectory | None,
    est: EstimateSet | None,
    lg: StatLedger,
    tol: float = DEFAULT_TOL,
    strict: bool = True,
) -> IdentityReport:
    """Evaluate the ten exact identities on one realisation.

    ``rel_residual = |lhs - rhs| / max(1, |lhs|, |rhs|)``. With ``strict`` the
    first identity beyond ``tol`` raises DivergentIdentity.
    """
    if est is not None and lg.theta_hat != est.theta_hat:
        raise ValueError("ledger and estimates come from different fits")
    records = []
    for name, lhs, rhs in _pairs(lg):
        a = abs(lhs - rhs)
        rel = a / max(1.0, abs(lhs), abs(rhs))
        ok = bool(rel <= tol)
        records.append(IdentityRecord(name, float(lhs), float(rhs), float(a), float(rel), ok))
    report = IdentityReport(records, tol)
    if strict:
        for r in records:
            if not r.passed:
                raise DivergentIdentity(r.name, r.rel_residual, tol)
    return report


# --- inequalities ------------------------------------------------------------


@dataclass(frozen=True)
class InequalityRecord:
    name: str
    lhs: float
    rhs: float
    margin: float  # rhs - lhs, non-negative when the inequality holds
    holds: bool


@dataclass
class InequalityReport:
    records: list[InequalityRecord]

    @property
    def passed(self) -> bool:
        return all(r.holds for r in self.records)


def check_inequalities(traj: Trajectory, strict: bool = True, rtol: float = 1e-12) -> InequalityReport:
    """Power-sum and running-maximum bounds, pointwise on one path.

    ``sum |X_k|^a <= (1-|theta|)^-a (1-|rho|)^-a sum |V_k|^a`` for a = 1, 2, 4,
    and ``max X^2 <= (1-|theta|)^-2 max eps^2``, ``max eps^2 <= (1-|rho|)^-2 max V^2``.
    The contraction factors are taken from the floating-point ``theta_n, rho_n``
    actually used in the recursion, so the bounds are rigorous for the path.
    """
    sch = traj.schedule
    gt = 1.0 - abs(sch.theta_n)
    gr = 1.0 - abs(sch.rho_n)
    absX, absV = np.abs(traj.X[1:]), np.abs(traj.V)
    records = []
    for a in (1, 2, 4):
        lhs = _kernels.csum(absX**a)
        rhs = (gt * gr) ** (-a) * _kernels.csum(absV**a)
        records.append(InequalityRecord(f"Sn-Vn(a={a})", lhs, rhs, rhs - lhs, lhs <= rhs * (1 + rtol)))
    mx = float(np.max(traj.X[1:] ** 2))
    me = float(np.max(traj.eps[1:] ** 2))
    mv = float(np.max(traj.V**2))
    for name, lhs, rhs in (
        ("max-X", mx, me / gt**2),
        ("max-eps", me, mv / gr**2),
    ):
        records.append(InequalityRecord(name, lhs, rhs, rhs - lhs, lhs <= rhs * (1 + rtol)))
    if strict:
        for r in records:
            if not r.holds:
                raise InequalityViolated(r.name, r.margin)
    return InequalityReport(records)


def bercu_touati_grid(sch: ScheduleSample, sigma: float, bounds=(0.5, 0.1, 0.01), y_mult=(0.5, 1.0, 2.0)):
    """Default 3x3 ``(x, y)`` grid around the typical size of ``<M>_n + [M]_n``.

    ``y`` is a multiple of ``2 sigma^4 n / ((1-theta^2)(1-rho^2)) * (1+theta rho)/(1-theta rho)``
    and ``x`` is chosen so that ``2 exp(-x^2 / 2y)`` equals each target bound.
    """
    th, rh = sch.theta_n, sch.rho_n
    tr = th * rh
    stationary_S = sigma**2 * (1 + tr) / ((1 - tr) * (1 - th * th) * (1 - rh * rh))
    y0 = 2.0 * sigma**2 * stationary_S * (sch.n - 1)
    grid = []
    for m in y_mult:
        y = m * y0
        for b in bounds:
            grid.append((math.sqrt(2.0 * y * math.log(2.0 / b)), y))
    return grid


def bercu_touati(M, qv, bracket, grid, n_sigma: float = 3.0) -> list[dict]:
    """Empirical frequency of ``{|M_n| > x, <M>_n + [M]_n <= y}`` against ``2 exp(-x^2/2y)``.

    ``M``, ``qv`` and ``bracket`` are per-replica arrays in replica order. A
    cell fails only when the frequency exceeds the bound by more than
    ``n_sigma`` binomial standard errors of the bound.
    """
    M = np.asarray(M, dtype=np.float64)
    total = np.asarray(qv, dtype=np.float64) + np.asarray(bracket, dtype=np.float64)
    R = M.shape[0]
    out = []
    for x, y in grid:
        count = int(np.count_nonzero((np.abs(M) > x) & (total <= y)))
        bound = 2.0 * math.exp(-x * x / (2.0 * y))
        p = min(bound, 1.0)
        se = math.sqrt(p * (1.0 - p) / R)
        freq = count / R
        out.append(
            {"x": x, "y": y, "count": count, "replicas": R, "frequency": freq,
             "bound": bound, "binomial_se": se, "passed": freq <= bound + n_sigma * se}
        )
    return out


# --- truncation --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TruncationDiagnostics:
    """Truncated martingales and their distance from the originals.

    Case I uses ``Z = (M/kappa, U)``; Case II uses ``(M, U)``.
    """

    r: float
    case: Case
    v_level: float
    x_level: float
    e_level: float
    sigma_n2: float
    V_trunc: np.ndarray
    X_trunc: np.ndarray
    eps_trunc: np.ndarray
    M: float
    U: float
    M_r: float
    U_r: float
    Z: np.ndarray
    Z_r: np.ndarray
    gap: float
    cov_Z: np.ndarray
    cov_Z_trunc: np.ndarray
    counts: dict = field(default_factory=dict)
    puhalskii: dict = field(default_factory=dict)


def truncation_diagnostics(
    traj: Trajectory, r: float, schedule: ScheduleSample | None = None,
    noise: NoiseSpec | None = None, lindeberg_a: float = 1.0, puhalskii: bool = True,
) -> TruncationDiagnostics:
    """Truncate the noise at ``sqrt(kappa)`` and the regressors at
    ``r sqrt(n kappa^2)/a_n`` (X) and ``r sqrt(n)/a_n`` (eps), rebuild the
    martingales, and report the normalised gap and predictable covariances.

    ``noise`` defaults to Gaussian with the trajectory's sigma; it fixes the
    centring ``E V 1{|V| <= sqrt(kappa)}`` (zero for every shipped law) and
    ``sigma_n^2``. ``puhalskii=False`` skips the per-step tail integrals
    behind the Lindeberg-type diagnostic.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    sch = schedule or traj.schedule
    spec = noise or make_noise("Gaussian", traj.sigma)
    n, kappa, a_n = traj.n, sch.kappa, sch.a_n
    sigma2 = traj.sigma**2
    v_level = math.sqrt(kappa)
    centre, sigma_n2 = truncated_moments(spec, v_level)
    x_level = r * math.sqrt(n * kappa**2) / a_n
    e_level = r * math.sqrt(n) / a_n

    V, X, eps = traj.V, traj.X, traj.eps
    Vt = np.where(np.abs(V) <= v_level, V, 0.0) - centre
    Xt = np.where(np.abs(X) <= x_level, X, 0.0)
    et = np.where(np.abs(eps) <= e_level, eps, 0.0)
    dot = _kernels.cdot
    M, U = dot(X[:-1], V), dot(eps[:-1], V)
    Mr, Ur = dot(Xt[:-1], Vt), dot(et[:-1], Vt)

    case = sch.case
    zs = 1.0 / kappa if case is Case.I else 1.0
    Z = np.array([M * zs, U])
    Zr = np.array([Mr * zs, Ur])
    norm = a_n * math.sqrt(n * kappa)
    gap = float(np.hypot(*(Z - Zr)) / norm)

    def cov(x, e, s2):
        sxx = dot(x[1:-1], x[1:-1])
        sxe = dot(x[1:-1], e[1:-1])
        see = dot(e[1:-1], e[1:-1])
        c = s2 * np.array([[sxx * zs * zs, sxe * zs], [sxe * zs, see]])
        return c / (n * kappa)

    cov_Z = cov(X, eps, sigma2)
    cov_Zt = cov(Xt, et, sigma_n2)

    # Puhalskii-type hypotheses for m_k = (zs Xt_{k-1}, et_{k-1}) Vt_k
    ck = (zs * Xt[:-1]) ** 2 + et[:-1] ** 2
    bound_scale = math.sqrt(n * kappa) / a_n
    vmax = v_level + abs(centre)
    diag = {"P2_constant": float(math.sqrt(np.max(ck)) * vmax / bound_scale)}
    if puhalskii:
        with np.errstate(divide="ignore"):
            cut = np.where(ck > 0, lindeberg_a * bound_scale / np.sqrt(ck), np.inf)
        diag["P3_lindeberg"] = float(dot(ck, _tail_vec(spec, cut, v_level)) / (n * kappa))
    counts = {
        "V": int(np.count_nonzero(np.abs(V) > v_level)),
        "X": int(np.count_nonzero(np.abs(X[1:]) > x_level)),
        "eps": int(np.count_nonzero(np.abs(eps[1:]) > e_level)),
    }
    for arr in (Vt, Xt, et):
        arr.setflags(write=False)
    return TruncationDiagnostics(
        r=r, case=case, v_level=v_level, x_level=x_level, e_level=e_level, sigma_n2=sigma_n2,
        V_trunc=Vt, X_trunc=Xt, eps_trunc=et, M=M, U=U, M_r=Mr, U_r=Ur, Z=Z, Z_r=Zr, gap=gap,
        cov_Z=cov_Z, cov_Z_trunc=cov_Zt, counts=counts,
        puhalskii=diag,
    )


def _tail_vec(spec: NoiseSpec, cut: np.ndarray, level: float) -> np.ndarray:
    out = np.zeros_like(cut)
    active = cut < level
    if np.any(active):
        top = truncated_moments(spec, level)[1]
        out[active] = [top - truncated_moments(spec, max(c, 0.0))[1] for c in cut[active]]
    return out
