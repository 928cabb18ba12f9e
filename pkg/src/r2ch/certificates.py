"""Closed-form constants and sufficient-condition certificates computed from
initial data, plus monitors comparing them against simulation output.

Certificates evaluate sufficient conditions; they do not prove blow-up
numerically.  Simulation corroborates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import RunRecord, energy_density_integral, refined_extremum
from .model import FieldState, Grid, PhysParams
from .characteristics import ExtremumTrack

# Grid sup norms are lower bounds on the true sup; where a sup norm enters the
# conservative side of a bound it is inflated by this relative margin.
SUP_NORM_INFLATION = 1e-6


def energy(state: FieldState, params: PhysParams, grid: Grid) -> float:
    """Conserved energy: integral of u^2 + u_x^2 + (1-2 Omega A)(rho-1)^2."""
    return energy_density_integral(state, params, grid)


def refined_sup_abs(field: np.ndarray, grid: Grid) -> float:
    """Sub-grid refined sup of |field| on the periodic grid."""
    _, hi = refined_extremum(field, grid.x, "max")
    _, lo = refined_extremum(field, grid.x, "min")
    return float(max(hi, -lo))


def constant_C(E0: float, rho0_sup: float, params: PhysParams) -> float:
    """The explicit forcing bound constant: C^2/2 dominates |f| uniformly."""
    if E0 < 0 or rho0_sup < 0:
        raise ValueError("E0 and rho0_sup must be nonnegative")
    A, sigma, mu, Om = params.A, params.sigma, params.mu, params.Omega
    c = params.coriolis_margin
    e0_coeff = (
        (A - mu) ** 2 / 4.0
        + abs(3.0 - sigma) / 2.0
        + 3.0 / 4.0
        + abs(sigma) / 4.0
        + Om / 2.0
        + 3.0 * Om / (4.0 * c)
        + Om**2 / 2.0
    )
    half_C2 = (
        1.5 * (1.0 - Om * A)
        + e0_coeff * E0
        + 0.5 * Om**2 * rho0_sup**4
        + (Om / (4.0 * c) + Om / 4.0) * rho0_sup * E0
        + math.sqrt(2.0) * Om / (4.0 * c) * E0**1.5
    )
    return math.sqrt(2.0 * half_C2)


def lemma31_ceiling(
    u0x_sup_norm: float, rho0_sup: float, C: float, params: PhysParams
) -> float:
    """Uniform upper bound on sup u_x for sigma > 0."""
    if params.sigma <= 0:
        raise ValueError("the gradient ceiling requires sigma > 0")
    c = params.coriolis_margin
    return u0x_sup_norm + math.sqrt((c * rho0_sup**2 + C**2) / params.sigma)


@dataclass(frozen=True)
class Thm41Certificate:
    threshold: float
    witness_x0: float
    u0x_at_witness: float
    T1_bound: float
    # lifespan from the same comparison argument with the Riccati coefficient
    # kept at -sigma/2 (1 - C^2/((-sigma) u0x^2)); see the decisions notes
    T1_bound_repaired: float


def thm41_certificate(
    u0: np.ndarray, grid: Grid, C: float, params: PhysParams
) -> Thm41Certificate | None:
    """Steep-positive-slope blow-up certificate for sigma < 0.

    Returns None when no grid point witnesses u0'(x0) > C/sqrt(-sigma).
    """
    if params.sigma >= 0:
        raise ValueError("this certificate requires sigma < 0")
    from .spectral import deriv

    sigma = params.sigma
    u0x = deriv(u0, grid)
    x0, slope = refined_extremum(u0x, grid.x, "max")
    threshold = C / math.sqrt(-sigma)
    if not slope > threshold:
        return None
    T1 = -2.0 / (sigma * slope - math.sqrt(C * (-sigma) ** 1.5 * slope))
    T1_rep = -2.0 / (sigma * slope + C**2 / slope)
    return Thm41Certificate(
        threshold=threshold,
        witness_x0=float(x0),
        u0x_at_witness=float(slope),
        T1_bound=float(T1),
        T1_bound_repaired=float(T1_rep),
    )


def thm42_constant_N(E0: float, M_assumed: float, params: PhysParams) -> float:
    """Riccati slack constant for the cubic-moment blow-up condition
    (sigma = 1, mu = 0, density assumed bounded by M_assumed)."""
    if params.sigma != 1.0 or params.mu != 0.0:
        raise ValueError("this constant is defined for sigma = 1, mu = 0")
    if M_assumed < 0 or E0 < 0:
        raise ValueError("M_assumed and E0 must be nonnegative")
    A, Om = params.A, params.Omega
    c = params.coriolis_margin
    M = M_assumed
    s2 = math.sqrt(2.0)
    return (
        (1.5 * M**2 * c + 2.25) * E0
        + 1.5 * s2 * Om * M**2 * E0**1.5
        + 0.75 * s2 * Om / c * E0**2.5
        + (
            (6.0 + 3.0 * A**2 + 6.0 * Om**2) / 4.0
            + 1.5 * s2 * Om / math.sqrt(c)
            + 1.5 * Om * (1.0 - Om * A) * (M + 1.0) / c
        )
        * E0**2
    )


@dataclass(frozen=True)
class Thm42Certificate:
    M_assumed: float
    N: float
    m0: float
    condition_met: bool
    T_bound: float | None


def thm42_certificate(
    u0: np.ndarray, grid: Grid, N: float, E0: float, M_assumed: float = math.nan
) -> Thm42Certificate:
    """Cubic-moment blow-up condition: m0 = integral of u0_x^3 must lie at or
    below -sqrt(2 E0 N); the lifespan bound needs strict inequality."""
    if not E0 > 0:
        raise ValueError("E0 must be positive")
    if N < 0:
        raise ValueError("N must be nonnegative")
    from .spectral import deriv

    u0x = deriv(u0, grid)
    m0 = float(grid.dx * np.sum(u0x**3))
    s = math.sqrt(2.0 * E0 * N)
    condition = m0 <= -s
    T_bound = None
    if condition and m0 < -s:
        T_bound = math.sqrt(E0 / (2.0 * N)) * math.log((m0 - s) / (m0 + s))
    return Thm42Certificate(
        M_assumed=M_assumed, N=N, m0=m0, condition_met=condition, T_bound=T_bound
    )


def k2_bound(C: float, rho0_sup: float, params: PhysParams) -> float:
    """Uniform bound on the non-Riccati terms of the extremum ODE."""
    if C < 0 or rho0_sup < 0:
        raise ValueError("inputs must be nonnegative")
    return 0.5 * params.coriolis_margin * rho0_sup**2 + 0.5 * C**2


@dataclass(frozen=True)
class Certificate:
    E0: float
    rho0_sup: float
    u0x_sup_norm: float
    C: float
    lemma31_ceiling: float | None
    thm41: Thm41Certificate | None
    thm42: Thm42Certificate | None
    K2: float
    rate_target: float | None


def build_certificate(
    state0: FieldState,
    params: PhysParams,
    grid: Grid,
    M_assumed: float | None = None,
) -> Certificate:
    """All closed-form constants and theorem applicability verdicts for one
    configuration, computed from the initial data."""
    E0 = energy(state0, params, grid)
    rho0_sup = refined_sup_abs(state0.rho, grid) * (1.0 + SUP_NORM_INFLATION)
    from .spectral import deriv

    u0x_sup = refined_sup_abs(deriv(state0.u, grid), grid) * (1.0 + SUP_NORM_INFLATION)
    C = constant_C(E0, rho0_sup, params)
    ceiling = (
        lemma31_ceiling(u0x_sup, rho0_sup, C, params) if params.sigma > 0 else None
    )
    thm41 = (
        thm41_certificate(state0.u, grid, C, params) if params.sigma < 0 else None
    )
    thm42 = None
    if params.sigma == 1.0 and params.mu == 0.0 and M_assumed is not None and E0 > 0:
        N = thm42_constant_N(E0, M_assumed, params)
        thm42 = thm42_certificate(state0.u, grid, N, E0, M_assumed)
    return Certificate(
        E0=E0,
        rho0_sup=rho0_sup,
        u0x_sup_norm=u0x_sup,
        C=C,
        lemma31_ceiling=ceiling,
        thm41=thm41,
        thm42=thm42,
        K2=k2_bound(C, rho0_sup, params),
        rate_target=(-2.0 / params.sigma) if params.sigma != 0 else None,
    )


@dataclass(frozen=True)
class Violation:
    check: str
    t: float
    value: float
    bound: float


def monitor_bounds(
    run: RunRecord,
    cert: Certificate,
    track: ExtremumTrack | None,
    params: PhysParams,
) -> list[Violation]:
    """Check every recorded sample against the applicable closed-form bounds.
    Violations are data, not errors."""
    out: list[Violation] = []
    half_C2 = 0.5 * cert.C**2
    tol_f = 1e-6 * max(1.0, half_C2)
    for row in run.rows:
        if params.sigma > 0 and cert.lemma31_ceiling is not None:
            tol = 1e-6 * max(1.0, abs(cert.lemma31_ceiling))
            if row.sup_ux > cert.lemma31_ceiling + tol:
                out.append(
                    Violation("lemma31_ceiling", row.t, row.sup_ux, cert.lemma31_ceiling)
                )
        if row.f_sup_abs > half_C2 + tol_f:
            out.append(Violation("forcing_bound", row.t, row.f_sup_abs, half_C2))
    if track is not None and track.branch == "sup":
        tol_g = 1e-6 * max(1.0, cert.rho0_sup)
        m_nonneg_so_far = True
        for i in range(track.t.size):
            m_nonneg_so_far = m_nonneg_so_far and track.M[i] >= -1e-9
            if m_nonneg_so_far and abs(track.gamma[i]) > cert.rho0_sup + tol_g:
                out.append(
                    Violation(
                        "density_bound", float(track.t[i]), float(abs(track.gamma[i])), cert.rho0_sup
                    )
                )
        if params.sigma < 0:
            thr = cert.C / math.sqrt(-params.sigma)
            crossed = False
            prev = None
            for i in range(track.t.size):
                M = float(track.M[i])
                if not crossed and M > thr:
                    crossed = True
                    prev = M
                elif crossed:
                    tol_m = 1e-6 * max(1.0, abs(prev))
                    if M < prev - tol_m:
                        out.append(
                            Violation("monotone_after_threshold", float(track.t[i]), M, prev)
                        )
                    prev = max(prev, M)
    return out


@dataclass(frozen=True)
class RateCheck:
    t: np.ndarray
    product: np.ndarray
    final_mean: float
    target: float
    rel_error: float
    validated: bool


def rate_check(
    track: ExtremumTrack,
    T_est: float,
    params: PhysParams,
    window: tuple[float, float] = (20.0, 200.0),
    final_frac: float = 0.25,
    allow_unvalidated: bool = False,
) -> RateCheck:
    """The product (T_est - t) * M(t) against its limit -2/sigma.

    Proven only for sigma < 0 on the sup branch; for sigma >= 0 the analogous
    product is exploratory and must be requested explicitly, and comes back
    flagged as unvalidated.
    """
    validated = params.sigma < 0 and track.branch == "sup"
    if not validated and not allow_unvalidated:
        raise ValueError(
            "the blow-up rate is proven only for sigma < 0 on the sup branch; "
            "pass allow_unvalidated=True for exploratory output"
        )
    if not T_est > track.t[-1]:
        raise ValueError("T_est must exceed the last sample time")
    product = (T_est - track.t) * track.M
    lo, hi = window
    mask = (np.abs(track.M) >= lo) & (np.abs(track.M) <= hi)
    if not np.any(mask):
        raise ValueError("no samples inside the rate window")
    tw = track.t[mask]
    t_cut = tw[-1] - final_frac * (tw[-1] - tw[0])
    final = mask & (track.t >= t_cut)
    final_mean = float(np.mean(product[final]))
    target = -2.0 / params.sigma
    return RateCheck(
        t=track.t,
        product=product,
        final_mean=final_mean,
        target=target,
        rel_error=abs(final_mean - target) / abs(target),
        validated=validated,
    )
