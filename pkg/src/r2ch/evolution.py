"""Time evolution of the nonlocal system: right-hand side, adaptive embedded
Runge-Kutta stepping, diagnostics recording and breaking-time extrapolation.

The propagated solution is the 4th-order member of the Cash-Karp 5(4) pair;
the difference to the 5th-order member gives the per-step error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as sfft

from .model import FieldState, Grid, PhysParams, RegimeFlags, boundary_leak
from .spectral import deriv, eval_f

# Cash-Karp embedded pair: 6 stages, 5th and 4th order weights.
_CK_C = np.array([0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8])
_CK_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [3 / 10, -9 / 10, 6 / 5],
    [-11 / 54, 5 / 2, -70 / 27, 35 / 27],
    [1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096],
]
_CK_B5 = np.array([37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771])
_CK_B4 = np.array(
    [2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4]
)

ERR_ABS_FLOOR = 1e-10


@dataclass(frozen=True)
class Tendency:
    du_dt: np.ndarray
    deta_dt: np.ndarray


class NonFiniteState(RuntimeError):
    """A non-finite value appeared inside the integrator."""


def _rhs_arrays(u: np.ndarray, eta: np.ndarray, params: PhysParams, grid: Grid):
    """RHS on raw arrays; spectral assembly kept to a minimum of transforms.

    du/dt = -(sigma u - mu) u_x
            - dx p * [ (mu-A) u + (3-sigma)/2 u^2 + sigma/2 u_x^2
                       + (1-2 Omega A)(eta + eta^2/2) - Omega rho^2 u ]
            + Omega p * (rho^2 u_x)
    deta/dt = -(u eta)_x - u_x

    The constant (1-2 Omega A)/2 inside the bracket is dropped: its image
    under dx p * is exactly zero.  All products pass the two-thirds mask.
    """
    A, sigma, mu, Om = params.A, params.sigma, params.mu, params.Omega
    c = params.coriolis_margin
    n, k, mask = grid.n, grid.k, grid.dealias_mask
    ik = 1j * k
    ik[-1] = 0.0

    uh = sfft.rfft(u)
    etah = sfft.rfft(eta)
    ux = sfft.irfft(uh * ik, n=n)
    rho2 = (1.0 + eta) ** 2

    u2h = sfft.rfft(u * u)
    ux2h = sfft.rfft(ux * ux)
    eta2h = sfft.rfft(eta * eta)
    r2uh = sfft.rfft(rho2 * u)
    r2uxh = sfft.rfft(rho2 * ux)
    uetah = sfft.rfft(u * eta)
    for h in (u2h, ux2h, eta2h, r2uh, r2uxh, uetah):
        h[~mask] = 0.0

    bracket_h = (
        (mu - A) * uh
        + 0.5 * (3.0 - sigma) * u2h
        + 0.5 * sigma * ux2h
        + c * (etah + 0.5 * eta2h)
        - Om * r2uh
    )
    helm = 1.0 + k**2
    # sigma*u*u_x written as sigma/2 * d/dx(u^2) reuses the dealiased square
    duh = mu * ik * uh - 0.5 * sigma * ik * u2h - (ik / helm) * bracket_h + (
        Om / helm
    ) * r2uxh
    detah = -ik * uetah - ik * uh

    du = sfft.irfft(duh, n=n)
    deta = sfft.irfft(detah, n=n)
    if not (np.all(np.isfinite(du)) and np.all(np.isfinite(deta))):
        raise NonFiniteState("non-finite tendency")
    return du, deta, ux


def rhs(state: FieldState, params: PhysParams, grid: Grid) -> Tendency:
    du, deta, _ = _rhs_arrays(state.u, state.eta, params, grid)
    return Tendency(du_dt=du, deta_dt=deta)


def step(
    state: FieldState, dt: float, params: PhysParams, grid: Grid
) -> tuple[FieldState, float]:
    """One Cash-Karp step.  Returns the advanced (4th order) state and the
    error estimate: the 5th/4th order difference in a max norm weighted by
    the joint (u, eta) magnitude with absolute floor 1e-10."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    u, eta = state.u, state.eta
    ku, keta = [], []
    for i in range(6):
        ui, ei = u.copy(), eta.copy()
        for j, a in enumerate(_CK_A[i]):
            ui += dt * a * ku[j]
            ei += dt * a * keta[j]
        du, deta, _ = _rhs_arrays(ui, ei, params, grid)
        ku.append(du)
        keta.append(deta)
    u5 = u + dt * sum(b * kj for b, kj in zip(_CK_B5, ku))
    e5 = eta + dt * sum(b * kj for b, kj in zip(_CK_B5, keta))
    u4 = u + dt * sum(b * kj for b, kj in zip(_CK_B4, ku))
    e4 = eta + dt * sum(b * kj for b, kj in zip(_CK_B4, keta))
    diff = max(np.max(np.abs(u5 - u4)), np.max(np.abs(e5 - e4)))
    scale = ERR_ABS_FLOOR + max(np.max(np.abs(u4)), np.max(np.abs(e4)))
    new = FieldState(t=state.t + dt, u=u4, eta=e4)
    return new, float(diff / scale)


@dataclass(frozen=True)
class RunSettings:
    t_end: float
    tol: float = 1e-8
    blowup_threshold: float = 1e3
    dt_floor: float = 1e-12
    dt_max: float = 0.05
    dt_init: float = 1e-3
    snapshot_cadence: int = 1
    diag_stride: int = 10
    dense_diag_above: float = 20.0
    adaptive: bool = True

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.blowup_threshold > 0:
            raise ValueError("blowup threshold must be positive")


@dataclass(frozen=True)
class DiagnosticRow:
    t: float
    dt: float
    E: float
    sup_ux: float
    inf_ux: float
    x_at_sup_ux: float
    x_at_inf_ux: float
    sup_abs_eta: float
    min_rho: float
    m3: float
    f_sup_abs: float
    lemma31_ceiling: float  # NaN unless sigma > 0 and a certificate was supplied
    boundary_leak: float
    # extremum-track extras (not part of the CSV schema)
    max_rho: float = math.nan
    gamma_sup: float = math.nan
    gamma_inf: float = math.nan
    f_at_sup: float = math.nan
    f_at_inf: float = math.nan


@dataclass(frozen=True)
class Termination:
    event: str  # reached_t_end | blowup_detected | invariant_violation | step_floor
    t: float
    detail: str = ""


@dataclass
class RunRecord:
    params: PhysParams
    grid: Grid
    settings: RunSettings
    rows: list[DiagnosticRow] = field(default_factory=list)
    snapshots: list[FieldState] = field(default_factory=list)
    termination: Termination | None = None
    final_state: FieldState | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])


def _refine_parabolic(xm, x0, xp, ym, y0, yp):
    """Vertex of the parabola through three points (uniform or not)."""
    denom = (xm - x0) * (xm - xp) * (x0 - xp)
    if denom == 0:
        return x0, y0
    a = (xp * (y0 - ym) + x0 * (ym - yp) + xm * (yp - y0)) / denom
    b = (xp**2 * (ym - y0) + x0**2 * (yp - ym) + xm**2 * (y0 - yp)) / denom
    if a == 0:
        return x0, y0
    xv = -b / (2 * a)
    if not min(xm, xp) <= xv <= max(xm, xp):
        return x0, y0
    c = y0 - a * x0**2 - b * x0
    return xv, a * xv**2 + b * xv + c


def refined_extremum(y: np.ndarray, x: np.ndarray, mode: str):
    """Grid arg-extremum with quadratic sub-grid refinement; ties break at the
    smallest x.  Returns (location, value)."""
    i = int(np.argmax(y)) if mode == "max" else int(np.argmin(y))
    n = y.size
    im, ip = (i - 1) % n, (i + 1) % n
    dx = x[1] - x[0]
    return _refine_parabolic(
        x[i] - dx, x[i], x[i] + dx, y[im], y[i], y[ip]
    )


def _interp_at(y: np.ndarray, x: np.ndarray, xq: float) -> float:
    """Quadratic interpolation of grid samples at one query point."""
    dx = x[1] - x[0]
    n = y.size
    i = int(round((xq - x[0]) / dx)) % n
    im, ip = (i - 1) % n, (i + 1) % n
    x0 = x[0] + i * dx
    s = (xq - x0) / dx
    return float(y[i] + 0.5 * s * (y[ip] - y[im]) + 0.5 * s * s * (y[ip] - 2 * y[i] + y[im]))


def energy_density_integral(state: FieldState, params: PhysParams, grid: Grid) -> float:
    ux = deriv(state.u, grid)
    return float(
        grid.dx
        * np.sum(state.u**2 + ux**2 + params.coriolis_margin * state.eta**2)
    )


def make_diagnostic_row(
    state: FieldState,
    dt: float,
    params: PhysParams,
    grid: Grid,
    lemma31_ceiling: float = math.nan,
) -> DiagnosticRow:
    ux = deriv(state.u, grid)
    x_sup, sup_ux = refined_extremum(ux, grid.x, "max")
    x_inf, inf_ux = refined_extremum(ux, grid.x, "min")
    fvals = eval_f(state, params, grid)
    rho = state.rho
    return DiagnosticRow(
        t=state.t,
        dt=dt,
        E=energy_density_integral(state, params, grid),
        sup_ux=float(sup_ux),
        inf_ux=float(inf_ux),
        x_at_sup_ux=float(x_sup),
        x_at_inf_ux=float(x_inf),
        sup_abs_eta=float(np.max(np.abs(state.eta))),
        min_rho=float(np.min(rho)),
        m3=float(grid.dx * np.sum(ux**3)),
        f_sup_abs=float(np.max(np.abs(fvals))),
        lemma31_ceiling=lemma31_ceiling,
        boundary_leak=boundary_leak(state, grid),
        max_rho=float(np.max(rho)),
        gamma_sup=_interp_at(rho, grid.x, x_sup),
        gamma_inf=_interp_at(rho, grid.x, x_inf),
        f_at_sup=_interp_at(fvals, grid.x, x_sup),
        f_at_inf=_interp_at(fvals, grid.x, x_inf),
    )


def run(
    initial: FieldState,
    params: PhysParams,
    grid: Grid,
    settings: RunSettings,
    lemma31_ceiling: float = math.nan,
) -> RunRecord:
    """Integrate until t_end, blow-up detection (max |u_x| >= threshold),
    the dt floor, or an invariant violation.  Every termination is an event.
    """
    rec = RunRecord(params=params, grid=grid, settings=settings)
    state = initial
    dt = min(settings.dt_init, settings.dt_max, settings.t_end)
    accepted = 0

    def record(st: FieldState, used_dt: float):
        rec.rows.append(
            make_diagnostic_row(st, used_dt, params, grid, lemma31_ceiling)
        )

    def snapshot(st: FieldState):
        if settings.snapshot_cadence > 0 and accepted % settings.snapshot_cadence == 0:
            rec.snapshots.append(st)

    record(state, dt)
    snapshot(state)
    max_abs_ux = max(abs(rec.rows[0].sup_ux), abs(rec.rows[0].inf_ux))
    if max_abs_ux >= settings.blowup_threshold:
        rec.termination = Termination("blowup_detected", state.t)
        rec.final_state = state
        return rec

    while state.t < settings.t_end:
        dt = min(dt, settings.t_end - state.t)
        try:
            new_state, err = step(state, dt, params, grid)
        except NonFiniteState as exc:
            rec.termination = Termination("invariant_violation", state.t, str(exc))
            rec.final_state = state
            return rec
        if settings.adaptive and err > settings.tol:
            dt = max(
                settings.dt_floor,
                0.9 * dt * (settings.tol / max(err, 1e-300)) ** 0.2,
            )
            if dt <= settings.dt_floor:
                rec.termination = Termination("step_floor", state.t)
                rec.final_state = state
                return rec
            continue
        used_dt = dt
        state = new_state
        accepted += 1
        snapshot(state)
        if settings.adaptive:
            grow = 0.9 * (settings.tol / max(err, 1e-300)) ** 0.2
            dt = min(settings.dt_max, dt * min(5.0, max(0.2, grow)))
            if dt < settings.dt_floor:
                rec.termination = Termination("step_floor", state.t)
                rec.final_state = state
                return rec

        ux = deriv(state.u, grid)
        max_abs_ux = float(max(ux.max(), -ux.min()))
        dense = max_abs_ux > settings.dense_diag_above
        if dense or accepted % settings.diag_stride == 0 or state.t >= settings.t_end:
            record(state, used_dt)
        if max_abs_ux >= settings.blowup_threshold:
            if rec.rows[-1].t < state.t:
                record(state, used_dt)
            if rec.snapshots and rec.snapshots[-1].t < state.t:
                rec.snapshots.append(state)
            rec.termination = Termination("blowup_detected", state.t)
            rec.final_state = state
            return rec

    if rec.rows[-1].t < state.t:
        record(state, dt)
    if rec.snapshots and rec.snapshots[-1].t < state.t:
        rec.snapshots.append(state)
    rec.termination = Termination("reached_t_end", state.t)
    rec.final_state = state
    return rec


@dataclass(frozen=True)
class BlowupEvent:
    index: int
    t: float
    criterion: str  # inf_ux | sup_ux | sup_abs_ux


def detect_blowup(
    samples: list[DiagnosticRow], regime: RegimeFlags, threshold: float
) -> BlowupEvent | None:
    """First diagnostic row at which the regime-specific gradient extremum
    crosses the threshold: inf u_x for sigma>0, sup u_x for sigma<0, and the
    two-sided sup |u_x| criterion otherwise."""
    if not samples:
        raise ValueError("empty diagnostic series")
    for i, row in enumerate(samples):
        if regime.scenario_sigma_pos:
            if row.inf_ux <= -threshold:
                return BlowupEvent(i, row.t, "inf_ux")
        elif regime.blowup_sigma_neg:
            if row.sup_ux >= threshold:
                return BlowupEvent(i, row.t, "sup_ux")
        else:
            if max(abs(row.sup_ux), abs(row.inf_ux)) >= threshold:
                return BlowupEvent(i, row.t, "sup_abs_ux")
    return None


class FitWindowError(ValueError):
    """Not enough samples inside the reciprocal-fit window."""


@dataclass(frozen=True)
class BreakingTimeFit:
    T_est: float
    slope_est: float
    reliable: bool
    n_samples: int
    window: tuple[float, float]


def estimate_T(
    samples: list[DiagnosticRow],
    params: PhysParams,
    branch: str = "sup",
    window: tuple[float, float] = (20.0, 1e3),
) -> BreakingTimeFit:
    """Least-squares line through 1/M(t) over the window M in [lo, hi];
    the breaking time estimate is the root of the fitted line.

    Near breaking 1/M is asymptotically linear with slope sigma/2; a fitted
    slope of the wrong sign marks the fit unreliable.
    """
    lo, hi = window
    t = np.array([r.t for r in samples])
    M = np.array([r.sup_ux if branch == "sup" else r.inf_ux for r in samples])
    mask = (np.abs(M) >= lo) & (np.abs(M) <= hi)
    if np.count_nonzero(mask) < 8:
        raise FitWindowError(
            f"only {np.count_nonzero(mask)} samples with |M| in [{lo}, {hi}]"
        )
    tw, Mw = t[mask], M[mask]
    slope, intercept = np.polyfit(tw, 1.0 / Mw, 1)
    reliable = slope != 0 and (slope * params.sigma > 0) and math.isfinite(slope)
    T_est = -intercept / slope if slope != 0 else math.inf
    if not (T_est > tw[-1]):
        reliable = False
    return BreakingTimeFit(
        T_est=float(T_est),
        slope_est=float(slope),
        reliable=bool(reliable),
        n_samples=int(np.count_nonzero(mask)),
        window=(lo, hi),
    )
