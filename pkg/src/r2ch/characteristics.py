"""Lagrangian diagnostics: flow-map integration with its variational
(Jacobian) equation, extremum tracking, and the ODE residuals governing the
tracked gradient extremum and the density along it.

The Lagrangian representation is purely diagnostic: it consumes snapshots
stored by the Eulerian solver.  Space is interpolated through spectral
upsampling plus a periodic cubic spline; time through cubic splines over the
snapshot instants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.interpolate import CubicSpline

from .evolution import RunRecord, _interp_at, _refine_parabolic, refined_extremum
from .model import Grid, PhysParams
from .spectral import deriv, eval_f


class SnapshotCadenceError(ValueError):
    """Stored snapshots are too sparse for trajectory reconstruction."""


def _upsample(field: np.ndarray, factor: int) -> np.ndarray:
    """Zero-padded spectral refinement of a periodic field."""
    n = field.size
    fh = sfft.rfft(field)
    out = np.zeros(n * factor // 2 + 1, dtype=complex)
    out[: fh.size] = fh
    return sfft.irfft(out, n=n * factor) * factor


class _SpaceTimeField:
    """Cubic-in-time, spectrally-upsampled-cubic-in-space interpolant of a
    snapshot series on the periodic box."""

    def __init__(self, times: np.ndarray, fields: np.ndarray, grid: Grid, factor: int = 8):
        self.grid = grid
        self.factor = factor
        self.period = 2.0 * grid.half_length
        self.spline_t = CubicSpline(times, fields, axis=0)
        nf = grid.n * factor
        self.xf = np.linspace(-grid.half_length, grid.half_length, nf + 1)

    def __call__(self, t: float, q: np.ndarray) -> np.ndarray:
        coarse = self.spline_t(t)
        fine = _upsample(coarse, self.factor)
        fine = np.append(fine, fine[0])  # close the period for the spline
        sp = CubicSpline(self.xf, fine, bc_type="periodic")
        qw = (q + self.grid.half_length) % self.period - self.grid.half_length
        return sp(qw)


@dataclass
class Trajectory:
    seeds: np.ndarray
    times: np.ndarray
    path: np.ndarray  # (n_times, n_seeds)
    jac_ode: np.ndarray  # variational-equation Jacobian, same shape
    u_x_along: np.ndarray  # u_x(t, q(t, x)), same shape


def advect(
    seeds: np.ndarray,
    run: RunRecord,
    substeps: int = 1,
    upsample: int = 8,
) -> Trajectory:
    """Integrate dq/dt = u(t, q) from every seed, together with the
    variational equation dJ/dt = u_x(t, q) J, with classical RK4 over the
    snapshot instants."""
    grid = run.grid
    if len(run.snapshots) < 4:
        raise SnapshotCadenceError("need at least 4 snapshots for cubic time interpolation")
    seeds = np.atleast_1d(np.asarray(seeds, dtype=float))
    L = grid.half_length
    if np.any(seeds < -L) or np.any(seeds >= L):
        raise ValueError("seeds must lie inside [-L, L)")

    ts = np.array([s.t for s in run.snapshots])
    if np.any(np.diff(ts) <= 0):
        raise SnapshotCadenceError("snapshot times must be strictly increasing")
    U = np.stack([s.u for s in run.snapshots])
    Ux = np.stack([deriv(s.u, grid) for s in run.snapshots])
    u_f = _SpaceTimeField(ts, U, grid, upsample)
    ux_f = _SpaceTimeField(ts, Ux, grid, upsample)

    q = seeds.copy()
    J = np.ones_like(q)
    path = [q.copy()]
    jac = [J.copy()]
    uxa = [ux_f(ts[0], q)]

    for i in range(len(ts) - 1):
        t0, t1 = ts[i], ts[i + 1]
        h = (t1 - t0) / substeps
        for s in range(substeps):
            ta = t0 + s * h
            k1q = u_f(ta, q)
            k1J = ux_f(ta, q) * J
            k2q = u_f(ta + h / 2, q + h / 2 * k1q)
            k2J = ux_f(ta + h / 2, q + h / 2 * k1q) * (J + h / 2 * k1J)
            k3q = u_f(ta + h / 2, q + h / 2 * k2q)
            k3J = ux_f(ta + h / 2, q + h / 2 * k2q) * (J + h / 2 * k2J)
            k4q = u_f(ta + h, q + h * k3q)
            k4J = ux_f(ta + h, q + h * k3q) * (J + h * k3J)
            q = q + h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
            J = J + h / 6 * (k1J + 2 * k2J + 2 * k3J + k4J)
        path.append(q.copy())
        jac.append(J.copy())
        uxa.append(ux_f(t1, q))

    return Trajectory(
        seeds=seeds,
        times=ts,
        path=np.stack(path),
        jac_ode=np.stack(jac),
        u_x_along=np.stack(uxa),
    )


def sample_along(traj: Trajectory, run: RunRecord, which: str = "rho") -> np.ndarray:
    """Sample a snapshot-derived field (rho | u | eta | u_x) along the
    trajectory, with the same space-time interpolation used for advection."""
    grid = run.grid
    ts = np.array([s.t for s in run.snapshots])
    if which == "rho":
        F = np.stack([s.rho for s in run.snapshots])
    elif which == "u":
        F = np.stack([s.u for s in run.snapshots])
    elif which == "eta":
        F = np.stack([s.eta for s in run.snapshots])
    elif which == "u_x":
        F = np.stack([deriv(s.u, grid) for s in run.snapshots])
    else:
        raise ValueError(f"unknown field {which!r}")
    f = _SpaceTimeField(ts, F, grid)
    return np.stack([f(t, traj.path[i]) for i, t in enumerate(traj.times)])


def jacobian_consistency(traj: Trajectory) -> float:
    """Max relative discrepancy between the variational Jacobian and
    exp(integral of u_x along the path), the integral taken by cubic-spline
    quadrature of the recorded slope samples."""
    sp = CubicSpline(traj.times, traj.u_x_along, axis=0)
    integral = sp.antiderivative()(traj.times) - sp.antiderivative()(traj.times[0])
    jac_quad = np.exp(integral)
    return float(np.max(np.abs(traj.jac_ode - jac_quad) / np.abs(jac_quad)))


def sup_transport_error(traj: Trajectory, run: RunRecord, stride: int = 1) -> float:
    """Max over recorded times of |sup over seeds of u_x(t, q) - grid sup u_x|,
    both sides refined by local quadratic interpolation.  With seeds covering
    the grid this verifies that the flow map transports the supremum."""
    grid = run.grid
    worst = 0.0
    for it in range(0, traj.times.size, stride):
        snap = run.snapshots[it]
        ux = deriv(snap.u, grid)
        _, grid_sup = refined_extremum(ux, grid.x, "max")
        vals = traj.u_x_along[it]
        j = int(np.argmax(vals))
        if 0 < j < vals.size - 1:
            qs = traj.path[it]
            _, seed_sup = _refine_parabolic(
                qs[j - 1], qs[j], qs[j + 1], vals[j - 1], vals[j], vals[j + 1]
            )
        else:
            seed_sup = vals[j]
        worst = max(worst, abs(float(seed_sup) - float(grid_sup)))
    return worst


@dataclass
class ExtremumTrack:
    branch: str  # sup | inf
    t: np.ndarray
    xi: np.ndarray
    M: np.ndarray
    gamma: np.ndarray
    f_along: np.ndarray


def track_extremum(run: RunRecord, branch: str = "sup") -> ExtremumTrack:
    """Per-snapshot location and value of the tracked u_x extremum, with the
    density and forcing sampled at the (sub-grid refined) extremizer."""
    if branch not in ("sup", "inf"):
        raise ValueError(f"branch must be 'sup' or 'inf', got {branch!r}")
    grid, params = run.grid, run.params
    mode = "max" if branch == "sup" else "min"
    t, xi, M, gamma, f_along = [], [], [], [], []
    for snap in run.snapshots:
        ux = deriv(snap.u, grid)
        loc, val = refined_extremum(ux, grid.x, mode)
        fvals = eval_f(snap, params, grid)
        t.append(snap.t)
        xi.append(loc)
        M.append(val)
        gamma.append(_interp_at(snap.rho, grid.x, loc))
        f_along.append(_interp_at(fvals, grid.x, loc))
    return ExtremumTrack(
        branch=branch,
        t=np.array(t),
        xi=np.array(xi),
        M=np.array(M),
        gamma=np.array(gamma),
        f_along=np.array(f_along),
    )


def track_from_rows(run: RunRecord, branch: str = "sup") -> ExtremumTrack:
    """Extremum track assembled from the diagnostic rows (denser than
    snapshots near breaking, at no memory cost)."""
    rows = run.rows
    if branch == "sup":
        return ExtremumTrack(
            branch="sup",
            t=np.array([r.t for r in rows]),
            xi=np.array([r.x_at_sup_ux for r in rows]),
            M=np.array([r.sup_ux for r in rows]),
            gamma=np.array([r.gamma_sup for r in rows]),
            f_along=np.array([r.f_at_sup for r in rows]),
        )
    return ExtremumTrack(
        branch="inf",
        t=np.array([r.t for r in rows]),
        xi=np.array([r.x_at_inf_ux for r in rows]),
        M=np.array([r.inf_ux for r in rows]),
        gamma=np.array([r.gamma_inf for r in rows]),
        f_along=np.array([r.f_at_inf for r in rows]),
    )


def argmax_jump_mask(track: ExtremumTrack, grid: Grid, factor: float = 10.0) -> np.ndarray:
    """True where the extremizer location moves by more than factor*dx between
    consecutive samples (argmax switching between distant local extrema); the
    tracked value stays continuous there but its time derivative has a kink."""
    jump = np.zeros(track.t.size, dtype=bool)
    if track.t.size < 2:
        return jump
    dxi = np.abs(np.diff(track.xi))
    big = dxi > factor * grid.dx
    jump[:-1] |= big
    jump[1:] |= big
    return jump


def ode_residuals(
    track: ExtremumTrack, params: PhysParams
) -> tuple[np.ndarray, np.ndarray]:
    """Centered-difference residuals of the extremum ODEs:

        res_M     = dM/dt + sigma/2 M^2 - (1-2 Omega A)/2 gamma^2 - f(t, xi)
        res_gamma = dgamma/dt + M gamma
    """
    if track.t.size < 3:
        raise ValueError("need at least 3 samples for centered differencing")
    dM = np.gradient(track.M, track.t)
    dg = np.gradient(track.gamma, track.t)
    res_M = (
        dM
        + 0.5 * params.sigma * track.M**2
        - 0.5 * params.coriolis_margin * track.gamma**2
        - track.f_along
    )
    res_gamma = dg + track.M * track.gamma
    return res_M, res_gamma


def gamma_decay_error(track: ExtremumTrack) -> float:
    """Max relative mismatch between the tracked density and the closed-form
    decay gamma(0) * exp(-integral of M), quadrature by cubic spline."""
    sp = CubicSpline(track.t, track.M)
    integral = sp.antiderivative()(track.t) - sp.antiderivative()(track.t[0])
    predicted = track.gamma[0] * np.exp(-integral)
    scale = np.maximum(np.abs(predicted), 1e-300)
    return float(np.max(np.abs(track.gamma - predicted) / scale))
