"""Spectral differentiation, Helmholtz Green-kernel convolutions and the
forcing field of the differentiated velocity equation.

The canonical path applies Fourier multipliers (ik for the derivative,
1/(1+k^2) for the kernel p(x) = exp(-|x|)/2).  An independent physical-space
quadrature against the closed-form periodized kernel serves as the test
oracle; the two derivations share nothing but the grid.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .model import FieldState, Grid, PhysParams


def _check(field: np.ndarray, grid: Grid) -> None:
    if field.shape != (grid.n,):
        raise ValueError(f"field length {field.shape} does not match grid n={grid.n}")


def deriv(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Spectral d/dx; exact for resolved trigonometric modes."""
    _check(field, grid)
    fh = sfft.rfft(field)
    fh *= 1j * grid.k
    fh[-1] = 0.0  # Nyquist mode has no well-defined odd derivative
    return sfft.irfft(fh, n=grid.n)


def helmholtz_conv(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Convolution with the kernel of (1 - d^2/dx^2)^{-1}, multiplier 1/(1+k^2)."""
    _check(field, grid)
    fh = sfft.rfft(field)
    fh /= 1.0 + grid.k**2
    return sfft.irfft(fh, n=grid.n)


def helmholtz_conv_dx(field: np.ndarray, grid: Grid) -> np.ndarray:
    """d/dx of the Helmholtz convolution, multiplier ik/(1+k^2)."""
    _check(field, grid)
    fh = sfft.rfft(field)
    fh *= 1j * grid.k / (1.0 + grid.k**2)
    fh[-1] = 0.0
    return sfft.irfft(fh, n=grid.n)


def dealias(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Two-thirds rule: zero the top third of modes of a pointwise product."""
    _check(field, grid)
    fh = sfft.rfft(field)
    fh[~grid.dealias_mask] = 0.0
    return sfft.irfft(fh, n=grid.n)


def periodized_kernel(x: np.ndarray, grid: Grid, kind: str = "p") -> np.ndarray:
    """Closed-form 2L-periodization of p = exp(-|x|)/2 or of its derivative.

    On |x| <= L:  p_L(x) = cosh(L - |x|) / (2 sinh L),
                  p_L'(x) = -sign(x) sinh(L - |x|) / (2 sinh L).
    """
    L = grid.half_length
    ax = np.abs(x)
    if kind == "p":
        return np.cosh(L - ax) / (2.0 * np.sinh(L))
    if kind == "dxp":
        return -np.sign(x) * np.sinh(L - ax) / (2.0 * np.sinh(L))
    raise ValueError(f"unknown kernel tag {kind!r}")


def direct_conv_oracle(field: np.ndarray, grid: Grid, kernel: str = "p") -> np.ndarray:
    """Physical-space convolution oracle: trapezoid rule against the closed-form
    periodized kernel, with the Euler-Maclaurin corner correction.

    The kernel has a derivative corner (kind "p") or a jump (kind "dxp") at
    lag zero, which sits exactly on a node; the leading dx^2 quadrature error
    there is known in closed form and is subtracted, leaving O(dx^4).
    """
    _check(field, grid)
    # kernel sampled at the n distinct lags, wrapped into [-L, L)
    lags = grid.dx * np.arange(grid.n)
    lags = (lags + grid.half_length) % (2.0 * grid.half_length) - grid.half_length
    w = periodized_kernel(lags, grid, kernel)
    # circular convolution done directly (no FFT) via a doubled signal
    out = grid.dx * np.convolve(np.concatenate([field, field]), w)[grid.n : 2 * grid.n]
    if kernel == "p":
        # integrand slope jumps by -f(x) across the corner
        out -= grid.dx**2 / 12.0 * field
    else:
        # kernel value jumps by -1 across lag zero; correction needs f'
        fprime = _central_deriv4(field, grid.dx)
        out += grid.dx**2 / 12.0 * fprime
    return out


def _central_deriv4(f: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order centered first derivative on the periodic grid (no FFT)."""
    fp1, fm1 = np.roll(f, -1), np.roll(f, 1)
    fp2, fm2 = np.roll(f, -2), np.roll(f, 2)
    return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * dx)


def eval_f(state: FieldState, params: PhysParams, grid: Grid) -> np.ndarray:
    """Forcing of the differentiated velocity equation,

        f = -(mu - A) dx(p * du/dx) + (3-sigma)/2 u^2 - Omega rho^2 u
            - p * ((3-sigma)/2 u^2 + sigma/2 u_x^2 + (1-2 Omega A)/2 rho^2
                   - Omega rho^2 u)
            + Omega dx(p * (rho^2 u_x)),

    with the second derivative of the kernel rewritten as dx p * dx u.
    Quadratic and cubic products are dealiased.
    """
    u, rho = state.u, state.rho
    ux = deriv(u, grid)
    u2 = dealias(u * u, grid)
    ux2 = dealias(ux * ux, grid)
    rho2 = dealias(rho * rho, grid)
    rho2u = dealias(rho * rho * u, grid)
    rho2ux = dealias(rho * rho * ux, grid)
    A, sigma, mu, Om = params.A, params.sigma, params.mu, params.Omega
    c = params.coriolis_margin
    inner = 0.5 * (3.0 - sigma) * u2 + 0.5 * sigma * ux2 + 0.5 * c * rho2 - Om * rho2u
    return (
        -(mu - A) * helmholtz_conv_dx(ux, grid)
        + 0.5 * (3.0 - sigma) * u2
        - Om * rho2u
        - helmholtz_conv(inner, grid)
        + Om * helmholtz_conv_dx(rho2ux, grid)
    )
