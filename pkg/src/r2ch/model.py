"""Parameters, grid, field state and the initial-data profile library.

The real line is truncated to a periodic box [-L, L); all stored fields decay
towards the box edges, which is enforced at t=0 through a boundary-decay
tolerance and monitored afterwards.  The density is stored as the deviation
eta = rho - 1 so that every stored field decays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DecayViolation(ValueError):
    """Initial data does not decay at the truncated boundary."""


@dataclass(frozen=True)
class PhysParams:
    """Model parameters: shear A, balance index sigma, dispersion mu, rotation Omega."""

    A: float
    sigma: float
    mu: float
    Omega: float

    def __post_init__(self):
        for name in ("A", "sigma", "mu", "Omega"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.Omega < 0:
            raise ValueError(f"Omega must be nonnegative, got {self.Omega}")
        if self.coriolis_margin <= 0:
            raise ValueError(
                f"1 - 2*Omega*A must be positive, got {self.coriolis_margin}"
            )

    @property
    def coriolis_margin(self) -> float:
        """The combination 1 - 2*Omega*A, positive for every admissible run."""
        return 1.0 - 2.0 * self.Omega * self.A


@dataclass(frozen=True)
class RegimeFlags:
    """Which of the certified regimes a parameter tuple falls into."""

    scenario_sigma_pos: bool
    blowup_sigma_neg: bool
    blowup_sigma_one: bool

    def __post_init__(self):
        if self.scenario_sigma_pos and self.blowup_sigma_neg:
            raise ValueError("sigma>0 and sigma<0 regimes are mutually exclusive")
        if self.blowup_sigma_one and not self.scenario_sigma_pos:
            raise ValueError("the sigma=1, mu=0 regime implies sigma>0")


def classify_regime(params: PhysParams) -> RegimeFlags:
    """Map parameters to regime flags.  sigma=0 activates nothing."""
    return RegimeFlags(
        scenario_sigma_pos=params.sigma > 0,
        blowup_sigma_neg=params.sigma < 0,
        blowup_sigma_one=(params.sigma == 1.0 and params.mu == 0.0),
    )


@dataclass(frozen=True)
class Grid:
    """Uniform periodic mesh on [-L, L) with rfft wavenumbers k_m = pi*m/L."""

    half_length: float
    n: int
    dx: float
    x: np.ndarray = field(repr=False)
    k: np.ndarray = field(repr=False)

    @property
    def dealias_mask(self) -> np.ndarray:
        # retain |m| <= n/3 (two-thirds rule) in rfft layout
        m = np.arange(self.k.size)
        return m <= self.n // 3


def build_grid(half_length: float, n: int) -> Grid:
    if not (half_length > 0 and math.isfinite(half_length)):
        raise ValueError(f"half_length must be positive and finite, got {half_length}")
    if n < 16 or (n & (n - 1)) != 0:
        raise ValueError(f"n must be a power of two >= 16, got {n}")
    dx = 2.0 * half_length / n
    x = -half_length + dx * np.arange(n)
    k = (math.pi / half_length) * np.arange(n // 2 + 1)
    return Grid(half_length=float(half_length), n=int(n), dx=dx, x=x, k=k)


@dataclass(frozen=True)
class FieldState:
    """Sampled solution at one instant: velocity u and surface deviation eta = rho - 1."""

    t: float
    u: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.eta.shape or self.u.ndim != 1:
            raise ValueError("u and eta must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.eta))):
            raise ValueError("non-finite samples in FieldState")

    @property
    def rho(self) -> np.ndarray:
        return 1.0 + self.eta


@dataclass(frozen=True)
class ProfileTerm:
    """One closed-form bump: kind in {gaussian_bump, slope_bump, eta_bump}."""

    kind: str
    amp: float
    width: float
    center: float

    def __post_init__(self):
        if self.kind not in ("gaussian_bump", "slope_bump", "eta_bump"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError(f"profile width must be positive, got {self.width}")
        if not (math.isfinite(self.amp) and math.isfinite(self.center)):
            raise ValueError("profile amplitude and center must be finite")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        s = (x - self.center) / self.width
        if self.kind == "slope_bump":
            return self.amp * (x - self.center) * np.exp(-(s**2))
        return self.amp * np.exp(-(s**2))

    def evaluate_dx(self, x: np.ndarray) -> np.ndarray:
        """Analytic spatial derivative, used by tests and certificates."""
        s = (x - self.center) / self.width
        if self.kind == "slope_bump":
            return self.amp * np.exp(-(s**2)) * (1.0 - 2.0 * s**2)
        return self.amp * np.exp(-(s**2)) * (-2.0 * s / self.width)


@dataclass(frozen=True)
class InitialDataSpec:
    """Composite initial data: sums of bumps for u and eta, or the test-only
    eta_zero mode (rho identically zero, isolating the velocity equation)."""

    u_terms: tuple[ProfileTerm, ...] = ()
    eta_terms: tuple[ProfileTerm, ...] = ()
    eta_zero: bool = False
    decay_tol: float = 1e-10

    def __post_init__(self):
        if self.eta_zero and self.eta_terms:
            raise ValueError("eta_zero mode excludes eta bump terms")
        for term in self.u_terms:
            if term.kind == "eta_bump":
                raise ValueError("eta_bump is not a velocity profile")
        for term in self.eta_terms:
            if term.kind != "eta_bump":
                raise ValueError(f"{term.kind} is not a density profile")

    def u0(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        for term in self.u_terms:
            out += term.evaluate(x)
        return out

    def u0_dx(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        for term in self.u_terms:
            out += term.evaluate_dx(x)
        return out

    def eta0(self, x: np.ndarray) -> np.ndarray:
        if self.eta_zero:
            return np.full_like(x, -1.0)
        out = np.zeros_like(x)
        for term in self.eta_terms:
            out += term.evaluate(x)
        return out


def synthesize(spec: InitialDataSpec, grid: Grid) -> FieldState:
    """Sample the closed-form profiles on the grid at t=0.

    The decay proxy (max field magnitude over the outer 5% of the box below
    spec.decay_tol) is enforced unless eta_zero mode is set.
    """
    u = spec.u0(grid.x)
    eta = spec.eta0(grid.x)
    if not spec.eta_zero:
        edge = max(1, int(round(0.05 * grid.n / 2)))
        sl = np.r_[0:edge, grid.n - edge : grid.n]
        leak = max(np.max(np.abs(u[sl])), np.max(np.abs(eta[sl])))
        if leak > spec.decay_tol:
            raise DecayViolation(
                f"initial data does not decay at the boundary: "
                f"magnitude {leak:.3e} exceeds tolerance {spec.decay_tol:.3e}"
            )
    return FieldState(t=0.0, u=u, eta=eta)


def boundary_leak(state: FieldState, grid: Grid) -> float:
    """Max field magnitude over the outer 5% of the box (decay monitor)."""
    edge = max(1, int(round(0.05 * grid.n / 2)))
    sl = np.r_[0:edge, grid.n - edge : grid.n]
    return float(max(np.max(np.abs(state.u[sl])), np.max(np.abs(state.eta[sl]))))
