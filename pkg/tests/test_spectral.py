"""Spectral operators against closed forms and the quadrature oracle."""

import math

import numpy as np
import pytest

from r2ch import (
    FieldState,
    PhysParams,
    build_grid,
    deriv,
    direct_conv_oracle,
    eval_f,
    helmholtz_conv,
    helmholtz_conv_dx,
    periodized_kernel,
)
from r2ch.spectral import dealias


@pytest.fixture(scope="module")
def grid():
    return build_grid(20.0, 4096)


class TestDeriv:
    def test_trig_mode_exact(self, grid):
        # cos(kx) -> -k sin(kx), exact for any resolved wavenumber
        k = grid.k[17]
        f = np.cos(k * grid.x)
        np.testing.assert_allclose(deriv(f, grid), -k * np.sin(k * grid.x), atol=1e-12)

    def test_gaussian_analytic(self, grid):
        f = np.exp(-((grid.x / 2.0) ** 2))
        expect = -2.0 * grid.x / 4.0 * f
        np.testing.assert_allclose(deriv(f, grid), expect, atol=1e-12)

    def test_constant_derivative_zero(self, grid):
        np.testing.assert_allclose(deriv(np.full(grid.n, 3.7), grid), 0.0, atol=1e-12)

    def test_shape_mismatch(self, grid):
        with pytest.raises(ValueError):
            deriv(np.zeros(10), grid)


class TestHelmholtzConv:
    def test_eigenfunction(self, grid):
        # cos(kx) is an eigenfunction with eigenvalue 1/(1+k^2)
        k = grid.k[33]
        f = np.cos(k * grid.x)
        np.testing.assert_allclose(
            helmholtz_conv(f, grid), f / (1.0 + k**2), atol=1e-12
        )

    def test_constant(self, grid):
        # the kernel integrates to one on the period
        out = helmholtz_conv(np.full(grid.n, 2.5), grid)
        np.testing.assert_allclose(out, 2.5, atol=1e-12)

    def test_dx_of_constant_vanishes(self, grid):
        np.testing.assert_allclose(
            helmholtz_conv_dx(np.ones(grid.n), grid), 0.0, atol=1e-13
        )

    def test_dx_matches_deriv_of_conv(self, grid):
        f = np.exp(-((grid.x - 1.0) / 2.0) ** 2)
        np.testing.assert_allclose(
            helmholtz_conv_dx(f, grid), deriv(helmholtz_conv(f, grid), grid), atol=1e-12
        )

    def test_helmholtz_inverse_identity(self, grid):
        # (1 - d^2/dx^2) applied to p * f recovers f
        f = np.exp(-((grid.x + 2.0) / 1.5) ** 2)
        g = helmholtz_conv(f, grid)
        gxx = deriv(deriv(g, grid), grid)
        np.testing.assert_allclose(g - gxx, f, atol=1e-9)


class TestPeriodizedKernel:
    def test_symmetry_and_positivity(self, grid):
        w = periodized_kernel(grid.x, grid)
        assert np.all(w > 0)
        np.testing.assert_allclose(w, periodized_kernel(-grid.x, grid))

    def test_unit_mass(self, grid):
        w = periodized_kernel(grid.x, grid)
        # trapezoid integral; the corner at x=0 costs O(dx^2)
        assert grid.dx * w.sum() == pytest.approx(1.0, abs=1e-5)

    def test_matches_line_kernel_in_interior(self, grid):
        # for L = 20 the periodization correction is O(e^{-2L})
        x = np.array([0.0, 0.5, -1.3])
        np.testing.assert_allclose(
            periodized_kernel(x, grid), 0.5 * np.exp(-np.abs(x)), atol=1e-15
        )

    def test_dxp_is_odd(self, grid):
        w = periodized_kernel(grid.x, grid, "dxp")
        np.testing.assert_allclose(w[1:], -w[1:][::-1])

    def test_unknown_tag(self, grid):
        with pytest.raises(ValueError):
            periodized_kernel(grid.x, grid, "d2p")


class TestConvOracle:
    """The two convolution paths share only the grid; their agreement
    validates both."""

    def test_oracle_agrees_p(self, grid):
        f = np.exp(-((grid.x - 1.0) / 2.0) ** 2)
        a, b = helmholtz_conv(f, grid), direct_conv_oracle(f, grid, "p")
        assert np.max(np.abs(a - b)) / np.max(np.abs(b)) <= 1e-8

    def test_oracle_agrees_dxp(self, grid):
        f = np.exp(-((grid.x + 3.0) / 1.2) ** 2)
        a, b = helmholtz_conv_dx(f, grid), direct_conv_oracle(f, grid, "dxp")
        assert np.max(np.abs(a - b)) / np.max(np.abs(b)) <= 1e-8

    def test_oracle_on_sum_of_bumps(self, grid):
        f = np.exp(-(grid.x**2)) + 0.5 * np.exp(-(((grid.x - 4) / 0.7) ** 2))
        a, b = helmholtz_conv(f, grid), direct_conv_oracle(f, grid, "p")
        assert np.max(np.abs(a - b)) / np.max(np.abs(b)) <= 1e-8


class TestDealias:
    def test_idempotent(self, grid):
        f = np.random.default_rng(0).standard_normal(grid.n)
        once = dealias(f, grid)
        np.testing.assert_allclose(dealias(once, grid), once, atol=1e-12)

    def test_leaves_low_modes(self, grid):
        k = grid.k[5]
        f = np.sin(k * grid.x)
        np.testing.assert_allclose(dealias(f, grid), f, atol=1e-12)

    def test_kills_high_modes(self, grid):
        m = grid.n // 3 + 5
        f = np.sin(grid.k[m] * grid.x)
        np.testing.assert_allclose(dealias(f, grid), 0.0, atol=1e-12)


class TestForcing:
    def test_rest_state_constant(self, grid):
        # u = 0, rho = 1: every nonlocal term collapses and
        # f = -(1 - 2 Omega A)/2 everywhere
        for p in (
            PhysParams(A=0.5, sigma=1.0, mu=0.2, Omega=0.1),
            PhysParams(A=-1.0, sigma=-2.0, mu=0.0, Omega=0.3),
        ):
            st = FieldState(0.0, np.zeros(grid.n), np.zeros(grid.n))
            f = eval_f(st, p, grid)
            np.testing.assert_allclose(f, -0.5 * p.coriolis_margin, atol=1e-12)

    def test_forcing_chain_inequalities(self, grid):
        """The chain bounding |f| through C^2/2 proceeds term by term; each
        intermediate estimate must hold for a concrete smooth state."""
        from r2ch import constant_C
        from r2ch.evolution import energy_density_integral

        p = PhysParams(A=0.5, sigma=1.0, mu=0.2, Omega=0.1)
        u = 0.3 * np.exp(-((grid.x / 2.0) ** 2))
        eta = 0.1 * np.exp(-(((grid.x - 1) / 2.0) ** 2))
        st = FieldState(0.0, u, eta)
        E0 = energy_density_integral(st, p, grid)
        rho_sup = float(np.max(st.rho))
        c = p.coriolis_margin

        ux = deriv(u, grid)
        # embedding: sup|u|^2 <= E0/2 and, for the convolution of a
        # nonnegative integrand, sup p*(g) <= integral(g)/2
        assert np.max(u**2) <= 0.5 * E0 + 1e-12
        conv = helmholtz_conv(u**2 + ux**2, grid)
        assert np.max(np.abs(conv)) <= 0.5 * grid.dx * np.sum(u**2 + ux**2) + 1e-9
        # |dx p * g| <= p*|g| pointwise bound via kernel domination
        g = u * ux
        assert np.max(np.abs(helmholtz_conv_dx(g, grid))) <= np.max(
            helmholtz_conv(np.abs(g), grid)
        ) + 1e-9
        # the assembled bound
        C = constant_C(E0, rho_sup, p)
        f = eval_f(st, p, grid)
        assert np.max(np.abs(f)) <= 0.5 * C**2

    def test_forcing_even_symmetry(self, grid):
        # even u and rho give even f
        p = PhysParams(A=0.2, sigma=2.0, mu=0.1, Omega=0.05)
        u = 0.2 * np.exp(-(grid.x**2))
        eta = 0.05 * np.exp(-((grid.x / 1.5) ** 2))
        f = eval_f(FieldState(0.0, u, eta), p, grid)
        # grid point j and n-j are mirror images (x=0 at index n//2)
        mirrored = np.roll(f[::-1], 1)
        np.testing.assert_allclose(f, mirrored, atol=1e-10)
