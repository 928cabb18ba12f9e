"""Time stepping, diagnostics and breaking-time extrapolation."""

import math

import numpy as np
import pytest

from r2ch import (
    BlowupEvent,
    FieldState,
    FitWindowError,
    InitialDataSpec,
    PhysParams,
    ProfileTerm,
    RegimeFlags,
    RunSettings,
    build_grid,
    detect_blowup,
    deriv,
    direct_conv_oracle,
    estimate_T,
    eval_f,
    refined_extremum,
    rhs,
    run,
    step,
    synthesize,
)
from r2ch.evolution import (
    DiagnosticRow,
    NonFiniteState,
    _interp_at,
    _rhs_arrays,
    energy_density_integral,
    make_diagnostic_row,
)


def make_row(t, sup_ux=0.0, inf_ux=0.0, m3=0.0):
    return DiagnosticRow(
        t=t, dt=0.0, E=1.0, sup_ux=sup_ux, inf_ux=inf_ux,
        x_at_sup_ux=0.0, x_at_inf_ux=0.0, sup_abs_eta=0.0, min_rho=1.0,
        m3=m3, f_sup_abs=0.0, lemma31_ceiling=math.nan, boundary_leak=0.0,
    )


class TestRhsOracle:
    """The full right-hand side against a quadrature assembly that uses the
    physical-space kernel oracle and analytic profile derivatives."""

    @pytest.mark.parametrize(
        "params",
        [
            PhysParams(A=0.5, sigma=1.0, mu=0.2, Omega=0.1),
            PhysParams(A=-0.4, sigma=-1.5, mu=0.1, Omega=0.2),
            PhysParams(A=0.0, sigma=2.0, mu=0.0, Omega=0.0),
        ],
    )
    def test_quadrature_assembly(self, params):
        g = build_grid(20.0, 2048)
        uspec = InitialDataSpec(
            u_terms=(
                ProfileTerm("gaussian_bump", 0.3, 2.0, -1.0),
                ProfileTerm("slope_bump", 0.2, 1.5, 2.0),
            ),
            eta_terms=(ProfileTerm("eta_bump", 0.15, 2.0, 0.5),),
        )
        st = synthesize(uspec, g)
        u, eta = st.u, st.eta
        ux = uspec.u0_dx(g.x)
        etax = sum(t.evaluate_dx(g.x) for t in uspec.eta_terms)
        rho = 1.0 + eta
        A, sigma, mu, Om = params.A, params.sigma, params.mu, params.Omega
        c = params.coriolis_margin

        bracket = (
            (mu - A) * u
            + 0.5 * (3.0 - sigma) * u**2
            + 0.5 * sigma * ux**2
            + c * (eta + 0.5 * eta**2)
            - Om * rho**2 * u
        )
        du_expect = (
            -(sigma * u - mu) * ux
            - direct_conv_oracle(bracket, g, "dxp")
            + Om * direct_conv_oracle(rho**2 * ux, g, "p")
        )
        deta_expect = -(ux * rho + u * etax)

        td = rhs(st, params, g)
        scale = np.max(np.abs(du_expect)) + 1.0
        np.testing.assert_allclose(td.du_dt / scale, du_expect / scale, atol=1e-9)
        np.testing.assert_allclose(td.deta_dt, deta_expect, atol=1e-9)

    def test_rest_state_exact_zero(self):
        g = build_grid(20.0, 1024)
        p = PhysParams(A=0.7, sigma=-2.0, mu=0.3, Omega=0.2)
        td = rhs(FieldState(0.0, np.zeros(g.n), np.zeros(g.n)), p, g)
        assert np.max(np.abs(td.du_dt)) == 0.0
        assert np.max(np.abs(td.deta_dt)) == 0.0

    def test_vanishing_density_mode_invariant(self):
        # eta = -1 (rho = 0) reduces to the single velocity equation;
        # deta/dt must vanish identically
        g = build_grid(10.0, 512)
        p = PhysParams(A=0.3, sigma=1.0, mu=0.1, Omega=0.2)
        spec = InitialDataSpec(
            u_terms=(ProfileTerm("gaussian_bump", 0.2, 1.0, 0.0),), eta_zero=True
        )
        st = synthesize(spec, g)
        td = rhs(st, p, g)
        assert np.max(np.abs(td.deta_dt)) <= 1e-13

    def test_nonfinite_raises(self):
        g = build_grid(10.0, 256)
        p = PhysParams(A=0.0, sigma=1.0, mu=0.0, Omega=0.0)
        u = np.full(g.n, 1e200)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(NonFiniteState):
                _rhs_arrays(u, np.zeros(g.n), p, g)


class TestRiccatiIdentity:
    def test_differentiated_equation_at_extremum(self):
        """At the slope maximizer the differentiated equation collapses to
        dM/dt = -sigma/2 M^2 + (1-2 Omega A)/2 gamma^2 + f; verify the
        discrete operators reproduce it on a well-resolved state."""
        p = PhysParams(A=0.5, sigma=-1.0, mu=0.0, Omega=0.1)
        g = build_grid(5.0, 8192)
        spec = InitialDataSpec(u_terms=(ProfileTerm("slope_bump", 9.0, 0.1, 0.0),))
        st = synthesize(spec, g)
        ux = deriv(st.u, g)
        i = int(np.argmax(ux))
        td = rhs(st, p, g)
        lhs = deriv(td.du_dt, g)[i] + (p.sigma * st.u[i] - p.mu) * deriv(ux, g)[i]
        f = eval_f(st, p, g)[i]
        gam = st.rho[i]
        pred = -0.5 * p.sigma * ux[i] ** 2 + 0.5 * p.coriolis_margin * gam**2 + f
        assert lhs == pytest.approx(pred, rel=1e-9)


class TestStep:
    def test_error_estimate_order(self):
        # the embedded difference estimates the 5th order local error: under
        # dt halving it should shrink by about 2^5
        p = PhysParams(A=0.5, sigma=1.0, mu=0.2, Omega=0.1)
        g = build_grid(20.0, 1024)
        spec = InitialDataSpec(
            u_terms=(ProfileTerm("gaussian_bump", 0.3, 2.0, 0.0),),
            eta_terms=(ProfileTerm("eta_bump", 0.1, 2.0, 0.0),),
        )
        st = synthesize(spec, g)
        _, e1 = step(st, 0.02, p, g)
        _, e2 = step(st, 0.01, p, g)
        assert 20.0 <= e1 / e2 <= 45.0

    def test_rejects_nonpositive_dt(self):
        p = PhysParams(A=0.0, sigma=1.0, mu=0.0, Omega=0.0)
        g = build_grid(10.0, 256)
        st = FieldState(0.0, np.zeros(g.n), np.zeros(g.n))
        with pytest.raises(ValueError):
            step(st, 0.0, p, g)

    def test_time_advances(self):
        p = PhysParams(A=0.0, sigma=1.0, mu=0.0, Omega=0.0)
        g = build_grid(10.0, 256)
        st = FieldState(1.5, np.zeros(g.n), np.zeros(g.n))
        new, err = step(st, 0.25, p, g)
        assert new.t == pytest.approx(1.75)
        assert err == 0.0


class TestEnergy:
    def test_analytic_initial_energy(self):
        # closed-form integrals of the Gaussian profiles
        p = PhysParams(A=0.3, sigma=1.0, mu=0.0, Omega=0.1)
        g = build_grid(20.0, 4096)
        a, w, b, we = 0.3, 2.0, 0.1, 1.5
        spec = InitialDataSpec(
            u_terms=(ProfileTerm("gaussian_bump", a, w, 0.0),),
            eta_terms=(ProfileTerm("eta_bump", b, we, 0.0),),
        )
        st = synthesize(spec, g)
        expect = math.sqrt(math.pi / 2.0) * (
            a**2 * w + a**2 / w + p.coriolis_margin * b**2 * we
        )
        assert energy_density_integral(st, p, g) == pytest.approx(expect, rel=1e-10)

    def test_short_run_conserves(self):
        p = PhysParams(A=0.5, sigma=1.0, mu=0.2, Omega=0.1)
        g = build_grid(20.0, 2048)
        spec = InitialDataSpec(
            u_terms=(ProfileTerm("gaussian_bump", 0.3, 2.0, 0.0),),
            eta_terms=(ProfileTerm("eta_bump", 0.1, 2.0, 0.0),),
        )
        st = synthesize(spec, g)
        rec = run(st, p, g, RunSettings(t_end=1.0, tol=1e-8, diag_stride=1))
        E = np.array([r.E for r in rec.rows])
        assert np.max(np.abs(E - E[0])) / E[0] <= 1e-8


class TestExtremumRefinement:
    def test_parabola_recovered_exactly(self):
        x = np.linspace(-10, 10, 401)
        y = 2.0 - 3.0 * (x - 1.234) ** 2
        loc, val = refined_extremum(y, x, "max")
        assert loc == pytest.approx(1.234, abs=1e-12)
        assert val == pytest.approx(2.0, abs=1e-12)

    def test_min_mode(self):
        x = np.linspace(0, 1, 101)
        y = (x - 0.4071) ** 2
        loc, val = refined_extremum(y, x, "min")
        assert loc == pytest.approx(0.4071, abs=1e-12)
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_tie_breaks_smallest_x(self):
        x = np.linspace(0, 1, 11)
        y = np.zeros(11)
        loc, _ = refined_extremum(y, x, "max")
        assert loc == x[0]

    def test_interp_quadratic_exact(self):
        x = np.linspace(-5, 5, 101)
        y = 1.0 + 2.0 * x + 0.5 * x**2
        for xq in (0.03, -1.27, 3.99):
            assert _interp_at(y, x, xq) == pytest.approx(
                1.0 + 2.0 * xq + 0.5 * xq**2, abs=1e-10
            )


class TestRunTermination:
    def test_reached_t_end(self):
        p = PhysParams(A=0.0, sigma=1.0, mu=0.0, Omega=0.0)
        g = build_grid(10.0, 256)
        st = FieldState(0.0, np.zeros(g.n), np.zeros(g.n))
        rec = run(st, p, g, RunSettings(t_end=0.1))
        assert rec.termination.event == "reached_t_end"
        assert rec.final_state.t == pytest.approx(0.1)
        assert rec.rows[-1].t == pytest.approx(0.1)

    def test_step_floor(self):
        p = PhysParams(A=0.5, sigma=1.0, mu=0.2, Omega=0.1)
        g = build_grid(20.0, 512)
        spec = InitialDataSpec(
            u_terms=(ProfileTerm("gaussian_bump", 0.3, 2.0, 0.0),)
        )
        st = synthesize(spec, g)
        # an unreachable tolerance drives dt to the floor
        settings = RunSettings(t_end=1.0, tol=1e-300, dt_floor=1e-6, dt_init=1e-3)
        rec = run(st, p, g, settings)
        assert rec.termination.event == "step_floor"

    def test_snapshot_cadence_zero_disables(self):
        p = PhysParams(A=0.0, sigma=1.0, mu=0.0, Omega=0.0)
        g = build_grid(10.0, 256)
        st = FieldState(0.0, np.zeros(g.n), np.zeros(g.n))
        rec = run(st, p, g, RunSettings(t_end=0.05, snapshot_cadence=0))
        assert rec.snapshots == []

    def test_final_snapshot_present(self):
        p = PhysParams(A=0.0, sigma=1.0, mu=0.0, Omega=0.0)
        g = build_grid(10.0, 256)
        spec = InitialDataSpec(
            u_terms=(ProfileTerm("gaussian_bump", 0.05, 1.0, 0.0),)
        )
        st = synthesize(spec, g)
        rec = run(st, p, g, RunSettings(t_end=0.3, snapshot_cadence=1))
        assert rec.snapshots[-1].t == pytest.approx(rec.final_state.t)


class TestDetectBlowup:
    def pos_regime(self):
        return RegimeFlags(True, False, False)

    def neg_regime(self):
        return RegimeFlags(False, True, False)

    def none_regime(self):
        return RegimeFlags(False, False, False)

    def test_positive_sigma_fires_on_inf(self):
        rows = [make_row(0.0), make_row(1.0, inf_ux=-60.0)]
        ev = detect_blowup(rows, self.pos_regime(), 50.0)
        assert ev == BlowupEvent(1, 1.0, "inf_ux")

    def test_positive_sigma_ignores_sup(self):
        rows = [make_row(0.0, sup_ux=100.0)]
        assert detect_blowup(rows, self.pos_regime(), 50.0) is None

    def test_negative_sigma_fires_on_sup(self):
        rows = [make_row(0.0, sup_ux=49.0), make_row(0.5, sup_ux=51.0)]
        ev = detect_blowup(rows, self.neg_regime(), 50.0)
        assert ev.criterion == "sup_ux" and ev.index == 1

    def test_two_sided(self):
        rows = [make_row(0.0, inf_ux=-70.0)]
        ev = detect_blowup(rows, self.none_regime(), 50.0)
        assert ev.criterion == "sup_abs_ux"

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            detect_blowup([], self.pos_regime(), 50.0)


class TestEstimateT:
    def synthetic(self, sigma, T, branch):
        ts = np.linspace(0.0, T - 0.02, 300)
        M = -2.0 / (sigma * (T - ts))
        return [
            make_row(float(t), sup_ux=float(m) if branch == "sup" else 0.0,
                     inf_ux=float(m) if branch == "inf" else 0.0)
            for t, m in zip(ts, M)
        ]

    def test_exact_reciprocal_sup(self):
        p = PhysParams(A=0.0, sigma=-1.0, mu=0.0, Omega=0.0)
        fit = estimate_T(self.synthetic(-1.0, 3.0, "sup"), p, "sup", (2.0, 1e4))
        assert fit.T_est == pytest.approx(3.0, abs=1e-9)
        assert fit.slope_est == pytest.approx(-0.5, abs=1e-9)
        assert fit.reliable

    def test_exact_reciprocal_inf(self):
        p = PhysParams(A=0.0, sigma=1.0, mu=0.0, Omega=0.0)
        fit = estimate_T(self.synthetic(1.0, 2.0, "inf"), p, "inf", (2.0, 1e4))
        assert fit.T_est == pytest.approx(2.0, abs=1e-9)
        assert fit.slope_est == pytest.approx(0.5, abs=1e-9)
        assert fit.reliable

    def test_wrong_sign_slope_unreliable(self):
        # decaying gradient: 1/M slope has the wrong sign for sigma < 0
        p = PhysParams(A=0.0, sigma=-1.0, mu=0.0, Omega=0.0)
        ts = np.linspace(0.0, 1.0, 100)
        rows = [make_row(float(t), sup_ux=float(30.0 - 10.0 * t)) for t in ts]
        fit = estimate_T(rows, p, "sup", (5.0, 1e4))
        assert not fit.reliable

    def test_too_few_samples_raises(self):
        p = PhysParams(A=0.0, sigma=-1.0, mu=0.0, Omega=0.0)
        rows = [make_row(0.0, sup_ux=1.0), make_row(1.0, sup_ux=2.0)]
        with pytest.raises(FitWindowError):
            estimate_T(rows, p, "sup", (20.0, 100.0))


class TestDiagnosticRow:
    def test_row_fields(self):
        p = PhysParams(A=0.3, sigma=1.0, mu=0.1, Omega=0.1)
        g = build_grid(20.0, 1024)
        spec = InitialDataSpec(
            u_terms=(ProfileTerm("gaussian_bump", 0.3, 2.0, 0.0),),
            eta_terms=(ProfileTerm("eta_bump", 0.1, 2.0, 0.0),),
        )
        st = synthesize(spec, g)
        row = make_diagnostic_row(st, 0.01, p, g, lemma31_ceiling=7.0)
        assert row.t == 0.0 and row.dt == 0.01
        assert row.sup_ux > 0 > row.inf_ux
        assert row.min_rho == pytest.approx(1.0, abs=1e-12)
        assert row.max_rho == pytest.approx(1.1, rel=1e-6)
        assert row.lemma31_ceiling == 7.0
        # m3 of the even bump's odd-symmetric cube integrates to zero
        assert abs(row.m3) <= 1e-12
