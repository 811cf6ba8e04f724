import numpy as np
import pytest

import glflow
from glflow import calculus, flow, recipes
from glflow.errors import BlowUpError
from glflow.state import FlowState

from conftest import random_state


def subcritical_problem(n=32):
    g = glflow.make_geometry(3.0, 3.0, n, n)
    return g, glflow.make_bundle(1, g)


def supercritical_problem(n=32):
    L = 2 * np.pi * np.sqrt(2)
    g = glflow.make_geometry(L, L, n, n)
    return g, glflow.make_bundle(1, g)


class TestSolveA0:
    def test_zero_section_gives_zero(self):
        g, b = supercritical_problem()
        st = recipes.constant_curvature_state(g)
        assert np.max(np.abs(glflow.solve_a0(st, g, b))) == 0.0

    def test_real_section_gives_zero(self, flat_2pi_64):
        g = flat_2pi_64
        b = glflow.make_bundle(0, g)
        rng = np.random.default_rng(31)
        st = FlowState(0.0, np.zeros(g.shape), np.zeros(g.shape),
                       rng.standard_normal(g.shape).astype(complex))
        assert np.max(np.abs(glflow.solve_a0(st, g, b))) < 1e-14

    def test_residual_oracle_and_mean(self):
        g, b = supercritical_problem()
        st = random_state(g, b, 32)
        a0 = glflow.solve_a0(st, g, b)
        d1, d2 = calculus.covariant_derivative(st.phi, st.A, b, g)
        j = ((np.conj(st.phi) * d1).imag, (np.conj(st.phi) * d2).imag)
        divj = calculus.fd_div_flat(j, g)
        resid = calculus.fd_laplacian_flat(a0, g) + divj
        assert np.linalg.norm(resid) < 1e-10 * np.linalg.norm(divj)
        assert abs(np.sum(a0 * g.weights)) < 1e-12 * np.sum(np.abs(a0) * g.weights)


class TestEnergyGradient:
    def test_exact_zero_at_constant_curvature_state(self):
        g, b = subcritical_problem()
        st = recipes.constant_curvature_state(g)
        (ga1, ga2), gphi = glflow.energy_gradient(st, g, b)
        # rounding floor: plaquette phases agree to ~1e-13, divided by h
        assert np.max(np.abs(ga1)) < 5e-12
        assert np.max(np.abs(ga2)) < 5e-12
        assert np.max(np.abs(gphi)) == 0.0

    def test_exact_zero_at_trivial_vacuum(self, flat_2pi_64):
        g = flat_2pi_64
        b = glflow.make_bundle(0, g)
        st = FlowState(0.0, np.zeros(g.shape), np.zeros(g.shape),
                       np.ones(g.shape, complex))
        (ga1, ga2), gphi = glflow.energy_gradient(st, g, b)
        assert np.max(np.abs(ga1)) < 1e-13
        assert np.max(np.abs(ga2)) < 1e-13
        assert np.max(np.abs(gphi)) < 1e-13

    @pytest.mark.parametrize("N,L", [(0, 2 * np.pi), (1, 3.0),
                                     (1, 2 * np.pi * np.sqrt(2))])
    def test_matches_finite_differences(self, N, L):
        g = glflow.make_geometry(L, L, 16, 16)
        b = glflow.make_bundle(N, g)
        st = random_state(g, b, 33 + N)
        (ga1, ga2), gphi = glflow.energy_gradient(st, g, b)
        ha = g.h1 * g.h2
        gn = np.sqrt(np.sum(ga1 ** 2 + ga2 ** 2) * ha
                     + np.sum(np.abs(gphi) ** 2 * g.weights))
        rng = np.random.default_rng(100 + N)
        eps = 1e-6
        for _ in range(4):
            da1, da2 = rng.standard_normal((2,) + g.shape)
            dphi = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
            dn = np.sqrt(np.sum(da1 ** 2 + da2 ** 2) * ha
                         + np.sum(np.abs(dphi) ** 2 * g.weights))
            pred = (np.sum((ga1 * da1 + ga2 * da2)) * ha
                    + np.sum((np.conj(gphi) * dphi).real * g.weights))
            plus = FlowState(0, st.a1 + eps * da1, st.a2 + eps * da2,
                             st.phi + eps * dphi)
            minus = FlowState(0, st.a1 - eps * da1, st.a2 - eps * da2,
                              st.phi - eps * dphi)
            fd = (glflow.energy(plus, g, b) - glflow.energy(minus, g, b)) / (2 * eps)
            assert abs(pred - fd) <= 1e-6 * gn * dn


class TestStep:
    def test_stationary_state_unchanged(self):
        g, b = subcritical_problem()
        st = recipes.constant_curvature_state(g)
        pol = flow.StepPolicy()
        new = glflow.step(st, pol, g, b)
        assert new.t == pytest.approx(flow.auto_dt(pol, g))
        assert np.max(np.abs(new.a1 - st.a1)) < 1e-14
        assert np.max(np.abs(new.a2 - st.a2)) < 1e-14
        assert np.max(np.abs(new.phi - st.phi)) < 1e-14

    def test_energy_decreases(self):
        g, b = supercritical_problem()
        st = random_state(g, b, 41)
        pol = flow.StepPolicy()
        e0 = glflow.energy(st, g, b)
        new = glflow.step(st, pol, g, b)
        assert glflow.energy(new, g, b) < e0

    def test_dissipation_identity_second_order(self):
        g, b = supercritical_problem()
        pol = flow.StepPolicy()
        dt0 = flow.auto_dt(pol, g)

        def max_residual(dt, nsteps=60):
            st = random_state(g, b, 42)
            worst = 0.0
            e = glflow.energy(st, g, b)
            for _ in range(nsteps):
                f = flow._Forces(st, g, b)
                st = flow._advance(st, f, dt, pol, g, b)
                e_new = glflow.energy(st, g, b)
                worst = max(worst, abs(e_new - e + dt * f.gn2))
                e = e_new
            return worst

        r1 = max_residual(dt0)
        r2 = max_residual(dt0 / 2, nsteps=120)
        assert 3.0 < r1 / r2 < 5.0

    def test_coulomb_residual_conserved_many_steps(self):
        g, b = supercritical_problem()
        st = random_state(g, b, 43)
        a = recipes.fd_coulomb_fix(st.A, g)
        st = FlowState(0.0, a[0], a[1], st.phi)
        pol = flow.StepPolicy()
        dt = flow.auto_dt(pol, g)
        worst_div = 0.0
        for k in range(10000):
            f = flow._Forces(st, g, b)
            st = flow._advance(st, f, dt, pol, g, b)
            if k % 100 == 0:
                worst_div = max(worst_div, flow.coulomb_residual(st, g))
        worst_div = max(worst_div, flow.coulomb_residual(st, g))
        assert worst_div <= 1e-8

    def test_flux_conserved_along_flow(self):
        g, b = supercritical_problem()
        st = random_state(g, b, 44)
        pol = flow.StepPolicy()
        for _ in range(50):
            st = glflow.step(st, pol, g, b)
            B = glflow.magnetic_field(st.A, b, g)
            assert abs(glflow.flux(B, g) - 2 * np.pi) < 1e-10

    def test_blowup_detected(self):
        g, b = supercritical_problem()
        st = random_state(g, b, 45)
        pol = flow.StepPolicy(dt=1.0)  # far beyond the stability bound
        with pytest.raises(BlowUpError):
            for _ in range(400):
                st = glflow.step(st, pol, g, b)

    def test_rk4_close_to_euler_and_dissipative(self):
        g, b = supercritical_problem()
        st = random_state(g, b, 46)
        dt = 0.5 * flow.auto_dt(flow.StepPolicy(), g)
        e0 = glflow.energy(st, g, b)
        s_eu = glflow.step(st, flow.StepPolicy(scheme="euler", dt=dt), g, b)
        s_rk = glflow.step(st, flow.StepPolicy(scheme="rk4", dt=dt), g, b)
        assert glflow.energy(s_rk, g, b) < e0
        scale = np.max(np.abs(s_eu.phi - st.phi))
        assert np.max(np.abs(s_rk.phi - s_eu.phi)) < 0.5 * scale


class TestRun:
    def test_minimizer_returns_immediately(self):
        g, b = subcritical_problem()
        st = recipes.constant_curvature_state(g)
        res = glflow.run(st, flow.StepPolicy(), g, b)
        assert res.status == "converged"
        assert res.steps == 0
        assert len(res.records) == 1

    def test_t_max_zero_records_initial_state(self):
        g, b = supercritical_problem()
        st = random_state(g, b, 47)
        res = glflow.run(st, flow.StepPolicy(t_max=0.0), g, b)
        assert res.status == "t_max"
        assert res.steps == 0
        assert len(res.records) == 1
        assert res.records[0].t == 0.0

    def test_deterministic_records(self):
        g, b = subcritical_problem(16)
        pol = flow.StepPolicy(t_max=0.5, record_every=5)
        runs = []
        for _ in range(2):
            st = recipes.build_initial_state("random", g, b, 5,
                                             phi_amplitude=0.3)
            res = glflow.run(st, pol, g, b)
            runs.append([(r.t, r.energy, r.eta_l2, r.grad_norm, r.flux)
                         for r in res.records])
        assert runs[0] == runs[1]

    def test_energy_monotone_along_records(self):
        g, b = supercritical_problem()
        st = random_state(g, b, 48)
        res = glflow.run(st, flow.StepPolicy(t_max=3.0, record_every=7), g, b)
        e = np.array([r.energy for r in res.records])
        assert np.all(np.diff(e) <= 1e-10 * (1 + np.abs(e[1:])))

    def test_grad_norm_linear_near_minimizer(self):
        g, b = subcritical_problem()
        base = recipes.constant_curvature_state(g)
        dphi, da = recipes._perturbation(g, b, 51, 10)
        norms = []
        for lam in (1e-3, 1e-4):
            st = FlowState(0.0, base.a1 + lam * da[0], base.a2 + lam * da[1],
                           base.phi + lam * dphi)
            norms.append(glflow.grad_norm(st, g, b) / lam)
        assert norms[0] == pytest.approx(norms[1], rel=0.05)
