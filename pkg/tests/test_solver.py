import numpy as np
import pytest

from mhdwave.errors import BlowUpError, ConfigurationError, StepSizeError
from mhdwave.grid import (
    GridSpec,
    SpectralVectorField,
    dealias,
    divergence,
    hermitian_error,
    leray_project,
    spectral_inner,
    spectral_l2,
)
from mhdwave.initial import make_initial_data
from mhdwave.kernels import mode_propagator
from mhdwave.solver import (
    SolverConfig,
    State,
    compute_nonlinear,
    run,
    step_exp,
    step_imex,
    step_mhd_baseline,
)

from conftest import random_divfree, random_state, single_mode_field, zero_field


def mode_state(grid, kindex, b_amp=1.0, u_amp=0.0, a_amp=0.0):
    return State(
        single_mode_field(grid, kindex, u_amp),
        single_mode_field(grid, kindex, b_amp),
        single_mode_field(grid, kindex, a_amp),
        0.0,
    )


class TestNonlinear:
    def test_u_equals_b_kills_magnetic_term(self, grid16):
        u = random_divfree(grid16, 1)
        st = State(u, u.copy(), zero_field(grid16), 0.0)
        _, n_b = compute_nonlinear(st)
        assert np.max(np.abs(n_b.coeffs)) == 0.0

    def test_b_zero(self, grid16):
        u = random_divfree(grid16, 2)
        st = State(u, zero_field(grid16), zero_field(grid16), 0.0)
        n_u, n_b = compute_nonlinear(st)
        assert np.max(np.abs(n_b.coeffs)) == 0.0
        # N_u = -P(u.grad u): compare against an independent composition
        # of the public spectral operators
        from mhdwave.grid import RealField, transform_forward, transform_inverse

        g = grid16
        uphys = transform_inverse(u).values
        grads = []
        for i in range(2):
            gx = transform_inverse(SpectralVectorField(
                np.stack([1j * g.kx * u.coeffs[i], 1j * g.ky * u.coeffs[i]])
                * g.nyquist_free, g)).values
            grads.append(gx)
        adv = np.stack([uphys[0] * grads[i][0] + uphys[1] * grads[i][1] for i in range(2)])
        ref = leray_project(dealias(transform_forward(RealField(-adv, g))))
        ref.coeffs[:, 0, 0] = 0
        assert np.max(np.abs(n_u.coeffs - ref.coeffs)) <= 1e-12 * np.max(np.abs(ref.coeffs))

    def test_single_mode_pair_convolution(self, grid16):
        # two single modes: the advective products live on the four sum
        # wavevectors; verify against the hand convolution
        g = grid16
        u = single_mode_field(g, (1, 0), 1.0, component=1)   # u = (0, cos x)
        b = single_mode_field(g, (0, 1), 1.0, component=0)   # b = (cos y, 0)
        st = State(u, b, zero_field(g), 0.0)
        n_u, n_b = compute_nonlinear(st)
        # (b.grad)u = cos y d_x (0, cos x) = (0, -cos y sin x)
        # (u.grad)b = cos x d_y (cos y, 0) = (-cos x sin y, 0)
        # N_b = (cos x sin y, -sin x cos y)
        X, Y = g.meshgrid()
        from mhdwave.grid import RealField, transform_forward

        expect = transform_forward(RealField(
            np.stack([np.cos(X) * np.sin(Y), -np.sin(X) * np.cos(Y)]), g))
        assert np.max(np.abs(n_b.coeffs - expect.coeffs)) < 1e-14

    def test_energy_cancellation_random_states(self, grid16):
        worst = 0.0
        for seed in range(100):
            st = random_state(grid16, seed)
            n_u, n_b = compute_nonlinear(st)
            s = abs(spectral_inner(n_u, st.u_hat) + spectral_inner(n_b, st.b_hat))
            scale = (spectral_l2(st.u_hat) + spectral_l2(st.b_hat)) ** 3
            worst = max(worst, s / scale)
        assert worst <= 1e-10

    def test_outputs_mean_free_divergence_free(self, grid16):
        st = random_state(grid16, 7)
        n_u, n_b = compute_nonlinear(st)
        assert np.all(n_u.coeffs[:, 0, 0] == 0) and np.all(n_b.coeffs[:, 0, 0] == 0)
        assert np.max(np.abs(divergence(n_u))) <= 1e-12 * spectral_l2(n_u)

    def test_blowup_detection_carries_time(self, grid16):
        st = random_state(grid16, 8)
        st.t = 2.75
        st.u_hat.coeffs[0, 1, 1] = np.nan
        with pytest.raises(BlowUpError) as err:
            compute_nonlinear(st)
        assert err.value.t == 2.75


class TestStepExp:
    def test_zero_data_stays_zero(self, grid16):
        cfg = SolverConfig(gamma=0.5, dt=0.01, t_end=0.1, grid=grid16)
        st = State(zero_field(grid16), zero_field(grid16), zero_field(grid16), 0.0)
        out = step_exp(st, cfg)
        assert np.all(out.u_hat.coeffs == 0) and np.all(out.b_hat.coeffs == 0)

    def test_single_mode_closed_form(self, grid16):
        # 100 steps at dt=0.01 against the one-shot propagator
        gamma, dt, steps = 0.5, 0.01, 100
        cfg = SolverConfig(gamma=gamma, dt=dt, t_end=steps * dt, grid=grid16,
                           nonlinear=False)
        st = mode_state(grid16, (1, 0), b_amp=1.0)
        traj = run(cfg, (st.u_hat, st.b_hat, st.bt_hat), keep_states=True)
        final = traj.states[-1]
        m = mode_propagator(gamma, 1.0, steps * dt)
        got_b = final.b_hat.coeffs[1, 1, 0]
        got_bt = final.bt_hat.coeffs[1, 1, 0]
        assert abs(got_b - m.m00 * 0.5) <= 1e-10 * abs(m.m00 * 0.5)
        assert abs(got_bt - m.m10 * 0.5) <= 1e-10 * abs(m.m10 * 0.5)

    def test_heat_row_exact(self, grid16):
        cfg = SolverConfig(gamma=1.0, dt=0.05, t_end=1.0, grid=grid16, nonlinear=False)
        u0 = single_mode_field(grid16, (1, 0), 2.0)
        traj = run(cfg, (u0, zero_field(grid16), zero_field(grid16)), keep_states=True)
        got = traj.states[-1].u_hat.coeffs[1, 1, 0]
        assert got == pytest.approx(np.exp(-1.0) * 1.0, rel=1e-12)

    def test_hermitian_and_divergence_preserved(self, grid16):
        cfg = SolverConfig(gamma=0.8, dt=0.01, t_end=0.5, grid=grid16)
        u0 = random_divfree(grid16, 20)
        b0 = random_divfree(grid16, 21)
        u0 = SpectralVectorField(u0.coeffs * 0.05, grid16, True)
        b0 = SpectralVectorField(b0.coeffs * 0.05, grid16, True)
        traj = run(cfg, (u0, b0, zero_field(grid16)), keep_states=True)
        for st in traj.states[-1:]:
            for f in (st.u_hat, st.b_hat, st.bt_hat):
                assert hermitian_error(f) <= 1e-13 * max(np.max(np.abs(f.coeffs)), 1e-30)
                if spectral_l2(f) > 0:
                    assert np.max(np.abs(divergence(f))) <= 1e-10 * spectral_l2(f)


class TestStepImex:
    def test_dt_zero_identity(self, grid16):
        cfg = SolverConfig(gamma=0.5, dt=0.0, t_end=0.0, grid=grid16,
                           scheme="imex_reference", nonlinear=False)
        st = mode_state(grid16, (1, 0), b_amp=1.0, a_amp=0.3)
        out = step_imex(st, cfg)
        assert np.array_equal(out.b_hat.coeffs, st.b_hat.coeffs)
        assert np.array_equal(out.bt_hat.coeffs, st.bt_hat.coeffs)

    def test_linear_order_two(self, grid16):
        gamma = 0.5
        m = mode_propagator(gamma, 1.0, 1.0)
        errs = []
        for dt in (0.02, 0.01, 0.005):
            cfg = SolverConfig(gamma=gamma, dt=dt, t_end=1.0, grid=grid16,
                               scheme="imex_reference", nonlinear=False)
            st = mode_state(grid16, (1, 0), b_amp=1.0)
            traj = run(cfg, (st.u_hat, st.b_hat, st.bt_hat), keep_states=True)
            got = traj.states[-1].b_hat.coeffs[1, 1, 0]
            errs.append(abs(got - m.m00 * 0.5))
        r1 = errs[0] / errs[1]
        r2 = errs[1] / errs[2]
        assert 3.5 <= r1 <= 4.5 and 3.5 <= r2 <= 4.5

    def test_cross_scheme_agreement_order(self, grid16):
        # full nonlinear run: |exp - imex| shrinks ~4x under dt halving
        u0, b0, a0 = make_initial_data(
            "random_band", {"amplitude": 0.05, "k_max": 3.0, "seed": 3}, grid16
        )
        gaps = []
        for dt in (0.02, 0.01):
            finals = {}
            for scheme in ("exp_integrator", "imex_reference"):
                cfg = SolverConfig(gamma=0.5, dt=dt, t_end=1.0, grid=grid16, scheme=scheme)
                traj = run(cfg, (u0, b0, a0), keep_states=True)
                finals[scheme] = traj.states[-1]
            gap = spectral_l2(SpectralVectorField(
                finals["exp_integrator"].b_hat.coeffs - finals["imex_reference"].b_hat.coeffs,
                grid16))
            gaps.append(gap)
        ratio = gaps[0] / gaps[1]
        assert 2.5 <= ratio <= 6.0  # order >= 2 modulo the small-sample noise
        # the agreement constant C in |exp - imex| <= C dt^2 stays O(1)
        assert gaps[0] <= 10.0 * 0.02**2


class TestMhdBaseline:
    def test_single_mode_heat(self, grid16):
        cfg = SolverConfig(gamma=0.0, dt=0.05, t_end=1.0, grid=grid16,
                           scheme="mhd_baseline", nonlinear=False)
        b0 = single_mode_field(grid16, (1, 1), 1.0)
        traj = run(cfg, (zero_field(grid16), b0, zero_field(grid16)), keep_states=True)
        got = traj.states[-1].b_hat.coeffs[1, 1, 1]
        assert got == pytest.approx(0.5 * np.exp(-2.0), rel=1e-12)

    def test_taylor_green_b_stays_zero(self):
        g = GridSpec(32, 2 * np.pi)
        u0, _, _ = make_initial_data("taylor_green", {"amplitude": 0.1}, g)
        cfg = SolverConfig(gamma=0.0, dt=0.01, t_end=0.5, grid=g, scheme="mhd_baseline")
        traj = run(cfg, (u0, zero_field(g), zero_field(g)), keep_states=True)
        final = traj.states[-1]
        assert spectral_l2(final.b_hat) == 0.0
        assert spectral_l2(final.u_hat) < spectral_l2(u0)

    def test_small_gamma_exp_matches_baseline(self, grid16):
        u0, b0, a0 = make_initial_data(
            "random_band", {"amplitude": 0.05, "k_max": 3.0, "seed": 9}, grid16
        )
        finals = {}
        for scheme, gamma in (("exp_integrator", 1e-4), ("mhd_baseline", 0.0)):
            cfg = SolverConfig(gamma=gamma, dt=0.01, t_end=1.0, grid=grid16, scheme=scheme)
            traj = run(cfg, (u0, b0, a0), keep_states=True)
            finals[scheme] = traj.states[-1]
        gap = spectral_l2(SpectralVectorField(
            finals["exp_integrator"].b_hat.coeffs - finals["mhd_baseline"].b_hat.coeffs,
            grid16))
        assert gap <= 1e-2 * spectral_l2(finals["mhd_baseline"].b_hat)


class TestRun:
    def test_t_end_zero_single_snapshot(self, grid16):
        cfg = SolverConfig(gamma=1.0, dt=0.1, t_end=0.0, grid=grid16)
        u0 = random_divfree(grid16, 30)
        traj = run(cfg, (u0, u0, u0), observer=lambda s: {"n": spectral_l2(s.u_hat)})
        assert traj.times == [0.0]
        assert len(traj.snapshots) == 1

    def test_determinism(self, grid16):
        u0, b0, a0 = make_initial_data(
            "random_band", {"amplitude": 0.05, "k_max": 3.0, "seed": 4}, grid16
        )
        cfg = SolverConfig(gamma=0.5, dt=0.01, t_end=0.5, grid=grid16)
        obs = lambda s: {"e": spectral_l2(s.u_hat) ** 2 + spectral_l2(s.b_hat) ** 2}
        t1 = run(cfg, (u0, b0, a0), obs)
        t2 = run(cfg, (u0, b0, a0), obs)
        assert t1.snapshots == t2.snapshots  # bitwise-identical diagnostics

    def test_cfl_violation_aborts(self, grid16):
        u0, b0, _ = make_initial_data(
            "random_band", {"amplitude": 50.0, "k_max": 3.0, "seed": 5}, grid16
        )
        cfg = SolverConfig(gamma=0.5, dt=0.05, t_end=1.0, grid=grid16)
        with pytest.raises(StepSizeError):
            run(cfg, (u0, b0, zero_field(grid16)))

    def test_energy_monotone_under_exp_integrator(self, grid16):
        u0, b0, a0 = make_initial_data(
            "random_band", {"amplitude": 0.05, "k_max": 3.0, "seed": 6}, grid16
        )
        cfg = SolverConfig(gamma=0.0, dt=0.01, t_end=1.0, grid=grid16,
                           scheme="mhd_baseline")
        obs = lambda s: {"u2": spectral_l2(s.u_hat)}
        traj = run(cfg, (u0, b0, a0), obs)
        vals = traj.series("u2")
        assert np.all(np.diff(vals) <= 1e-14)

    def test_unknown_scheme_rejected(self, grid16):
        with pytest.raises(ConfigurationError):
            SolverConfig(gamma=1.0, dt=0.1, t_end=1.0, grid=grid16, scheme="leapfrog")

    def test_small_amplitude_run_stays_bounded(self, grid16):
        # sup_t of the energy functional never exceeds its initial value by
        # more than a small reported factor (no growth for small data)
        from mhdwave.diagnostics import norm_observer

        gamma, m = 0.5, 1.0
        u0, b0, a0 = make_initial_data(
            "random_band", {"amplitude": 0.05, "k_max": 3.0, "seed": 13}, grid16
        )
        cfg = SolverConfig(gamma=gamma, dt=0.01, t_end=2.0, grid=grid16)
        obs = norm_observer((2.0,), (m,), (m,), m=m, gamma=gamma)
        traj = run(cfg, (u0, b0, a0), obs)
        x = traj.series("X_m")
        factor = float(np.max(x) / x[0])
        assert factor <= 1.05
        hm_u = traj.series(f"u_H{m:g}") ** 2
        assert np.max(hm_u) <= 1.05 * x[0]
