import numpy as np
import pytest

from mhdwave.errors import ConfigurationError
from mhdwave.grid import GridSpec, divergence, spectral_l2, transform_inverse
from mhdwave.initial import make_initial_data


def spectral_div_rel(f):
    norm = spectral_l2(f)
    if norm == 0:
        return 0.0
    return np.max(np.abs(divergence(f))) / norm


class TestTaylorGreen:
    def test_exact_pattern(self):
        g = GridSpec(32, 2 * np.pi)
        amp = 1.7
        u0, b0, a0 = make_initial_data("taylor_green", {"amplitude": amp}, g)
        X, Y = g.meshgrid()
        u = transform_inverse(u0).values
        assert np.max(np.abs(u[0] - amp * np.sin(X) * np.cos(Y))) < 1e-13
        assert np.max(np.abs(u[1] + amp * np.cos(X) * np.sin(Y))) < 1e-13
        assert np.max(np.abs(divergence(u0))) < 1e-13

    def test_all_fields_divergence_free(self):
        g = GridSpec(32, 4 * np.pi)
        u0, b0, a0 = make_initial_data("taylor_green", {"amplitude": 0.3}, g)
        for f in (u0, b0, a0):
            assert spectral_div_rel(f) <= 1e-12
        assert spectral_l2(a0) == 0.0

    def test_zero_amplitude(self):
        g = GridSpec(16, 2 * np.pi)
        u0, b0, a0 = make_initial_data("taylor_green", {"amplitude": 0.0}, g)
        assert spectral_l2(u0) == 0.0 and spectral_l2(b0) == 0.0


class TestGaussianVortexPair:
    def test_divergence_and_tail(self):
        L = 16 * np.pi
        g = GridSpec(128, L)
        width = L / 16
        u0, b0, _ = make_initial_data(
            "gaussian_vortex_pair", {"amplitude": 1.0, "width": width}, g
        )
        assert spectral_div_rel(u0) <= 1e-12
        assert spectral_div_rel(b0) <= 1e-12
        u = transform_inverse(u0).magnitude()
        peak = np.max(u)
        assert peak == pytest.approx(1.0, rel=1e-12)  # peak-normalized amplitude
        # physical decay at distance L/2 from the center (box corner)
        corner = max(u[0, 0], u[0, -1], u[-1, 0], u[-1, -1])
        assert corner < 1e-8 * peak

    def test_amplitude_scaling_exact(self):
        g = GridSpec(64, 8 * np.pi)
        params = {"width": np.pi}
        a, _, _ = make_initial_data("gaussian_vortex_pair", dict(params, amplitude=1.0), g)
        b, _, _ = make_initial_data("gaussian_vortex_pair", dict(params, amplitude=2.5), g)
        assert np.allclose(b.coeffs, 2.5 * a.coeffs, rtol=0, atol=0)

    def test_wide_data_rejected(self):
        g = GridSpec(64, 8 * np.pi)
        with pytest.raises(ConfigurationError):
            make_initial_data(
                "gaussian_vortex_pair", {"amplitude": 1.0, "width": 2.1 * np.pi}, g
            )


class TestRandomBand:
    def test_divergence_free_and_band_limited(self):
        g = GridSpec(64, 4 * np.pi)
        u0, b0, a0 = make_initial_data(
            "random_band", {"amplitude": 0.1, "k_max": 3.0, "seed": 5}, g
        )
        assert spectral_div_rel(u0) <= 1e-12
        assert spectral_div_rel(b0) <= 1e-12
        outside = ~((g.kmag <= 3.0) & (g.k2 > 0))
        assert np.max(np.abs(u0.coeffs[:, outside])) == 0.0

    def test_seed_reproducibility(self):
        g = GridSpec(32, 2 * np.pi)
        p = {"amplitude": 1.0, "k_max": 4.0, "seed": 42}
        a, _, _ = make_initial_data("random_band", dict(p), g)
        b, _, _ = make_initial_data("random_band", dict(p), g)
        c, _, _ = make_initial_data("random_band", dict(p, seed=43), g)
        assert np.array_equal(a.coeffs, b.coeffs)
        assert not np.array_equal(a.coeffs, c.coeffs)

    def test_flat_profile_modulus(self):
        # spectral_exponent 0: every retained band mode has equal |psi| * |k|
        g = GridSpec(32, 2 * np.pi)
        u0, _, _ = make_initial_data(
            "random_band", {"amplitude": 1.0, "k_min": 1.5, "k_max": 3.5, "seed": 1}, g
        )
        band = (g.kmag >= 1.5) & (g.kmag <= 3.5) & g.dealias_mask
        mods = np.sqrt(np.abs(u0.coeffs[0][band]) ** 2 + np.abs(u0.coeffs[1][band]) ** 2)
        assert np.max(mods) / np.min(mods) == pytest.approx(1.0, rel=1e-10)

    def test_a0_amplitude(self):
        g = GridSpec(32, 2 * np.pi)
        _, _, a0 = make_initial_data(
            "random_band", {"amplitude": 1.0, "k_max": 4.0, "seed": 2, "a0_amplitude": 0.5}, g
        )
        assert spectral_l2(a0) > 0
        assert np.max(np.abs(transform_inverse(a0).magnitude())) == pytest.approx(0.5)


def test_unknown_family_rejected():
    g = GridSpec(16, 2 * np.pi)
    with pytest.raises(ConfigurationError):
        make_initial_data("plume", {"amplitude": 1.0}, g)


def test_unknown_param_rejected():
    g = GridSpec(16, 2 * np.pi)
    with pytest.raises(ConfigurationError):
        make_initial_data("taylor_green", {"amplitude": 1.0, "vorticity": 3}, g)
