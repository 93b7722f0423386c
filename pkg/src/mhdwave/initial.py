"""Divergence-free initial data families.

All velocity-like fields are built from stream functions, ``u = grad^perp
psi``, so they are divergence-free to machine precision.  Each family
returns a triple ``(u0, b0, a0)``; ``a0`` (the initial magnetic time
derivative) defaults to zero.

Families
--------
``taylor_green``
    The classical cellular flow ``A (sin kx cos ky, -cos kx sin ky)`` with
    ``k = 2*pi/L``; ``b0`` is the same pattern shifted by a quarter box so
    the cross terms do not vanish identically.
``gaussian_vortex_pair``
    Two opposite-signed Gaussian stream-function bumps (a localized vortex
    dipole); the magnetic dipole is rotated 90 degrees.  Physical-space
    tails are Gaussian, so the data emulates integrable (L^1-type) data on
    the plane.
``random_band``
    Random-phase, deterministic-modulus fields with a prescribed isotropic
    spectral profile ``|u_hat(k)| ~ |k|**spectral_exponent`` supported on
    ``k_min <= |k| <= k_max``.  A flat profile (exponent 0) reproduces the
    low-frequency signature of borderline-integrable plane data, which is
    what makes algebraic decay rates observable on the torus.

Randomness flows through a counter-based generator (numpy Philox keyed by
the seed), so draws are reproducible across platforms.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox

from .errors import ConfigurationError
from .grid import GridSpec, SpectralVectorField, dealias, transform_inverse

__all__ = ["make_initial_data", "INITIAL_FAMILIES"]

INITIAL_FAMILIES = ("taylor_green", "gaussian_vortex_pair", "random_band")


def _from_stream(psi_hat: np.ndarray, grid: GridSpec) -> SpectralVectorField:
    """Velocity u = grad^perp psi = (-d_y psi, d_x psi) from a spectral psi."""
    ny = grid.nyquist_free
    coeffs = np.empty((2, grid.n, grid.n), dtype=np.complex128)
    coeffs[0] = -1j * grid.ky * psi_hat * ny
    coeffs[1] = 1j * grid.kx * psi_hat * ny
    coeffs[:, 0, 0] = 0.0
    return SpectralVectorField(coeffs, grid, divergence_free=True)


def _zero_field(grid: GridSpec) -> SpectralVectorField:
    return SpectralVectorField(
        np.zeros((2, grid.n, grid.n), dtype=np.complex128), grid, divergence_free=True
    )


def _peak_normalized(field: SpectralVectorField, amplitude: float) -> SpectralVectorField:
    """Scale so the grid maximum of |u| equals ``amplitude``.

    Normalizes to a unit-peak shape first and multiplies by the amplitude
    last, so scaling in the amplitude parameter is exactly linear.
    """
    peak = float(np.max(transform_inverse(field).magnitude()))
    if peak == 0.0:
        return field
    unit = field.coeffs * (1.0 / peak)
    return SpectralVectorField(unit * amplitude, field.grid, True)


def _taylor_green(grid: GridSpec, amplitude: float, amplitude_b: float):
    kappa = 2.0 * np.pi / grid.box_length
    # psi = -(1/kappa) sin(kx) sin(ky)  =>  u = (sin kx cos ky, -cos kx sin ky)
    psi = np.zeros((grid.n, grid.n), dtype=np.complex128)
    i, j = 1, 1
    # sin(kx)sin(ky) = -1/4 (e^{i(x+y)k} + e^{-i(x+y)k} - e^{i(x-y)k} - e^{-i(x-y)k})
    psi[i, j] = psi[-i, -j] = -0.25
    psi[i, -j] = psi[-i, j] = 0.25
    u0 = _from_stream(-psi / kappa, grid)
    u0 = SpectralVectorField(u0.coeffs * amplitude, grid, True)
    # b: quarter-box shift in y, sin(kx)sin(k(y+L/4)) = sin(kx)cos(ky)
    psi_b = np.zeros_like(psi)
    psi_b[i, j] = psi_b[i, -j] = -0.25j
    psi_b[-i, j] = psi_b[-i, -j] = 0.25j
    b0 = _from_stream(-psi_b / kappa, grid)
    b0 = SpectralVectorField(b0.coeffs * amplitude_b, grid, True)
    return u0, b0


def _gaussian_pair_stream(grid: GridSpec, width: float, centers, signs) -> np.ndarray:
    """Spectral stream function of signed Gaussian bumps exp(-|x-c|^2/(2 w^2))."""
    psi = np.zeros((grid.n, grid.n), dtype=np.complex128)
    envelope = (2.0 * np.pi * width**2 / grid.box_length**2) * np.exp(-0.5 * width**2 * grid.k2)
    for c, s in zip(centers, signs):
        phase = np.exp(-1j * (grid.kx * c[0] + grid.ky * c[1]))
        psi += s * envelope * phase
    return psi


def _gaussian_vortex_pair(grid: GridSpec, amplitude: float, amplitude_b: float,
                          width: float, separation: float):
    L = grid.box_length
    if width >= L / 4:
        raise ConfigurationError(
            f"width {width} too large for box {L}: data would not be localized",
            path="initial_data.width",
        )
    cx = cy = L / 2
    d = separation / 2
    psi_u = _gaussian_pair_stream(grid, width, [(cx, cy - d), (cx, cy + d)], [1.0, -1.0])
    psi_b = _gaussian_pair_stream(grid, width, [(cx - d, cy), (cx + d, cy)], [1.0, -1.0])
    u0 = _peak_normalized(_from_stream(psi_u, grid), amplitude)
    b0 = _peak_normalized(_from_stream(psi_b, grid), amplitude_b)
    return u0, b0


def _random_phases(grid: GridSpec, rng: Generator) -> np.ndarray:
    """Hermitian-symmetric unit-modulus phases (from the spectrum of real noise)."""
    noise = rng.standard_normal((grid.n, grid.n))
    spec = np.fft.fft2(noise)
    mag = np.abs(spec)
    return np.where(mag > 0, spec / np.where(mag > 0, mag, 1.0), 1.0)


def _random_band_field(grid: GridSpec, rng: Generator, k_min: float, k_max: float,
                       spectral_exponent: float) -> SpectralVectorField:
    kmag = grid.kmag
    band = (kmag >= k_min) & (kmag <= k_max) & (grid.k2 > 0) & grid.dealias_mask
    profile = np.where(band, np.where(grid.k2 > 0, kmag, 1.0) ** spectral_exponent, 0.0)
    psi_hat = _random_phases(grid, rng) * profile / np.where(grid.k2 > 0, kmag, 1.0)
    return _from_stream(psi_hat, grid)


def make_initial_data(family: str, params: dict, grid: GridSpec):
    """Construct divergence-free initial data ``(u0, b0, a0)``.

    Parameters
    ----------
    family : str
        One of ``INITIAL_FAMILIES``.
    params : dict
        ``amplitude`` (> 0, required) scales u0 and, unless ``amplitude_b``
        is given, b0.  Family-specific keys: ``width``/``separation`` for
        the Gaussian pair; ``k_min``/``k_max``/``spectral_exponent``/
        ``seed``/``a0_amplitude`` for the random band.

    Returns
    -------
    (u0, b0, a0) : three SpectralVectorField, all divergence-free.
    """
    params = dict(params)
    amplitude = params.pop("amplitude", None)
    if amplitude is None or amplitude < 0:
        raise ConfigurationError("params must include amplitude >= 0",
                                 path="initial_data.amplitude")
    amplitude_b = params.pop("amplitude_b", amplitude)
    a0 = _zero_field(grid)

    if family == "taylor_green":
        params.pop("seed", None)
        u0, b0 = _taylor_green(grid, amplitude, amplitude_b)
    elif family == "gaussian_vortex_pair":
        width = params.pop("width", grid.box_length / 16)
        separation = params.pop("separation", width)
        params.pop("seed", None)
        u0, b0 = _gaussian_vortex_pair(grid, amplitude, amplitude_b, width, separation)
    elif family == "random_band":
        seed = int(params.pop("seed", 0))
        k_min = params.pop("k_min", 2.0 * np.pi / grid.box_length)
        k_max = params.pop("k_max", grid.n / 8 * 2.0 * np.pi / grid.box_length)
        slope = params.pop("spectral_exponent", 0.0)
        a0_amplitude = params.pop("a0_amplitude", 0.0)
        rng = Generator(Philox(key=seed))
        u0 = _peak_normalized(_random_band_field(grid, rng, k_min, k_max, slope), amplitude)
        b0 = _peak_normalized(_random_band_field(grid, rng, k_min, k_max, slope), amplitude_b)
        if a0_amplitude > 0:
            a0 = _peak_normalized(
                _random_band_field(grid, rng, k_min, k_max, slope), a0_amplitude
            )
    else:
        raise ConfigurationError(f"unknown initial data family {family!r}",
                                 path="initial_data.family")
    if params:
        raise ConfigurationError(f"unknown initial-data keys {sorted(params)}",
                                 path="initial_data")
    # keep initial data inside the retained band so products stay alias-free
    return dealias(u0), dealias(b0), dealias(a0)
