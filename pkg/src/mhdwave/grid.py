"""Periodic-box spectral infrastructure.

A square box of side ``L`` is discretized with ``n`` points per axis.
Real fields live on the physical grid; spectral fields hold complex
Fourier coefficients in numpy FFT layout (wavenumber ``2*pi*j/L`` at
index ``j``, negative frequencies in the upper half).

Normalization: the forward transform divides by ``n**2`` and the inverse
multiplies, so a coefficient is the amplitude of ``exp(i k.x)`` and
Parseval reads ``||f||_L2^2 = L^2 * sum_k |f_hat(k)|^2``.

Nyquist modes (index ``n/2``) carry an ambiguous sign of k and are zeroed
by every multiplier application to keep derivative operators
skew-symmetric; the bare transforms leave them untouched so round trips
are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "GridSpec",
    "RealField",
    "SpectralVectorField",
    "WaveVector",
    "transform_forward",
    "transform_inverse",
    "fractional_laplacian_apply",
    "leray_project",
    "dealias",
    "gradient",
    "divergence",
    "spectral_l2",
    "spectral_inner",
    "hermitian_error",
]


@dataclass(frozen=True)
class GridSpec:
    """Geometry and resolution of the periodic box.

    Parameters
    ----------
    n : int
        Points per axis; must be even and at least 8 (powers of two give
        the fastest transforms).
    box_length : float
        Physical side length L of the box.
    """

    n: int
    box_length: float

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ConfigurationError(f"n must be even and >= 8, got {self.n}", path="grid.n")
        if not self.box_length > 0:
            raise ConfigurationError(
                f"box_length must be positive, got {self.box_length}", path="grid.box_length"
            )

    @cached_property
    def k1d(self) -> np.ndarray:
        """1D wavenumbers 2*pi*j/L in FFT order."""
        return 2.0 * np.pi / self.box_length * np.fft.fftfreq(self.n, 1.0 / self.n)

    @cached_property
    def kx(self) -> np.ndarray:
        return self.k1d[:, None] * np.ones((1, self.n))

    @cached_property
    def ky(self) -> np.ndarray:
        return np.ones((self.n, 1)) * self.k1d[None, :]

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def nyquist_free(self) -> np.ndarray:
        """Mask selecting modes without a Nyquist index on either axis."""
        idx = np.fft.fftfreq(self.n, 1.0 / self.n)
        ok = np.abs(idx) != self.n // 2
        return ok[:, None] & ok[None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule with strict inequality retained at the cutoff."""
        cutoff = (self.n / 3.0) * (2.0 * np.pi / self.box_length)
        return (np.abs(self.kx) < cutoff) & (np.abs(self.ky) < cutoff)

    @cached_property
    def half(self) -> int:
        """Columns of the rfft2 half spectrum (n // 2 + 1)."""
        return self.n // 2 + 1

    @cached_property
    def kx_half(self) -> np.ndarray:
        return np.ascontiguousarray(self.kx[:, : self.half])

    @cached_property
    def ky_half(self) -> np.ndarray:
        return np.ascontiguousarray(self.ky[:, : self.half])

    @cached_property
    def nyquist_free_half(self) -> np.ndarray:
        return np.ascontiguousarray(self.nyquist_free[:, : self.half])

    @cached_property
    def dealias_mask_half(self) -> np.ndarray:
        return np.ascontiguousarray(self.dealias_mask[:, : self.half])

    @cached_property
    def k2_half(self) -> np.ndarray:
        return np.ascontiguousarray(self.k2[:, : self.half])

    @cached_property
    def x1d(self) -> np.ndarray:
        return self.box_length / self.n * np.arange(self.n)

    @property
    def cell_area(self) -> float:
        return (self.box_length / self.n) ** 2

    def meshgrid(self):
        return np.meshgrid(self.x1d, self.x1d, indexing="ij")


@dataclass(frozen=True)
class WaveVector:
    """A single wavevector with its squared magnitude."""

    kx: float
    ky: float

    @property
    def k2(self) -> float:
        return self.kx**2 + self.ky**2


@dataclass
class RealField:
    """Field values on the physical grid, shape (c, n, n) with c in {1, 2}."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 2:
            v = v[None, :, :]
        if v.ndim != 3 or v.shape[0] not in (1, 2) or v.shape[1:] != (self.grid.n, self.grid.n):
            raise ConfigurationError(
                f"field shape {np.shape(self.values)} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("field contains non-finite entries")
        self.values = v

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude (the scalar itself for 1 component)."""
        if self.ncomp == 1:
            return np.abs(self.values[0])
        return np.sqrt(self.values[0] ** 2 + self.values[1] ** 2)


@dataclass
class SpectralVectorField:
    """Complex Fourier coefficients, shape (c, n, n) with c in {1, 2}.

    Hermitian symmetry (coefficient at -k conjugate to the one at k) is an
    invariant of every constructor in this package; ``hermitian_error``
    measures violations.
    """

    coeffs: np.ndarray
    grid: GridSpec
    divergence_free: bool = field(default=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim == 2:
            c = c[None, :, :]
        if c.ndim != 3 or c.shape[0] not in (1, 2) or c.shape[1:] != (self.grid.n, self.grid.n):
            raise ConfigurationError(
                f"coefficient shape {np.shape(self.coeffs)} does not match grid n={self.grid.n}"
            )
        self.coeffs = c

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.coeffs.copy(), self.grid, self.divergence_free)

    def mean_coefficient(self) -> np.ndarray:
        return self.coeffs[:, 0, 0]


def transform_forward(f: RealField, grid: GridSpec | None = None) -> SpectralVectorField:
    """Physical values -> Fourier coefficients (divides by n^2)."""
    if grid is not None and grid is not f.grid and grid != f.grid:
        raise ConfigurationError("field grid does not match the requested grid")
    g = f.grid
    coeffs = np.fft.fft2(f.values, axes=(-2, -1)) / g.n**2
    return SpectralVectorField(coeffs, g)


def transform_inverse(f: SpectralVectorField) -> RealField:
    """Fourier coefficients -> physical values (multiplies by n^2)."""
    g = f.grid
    vals = np.real(np.fft.ifft2(f.coeffs, axes=(-2, -1))) * g.n**2
    return RealField(vals, g)


def _apply_multiplier(f: SpectralVectorField, mult: np.ndarray,
                      divergence_free: bool | None = None) -> SpectralVectorField:
    """Apply a scalar spectral multiplier, zeroing Nyquist modes."""
    g = f.grid
    out = f.coeffs * np.where(g.nyquist_free, mult, 0.0)
    if divergence_free is None:
        divergence_free = f.divergence_free
    return SpectralVectorField(out, g, divergence_free)


def fractional_laplacian_apply(f: SpectralVectorField, s: float) -> SpectralVectorField:
    """Multiply each coefficient by |k|^s.

    ``s = 0`` is the identity.  For ``s > 0`` the k=0 coefficient is set to
    zero; for ``s < 0`` the input must be mean-free (the operator is
    undefined on constants).
    """
    if s == 0:
        return f.copy()
    g = f.grid
    mean = np.max(np.abs(f.mean_coefficient()))
    if s < 0 and mean != 0.0:
        raise DomainError(f"negative-order multiplier on a field with nonzero mean ({mean:.3e})")
    kmag = np.where(g.k2 > 0, g.kmag, 1.0)
    mult = np.where(g.k2 > 0, kmag**s, 0.0)
    return _apply_multiplier(f, mult)


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """Project onto divergence-free fields: f_hat -> f_hat - k (k.f_hat)/|k|^2."""
    if f.ncomp != 2:
        raise ConfigurationError("Leray projection requires a 2-component field")
    g = f.grid
    k2safe = np.where(g.k2 > 0, g.k2, 1.0)
    kdotf = g.kx * f.coeffs[0] + g.ky * f.coeffs[1]
    frac = np.where((g.k2 > 0) & g.nyquist_free, kdotf / k2safe, 0.0)
    out = np.empty_like(f.coeffs)
    out[0] = np.where(g.nyquist_free, f.coeffs[0], 0.0) - g.kx * frac
    out[1] = np.where(g.nyquist_free, f.coeffs[1], 0.0) - g.ky * frac
    # k=0 mode passes through unchanged
    out[:, 0, 0] = f.coeffs[:, 0, 0]
    return SpectralVectorField(out, g, divergence_free=True)


def dealias(f: SpectralVectorField) -> SpectralVectorField:
    """Zero every mode with max(|kx|,|ky|) at or beyond the 2/3 cutoff."""
    g = f.grid
    return SpectralVectorField(f.coeffs * g.dealias_mask, g, f.divergence_free)


def gradient(f: SpectralVectorField, component: int = 0) -> SpectralVectorField:
    """Spectral gradient (d/dx, d/dy) of one component, Nyquist zeroed."""
    g = f.grid
    ny = g.nyquist_free
    comp = f.coeffs[component]
    out = np.empty((2, g.n, g.n), dtype=np.complex128)
    out[0] = 1j * g.kx * comp * ny
    out[1] = 1j * g.ky * comp * ny
    return SpectralVectorField(out, g)


def divergence(f: SpectralVectorField) -> np.ndarray:
    """Spectral divergence i k . f_hat as a raw (n, n) array."""
    if f.ncomp != 2:
        raise ConfigurationError("divergence requires a 2-component field")
    g = f.grid
    return 1j * (g.kx * f.coeffs[0] + g.ky * f.coeffs[1]) * g.nyquist_free


def spectral_l2(f: SpectralVectorField) -> float:
    """L2 norm via Parseval: L * sqrt(sum |f_hat|^2)."""
    return float(f.grid.box_length * np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def spectral_inner(f: SpectralVectorField, h: SpectralVectorField) -> float:
    """Real L2 inner product of the underlying real fields."""
    return float(f.grid.box_length**2 * np.sum(np.real(f.coeffs * np.conj(h.coeffs))))


def hermitian_error(f: SpectralVectorField) -> float:
    """Max |f_hat(-k) - conj(f_hat(k))| over all modes."""
    c = f.coeffs
    mirrored = np.conj(c[:, ::-1, ::-1])
    mirrored = np.roll(mirrored, (1, 1), axis=(1, 2))
    return float(np.max(np.abs(c - mirrored)))


def expand_half_spectrum(half_arr: np.ndarray, n: int) -> np.ndarray:
    """Rebuild the full (..., n, n) spectrum from an rfft2 half spectrum.

    The redundant columns are filled by the Hermitian mirror
    full[i, n-j] = conj(half[(n-i) % n, j]); the self-conjugate columns
    (0 and n/2) are taken from the half spectrum as is.
    """
    half = n // 2 + 1
    shape = half_arr.shape[:-2] + (n, n)
    full = np.empty(shape, dtype=np.complex128)
    full[..., :, :half] = half_arr
    body = np.conj(half_arr[..., :, n // 2 - 1 : 0 : -1])  # cols n/2-1 .. 1
    full[..., 0, half:] = body[..., 0, :]
    full[..., 1:, half:] = body[..., :0:-1, :]
    return full
