import numpy as np
import pytest

from mhdwave.grid import (
    GridSpec,
    RealField,
    SpectralVectorField,
    dealias,
    leray_project,
    transform_forward,
)
from mhdwave.solver import State


@pytest.fixture
def grid16():
    return GridSpec(16, 2 * np.pi)


@pytest.fixture
def grid32():
    return GridSpec(32, 2 * np.pi)


def random_spectral(grid, seed, ncomp=2):
    """Hermitian random spectral field (built from real white noise)."""
    rng = np.random.default_rng(seed)
    f = RealField(rng.standard_normal((ncomp, grid.n, grid.n)), grid)
    return transform_forward(f)


def random_divfree(grid, seed):
    """Random divergence-free, dealiased, mean-free 2-component field."""
    f = dealias(leray_project(random_spectral(grid, seed)))
    f.coeffs[:, 0, 0] = 0.0
    return f


def random_state(grid, seed):
    return State(
        random_divfree(grid, seed),
        random_divfree(grid, seed + 1000),
        random_divfree(grid, seed + 2000),
        0.0,
    )


def single_mode_field(grid, kindex, amplitude=1.0, component=1):
    """Hermitian pair at +-kindex in the given component (divergence-free
    when the polarization is orthogonal to k)."""
    c = np.zeros((2, grid.n, grid.n), dtype=np.complex128)
    i, j = kindex
    c[component, i % grid.n, j % grid.n] = amplitude / 2.0
    c[component, (-i) % grid.n, (-j) % grid.n] = amplitude / 2.0
    return SpectralVectorField(c, grid, divergence_free=True)


def zero_field(grid):
    return SpectralVectorField(
        np.zeros((2, grid.n, grid.n), dtype=np.complex128), grid, divergence_free=True
    )
