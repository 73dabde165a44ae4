import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cvples.grid import Grid, ThermoParams

settings.register_profile("cvples", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("cvples")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def cube16():
    return Grid.cube(16)


@pytest.fixture
def thermo():
    return ThermoParams(gamma=1.4, mu=1e-3)


def band_limited(grid, rng, kmax=3, ncomp=None):
    """Random real periodic field with modes |k_i| <= kmax (in box units)."""
    x, y, z = grid.mesh()
    shape = grid.shape if ncomp is None else (ncomp,) + grid.shape
    out = np.zeros(shape)
    for _ in range(6):
        k = rng.integers(-kmax, kmax + 1, size=3)
        phase = rng.uniform(0, 2 * np.pi, size=() if ncomp is None else (ncomp, 1, 1, 1))
        amp = rng.normal(size=() if ncomp is None else (ncomp, 1, 1, 1))
        arg = 2 * np.pi * (k[0] * x / grid.lx + k[1] * y / grid.ly + k[2] * z / grid.lz)
        out = out + amp * np.cos(arg + phase)
    return out


def spectral_field(grid, rng, ncomp=3, slope=-5.0 / 3.0, k0=2.0):
    """Random periodic field with a ``k^slope`` energy spectrum above ``k0``."""
    kx, ky, kz = np.meshgrid(*(np.fft.fftfreq(n, 1.0 / n) for n in grid.shape), indexing="ij")
    k = np.sqrt(kx**2 + ky**2 + kz**2)
    amp = np.where(k > 0, (k / k0) ** 4 / (1 + (k / k0) ** 4) * np.maximum(k, 1.0) ** ((slope - 2) / 2), 0.0)
    out = np.empty((ncomp,) + grid.shape)
    for c in range(ncomp):
        noise = np.fft.fftn(rng.normal(size=grid.shape))
        out[c] = np.fft.ifftn(noise * amp).real
    out /= np.sqrt((out**2).mean())
    return out if ncomp > 1 else out[0]


# -- acceptance report -----------------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """``report(label, ok, detail)`` records one PASS/FAIL acceptance line."""
    def _report(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label:<4} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
