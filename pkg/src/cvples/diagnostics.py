"""Scalar, spectral and vortex-tracking diagnostics."""
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from .compact import gradient
from .cvp import vorticity_from_gradient
from .errors import DegenerateFit, NonCubicGrid, TooFewSamples
from .grid import volume_average


def kinetic_energy(state):
    """Volume-averaged ``E = <u.u> / 2`` (velocity, not momentum, as printed)."""
    u = state.q[1:4] / state.q[0]
    return float(volume_average(0.5 * (u * u).sum(axis=0)))


def dissipation_series(E, t=None, dt=None):
    """``eps = dE/dt`` from sampled energies.

    Second-order central differences inside, one-sided at the ends. Sample
    times are given either as an array ``t`` (possibly non-uniform) or as a
    uniform spacing ``dt``. With this sign convention decaying turbulence has
    ``eps < 0``; the dissipation peak is the minimum of the series.
    """
    E = np.asarray(E, dtype=np.float64)
    if E.ndim != 1 or E.size < 3:
        raise TooFewSamples(f"need at least 3 energy samples, got {E.size}")
    if t is None:
        if dt is None or not dt > 0.0:
            raise ValueError("give sample times t or a positive spacing dt")
        return np.gradient(E, float(dt))
    t = np.asarray(t, dtype=np.float64)
    if t.shape != E.shape or np.any(np.diff(t) <= 0.0):
        raise ValueError("t must be strictly increasing and match E")
    return np.gradient(E, t)


def sgs_dissipation(mut, strain):
    """``eps_SGS = <mu_t S:S>`` (no factor two); ``strain`` is a StrainRate or ``|S|``."""
    if mut is None:
        return 0.0
    mag = getattr(strain, "magnitude", strain)
    return float(volume_average(np.asarray(mut) * np.asarray(mag) ** 2))


def peak_dissipation_time(t, E):
    """Time of maximal dissipation, i.e. of the most negative ``dE/dt``."""
    eps = dissipation_series(E, t)
    return float(np.asarray(t)[int(np.argmin(eps))])


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


def energy_spectrum(u, grid=None):
    """Shell-summed spectrum ``E(k) = 1/2 sum |u_hat / N|^2`` over ``k - 1/2 <= |k| < k + 1/2``.

    Wavenumbers are integer mode indices. Returns ``(k, E_k)`` with
    ``sum(E_k)`` equal to the volume-averaged ``|u|^2 / 2`` (Parseval).
    """
    u = np.asarray(u, dtype=np.float64)
    shape = u.shape[1:]
    if len(set(shape)) != 1 or (grid is not None and not grid.is_isotropic):
        raise NonCubicGrid(f"spectra need a cubic grid, got {shape}")
    n = shape[0]
    size = float(n) ** 3
    density = np.zeros(shape)
    for comp in u:
        uh = np.fft.fftn(comp) / size
        density += 0.5 * (uh.real**2 + uh.imag**2)
    k1 = np.fft.fftfreq(n, 1.0 / n)
    kk = np.sqrt(k1[:, None, None] ** 2 + k1[None, :, None] ** 2 + k1[None, None, :] ** 2)
    shell = np.floor(kk + 0.5).astype(np.int64)
    e_k = np.bincount(shell.ravel(), weights=density.ravel())
    return np.arange(e_k.size), e_k


# ---------------------------------------------------------------------------
# helix deviation
# ---------------------------------------------------------------------------


def _parabolic_offset(fm, f0, fp):
    den = fm - 2.0 * f0 + fp
    if den >= 0.0:
        return 0.0
    return float(np.clip(0.5 * (fm - fp) / den, -0.5, 0.5))


def core_radii(omega_mag, grid, center=None):
    """Radial distance of the ``|omega|`` maximum from the axis, per y-plane.

    Ties resolve to the smallest flattened ``(x, z)`` index; the position is
    refined with a 3-point parabola in x and z.
    """
    xc, zc = center if center is not None else (grid.origin[0] + 0.5 * grid.lx,
                                                 grid.origin[2] + 0.5 * grid.lz)
    nx, ny, nz = omega_mag.shape
    xs, zs = grid.axis_coords(0), grid.axis_coords(2)
    r = np.empty(ny)
    for j in range(ny):
        plane = omega_mag[:, j, :]
        i, k = np.unravel_index(int(np.argmax(plane)), plane.shape)
        f0 = plane[i, k]
        ox = _parabolic_offset(plane[(i - 1) % nx, k], f0, plane[(i + 1) % nx, k])
        oz = _parabolic_offset(plane[i, (k - 1) % nz], f0, plane[i, (k + 1) % nz])
        r[j] = np.hypot(xs[i] + ox * grid.dx - xc, zs[k] + oz * grid.dz - zc)
    return r


def vortex_deviation(state, radius, center=None):
    """``d = mean_y |r(y) - R|`` with ``r`` from :func:`core_radii`."""
    u = state.q[1:4] / state.q[0]
    w = vorticity_from_gradient(gradient(u, state.grid))
    mag = np.sqrt((w * w).sum(axis=0))
    return float(np.mean(np.abs(core_radii(mag, state.grid, center) - radius)))


class GrowthFit(NamedTuple):
    rate: float
    intercept: float
    r2: float
    samples: int


def growth_rate_fit(t, d, window=None, min_r2=0.5):
    """Least-squares slope of ``ln d`` against ``t`` inside ``window``.

    Raises DegenerateFit for fewer than 4 samples in the window or a fit
    quality ``R^2 < min_r2``.
    """
    t = np.asarray(t, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    sel = np.ones(t.shape, dtype=bool) if window is None else (t >= window[0]) & (t <= window[1])
    sel &= d > 0.0
    if sel.sum() < 4:
        raise DegenerateFit(f"only {int(sel.sum())} usable samples in window {window}")
    ts, ys = t[sel], np.log(d[sel])
    slope, intercept = np.polyfit(ts, ys, 1)
    resid = ys - (slope * ts + intercept)
    sst = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / sst if sst > 0.0 else 1.0
    if r2 < min_r2:
        raise DegenerateFit(f"fit quality R^2={r2:.3f} below {min_r2}")
    return GrowthFit(float(slope), float(intercept), r2, int(sel.sum()))


def best_growth_window(t, d, min_span, min_samples=4):
    """Growth window of length ``>= min_span`` whose ``ln d`` fit has the best ``R^2``.

    Only windows with a positive rate qualify. Returns ``(GrowthFit, (t0, t1))``
    with window ends at sample times; raises DegenerateFit if none qualifies.
    """
    t = np.asarray(t, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    best = None
    for i in range(t.size):
        for j in range(i + min_samples - 1, t.size):
            if t[j] - t[i] < min_span:
                continue
            try:
                fit = growth_rate_fit(t, d, (t[i], t[j]), min_r2=-np.inf)
            except DegenerateFit:
                continue
            if fit.rate > 0.0 and (best is None or fit.r2 > best[0].r2):
                best = (fit, (float(t[i]), float(t[j])))
    if best is None:
        raise DegenerateFit(f"no growing window of span >= {min_span}")
    return best


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    """One diagnostics sample.

    ``mean_f`` is 1 when the CvP correction is off; the sigma extrema are then NaN.
    """

    step: int
    t: float
    E: float
    eps_sgs: float
    mean_f: float
    max_mut: float
    dt: float
    min_rho: float
    max_div: float
    sigma_min: float = float("nan")
    sigma_max: float = float("nan")
    d: Optional[float] = None

    def __post_init__(self):
        if self.E < 0.0:
            raise ValueError("E must be non-negative")
        if not 0.0 <= self.mean_f <= 1.0:
            raise ValueError(f"mean_f={self.mean_f} outside [0, 1]")

    @classmethod
    def columns(cls, with_d=False):
        names = [f.name for f in fields(cls)]
        return names if with_d else names[:-1]

    def row(self, with_d=False):
        values = asdict(self)
        return [values[c] for c in self.columns(with_d)]
