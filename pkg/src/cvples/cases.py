"""Initial conditions: Taylor-Green vortex and the periodic double helical vortex.

Helix geometry: the helix axis is the line ``x = lx/2, z = lz/2`` parallel to
``y``; filament ``k`` of ``n_filaments`` is

    X_k(theta) = (xc + R cos(theta + 2 pi k / N), l theta, zc + R sin(theta + 2 pi k / N))

with ``l = h / 2 pi``. The velocity is the regularised Biot-Savart integral
along all filaments over ``n_turns`` periods plus ``image_layers`` periodic
images on each side.

The filaments carry a net circulation ``N Gamma`` about the helix axis, whose
free-space swirl decays like ``1/r`` and is not periodic in x and z. It is
replaced by a periodic counterpart: a straight reference filament of the same
circulation and axial extent (wide ``n = 1`` core, closed form) is subtracted,
and the periodic solution of the same vortex profile (mean vorticity removed,
2D spectral Poisson solve) is added back.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import _jit
from .errors import DomainMismatch, QuadratureNotConverged
from .grid import Grid, ThermoParams, conserved_encode


# ---------------------------------------------------------------------------
# Taylor-Green vortex
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TgvParams:
    re: float = 5000.0
    mach: float = 0.1
    L: float = 1.0
    V0: float = 1.0
    rho0: float = 1.0

    def __post_init__(self):
        if not self.re > 0.0:
            raise ValueError("re must be positive")
        if not 0.0 < self.mach <= 0.3:
            raise ValueError(f"mach={self.mach} outside (0, 0.3]")
        if not (self.L > 0.0 and self.V0 > 0.0 and self.rho0 > 0.0):
            raise ValueError("L, V0 and rho0 must be positive")

    def thermo(self, gamma=1.4, prandtl=0.71, prandtl_t=0.5):
        """Gas properties with ``r = V0^2 / T_ref`` scaled to one."""
        return ThermoParams(gamma=gamma, mu=self.rho0 * self.V0 * self.L / self.re,
                            prandtl=prandtl, prandtl_t=prandtl_t, cp=gamma / (gamma - 1.0))

    def grid(self, n):
        return Grid.cube(n, 2.0 * np.pi * self.L, centered=True)


def tgv_fields(grid, params, thermo):
    """Primitive TGV fields ``(rho, u, p)`` sampled on the grid."""
    L = params.L
    span = 2.0 * np.pi * L
    for a, (length, o) in enumerate(zip(grid.lengths, grid.origin)):
        if abs(length - span) > 1e-12 * span or abs(o + np.pi * L) > 1e-12 * span:
            raise DomainMismatch(f"axis {a} must span [-pi L, pi L], got origin {o} length {length}")
    x, y, z = grid.mesh()
    xs, ys, zs = x / L, y / L, z / L
    V0 = params.V0
    u = np.zeros((3,) + grid.shape)
    u[0] = V0 * np.sin(xs) * np.cos(ys) * np.cos(zs)
    u[1] = -V0 * np.cos(xs) * np.sin(ys) * np.cos(zs)
    p0 = params.rho0 * params.V0**2 / (thermo.gamma * params.mach**2)
    p = p0 + params.rho0 * V0**2 / 16.0 * (np.cos(2 * xs) + np.cos(2 * ys)) * (np.cos(2 * zs) + 2.0)
    rho = np.full(grid.shape, params.rho0)
    return rho, u, p


def init_tgv(grid, params, thermo):
    rho, u, p = tgv_fields(grid, params, thermo)
    return conserved_encode(grid, rho, u, p, thermo)


# ---------------------------------------------------------------------------
# Biot-Savart
# ---------------------------------------------------------------------------


@_jit.njit
def _kernel_inv_cube(s, rc, n, s_far):
    # K_v / s^3 = (s^2n + rc^2n)^(-3/2n), rescaled by m = max(s, rc) to avoid
    # overflow of s^2n; n <= 0 encodes the Rankine limit n = inf. Beyond s_far
    # the kernel equals one to 1e-12 and plain 1/s^3 is used.
    if s >= s_far:
        return 1.0 / (s * s * s)
    m = s if s > rc else rc
    if n <= 0.0:
        return 1.0 / (m * m * m)
    x = s / m
    y = rc / m
    if n == 4.0:
        x2 = x * x
        y2 = y * y
        x4 = x2 * x2
        y4 = y2 * y2
        a = x4 * x4 + y4 * y4
        r8 = math.sqrt(math.sqrt(math.sqrt(a)))
        return 1.0 / (r8 * r8 * r8 * m * m * m)
    a = x ** (2.0 * n) + y ** (2.0 * n)
    return a ** (-1.5 / n) / (m * m * m)


@_jit.njit
def _biot_savart_kernel(points, X, T, w, gamma, rc, n, s_far, out):
    npts = points.shape[0]
    ns = X.shape[0]
    pref = -gamma / (4.0 * math.pi)
    for p in range(npts):
        px = points[p, 0]
        py = points[p, 1]
        pz = points[p, 2]
        ux = 0.0
        uy = 0.0
        uz = 0.0
        for k in range(ns):
            rx = px - X[k, 0]
            ry = py - X[k, 1]
            rz = pz - X[k, 2]
            s = math.sqrt(rx * rx + ry * ry + rz * rz)
            g = w[k] * _kernel_inv_cube(s, rc, n, s_far)
            tx = T[k, 0]
            ty = T[k, 1]
            tz = T[k, 2]
            ux += g * (ry * tz - rz * ty)
            uy += g * (rz * tx - rx * tz)
            uz += g * (rx * ty - ry * tx)
        out[p, 0] = pref * ux
        out[p, 1] = pref * uy
        out[p, 2] = pref * uz


def _biot_savart_numpy(points, X, T, w, gamma, rc, n, chunk=256):
    out = np.empty_like(points)
    for start in range(0, points.shape[0], chunk):
        p = points[start:start + chunk]
        r = p[:, None, :] - X[None, :, :]
        s = np.sqrt((r * r).sum(axis=-1))
        m = np.maximum(s, rc)
        if n <= 0.0:
            g = 1.0 / m**3
        else:
            g = ((s / m) ** (2 * n) + (rc / m) ** (2 * n)) ** (-1.5 / n) / m**3
        g = g * w[None, :]
        c = np.cross(r, T[None, :, :])
        out[start:start + chunk] = -gamma / (4.0 * np.pi) * np.einsum("ps,psc->pc", g, c)
    return out


def _far_distance(rc, n, tol=1e-12):
    """Distance beyond which ``K_v = 1`` to relative accuracy ``tol``."""
    if n <= 0.0:
        return rc
    # K_v = (1 + (rc/s)^2n)^(-3/2n) ~ 1 - 3/(2n) (rc/s)^2n
    return rc * (tol * 2.0 * n / 3.0) ** (-1.0 / (2.0 * n))


def biot_savart_velocity(points, X, T, weights, gamma, r_c, n_kernel=4.0, use_numba=None):
    """Regularised Biot-Savart velocity at ``points`` (P, 3).

    The curve is given by samples ``X`` (S, 3), tangents ``T = dX/dtheta``
    (S, 3) and quadrature weights (S,). ``n_kernel = inf`` is the Rankine
    limit ``K_v = min(1, (s / r_c)^3)``.
    """
    points = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    X = np.ascontiguousarray(X, dtype=np.float64)
    T = np.ascontiguousarray(T, dtype=np.float64)
    w = np.ascontiguousarray(np.broadcast_to(weights, X.shape[:1]), dtype=np.float64)
    n = -1.0 if math.isinf(n_kernel) else float(n_kernel)
    if use_numba is None:
        use_numba = _jit.USE_NUMBA
    if use_numba and _jit.HAVE_NUMBA:
        out = np.empty_like(points)
        _biot_savart_kernel(points, X, T, w, float(gamma), float(r_c), n, _far_distance(r_c, n), out)
        return out
    return _biot_savart_numpy(points, X, T, w, float(gamma), float(r_c), n)


# ---------------------------------------------------------------------------
# double helix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HelixParams:
    R: float = 0.115
    pitch_ratio: float = 1.1
    core_ratio: float = 0.06
    n_kernel: float = 4.0
    re_gamma: float = 7000.0
    nu: float = 1.0e-6
    n_filaments: int = 2
    n_turns: int = 4
    lx: float = 0.5
    lz: float = 0.5
    image_layers: int = 8
    samples_per_turn: int = 512
    mach_peak: float = 0.1
    rho0: float = 1.0
    gamma: float = 1.4
    perturbation: float = 1.0e-4
    seed: int = 0

    def __post_init__(self):
        if int(self.n_turns) != self.n_turns or self.n_turns < 1:
            raise ValueError("n_turns must be an integer >= 1")
        if not 0.0 < self.core_ratio < 1.0:
            raise ValueError("core radius must satisfy 0 < r_c < R")
        if not self.n_kernel >= 1.0:
            raise ValueError("n_kernel must be >= 1")
        if self.n_filaments < 1 or self.image_layers < 0 or self.samples_per_turn < 8:
            raise ValueError("invalid filament/quadrature settings")
        if not (self.R > 0 and self.pitch_ratio > 0 and self.re_gamma > 0 and self.nu > 0):
            raise ValueError("R, pitch_ratio, re_gamma and nu must be positive")
        if not 0.0 < self.mach_peak <= 0.3:
            raise ValueError("mach_peak must lie in (0, 0.3]")
        if 2.0 * self.R >= min(self.lx, self.lz):
            raise ValueError("helix does not fit in the x-z cross-section")

    @property
    def pitch(self):
        return self.pitch_ratio * self.R

    @property
    def ell(self):
        return self.pitch / (2.0 * np.pi)

    @property
    def r_c(self):
        return self.core_ratio * self.R

    @property
    def gamma_circ(self):
        return self.re_gamma * self.nu

    @property
    def ly(self):
        return self.n_turns * self.pitch

    def grid(self, nx, ny=None, nz=None):
        ny = nx if ny is None else ny
        nz = nx if nz is None else nz
        return Grid(nx, ny, nz, self.lx, self.ly, self.lz)

    def thermo(self, prandtl=0.71, prandtl_t=0.5):
        g = self.gamma
        return ThermoParams(gamma=g, mu=self.rho0 * self.nu, prandtl=prandtl,
                            prandtl_t=prandtl_t, cp=g / (g - 1.0))


def helix_curve(params, samples_per_turn=None, image_layers=None, center=None):
    """Samples, tangents and trapezoid weights of all filaments and images."""
    spt = params.samples_per_turn if samples_per_turn is None else samples_per_turn
    layers = params.image_layers if image_layers is None else image_layers
    xc, zc = center if center is not None else (0.5 * params.lx, 0.5 * params.lz)
    turns = params.n_turns * (1 + 2 * layers)
    nth = spt * turns
    dth = 2.0 * np.pi / spt
    # periodic trapezoid == uniform rectangle rule over whole turns
    theta = (np.arange(nth) - spt * params.n_turns * layers) * dth
    R, ell = params.R, params.ell
    Xs, Ts = [], []
    for k in range(params.n_filaments):
        ph = theta + 2.0 * np.pi * k / params.n_filaments
        Xs.append(np.stack([xc + R * np.cos(ph), ell * theta, zc + R * np.sin(ph)], axis=1))
        Ts.append(np.stack([-R * np.sin(ph), np.full_like(ph, ell), R * np.cos(ph)], axis=1))
    X = np.concatenate(Xs)
    T = np.concatenate(Ts)
    return X, T, np.full(X.shape[0], dth)


def _one_minus_cos(h, r2):
    """``1 - h / sqrt(r^2 + h^2)`` for ``h >= 0`` divided by ``r^2``, without cancellation."""
    root = np.sqrt(r2 + h * h)
    return 1.0 / (root * (root + h))


def line_core_velocity(points, center, y_span, gamma, r0):
    """Infinite singular line minus a Lamb-Oseen line minus a singular segment.

    All three lie on the axis ``(xc, zc)`` along ``+y`` with circulation
    ``gamma``; the segment covers ``y_span``, which must contain every point.
    Adding this to a truncated helix replaces the missing helix tails by those
    of a straight line and leaves a residual that is the Lamb-Oseen vortex of
    core ``r0`` (added back in periodic form by :func:`periodic_line_velocity`).
    The result is finite on the axis and decays like ``exp(-r^2 / r0^2)``.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    rx = points[:, 0] - center[0]
    rz = points[:, 2] - center[1]
    r2 = rx * rx + rz * rz
    hi = y_span[1] - points[:, 1]
    lo = points[:, 1] - y_span[0]
    if np.any(hi < 0.0) or np.any(lo < 0.0):
        raise ValueError("points must lie inside the segment span")
    x = r2 / (r0 * r0)
    # (1 - exp(-x)) / x, equal to one at the axis
    g = np.where(x > 0.0, -np.expm1(-x) / np.where(x > 0.0, x, 1.0), 1.0)
    # u = gamma / (4 pi) (rz, -rx) * integral, integral -> finite as r -> 0
    integral = -2.0 * g / (r0 * r0) + _one_minus_cos(hi, r2) + _one_minus_cos(lo, r2)
    out = np.zeros_like(points)
    out[:, 0] = gamma / (4.0 * np.pi) * rz * integral
    out[:, 2] = -gamma / (4.0 * np.pi) * rx * integral
    return out


def periodic_line_velocity(grid, gamma, r0):
    """``(u_x, u_z)`` on the x-z plane of a periodised Lamb-Oseen vortex.

    The sampled vorticity ``gamma / (pi r0^2) exp(-r^2 / r0^2)`` minus its mean
    is inverted spectrally: ``u_x = d psi/dz``, ``u_z = -d psi/dx``, ``lap psi = omega_y``.
    """
    x = grid.axis_coords(0) - (grid.origin[0] + 0.5 * grid.lx)
    z = grid.axis_coords(2) - (grid.origin[2] + 0.5 * grid.lz)
    r2 = x[:, None] ** 2 + z[None, :] ** 2
    omega = gamma / (np.pi * r0**2) * np.exp(-r2 / r0**2)
    kx = 2.0 * np.pi * np.fft.fftfreq(grid.nx, grid.dx)
    kz = 2.0 * np.pi * np.fft.fftfreq(grid.nz, grid.dz)
    KX, KZ = np.meshgrid(kx, kz, indexing="ij")
    k2 = KX**2 + KZ**2
    k2[0, 0] = 1.0
    psi_hat = -np.fft.fft2(omega) / k2
    psi_hat[0, 0] = 0.0
    if grid.nx % 2 == 0:
        psi_hat[grid.nx // 2, :] = 0.0
    if grid.nz % 2 == 0:
        psi_hat[:, grid.nz // 2] = 0.0
    ux = np.real(np.fft.ifft2(1j * KZ * psi_hat))
    uz = np.real(np.fft.ifft2(-1j * KX * psi_hat))
    return ux, uz


def _plane_points(grid, j):
    x = grid.axis_coords(0)
    z = grid.axis_coords(2)
    X, Z = np.meshgrid(x, z, indexing="ij")
    Y = np.full_like(X, grid.axis_coords(1)[j])
    return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)


def reference_core(params):
    """Core radius of the Lamb-Oseen reference line used to periodise the helix."""
    return 0.5 * params.R


def helix_plane_velocity(grid, params, j, samples_per_turn=None, image_layers=None):
    """Free-space helix velocity (3, nx, nz) on the y-plane ``j``, minus the
    Lamb-Oseen reference line (circulation ``N Gamma``).

    The truncated helix tails are replaced by those of a straight line over
    the same axial span, so the truncation error cancels; what remains decays
    exponentially away from the helix and is compatible with x-z periodicity.
    """
    spt = params.samples_per_turn if samples_per_turn is None else samples_per_turn
    layers = params.image_layers if image_layers is None else image_layers
    center = (grid.origin[0] + 0.5 * grid.lx, grid.origin[2] + 0.5 * grid.lz)
    X, T, w = helix_curve(params, spt, layers, center)
    pts = _plane_points(grid, j)
    u = biot_savart_velocity(pts, X, T, w, params.gamma_circ, params.r_c, params.n_kernel)
    half = 0.5 * params.ell * 2.0 * np.pi / spt
    span = (X[0, 1] - half, X[X.shape[0] // params.n_filaments - 1, 1] + half)
    u += line_core_velocity(pts, center, span, params.n_filaments * params.gamma_circ, reference_core(params))
    return u.T.reshape(3, grid.nx, grid.nz)


def helix_velocity(grid, params, check=True):
    """Periodised helix velocity (3, nx, ny, nz).

    For the double helix only the planes ``y < h/2`` are integrated; the rest
    follow from the symmetry (rotation by pi about the axis + shift by h/2),
    which requires ``ny`` divisible by ``2 n_turns`` and even ``nx``, ``nz``.
    """
    if abs(grid.ly - params.ly) > 1e-12 * params.ly:
        raise DomainMismatch(f"ly={grid.ly} must equal n_turns * pitch = {params.ly}")
    if abs(grid.lx - params.lx) > 1e-12 or abs(grid.lz - params.lz) > 1e-12:
        raise DomainMismatch("grid x/z extents differ from the helix box")
    nf = params.n_filaments
    per = grid.ny // params.n_turns if grid.ny % params.n_turns == 0 else None
    sym = (per is not None and per % nf == 0 and grid.nx % 2 == 0 and grid.nz % 2 == 0)
    nplanes = per // nf if sym else grid.ny

    if check:
        j0 = 0
        base = helix_plane_velocity(grid, params, j0)
        fine = helix_plane_velocity(grid, params, j0, 2 * params.samples_per_turn,
                                    2 * params.image_layers)
        pk, pk2 = np.sqrt((base**2).sum(0)).max(), np.sqrt((fine**2).sum(0)).max()
        if abs(pk2 - pk) > 1e-3 * pk2:
            raise QuadratureNotConverged(f"peak speed changed {pk} -> {pk2} on refinement")

    u = np.empty((3,) + grid.shape)
    for j in range(nplanes):
        u[:, :, j, :] = helix_plane_velocity(grid, params, j)
    if sym:
        ix = (-np.arange(grid.nx)) % grid.nx
        iz = (-np.arange(grid.nz)) % grid.nz
        rot = np.array([-1.0, 1.0, -1.0])
        for k in range(1, nf):
            # rotation by 2 pi k / nf is a pi rotation only for nf == 2
            src = u[:, :, (k - 1) * nplanes:k * nplanes, :]
            u[:, :, k * nplanes:(k + 1) * nplanes, :] = rot[:, None, None, None] * src[:, ix][:, :, :, iz]
        for t in range(1, params.n_turns):
            u[:, :, t * per:(t + 1) * per, :] = u[:, :, :per, :]

    ux, uz = periodic_line_velocity(grid, nf * params.gamma_circ, reference_core(params))
    u[0] += ux[:, None, :]
    u[2] += uz[:, None, :]
    return u


def init_helix(grid, params, thermo=None, return_info=False):
    """Uniform density and pressure with the periodised Biot-Savart velocity."""
    if params.n_filaments not in (1, 2):
        raise ValueError("only single and double helices are supported")
    thermo = thermo if thermo is not None else params.thermo()
    u = helix_velocity(grid, params)
    peak = float(np.sqrt((u**2).sum(axis=0)).max())
    if params.perturbation > 0.0:
        rng = np.random.default_rng(params.seed)
        u = u + params.perturbation * peak * rng.standard_normal(u.shape)
    c = peak / params.mach_peak
    p0 = params.rho0 * c**2 / thermo.gamma
    rho = np.full(grid.shape, params.rho0)
    p = np.full(grid.shape, p0)
    state = conserved_encode(grid, rho, u, p, thermo)
    if return_info:
        return state, {"peak_speed": peak, "sound_speed": c, "p0": p0}
    return state
