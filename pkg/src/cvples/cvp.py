"""Coherent-vorticity-preserving (CvP) correction of an eddy viscosity.

The sensor compares the test-filtered enstrophy with the resolved enstrophy,

    sigma = filtered(xi) / xi,      xi = |curl u|^2 / 2,

and maps it to a factor ``f(sigma)`` in ``[0, 1]`` that multiplies any eddy
viscosity: ``f = 0`` for ``sigma >= 1`` (no sub-test-filter vorticity), ``f = 1``
for ``sigma <= sigma_eq`` (equilibrium turbulence) and a half-period sine blend
in between. ``sigma_eq`` is the value of ``sigma`` for a Kolmogorov spectrum
seen through the test filter, obtained by quadrature of the filter's transfer
function (optionally weighted by the squared interpolant transfer function).
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .compact import gradient
from .errors import DomainError
from .filters import TestFilterSpec, apply_test_filter, int6_transfer_gain, transfer_gain

INTERPOLANT_MODES = ("identity", "int6")

# presets obtained with the INT6 interpolant weighting, two decimals
INT6_PRESETS = {"GAUSS": 0.34, "EXPL4": 0.54, "IMPL6": 0.71}


@dataclass(frozen=True)
class SharpCutoff:
    """Spectral sharp cutoff of width ratio ``r`` (quadrature use only)."""

    width_ratio: float

    def gain(self, k_delta):
        return np.where(np.asarray(k_delta) <= np.pi / self.width_ratio, 1.0, 0.0)

    @property
    def breakpoint(self):
        return np.pi / self.width_ratio


@dataclass(frozen=True)
class CvpConfig:
    filter: TestFilterSpec = field(default_factory=TestFilterSpec)
    axes: tuple = (0, 1, 2)
    sigma_eq: Optional[float] = None
    enstrophy_floor: float = 1e-12
    interpolant_mode: str = "identity"

    def __post_init__(self):
        axes = tuple(sorted(set(int(a) for a in self.axes)))
        if not axes or any(a not in (0, 1, 2) for a in axes):
            raise ValueError(f"axes must be a non-empty subset of (0, 1, 2), got {self.axes}")
        object.__setattr__(self, "axes", axes)
        mode = str(self.interpolant_mode).lower()
        if mode not in INTERPOLANT_MODES:
            raise ValueError(f"interpolant_mode must be one of {INTERPOLANT_MODES}")
        object.__setattr__(self, "interpolant_mode", mode)
        if self.sigma_eq is None:
            object.__setattr__(self, "sigma_eq", sigma_eq_quadrature(self.filter, mode))
        if not 0.0 < self.sigma_eq < 1.0:
            raise ValueError(f"sigma_eq={self.sigma_eq} must lie in (0, 1)")
        if not self.enstrophy_floor > 0.0:
            raise ValueError("enstrophy_floor must be positive")


def vorticity_from_gradient(grad):
    return np.stack([grad[2, 1] - grad[1, 2], grad[0, 2] - grad[2, 0], grad[1, 0] - grad[0, 1]])


def enstrophy_from_gradient(grad):
    w = vorticity_from_gradient(grad)
    return 0.5 * (w[0] ** 2 + w[1] ** 2 + w[2] ** 2)


def enstrophy(u, grid):
    """``xi = |curl u|^2 / 2`` with compact derivatives."""
    return enstrophy_from_gradient(gradient(u, grid))


def sigma_field(xi, config):
    """Pointwise ratio of test-filtered to resolved enstrophy.

    Nodes with ``xi < enstrophy_floor`` get ``sigma = 1`` (sensor off); negative
    filtered values from the negative stencil lobes are clamped to 0.
    """
    xi_hat = np.maximum(apply_test_filter(xi, config.filter, config.axes), 0.0)
    active = xi >= config.enstrophy_floor
    return np.where(active, xi_hat / np.where(active, xi, 1.0), 1.0)


def sigma_eq_sharp(r_delta):
    """Equilibrium ratio for sharp grid and test filters, ``r^(-4/3)``."""
    if not r_delta >= 1.0:
        raise DomainError(f"width ratio {r_delta} must be >= 1")
    return float(r_delta) ** (-4.0 / 3.0)


def _simpson(fn, a, b, panels):
    """Composite Simpson of ``fn(k) k^(1/3)`` on ``[a, b]`` in the variable
    ``s = k^(1/3)``: the integrand becomes ``3 s^3 fn(s^3)``, which is smooth
    at ``k = 0`` where the original weight has an unbounded derivative."""
    panels += panels % 2
    s = np.linspace(np.cbrt(a), np.cbrt(b), panels + 1)
    return simpson(3.0 * s**3 * fn(s**3), x=s)


def sigma_eq_quadrature(filt, interpolant_mode="identity", panels=2048):
    """Kolmogorov-weighted mean test-filter gain on ``k Delta in [0, pi]``.

    ``filt`` is a :class:`TestFilterSpec` or a :class:`SharpCutoff`; composite
    Simpson with ``panels`` intervals, split at the cutoff of a sharp filter so
    that each piece is smooth.
    """
    mode = str(interpolant_mode).lower()
    if mode not in INTERPOLANT_MODES:
        raise ValueError(f"interpolant_mode must be one of {INTERPOLANT_MODES}")

    if mode == "int6":
        def weight(k):
            return int6_transfer_gain(np.clip(k, 0.0, np.pi)) ** 2
    else:
        def weight(k):
            return np.ones_like(k)

    if isinstance(filt, SharpCutoff):
        cut = filt.breakpoint
        pieces = [(0.0, cut), (cut, np.pi)] if cut < np.pi else [(0.0, np.pi)]
    else:
        pieces = [(0.0, np.pi)]

    num = den = 0.0
    for a, b in pieces:
        n = max(2, int(round(panels * (b - a) / np.pi)))
        part = _simpson(weight, a, b, n)
        if isinstance(filt, SharpCutoff):
            # the step is constant on the open interior of each piece
            num += float(filt.gain(0.5 * (a + b))) * part
        else:
            num += _simpson(lambda k: weight(k) * transfer_gain(filt, np.clip(k, 0.0, np.pi)), a, b, n)
        den += part
    return float(num / den)


def sensor_f(sigma, sigma_eq):
    """CvP damping factor ``f(sigma)`` in ``[0, 1]``."""
    if not 0.0 < sigma_eq < 1.0:
        raise DomainError(f"sigma_eq={sigma_eq} must lie in (0, 1)")
    sigma = np.asarray(sigma, dtype=np.float64)
    arg = np.pi * (sigma_eq - 2.0 * sigma + 1.0) / (2.0 * (1.0 - sigma_eq))
    blend = 0.5 * (1.0 + np.sin(arg))
    f = np.where(sigma < sigma_eq, 1.0, np.where(sigma > 1.0, 0.0, blend))
    return np.clip(f, 0.0, 1.0)


def apply_cvp(mut, f):
    """``mu_t^CvP = f(sigma) mu_t``."""
    if np.shape(mut) != np.shape(f):
        raise ValueError(f"shape mismatch {np.shape(mut)} vs {np.shape(f)}")
    return f * mut


def sensor_from_gradient(grad, config):
    """Sensor field and the underlying ``sigma`` for a velocity gradient."""
    sigma = sigma_field(enstrophy_from_gradient(grad), config)
    return sensor_f(sigma, config.sigma_eq), sigma
