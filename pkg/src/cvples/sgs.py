"""Eddy-viscosity closures: Smagorinsky, structure function, Vreman and the
dynamic Smagorinsky model.

Strain magnitude convention: ``|S| = sqrt(S:S)`` (no factor 2) everywhere.
"""
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .compact import gradient
from .errors import AnisotropicGridUnsupported
from .filters import TestFilterSpec, apply_test_filter
from .grid import volume_average

MODEL_KINDS = ("none", "smagorinsky", "sf", "vreman", "dynamic")

_ALIASES = {
    "no": "none", "off": "none", "nomodel": "none",
    "smag": "smagorinsky",
    "structure_function": "sf", "structurefunction": "sf",
    "dynamic_smagorinsky": "dynamic", "dynamicsmagorinsky": "dynamic",
}


def normalize_kind(kind):
    k = str(kind).strip().lower().replace("-", "_")
    k = _ALIASES.get(k, _ALIASES.get(k.replace("_", ""), k))
    if k not in MODEL_KINDS:
        raise ValueError(f"unknown SGS model {kind!r}; expected one of {MODEL_KINDS}")
    return k


@dataclass(frozen=True)
class SgsModelConfig:
    kind: str = "smagorinsky"
    c_s: float = 0.172
    c_k: float = 1.5
    vreman_c: Optional[float] = None  # None -> 2.5 * c_s**2
    dynamic_filter: TestFilterSpec = field(default_factory=TestFilterSpec)
    eps_den: float = 1e-30

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not self.c_s > 0.0:
            raise ValueError("c_s must be positive")
        if not self.c_k > 0.0:
            raise ValueError("c_k must be positive")

    @property
    def vreman_constant(self):
        return 2.5 * self.c_s**2 if self.vreman_c is None else self.vreman_c


class StrainRate(NamedTuple):
    tensor: np.ndarray      # (3, 3, nx, ny, nz), symmetric and traceless
    magnitude: np.ndarray   # sqrt(S:S)
    dilatation: np.ndarray  # div u


def strain_from_gradient(grad):
    """Deviatoric strain ``1/2 (G + G^T) - 1/3 tr(G) I`` and its magnitude."""
    s = 0.5 * (grad + grad.transpose(1, 0, *range(2, grad.ndim)))
    div = grad[0, 0] + grad[1, 1] + grad[2, 2]
    for i in range(3):
        s[i, i] -= div / 3.0
    mag = np.sqrt(np.einsum("ij...,ij...->...", s, s))
    return StrainRate(s, mag, div)


def strain_rate(u, grid):
    return strain_from_gradient(gradient(u, grid))


def mut_smagorinsky(rho, strain, grid, config=SgsModelConfig()):
    """``rho (C_S Delta)^2 |S|`` with ``Delta = (dx dy dz)^(1/3)``."""
    return rho * (config.c_s * grid.delta) ** 2 * strain.magnitude


def structure_function_f2(u):
    """Mean over the six axis neighbours of ``|u(x) - u(x + r)|^2``."""
    f2 = np.zeros(u.shape[1:])
    for axis in (1, 2, 3):
        for shift in (1, -1):
            du = u - np.roll(u, shift, axis=axis)
            f2 += (du * du).sum(axis=0)
    return f2 / 6.0


def mut_structure_function(rho, u, grid, config=SgsModelConfig()):
    if not grid.is_isotropic:
        raise AnisotropicGridUnsupported("structure-function model needs dx = dy = dz")
    coef = 0.105 * config.c_k ** (-1.5) * grid.dx
    return rho * coef * np.sqrt(structure_function_f2(u))


def vreman_b_beta(grad, spacing):
    """``B_beta`` and ``alpha_ij alpha_ij`` with ``alpha_ij = du_j/dx_i``."""
    # grad[i, j] = du_i/dx_j, hence alpha[m, i] = grad[i, m]
    d2 = np.asarray(spacing, dtype=np.float64) ** 2

    def beta(i, j):
        return sum(d2[m] * grad[i, m] * grad[j, m] for m in range(3))

    b11, b22, b33 = beta(0, 0), beta(1, 1), beta(2, 2)
    b12, b13, b23 = beta(0, 1), beta(0, 2), beta(1, 2)
    bb = b11 * b22 - b12**2 + b11 * b33 - b13**2 + b22 * b33 - b23**2
    aa = np.einsum("ij...,ij...->...", grad, grad)
    return bb, aa


def mut_vreman(rho, grad, grid, config=SgsModelConfig()):
    bb, aa = vreman_b_beta(grad, grid.spacing)
    ok = aa > config.eps_den
    ratio = np.where(ok, np.maximum(bb, 0.0) / np.where(ok, aa, 1.0), 0.0)
    return rho * config.vreman_constant * np.sqrt(ratio)


_SYM = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
_WEIGHT = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])


def dynamic_coefficient(rho, u, strain, grid, spec=None, rel_eps=1e-20):
    """Germano-Lilly coefficient ``C = <L_ij M_ij> / <M_kl M_kl>`` (clipped >= 0).

    ``M_ij`` carries the grid width squared, so ``C`` is dimensionless and
    ``mu_t = rho C Delta^2 |S|``. Exactly 21 scalar test-filter applications:
    rho (1), rho u_i (3), rho u_i u_j (6), the full strain S_ij (6) and the
    traceless ``rho |S| S^d_ij`` (5, the sixth from the zero trace).
    """
    spec = spec or TestFilterSpec("IMPL6")
    delta2 = grid.delta**2
    tdelta2 = (spec.width_ratio * grid.delta) ** 2

    rho_h = apply_test_filter(rho, spec)
    mom = rho * u
    mom_h = apply_test_filter(mom, spec)
    prod = np.stack([mom[i] * u[j] for i, j in _SYM])
    prod_h = apply_test_filter(prod, spec)
    lij = np.stack([prod_h[c] - mom_h[i] * mom_h[j] / rho_h for c, (i, j) in enumerate(_SYM)])

    # the full strain 1/2 (G + G^T) is filtered so that the trace of the
    # filtered tensor is available for its deviatoric part
    s_dev = strain.tensor
    s_full = np.stack([s_dev[i, j] for i, j in _SYM])
    s_full[:3] += strain.dilatation / 3.0
    s_h = apply_test_filter(s_full, spec)
    s_h_dev = s_h.copy()
    s_h_dev[:3] -= (s_h[0] + s_h[1] + s_h[2]) / 3.0
    s_h_mag = np.sqrt(sum(_WEIGHT[c] * s_h_dev[c] ** 2 for c in range(6)))

    rs = rho * strain.magnitude
    rs_dev = np.stack([rs * s_dev[i, j] for i, j in _SYM[1:]])  # 5 comps: 22, 33, 12, 13, 23
    rs_h = apply_test_filter(rs_dev, spec)
    rs_h_full = np.empty((6,) + rho.shape)
    rs_h_full[1:] = rs_h
    rs_h_full[0] = -(rs_h[0] + rs_h[1])

    mij = -2.0 * tdelta2 * rho_h * s_h_mag * s_h_dev + 2.0 * delta2 * rs_h_full

    lm = volume_average(np.einsum("c,c...->...", _WEIGHT, lij * mij))
    mm = volume_average(np.einsum("c,c...->...", _WEIGHT, mij * mij))
    # M ~ rho U^2 when the velocity has resolved gradients; roundoff-level M
    # (uniform flow) is a degenerate denominator
    scale = float(np.max(rho)) * float(np.max(np.einsum("i...,i...->...", u, u)))
    if not mm > rel_eps * scale**2:
        return 0.0
    return max(float(lm / mm), 0.0)


def mut_dynamic_smagorinsky(rho, u, strain, grid, spec=None):
    """Return ``(mu_t, c_d)`` with ``mu_t = rho c_d |S|`` and ``c_d = C Delta^2``."""
    c = dynamic_coefficient(rho, u, strain, grid, spec)
    c_d = c * grid.delta**2
    return rho * c_d * strain.magnitude, c_d


def eddy_viscosity(config, rho, u, grad, grid, strain=None):
    """Dispatch on ``config.kind``; returns ``(mu_t or None, strain, c_d)``."""
    if strain is None:
        strain = strain_from_gradient(grad)
    kind = config.kind
    if kind == "none":
        return None, strain, None
    if kind == "smagorinsky":
        return mut_smagorinsky(rho, strain, grid, config), strain, None
    if kind == "sf":
        return mut_structure_function(rho, u, grid, config), strain, None
    if kind == "vreman":
        return mut_vreman(rho, grad, grid, config), strain, None
    mut, c_d = mut_dynamic_smagorinsky(rho, u, strain, grid, config.dynamic_filter)
    return mut, strain, c_d
