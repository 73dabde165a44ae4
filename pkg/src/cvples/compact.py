"""Sixth-order compact derivatives and the eighth-order solution filter on
periodic pencils.

Derivative (tridiagonal, interior scheme applied everywhere thanks to
periodicity)::

    alpha f'_{i-1} + f'_i + alpha f'_{i+1}
        = a (f_{i+1} - f_{i-1}) / (2h) + b (f_{i+2} - f_{i-2}) / (4h)

with ``alpha = 1/3, a = 14/9, b = 1/9``.

Solution filter (eighth order, one free parameter ``alpha_f``)::

    alpha_f g_{i-1} + g_i + alpha_f g_{i+1} = sum_{n=0..4} (a_n / 2) (f_{i+n} + f_{i-n})
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AxisTooSmall, BadAlpha
from .kernels import apply_line, constant_cyclic_factor, factor_cyclic, _thomas_1d


@dataclass(frozen=True)
class CompactScheme:
    lhs_alpha: float = 1.0 / 3.0
    a: float = 14.0 / 9.0
    b: float = 1.0 / 9.0
    order: int = 6

    def stencil(self, h):
        return np.array([0.0, self.a / (2.0 * h), self.b / (4.0 * h)])

    def modified_wavenumber(self, kh):
        """``k' h`` of the scheme for a mode with ``k h`` (spectral-like check)."""
        kh = np.asarray(kh, dtype=np.float64)
        num = self.a * np.sin(kh) + 0.5 * self.b * np.sin(2.0 * kh)
        return num / (1.0 + 2.0 * self.lhs_alpha * np.cos(kh))


SIXTH_ORDER = CompactScheme()


@dataclass(frozen=True)
class CyclicTridiagonalSystem:
    """``A[i,i-1] = sub[i]``, ``A[i,i] = diag[i]``, ``A[i,i+1] = sup[i]`` with the
    periodic corners ``A[0,n-1] = corner_top`` and ``A[n-1,0] = corner_bottom``."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    corner_top: float
    corner_bottom: float

    @classmethod
    def constant(cls, n, off, diag=1.0):
        return cls(np.full(n, float(off)), np.full(n, float(diag)), np.full(n, float(off)),
                   float(off), float(off))

    @property
    def n(self):
        return len(self.diag)

    def dense(self):
        n = self.n
        a = np.zeros((n, n))
        idx = np.arange(n)
        a[idx, idx] = self.diag
        a[idx[1:], idx[:-1]] = self.sub[1:]
        a[idx[:-1], idx[1:]] = self.sup[:-1]
        a[0, n - 1] += self.corner_top
        a[n - 1, 0] += self.corner_bottom
        return a

    def factor(self):
        return factor_cyclic(self.sub, self.diag, self.sup, self.corner_top, self.corner_bottom)


def solve_cyclic_tridiagonal(system, rhs):
    """Solve a periodic tridiagonal system by Sherman-Morrison reduction.

    ``rhs`` may be 1-D or carry extra trailing columns (solved independently).
    Raises :class:`~cvples.errors.ZeroPivot` for a singular reduced system.
    """
    fac = system.factor()
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.ndim == 1:
        y = _thomas_1d(fac.sub, fac.inv_denom, fac.cprime, rhs)
        return y - fac.kfac * (y[0] + fac.qn * y[-1]) * fac.z
    out = apply_line(rhs.reshape(1, rhs.shape[0], -1), 1, np.array([1.0]), False, fac)
    return out.reshape(rhs.shape)


@lru_cache(maxsize=None)
def _derivative_operator(n, h, scheme):
    return scheme.stencil(h), constant_cyclic_factor(n, scheme.lhs_alpha)


def _check_axis(f, axis, minimum):
    n = f.shape[axis - 3]
    if n < minimum:
        raise AxisTooSmall(f"axis {axis} has {n} points; need >= {minimum}")
    return n


def ddx(f, grid, axis, scheme=SIXTH_ORDER):
    """Compact derivative along spatial ``axis`` (0, 1, 2) of a field.

    ``f`` may carry leading batch dimensions; the last three axes are spatial.
    """
    n = _check_axis(f, axis, 8)
    coeffs, fac = _derivative_operator(n, float(grid.spacing[axis]), scheme)
    return apply_line(f, np.ndim(f) - 3 + axis, coeffs, True, fac)


def gradient(u, grid, scheme=SIXTH_ORDER):
    """Velocity-gradient tensor ``G[i, j] = d u_i / d x_j`` for ``u`` of shape
    ``(3, nx, ny, nz)`` (or any ``(..., nx, ny, nz)`` batch)."""
    return np.stack([ddx(u, grid, j, scheme) for j in range(3)], axis=1 if np.ndim(u) > 3 else 0)


def divergence(v, grid, scheme=SIXTH_ORDER):
    return sum(ddx(v[j], grid, j, scheme) for j in range(3))


def filter8_coefficients(alpha):
    """Half-stencil weights ``(a0, a1/2, a2/2, a3/2, a4/2)`` of the eighth-order filter."""
    a0 = (93.0 + 70.0 * alpha) / 128.0
    a1 = (7.0 + 18.0 * alpha) / 16.0
    a2 = (-7.0 + 14.0 * alpha) / 32.0
    a3 = (1.0 - 2.0 * alpha) / 16.0
    a4 = (-1.0 + 2.0 * alpha) / 128.0
    return np.array([a0, a1 / 2.0, a2 / 2.0, a3 / 2.0, a4 / 2.0])


def filter8_transfer(alpha, kh):
    c = filter8_coefficients(alpha)
    kh = np.asarray(kh, dtype=np.float64)
    num = c[0] + 2.0 * sum(c[j] * np.cos(j * kh) for j in range(1, 5))
    return num / (1.0 + 2.0 * alpha * np.cos(kh))


@lru_cache(maxsize=None)
def _filter8_operator(n, alpha):
    return filter8_coefficients(alpha), constant_cyclic_factor(n, alpha)


def solution_filter(f, alpha=0.49, axes=(0, 1, 2)):
    """Eighth-order implicit low-pass filter, applied axis by axis.

    ``G(0) = 1`` and ``G(pi) = 0`` for every admissible ``alpha``; values close
    to 0.5 confine the damping to the last few resolved wavenumbers.
    """
    if not 0.25 < alpha < 0.5:
        raise BadAlpha(f"solution filter alpha={alpha} outside (0.25, 0.5)")
    out = np.asarray(f, dtype=np.float64)
    for axis in axes:
        n = _check_axis(out, axis, 9)
        coeffs, fac = _filter8_operator(n, float(alpha))
        out = apply_line(out, out.ndim - 3 + axis, coeffs, False, fac)
    return out
