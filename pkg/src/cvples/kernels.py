"""Pencil kernels shared by the compact derivative, the solution filter and the
test filters.

Every line operator has the form

    A y = B f

where ``B`` is a symmetric (even) or antisymmetric (odd) periodic stencil of
half-width up to 4 and ``A`` is an optional cyclic tridiagonal matrix, factored
once per (operator, n) and reused for every pencil.

Arrays are handled as a ``(m, n, s)`` view: ``n`` is the line direction, ``m``
and ``s`` enumerate the pencils. ``s`` is the contiguous trailing extent, so the
inner loops of the numba kernel run over unit stride.

Both backends are always importable; :data:`cvples._jit.USE_NUMBA` decides
which one :func:`apply_line` dispatches to.
"""
from dataclasses import dataclass

import numpy as np

from . import _jit
from .errors import ZeroPivot


@dataclass(frozen=True)
class CyclicFactor:
    """Precomputed Sherman-Morrison/Thomas data for a cyclic tridiagonal system.

    The modified tridiagonal matrix ``T' = A - u v^T`` is factored as in the
    Thomas algorithm; ``z`` solves ``T' z = u`` and the correction for a
    right-hand side with Thomas solution ``y`` is
    ``x = y - kfac * (y[0] + qn * y[n-1]) * z``.
    """

    sub: np.ndarray
    inv_denom: np.ndarray
    cprime: np.ndarray
    z: np.ndarray
    qn: float
    kfac: float

    @property
    def n(self):
        return self.sub.shape[0]


def factor_cyclic(sub, diag, sup, corner_top, corner_bottom, pivot_tol=1e-300):
    """Factor the periodic tridiagonal matrix with entries

    ``A[i, i-1] = sub[i]``, ``A[i, i] = diag[i]``, ``A[i, i+1] = sup[i]``,
    ``A[0, n-1] = corner_top`` and ``A[n-1, 0] = corner_bottom``.
    ``sub[0]`` and ``sup[n-1]`` are ignored.
    """
    sub = np.asarray(sub, dtype=np.float64)
    diag = np.asarray(diag, dtype=np.float64)
    sup = np.asarray(sup, dtype=np.float64)
    n = diag.shape[0]
    if n < 3:
        raise ValueError("cyclic systems need n >= 3")

    gamma = -diag[0]
    if gamma == 0.0:
        gamma = -1.0
    bb = diag.copy()
    bb[0] -= gamma
    bb[n - 1] -= corner_bottom * corner_top / gamma

    inv_denom = np.empty(n)
    cprime = np.zeros(n)
    denom = bb[0]
    if abs(denom) < pivot_tol:
        raise ZeroPivot("zero pivot at row 0")
    inv_denom[0] = 1.0 / denom
    cprime[0] = sup[0] * inv_denom[0]
    for i in range(1, n):
        denom = bb[i] - sub[i] * cprime[i - 1]
        if abs(denom) < pivot_tol or not np.isfinite(denom):
            raise ZeroPivot(f"zero pivot at row {i}")
        inv_denom[i] = 1.0 / denom
        if i < n - 1:
            cprime[i] = sup[i] * inv_denom[i]

    u = np.zeros(n)
    u[0] = gamma
    u[n - 1] = corner_bottom
    z = _thomas_1d(sub, inv_denom, cprime, u)
    qn = corner_top / gamma
    denom = 1.0 + z[0] + qn * z[n - 1]
    if abs(denom) <= 1e-12 * (1.0 + abs(z[0]) + abs(qn * z[n - 1])):
        raise ZeroPivot("singular Sherman-Morrison correction")
    sub_c = sub.copy()
    sub_c[0] = 0.0
    return CyclicFactor(sub_c, inv_denom, cprime, z, float(qn), float(1.0 / denom))


def _thomas_1d(sub, inv_denom, cprime, r):
    n = r.shape[0]
    y = np.empty(n)
    y[0] = r[0] * inv_denom[0]
    for i in range(1, n):
        y[i] = (r[i] - sub[i] * y[i - 1]) * inv_denom[i]
    for i in range(n - 2, -1, -1):
        y[i] -= cprime[i] * y[i + 1]
    return y


def constant_cyclic_factor(n, off, diag=1.0):
    """Factor for the circulant system with ``(off, diag, off)`` rows."""
    return factor_cyclic(np.full(n, off), np.full(n, diag), np.full(n, off), off, off)


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _stencil_numpy(f, coeffs, odd):
    out = np.zeros_like(f) if odd else coeffs[0] * f
    for j in range(1, coeffs.shape[0]):
        c = coeffs[j]
        if c == 0.0:
            continue
        fp = np.roll(f, -j, axis=1)
        fm = np.roll(f, j, axis=1)
        if odd:
            out += c * (fp - fm)
        else:
            out += c * (fp + fm)
    return out


def _cyclic_sweep_numpy(out, fac):
    n = out.shape[1]
    sub, inv, cp, z = fac.sub, fac.inv_denom, fac.cprime, fac.z
    out[:, 0, :] *= inv[0]
    for i in range(1, n):
        out[:, i, :] -= sub[i] * out[:, i - 1, :]
        out[:, i, :] *= inv[i]
    for i in range(n - 2, -1, -1):
        out[:, i, :] -= cp[i] * out[:, i + 1, :]
    w = (out[:, 0, :] + fac.qn * out[:, n - 1, :]) * fac.kfac
    out -= z[None, :, None] * w[:, None, :]
    return out


def line_apply_numpy(f, coeffs, odd, fac):
    out = _stencil_numpy(f, coeffs, odd)
    if fac is not None:
        _cyclic_sweep_numpy(out, fac)
    return out


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------


@_jit.njit
def _line_apply_kernel(f, out, coeffs, odd, solve, sub, inv, cp, z, qn, kfac):
    m, n, s = f.shape
    nc = coeffs.shape[0]
    c0 = coeffs[0]
    w = np.empty(s)
    for p in range(m):
        for i in range(n):
            if odd:
                for q in range(s):
                    out[p, i, q] = 0.0
            else:
                for q in range(s):
                    out[p, i, q] = c0 * f[p, i, q]
            for j in range(1, nc):
                c = coeffs[j]
                if c == 0.0:
                    continue
                ip = (i + j) % n
                im = (i - j) % n
                if odd:
                    for q in range(s):
                        out[p, i, q] += c * (f[p, ip, q] - f[p, im, q])
                else:
                    for q in range(s):
                        out[p, i, q] += c * (f[p, ip, q] + f[p, im, q])
        if solve:
            d = inv[0]
            for q in range(s):
                out[p, 0, q] *= d
            for i in range(1, n):
                a = sub[i]
                d = inv[i]
                for q in range(s):
                    out[p, i, q] = (out[p, i, q] - a * out[p, i - 1, q]) * d
            for i in range(n - 2, -1, -1):
                c = cp[i]
                for q in range(s):
                    out[p, i, q] -= c * out[p, i + 1, q]
            for q in range(s):
                w[q] = (out[p, 0, q] + qn * out[p, n - 1, q]) * kfac
            for i in range(n):
                zi = z[i]
                for q in range(s):
                    out[p, i, q] -= zi * w[q]


@_jit.njit
def _line_apply_blocked(f, out, block, coeffs, odd, solve, sub, inv, cp, z, qn, kfac):
    # contiguous lines: the Thomas recurrence is latency bound per line, so
    # `block` lines are gathered into a (n, block) buffer and swept together
    m, n = f.shape
    nc = coeffs.shape[0]
    c0 = coeffs[0]
    buf = np.empty((n, block))
    res = np.empty((n, block))
    w = np.empty(block)
    for p0 in range(0, m, block):
        bs = min(block, m - p0)
        for q in range(bs):
            for i in range(n):
                buf[i, q] = f[p0 + q, i]
        for i in range(n):
            for q in range(bs):
                res[i, q] = 0.0 if odd else c0 * buf[i, q]
            for j in range(1, nc):
                c = coeffs[j]
                if c == 0.0:
                    continue
                ip = (i + j) % n
                im = (i - j) % n
                if odd:
                    for q in range(bs):
                        res[i, q] += c * (buf[ip, q] - buf[im, q])
                else:
                    for q in range(bs):
                        res[i, q] += c * (buf[ip, q] + buf[im, q])
        if solve:
            d = inv[0]
            for q in range(bs):
                res[0, q] *= d
            for i in range(1, n):
                a = sub[i]
                d = inv[i]
                for q in range(bs):
                    res[i, q] = (res[i, q] - a * res[i - 1, q]) * d
            for i in range(n - 2, -1, -1):
                c = cp[i]
                for q in range(bs):
                    res[i, q] -= c * res[i + 1, q]
            for q in range(bs):
                w[q] = (res[0, q] + qn * res[n - 1, q]) * kfac
            for i in range(n):
                zi = z[i]
                for q in range(bs):
                    res[i, q] -= zi * w[q]
        for q in range(bs):
            for i in range(n):
                out[p0 + q, i] = res[i, q]


_EMPTY = np.zeros(1)
BLOCK = 32  # lines swept together along the contiguous axis


def line_apply_numba(f, coeffs, odd, fac):
    out = np.empty_like(f)
    if fac is None:
        args = (False, _EMPTY, _EMPTY, _EMPTY, _EMPTY, 0.0, 0.0)
    else:
        args = (True, fac.sub, fac.inv_denom, fac.cprime, fac.z, fac.qn, fac.kfac)
    m, n, s = f.shape
    if s == 1:
        _line_apply_blocked(f[:, :, 0], out[:, :, 0], min(BLOCK, m), coeffs, odd, *args)
    else:
        _line_apply_kernel(f, out, coeffs, odd, *args)
    return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def as_lines(f, axis):
    """View ``f`` (C-contiguous) as ``(m, n, s)`` with ``n = f.shape[axis]``."""
    shape = f.shape
    m = int(np.prod(shape[:axis], dtype=np.int64))
    s = int(np.prod(shape[axis + 1:], dtype=np.int64))
    return f.reshape(m, shape[axis], s)


def apply_line(f, axis, coeffs, odd, fac=None, use_numba=None):
    """Apply ``A^{-1} B`` along ``axis`` of ``f`` (any leading batch dims)."""
    f = np.ascontiguousarray(f, dtype=np.float64)
    if axis < 0:
        axis += f.ndim
    lines = as_lines(f, axis)
    if use_numba is None:
        use_numba = _jit.USE_NUMBA
    if use_numba and _jit.HAVE_NUMBA:
        out = line_apply_numba(lines, coeffs, odd, fac)
    else:
        out = line_apply_numpy(lines, coeffs, odd, fac)
    return out.reshape(f.shape)
