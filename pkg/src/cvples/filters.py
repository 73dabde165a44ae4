"""Discrete test filters IMPL6, EXPL4 and GAUSS and the INT6 interpolant.

All three filters share the symmetric form::

    alpha g_{i-1} + g_i + alpha g_{i+1} = w_0 f_i + sum_j w_j (f_{i+j} + f_{i-j})

IMPL6 and EXPL4 follow the table convention ``w_0 = a`` and ``w_j = b/2, c/2,
d/2`` for the neighbours at distance 1, 2, 3. GAUSS uses its table entries as
the per-side weights ``w_0 .. w_4`` directly (center plus neighbours at
distance 1..4); read through the ``b/2`` convention its DC gain would be about
0.672 instead of 1.

Filters are applied as a tensor product, one axis at a time.
"""
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AxisTooSmall, DomainError
from .kernels import apply_line, constant_cyclic_factor

KINDS = ("IMPL6", "EXPL4", "GAUSS")

_GAUSS_W = (3565.0 / 10368.0, 3091.0 / 12960.0, 1997.0 / 25920.0, 149.0 / 12960.0,
            107.0 / 103680.0)

# classical sixth-order compact midpoint interpolation
INT6_ALPHA = 3.0 / 10.0
INT6_A = 3.0 / 2.0
INT6_B = 1.0 / 10.0

_NOMINAL_WIDTH = {"IMPL6": 1.5, "EXPL4": 2.0, "GAUSS": 3.0}


@dataclass(frozen=True)
class TestFilterSpec:
    kind: str = "IMPL6"
    alpha: float = -0.4

    __test__ = False  # not a pytest class

    def __post_init__(self):
        kind = str(self.kind).upper()
        if kind not in KINDS:
            raise ValueError(f"unknown test filter {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind == "IMPL6":
            if not -0.5 < self.alpha < 0.5:
                raise ValueError(f"IMPL6 alpha={self.alpha} outside (-0.5, 0.5)")
        else:
            object.__setattr__(self, "alpha", 0.0)

    @property
    def width_ratio(self):
        """Nominal ratio of test-filter to grid-filter width."""
        return _NOMINAL_WIDTH[self.kind]

    @property
    def table_row(self):
        """``(a, b, c, d, e)`` as tabulated."""
        if self.kind == "IMPL6":
            al = self.alpha
            return ((11.0 + 10.0 * al) / 16.0, (15.0 + 34.0 * al) / 32.0,
                    (-3.0 + 6.0 * al) / 16.0, (1.0 - 2.0 * al) / 32.0, 0.0)
        if self.kind == "EXPL4":
            return (0.5, 9.0 / 16.0, 0.0, -1.0 / 16.0, 0.0)
        return _GAUSS_W

    @property
    def weights(self):
        """Per-side stencil weights ``w_0 .. w_K`` actually applied."""
        row = self.table_row
        if self.kind == "GAUSS":
            return np.array(row)
        a, b, c, d, _ = row
        return np.array([a, b / 2.0, c / 2.0, d / 2.0])

    @property
    def half_width(self):
        return len(self.weights) - 1

    def gain(self, k_delta):
        return transfer_gain(self, k_delta)


def _check_kd(k_delta):
    kd = np.asarray(k_delta, dtype=np.float64)
    if np.any(kd < 0.0) or np.any(kd > np.pi * (1.0 + 1e-14)) or np.any(~np.isfinite(kd)):
        raise DomainError("k_delta must lie in [0, pi]")
    return kd


def transfer_gain(spec, k_delta):
    """Closed-form gain ``G(k Delta)`` of a test filter."""
    kd = _check_kd(k_delta)
    w = spec.weights
    num = w[0] + 2.0 * sum(w[j] * np.cos(j * kd) for j in range(1, len(w)))
    g = num / (1.0 + 2.0 * spec.alpha * np.cos(kd))
    return g if g.ndim else float(g)


def int6_transfer_gain(k_delta):
    """Gain of the sixth-order compact midpoint interpolation."""
    kd = _check_kd(k_delta)
    g = (INT6_A * np.cos(0.5 * kd) + INT6_B * np.cos(1.5 * kd)) / (1.0 + 2.0 * INT6_ALPHA * np.cos(kd))
    return g if g.ndim else float(g)


# -- application ------------------------------------------------------------

_calls = [0]


def filter_applications():
    """Number of scalar fields test-filtered since import (or last reset)."""
    return _calls[0]


@contextmanager
def count_filter_applications():
    """Yield a one-element list holding the applications made inside the block."""
    start = _calls[0]
    box = [0]
    try:
        yield box
    finally:
        box[0] = _calls[0] - start


@lru_cache(maxsize=None)
def _operator(spec, n):
    fac = constant_cyclic_factor(n, spec.alpha) if spec.alpha != 0.0 else None
    return spec.weights, fac


def apply_test_filter(f, spec, axes=(0, 1, 2)):
    """Test-filter a field (or a stack of fields) along the given spatial axes.

    Leading dimensions beyond the last three are treated as a batch; each
    member of the batch counts as one filter application.
    """
    axes = tuple(sorted(set(int(a) for a in axes)))
    if not axes or any(a not in (0, 1, 2) for a in axes):
        raise ValueError(f"axes must be a non-empty subset of (0, 1, 2), got {axes}")
    out = np.asarray(f, dtype=np.float64)
    need = max(10, 2 * spec.half_width + 1)
    for a in axes:
        n = out.shape[out.ndim - 3 + a]
        if n < need:
            raise AxisTooSmall(f"axis {a} has {n} points; {spec.kind} needs >= {need}")
    _calls[0] += int(np.prod(out.shape[:-3], dtype=np.int64))
    for a in axes:
        w, fac = _operator(spec, out.shape[out.ndim - 3 + a])
        out = apply_line(out, out.ndim - 3 + a, w, False, fac)
    return out
