"""Grids, thermodynamics and the conserved state.

Storage convention (used by every module)
-----------------------------------------
Fields are plain ``float64`` numpy arrays in C order on a node-collocated
periodic grid:

* scalar: ``(nx, ny, nz)``, so ``z`` is the fastest index;
* vector: ``(3, nx, ny, nz)``, components ``(x, y, z)``;
* tensor: ``(3, 3, nx, ny, nz)`` with ``T[i, j] = d u_i / d x_j``;
* conserved state: ``(5, nx, ny, nz)`` ordered ``rho, rho*u, rho*v, rho*w, rho*E``.

Node ``(i, j, k)`` sits at ``origin + (i*dx, j*dy, k*dz)``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveDensity, NonPositivePressure

MIN_POINTS = 8


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    nz: int
    lx: float
    ly: float
    lz: float
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if int(n) != n or n < MIN_POINTS:
                raise ValueError(f"{name}={n}: need an integer >= {MIN_POINTS}")
        for name in ("lx", "ly", "lz"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def cube(cls, n, length=2.0 * np.pi, centered=False):
        o = -0.5 * length if centered else 0.0
        return cls(n, n, n, length, length, length, (o, o, o))

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def lengths(self):
        return (self.lx, self.ly, self.lz)

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def dz(self):
        return self.lz / self.nz

    @property
    def spacing(self):
        return (self.dx, self.dy, self.dz)

    @property
    def size(self):
        return self.nx * self.ny * self.nz

    @property
    def volume(self):
        return self.lx * self.ly * self.lz

    @property
    def delta(self):
        """Geometric-mean cell size, ``(dx dy dz)^(1/3)``."""
        return (self.dx * self.dy * self.dz) ** (1.0 / 3.0)

    @property
    def is_isotropic(self):
        d = self.spacing
        return np.isclose(d[0], d[1], rtol=1e-12) and np.isclose(d[0], d[2], rtol=1e-12)

    def axis_coords(self, axis):
        n = self.shape[axis]
        return self.origin[axis] + np.arange(n) * self.spacing[axis]

    def coords(self):
        return tuple(self.axis_coords(a) for a in range(3))

    def mesh(self):
        return np.meshgrid(*self.coords(), indexing="ij")

    def zeros(self, *lead):
        return np.zeros(tuple(lead) + self.shape)


@dataclass(frozen=True)
class ThermoParams:
    gamma: float = 1.4
    mu: float = 0.0
    prandtl: float = 0.71
    prandtl_t: float = 0.5
    cp: float = 3.5

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")
        if self.mu < 0.0:
            raise ValueError("mu must be non-negative")
        if not self.prandtl > 0.0 or not self.prandtl_t > 0.0:
            raise ValueError("Prandtl numbers must be positive")
        if not self.cp > 0.0:
            raise ValueError("cp must be positive")

    @property
    def r_gas(self):
        return self.cp * (self.gamma - 1.0) / self.gamma

    @property
    def conductivity(self):
        return self.mu * self.cp / self.prandtl


@dataclass
class ConservedState:
    grid: Grid
    q: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.q = np.ascontiguousarray(self.q, dtype=np.float64)
        if self.q.shape != (5,) + self.grid.shape:
            raise ValueError(f"state shape {self.q.shape} does not match grid {self.grid.shape}")

    @property
    def rho(self):
        return self.q[0]

    @property
    def mom(self):
        return self.q[1:4]

    @property
    def rhoE(self):
        return self.q[4]

    def copy(self):
        return ConservedState(self.grid, self.q.copy())


def volume_average(f):
    """Arithmetic mean over the last three (spatial) axes."""
    f = np.asarray(f, dtype=np.float64)
    return f.mean(axis=(-3, -2, -1))


def conserved_encode(grid, rho, u, p, thermo):
    rho = np.broadcast_to(np.asarray(rho, dtype=np.float64), grid.shape)
    u = np.broadcast_to(np.asarray(u, dtype=np.float64), (3,) + grid.shape)
    p = np.broadcast_to(np.asarray(p, dtype=np.float64), grid.shape)
    q = np.empty((5,) + grid.shape)
    q[0] = rho
    q[1:4] = rho * u
    q[4] = p / (thermo.gamma - 1.0) + 0.5 * rho * (u * u).sum(axis=0)
    return ConservedState(grid, q)


def decode_q(q, thermo, check=True):
    """Velocity and pressure from a raw ``(5, ...)`` conserved array."""
    rho = q[0]
    if check:
        rmin = rho.min()
        if not rmin > 0.0:
            raise NonPositiveDensity(f"min density {float(rmin):.6g}")
    u = q[1:4] / rho
    p = (thermo.gamma - 1.0) * (q[4] - 0.5 * (q[1] * u[0] + q[2] * u[1] + q[3] * u[2]))
    if check:
        pmin = p.min()
        if not pmin > 0.0:
            raise NonPositivePressure(f"min pressure {float(pmin):.6g}")
    return u, p


def primitive_decode(state, thermo):
    """Return ``(velocity, pressure, temperature)`` for a conserved state."""
    u, p = decode_q(state.q, thermo)
    temperature = p / (state.rho * thermo.r_gas)
    return u, p, temperature
