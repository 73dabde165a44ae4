"""Right-hand side of the filtered compressible Navier-Stokes equations and
SSP-RK3 time stepping.

The right-hand side is written in divergence form,

    dq/dt = - div(F_c) + div(F_v) + div(F_sgs),

with every flux differentiated by the sixth-order compact scheme. The fused
:func:`total_rhs` assembles all fluxes per direction before differentiating,
which needs 12 derivatives for the primitive gradients plus 15 for the flux
divergence. :func:`convective_rhs`, :func:`viscous_rhs` and :func:`sgs_rhs`
return the individual contributions for budgets and tests.

Heat fluxes enter as ``+div(lambda grad T)`` and ``+div(mu_t c_p / Pr_t grad T)``
(diffusive sign).
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _jit
from . import cvp as cvp_mod
from .compact import ddx, solution_filter
from .errors import NonPositiveDensity, NonPositivePressure, SolverBlowUp
from .grid import ConservedState, decode_q, volume_average
from .sgs import SgsModelConfig, eddy_viscosity, strain_from_gradient


class Primitives(NamedTuple):
    u: np.ndarray       # (3, ...)
    p: np.ndarray
    T: np.ndarray
    grad: np.ndarray    # (3, 3, ...), grad[i, j] = du_i/dx_j
    grad_T: np.ndarray  # (3, ...)


def compute_primitives(q, grid, thermo, check=True):
    u, p = decode_q(q, thermo, check=check)
    T = p / (q[0] * thermo.r_gas)
    stacked = np.concatenate([u, T[None]])
    d = [ddx(stacked, grid, j) for j in range(3)]
    grad = np.stack([d[j][:3] for j in range(3)], axis=1)
    grad_T = np.stack([d[j][3] for j in range(3)])
    return Primitives(u, p, T, grad, grad_T)


def _stress(grad, mu):
    """``2 mu S`` with the deviatoric strain; ``mu`` scalar or field."""
    return 2.0 * mu * strain_from_gradient(grad).tensor


def _divergence_of(fluxes, grid):
    """``sum_j d/dx_j F[j]`` for ``fluxes`` of shape ``(3, ncomp, ...)``."""
    out = ddx(fluxes[0], grid, 0)
    out += ddx(fluxes[1], grid, 1)
    out += ddx(fluxes[2], grid, 2)
    return out


@_jit.njit
def _flux_kernel(q, u, p, grad, grad_t, mut, mu, lam, cp_prt, out):
    # out[j, c] = total flux of conserved variable c along axis j, with the
    # viscous and SGS contributions entering with a minus sign
    nx, ny, nz = p.shape
    has_mut = mut.shape[0] == nx
    m = np.empty(nz)
    kap = np.empty(nz)
    div3 = np.empty(nz)
    work = np.empty(nz)
    for a in range(nx):
        for b in range(ny):
            for c in range(nz):
                if has_mut:
                    m[c] = mu + mut[a, b, c]
                    kap[c] = lam + mut[a, b, c] * cp_prt
                else:
                    m[c] = mu
                    kap[c] = lam
                div3[c] = (grad[0, 0, a, b, c] + grad[1, 1, a, b, c] + grad[2, 2, a, b, c]) / 3.0
            for j in range(3):
                for c in range(nz):
                    out[j, 0, a, b, c] = q[1 + j, a, b, c]
                    work[c] = 0.0
                for i in range(3):
                    diag = 1.0 if i == j else 0.0
                    for c in range(nz):
                        s2 = grad[i, j, a, b, c] + grad[j, i, a, b, c] - 2.0 * diag * div3[c]
                        tau = m[c] * s2
                        # the SGS stress does no work in the energy equation
                        work[c] += mu * s2 * u[i, a, b, c]
                        out[j, 1 + i, a, b, c] = q[1 + i, a, b, c] * u[j, a, b, c] - tau + diag * p[a, b, c]
                for c in range(nz):
                    out[j, 4, a, b, c] = ((q[4, a, b, c] + p[a, b, c]) * u[j, a, b, c] - work[c]
                                          - kap[c] * grad_t[j, a, b, c])


def _fluxes_numpy(q, u, p, grad, grad_t, mut, thermo):
    if mut is None:
        mu_eff = thermo.mu
        kappa = thermo.conductivity
    else:
        mu_eff = thermo.mu + mut
        kappa = thermo.conductivity + mut * (thermo.cp / thermo.prandtl_t)
    s2 = _stress(grad, 1.0)
    tau = mu_eff * s2
    h = q[4] + p
    out = np.empty((3,) + q.shape)
    for j in range(3):
        f = out[j]
        f[0] = q[1 + j]
        for i in range(3):
            f[1 + i] = q[1 + i] * u[j] - tau[i, j]
        f[1 + j] += p
        work = thermo.mu * (s2[0, j] * u[0] + s2[1, j] * u[1] + s2[2, j] * u[2])
        f[4] = h * u[j] - work - kappa * grad_t[j]
    return out


_NO_FIELD = np.zeros((1, 1, 1))


def total_fluxes(q, prims, thermo, mut=None):
    """Combined convective minus diffusive fluxes, shape ``(3, 5, nx, ny, nz)``."""
    if _jit.USE_NUMBA and _jit.HAVE_NUMBA:
        out = np.empty((3,) + q.shape)
        m = _NO_FIELD if mut is None else np.ascontiguousarray(mut, dtype=np.float64)
        _flux_kernel(q, prims.u, prims.p, np.ascontiguousarray(prims.grad), np.ascontiguousarray(prims.grad_T),
                     m, float(thermo.mu), float(thermo.conductivity),
                     float(thermo.cp / thermo.prandtl_t), out)
        return out
    return _fluxes_numpy(q, prims.u, prims.p, prims.grad, prims.grad_T, mut, thermo)


def total_rhs(q, grid, thermo, mut=None, prims=None):
    """Fused ``dq/dt`` for the conserved array ``q`` of shape ``(5, nx, ny, nz)``."""
    if prims is None:
        prims = compute_primitives(q, grid, thermo)
    return -_divergence_of(total_fluxes(q, prims, thermo, mut), grid)


def convective_rhs(state, thermo):
    q = state.q
    u, p = decode_q(q, thermo)
    fl = np.empty((3,) + q.shape)
    for j in range(3):
        fl[j, 0] = q[1 + j]
        for i in range(3):
            fl[j, 1 + i] = q[1 + i] * u[j]
        fl[j, 1 + j] += p
        fl[j, 4] = (q[4] + p) * u[j]
    return -_divergence_of(fl, state.grid)


def _diffusive_rhs(state, thermo, mu, kappa, work):
    q = state.q
    pr = compute_primitives(q, state.grid, thermo)
    tau = _stress(pr.grad, mu)
    fl = np.zeros((3,) + q.shape)
    for j in range(3):
        for i in range(3):
            fl[j, 1 + i] = tau[i, j]
        fl[j, 4] = kappa * pr.grad_T[j]
        if work:
            fl[j, 4] += tau[0, j] * pr.u[0] + tau[1, j] * pr.u[1] + tau[2, j] * pr.u[2]
    return _divergence_of(fl, state.grid)


def viscous_rhs(state, thermo):
    """``+div(F_v)`` with ``tau = 2 mu S`` and Fourier heat conduction."""
    return _diffusive_rhs(state, thermo, thermo.mu, thermo.conductivity, work=True)


def sgs_rhs(state, mut, thermo):
    """``+div(F_sgs)``: ``2 mu_t S`` in momentum, ``mu_t c_p / Pr_t grad T`` in energy."""
    mut = np.asarray(mut, dtype=np.float64)
    return _diffusive_rhs(state, thermo, mut, mut * (thermo.cp / thermo.prandtl_t), work=False)


@dataclass
class RhsBudget:
    convective: np.ndarray
    viscous: np.ndarray
    sgs: np.ndarray

    @property
    def total(self):
        return self.convective + self.viscous + self.sgs


def rhs_budget(state, thermo, mut=None):
    sgs = np.zeros_like(state.q) if mut is None else sgs_rhs(state, mut, thermo)
    return RhsBudget(convective_rhs(state, thermo), viscous_rhs(state, thermo), sgs)


# ---------------------------------------------------------------------------
# time step
# ---------------------------------------------------------------------------


def compute_dt(state, thermo, cfl, mut_max=0.0):
    """Acoustic CFL step, capped by the explicit viscous limit."""
    u, p = decode_q(state.q, thermo)
    rho = state.rho
    c = np.sqrt(thermo.gamma * p / rho)
    dt = np.inf
    for a, h in enumerate(state.grid.spacing):
        dt = min(dt, h / float(np.max(np.abs(u[a]) + c)))
    dt *= cfl
    nu = thermo.mu + float(mut_max)
    if nu > 0.0:
        hmin = min(state.grid.spacing)
        dt = min(dt, hmin**2 * float(rho.min()) / (2.0 * nu * 3))
    return dt


@dataclass
class StepInfo:
    """Model quantities evaluated at the start of a step."""

    mut: Optional[np.ndarray] = None
    sensor: Optional[np.ndarray] = None
    strain_mag: Optional[np.ndarray] = None
    c_d: Optional[float] = None
    sigma_min: float = float("nan")
    sigma_max: float = float("nan")


class FlowPipeline:
    """Right-hand side plus per-step hooks consumed by :func:`rk3_step`.

    ``begin_step`` refreshes the eddy viscosity (and the CvP sensor) once per
    step unless ``mut_per_stage`` is set; ``finish_step`` applies the solution
    filter to the five conserved fields.
    """

    def __init__(self, grid, thermo, sgs=None, cvp=None, filter_alpha=0.49, mut_per_stage=False):
        self.grid = grid
        self.thermo = thermo
        self.sgs = sgs if sgs is not None else SgsModelConfig("none")
        self.cvp = cvp
        self.filter_alpha = filter_alpha
        self.mut_per_stage = mut_per_stage
        self.info = StepInfo()
        self._prims = None
        self._prepared = None

    @property
    def has_model(self):
        return self.sgs.kind != "none"

    def evaluate_model(self, q, prims):
        info = StepInfo()
        if not self.has_model:
            return info
        rho = q[0]
        mut, strain, c_d = eddy_viscosity(self.sgs, rho, prims.u, prims.grad, self.grid)
        if self.cvp is not None:
            f, sigma = cvp_mod.sensor_from_gradient(prims.grad, self.cvp)
            mut = cvp_mod.apply_cvp(mut, f)
            info.sensor = f
            info.sigma_min, info.sigma_max = float(sigma.min()), float(sigma.max())
        info.mut = mut
        info.strain_mag = strain.magnitude
        info.c_d = c_d
        return info

    def begin_step(self, q):
        """Evaluate primitives and the model for ``q``.

        Calling it twice on the same array object (for example diagnostics
        followed by the step) evaluates only once.
        """
        if self._prims is not None and self._prepared is q:
            return
        prims = compute_primitives(q, self.grid, self.thermo)
        self.info = self.evaluate_model(q, prims)
        self._prims = prims
        self._prepared = q

    @property
    def primitives(self):
        """Primitives cached by the last :meth:`begin_step` (None once consumed)."""
        return self._prims

    def __call__(self, q):
        prims, self._prims, self._prepared = self._prims, None, None
        if prims is None:
            prims = compute_primitives(q, self.grid, self.thermo)
            if self.mut_per_stage and self.has_model:
                self.info = self.evaluate_model(q, prims)
        return total_rhs(q, self.grid, self.thermo, self.info.mut, prims)

    def finish_step(self, q):
        if self.filter_alpha is None:
            return q
        return solution_filter(q, self.filter_alpha)

    def mut_max(self):
        return 0.0 if self.info.mut is None else float(self.info.mut.max())


def _check_finite(q):
    if not np.all(np.isfinite(q)):
        raise SolverBlowUp("non-finite value in the conserved state")


def _check_stage(q, thermo):
    _check_finite(q)
    try:
        decode_q(q, thermo)
    except NonPositiveDensity as exc:
        raise SolverBlowUp(f"non-positive density ({exc})") from None
    except NonPositivePressure as exc:
        raise SolverBlowUp(f"non-positive pressure ({exc})") from None


def rk3_step(state, dt, pipeline, thermo=None):
    """Advance one SSP-RK3 (Shu-Osher) step.

    ``pipeline`` is either a :class:`FlowPipeline` or a plain callable
    ``q -> dq/dt``. The new state is checked for NaN and, when ``thermo`` (or
    ``pipeline.thermo``) is available, for non-positive density and pressure.
    """
    thermo = thermo if thermo is not None else getattr(pipeline, "thermo", None)
    begin = getattr(pipeline, "begin_step", None)
    finish = getattr(pipeline, "finish_step", None)

    # a FlowPipeline decodes (and validates) every stage state itself
    validates = isinstance(pipeline, FlowPipeline)

    def check(q):
        if validates:
            return
        if thermo is None:
            _check_finite(q)
        else:
            _check_stage(q, thermo)

    q0 = state.q
    try:
        if begin is not None:
            begin(q0)
        q1 = q0 + dt * pipeline(q0)
        check(q1)
        q2 = 0.75 * q0 + 0.25 * (q1 + dt * pipeline(q1))
        check(q2)
        q3 = q0 / 3.0 + (2.0 / 3.0) * (q2 + dt * pipeline(q2))
    except (NonPositiveDensity, NonPositivePressure) as exc:
        # intermediate stages are validated when their primitives are decoded
        raise SolverBlowUp(f"non-positive state in an RK stage ({exc})") from None
    if finish is not None:
        q3 = finish(q3)
    if thermo is not None:
        _check_stage(q3, thermo)
    else:
        _check_finite(q3)
    return ConservedState(state.grid, q3)


def max_divergence(prims):
    g = prims.grad
    return float(np.max(np.abs(g[0, 0] + g[1, 1] + g[2, 2])))


def kinetic_energy_of(q):
    u = q[1:4] / q[0]
    return float(volume_average(0.5 * (u * u).sum(axis=0)))
