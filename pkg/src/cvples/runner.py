"""Run orchestration: initialise a case, advance it to ``t_end`` and write
diagnostics, spectra and snapshots; wall-clock overhead comparison."""
from dataclasses import dataclass, field, replace
import json
import logging
import os
from pathlib import Path
import time
from typing import List, Optional

import numpy as np

from .cases import init_helix, init_tgv
from .diagnostics import (DiagnosticsRecord, energy_spectrum, kinetic_energy, sgs_dissipation,
                          vortex_deviation)
from .errors import SolverBlowUp
from .filters import count_filter_applications
from .io import DiagnosticsWriter, atomic_open, write_snapshot, write_spectrum
from .solver import FlowPipeline, compute_dt, max_divergence, rk3_step

log = logging.getLogger(__name__)

OUTPUT_ENV = "CVPLES_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def resolve_output_dir(config, output_dir=None):
    """Explicit argument, then the environment override, then the config value."""
    if output_dir is not None:
        return Path(output_dir)
    env = os.environ.get(OUTPUT_ENV)
    return Path(env) if env else Path(config.output_dir)


@dataclass
class RunResult:
    status: int
    steps: int
    t: float
    records: List[DiagnosticsRecord] = field(default_factory=list)
    reason: Optional[str] = None
    wall_time: float = 0.0
    output_dir: Optional[Path] = None
    state: object = field(default=None, repr=False)

    @property
    def blew_up(self):
        return self.status == EXIT_BLOWUP

    def series(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)


def build_case(config):
    """Grid, thermo, initial state and case parameters for a RunConfig."""
    grid = config.grid()
    thermo = config.thermo()
    if config.case == "tgv":
        params = config.tgv_params()
        state = init_tgv(grid, params, thermo)
    else:
        params = config.helix_params()
        state = init_helix(grid, params, thermo)
    return grid, thermo, state, params


def build_pipeline(config, grid, thermo):
    return FlowPipeline(grid, thermo, config.sgs_config(), config.cvp_config(),
                        filter_alpha=config.filter_alpha if config.solution_filter else None,
                        mut_per_stage=config.mut_per_stage)


def _record(step, t, dt, state, pipeline, helix=None):
    info = pipeline.info
    prims = pipeline.primitives
    return DiagnosticsRecord(
        step=step,
        t=t,
        E=kinetic_energy(state),
        eps_sgs=sgs_dissipation(info.mut, info.strain_mag),
        mean_f=1.0 if info.sensor is None else float(np.clip(info.sensor.mean(), 0.0, 1.0)),
        max_mut=0.0 if info.mut is None else float(info.mut.max()),
        dt=dt,
        min_rho=float(state.rho.min()),
        max_div=max_divergence(prims),
        sigma_min=info.sigma_min,
        sigma_max=info.sigma_max,
        d=None if helix is None else vortex_deviation(state, helix.R),
    )


def run(config, output_dir=None, write_files=True, progress_every=0):
    """Advance ``config`` to ``t_end`` (or ``max_steps``) and return a RunResult.

    ``status`` is :data:`EXIT_OK` or :data:`EXIT_BLOWUP`; on blow-up the
    diagnostics gathered so far are flushed and the reason recorded.
    """
    grid, thermo, state, params = build_case(config)
    pipeline = build_pipeline(config, grid, thermo)
    helix = params if config.case == "helix" else None
    out = resolve_output_dir(config, output_dir) / config.name if write_files else None
    writer = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        writer = DiagnosticsWriter(out / "diagnostics.csv", DiagnosticsRecord.columns(helix is not None))

    result = RunResult(EXIT_OK, 0, 0.0, output_dir=out)
    t, step = 0.0, 0
    next_spec = 0.0 if config.spectra_every else None
    next_snap = 0.0 if config.snapshot_every else None
    recorded_step = -1
    wall0 = time.perf_counter()
    eps_t = 1e-12 * config.t_end

    def emit(dt):
        nonlocal recorded_step
        rec = _record(step, t, dt, state, pipeline, helix)
        result.records.append(rec)
        recorded_step = step
        if writer is not None:
            writer.write(rec.row(helix is not None))

    try:
        while True:
            pipeline.begin_step(state.q)
            dt = compute_dt(state, thermo, config.cfl, pipeline.mut_max())
            dt = min(dt, config.t_end - t) if config.t_end - t > eps_t else dt
            if step % config.diag_every == 0:
                emit(dt)
            if out is not None:
                if next_spec is not None and t >= next_spec - eps_t:
                    u = state.q[1:4] / state.q[0]
                    k, e_k = energy_spectrum(u, grid)
                    write_spectrum(out / f"spectrum_{step:07d}.txt", k, e_k, t)
                    next_spec += config.spectra_every
                if next_snap is not None and t >= next_snap - eps_t:
                    write_snapshot(state, out / f"snapshot_{step:07d}.cvpl", t)
                    next_snap += config.snapshot_every
            if t >= config.t_end - eps_t or (config.max_steps and step >= config.max_steps):
                break
            state = rk3_step(state, dt, pipeline)
            t += dt
            step += 1
            if progress_every and step % progress_every == 0:
                log.info("step %d t=%.4f E=%.6g", step, t, result.records[-1].E)
        if recorded_step != step:
            emit(dt)
    except SolverBlowUp as exc:
        result.status = EXIT_BLOWUP
        result.reason = f"{exc} (step {step + 1}, t={t:.6g})"
        log.warning("blow-up: %s", result.reason)
    finally:
        if writer is not None:
            writer.close()
        result.steps, result.t = step, t
        result.wall_time = time.perf_counter() - wall0
        result.state = state
        if out is not None:
            summary = {"status": result.status, "reason": result.reason, "steps": step, "t": t,
                       "wall_time": result.wall_time, "case": config.case, "model": config.model,
                       "cvp": config.cvp_config() is not None}
            with atomic_open(out / "summary.json", "w") as fh:
                json.dump(summary, fh, indent=2)
    return result


# ---------------------------------------------------------------------------
# overhead
# ---------------------------------------------------------------------------


@dataclass
class OverheadRow:
    label: str
    seconds_per_step: float
    relative: float
    filter_applications_per_step: float

    @property
    def overhead(self):
        """Extra cost relative to the baseline, e.g. 0.15 for +15 %."""
        return self.relative - 1.0


def _label(cfg):
    if cfg.model == "none":
        return "no model"
    return ("CvP-" if cfg.cvp_config() is not None else "") + cfg.model


def time_steps(config, steps=10, repeats=3):
    """Best-of-``repeats`` wall time per step and test-filter applications per step.

    Initialisation and a warm-up step (which triggers compilation) are
    excluded; so is all I/O.
    """
    grid, thermo, state0, _ = build_case(config)
    pipeline = build_pipeline(config, grid, thermo)
    dt = compute_dt(state0, thermo, config.cfl)
    rk3_step(state0, dt, pipeline)  # warm-up
    best = np.inf
    apps = 0
    for _ in range(repeats):
        state = state0
        with count_filter_applications() as box:
            t0 = time.perf_counter()
            for _ in range(steps):
                state = rk3_step(state, dt, pipeline)
            elapsed = time.perf_counter() - t0
        best = min(best, elapsed / steps)
        apps = box[0] / steps
    return best, apps


def measure_overhead(configs, steps=10, repeats=3):
    """Per-step wall time of each config relative to a no-model baseline.

    All configs must share case and grid. If none of them is a no-model run,
    a baseline derived from the first config is timed and listed first.
    """
    configs = list(configs)
    if not configs:
        return []
    ref = configs[0]
    for c in configs[1:]:
        if c.case != ref.case or c.shape != ref.shape:
            raise ValueError("overhead comparison needs identical case and grid")
    base = next((c for c in configs if c.model == "none"), None)
    if base is None:
        base = replace(ref, model="none", cvp=False)
        configs = [base] + configs
    timings = {}
    rows = []
    for cfg in configs:
        key = id(cfg)
        if key not in timings:
            timings[key] = time_steps(cfg, steps, repeats)
    t_base = timings[id(base)][0]
    for cfg in configs:
        sec, apps = timings[id(cfg)]
        rows.append(OverheadRow(_label(cfg), sec, 1.0 if cfg is base else sec / t_base, apps))
    return rows


def format_overhead(rows):
    lines = [f"{'model':<22} {'s/step':>10} {'relative':>9} {'filters/step':>13}"]
    for r in rows:
        lines.append(f"{r.label:<22} {r.seconds_per_step:>10.4f} {r.relative:>9.3f} "
                     f"{r.filter_applications_per_step:>13.1f}")
    return "\n".join(lines)
