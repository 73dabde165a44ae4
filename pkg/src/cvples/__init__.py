"""Compressible LES mini-solver with the coherent-vorticity-preserving (CvP)
eddy-viscosity sensor."""
from .cases import HelixParams, TgvParams, init_helix, init_tgv
from .compact import SIXTH_ORDER, ddx, gradient, solution_filter
from .config import RunConfig, parse_config
from .cvp import CvpConfig, sensor_f, sigma_eq_quadrature, sigma_eq_sharp
from .filters import TestFilterSpec, apply_test_filter, transfer_gain
from .grid import ConservedState, Grid, ThermoParams, conserved_encode, primitive_decode, volume_average
from .runner import measure_overhead, run
from .sgs import SgsModelConfig
from .solver import FlowPipeline, compute_dt, rk3_step

__version__ = "0.1.0"

__all__ = [
    "ConservedState", "CvpConfig", "FlowPipeline", "Grid", "HelixParams", "RunConfig",
    "SIXTH_ORDER", "SgsModelConfig", "TestFilterSpec", "TgvParams", "ThermoParams",
    "apply_test_filter", "compute_dt", "conserved_encode", "ddx", "gradient", "init_helix",
    "init_tgv", "measure_overhead", "parse_config", "primitive_decode", "rk3_step", "run",
    "sensor_f", "sigma_eq_quadrature", "sigma_eq_sharp", "solution_filter", "transfer_gain",
    "volume_average",
]
