"""Flat ``key=value`` run configuration.

One assignment per line, ``#`` starts a comment, blank lines are ignored.
Command-line ``--key=value`` overrides are applied on top of the file with the
same parser. Unknown keys are errors. See :data:`KEYS` for the accepted keys.
"""
from dataclasses import dataclass, field
import math
from typing import Optional

from .cvp import INTERPOLANT_MODES
from .errors import BadValue, MissingRequired, UnknownKey
from .filters import KINDS as FILTER_KINDS
from .sgs import normalize_kind

CASES = ("tgv", "helix")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(s):
    v = s.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"expected on/off, got {s!r}")


def _pos_int(s):
    v = int(s)
    if v <= 0:
        raise ValueError("must be a positive integer")
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise ValueError("must be a non-negative integer")
    return v


def _pos_float(s):
    v = float(s)
    if not (v > 0.0 and math.isfinite(v)):
        raise ValueError("must be a positive finite number")
    return v


def _nonneg_float(s):
    v = float(s)
    if not (v >= 0.0 and math.isfinite(v)):
        raise ValueError("must be a non-negative finite number")
    return v


def _cadence(s):
    """Positive time interval, or ``off``."""
    if s.strip().lower() in _FALSE | {"none"}:
        return None
    return _pos_float(s)


def _optional_float(s):
    if s.strip().lower() in ("auto", "none"):
        return None
    return float(s)


def _kernel_exponent(s):
    v = s.strip().lower()
    if v in ("inf", "infinity", "rankine"):
        return math.inf
    return float(v)


def _case(s):
    v = s.strip().lower()
    if v not in CASES:
        raise ValueError(f"expected one of {CASES}")
    return v


def _filter_kind(s):
    v = s.strip().upper()
    if v not in FILTER_KINDS:
        raise ValueError(f"expected one of {FILTER_KINDS}")
    return v


def _interp(s):
    v = s.strip().lower()
    if v not in INTERPOLANT_MODES:
        raise ValueError(f"expected one of {INTERPOLANT_MODES}")
    return v


def _axes(s):
    """``xyz``, ``xz``, ``0,2`` ... -> sorted tuple of axis indices."""
    v = s.strip().lower().replace(",", "").replace(" ", "")
    names = {"x": 0, "y": 1, "z": 2, "0": 0, "1": 1, "2": 2}
    if not v or any(c not in names for c in v):
        raise ValueError("axes are given as letters from 'xyz' or digits 0-2")
    return tuple(sorted({names[c] for c in v}))


def _text(s):
    return s.strip()


# key -> (RunConfig field, converter)
KEYS = {
    "case": ("case", _case),
    "n": ("n", _pos_int),
    "nx": ("nx", _pos_int),
    "ny": ("ny", _pos_int),
    "nz": ("nz", _pos_int),
    # TGV
    "re": ("re", _pos_float),
    "mach": ("mach", _pos_float),
    # gas
    "gamma": ("gamma", _pos_float),
    "prandtl": ("prandtl", _pos_float),
    "prandtl_t": ("prandtl_t", _pos_float),
    # model
    "model": ("model", normalize_kind),
    "cs": ("c_s", _pos_float),
    "ck": ("c_k", _pos_float),
    "vreman_c": ("vreman_c", _optional_float),
    "dynamic_filter": ("dynamic_filter", _filter_kind),
    "cvp": ("cvp", _bool),
    "test_filter": ("test_filter", _filter_kind),
    "impl6_alpha": ("impl6_alpha", float),
    "cvp_axes": ("cvp_axes", _axes),
    "sigma_eq": ("sigma_eq", _optional_float),
    "interpolant": ("interpolant", _interp),
    "enstrophy_floor": ("enstrophy_floor", _optional_float),
    # numerics
    "cfl": ("cfl", _pos_float),
    "t_end": ("t_end", _pos_float),
    "max_steps": ("max_steps", _nonneg_int),
    "solution_filter": ("solution_filter", _bool),
    "filter_alpha": ("filter_alpha", float),
    "mut_per_stage": ("mut_per_stage", _bool),
    # output
    "diag_every": ("diag_every", _pos_int),
    "spectra_every": ("spectra_every", _cadence),
    "snapshot_every": ("snapshot_every", _cadence),
    "output_dir": ("output_dir", _text),
    "name": ("name", _text),
    "seed": ("seed", _nonneg_int),
    # helix
    "radius": ("radius", _pos_float),
    "pitch_ratio": ("pitch_ratio", _pos_float),
    "core_ratio": ("core_ratio", _pos_float),
    "n_kernel": ("n_kernel", _kernel_exponent),
    "re_gamma": ("re_gamma", _pos_float),
    "nu": ("nu", _pos_float),
    "n_turns": ("n_turns", _pos_int),
    "lx": ("lx", _pos_float),
    "lz": ("lz", _pos_float),
    "image_layers": ("image_layers", _nonneg_int),
    "samples_per_turn": ("samples_per_turn", _pos_int),
    "mach_peak": ("mach_peak", _pos_float),
    "perturbation": ("perturbation", _nonneg_float),
}


@dataclass(frozen=True)
class RunConfig:
    case: str
    nx: int
    ny: int
    nz: int
    n: Optional[int] = None
    re: float = 5000.0
    mach: float = 0.1
    gamma: float = 1.4
    prandtl: float = 0.71
    prandtl_t: float = 0.5
    model: str = "smagorinsky"
    c_s: float = 0.172
    c_k: float = 1.5
    vreman_c: Optional[float] = None
    dynamic_filter: str = "IMPL6"
    cvp: bool = True
    test_filter: str = "IMPL6"
    impl6_alpha: float = -0.4
    cvp_axes: tuple = (0, 1, 2)
    sigma_eq: Optional[float] = None
    interpolant: str = "identity"
    enstrophy_floor: Optional[float] = None
    cfl: float = 0.5
    t_end: float = 20.0
    max_steps: int = 0
    solution_filter: bool = True
    filter_alpha: float = 0.49
    mut_per_stage: bool = False
    diag_every: int = 10
    spectra_every: Optional[float] = None
    snapshot_every: Optional[float] = None
    output_dir: str = "output"
    name: str = "run"
    seed: int = 0
    radius: float = 0.115
    pitch_ratio: float = 1.1
    core_ratio: float = 0.06
    n_kernel: float = 4.0
    re_gamma: float = 7000.0
    nu: float = 1.0e-6
    n_turns: int = 4
    lx: float = 0.5
    lz: float = 0.5
    image_layers: int = 8
    samples_per_turn: int = 512
    mach_peak: float = 0.1
    perturbation: float = 1.0e-4
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    def with_overrides(self, overrides):
        """Apply ``{key: text}`` overrides (config-file key names)."""
        return _build({**_as_keys(self), **_normalise(overrides)})

    # -- factories --------------------------------------------------------

    def thermo(self):
        if self.case == "tgv":
            return self.tgv_params().thermo(self.gamma, self.prandtl, self.prandtl_t)
        return self.helix_params().thermo(self.prandtl, self.prandtl_t)

    def tgv_params(self):
        from .cases import TgvParams
        return TgvParams(re=self.re, mach=self.mach)

    def helix_params(self):
        from .cases import HelixParams
        return HelixParams(R=self.radius, pitch_ratio=self.pitch_ratio, core_ratio=self.core_ratio,
                           n_kernel=self.n_kernel, re_gamma=self.re_gamma, nu=self.nu,
                           n_turns=self.n_turns, lx=self.lx, lz=self.lz,
                           image_layers=self.image_layers, samples_per_turn=self.samples_per_turn,
                           mach_peak=self.mach_peak, gamma=self.gamma,
                           perturbation=self.perturbation, seed=self.seed)

    def grid(self):
        from .grid import Grid
        if self.case == "tgv":
            p = self.tgv_params()
            span = 2.0 * math.pi * p.L
            o = -0.5 * span
            return Grid(self.nx, self.ny, self.nz, span, span, span, (o, o, o))
        return self.helix_params().grid(self.nx, self.ny, self.nz)

    def reference_rate(self):
        """``V_ref / L_ref`` of the case: ``V0 / L`` for TGV, ``Gamma / R^2`` for the helix."""
        if self.case == "tgv":
            p = self.tgv_params()
            return p.V0 / p.L
        p = self.helix_params()
        return p.gamma_circ / p.R**2

    def sgs_config(self):
        from .sgs import SgsModelConfig
        return SgsModelConfig(self.model, c_s=self.c_s, c_k=self.c_k, vreman_c=self.vreman_c,
                              dynamic_filter=self._filter_spec(self.dynamic_filter))

    def _filter_spec(self, kind):
        from .filters import TestFilterSpec
        return TestFilterSpec(kind, self.impl6_alpha if kind == "IMPL6" else 0.0)

    def cvp_config(self):
        """``CvpConfig`` or ``None`` when the correction is off or there is no model."""
        if not self.cvp or self.model == "none":
            return None
        from .cvp import CvpConfig
        floor = self.enstrophy_floor
        if floor is None:
            floor = 1e-12 * self.reference_rate() ** 2
        return CvpConfig(filter=self._filter_spec(self.test_filter), axes=self.cvp_axes,
                         sigma_eq=self.sigma_eq, enstrophy_floor=floor,
                         interpolant_mode=self.interpolant)


def _normalise(overrides):
    out = {}
    for k, v in (overrides or {}).items():
        key = str(k).strip().lower().lstrip("-").replace("-", "_")
        out[key] = str(v)
    return out


def _as_keys(cfg):
    """Inverse of the parser for the fields that were explicitly set."""
    return dict(cfg.extra)


def parse_lines(text):
    """``{key: raw value}`` from config text, preserving the last assignment."""
    items = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadValue(line, f"line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        key = key.strip().lower().replace("-", "_")
        if not key:
            raise BadValue("", f"line {lineno}: empty key")
        items[key] = value.strip()
    return items


def parse_config(text, overrides=None):
    """Parse config text plus optional ``{key: value}`` overrides into a RunConfig."""
    items = parse_lines(text)
    items.update(_normalise(overrides))
    return _build(items)


def _build(items):
    values = {}
    for key, raw in items.items():
        if key not in KEYS:
            raise UnknownKey(key)
        name, conv = KEYS[key]
        try:
            values[name] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise BadValue(key, f"{raw!r}: {exc}") from None
    if "case" not in values:
        raise MissingRequired("case")
    n = values.get("n")
    dims = {}
    for a in ("nx", "ny", "nz"):
        if a in values:
            dims[a] = values[a]
        elif n is not None:
            dims[a] = n
        else:
            raise MissingRequired("grid")
    values.update(dims)
    cfg = RunConfig(**values, extra=dict(items))
    _validate(cfg)
    return cfg


def _validate(cfg):
    for a in ("nx", "ny", "nz"):
        if getattr(cfg, a) < 10:
            raise BadValue(a, f"{getattr(cfg, a)} points; at least 10 per axis are required")
    if cfg.case == "tgv" and not cfg.mach <= 0.3:
        raise BadValue("mach", "must lie in (0, 0.3]")
    if not cfg.gamma > 1.0:
        raise BadValue("gamma", "must exceed 1")
    if cfg.enstrophy_floor is not None and not cfg.enstrophy_floor > 0.0:
        raise BadValue("enstrophy_floor", "must be positive")
    if cfg.sigma_eq is not None and not 0.0 < cfg.sigma_eq < 1.0:
        raise BadValue("sigma_eq", "must lie in (0, 1)")
    if not -0.5 < cfg.impl6_alpha < 0.5:
        raise BadValue("impl6_alpha", "must lie in (-0.5, 0.5)")
    if not 0.25 < cfg.filter_alpha < 0.5:
        raise BadValue("filter_alpha", "must lie in (0.25, 0.5)")
    if cfg.case == "helix":
        if not 0.0 < cfg.core_ratio < 1.0:
            raise BadValue("core_ratio", "must lie in (0, 1)")
        if not cfg.n_kernel >= 1.0:
            raise BadValue("n_kernel", "must be >= 1")
        if not 0.0 < cfg.mach_peak <= 0.3:
            raise BadValue("mach_peak", "must lie in (0, 0.3]")
        if 2.0 * cfg.radius >= min(cfg.lx, cfg.lz):
            raise BadValue("radius", "helix does not fit in the x-z cross-section")
