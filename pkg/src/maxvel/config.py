"""Experiment configuration: INI text with sections, strict keys, aggregated errors.

Sections and keys (defaults in brackets):

[experiment]  name (required: maxvel | prop-estimate | dyadic | inequality-suite | baselines),
              output [out], seed [20240607], checkpoint [yes]
[grid]        dim [1], n [1024], L [128.0], radial [yes]
[potential]   family [none | gaussian_well | polynomial_decay], g [0.0], sigma [2.0], q [3.0]
[run]         every RunConfig field
[estimate]    shells [0,1,2,3], R_values [5,10], variant [F_prime], burn_in [4.0]
[maxvel]      a_values [], shell_times []
[dyadic]      times []
[suite]       every SuiteConfig field
"""
import configparser
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .experiments import RunConfig
from .inequalities import DEFAULT_SEED, SuiteConfig
from .operators import PotentialSpec

EXPERIMENTS = ("maxvel", "prop-estimate", "dyadic", "inequality-suite", "baselines")
VARIANTS = ("F_prime", "F", "bump")


@dataclass
class GridBlock:
    dim: int = 1
    n: int = 1024
    L: float = 128.0
    radial: bool = True


@dataclass
class EstimateBlock:
    shells: tuple = (0, 1, 2, 3)
    R_values: tuple = (5.0, 10.0)
    variant: str = "F_prime"
    burn_in: float = 4.0


@dataclass
class MaxvelBlock:
    a_values: tuple = ()
    shell_times: tuple = ()


@dataclass
class DyadicBlock:
    times: tuple = ()


@dataclass
class Config:
    experiment: str
    output: str = "out"
    seed: int = DEFAULT_SEED
    checkpoint: bool = True
    grid: GridBlock = field(default_factory=GridBlock)
    potential: PotentialSpec = None
    run: RunConfig = field(default_factory=RunConfig)
    estimate: EstimateBlock = field(default_factory=EstimateBlock)
    maxvel: MaxvelBlock = field(default_factory=MaxvelBlock)
    dyadic: DyadicBlock = field(default_factory=DyadicBlock)
    suite: SuiteConfig = field(default_factory=SuiteConfig)

    def to_dict(self):
        from dataclasses import asdict
        out = asdict(self)
        out["potential"] = None if self.potential is None else self.potential.to_dict()
        return out


def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_list(conv):
    def parse(s):
        s = s.strip()
        return tuple(conv(p) for p in s.replace(";", ",").split(",") if p.strip()) if s else ()
    return parse


def _optional_float(s):
    return None if s.strip().lower() in ("", "none", "auto") else float(s)


_CONVERTERS = {int: int, float: float, bool: _parse_bool, str: str}


def _fill(obj_cls, section, items, errors, special=None):
    """Build obj_cls from string items; unknown keys and bad values go to errors."""
    special = special or {}
    known = {f.name: f for f in fields(obj_cls)}
    kw = {}
    for key, raw in items:
        if key not in known:
            errors.append(f"[{section}] unknown key {key!r}")
            continue
        f = known[key]
        conv = special.get(key)
        if conv is None:
            default = f.default
            if default is None:
                conv = _optional_float
            else:
                conv = _CONVERTERS.get(type(default), str)
        try:
            kw[key] = conv(raw)
        except ValueError as exc:
            errors.append(f"[{section}] {key}: {exc}")
    try:
        return obj_cls(**kw)
    except (TypeError, ValueError) as exc:
        errors.append(f"[{section}] {exc}")
        return None


def parse_config(text):
    """Parse and validate; raises ConfigError listing every violated constraint."""
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc
    errors = []
    sections = {"experiment", "grid", "potential", "run", "estimate", "maxvel", "dyadic", "suite"}
    for s in cp.sections():
        if s not in sections:
            errors.append(f"unknown section [{s}]")

    def items(name):
        return list(cp.items(name)) if cp.has_section(name) else []

    exp = dict(items("experiment"))
    name = exp.pop("name", None)
    if name is None:
        errors.append("[experiment] name is required")
    elif name not in EXPERIMENTS:
        errors.append(f"[experiment] name {name!r} is not one of {', '.join(EXPERIMENTS)}")
    cfg_kw = {}
    for key, raw in exp.items():
        try:
            if key == "output":
                cfg_kw["output"] = raw.strip()
            elif key == "seed":
                cfg_kw["seed"] = int(raw)
            elif key == "checkpoint":
                cfg_kw["checkpoint"] = _parse_bool(raw)
            else:
                errors.append(f"[experiment] unknown key {key!r}")
        except ValueError as exc:
            errors.append(f"[experiment] {key}: {exc}")

    grid = _fill(GridBlock, "grid", items("grid"), errors)
    if grid is not None:
        if not 1 <= grid.dim <= 3:
            errors.append(f"[grid] dim = {grid.dim} must be 1, 2 or 3")
        if grid.n < 16 or grid.n & (grid.n - 1):
            errors.append(f"[grid] n = {grid.n} must be a power of two >= 16")
        if not grid.L > 0:
            errors.append("[grid] L must be positive")
        if grid.radial and grid.dim != 1:
            errors.append("[grid] radial grids are one-dimensional (dim = 1)")

    pot_items = dict(items("potential"))
    potential = None
    family = pot_items.pop("family", "none").strip()
    if family != "none":
        pot_items["family"] = family
        potential = _fill(PotentialSpec, "potential", list(pot_items.items()), errors,
                          special={"family": str})
    elif pot_items:
        errors.extend(f"[potential] key {k!r} given without a family" for k in pot_items)

    run = _fill(RunConfig, "run", items("run"), errors,
                special={"a_width": _optional_float, "shell_width": _optional_float})
    if run is not None:
        errors.extend(f"[run] {p}" for p in run.problems())

    est = _fill(EstimateBlock, "estimate", items("estimate"), errors,
                special={"shells": _parse_list(int), "R_values": _parse_list(float)})
    if est is not None:
        if est.variant not in VARIANTS:
            errors.append(f"[estimate] variant {est.variant!r} is not one of {', '.join(VARIANTS)}")
        if any(R <= 1 for R in est.R_values):
            errors.append("[estimate] R_values must exceed 1")
        if run is not None and any(n > run.n_max or n < 0 for n in est.shells):
            errors.append(f"[estimate] shells must lie in 0..n_max = {run.n_max}")
    mv = _fill(MaxvelBlock, "maxvel", items("maxvel"), errors,
               special={"a_values": _parse_list(float), "shell_times": _parse_list(float)})
    if mv is not None and run is not None:
        if any(a <= run.R for a in mv.a_values):
            errors.append(f"[maxvel] a_values must exceed R = {run.R:g} (threshold ordering 1 < R < a)")
        if any(not (0 < t <= run.T) for t in mv.shell_times):
            errors.append("[maxvel] shell_times must lie in (0, T]")
    dy = _fill(DyadicBlock, "dyadic", items("dyadic"), errors, special={"times": _parse_list(float)})
    if dy is not None and run is not None and any(not (0 < t <= run.T) for t in dy.times):
        errors.append("[dyadic] times must lie in (0, T]")
    suite = _fill(SuiteConfig, "suite", items("suite"), errors)

    if errors:
        raise ConfigError(errors)
    seed = cfg_kw.get("seed", DEFAULT_SEED)
    if "seed" in cfg_kw:
        run.seed = seed
        suite.seed = seed
    return Config(name, potential=potential, grid=grid, run=run, estimate=est, maxvel=mv, dyadic=dy,
                  suite=suite, **cfg_kw)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
