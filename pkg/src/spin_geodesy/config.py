"""Run configuration read from an INI-style file.

Example::

    [scenario]
    name = spin_helix
    theta0 = 1.0471975512

    [run]
    resolution = 64, 128, 256
    dt = 0.001
    steps = 200
    stride = 20
    suites = triad, frenet

    [constants]
    charge = 1.0
    light_speed = 1.0
    nu = 1.0

    [tolerances]
    guidance_hand_value = 1e-9

    [tetrad]
    name = rotating_frame
    omega = 0.5

Unknown sections and keys are rejected with a message naming them.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .scenarios import SCENARIOS, default_params
from .teleparallel import CATALOG as TETRADS

SUITES = ("observables", "guidance", "triad", "frenet", "hydro", "teleparallel")
FAULTS = ("sign", "scale")

_RUN_KEYS = {"resolution", "dt", "steps", "stride", "suites", "out", "tolerance_scale", "inject_fault", "seed_points"}
_SCENARIO_KEYS = {"name", "dims", "extent"} | set(default_params())
_CONSTANT_KEYS = {"charge", "light_speed", "nu"}
_TETRAD_KEYS = {"name", "omega", "frame_rate", "eps", "c", "spacing", "points", "theta", "phi", "chi", "vx", "vy", "vz"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "plane_wave"
    dims: int | None = None
    extent: float = 16.0
    params: dict = field(default_factory=dict)
    resolutions: tuple = (64, 128, 256)
    dt: float | None = None
    steps: int = 100
    stride: int = 10
    suites: tuple = ("all",)
    out: str = "out"
    tolerance_scale: float = 1.0
    tolerances: dict = field(default_factory=dict)
    charge: float | None = None
    light_speed: float = 1.0
    nu: float = 1.0
    tetrad: str = "rotating_frame"
    tetrad_params: dict = field(default_factory=dict)
    inject_fault: str | None = None
    seed_points: tuple = ()


def parse_resolutions(text: str) -> tuple:
    try:
        res = tuple(int(t) for t in str(text).replace(";", ",").split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"resolution must be a comma-separated list of integers, got {text!r}") from None
    if not res or any(r < 4 for r in res):
        raise ConfigError(f"resolutions must be integers >= 4, got {text!r}")
    return res


def parse_seed_points(text: str) -> tuple:
    """'x,y,z;x,y,z' -> ((x, y, z), ...)."""
    pts = []
    for chunk in str(text).split(";"):
        if not chunk.strip():
            continue
        try:
            vals = tuple(float(v) for v in chunk.split(","))
        except ValueError:
            raise ConfigError(f"bad seed point {chunk!r}") from None
        if not 1 <= len(vals) <= 3:
            raise ConfigError(f"seed point {chunk!r} needs 1 to 3 coordinates")
        pts.append(vals + (0.0,) * (3 - len(vals)))
    return tuple(pts)


def parse_suites(text: str) -> tuple:
    names = tuple(t.strip() for t in str(text).split(",") if t.strip())
    for n in names:
        if n != "all" and n not in SUITES:
            raise ConfigError(f"unknown suite {n!r}; known: all, {', '.join(SUITES)}")
    return names or ("all",)


def _float(section, key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {value!r}") from None


def _int(section, key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {value!r}") from None


def _check_keys(section, keys, allowed):
    for k in keys:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r} in [{section}]")


def load_config(path, known_tolerances=()) -> RunConfig:
    """Parse a config file; ``known_tolerances`` lists the overridable check names."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(Path(path)) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    allowed = {"scenario", "run", "constants", "tolerances", "tetrad"}
    for sec in cp.sections():
        if sec not in allowed:
            raise ConfigError(f"unknown section [{sec}]")
    kw = {}
    if cp.has_section("scenario"):
        sec = cp["scenario"]
        _check_keys("scenario", sec, _SCENARIO_KEYS)
        if "name" in sec:
            if sec["name"] not in SCENARIOS:
                raise ConfigError(f"[scenario] name: unknown scenario {sec['name']!r}")
            kw["scenario"] = sec["name"]
        if "dims" in sec:
            kw["dims"] = _int("scenario", "dims", sec["dims"])
        if "extent" in sec:
            kw["extent"] = _float("scenario", "extent", sec["extent"])
        kw["params"] = {k: _float("scenario", k, v) for k, v in sec.items() if k not in ("name", "dims", "extent")}
    if cp.has_section("run"):
        sec = cp["run"]
        _check_keys("run", sec, _RUN_KEYS)
        if "resolution" in sec:
            kw["resolutions"] = parse_resolutions(sec["resolution"])
        if "dt" in sec:
            kw["dt"] = _float("run", "dt", sec["dt"])
        for key in ("steps", "stride"):
            if key in sec:
                kw[key] = _int("run", key, sec[key])
        if "suites" in sec:
            kw["suites"] = parse_suites(sec["suites"])
        if "out" in sec:
            kw["out"] = sec["out"]
        if "tolerance_scale" in sec:
            kw["tolerance_scale"] = _float("run", "tolerance_scale", sec["tolerance_scale"])
        if "inject_fault" in sec:
            if sec["inject_fault"] not in FAULTS:
                raise ConfigError(f"[run] inject_fault: expected one of {', '.join(FAULTS)}")
            kw["inject_fault"] = sec["inject_fault"]
        if "seed_points" in sec:
            kw["seed_points"] = parse_seed_points(sec["seed_points"])
    if cp.has_section("constants"):
        sec = cp["constants"]
        _check_keys("constants", sec, _CONSTANT_KEYS)
        for k, v in sec.items():
            kw[k] = _float("constants", k, v)
    if cp.has_section("tolerances"):
        sec = cp["tolerances"]
        _check_keys("tolerances", sec, set(known_tolerances))
        kw["tolerances"] = {k: _float("tolerances", k, v) for k, v in sec.items()}
    if cp.has_section("tetrad"):
        sec = cp["tetrad"]
        _check_keys("tetrad", sec, _TETRAD_KEYS)
        if "name" in sec:
            if sec["name"] not in TETRADS:
                raise ConfigError(f"[tetrad] name: unknown tetrad {sec['name']!r}")
            kw["tetrad"] = sec["name"]
        kw["tetrad_params"] = {k: _float("tetrad", k, v) for k, v in sec.items() if k != "name"}
    cfg = RunConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.dt is not None and not cfg.dt > 0:
        raise ConfigError("[run] dt must be positive")
    if cfg.steps < 1 or cfg.stride < 1:
        raise ConfigError("[run] steps and stride must be >= 1")
    if not cfg.tolerance_scale > 0:
        raise ConfigError("[run] tolerance_scale must be positive")
    if cfg.nu == 0:
        raise ConfigError("[constants] nu must be non-zero")
    if not cfg.light_speed > 0:
        raise ConfigError("[constants] light_speed must be positive")
    if cfg.dims is not None and cfg.dims not in (1, 2, 3):
        raise ConfigError("[scenario] dims must be 1, 2 or 3")
