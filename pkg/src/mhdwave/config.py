"""Run configuration: parsing, validation, serialization.

Configs are JSON documents with nested sections (grid, physics, scheme,
time, initial_data, diagnostics, fit, output).  Numeric values may be
written as pi-expressions like ``"32*pi"`` or ``"pi/4"``.  Unknown keys
are rejected with the offending path; every default is materialized so
the echoed config is complete.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass

from .errors import ConfigurationError
from .grid import GridSpec
from .initial import INITIAL_FAMILIES
from .solver import SCHEMES

__all__ = ["RunConfig", "parse_config", "parse_config_file", "serialize_config", "config_hash"]

_PI_RE = re.compile(r"^\s*(?:(?P<coef>[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)\s*\*\s*)?pi"
                    r"(?:\s*/\s*(?P<div>\d+(?:\.\d+)?))?\s*$")


def _number(value, path: str) -> float:
    if isinstance(value, bool):
        raise ConfigurationError("expected a number", path=path)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            coef = float(m.group("coef")) if m.group("coef") else 1.0
            div = float(m.group("div")) if m.group("div") else 1.0
            return coef * math.pi / div
        try:
            return float(value)
        except ValueError:
            raise ConfigurationError(f"cannot parse number {value!r}", path=path) from None
    raise ConfigurationError(f"expected a number, got {type(value).__name__}", path=path)


@dataclass
class RunConfig:
    """Validated, fully-defaulted run description."""

    n: int = 128
    box_length: float = 32.0 * math.pi
    gamma: float = 1.0
    scheme: str = "exp_integrator"
    dt: float = 0.05
    t_end: float = 100.0
    snapshot_every: int = 10
    family: str = "random_band"
    amplitude: float = 0.05
    amplitude_b: float | None = None
    width: float | None = None
    separation: float | None = None
    k_min: float | None = None
    k_max: float | None = None
    spectral_exponent: float = 0.0
    a0_amplitude: float = 0.0
    seed: int = 0
    q_list: tuple = (2.0, 4.0)
    s_list_u: tuple = (0.0, 1.0)
    s_list_b: tuple = (0.0, 1.5)
    m: float = 1.0
    c_label: float = 1.0
    window: tuple | None = None
    nonlinear: bool = True
    cfl_safety: float = 0.8
    output_dir: str = "out"
    formats: tuple = ("csv",)

    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.box_length)

    def initial_params(self) -> dict:
        params = {"amplitude": self.amplitude, "seed": self.seed}
        if self.amplitude_b is not None:
            params["amplitude_b"] = self.amplitude_b
        if self.family == "gaussian_vortex_pair":
            if self.width is not None:
                params["width"] = self.width
            if self.separation is not None:
                params["separation"] = self.separation
        if self.family == "random_band":
            if self.k_min is not None:
                params["k_min"] = self.k_min
            if self.k_max is not None:
                params["k_max"] = self.k_max
            params["spectral_exponent"] = self.spectral_exponent
            if self.a0_amplitude:
                params["a0_amplitude"] = self.a0_amplitude
        return params


_SECTIONS = {
    "grid": {"n", "box_length"},
    "physics": {"gamma"},
    "time": {"dt", "t_end", "snapshot_every"},
    "initial_data": {"family", "amplitude", "amplitude_b", "width", "separation",
                     "k_min", "k_max", "spectral_exponent", "a0_amplitude", "seed"},
    "diagnostics": {"q_list", "s_list_u", "s_list_b", "m", "c_label"},
    "fit": {"window"},
    "solver": {"nonlinear", "cfl_safety"},
    "output": {"directory", "formats"},
}
_TOP_LEVEL = set(_SECTIONS) | {"scheme"}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed config document: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be a JSON object")
    unknown = set(doc) - _TOP_LEVEL
    if unknown:
        raise ConfigurationError(f"unknown key {sorted(unknown)[0]!r}", path=sorted(unknown)[0])
    for section, keys in _SECTIONS.items():
        sub = doc.get(section, {})
        if not isinstance(sub, dict):
            raise ConfigurationError("section must be an object", path=section)
        bad = set(sub) - keys
        if bad:
            k = sorted(bad)[0]
            raise ConfigurationError(f"unknown key {k!r}", path=f"{section}.{k}")

    cfg = RunConfig()
    g = doc.get("grid", {})
    if "n" in g:
        n = g["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ConfigurationError("n must be an integer", path="grid.n")
        cfg.n = n
    if "box_length" in g:
        cfg.box_length = _number(g["box_length"], "grid.box_length")

    p = doc.get("physics", {})
    if "gamma" in p:
        cfg.gamma = _number(p["gamma"], "physics.gamma")
        if cfg.gamma <= 0 and doc.get("scheme") != "mhd_baseline":
            raise ConfigurationError(f"gamma must be > 0, got {cfg.gamma}", path="physics.gamma")

    if "scheme" in doc:
        if doc["scheme"] not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}", path="scheme")
        cfg.scheme = doc["scheme"]

    t = doc.get("time", {})
    if "dt" in t:
        cfg.dt = _number(t["dt"], "time.dt")
        if cfg.dt <= 0:
            raise ConfigurationError("dt must be > 0", path="time.dt")
    if "t_end" in t:
        cfg.t_end = _number(t["t_end"], "time.t_end")
        if cfg.t_end < 0:
            raise ConfigurationError("t_end must be >= 0", path="time.t_end")
    if "snapshot_every" in t:
        se = t["snapshot_every"]
        if not isinstance(se, int) or isinstance(se, bool) or se < 1:
            raise ConfigurationError("snapshot_every must be a positive integer",
                                     path="time.snapshot_every")
        cfg.snapshot_every = se

    i = doc.get("initial_data", {})
    if "family" in i:
        if i["family"] not in INITIAL_FAMILIES:
            raise ConfigurationError(f"family must be one of {INITIAL_FAMILIES}",
                                     path="initial_data.family")
        cfg.family = i["family"]
    for key in ("amplitude", "amplitude_b", "width", "separation", "k_min", "k_max",
                "spectral_exponent", "a0_amplitude"):
        if key in i and i[key] is not None:
            val = _number(i[key], f"initial_data.{key}")
            if key in ("amplitude", "a0_amplitude") and val < 0:
                raise ConfigurationError(f"{key} must be >= 0", path=f"initial_data.{key}")
            setattr(cfg, key, val)
    if "seed" in i:
        s = i["seed"]
        if not isinstance(s, int) or isinstance(s, bool) or s < 0:
            raise ConfigurationError("seed must be a nonnegative integer",
                                     path="initial_data.seed")
        cfg.seed = s

    d = doc.get("diagnostics", {})
    for key, attr in (("q_list", "q_list"), ("s_list_u", "s_list_u"), ("s_list_b", "s_list_b")):
        if key in d:
            vals = d[key]
            if not isinstance(vals, list):
                raise ConfigurationError(f"{key} must be a list", path=f"diagnostics.{key}")
            parsed = tuple(_number(v, f"diagnostics.{key}") for v in vals)
            if key == "q_list" and any(v < 1 for v in parsed):
                raise ConfigurationError("q values must be >= 1", path="diagnostics.q_list")
            setattr(cfg, attr, parsed)
    if "m" in d:
        cfg.m = _number(d["m"], "diagnostics.m")
        if cfg.m < 0:
            raise ConfigurationError("m must be >= 0", path="diagnostics.m")
    if "c_label" in d:
        cfg.c_label = _number(d["c_label"], "diagnostics.c_label")
        if not 1 <= cfg.c_label < 2:
            raise ConfigurationError("c_label must lie in [1, 2)", path="diagnostics.c_label")

    f = doc.get("fit", {})
    if "window" in f and f["window"] is not None:
        w = f["window"]
        if not isinstance(w, list) or len(w) != 2:
            raise ConfigurationError("window must be [t_lo, t_hi]", path="fit.window")
        lo = _number(w[0], "fit.window")
        hi = _number(w[1], "fit.window")
        if not lo < hi:
            raise ConfigurationError("window must satisfy t_lo < t_hi", path="fit.window")
        cfg.window = (lo, hi)

    s = doc.get("solver", {})
    if "nonlinear" in s:
        if not isinstance(s["nonlinear"], bool):
            raise ConfigurationError("nonlinear must be a boolean", path="solver.nonlinear")
        cfg.nonlinear = s["nonlinear"]
    if "cfl_safety" in s:
        cfg.cfl_safety = _number(s["cfl_safety"], "solver.cfl_safety")
        if not 0 < cfg.cfl_safety <= 1:
            raise ConfigurationError("cfl_safety must lie in (0, 1]", path="solver.cfl_safety")

    o = doc.get("output", {})
    if "directory" in o:
        if not isinstance(o["directory"], str):
            raise ConfigurationError("directory must be a string", path="output.directory")
        cfg.output_dir = o["directory"]
    if "formats" in o:
        fmts = o["formats"]
        if not isinstance(fmts, list) or any(x != "csv" for x in fmts):
            raise ConfigurationError("only the csv format is supported", path="output.formats")
        cfg.formats = tuple(fmts)

    cfg.grid()  # validates n / box_length jointly
    return cfg


def parse_config_file(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg: RunConfig) -> str:
    """Canonical JSON echo with every default filled in."""
    doc = {
        "grid": {"n": cfg.n, "box_length": cfg.box_length},
        "physics": {"gamma": cfg.gamma},
        "scheme": cfg.scheme,
        "time": {"dt": cfg.dt, "t_end": cfg.t_end, "snapshot_every": cfg.snapshot_every},
        "initial_data": {
            "family": cfg.family, "amplitude": cfg.amplitude,
            "amplitude_b": cfg.amplitude_b, "width": cfg.width,
            "separation": cfg.separation, "k_min": cfg.k_min, "k_max": cfg.k_max,
            "spectral_exponent": cfg.spectral_exponent,
            "a0_amplitude": cfg.a0_amplitude, "seed": cfg.seed,
        },
        "diagnostics": {
            "q_list": list(cfg.q_list), "s_list_u": list(cfg.s_list_u),
            "s_list_b": list(cfg.s_list_b), "m": cfg.m, "c_label": cfg.c_label,
        },
        "fit": {"window": list(cfg.window) if cfg.window else None},
        "solver": {"nonlinear": cfg.nonlinear, "cfl_safety": cfg.cfl_safety},
        "output": {"directory": cfg.output_dir, "formats": list(cfg.formats)},
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]
