"""Experiment configuration: JSON text in, validated :class:`ExperimentConfig` out.

Every problem found is collected and reported together, each prefixed with
the path of the offending field, e.g. ``nu_grid[0]: nu must be positive``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from .disk_flow import DEFAULT_K, RadialProfile
from .errors import ConfigError, DomainError
from .experiment import DIAGNOSTICS, Experiment
from .shear_flow import ShearProfile
from .specfun import LayerSpec

DEFAULT_LAYER = {"delta": 0.05, "delta_star": 0.025, "kato_constant": 1.0}
_TOP_KEYS = {"flow", "profile", "nu_grid", "T", "K", "half_width", "layer", "diagnostics", "output", "time_grid_size"}


@dataclass
class ExperimentConfig:
    flow: str
    profile: dict
    nu_grid: list
    T: float = 1.0
    K: int = DEFAULT_K
    half_width: float = 0.5
    layer: dict = field(default_factory=lambda: dict(DEFAULT_LAYER))
    diagnostics: list = field(default_factory=list)
    output: dict = field(default_factory=lambda: {"path": None, "format": "csv"})
    time_grid_size: int = 64
    base_dir: str = "."

    def echo(self):
        """Plain-data copy sufficient to reproduce the run."""
        return {
            "flow": self.flow,
            "profile": dict(self.profile),
            "nu_grid": list(self.nu_grid),
            "T": self.T,
            "K": self.K,
            "half_width": self.half_width,
            "layer": dict(self.layer),
            "diagnostics": list(self.diagnostics),
            "output": dict(self.output),
            "time_grid_size": self.time_grid_size,
        }

    def build_profile(self):
        return build_profile(self.flow, self.profile, self.base_dir)

    def to_experiment(self) -> Experiment:
        return Experiment(
            flow=self.flow,
            profile=self.build_profile(),
            T=self.T,
            K=self.K,
            half_width=self.half_width,
            layer=LayerSpec(self.layer["delta"], self.layer["delta_star"], self.layer["kato_constant"]),
            diagnostics=tuple(self.diagnostics),
            time_grid_size=self.time_grid_size,
        )


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

_PROFILE_ALIASES = {"poly": "poly", "polynomial": "poly", "exp": "exponential", "exponential": "exponential"}


def profile_from_string(text: str) -> dict:
    """'constant:2', 'poly:4,-8', 'exp:1,2', 'gaussian_poly:1,0,1', 'table:path'."""
    kind, _, rest = text.partition(":")
    kind = _PROFILE_ALIASES.get(kind.strip(), kind.strip())
    if kind == "table":
        return {"type": "table", "path": rest.strip()}
    try:
        values = [float(v) for v in rest.split(",")] if rest.strip() else []
    except ValueError:
        raise ConfigError([f"profile: cannot read numbers in {text!r}"])
    if kind == "constant":
        return {"type": "constant", "value": values[0] if values else 1.0}
    if kind == "poly":
        return {"type": "poly", "coeffs": values}
    if kind == "exponential":
        return {"type": "exponential", "amplitude": values[0] if values else 1.0,
                "rate": values[1] if len(values) > 1 else 1.0}
    if kind == "gaussian_poly":
        return {"type": "gaussian_poly", "coeffs": values or [1.0]}
    raise ConfigError([f"profile: unknown profile kind {kind!r}"])


def _number(value, path, errors, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        errors.append(f"{path}: expected a finite number, got {value!r}")
        return None
    if integer and int(value) != value:
        errors.append(f"{path}: expected an integer, got {value!r}")
        return None
    if positive and not value > 0:
        errors.append(f"{path}: must be positive")
        return None
    return int(value) if integer else float(value)


def _check_profile(flow, spec, errors, base_dir):
    if isinstance(spec, str):
        try:
            spec = profile_from_string(spec)
        except ConfigError as exc:
            errors.extend(exc.errors)
            return None
    if not isinstance(spec, dict):
        errors.append("profile: expected an object or a profile string")
        return None
    kind = _PROFILE_ALIASES.get(spec.get("type"), spec.get("type"))
    disk_kinds = {"constant", "poly", "table"}
    shear_kinds = {"constant", "exponential", "gaussian_poly", "table"}
    allowed = disk_kinds if flow == "disk" else shear_kinds
    if kind not in allowed:
        errors.append(f"profile.type: {kind!r} is not available for the {flow} flow "
                      f"(choose from {', '.join(sorted(allowed))})")
        return None
    out = {"type": kind}
    if kind == "constant":
        v = _number(spec.get("value", 1.0), "profile.value", errors)
        out["value"] = v
    elif kind in ("poly", "gaussian_poly"):
        coeffs = spec.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            errors.append("profile.coeffs: expected a nonempty list of numbers")
        else:
            out["coeffs"] = [_number(c, f"profile.coeffs[{i}]", errors) for i, c in enumerate(coeffs)]
        if kind == "gaussian_poly":
            out["width"] = _number(spec.get("width", 1.0), "profile.width", errors, positive=True)
    elif kind == "exponential":
        out["amplitude"] = _number(spec.get("amplitude", 1.0), "profile.amplitude", errors)
        out["rate"] = _number(spec.get("rate", 1.0), "profile.rate", errors, positive=True)
    elif kind == "table":
        path = spec.get("path")
        if not isinstance(path, str) or not path:
            errors.append("profile.path: expected a file path")
        else:
            full = path if os.path.isabs(path) else os.path.join(base_dir, path)
            if not os.path.isfile(full):
                errors.append(f"profile.path: table file not found: {path}")
            out["path"] = path
        if flow == "shear":
            if "bound" not in spec:
                errors.append("profile.bound: a table shear profile must declare its bound")
            else:
                out["bound"] = _number(spec["bound"], "profile.bound", errors, positive=True)
            decay = spec.get("decay", 0.0)
            d = _number(decay, "profile.decay", errors)
            if d is not None and d < 0:
                errors.append("profile.decay: must be nonnegative")
            out["decay"] = d
    return out


def build_profile(flow, spec, base_dir="."):
    kind = spec["type"]
    try:
        if flow == "disk":
            if kind == "constant":
                return RadialProfile.constant(spec["value"])
            if kind == "poly":
                return RadialProfile.polynomial(spec["coeffs"])
            return RadialProfile.from_csv(_resolve(spec["path"], base_dir))
        if kind == "constant":
            return ShearProfile.constant(spec["value"])
        if kind == "exponential":
            return ShearProfile.exponential(spec["amplitude"], spec["rate"])
        if kind == "gaussian_poly":
            return ShearProfile.gaussian_poly(spec["coeffs"], spec.get("width", 1.0))
        return ShearProfile.from_csv(_resolve(spec["path"], base_dir), spec["bound"], spec.get("decay", 0.0))
    except DomainError as exc:
        raise ConfigError([f"profile: {exc}"])


def _resolve(path, base_dir):
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_data(data, base_dir=".") -> ExperimentConfig:
    """Validate an already-decoded JSON object."""
    errors = []
    if not isinstance(data, dict):
        raise ConfigError(["config: top level must be an object"])
    for key in sorted(set(data) - _TOP_KEYS):
        errors.append(f"{key}: unknown field")

    flow = data.get("flow")
    if flow not in ("disk", "shear"):
        errors.append(f"flow: expected 'disk' or 'shear', got {flow!r}")
        flow = None

    profile = None
    if "profile" not in data:
        errors.append("profile: missing")
    elif flow is not None:
        profile = _check_profile(flow, data["profile"], errors, base_dir)

    nu_grid = data.get("nu_grid")
    nus = []
    if not isinstance(nu_grid, list) or not nu_grid:
        errors.append("nu_grid: expected a nonempty list of viscosities")
    else:
        for i, v in enumerate(nu_grid):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                errors.append(f"nu_grid[{i}]: expected a finite number, got {v!r}")
            elif not v > 0:
                errors.append(f"nu_grid[{i}]: nu must be positive")
            else:
                nus.append(float(v))

    T = _number(data.get("T", 1.0), "T", errors, positive=True)
    K = _number(data.get("K", DEFAULT_K), "K", errors, positive=True, integer=True)
    half_width = _number(data.get("half_width", 0.5), "half_width", errors, positive=True)
    grid_size = _number(data.get("time_grid_size", 64), "time_grid_size", errors, positive=True, integer=True)
    if grid_size is not None and grid_size < 2:
        errors.append("time_grid_size: need at least 2 times")

    layer_in = data.get("layer", {})
    layer = dict(DEFAULT_LAYER)
    if not isinstance(layer_in, dict):
        errors.append("layer: expected an object")
    else:
        for key in sorted(set(layer_in) - set(DEFAULT_LAYER)):
            errors.append(f"layer.{key}: unknown field")
        for key in DEFAULT_LAYER:
            if key in layer_in:
                layer[key] = _number(layer_in[key], f"layer.{key}", errors, positive=True)
        d, ds = layer["delta"], layer["delta_star"]
        if d is not None and ds is not None and not ds < d:
            errors.append("layer.delta_star: must be smaller than layer.delta")
        if flow == "disk" and d is not None and d >= 1.0:
            errors.append("layer.delta: must be smaller than the disk radius 1")

    diags = data.get("diagnostics", [])
    if not isinstance(diags, list):
        errors.append("diagnostics: expected a list of names")
        diags = []
    for i, name in enumerate(diags):
        if name not in DIAGNOSTICS:
            errors.append(f"diagnostics[{i}]: unknown diagnostic {name!r}")
        elif name == "mass_budget" and flow == "shear":
            errors.append(f"diagnostics[{i}]: mass_budget is available for the disk flow only")

    output = data.get("output", {})
    out = {"path": None, "format": "csv"}
    if not isinstance(output, dict):
        errors.append("output: expected an object")
    else:
        for key in sorted(set(output) - set(out)):
            errors.append(f"output.{key}: unknown field")
        if output.get("format", "csv") not in ("csv", "json"):
            errors.append(f"output.format: expected 'csv' or 'json', got {output.get('format')!r}")
        else:
            out["format"] = output.get("format", "csv")
        path = output.get("path")
        if path is not None and not isinstance(path, str):
            errors.append("output.path: expected a string")
        else:
            out["path"] = path

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(flow, profile, nus, T, K, half_width, layer, list(diags), out, grid_size, base_dir)


def parse_config(text: str, base_dir=".") -> ExperimentConfig:
    """Parse JSON configuration text; syntax errors carry line and column."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"])
    return parse_data(data, base_dir)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror or exc}"])
    try:
        return parse_config(text, os.path.dirname(os.path.abspath(path)))
    except ConfigError as exc:
        raise ConfigError([f"{path}: {e}" for e in exc.errors])
