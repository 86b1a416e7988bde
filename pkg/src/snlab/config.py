"""Run configuration: a flat INI document with a [run] section (scenario,
seed) and a [params] section holding the scenario's keyword parameters.

Keys carry their unit in the name: *_kg, *_m, *_m_per_s are SI; *_internal,
*_widths, dt, steps and friends are dimensionless solver settings.
Unknown keys are rejected, every constraint violation names its field, and
serialize -> parse round-trips to an equal RunConfig (floats via repr).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

from .errors import ValidationError

__all__ = ["RunConfig", "SCENARIOS", "parse_config", "serialize_config"]


@dataclass(frozen=True)
class FieldSpec:
    type: type
    default: object
    positive: bool = False


def _f(default, positive=True):
    return FieldSpec(float, default, positive)


def _i(default, positive=True):
    return FieldSpec(int, default, positive)


SCENARIOS = {
    "self_focus": {
        "mass_kg": _f(1e-17), "width_m": _f(5e-7), "dimension": _i(1),
        "points": _i(512), "box_widths": _f(16.0), "dt": _f(0.002),
        "steps": _i(1500), "record_every": _i(15),
    },
    "two_packet": {
        "mass_kg": _f(1e-17), "width_m": _f(5e-7), "separation_widths": _f(8.0),
        "points": _i(512), "box_widths": _f(64.0), "dt": _f(0.002),
        "steps": _i(7000), "record_every": _i(35),
    },
    "stern_gerlach": {
        "mass_kg": _f(1e-17), "width_m": _f(5e-7), "kick_internal": _f(1.0),
        "travel_widths": _f(10.0), "points": _i(512), "box_widths": _f(64.0),
        "dt": _f(0.005), "record_every": _i(10),
    },
    "ground_state": {
        "mass_kg": _f(1e-17), "width_m": _f(5e-7), "dimension": _i(3),
        "points": _i(48), "box_widths": _f(33.6), "tol": _f(1e-10),
    },
    "two_particle_contrast": {
        "mass_kg": _f(1e-17), "width_m": _f(5e-7), "points": _i(128),
        "box_widths": _f(32.0), "dt": _f(0.004), "steps": _i(1000),
        "record_every": _i(20),
    },
    "collapse_lindblad": {
        "mass_kg": _f(1e-17), "width_m": _f(5e-7), "points": _i(32),
        "box_widths": _f(16.0), "r0_m": _f(5e-7), "gamma": _f(0.5),
        "dt": _f(0.01), "steps": _i(300), "record_every": _i(5),
    },
    "collapse_sde": {
        "points": _i(16), "box_widths": _f(16.0), "weight_right": _f(0.3),
        "gamma": _f(1.0), "dt": _f(0.01), "steps": _i(800), "ensemble": _i(500),
    },
    "signalling": {
        "mass_kg": _f(10000 * 1.66053906660e-27), "d0_m": _f(1e-6),
        "delta_d_m": _f(1e-6), "v_m_per_s": _f(100.0), "s_m": _f(1.0),
    },
    "regime": {
        "mass_kg": _f(1e-17), "sigma_m": _f(0.5e-6), "radius_m": _f(1e-9),
    },
    "heating": {
        "mass_kg": _f(1.67262192369e-27),
        "r0_list_m": FieldSpec(str, "1e-15,1e-12,1e-9,1e-7"),
    },
}


@dataclass
class RunConfig:
    scenario: str
    seed: int = 12345
    params: dict = field(default_factory=dict)

    def full_params(self):
        """Defaults overlaid with the explicit params."""
        schema = SCENARIOS[self.scenario]
        out = {k: spec.default for k, spec in schema.items()}
        out.update(self.params)
        return out


def _coerce(scenario, key, raw):
    schema = SCENARIOS[scenario]
    if key not in schema:
        raise ValidationError(f"unknown key {key!r} for scenario {scenario!r}")
    spec = schema[key]
    if isinstance(raw, str):
        try:
            value = spec.type(raw) if spec.type is not float else float(raw)
        except ValueError as exc:
            raise ValidationError(f"field {key!r}: cannot parse {raw!r} as {spec.type.__name__}") from exc
    else:
        value = spec.type(raw)
    if spec.positive and isinstance(value, (int, float)) and value <= 0:
        raise ValidationError(f"field {key!r} must be positive, got {value}")
    return value


def parse_config(path=None, text=None, scenario=None, overrides=None):
    """Build a validated RunConfig from an INI file/text plus overrides.

    `overrides` is a mapping of params-section keys (strings are coerced).
    A bare scenario name with no file is also accepted.
    """
    cp = configparser.ConfigParser()
    if path is not None:
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ValidationError(f"malformed config {path}: {exc}") from exc
    elif text is not None:
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ValidationError(f"malformed config: {exc}") from exc

    seed = 12345
    if cp.has_section("run"):
        for key in cp.options("run"):
            if key == "scenario":
                scenario = cp.get("run", "scenario")
            elif key == "seed":
                try:
                    seed = int(cp.get("run", "seed"))
                except ValueError as exc:
                    raise ValidationError(f"field 'seed': {exc}") from exc
            else:
                raise ValidationError(f"unknown key {key!r} in [run] section")
    for section in cp.sections():
        if section not in ("run", "params"):
            raise ValidationError(f"unknown section [{section}]")

    if scenario is None:
        raise ValidationError("no scenario given (config [run] section or CLI)")
    scenario = scenario.replace("-", "_")
    if scenario not in SCENARIOS:
        raise ValidationError(f"unknown scenario {scenario!r}; known: {sorted(SCENARIOS)}")

    params = {}
    if cp.has_section("params"):
        for key in cp.options("params"):
            params[key] = _coerce(scenario, key, cp.get("params", key))
    for key, raw in (overrides or {}).items():
        params[key] = _coerce(scenario, key, raw)
    return RunConfig(scenario=scenario, seed=seed, params=params)


def serialize_config(cfg, include_defaults=False):
    """INI text that parses back to an equal RunConfig.

    With include_defaults=True every parameter is written explicitly (the
    form embedded in run metadata, immune to future default changes)."""
    cp = configparser.ConfigParser()
    cp["run"] = {"scenario": cfg.scenario, "seed": str(cfg.seed)}
    items = cfg.full_params() if include_defaults else cfg.params
    cp["params"] = {k: repr(v) if isinstance(v, float) else str(v)
                    for k, v in items.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
