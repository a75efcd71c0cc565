"""Scenario files (YAML), built-in presets and round-trip serialisation.

A scenario file has six sections::

    platoon:      {followers: 10, d: 5.0, v_init: 25.0, x0: 0.0}
    delay:        {tau: 0.5, tau0: 0.5}
    controller:
      mode: cacc+                      # acc | cacc | cacc+
      r: 3
      gains: {k_a: 0.2, k_v: 0.206, k_p: 0.01, h_w: 0.32}
      vehicles:                        # optional per-follower overrides
        1: {r: 1, k_a: 0.5, k_v: 0.7, k_p: 0.06, h_w: 0.7}
      spacing_reference: chain         # chain | own
    lead:         {profile: paper-sine, params: {}}
    integration:  {dt: 0.01, t_end: 80.0, dynamics: pure_delay}
    verification: {omega_min: 0.001, omega_max: 1000.0, omega_points: 4000,
                   spacing: log, tau_points: 50, l_max: 3}

Follower ``i`` without an override uses ``gains`` with ``r_i = min(i, r)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from platoon_headway.gains import ConfigError, ControllerGains, DomainError, Mode
from platoon_headway.simulation import LeadProfile, PlatoonScenario
from platoon_headway.string_stability import FrequencyGrid

SECTIONS = {
    "platoon": ({"followers", "d", "v_init", "x0"}, {"followers"}),
    "delay": ({"tau", "tau0"}, {"tau0"}),
    "controller": ({"mode", "r", "gains", "vehicles", "spacing_reference"}, {"mode", "gains"}),
    "lead": ({"profile", "params"}, set()),
    "integration": ({"dt", "t_end", "dynamics"}, set()),
    "verification": ({"omega_min", "omega_max", "omega_points", "spacing", "tau_points", "l_max"}, set()),
}
GAIN_KEYS = ("k_a", "k_v", "k_p", "h_w")


@dataclass(frozen=True)
class ScenarioConfig:
    """A platoon scenario together with the design gains and verification settings."""

    scenario: PlatoonScenario
    mode: Mode
    design: ControllerGains
    grid: FrequencyGrid = field(default_factory=FrequencyGrid)
    l_max: int = 3
    name: str = ""

    @property
    def tau0(self) -> float:
        return self.design.tau0


class _Lines:
    """Line numbers of mapping keys, addressed by dotted path."""

    def __init__(self, text: str):
        self.lines: dict[str, int] = {}
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
        except yaml.YAMLError:
            return
        self._walk(node, "")

    def _walk(self, node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = f"{prefix}.{key.value}" if prefix else str(key.value)
                self.lines[path] = key.start_mark.line + 1
                self._walk(value, path)

    def at(self, path: str) -> str:
        line = self.lines.get(path)
        return f" (line {line})" if line else ""


def _fail(lines: _Lines, path: str, msg: str):
    raise ConfigError(f"{path}{lines.at(path)}: {msg}")


def _number(lines, section: dict, key: str, path: str, default=None, integer=False):
    if key not in section:
        if default is None:
            _fail(lines, path, "missing required field")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(lines, path, f"expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            _fail(lines, path, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _section(lines, doc: dict, name: str) -> dict:
    allowed, required = SECTIONS[name]
    sec = doc.get(name, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        _fail(lines, name, "expected a mapping")
    for key in sec:
        if key not in allowed:
            _fail(lines, f"{name}.{key}", f"unknown key; allowed: {sorted(allowed)}")
    for key in required:
        if key not in sec:
            _fail(lines, name, f"missing required field {key!r}")
    return sec


def _gains_block(lines, block, path: str, base: dict | None = None) -> dict:
    if not isinstance(block, dict):
        _fail(lines, path, "expected a mapping of gains")
    allowed = set(GAIN_KEYS) | ({"r"} if base is not None else set())
    for key in block:
        if key not in allowed:
            _fail(lines, f"{path}.{key}", f"unknown key; allowed: {sorted(allowed)}")
    out = dict(base or {})
    for key in GAIN_KEYS:
        if key in block:
            out[key] = _number(lines, block, key, f"{path}.{key}")
        elif base is None:
            _fail(lines, path, f"missing required field {key!r}")
    if "r" in block:
        out["r"] = _number(lines, block, "r", f"{path}.r", integer=True)
    return out


def parse_scenario_text(text: str, name: str = "") -> ScenarioConfig:
    """Parse and validate a YAML scenario document."""
    lines = _Lines(text)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML syntax error{where}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(doc, dict):
        raise ConfigError("scenario file must be a mapping of sections")
    for key in doc:
        if key not in SECTIONS:
            _fail(lines, str(key), f"unknown section; allowed: {sorted(SECTIONS)}")

    platoon = _section(lines, doc, "platoon")
    delay = _section(lines, doc, "delay")
    ctrl = _section(lines, doc, "controller")
    lead = _section(lines, doc, "lead")
    integ = _section(lines, doc, "integration")
    verif = _section(lines, doc, "verification")

    n = _number(lines, platoon, "followers", "platoon.followers", integer=True)
    if n < 1:
        _fail(lines, "platoon.followers", "need at least one follower")
    tau0 = _number(lines, delay, "tau0", "delay.tau0")
    tau = _number(lines, delay, "tau", "delay.tau", default=tau0)

    mode_text = ctrl["mode"]
    if not isinstance(mode_text, str):
        _fail(lines, "controller.mode", "expected a string")
    mode = Mode.parse(mode_text)
    r = _number(lines, ctrl, "r", "controller.r", default=1 if mode is not Mode.CACC_PLUS else None, integer=True)
    base = _gains_block(lines, ctrl["gains"], "controller.gains")
    base["r"] = r

    overrides = ctrl.get("vehicles") or {}
    if not isinstance(overrides, dict):
        _fail(lines, "controller.vehicles", "expected a mapping from follower index to gains")
    per_vehicle = {}
    for key, block in overrides.items():
        path = f"controller.vehicles.{key}"
        if isinstance(key, bool) or not isinstance(key, int) or not 1 <= key <= n:
            _fail(lines, path, f"follower index must be an integer in 1..{n}")
        per_vehicle[key] = _gains_block(lines, block, path, base={})

    try:
        design = ControllerGains(tau0=tau0, **base)
        design.validate()
        if design.mode is not mode and not (mode is Mode.CACC and design.mode is Mode.ACC):
            raise DomainError(f"gains with k_a = {design.k_a}, r = {design.r} describe {design.mode.value}, not {mode.value}")
        vehicles = []
        for i in range(1, n + 1):
            fields = {k: base[k] for k in GAIN_KEYS}
            fields["r"] = min(i, r)
            fields.update(per_vehicle.get(i, {}))
            vehicles.append(ControllerGains(tau0=tau0, **fields))
    except DomainError as exc:
        raise ConfigError(f"controller: {exc}") from None

    spacing_ref = ctrl.get("spacing_reference", "chain")
    profile = lead.get("profile", "paper-sine")
    params = lead.get("params") or {}
    if not isinstance(params, dict):
        _fail(lines, "lead.params", "expected a mapping")
    lead_profile = LeadProfile(str(profile), dict(params))

    scenario = PlatoonScenario(
        vehicles=tuple(vehicles),
        d=_number(lines, platoon, "d", "platoon.d", default=5.0),
        tau=tau,
        v_init=_number(lines, platoon, "v_init", "platoon.v_init", default=25.0),
        lead=lead_profile,
        dt=_number(lines, integ, "dt", "integration.dt", default=0.01),
        t_end=_number(lines, integ, "t_end", "integration.t_end", default=80.0),
        dynamics=str(integ.get("dynamics", "pure_delay")),
        spacing_reference=str(spacing_ref),
        x0=_number(lines, platoon, "x0", "platoon.x0", default=0.0),
    )
    scenario.validate()
    if scenario.tau > tau0:
        raise ConfigError(f"delay.tau ({scenario.tau}) exceeds the design bound delay.tau0 ({tau0})")
    try:
        grid = FrequencyGrid(
            omega_min=_number(lines, verif, "omega_min", "verification.omega_min", default=1e-3),
            omega_max=_number(lines, verif, "omega_max", "verification.omega_max", default=1e3),
            omega_points=_number(lines, verif, "omega_points", "verification.omega_points", default=4000, integer=True),
            spacing=str(verif.get("spacing", "log")),
            tau_points=_number(lines, verif, "tau_points", "verification.tau_points", default=50, integer=True),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"verification: {exc}") from None
    l_max = _number(lines, verif, "l_max", "verification.l_max", default=3, integer=True)
    if l_max < 1:
        _fail(lines, "verification.l_max", "must be at least 1")
    return ScenarioConfig(scenario=scenario, mode=mode, design=design, grid=grid, l_max=l_max, name=name)


def parse_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc.strerror}") from None
    return parse_scenario_text(text, name=path.stem)


def to_document(cfg: ScenarioConfig) -> dict:
    sc, dg = cfg.scenario, cfg.design
    return {
        "platoon": {"followers": sc.n_followers, "d": sc.d, "v_init": sc.v_init, "x0": sc.x0},
        "delay": {"tau": sc.tau, "tau0": dg.tau0},
        "controller": {
            "mode": cfg.mode.value,
            "r": dg.r,
            "gains": {k: getattr(dg, k) for k in GAIN_KEYS},
            "vehicles": {
                i: {"r": g.r, **{k: getattr(g, k) for k in GAIN_KEYS}}
                for i, g in enumerate(sc.vehicles, start=1)
            },
            "spacing_reference": sc.spacing_reference,
        },
        "lead": {"profile": sc.lead.name, "params": dict(sc.lead.params)},
        "integration": {"dt": sc.dt, "t_end": sc.t_end, "dynamics": sc.dynamics},
        "verification": {
            "omega_min": cfg.grid.omega_min,
            "omega_max": cfg.grid.omega_max,
            "omega_points": cfg.grid.omega_points,
            "spacing": cfg.grid.spacing,
            "tau_points": cfg.grid.tau_points,
            "l_max": cfg.l_max,
        },
    }


def serialize_scenario(cfg: ScenarioConfig) -> str:
    """YAML text that parses back to an equal :class:`ScenarioConfig` (name aside)."""
    return yaml.safe_dump(to_document(cfg), sort_keys=False, default_flow_style=None)


def scenario_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_scenario(cfg).encode()).hexdigest()


# -- presets ---------------------------------------------------------------

TAU0 = 0.5
CACC_GAINS = dict(k_a=0.5, k_v=0.7, k_p=0.06)
ACC_GAINS = dict(k_a=0.0, k_v=0.8, k_p=0.1)
CACC_PLUS_R3 = dict(k_a=0.2, k_v=0.206, k_p=0.01, h_w=0.32)
CACC_PLUS_R2 = dict(k_a=0.2, k_v=0.4, k_p=0.02, h_w=0.5)


def _uniform(mode: Mode, gains: dict, h_w: float, name: str) -> ScenarioConfig:
    design = ControllerGains(h_w=h_w, tau0=TAU0, r=1, **gains)
    scenario = PlatoonScenario(vehicles=(design,) * 10, d=5.0, tau=TAU0, v_init=25.0)
    return ScenarioConfig(scenario=scenario, mode=mode, design=design, name=name)


def _cacc_plus_r3() -> ScenarioConfig:
    design = ControllerGains(tau0=TAU0, r=3, **CACC_PLUS_R3)
    v1 = ControllerGains(h_w=0.7, tau0=TAU0, r=1, **CACC_GAINS)
    v2 = ControllerGains(tau0=TAU0, r=2, **CACC_PLUS_R2)
    scenario = PlatoonScenario(vehicles=(v1, v2) + (design,) * 8, d=5.0, tau=TAU0, v_init=25.0)
    return ScenarioConfig(scenario=scenario, mode=Mode.CACC_PLUS, design=design, name="paper-caccplus-r3")


PRESETS = {
    "paper-cacc-0.7": lambda: _uniform(Mode.CACC, CACC_GAINS, 0.7, "paper-cacc-0.7"),
    "paper-cacc-0.6": lambda: _uniform(Mode.CACC, CACC_GAINS, 0.6, "paper-cacc-0.6"),
    "paper-acc-1.2": lambda: _uniform(Mode.ACC, ACC_GAINS, 1.2, "paper-acc-1.2"),
    "paper-acc-0.9": lambda: _uniform(Mode.ACC, ACC_GAINS, 0.9, "paper-acc-0.9"),
    "paper-caccplus-r3": _cacc_plus_r3,
}


def load_preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
