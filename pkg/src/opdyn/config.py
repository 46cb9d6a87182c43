"""Config documents: strict JSON parsing, canonical serialization, preset
loading, and assembly of engine objects.

Schema (sections ``hrho`` and ``gksl`` are optional, everything else
required; unknown fields are rejected everywhere):

    network: n, omega_f, omega_g, lambda, p_f, p_g
    init:    F0, G0
    hrho:    rule_id, kappa, tau, t_max
    gksl:    channels, dt, t_max, initial_state (optional, default "product")
    output:  dt_out

A channel is {"kind", "strength"} plus {"src", "dst"} for transfers or
{"agent"} for switches and pumps.
"""

import copy
import json
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError, OpdynError
from .gksl import (ChannelKind, ChannelSpec, DensityState, LindbladSet,
                   build_initial_density, build_lindblads,
                   build_single_excitation_density)
from .heisenberg import MeanState
from .hrho import HrhoSchedule, RuleSpec
from .model import NetworkSpec, validate_spec

_TRANSFER_KINDS = {"transfer_good", "transfer_fake"}
_SITE_KINDS = {"switch_fake_to_good", "switch_good_to_fake", "pump_good", "pump_fake"}
_INITIAL_STATES = ("product", "single_excitation")

PRESET_NAMES = ("norule", "rule1", "rule2", "rule3", "rule4", "rule5", "rule6",
                "exp1", "exp1-sweep", "exp2", "exp3a", "exp3b")


def _require(mapping, key, path):
    if key not in mapping:
        raise ConfigError(f"missing required field '{key}'", path=path)
    return mapping[key]


def _reject_unknown(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown field '{key}'", path=f"{path}.{key}" if path else key)


def _number(value, path, minimum=None, strict_min=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path=path)
    v = float(value)
    if minimum is not None and (v <= minimum if strict_min else v < minimum):
        op = ">" if strict_min else ">="
        raise ConfigError(f"must be {op} {minimum}, got {value!r}", path=path)
    return v


def _integer(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path=path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", path=path)
    return value


def _vector(value, length, path):
    if not isinstance(value, list) or len(value) != length:
        raise ConfigError(f"expected a list of {length} numbers", path=path)
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _matrix(value, size, path):
    if not isinstance(value, list) or len(value) != size:
        raise ConfigError(f"expected a {size}x{size} matrix", path=path)
    return [_vector(row, size, f"{path}[{i}]") for i, row in enumerate(value)]


def _parse_channel(raw, i, n):
    path = f"gksl.channels[{i}]"
    if not isinstance(raw, dict):
        raise ConfigError("expected a channel object", path=path)
    kind = _require(raw, "kind", path)
    strength = _number(_require(raw, "strength", path), f"{path}.strength", minimum=0.0)
    if kind in _TRANSFER_KINDS:
        _reject_unknown(raw, {"kind", "strength", "src", "dst"}, path)
        out = {"kind": kind, "strength": strength,
               "src": _integer(_require(raw, "src", path), f"{path}.src", 1),
               "dst": _integer(_require(raw, "dst", path), f"{path}.dst", 1)}
    elif kind in _SITE_KINDS:
        _reject_unknown(raw, {"kind", "strength", "agent"}, path)
        out = {"kind": kind, "strength": strength,
               "agent": _integer(_require(raw, "agent", path), f"{path}.agent", 1)}
    else:
        raise ConfigError(f"unknown channel kind {kind!r}", path=f"{path}.kind")
    for key in ("src", "dst", "agent"):
        if key in out and not 1 <= out[key] <= n:
            raise ConfigError(f"{key}={out[key]} outside 1..{n}", path=f"{path}.{key}")
    return out


@dataclass(frozen=True)
class ConfigDocument:
    """A fully validated document in canonical dict form."""

    data: dict

    # --- engine object accessors -------------------------------------------------
    def network_spec(self) -> NetworkSpec:
        net = self.data["network"]
        return NetworkSpec(n=net["n"], omega_f=net["omega_f"], omega_g=net["omega_g"],
                           lam=net["lambda"], p_f=net["p_f"], p_g=net["p_g"])

    def init_means(self) -> MeanState:
        return MeanState(F=self.data["init"]["F0"], G=self.data["init"]["G0"])

    def dt_out(self) -> float:
        return self.data["output"]["dt_out"]

    def has_hrho(self) -> bool:
        return "hrho" in self.data

    def rule_spec(self) -> RuleSpec:
        h = self.data["hrho"]
        return RuleSpec(rule_id=h["rule_id"], kappa=h["kappa"], tau=h["tau"])

    def hrho_schedule(self, t_max=None) -> HrhoSchedule:
        return HrhoSchedule(t_max=t_max if t_max is not None else self.data["hrho"]["t_max"],
                            dt_out=self.dt_out())

    def has_gksl(self) -> bool:
        return "gksl" in self.data

    def lindblads(self) -> LindbladSet:
        channels = []
        for raw in self.data["gksl"]["channels"]:
            kwargs = {k: raw[k] for k in ("agent", "src", "dst") if k in raw}
            channels.append(ChannelSpec(kind=ChannelKind(raw["kind"]),
                                        strength=raw["strength"], **kwargs))
        return build_lindblads(channels, self.data["network"]["n"])

    def initial_density(self) -> DensityState:
        mode = self.data.get("gksl", {}).get("initial_state", "product")
        if mode == "single_excitation":
            return build_single_excitation_density(self.init_means())
        return build_initial_density(self.init_means())

    def gksl_dt(self) -> float:
        return self.data["gksl"]["dt"]

    def gksl_t_max(self) -> float:
        return self.data["gksl"]["t_max"]


def parse_config(text: str) -> ConfigDocument:
    """Parse and fully validate a JSON config document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object")
    _reject_unknown(raw, {"network", "init", "hrho", "gksl", "output"}, "")

    net_raw = _require(raw, "network", "")
    if not isinstance(net_raw, dict):
        raise ConfigError("expected an object", path="network")
    _reject_unknown(net_raw, {"n", "omega_f", "omega_g", "lambda", "p_f", "p_g"}, "network")
    n = _integer(_require(net_raw, "n", "network"), "network.n", minimum=1)
    network = {
        "n": n,
        "omega_f": _vector(_require(net_raw, "omega_f", "network"), n, "network.omega_f"),
        "omega_g": _vector(_require(net_raw, "omega_g", "network"), n, "network.omega_g"),
        "lambda": _vector(_require(net_raw, "lambda", "network"), n, "network.lambda"),
        "p_f": _matrix(_require(net_raw, "p_f", "network"), n, "network.p_f"),
        "p_g": _matrix(_require(net_raw, "p_g", "network"), n, "network.p_g"),
    }

    init_raw = _require(raw, "init", "")
    if not isinstance(init_raw, dict):
        raise ConfigError("expected an object", path="init")
    _reject_unknown(init_raw, {"F0", "G0"}, "init")
    init = {"F0": _vector(_require(init_raw, "F0", "init"), n, "init.F0"),
            "G0": _vector(_require(init_raw, "G0", "init"), n, "init.G0")}

    out_raw = _require(raw, "output", "")
    if not isinstance(out_raw, dict):
        raise ConfigError("expected an object", path="output")
    _reject_unknown(out_raw, {"dt_out"}, "output")
    output = {"dt_out": _number(_require(out_raw, "dt_out", "output"), "output.dt_out",
                                minimum=0.0, strict_min=True)}

    data = {"network": network, "init": init}

    if "hrho" in raw:
        h = raw["hrho"]
        if not isinstance(h, dict):
            raise ConfigError("expected an object", path="hrho")
        _reject_unknown(h, {"rule_id", "kappa", "tau", "t_max"}, "hrho")
        data["hrho"] = {
            "rule_id": _integer(_require(h, "rule_id", "hrho"), "hrho.rule_id", minimum=0),
            "kappa": _vector(_require(h, "kappa", "hrho"), n, "hrho.kappa"),
            "tau": _number(_require(h, "tau", "hrho"), "hrho.tau", minimum=0.0, strict_min=True),
            "t_max": _number(_require(h, "t_max", "hrho"), "hrho.t_max",
                             minimum=0.0, strict_min=True),
        }
        if data["hrho"]["rule_id"] > 6:
            raise ConfigError("rule_id must be 0..6", path="hrho.rule_id")

    if "gksl" in raw:
        g = raw["gksl"]
        if not isinstance(g, dict):
            raise ConfigError("expected an object", path="gksl")
        _reject_unknown(g, {"channels", "dt", "t_max", "initial_state"}, "gksl")
        channels_raw = _require(g, "channels", "gksl")
        if not isinstance(channels_raw, list):
            raise ConfigError("expected a list of channels", path="gksl.channels")
        gksl_data = {
            "channels": [_parse_channel(c, i, n) for i, c in enumerate(channels_raw)],
            "dt": _number(_require(g, "dt", "gksl"), "gksl.dt", minimum=0.0, strict_min=True),
            "t_max": _number(_require(g, "t_max", "gksl"), "gksl.t_max",
                             minimum=0.0, strict_min=True),
        }
        if "initial_state" in g:
            if g["initial_state"] not in _INITIAL_STATES:
                raise ConfigError(f"initial_state must be one of {_INITIAL_STATES}",
                                  path="gksl.initial_state")
            gksl_data["initial_state"] = g["initial_state"]
        data["gksl"] = gksl_data

    data["output"] = output
    doc = ConfigDocument(data=data)

    # semantic validation through the engine constructors, re-tagged with paths
    try:
        validate_spec(doc.network_spec())
    except OpdynError as err:
        raise ConfigError(str(err), path="network") from err
    try:
        doc.init_means()
    except OpdynError as err:
        raise ConfigError(str(err), path="init") from err
    if doc.has_hrho():
        try:
            doc.rule_spec()
        except OpdynError as err:
            raise ConfigError(str(err), path="hrho") from err
        tau = doc.data["hrho"]["tau"]
        dt_out = output["dt_out"]
        n_sub = round(tau / dt_out)
        if n_sub < 1 or abs(n_sub * dt_out - tau) > 1e-9 * max(1.0, tau):
            raise ConfigError(f"dt_out {dt_out} must divide tau {tau}", path="output.dt_out")
    if doc.has_gksl():
        try:
            doc.lindblads()
            doc.initial_density()
        except OpdynError as err:
            raise ConfigError(str(err), path="gksl") from err
    return doc


def serialize_config(doc: ConfigDocument) -> str:
    """Canonical JSON text; parse_config(serialize_config(doc)) == doc."""
    order = ("network", "init", "hrho", "gksl", "output")
    ordered = {k: doc.data[k] for k in order if k in doc.data}
    return json.dumps(ordered, indent=2) + "\n"


def set_param(doc: ConfigDocument, path: str, value: float) -> ConfigDocument:
    """New document with the dotted-path leaf replaced and everything
    re-validated.  Path segments are field names or list indices, e.g.
    ``gksl.channels.16.strength`` or ``network.omega_f.2``."""
    data = copy.deepcopy(doc.data)
    parts = path.split(".")
    node = data
    try:
        for part in parts[:-1]:
            node = node[int(part)] if isinstance(node, list) else node[part]
        leaf = parts[-1]
        if isinstance(node, list):
            old = node[int(leaf)]
            if not isinstance(old, (int, float)) or isinstance(old, bool):
                raise ConfigError("path does not end at a numeric scalar", path=path)
            node[int(leaf)] = float(value)
        else:
            old = node[leaf]
            if not isinstance(old, (int, float)) or isinstance(old, bool):
                raise ConfigError("path does not end at a numeric scalar", path=path)
            node[leaf] = float(value)
    except (KeyError, IndexError, TypeError, ValueError) as err:
        raise ConfigError(f"cannot resolve parameter path: {err}", path=path) from err
    return parse_config(json.dumps(data))


def load_preset(name: str) -> ConfigDocument:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    text = resources.files("opdyn.presets").joinpath(f"{name}.json").read_text()
    return parse_config(text)


#: how each preset is executed: mode plus fixed sweep arguments when needed
PRESET_RUNS = {
    "norule": ("hrho", None),
    "rule1": ("hrho", None), "rule2": ("hrho", None), "rule3": ("hrho", None),
    "rule4": ("hrho", None), "rule5": ("hrho", None), "rule6": ("hrho", None),
    "exp1": ("gksl", None),
    "exp1-sweep": ("sweep", {"param": "gksl.channels.16.strength",
                             "values": "0:50:2.5", "observable": "G6"}),
    "exp2": ("gksl", None),
    "exp3a": ("gksl", None),
    "exp3b": ("gksl", None),
}
