"""Experiment configuration: schema, text grammar, parsing and serialization.

A configuration file is a sectioned key/value text::

    # antenna-selection study
    [experiment]
    kind = MimoSelection
    trials = 10000
    base_seed = 1

    [sweep]
    param = antennas
    values = 3, 4, 5

    [params]
    cancellation_db = 80

Blank lines and ``#`` comments are ignored. Values are bare tokens; lists
are comma separated. Unknown sections or keys are rejected.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

from fdnet.errors import ConfigError, ConfigSyntaxError

KINDS = ("MimoSelection", "OfdmaMatching", "RelaySelection", "ModeSwitch", "PowerSweep")


@dataclass(frozen=True)
class Param:
    type: type
    default: Any
    sweepable: bool = False
    choices: Tuple[str, ...] = ()
    minimum: float = -math.inf
    help: str = ""


_RSI = ("constant", "rayleigh", "rician")

_COMMON = {
    "noise": Param(float, 1.0, minimum=0.0, help="noise power N0 (W)"),
    "cancellation_db": Param(float, 80.0, sweepable=True, help="self-interference cancellation (dB)"),
    "rsi_model": Param(str, "rayleigh", choices=_RSI, help="RSI statistics; constant uses the mean gain"),
    "rsi_k_factor": Param(float, 0.0, minimum=0.0, help="K-factor of Rician RSI"),
    "channel_k_factor": Param(float, 0.0, minimum=0.0, help="K-factor of the data channels (0 = Rayleigh)"),
}

SCHEMA: Dict[str, Dict[str, Param]] = {
    "MimoSelection": {
        **_COMMON,
        "antennas": Param(int, 3, sweepable=True, minimum=2, help="antennas per node"),
        "power_db": Param(float, 10.0, sweepable=True, help="per-node transmit power (dBW)"),
        "modulation": Param(str, "bpsk", help="bpsk, qpsk or qamM"),
    },
    "OfdmaMatching": {
        **_COMMON,
        "m": Param(int, 3, sweepable=True, minimum=1, help="TX/RX user pairs"),
        "k": Param(int, 4, sweepable=True, minimum=1, help="subcarriers"),
        "user_power_db": Param(float, 10.0, sweepable=True, help="TX user power (dBW)"),
        "bs_power_db": Param(float, 10.0, sweepable=True, help="BS peak power P_s (dBW)"),
        "cross_gain_db": Param(float, -10.0, help="mean TX->RX user cross gain (dB)"),
        "epsilon": Param(float, 0.0, minimum=0.0, help="price step; 0 selects 1e-3 x max unit rate"),
        "split_rule": Param(str, "uniform", choices=("uniform", "waterfilling")),
        "centralized": Param(bool, True, help="also run exhaustive search"),
        "random": Param(bool, True, help="also run the random baseline"),
    },
    "RelaySelection": {
        **_COMMON,
        "relays": Param(int, 4, sweepable=True, minimum=1),
        "configs_per_relay": Param(int, 2, minimum=1, help="antenna configurations per relay"),
        "source_power_db": Param(float, 10.0, sweepable=True),
        "relay_power_db": Param(float, 10.0, sweepable=True, help="relay power budget (dBW)"),
        "protocol": Param(str, "df", choices=("df", "af")),
        "direct_link": Param(bool, False),
        "direct_gain_db": Param(float, -10.0, help="mean source->destination gain (dB)"),
    },
    "ModeSwitch": {
        **_COMMON,
        "power_db": Param(float, 10.0, sweepable=True),
        "fading": Param(bool, True, help="false fixes both data channels to unit gain"),
    },
    "PowerSweep": {
        **_COMMON,
        "cancellation_db": Param(float, 20.0, sweepable=True, help="self-interference cancellation at A (dB)"),
        "streams": Param(int, 4, minimum=1, help="parallel streams per direction"),
        "power_db": Param(float, 10.0, sweepable=True, help="per-node power budget (dBW)"),
        "rsi_asymmetry_db": Param(float, 10.0, sweepable=True, help="extra RSI at B relative to A (dB)"),
        "tol": Param(float, 1e-6, minimum=0.0),
        "max_iters": Param(int, 100, minimum=1),
    },
}

DEFAULT_SWEEPS = {
    "MimoSelection": ("antennas", (3, 4, 5)),
    "OfdmaMatching": ("user_power_db", (0.0, 5.0, 10.0, 15.0, 20.0)),
    "RelaySelection": ("relays", (1, 2, 4, 8)),
    "ModeSwitch": ("cancellation_db", tuple(float(v) for v in range(110, -1, -10))),
    "PowerSweep": ("power_db", (0.0, 10.0, 20.0, 30.0)),
}

DEFAULT_TRIALS = {
    "MimoSelection": 10000,
    "OfdmaMatching": 500,
    "RelaySelection": 2000,
    "ModeSwitch": 2000,
    "PowerSweep": 500,
}

DEFAULT_SEED = 1


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    trials: int
    base_seed: int
    sweep_param: str
    sweep_values: Tuple[Any, ...]
    params: Dict[str, Any] = field(default_factory=dict)

    def point(self, value) -> Dict[str, Any]:
        """Full parameter set for one sweep value."""
        p = dict(self.params)
        p[self.sweep_param] = value
        return p

    def replace(self, **changes) -> "ExperimentConfig":
        d = {**self.__dict__, **changes}
        return validate(d["kind"], d["trials"], d["base_seed"], d["sweep_param"], d["sweep_values"], d["params"])


# --- value coercion -------------------------------------------------------------

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _coerce(decl: Param, value, key):
    t = decl.type
    try:
        if t is bool:
            if isinstance(value, bool):
                out = value
            elif str(value).lower() in _TRUE:
                out = True
            elif str(value).lower() in _FALSE:
                out = False
            else:
                raise ValueError
        elif t is int:
            if isinstance(value, bool):
                raise ValueError
            if isinstance(value, float):
                if not value.is_integer():
                    raise ValueError
                value = int(value)
            out = int(value)
        elif t is float:
            if isinstance(value, bool):
                raise ValueError
            out = float(value)
            if not math.isfinite(out):
                raise ValueError
        else:
            out = str(value).strip().lower() if decl.choices or key == "modulation" else str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {t.__name__}, got {value!r}", key) from None
    if decl.choices and out not in decl.choices:
        raise ConfigError(f"{key}: must be one of {', '.join(decl.choices)}, got {out!r}", key)
    if t in (int, float) and out < decl.minimum:
        raise ConfigError(f"{key}: must be >= {decl.minimum}, got {out}", key)
    return out


def validate(kind, trials, base_seed, sweep_param, sweep_values, params) -> ExperimentConfig:
    """Check every field, fill defaults and return a frozen config."""
    if kind not in SCHEMA:
        raise ConfigError(f"kind: unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}", "kind")
    schema = SCHEMA[kind]
    trials = _coerce(Param(int, 1, minimum=1), trials, "trials")
    base_seed = _coerce(Param(int, 0, minimum=0), base_seed, "base_seed")
    if base_seed >= 2**64:
        raise ConfigError("base_seed: must fit in 64 bits", "base_seed")
    if sweep_param not in schema:
        raise ConfigError(f"param: unknown sweep parameter {sweep_param!r} for {kind}", "param")
    decl = schema[sweep_param]
    if not decl.sweepable:
        raise ConfigError(f"param: {sweep_param!r} cannot be swept", "param")
    values = tuple(_coerce(decl, v, "values") for v in sweep_values)
    if not values:
        raise ConfigError("values: sweep needs at least one value", "values")
    if len(values) > 1:
        steps = [b - a for a, b in zip(values, values[1:])]
        if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise ConfigError("values: sweep values must be distinct and monotonically ordered", "values")
    full = {}
    for key, value in params.items():
        if key not in schema:
            raise ConfigError(f"{key}: unknown parameter for {kind}", key)
        full[key] = _coerce(schema[key], value, key)
    if sweep_param in full:
        raise ConfigError(f"{sweep_param}: parameter is swept and cannot also be fixed", sweep_param)
    for key, p in schema.items():
        if key != sweep_param:
            full.setdefault(key, p.default)
    if kind == "MimoSelection":
        from fdnet.channel import Modulation
        from fdnet.errors import DomainError

        try:
            Modulation.parse(full["modulation"])
        except DomainError as exc:
            raise ConfigError(f"modulation: {exc}", "modulation") from None
    if kind == "OfdmaMatching":
        ms = values if sweep_param == "m" else (full["m"],)
        ks = values if sweep_param == "k" else (full["k"],)
        if max(ms) > min(ks):
            raise ConfigError("k: need at least as many subcarriers as user pairs", "k")
    if kind == "PowerSweep" and full["tol"] <= 0:
        raise ConfigError("tol: must be positive", "tol")
    if sweep_param == "antennas" and min(values) < 2:
        raise ConfigError("values: antennas must be >= 2", "values")
    return ExperimentConfig(kind, trials, base_seed, sweep_param, values, dict(sorted(full.items())))


def default_config(kind: str, **overrides) -> ExperimentConfig:
    sweep_param, values = DEFAULT_SWEEPS.get(kind, (None, ()))
    return validate(
        kind,
        overrides.pop("trials", DEFAULT_TRIALS.get(kind, 1)),
        overrides.pop("base_seed", DEFAULT_SEED),
        overrides.pop("sweep_param", sweep_param),
        overrides.pop("sweep_values", values),
        overrides,
    )


# --- text grammar -------------------------------------------------------------------

_SECTIONS = {
    "experiment": ("kind", "trials", "base_seed"),
    "sweep": ("param", "values"),
    "params": None,
}


def _tokenize(text: str):
    """Yield (section, key, value, line, value_column) for each assignment."""
    section = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        indent = len(stripped) - len(stripped.lstrip())
        body = stripped.strip()
        if body.startswith("["):
            if not body.endswith("]"):
                raise ConfigSyntaxError("section header missing closing ']'", lineno, indent + len(body) + 1)
            name = body[1:-1].strip()
            if not name or not name.replace("_", "").isalnum():
                raise ConfigSyntaxError(f"invalid section name {name!r}", lineno, indent + 2)
            if name not in _SECTIONS:
                raise ConfigError(f"[{name}]: unknown section (line {lineno})", name)
            if name in seen:
                raise ConfigError(f"[{name}]: duplicate section (line {lineno})", name)
            seen.add(name)
            section = name
            continue
        eq = stripped.find("=")
        if eq < 0:
            raise ConfigSyntaxError("expected 'key = value'", lineno, indent + 1)
        key = stripped[:eq].strip()
        if not key:
            raise ConfigSyntaxError("missing key before '='", lineno, eq + 1)
        if not key.replace("_", "").isalnum():
            raise ConfigSyntaxError(f"invalid key {key!r}", lineno, indent + 1)
        value = stripped[eq + 1:].strip()
        if not value:
            raise ConfigSyntaxError("missing value after '='", lineno, eq + 2)
        if section is None:
            raise ConfigSyntaxError("assignment outside of a section", lineno, indent + 1)
        yield section, key, value, lineno


def _unquote(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "\"'":
        return token[1:-1]
    return token


def _split_list(value: str):
    return [_unquote(v) for v in value.split(",") if v.strip()]


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text; defaults are filled in."""
    data = {"experiment": {}, "sweep": {}, "params": {}}
    for section, key, value, lineno in _tokenize(text):
        allowed = _SECTIONS[section]
        if allowed is not None and key not in allowed:
            raise ConfigError(f"{key}: unknown key in [{section}] (line {lineno})", key)
        if key in data[section]:
            raise ConfigError(f"{key}: duplicate key (line {lineno})", key)
        data[section][key] = _split_list(value) if key == "values" else _unquote(value)
    exp = data["experiment"]
    if "kind" not in exp:
        raise ConfigError("kind: [experiment] must set kind", "kind")
    kind = exp["kind"]
    if kind not in SCHEMA:
        raise ConfigError(f"kind: unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}", "kind")
    sweep_param, sweep_values = DEFAULT_SWEEPS[kind]
    sweep = data["sweep"]
    if "param" in sweep and sweep["param"] != sweep_param and "values" not in sweep:
        raise ConfigError("values: a custom sweep parameter needs explicit values", "values")
    return validate(
        kind,
        exp.get("trials", DEFAULT_TRIALS[kind]),
        exp.get("base_seed", DEFAULT_SEED),
        sweep.get("param", sweep_param),
        sweep.get("values", sweep_values),
        data["params"],
    )


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Render ``cfg`` in the text grammar; ``parse_config`` inverts it."""
    lines = [
        "[experiment]",
        f"kind = {cfg.kind}",
        f"trials = {cfg.trials}",
        f"base_seed = {cfg.base_seed}",
        "",
        "[sweep]",
        f"param = {cfg.sweep_param}",
        "values = " + ", ".join(_fmt(v) for v in cfg.sweep_values),
        "",
        "[params]",
    ]
    lines += [f"{k} = {_fmt(v)}" for k, v in cfg.params.items()]
    return "\n".join(lines) + "\n"
