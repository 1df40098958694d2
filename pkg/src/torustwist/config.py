"""TOML run configuration for the command-line front end.

One file drives a whole run: a ``[family]`` table naming the map, an
optional ``[run]`` table for output directory / parallelism / rng seed, and
one table per subcommand.  Unknown tables and unknown keys are hard errors
-- a typo should kill the run, not silently fall back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError

__all__ = ["RunConfig", "load_config", "validate_tables"]


# ---------------------------------------------------------------------------
# scalar validators
# ---------------------------------------------------------------------------
# TOML booleans are ints in Python, so every numeric check has to reject
# bool explicitly or `horizon = true` would sail through.

def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("%s: expected an integer, got %r" % (where, value))
    return value


def _as_pos_int(value, where: str) -> int:
    v = _as_int(value, where)
    if v < 1:
        raise ConfigError("%s: must be >= 1, got %d" % (where, v))
    return v


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("%s: expected a number, got %r" % (where, value))
    return float(value)


def _as_pos_float(value, where: str) -> float:
    v = _as_float(value, where)
    if not v > 0.0:
        raise ConfigError("%s: must be > 0, got %g" % (where, v))
    return v


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ConfigError("%s: expected a string, got %r" % (where, value))
    return value


def _as_float_list(value, where: str) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError("%s: expected a nonempty array of numbers" % where)
    return [_as_float(v, "%s[%d]" % (where, j)) for j, v in enumerate(value)]


def _as_int_list(value, where: str) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError("%s: expected a nonempty array of integers" % where)
    return [_as_int(v, "%s[%d]" % (where, j)) for j, v in enumerate(value)]


def _as_pair_list(value, where: str) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError("%s: expected a nonempty array of [phi, i] pairs" % where)
    out = []
    for j, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError("%s[%d]: expected a 2-element array" % (where, j))
        out.append((_as_float(pair[0], "%s[%d][0]" % (where, j)),
                    _as_float(pair[1], "%s[%d][1]" % (where, j))))
    return out


_VALIDATORS = {
    "int": _as_int,
    "pos_int": _as_pos_int,
    "float": _as_float,
    "pos_float": _as_pos_float,
    "str": _as_str,
    "float_list": _as_float_list,
    "int_list": _as_int_list,
    "pair_list": _as_pair_list,
}

# key -> (type tag, default); _REQUIRED means the section must supply it.
_REQUIRED = object()

_SECTION_SCHEMA: Dict[str, Dict[str, tuple]] = {
    "run": {
        "out": ("str", "runs"),
        "workers": ("pos_int", 1),
        "rng_seed": ("int", None),
    },
    "map_check": {
        "n_grid": ("pos_int", 64),
        "n_quad": ("pos_int", 2048),
    },
    "rotation": {
        "horizon": ("pos_int", 10_000),
        "window": ("pos_int", 1_000),
        "seeds": ("pair_list", None),
        "phi_values": ("float_list", None),
        "i_values": ("float_list", None),
    },
    "levelset": {
        "p": ("int", _REQUIRED),
        "q": ("pos_int", _REQUIRED),
        "n_phi": ("pos_int", 1024),
        "n_scan": ("pos_int", 512),
        "root_tol": ("pos_float", 1e-12),
    },
    "orbit": {
        "n": ("pos_int", _REQUIRED),
        "s": ("int", None),
        "k": ("int", None),
        "n_phi": ("pos_int", 1024),
        "s_values": ("int_list", None),
    },
    "ric": {
        "n_max": ("pos_int", 8),
        "horizon": ("pos_int", 100_000),
        "n_seeds": ("pos_int", 256),
        "s": ("float", 2.0),
        "l": ("float", -1.0),
        "n_phi": ("pos_int", 256),
    },
    "kcr": {
        "k": ("int", 1),
        "n_max": ("pos_int", _REQUIRED),
        "lo": ("float", _REQUIRED),
        "hi": ("float", _REQUIRED),
        "tol": ("pos_float", 1e-3),
        "n_phi": ("pos_int", 256),
    },
    "scan": {
        "gammas": ("float_list", _REQUIRED),
        "alphas": ("float_list", _REQUIRED),
        "n_seeds": ("pos_int", 16),
        "horizon": ("pos_int", 2_000),
        "window": ("pos_int", 200),
    },
}

# Commands whose searches draw random numbers; they refuse to run unseeded
# so every published result names its stream.
_NEEDS_SEED = frozenset({"ric", "scan"})


def _validate_section(name: str, table: dict) -> dict:
    schema = _SECTION_SCHEMA[name]
    unknown = set(table) - set(schema)
    if unknown:
        raise ConfigError("[%s]: unknown keys %s (known: %s)"
                          % (name, sorted(unknown), sorted(schema)))
    out = {}
    for key, (tag, default) in schema.items():
        if key in table:
            out[key] = _VALIDATORS[tag](table[key], "[%s] %s" % (name, key))
        elif default is _REQUIRED:
            raise ConfigError("[%s]: missing required key %r" % (name, key))
        else:
            out[key] = default
    return out


def _validate_family(table: dict) -> tuple:
    if "name" not in table:
        raise ConfigError("[family]: missing required key 'name'")
    name = _as_str(table["name"], "[family] name")
    params = {}
    for key, value in table.items():
        if key == "name":
            continue
        params[key] = _as_float(value, "[family] %s" % key)
    return name, params


def validate_tables(raw: dict) -> dict:
    """Validate a parsed TOML document; returns sections with defaults filled.

    Every section present is checked, not just the one a given command needs:
    a config file is valid or invalid as a whole.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")
    known = set(_SECTION_SCHEMA) | {"family"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError("unknown config tables %s (known: %s)"
                          % (sorted(unknown), sorted(known)))
    for section in raw:
        if not isinstance(raw[section], dict):
            raise ConfigError("[%s]: expected a table" % section)
    if "family" not in raw:
        raise ConfigError("missing required table [family]")

    out: Dict[str, Any] = {}
    out["family"] = _validate_family(raw["family"])
    out["run"] = _validate_section("run", raw.get("run", {}))
    for section in _SECTION_SCHEMA:
        if section != "run" and section in raw:
            out[section] = _validate_section(section, raw[section])
    return out


def _rotation_seeds(opts: dict) -> list:
    """Materialize the rotation seed list from either spelling."""
    if opts["seeds"] is not None:
        if opts["phi_values"] is not None or opts["i_values"] is not None:
            raise ConfigError("[rotation]: give either seeds or "
                              "phi_values/i_values, not both")
        return list(opts["seeds"])
    if opts["phi_values"] is None or opts["i_values"] is None:
        raise ConfigError("[rotation]: need seeds, or phi_values and i_values")
    return [(phi, i) for phi in opts["phi_values"] for i in opts["i_values"]]


@dataclass(frozen=True)
class RunConfig:
    """A validated run: family spec, run options, one command's options."""

    command: str
    family_name: str
    family_params: Dict[str, float]
    out: str
    workers: int
    rng_seed: Optional[int]
    options: Dict[str, Any]

    def echo(self) -> dict:
        """The config as echoed into result envelopes (JSON-ready)."""
        return {
            "command": self.command,
            "family": {"name": self.family_name, **self.family_params},
            "run": {"out": self.out, "workers": self.workers,
                    "rng_seed": self.rng_seed},
            "options": dict(self.options),
        }


def load_config(path: str, command: str, out: Optional[str] = None,
                workers: Optional[int] = None,
                rng_seed: Optional[int] = None) -> RunConfig:
    """Parse, validate, and slice a config file for one command.

    ``out``/``workers``/``rng_seed`` are command-line overrides and win over
    the [run] table.  The command's own section must exist whenever it has
    required keys; otherwise defaults apply.
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config file not found: %s" % path)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config parse error in %s: %s" % (path, exc))

    tables = validate_tables(raw)
    section = "map_check" if command == "map-check" else command
    if section not in tables:
        if any(d is _REQUIRED for _, d in _SECTION_SCHEMA[section].values()):
            raise ConfigError("missing required table [%s] for command %s"
                              % (section, command))
        tables[section] = _validate_section(section, {})
    opts = tables[section]
    if section == "rotation":
        opts = dict(opts, seeds=_rotation_seeds(opts))
        opts.pop("phi_values")
        opts.pop("i_values")

    run = tables["run"]
    seed = rng_seed if rng_seed is not None else run["rng_seed"]
    if section in _NEEDS_SEED and seed is None:
        raise ConfigError("command %s draws random seeds: set rng_seed in "
                          "[run] or pass --seed" % command)
    name, params = tables["family"]
    return RunConfig(
        command=command,
        family_name=name,
        family_params=params,
        out=out if out is not None else run["out"],
        workers=workers if workers is not None else run["workers"],
        rng_seed=seed,
        options=opts,
    )
