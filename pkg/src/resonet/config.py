"""Scenario files: JSON in, validated model objects out.

A scenario bundles a network, a reservoir, an initial state, a time grid and
optional validation settings.  Parsing is split from loading so that sweeps
can patch the raw dictionary and re-parse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ModelError
from .network import NetworkSpec, degenerate_network, validate_network
from .reservoir import CouplingProfile, ReservoirKind, ReservoirSpec
from .states import RSFamilySpec, SuperpositionState, make_rs_state, make_superposition

__all__ = ["ScenarioConfig", "load_config", "parse_scenario"]

_DEFAULT_THRESHOLD = 5e-3


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Everything a run needs, already validated."""

    network: NetworkSpec
    degenerate: tuple[float, float] | None
    reservoir: ReservoirSpec
    state: SuperpositionState | None
    rs: RSFamilySpec | None
    times: np.ndarray | None
    oracle_enabled: bool
    oracle_cutoff: int | None
    oracle_threshold: float
    svg: bool


def load_config(path) -> dict:
    """Read a JSON scenario file, raising ConfigError on anything malformed."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {p} must hold a JSON object at top level")
    return data


def _section(cfg: dict, name: str, required: bool = True) -> dict | None:
    sec = cfg.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"config is missing the '{name}' section")
        return None
    if not isinstance(sec, dict):
        raise ConfigError(f"config section '{name}' must be an object")
    return sec


def _number(sec: dict, key: str, where: str, default=None):
    if key not in sec:
        if default is not None:
            return default
        raise ConfigError(f"{where} needs a numeric '{key}'")
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: '{key}' must be a number")
    return float(v)


def _integer(sec: dict, key: str, where: str) -> int:
    if key not in sec:
        raise ConfigError(f"{where} needs an integer '{key}'")
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: '{key}' must be an integer")
    return v


def _complex_entry(v, where: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a number or a [re, im] pair, got {v!r}")


def _parse_network(sec: dict) -> tuple[NetworkSpec, tuple[float, float] | None]:
    if "n" in sec:
        n = _integer(sec, "n", "network")
        omega0 = _number(sec, "omega", "network")
        lam = _number(sec, "lambda", "network")
        if n < 1:
            raise ConfigError("network: 'n' must be positive")
        try:
            spec = degenerate_network(n, omega0, lam)
        except ModelError as exc:
            raise ConfigError(f"network: {exc}") from exc
        return spec, (omega0, lam)
    if "omega" not in sec or "coupling" not in sec:
        raise ConfigError(
            "network needs either the shorthand {n, omega, lambda} or explicit "
            "{omega: [...], coupling: [[...]]}"
        )
    omega = np.asarray(sec["omega"], dtype=float)
    coupling = np.asarray(sec["coupling"], dtype=float)
    spec = NetworkSpec(omega=omega, coupling=coupling)
    try:
        validate_network(spec)
    except ModelError as exc:
        raise ConfigError(f"network: {exc}") from exc
    return spec, None


def _parse_profiles(raw, where: str) -> tuple[CouplingProfile, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where}: 'profiles' must be a non-empty list")
    out = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ConfigError(f"{where}: profile {i} must be an object")
        try:
            out.append(
                CouplingProfile(
                    amplitude=_number(item, "amplitude", f"profile {i}"),
                    centers=np.asarray(item.get("centers", []), dtype=float),
                    widths=np.asarray(item.get("widths", []), dtype=float),
                )
            )
        except ModelError as exc:
            raise ConfigError(f"{where}: profile {i}: {exc}") from exc
    return tuple(out)


def _parse_reservoir(sec: dict) -> ReservoirSpec:
    kind_name = sec.get("kind")
    if not isinstance(kind_name, str):
        raise ConfigError("reservoir needs a string 'kind'")
    try:
        kind = ReservoirKind(kind_name)
    except ValueError:
        valid = ", ".join(k.value for k in ReservoirKind)
        raise ConfigError(f"reservoir kind {kind_name!r} unknown (one of: {valid})") from None
    try:
        if kind is ReservoirKind.COMMON_WHITE_NOISE:
            if "Gamma" in sec and "sigma" in sec:
                raise ConfigError("reservoir: give either 'Gamma' or 'sigma', not both")
            key = "sigma" if "sigma" in sec else "Gamma"
            return ReservoirSpec(
                kind=kind,
                sigma=_number(sec, key, "reservoir"),
                epsilon=_number(sec, "epsilon", "reservoir", default=0.0),
            )
        if kind is ReservoirKind.COMMON_PROFILE:
            return ReservoirSpec(
                kind=kind,
                sigma=_number(sec, "sigma", "reservoir"),
                epsilon=_number(sec, "epsilon", "reservoir", default=0.0),
                profiles=_parse_profiles(sec.get("profiles"), "reservoir"),
            )
        return ReservoirSpec(
            kind=kind,
            gamma_plus=_number(sec, "gamma_plus", "reservoir"),
            gamma_minus=_number(sec, "gamma_minus", "reservoir"),
        )
    except ModelError as exc:
        raise ConfigError(f"reservoir: {exc}") from exc


def _parse_state(sec: dict | None, n: int) -> tuple[SuperpositionState | None, RSFamilySpec | None]:
    if sec is None:
        return None, None
    kind = sec.get("type", "rs")
    if kind == "rs":
        sign_raw = sec.get("sign", 1)
        if sign_raw not in (1, -1):
            raise ConfigError("state: 'sign' must be 1 or -1")
        try:
            rs = RSFamilySpec(
                n=n,
                r=_integer(sec, "r", "state"),
                s=_integer(sec, "s", "state"),
                alpha=_complex_entry(sec.get("alpha", 0.0), "state alpha"),
                eta=_complex_entry(sec.get("eta", 0.0), "state eta"),
                sign=sign_raw,
            )
            return make_rs_state(rs), rs
        except ModelError as exc:
            raise ConfigError(f"state: {exc}") from exc
    if kind == "explicit":
        raw_w = sec.get("weights")
        raw_l = sec.get("labels")
        if not isinstance(raw_w, list) or not isinstance(raw_l, list) or not raw_w:
            raise ConfigError("state: explicit form needs 'weights' and 'labels' lists")
        if len(raw_w) != len(raw_l):
            raise ConfigError("state: weights and labels must have the same length")
        weights = [_complex_entry(w, f"state weight {i}") for i, w in enumerate(raw_w)]
        labels = []
        for i, row in enumerate(raw_l):
            if not isinstance(row, list) or len(row) != n:
                raise ConfigError(f"state: label {i} must list {n} mode amplitudes")
            labels.append([_complex_entry(x, f"state label {i}") for x in row])
        try:
            return make_superposition(np.array(weights), np.array(labels)), None
        except ModelError as exc:
            raise ConfigError(f"state: {exc}") from exc
    raise ConfigError(f"state type {kind!r} unknown (use 'rs' or 'explicit')")


def _parse_times(sec: dict | None) -> np.ndarray | None:
    if sec is None:
        return None
    t_max = _number(sec, "t_max", "evolution")
    steps = _integer(sec, "steps", "evolution")
    if t_max <= 0.0:
        raise ConfigError("evolution: 't_max' must be positive")
    if steps < 1:
        raise ConfigError("evolution: 'steps' must be at least 1")
    return np.linspace(0.0, t_max, steps + 1)


def parse_scenario(cfg: dict) -> ScenarioConfig:
    """Validate a raw scenario dictionary into model objects."""
    network, degenerate = _parse_network(_section(cfg, "network"))
    reservoir = _parse_reservoir(_section(cfg, "reservoir"))
    state, rs = _parse_state(_section(cfg, "state", required=False), network.n)
    times = _parse_times(_section(cfg, "evolution", required=False))

    osec = _section(cfg, "oracle", required=False) or {}
    enabled = osec.get("enabled", False)
    if not isinstance(enabled, bool):
        raise ConfigError("oracle: 'enabled' must be true or false")
    cutoff = osec.get("cutoff")
    if cutoff is not None and (isinstance(cutoff, bool) or not isinstance(cutoff, int) or cutoff < 1):
        raise ConfigError("oracle: 'cutoff' must be a positive integer")
    threshold = _number(osec, "threshold", "oracle", default=_DEFAULT_THRESHOLD)
    if threshold <= 0.0:
        raise ConfigError("oracle: 'threshold' must be positive")

    outsec = _section(cfg, "output", required=False) or {}
    svg = outsec.get("svg", False)
    if not isinstance(svg, bool):
        raise ConfigError("output: 'svg' must be true or false")

    return ScenarioConfig(
        network=network,
        degenerate=degenerate,
        reservoir=reservoir,
        state=state,
        rs=rs,
        times=times,
        oracle_enabled=enabled,
        oracle_cutoff=cutoff,
        oracle_threshold=float(threshold),
        svg=svg,
    )
