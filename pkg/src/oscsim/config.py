"""Scenario JSON schema: parsing and validation.

System block field names are fixed: {"masses", "stiffness", "x0", "v0",
"forcing", "td_stiffness"}.  Scenario fields: name, pipeline, system (or nls),
horizon, samples, epsilon, regime, output_dir, seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .carleman import NLSSystem
from .errors import ConfigInvalid, OscsimError
from .oscillator import (
    ForcingSpec,
    NonlinearOscillatorSystem,
    OscillatorSystem,
    TimeDependentStiffnessSpec,
    build_incidence,
)

PIPELINES = (
    "linear",
    "forced",
    "nonlinear",
    "td-stiffness",
    "td-forced",
    "nls-direct",
    "nls-carleman",
)


@dataclass
class Scenario:
    name: str
    pipeline: str
    horizon: float
    samples: int
    epsilon: float
    regime: str = "small-t"
    seed: int = 42
    output_dir: str = None
    system: OscillatorSystem = None
    forcing: ForcingSpec = None
    td: TimeDependentStiffnessSpec = None
    nonlinear: NonlinearOscillatorSystem = None
    nls: NLSSystem = None
    raw: dict = field(default_factory=dict)

    def t_grid(self):
        return np.linspace(0.0, self.horizon, self.samples)


def _require(cfg, key, kind, where="scenario"):
    if key not in cfg:
        raise ConfigInvalid(f"missing field {where}.{key}")
    value = cfg[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigInvalid(f"field {where}.{key} must be a number")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigInvalid(f"field {where}.{key} must be an integer")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigInvalid(f"field {where}.{key} must be a string")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigInvalid(f"field {where}.{key} must be a list")
        return value
    raise AssertionError(kind)


def _parse_forcing(entries, n):
    """forcing: list of per-mass term lists, each term [amplitude, omega, phase]."""
    if len(entries) != n:
        raise ConfigInvalid("system.forcing must have one entry per mass")
    l = max((len(row) for row in entries), default=1)
    l = max(l, 1)
    amp = np.zeros((n, l))
    freq = np.ones((n, l))
    phase = np.zeros((n, l))
    for i, row in enumerate(entries):
        if not isinstance(row, list):
            raise ConfigInvalid("system.forcing entries must be lists of triples")
        for j, term in enumerate(row):
            if not (isinstance(term, list) and len(term) == 3):
                raise ConfigInvalid(
                    "system.forcing terms must be [amplitude, omega, phase]"
                )
            amp[i, j], freq[i, j], phase[i, j] = term
    return ForcingSpec(amp, freq, phase)


def _parse_td(entries, n):
    """td_stiffness: list of {"i", "j", "const", "terms": [[amp, omega, phase]]}."""
    l = 1
    for e in entries:
        l = max(l, len(e.get("terms", [])))
    const = np.zeros((n, n))
    amp = np.zeros((n, n, l))
    freq = np.ones((n, n, l))
    phase = np.zeros((n, n, l))
    for e in entries:
        if not isinstance(e, dict) or "i" not in e or "j" not in e:
            raise ConfigInvalid("system.td_stiffness entries need 1-based i and j")
        i, j = e["i"] - 1, e["j"] - 1
        if not (0 <= i <= j < n):
            raise ConfigInvalid(f"system.td_stiffness pair ({e['i']},{e['j']}) out of range")
        c = float(e.get("const", 0.0))
        if c != 0.0 and i != j:
            raise ConfigInvalid("system.td_stiffness off-diagonal const must be zero")
        const[i, j] = const[j, i] = c
        for t_idx, term in enumerate(e.get("terms", [])):
            if not (isinstance(term, list) and len(term) == 3):
                raise ConfigInvalid(
                    "system.td_stiffness terms must be [amplitude, omega, phase]"
                )
            a, w, p = term
            amp[i, j, t_idx] = amp[j, i, t_idx] = a
            freq[i, j, t_idx] = freq[j, i, t_idx] = w
            phase[i, j, t_idx] = phase[j, i, t_idx] = p
    try:
        return TimeDependentStiffnessSpec(const, amp, freq, phase)
    except OscsimError as exc:
        raise ConfigInvalid(f"system.td_stiffness invalid: {exc}") from exc


def _parse_complex(block, shape, where):
    if not isinstance(block, dict) or "re" not in block:
        raise ConfigInvalid(f"field {where} must be an object with 're' (and optional 'im')")
    re = np.asarray(block["re"], dtype=float)
    im = np.asarray(block.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != shape or im.shape != shape:
        raise ConfigInvalid(f"field {where} must have shape {shape}")
    return re + 1j * im


def parse_scenario(cfg):
    if not isinstance(cfg, dict):
        raise ConfigInvalid("scenario must be a JSON object")
    name = _require(cfg, "name", str)
    pipeline = _require(cfg, "pipeline", str)
    if pipeline not in PIPELINES:
        raise ConfigInvalid(
            f"field pipeline must be one of {', '.join(PIPELINES)}; got {pipeline!r}"
        )
    horizon = _require(cfg, "horizon", float)
    if horizon <= 0:
        raise ConfigInvalid("field horizon must be positive")
    samples = _require(cfg, "samples", int)
    if samples < 2:
        raise ConfigInvalid("field samples must be >= 2")
    epsilon = _require(cfg, "epsilon", float)
    if epsilon <= 0:
        raise ConfigInvalid("field epsilon must be positive")
    regime = cfg.get("regime", "small-t")
    if regime not in ("small-t", "no-resonance"):
        raise ConfigInvalid("field regime must be 'small-t' or 'no-resonance'")
    seed = cfg.get("seed", 42)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigInvalid("field seed must be an integer")
    scen = Scenario(
        name=name,
        pipeline=pipeline,
        horizon=horizon,
        samples=samples,
        epsilon=epsilon,
        regime=regime,
        seed=seed,
        output_dir=cfg.get("output_dir"),
        raw=cfg,
    )

    needs_system = pipeline in (
        "linear", "forced", "nonlinear", "td-stiffness", "td-forced"
    )
    if needs_system:
        sysblock = cfg.get("system")
        if not isinstance(sysblock, dict):
            raise ConfigInvalid("missing field system")
        masses = np.asarray(_require(sysblock, "masses", list, "system"), dtype=float)
        stiffness = np.asarray(
            _require(sysblock, "stiffness", list, "system"), dtype=float
        )
        x0 = np.asarray(_require(sysblock, "x0", list, "system"), dtype=float)
        v0 = np.asarray(_require(sysblock, "v0", list, "system"), dtype=float)
        try:
            scen.system = OscillatorSystem(masses, stiffness, x0, v0)
        except OscsimError as exc:
            raise ConfigInvalid(f"system block invalid: {exc}") from exc
        n = scen.system.n
        if "forcing" in sysblock:
            scen.forcing = _parse_forcing(
                _require(sysblock, "forcing", list, "system"), n
            )
        if "td_stiffness" in sysblock:
            scen.td = _parse_td(
                _require(sysblock, "td_stiffness", list, "system"), n
            )
        if pipeline == "forced" and scen.forcing is None:
            raise ConfigInvalid("pipeline 'forced' requires system.forcing")
        if pipeline in ("td-stiffness", "td-forced") and scen.td is None:
            raise ConfigInvalid(f"pipeline {pipeline!r} requires system.td_stiffness")
        if pipeline == "td-forced" and scen.forcing is None:
            raise ConfigInvalid("pipeline 'td-forced' requires system.forcing")
        if pipeline == "nonlinear":
            if "k2" not in sysblock:
                raise ConfigInvalid("pipeline 'nonlinear' requires system.k2")
            k2 = np.asarray(sysblock["k2"], dtype=float)
            try:
                scen.nonlinear = NonlinearOscillatorSystem(
                    masses=masses,
                    k1=build_incidence(stiffness),
                    k2=k2,
                    x0=x0,
                    v0=v0,
                    energy=sysblock.get("energy"),
                )
            except OscsimError as exc:
                raise ConfigInvalid(f"system block invalid: {exc}") from exc

    if pipeline in ("nls-direct", "nls-carleman"):
        block = cfg.get("nls")
        if not isinstance(block, dict):
            raise ConfigInvalid("missing field nls")
        if "h1" not in block or "psi0" not in block:
            raise ConfigInvalid("nls block needs h1 and psi0")
        h1_re = np.asarray(block["h1"].get("re", []), dtype=float)
        if h1_re.ndim != 2 or h1_re.shape[0] != h1_re.shape[1]:
            raise ConfigInvalid("nls.h1.re must be a square matrix")
        n = h1_re.shape[0]
        h1 = _parse_complex(block["h1"], (n, n), "nls.h1")
        if "h2" in block:
            h2 = _parse_complex(block["h2"], (n, n * n), "nls.h2")
        else:
            h2 = np.zeros((n, n * n), dtype=complex)
        psi0 = _parse_complex(block["psi0"], (n,), "nls.psi0")
        try:
            scen.nls = NLSSystem(h1=h1, h2=h2, psi0=psi0)
        except OscsimError as exc:
            raise ConfigInvalid(f"nls block invalid: {exc}") from exc
    return scen


def load_scenario(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigInvalid(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    return parse_scenario(cfg)
