"""Scenario files: JSON documents describing one experiment.

Top-level sections (all optional except ``observation``)::

    observation  {kind, noise_var, signal_var | theta | groups, H0, H1, init}
    region       {shape, X_L | target_fraction, priors}
    channel      {kind, gain, power, p}
    noise        {sigma2, interferer}
    detector     {eta, Z ("auto" or number), N}
    energy       {rule ("constant" | "power"), value | exponent}
    sweep        {variable ("N" | "X_L" | "Pe_target"), grid | start/stop/step, N_grid}
    schemes      [scheme names]
    mc           {trials, seed, workers}

Unknown keys anywhere are rejected.  ``resolve`` fills defaults, calibrates
X_L when a target fraction is given and fixes Z, so the returned document is
a complete record of what was run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .channel import EQUAL, ON_OFF, RAYLEIGH, ChannelModel, NoiseSpec, choose_Z
from .markov import STATIONARY, MarkovField
from .model import (DC_IN_AWGN, GAUSSIAN_VARIANCE, MARKOV_BINARY, ONE_SIDED, TWO_SIDED,
                    ObservationModel, TransmissionRegion, calibrate_region)
from .sim import SCHEMES, EnergyRule, Scenario


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario file."""


_SECTIONS = {
    "name": None,
    "description": None,
    "observation": {"kind", "noise_var", "signal_var", "theta", "groups", "H0", "H1", "init"},
    "region": {"shape", "X_L", "target_fraction", "priors"},
    "channel": {"kind", "gain", "power", "p"},
    "noise": {"sigma2", "interferer"},
    "detector": {"eta", "Z", "N"},
    "energy": {"rule", "value", "exponent"},
    "sweep": {"variable", "grid", "start", "stop", "step", "N_grid"},
    "schemes": None,
    "mc": {"trials", "seed", "workers"},
}
_CHAIN_KEYS = {"alpha", "beta"}


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(extra)}")


def _num(obj, key, where, default=None, positive=False, nonneg=False):
    val = obj.get(key, default)
    if val is None:
        raise ScenarioError(f"{where}.{key} is required")
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"{where}.{key} must be a number")
    val = float(val)
    if not math.isfinite(val) and not (key == "X_L" and val == -math.inf):
        raise ScenarioError(f"{where}.{key} must be finite")
    if positive and not val > 0:
        raise ScenarioError(f"{where}.{key} must be positive")
    if nonneg and val < 0:
        raise ScenarioError(f"{where}.{key} must be nonnegative")
    return val


def _int(obj, key, where, default=None, minimum=1):
    val = obj.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int) or val < minimum:
        raise ScenarioError(f"{where}.{key} must be an integer >= {minimum}")
    return val


def expand_grid(spec: Dict[str, Any], where: str) -> List[float]:
    """Explicit ``grid`` list, or inclusive start/stop/step."""
    if "grid" in spec:
        if any(k in spec for k in ("start", "stop", "step")):
            raise ScenarioError(f"{where}: give either grid or start/stop/step")
        grid = spec["grid"]
        if not isinstance(grid, list) or not grid:
            raise ScenarioError(f"{where}.grid must be a nonempty list")
        return [_num({"v": g}, "v", f"{where}.grid") for g in grid]
    start = _num(spec, "start", where)
    stop = _num(spec, "stop", where)
    step = _num(spec, "step", where, positive=True)
    if stop < start:
        raise ScenarioError(f"{where}: stop must be >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


@dataclass
class ResolvedScenario:
    """A validated scenario: the simulator object plus run settings."""

    document: Dict[str, Any]
    scenario: Scenario
    sweep_variable: Optional[str]
    grid: List[float]
    N_grid: List[int]
    schemes: List[str]
    trials: int
    seed: int
    workers: int

    def at(self, N: int) -> Scenario:
        return replace(self.scenario, N=int(N))


def load(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _observation(doc):
    obs = doc["observation"]
    _check_keys(obs, _SECTIONS["observation"], "observation")
    kind = obs.get("kind")
    if kind == MARKOV_BINARY:
        chains = []
        for h in ("H0", "H1"):
            c = obs.get(h)
            _check_keys(c, _CHAIN_KEYS, f"observation.{h}")
            chains.append((_num(c, "alpha", f"observation.{h}"), _num(c, "beta", f"observation.{h}")))
        for k in ("noise_var", "signal_var", "theta", "groups"):
            if k in obs:
                raise ScenarioError(f"observation.{k} does not apply to a Markov field")
        init = obs.get("init", STATIONARY)
        try:
            field = MarkovField.from_params(*chains[0], *chains[1], init=init)
            field.profile()
        except ValueError as exc:
            raise ScenarioError(f"observation: {exc}") from exc
        obs_out = {"kind": kind, "H0": dict(zip(("alpha", "beta"), chains[0])),
                   "H1": dict(zip(("alpha", "beta"), chains[1])), "init": init}
        return None, field, obs_out

    if kind not in (DC_IN_AWGN, GAUSSIAN_VARIANCE):
        raise ScenarioError(f"observation.kind must be one of {DC_IN_AWGN}, {GAUSSIAN_VARIANCE}, {MARKOV_BINARY}")
    for k in ("H0", "H1", "init"):
        if k in obs:
            raise ScenarioError(f"observation.{k} only applies to {MARKOV_BINARY}")
    noise_var = _num(obs, "noise_var", "observation", default=1.0, positive=True)
    param = "theta" if kind == DC_IN_AWGN else "signal_var"
    other = "signal_var" if kind == DC_IN_AWGN else "theta"
    if other in obs:
        raise ScenarioError(f"observation.{other} does not apply to {kind}")
    if "groups" in obs:
        if param in obs:
            raise ScenarioError(f"observation: give either {param} or groups")
        raw = obs["groups"]
        if not isinstance(raw, list) or not raw:
            raise ScenarioError("observation.groups must be a nonempty list")
        groups = []
        for i, g in enumerate(raw):
            where = f"observation.groups[{i}]"
            _check_keys(g, {param, "weight"}, where)
            groups.append((_num(g, param, where), _num(g, "weight", where, default=1.0, positive=True)))
    else:
        groups = [(_num(obs, param, "observation"), 1.0)]
    try:
        build = ObservationModel.dc if kind == DC_IN_AWGN else ObservationModel.gaussian_variance
        models = tuple((build(v, noise_var), w) for v, w in groups)
    except ValueError as exc:
        raise ScenarioError(f"observation: {exc}") from exc
    obs_out = {"kind": kind, "noise_var": noise_var,
               "groups": [{param: v, "weight": w} for v, w in groups]}
    return models, None, obs_out


def _region(doc, groups, priors_default):
    reg = doc.get("region")
    if reg is None:
        raise ScenarioError("region is required for Gaussian observations")
    _check_keys(reg, _SECTIONS["region"], "region")
    shape = reg.get("shape", TWO_SIDED)
    if shape not in (ONE_SIDED, TWO_SIDED):
        raise ScenarioError(f"region.shape must be {ONE_SIDED} or {TWO_SIDED}")
    priors = reg.get("priors", list(priors_default))
    if (not isinstance(priors, list) or len(priors) != 2
            or any(isinstance(p, bool) or not isinstance(p, (int, float)) or p < 0 for p in priors)
            or not math.isclose(sum(priors), 1.0, abs_tol=1e-12)):
        raise ScenarioError("region.priors must be two nonnegative numbers summing to 1")
    if ("X_L" in reg) == ("target_fraction" in reg):
        raise ScenarioError("region: give exactly one of X_L and target_fraction")
    out = {"shape": shape, "priors": [float(p) for p in priors]}
    if "X_L" in reg:
        region = TransmissionRegion(shape, X_L=_num(reg, "X_L", "region"))
    else:
        target = _num(reg, "target_fraction", "region")
        try:
            region = calibrate_region(list(groups), tuple(priors), target, shape)
        except ValueError as exc:
            raise ScenarioError(f"region: {exc}") from exc
        out["target_fraction"] = target
    out["X_L"] = float(region.X_L)
    return region, out


def _channel(doc):
    ch = doc.get("channel", {"kind": EQUAL})
    _check_keys(ch, _SECTIONS["channel"], "channel")
    kind = ch.get("kind", EQUAL)
    allowed = {EQUAL: {"kind", "gain"}, RAYLEIGH: {"kind", "power"}, ON_OFF: {"kind", "gain", "p"}}
    if kind not in allowed:
        raise ScenarioError(f"channel.kind must be one of {', '.join(allowed)}")
    _check_keys(ch, allowed[kind], f"channel ({kind})")
    try:
        if kind == EQUAL:
            model = ChannelModel.equal(_num(ch, "gain", "channel", 1.0))
            out = {"kind": kind, "gain": model.gain}
        elif kind == RAYLEIGH:
            model = ChannelModel.rayleigh(_num(ch, "power", "channel", 1.0))
            out = {"kind": kind, "power": model.power}
        else:
            model = ChannelModel.on_off(_num(ch, "p", "channel"), _num(ch, "gain", "channel", 1.0))
            out = {"kind": kind, "p": model.p, "gain": model.gain}
    except ValueError as exc:
        raise ScenarioError(f"channel: {exc}") from exc
    return model, out


def resolve(doc: Dict[str, Any], seed: Optional[int] = None, trials: Optional[int] = None) -> ResolvedScenario:
    """Validate a scenario document and build the simulator objects.

    ``seed`` and ``trials`` override the ``mc`` section.
    """
    _check_keys(doc, _SECTIONS, "scenario")
    if "observation" not in doc:
        raise ScenarioError("observation section is required")
    out: Dict[str, Any] = {}
    if "name" in doc:
        out["name"] = str(doc["name"])
    if "description" in doc:
        out["description"] = str(doc["description"])

    det = doc.get("detector", {})
    _check_keys(det, _SECTIONS["detector"], "detector")
    eta = _num(det, "eta", "detector", 1.0, positive=True)
    N = _int(det, "N", "detector", 100)

    groups, field, out["observation"] = _observation(doc)
    region = None
    if groups is not None:
        region, out["region"] = _region(doc, [(m, w) for m, w in groups], (eta / (1 + eta), 1 / (1 + eta)))
    elif "region" in doc:
        raise ScenarioError("region does not apply to a Markov field (transmission happens in state 1)")

    channel, out["channel"] = _channel(doc)

    nz = doc.get("noise", {})
    _check_keys(nz, _SECTIONS["noise"], "noise")
    try:
        noise = NoiseSpec(_num(nz, "sigma2", "noise", 0.0, nonneg=True),
                          _num(nz, "interferer", "noise", 0.0, nonneg=True))
    except ValueError as exc:
        raise ScenarioError(f"noise: {exc}") from exc
    out["noise"] = {"sigma2": noise.sigma2, "interferer": noise.interferer}

    Z = det.get("Z", "auto")
    if Z == "auto":
        Z = choose_Z(channel)
    else:
        Z = _num(det, "Z", "detector", positive=True)
    out["detector"] = {"eta": eta, "Z": Z, "N": N}

    en = doc.get("energy", {})
    _check_keys(en, _SECTIONS["energy"], "energy")
    rule = en.get("rule", "constant")
    if rule == "constant":
        if "exponent" in en:
            raise ScenarioError("energy.exponent only applies to the power rule")
        energy = EnergyRule("constant", _num(en, "value", "energy", 1.0, positive=True))
        out["energy"] = {"rule": rule, "value": energy.value}
    elif rule == "power":
        if "value" in en:
            raise ScenarioError("energy.value only applies to the constant rule")
        energy = EnergyRule("power", _num(en, "exponent", "energy"))
        out["energy"] = {"rule": rule, "exponent": energy.value}
    else:
        raise ScenarioError("energy.rule must be constant or power")

    schemes = doc.get("schemes", ["seema"])
    if not isinstance(schemes, list) or not schemes:
        raise ScenarioError("schemes must be a nonempty list")
    bad = [s for s in schemes if s not in SCHEMES]
    if bad:
        raise ScenarioError(f"unknown scheme(s) {', '.join(map(str, bad))}; choose from {', '.join(SCHEMES)}")
    schemes = list(dict.fromkeys(schemes))
    out["schemes"] = schemes

    variable, grid, N_grid = None, [], [N]
    if "sweep" in doc:
        sw = doc["sweep"]
        _check_keys(sw, _SECTIONS["sweep"], "sweep")
        variable = sw.get("variable", "N")
        if variable not in ("N", "X_L", "Pe_target"):
            raise ScenarioError("sweep.variable must be N, X_L or Pe_target")
        grid = expand_grid(sw, "sweep")
        if variable == "N":
            if any(g < 1 or g != int(g) for g in grid):
                raise ScenarioError("sweep over N needs positive integers")
            N_grid = sorted({int(g) for g in grid})
            grid = [float(n) for n in N_grid]
        elif variable == "Pe_target":
            if not all(0 < g < 1 for g in grid):
                raise ScenarioError("Pe targets must lie in (0, 1)")
            n_spec = sw.get("N_grid")
            if not isinstance(n_spec, dict):
                raise ScenarioError("sweep.N_grid ({grid | start/stop/step}) is required for Pe_target")
            _check_keys(n_spec, {"grid", "start", "stop", "step"}, "sweep.N_grid")
            N_grid = sorted({int(g) for g in expand_grid(n_spec, "sweep.N_grid")})
            if N_grid[0] < 1:
                raise ScenarioError("sweep.N_grid needs positive integers")
        elif "N_grid" in sw:
            raise ScenarioError("sweep.N_grid only applies to Pe_target sweeps")
        out["sweep"] = {"variable": variable, "grid": grid}
        if variable == "Pe_target":
            out["sweep"]["N_grid"] = N_grid

    mc = doc.get("mc", {})
    _check_keys(mc, _SECTIONS["mc"], "mc")
    trials = trials if trials is not None else mc.get("trials", 10000)
    seed = seed if seed is not None else mc.get("seed", 0)
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 0:
        raise ScenarioError("trials must be a nonnegative integer")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ScenarioError("seed must be an unsigned 64-bit integer")
    workers = _int(mc, "workers", "mc", 1)
    out["mc"] = {"trials": trials, "seed": seed, "workers": workers}

    try:
        scenario = Scenario(groups=groups or (), region=region, field=field, channel=channel, noise=noise,
                            N=N_grid[0], eta=eta, energy=energy, scheme=schemes[0], Z=Z)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    return ResolvedScenario(out, scenario, variable, grid, N_grid, schemes, trials, seed, workers)


def load_scenario(path: Union[str, Path], seed: Optional[int] = None,
                  trials: Optional[int] = None) -> ResolvedScenario:
    return resolve(load(path), seed=seed, trials=trials)


def bundled(name: str) -> Path:
    """Path of a scenario file shipped with the package."""
    path = Path(__file__).with_name("scenarios") / f"{name}.json"
    if not path.exists():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return path
