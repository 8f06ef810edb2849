"""Plain-text instance files.

One ``key: value`` pair per line, ``#`` comments, repeatable keys for
obstacles, goals, landmarks, and explicit prior configurations.  Example::

    domain: grid
    width: 4
    height: 1
    start: 0,0
    goal: 2,0
    goal: 3,0
    prior: uniform

Cells are ``x,y``; landmark lines read ``landmark: 2,2 -> 5,5; 7,0``
(observer cell, then the goal cells it reports on).  Explicit priors list
``config: 5,5 + 7,0 = 0.25`` lines.  The charging domain uses ``time``
lines (``time: 5 = 1.25`` for a candidate departure time and its weight)
and a single ``prices`` line instead of grid geometry.
"""

from __future__ import annotations

import hashlib
import io as _io
from typing import Dict, List, Tuple, Union

from ..errors import InvalidInstance
from ..model import GusspModel
from .ev import EvParams, build_ev
from .grid import Cell, GridParams, build_grid
from .priors import PriorSpec
from .rover import RoverParams, build_rover
from .search_rescue import SearchRescueParams, build_search_rescue

Params = Union[GridParams, RoverParams, SearchRescueParams, EvParams]

_DOMAIN_NAMES = {
    GridParams: "grid",
    RoverParams: "rover",
    SearchRescueParams: "search",
    EvParams: "ev",
}


def _parse_cell(text: str) -> Cell:
    try:
        x, y = text.split(",")
        return (int(x), int(y))
    except ValueError as e:
        raise InvalidInstance(f"bad cell {text!r}, expected x,y") from e


def _parse_lines(text: str) -> List[Tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise InvalidInstance(f"line {lineno}: expected 'key: value', got {raw!r}")
        key, value = line.split(":", 1)
        pairs.append((key.strip().lower(), value.strip()))
    return pairs


def parse_instance(text: str) -> Params:
    pairs = _parse_lines(text)
    fields: Dict[str, str] = {}
    repeated: Dict[str, List[str]] = {"obstacle": [], "goal": [], "landmark": [],
                                      "config": [], "time": []}
    for key, value in pairs:
        if key in repeated:
            repeated[key].append(value)
        elif key in fields:
            raise InvalidInstance(f"duplicate key {key!r}")
        else:
            fields[key] = value

    domain = fields.pop("domain", None)
    if domain is None:
        raise InvalidInstance("missing 'domain' line")
    if domain == "ev":
        return _parse_ev(fields, repeated)
    if domain in ("grid", "rover", "search"):
        return _parse_spatial(domain, fields, repeated)
    raise InvalidInstance(f"unknown domain {domain!r}")


def _parse_prior(domain: str, fields: Dict[str, str],
                 repeated: Dict[str, List[str]]) -> PriorSpec:
    spec = fields.pop("prior", "uniform")
    parts = spec.split()
    kind = parts[0]
    if kind == "uniform":
        return PriorSpec()
    if kind == "bernoulli":
        return PriorSpec(kind="bernoulli", marginals=tuple(float(p) for p in parts[1:]))
    if kind == "explicit":
        configs = []
        for line in repeated["config"]:
            if "=" not in line:
                raise InvalidInstance(f"config line {line!r} needs '= weight'")
            labels_text, weight = line.rsplit("=", 1)
            labels = tuple(
                _parse_cell(c.strip()) for c in labels_text.split("+")
            )
            configs.append((labels, float(weight)))
        if not configs:
            raise InvalidInstance("explicit prior without config lines")
        return PriorSpec(kind="explicit", configs=tuple(configs))
    raise InvalidInstance(f"unknown prior kind {kind!r}")


def _parse_landmarks(repeated: Dict[str, List[str]]):
    out = []
    for line in repeated["landmark"]:
        if "->" not in line:
            raise InvalidInstance(f"landmark line {line!r} needs '-> vicinity'")
        where, vicinity = line.split("->", 1)
        cells = tuple(_parse_cell(c.strip()) for c in vicinity.split(";"))
        out.append((_parse_cell(where.strip()), cells))
    return tuple(out)


def _parse_spatial(domain: str, fields: Dict[str, str],
                   repeated: Dict[str, List[str]]) -> Params:
    try:
        width = int(fields.pop("width"))
        height = int(fields.pop("height"))
        start = _parse_cell(fields.pop("start"))
    except KeyError as e:
        raise InvalidInstance(f"missing required key {e.args[0]!r}") from e
    goals = tuple(_parse_cell(g) for g in repeated["goal"])
    if not goals:
        raise InvalidInstance("at least one 'goal' line is required")
    obstacles = frozenset(_parse_cell(o) for o in repeated["obstacle"])
    landmarks = _parse_landmarks(repeated)
    prior = _parse_prior(domain, fields, repeated)

    def popf(key: str, default: float) -> float:
        return float(fields.pop(key, default))

    if domain == "grid":
        params = GridParams(
            width=width, height=height, start=start, potential_goals=goals,
            obstacles=obstacles, landmarks=landmarks,
            move_success=popf("move_success", 1.0),
            step_cost=popf("step_cost", 1.0),
            prior=prior,
        )
    elif domain == "rover":
        params = RoverParams(
            width=width, height=height, start=start, potential_goals=goals,
            obstacles=obstacles, landmarks=landmarks,
            move_success=popf("move_success", 0.8),
            move_cost=popf("move_cost", 1.0),
            sample_cost_confirmed=popf("sample_cost_confirmed", 2.0),
            sample_cost_blind=popf("sample_cost_blind", 10.0),
            prior=prior,
        )
    else:
        params = SearchRescueParams(
            width=width, height=height, start=start, candidate_cells=goals,
            n_victims=int(fields.pop("victims", 1)),
            obstacles=obstacles, landmarks=landmarks,
            move_success=popf("move_success", 1.0),
            move_cost=popf("move_cost", 1.0),
            save_cost=popf("save_cost", 2.0),
            prior=prior,
        )
    if fields:
        raise InvalidInstance(f"unknown keys for {domain}: {sorted(fields)}")
    return params


def _parse_ev(fields: Dict[str, str], repeated: Dict[str, List[str]]) -> EvParams:
    times: List[int] = []
    weights: List[float] = []
    for line in repeated["time"]:
        if "=" in line:
            t, w = line.split("=", 1)
            times.append(int(t))
            weights.append(float(w))
        else:
            times.append(int(line))
            weights.append(1.0)
    if not times:
        raise InvalidInstance("charging instances need 'time' lines")
    try:
        prices = tuple(float(p) for p in fields.pop("prices").split())
    except KeyError as e:
        raise InvalidInstance("missing required key 'prices'") from e
    params = EvParams(
        times=tuple(times),
        time_weights=tuple(weights),
        prices=prices,
        charge_max=int(fields.pop("charge_max", 4)),
        charge_start=int(fields.pop("charge_start", 0)),
        target_charge=int(fields.pop("target_charge", 4)),
        penalty=float(fields.pop("penalty", 10.0)),
    )
    if fields:
        raise InvalidInstance(f"unknown keys for ev: {sorted(fields)}")
    return params


def serialize_instance(params: Params) -> str:
    out = _io.StringIO()

    def emit(key: str, value) -> None:
        out.write(f"{key}: {value}\n")

    def fmt_cell(c: Cell) -> str:
        return f"{c[0]},{c[1]}"

    emit("domain", _DOMAIN_NAMES[type(params)])
    if isinstance(params, EvParams):
        for t, w in zip(params.times, params.time_weights):
            emit("time", f"{t} = {w!r}")
        emit("prices", " ".join(repr(p) for p in params.prices))
        emit("charge_max", params.charge_max)
        emit("charge_start", params.charge_start)
        emit("target_charge", params.target_charge)
        emit("penalty", repr(params.penalty))
        return out.getvalue()

    emit("width", params.width)
    emit("height", params.height)
    emit("start", fmt_cell(params.start))
    goals = (params.candidate_cells if isinstance(params, SearchRescueParams)
             else params.potential_goals)
    for g in goals:
        emit("goal", fmt_cell(g))
    for o in sorted(params.obstacles):
        emit("obstacle", fmt_cell(o))
    for lm, vic in params.landmarks:
        emit("landmark", f"{fmt_cell(lm)} -> {'; '.join(fmt_cell(c) for c in vic)}")
    prior = params.prior
    if prior.kind == "uniform":
        emit("prior", "uniform")
    elif prior.kind == "bernoulli":
        emit("prior", "bernoulli " + " ".join(repr(p) for p in prior.marginals))
    else:
        emit("prior", "explicit")
        for labels, w in prior.configs:
            emit("config", " + ".join(fmt_cell(c) for c in labels) + f" = {w!r}")
    if isinstance(params, GridParams):
        emit("move_success", repr(params.move_success))
        emit("step_cost", repr(params.step_cost))
    elif isinstance(params, RoverParams):
        emit("move_success", repr(params.move_success))
        emit("move_cost", repr(params.move_cost))
        emit("sample_cost_confirmed", repr(params.sample_cost_confirmed))
        emit("sample_cost_blind", repr(params.sample_cost_blind))
    else:
        emit("victims", params.n_victims)
        emit("move_success", repr(params.move_success))
        emit("move_cost", repr(params.move_cost))
        emit("save_cost", repr(params.save_cost))
    return out.getvalue()


def build_model(params: Params) -> GusspModel:
    if isinstance(params, GridParams):
        return build_grid(params)
    if isinstance(params, RoverParams):
        return build_rover(params)
    if isinstance(params, SearchRescueParams):
        return build_search_rescue(params)
    if isinstance(params, EvParams):
        return build_ev(params)
    raise InvalidInstance(f"unknown parameter type {type(params).__name__}")


def load_instance(path: str) -> Tuple[Params, GusspModel]:
    with open(path, "r", encoding="utf-8") as fh:
        params = parse_instance(fh.read())
    return params, build_model(params)


def save_instance(params: Params, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(params))


def instance_digest(params: Params) -> str:
    """Short stable fingerprint of an instance, for report provenance."""
    return hashlib.sha256(serialize_instance(params).encode()).hexdigest()[:12]
