"""Electric-vehicle charging against an uncertain departure time.

The vehicle sits at a charger from time 0 and will be needed at exactly one
of several candidate departure times; reaching a candidate time reveals
whether the trip starts now.  Charging costs the current tariff, idling and
discharging are free, and departing below the target charge incurs a
penalty per missing unit.  State is ``(t, c)``: time step and charge level.

Unlike the spatial domains the potential goals are time labels rather than
base states, and action costs may be zero because every step advances time,
so the process terminates structurally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

from ..errors import InvalidInstance
from ..model import GusspModel
from ..rng import make_rng
from .priors import PriorSpec

EvState = Tuple[int, int]

CHARGE = "charge"
DISCHARGE = "discharge"
IDLE = "idle"
ACTIONS = (CHARGE, DISCHARGE, IDLE)


@dataclass(frozen=True)
class EvParams:
    times: Tuple[int, ...]            # candidate departure times, ascending
    time_weights: Tuple[float, ...]   # prior weight of each candidate
    prices: Tuple[float, ...]         # tariff per unit charged at step t
    charge_max: int = 4
    charge_start: int = 0
    target_charge: int = 4
    penalty: float = 10.0

    @property
    def horizon(self) -> int:
        return self.times[-1]


def build_ev(params: EvParams) -> GusspModel:
    times = params.times
    if not times or list(times) != sorted(set(times)):
        raise InvalidInstance("departure times must be distinct and ascending")
    if times[0] < 1:
        raise InvalidInstance("departure times start at 1; time 0 is the present")
    if len(params.time_weights) != len(times):
        raise InvalidInstance("one prior weight per departure time is required")
    horizon = params.horizon
    if len(params.prices) < horizon:
        raise InvalidInstance(f"need a tariff for each of the {horizon} steps")
    if any(p < 0 for p in params.prices):
        raise InvalidInstance("tariffs must be nonnegative")
    if not 0 <= params.charge_start <= params.charge_max:
        raise InvalidInstance("starting charge outside battery range")
    if params.charge_max < 1 or params.target_charge < 0 or params.penalty < 0:
        raise InvalidInstance("battery and penalty parameters must be nonnegative")

    cmax = params.charge_max
    states = [(t, c) for t in range(horizon + 1) for c in range(cmax + 1)]
    time_index = {t: i for i, t in enumerate(times)}

    def transition(s: EvState, a: str) -> Sequence[Tuple[EvState, float]]:
        t, c = s
        if t >= horizon:
            return ((s, 1.0),)
        if a == CHARGE:
            return (((t + 1, min(c + 1, cmax)), 1.0),)
        if a == DISCHARGE:
            return (((t + 1, max(c - 1, 0)), 1.0),)
        return (((t + 1, c), 1.0),)

    def cost(s: EvState, a: str) -> float:
        t, c = s
        if t >= horizon:
            return 0.0
        if a == CHARGE and c < cmax:
            return params.prices[t]
        return 0.0

    # exactly one departure time is true
    prior = PriorSpec(
        kind="explicit",
        configs=tuple(((t,), w) for t, w in zip(times, params.time_weights)),
    ).build(times)

    return GusspModel(
        base_states=states,
        actions=ACTIONS,
        transition=transition,
        cost=cost,
        start_state=(0, params.charge_start),
        potential_goals=times,
        prior=prior,
        goal_membership=lambda s: time_index.get(s[0]),
        terminal_cost=lambda s: params.penalty * max(0, params.target_charge - s[1]),
        base_terminal=lambda s: s[0] >= horizon,
        allow_zero_costs=True,
    )


def synthesize_ev_params(
    seed: int,
    *,
    n_times: int = 3,
    horizon: int = 8,
    charge_max: int = 4,
) -> EvParams:
    """Random but reproducible charging scenario."""
    if not 1 <= n_times <= horizon - 1:
        raise InvalidInstance("need room for the candidate times before the horizon")
    rng = make_rng("ev", seed)
    times = tuple(sorted(rng.sample(range(2, horizon), n_times - 1)) + [horizon])
    weights = tuple(round(rng.uniform(0.5, 2.0), 3) for _ in times)
    peak_start = rng.randint(1, max(1, horizon - 3))
    prices = tuple(
        round(rng.uniform(4.0, 6.0), 2)
        if peak_start <= t < peak_start + 3
        else round(rng.uniform(0.5, 1.5), 2)
        for t in range(horizon)
    )
    return EvParams(
        times=times,
        time_weights=weights,
        prices=prices,
        charge_max=charge_max,
        charge_start=rng.randint(0, charge_max // 2),
        target_charge=rng.randint(charge_max - 1, charge_max),
        penalty=float(rng.randint(8, 12)),
    )
