"""Grid navigation with uncertain goal locations.

The agent walks a 4-connected grid with optional obstacles and slippery
movement (an unsuccessful move stays put).  Arriving on a potential goal
reveals whether it is a true goal; landmarks reveal the status of a listed
vicinity.  The episode ends on arrival at a confirmed true goal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Sequence, Tuple

from ..errors import InvalidInstance
from ..model import GusspModel
from ..rng import make_rng
from .priors import PriorSpec

Cell = Tuple[int, int]

MOVES: Tuple[Tuple[str, Tuple[int, int]], ...] = (
    ("up", (0, -1)),
    ("down", (0, 1)),
    ("left", (-1, 0)),
    ("right", (1, 0)),
)
ACTIONS = tuple(name for name, _ in MOVES)
_DELTA = dict(MOVES)


@dataclass(frozen=True)
class GridParams:
    width: int
    height: int
    start: Cell
    potential_goals: Tuple[Cell, ...]
    obstacles: FrozenSet[Cell] = frozenset()
    landmarks: Tuple[Tuple[Cell, Tuple[Cell, ...]], ...] = ()
    move_success: float = 1.0
    step_cost: float = 1.0
    prior: PriorSpec = field(default_factory=PriorSpec)


def _free_cells(params: GridParams) -> List[Cell]:
    return [
        (x, y)
        for y in range(params.height)
        for x in range(params.width)
        if (x, y) not in params.obstacles
    ]


def _component_of(start: Cell, free: FrozenSet[Cell]) -> FrozenSet[Cell]:
    seen = {start}
    frontier = deque([start])
    while frontier:
        x, y = frontier.popleft()
        for _, (dx, dy) in MOVES:
            nxt = (x + dx, y + dy)
            if nxt in free and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return frozenset(seen)


def build_grid(params: GridParams) -> GusspModel:
    if params.width < 1 or params.height < 1:
        raise InvalidInstance("grid needs positive dimensions")
    if not 0.0 < params.move_success <= 1.0:
        raise InvalidInstance("move_success must be in (0, 1]")
    if params.step_cost <= 0.0:
        raise InvalidInstance("step cost must be positive")
    free = frozenset(_free_cells(params))

    def require_free(cell: Cell, what: str) -> None:
        x, y = cell
        if not (0 <= x < params.width and 0 <= y < params.height):
            raise InvalidInstance(f"{what} {cell} is outside the grid")
        if cell in params.obstacles:
            raise InvalidInstance(f"{what} {cell} is an obstacle")

    require_free(params.start, "start")
    for g in params.potential_goals:
        require_free(g, "potential goal")
    component = _component_of(params.start, free)
    unreachable = [g for g in params.potential_goals if g not in component]
    if unreachable:
        raise InvalidInstance(f"potential goals {unreachable} are cut off from the start")
    for lm, vicinity in params.landmarks:
        require_free(lm, "landmark")
        if lm not in component:
            raise InvalidInstance(f"landmark {lm} is cut off from the start")

    ms = params.move_success
    states = sorted(free)
    state_set = free

    def transition(s: Cell, a: str) -> Sequence[Tuple[Cell, float]]:
        dx, dy = _DELTA[a]
        nxt = (s[0] + dx, s[1] + dy)
        if nxt not in state_set:
            return ((s, 1.0),)
        if ms >= 1.0:
            return ((nxt, 1.0),)
        return ((nxt, ms), (s, 1.0 - ms))

    def cost(s: Cell, a: str) -> float:
        return params.step_cost

    return GusspModel(
        base_states=states,
        actions=ACTIONS,
        transition=transition,
        cost=cost,
        start_state=params.start,
        potential_goals=params.potential_goals,
        prior=params.prior.build(params.potential_goals),
        landmarks={lm: vic for lm, vic in params.landmarks},
    )


def line4() -> GridParams:
    """Four cells in a row, two uncertain goals on the right end."""
    return GridParams(
        width=4,
        height=1,
        start=(0, 0),
        potential_goals=((2, 0), (3, 0)),
    )


def random_grid(
    seed: int,
    *,
    width: int = 8,
    height: int = 8,
    n_goals: int = 3,
    n_landmarks: int = 0,
    obstacle_density: float = 0.15,
    move_success: float = 0.85,
    prior: PriorSpec = PriorSpec(),
) -> GridParams:
    """Random connected instance: obstacles are sampled first, then the
    start, goals, and landmarks are placed inside one connected component."""
    rng = make_rng("grid", seed)
    cells = [(x, y) for y in range(height) for x in range(width)]
    n_obstacles = int(len(cells) * obstacle_density)
    obstacles = frozenset(rng.sample(cells, n_obstacles))
    free = frozenset(c for c in cells if c not in obstacles)
    if not free:
        raise InvalidInstance("obstacle density leaves no free cell")

    # largest component hosts everything, so connectivity holds by placement
    components: Dict[Cell, FrozenSet[Cell]] = {}
    remaining = set(free)
    while remaining:
        c = next(iter(remaining))
        comp = _component_of(c, free)
        for x in comp:
            components[x] = comp
        remaining -= comp
    best = max(set(components.values()), key=lambda comp: (len(comp), sorted(comp)[0]))
    pool = sorted(best)
    if len(pool) < 1 + n_goals + n_landmarks:
        raise InvalidInstance("not enough connected space for the requested layout")
    picks = rng.sample(pool, 1 + n_goals + n_landmarks)
    start = picks[0]
    goals = tuple(sorted(picks[1:1 + n_goals]))
    landmarks = []
    for lm in picks[1 + n_goals:]:
        vicinity = tuple(sorted(rng.sample(goals, rng.randint(1, min(3, n_goals)))))
        landmarks.append((lm, vicinity))

    return GridParams(
        width=width,
        height=height,
        start=start,
        potential_goals=goals,
        obstacles=obstacles,
        landmarks=tuple(landmarks),
        move_success=move_success,
        prior=prior,
    )
