"""SSP solvers: value iteration, LAO*, and depth-labeled LRTDP (FLARES).

All solvers share the same conventions: values live in a :class:`ValueTable`
keyed by compiled-state id, goal states are pinned at zero, and ties between
equal-valued actions always resolve to the action earliest in the model's
action order.  Any object exposing ``start_id``, ``actions``,
``successors(i, a)``, ``cost(i, a)``, ``is_goal(i)`` and ``state(i)`` can be
solved; the compiled problem and the determinization's single-target
problems both qualify.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

from .compiler import Reachable, enumerate_reachable
from .errors import NonConvergence
from .model import Action
from .rng import derive_seed, sample_row

Heuristic = Callable[[int], float]


@dataclass
class ValueTable:
    """State values with an admissible default for untouched states."""

    epsilon: float = 1e-6
    default: Optional[Heuristic] = None
    values: Dict[int, float] = field(default_factory=dict)
    greedy: Dict[int, Action] = field(default_factory=dict)
    expanded: Set[int] = field(default_factory=set)
    depth_solved: Set[int] = field(default_factory=set)

    def value(self, i: int) -> float:
        v = self.values.get(i)
        if v is not None:
            return v
        if self.default is not None:
            return self.default(i)
        return 0.0


@dataclass
class Policy:
    """Greedy action map over compiled-state ids."""

    actions: Dict[int, Action]

    def act(self, i: int) -> Action:
        return self.actions[i]

    def get(self, i: int) -> Optional[Action]:
        return self.actions.get(i)

    def __len__(self) -> int:
        return len(self.actions)


def bellman_backup(ssp, table: ValueTable, i: int) -> Tuple[float, Optional[Action], float]:
    """One-step lookahead at state ``i``.

    Returns ``(new_value, greedy_action, residual)`` without mutating the
    table.  Goal states back up to zero with no action.
    """
    if ssp.is_goal(i):
        return 0.0, None, 0.0
    best = math.inf
    best_a: Optional[Action] = None
    for a in ssp.actions:
        q = ssp.cost(i, a)
        for j, p in ssp.successors(i, a):
            if ssp.is_goal(j):
                continue
            q += p * table.value(j)
            if q >= best:
                break
        if q < best:
            best = q
            best_a = a
    return best, best_a, abs(best - table.value(i))


def _apply_backup(ssp, table: ValueTable, i: int) -> float:
    v, a, res = bellman_backup(ssp, table, i)
    table.values[i] = v
    if a is not None:
        table.greedy[i] = a
    return res


@dataclass
class VIResult:
    table: ValueTable
    policy: Policy
    sweeps: int
    reachable: Reachable


def value_iteration(
    ssp,
    *,
    epsilon: float = 1e-6,
    max_sweeps: int = 100_000,
    init: Optional[Heuristic] = None,
    reachable: Optional[Reachable] = None,
    backend: str = "auto",
    on_sweep: Optional[Callable[[int, float, object], None]] = None,
) -> VIResult:
    """Synchronous value iteration over the enumerated reachable set.

    Sweeps are Jacobi-style, so with an admissible ``init`` the value of
    every state is nondecreasing across sweeps.  ``on_sweep(sweep, residual,
    values)`` is invoked after each sweep (``values`` is read-only).  Raises
    :class:`NonConvergence` if the residual does not drop below ``epsilon``
    within ``max_sweeps``.
    """
    if reachable is None:
        reachable = enumerate_reachable(ssp)
    if backend == "auto":
        backend = "numpy"
    if backend == "numpy":
        values, sweeps = _vi_numpy(ssp, reachable, epsilon, max_sweeps, init, on_sweep)
    elif backend == "python":
        values, sweeps = _vi_python(ssp, reachable, epsilon, max_sweeps, init, on_sweep)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    table = ValueTable(epsilon=epsilon, values=values)
    policy: Dict[int, Action] = {}
    for i in reachable.ids:
        if ssp.is_goal(i):
            continue
        _, a, _ = bellman_backup(ssp, table, i)
        if a is not None:
            policy[i] = a
            table.greedy[i] = a
    return VIResult(table=table, policy=Policy(policy), sweeps=sweeps, reachable=reachable)


def _vi_numpy(ssp, reachable, epsilon, max_sweeps, init, on_sweep):
    import numpy as np
    from scipy import sparse

    ids = reachable.ids
    n = len(ids)
    row_of = {i: r for r, i in enumerate(ids)}
    goal = np.zeros(n, dtype=bool)
    for r, i in enumerate(ids):
        goal[r] = ssp.is_goal(i)

    mats = []
    costs = []
    for a in ssp.actions:
        data: List[float] = []
        rows: List[int] = []
        cols: List[int] = []
        c = np.zeros(n)
        for r, i in enumerate(ids):
            if goal[r]:
                continue  # cost 0, no outgoing mass: value pinned at 0
            c[r] = ssp.cost(i, a)
            for j, p in ssp.successors(i, a):
                jr = row_of[j]
                if goal[jr]:
                    continue
                rows.append(r)
                cols.append(jr)
                data.append(p)
        mats.append(sparse.csr_matrix((data, (rows, cols)), shape=(n, n)))
        costs.append(c)

    v = np.zeros(n)
    if init is not None:
        for r, i in enumerate(ids):
            if not goal[r]:
                v[r] = init(i)
    for sweep in range(1, max_sweeps + 1):
        q = np.full(n, np.inf)
        for c, m in zip(costs, mats):
            np.minimum(q, c + m.dot(v), out=q)
        q[goal] = 0.0
        residual = float(np.max(np.abs(q - v))) if n else 0.0
        v = q
        if on_sweep is not None:
            on_sweep(sweep, residual, v)
        if residual < epsilon:
            return {i: float(v[r]) for r, i in enumerate(ids)}, sweep
    raise NonConvergence(f"value iteration: residual above {epsilon} after {max_sweeps} sweeps")


def _vi_python(ssp, reachable, epsilon, max_sweeps, init, on_sweep):
    ids = [i for i in reachable.ids]
    goal = {i for i in ids if ssp.is_goal(i)}
    v: Dict[int, float] = {}
    for i in ids:
        v[i] = 0.0 if i in goal else (init(i) if init is not None else 0.0)
    compiled = {
        i: [
            (ssp.cost(i, a), [(j, p) for j, p in ssp.successors(i, a) if j not in goal])
            for a in ssp.actions
        ]
        for i in ids
        if i not in goal
    }
    for sweep in range(1, max_sweeps + 1):
        residual = 0.0
        nv = dict(v)
        for i, rows in compiled.items():
            best = math.inf
            for c, succ in rows:
                q = c
                for j, p in succ:
                    q += p * v[j]
                if q < best:
                    best = q
            nv[i] = best
            d = abs(best - v[i])
            if d > residual:
                residual = d
        v = nv
        if on_sweep is not None:
            on_sweep(sweep, residual, v)
        if residual < epsilon:
            return v, sweep
    raise NonConvergence(f"value iteration: residual above {epsilon} after {max_sweeps} sweeps")


@dataclass
class LaoResult:
    table: ValueTable
    policy: Policy
    expanded: int


def lao_star(
    ssp,
    heuristic: Optional[Heuristic] = None,
    *,
    epsilon: float = 1e-6,
    start: Optional[int] = None,
    table: Optional[ValueTable] = None,
    max_rounds: int = 1_000_000,
) -> LaoResult:
    """Heuristic-guided expansion of the best partial solution graph.

    Repeatedly traces the greedy subgraph from the start, expands its
    unexpanded fringe, and runs value iteration over the traced envelope
    until the greedy graph is closed and its residual is below ``epsilon``.
    With an admissible heuristic the start value matches full value
    iteration.  Passing an existing ``table`` resumes from earlier work
    (used by the replanning executors to share effort across solves).
    """
    if table is None:
        table = ValueTable(epsilon=epsilon, default=heuristic)
    elif heuristic is not None and table.default is None:
        table.default = heuristic
    root = ssp.start_id if start is None else start
    expanded = table.expanded

    def trace() -> Tuple[List[int], List[int]]:
        graph: List[int] = []
        fringe: List[int] = []
        seen = {root}
        stack = [root]
        while stack:
            i = stack.pop()
            if ssp.is_goal(i):
                continue
            if i not in expanded:
                fringe.append(i)
                continue
            graph.append(i)
            _, a, _ = bellman_backup(ssp, table, i)
            if a is None:
                continue
            for j, _p in ssp.successors(i, a):
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return graph, fringe

    def converge(envelope: List[int], sweep_limit: int) -> None:
        # full tolerance is only needed once the greedy graph is closed;
        # between expansions a few sweeps keep the bounds tight enough
        for _sweep in range(sweep_limit):
            residual = 0.0
            for i in reversed(envelope):
                res = _apply_backup(ssp, table, i)
                if res > residual:
                    residual = res
            if residual < epsilon:
                return
        if sweep_limit >= max_rounds:
            raise NonConvergence("lao*: envelope value iteration did not converge")

    for _ in range(max_rounds):
        graph, fringe = trace()
        if not graph and not fringe:
            return LaoResult(table=table, policy=Policy({}), expanded=len(expanded))
        if fringe:
            for f in fringe:
                expanded.add(f)
                _apply_backup(ssp, table, f)
            converge(graph + fringe, sweep_limit=3)
            continue
        # greedy graph is closed: converge it, then confirm it stayed closed
        # and below tolerance (convergence can shift the greedy policy)
        converge(graph, sweep_limit=max_rounds)
        graph2, fringe2 = trace()
        if fringe2:
            continue
        policy: Dict[int, Action] = {}
        stable = True
        for i in graph2:
            _, a, res = bellman_backup(ssp, table, i)
            if res >= epsilon:
                stable = False
                break
            policy[i] = a
            table.greedy[i] = a
        if stable:
            return LaoResult(table=table, policy=Policy(policy), expanded=len(expanded))
    raise NonConvergence(f"lao*: no closed solution graph after {max_rounds} rounds")


@dataclass
class FlaresResult:
    table: ValueTable
    policy: Policy
    trials: int
    exhausted: bool  # trial budget ran out before the start state was labeled


def flares(
    ssp,
    heuristic: Optional[Heuristic] = None,
    *,
    horizon: Optional[float] = 1,
    epsilon: float = 1e-3,
    max_trials: int = 100_000,
    seed: int = 0,
    max_trial_steps: int = 10_000,
    start: Optional[int] = None,
    table: Optional[ValueTable] = None,
) -> FlaresResult:
    """Trial-based search with depth-limited solved labeling.

    Runs greedy trials from the start, backing up visited states, and labels
    a state solved once every state within ``horizon`` greedy steps of it
    has residual below ``epsilon``.  ``horizon=None`` (or ``math.inf``)
    checks the full greedy envelope, which makes the algorithm equivalent to
    labeled RTDP and the returned values optimal at the start state.  The
    trial budget is soft: exhausting it returns the best-effort table with
    ``exhausted=True``.

    ``start`` and ``table`` allow re-solving from a mid-execution state
    while keeping earlier values and solved labels, which is how the
    planner is meant to be deployed: whenever execution reaches a state the
    last solve never labeled, run more trials rooted there.
    """
    t = math.inf if horizon is None else float(horizon)
    if table is None:
        table = ValueTable(epsilon=epsilon, default=heuristic)
    rng = random.Random(derive_seed("flares", seed))
    labeled = table.depth_solved
    root = ssp.start_id if start is None else start

    def solved(i: int) -> bool:
        return i in labeled or ssp.is_goal(i)

    def residual_of(i: int) -> float:
        v, _, _ = bellman_backup(ssp, table, i)
        return abs(v - table.value(i))

    def check_depth_solved(i: int) -> bool:
        ok = True
        closed: List[int] = []
        seen = {i}
        queue: List[Tuple[int, int]] = [(i, 0)]
        while queue:
            j, d = queue.pop()
            if solved(j):
                continue
            closed.append(j)
            if residual_of(j) > epsilon:
                ok = False
            if d < t:
                _, a, _ = bellman_backup(ssp, table, j)
                for j2, _p in ssp.successors(j, a):
                    if j2 not in seen:
                        seen.add(j2)
                        queue.append((j2, d + 1))
        if ok:
            labeled.update(closed)
        else:
            for j in reversed(closed):
                _apply_backup(ssp, table, j)
        return ok

    trials = 0
    while not solved(root) and trials < max_trials:
        trials += 1
        visited: List[int] = []
        i = root
        steps = 0
        while not solved(i) and steps < max_trial_steps:
            visited.append(i)
            _apply_backup(ssp, table, i)
            a = table.greedy[i]
            i = sample_row(list(ssp.successors(i, a)), rng)
            steps += 1
        while visited:
            j = visited.pop()
            if not check_depth_solved(j):
                break

    policy = Policy(dict(table.greedy))
    return FlaresResult(
        table=table, policy=policy, trials=trials, exhausted=not solved(root)
    )


def greedy_action(ssp, table: ValueTable, i: int) -> Optional[Action]:
    """Greedy action at ``i`` under the current table (fallback for partial policies)."""
    _, a, _ = bellman_backup(ssp, table, i)
    return a
