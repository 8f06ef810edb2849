"""Record types shared by the benchmark harness and the executors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import Action, State


@dataclass(frozen=True)
class TraceRow:
    """One executed step: state and knowledge before acting, then the action,
    cumulative cost already paid, and the observation string at the arrival
    state.  The final row of a trace carries ``action=None`` and total cost."""

    step: int
    state: State
    knowledge: str
    action: Optional[Action]
    cost_so_far: float
    observation: str

    def format(self) -> str:
        act = "-" if self.action is None else str(self.action)
        return (
            f"{self.step}\t{self.state!r}\t{self.knowledge}\t{act}\t"
            f"{self.cost_so_far:.6f}\t{self.observation}"
        )
