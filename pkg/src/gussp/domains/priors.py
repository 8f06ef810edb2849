"""Serializable prior specifications shared by the domain builders."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Optional, Sequence, Tuple

from ..errors import InvalidInstance
from ..model import GoalPrior

# an explicit entry: (tuple of goal labels forming the configuration, weight)
ExplicitEntry = Tuple[Tuple[Hashable, ...], float]


@dataclass(frozen=True)
class PriorSpec:
    """Domain-file representation of a goal prior.

    ``kind`` is ``uniform``, ``bernoulli`` (needs ``marginals``) or
    ``explicit`` (needs ``configs`` as label-tuples with weights).
    """

    kind: str = "uniform"
    marginals: Optional[Tuple[float, ...]] = None
    configs: Optional[Tuple[ExplicitEntry, ...]] = None

    def build(self, potential_goals: Sequence[Hashable]) -> GoalPrior:
        n = len(potential_goals)
        index = {g: i for i, g in enumerate(potential_goals)}
        if self.kind == "uniform":
            return GoalPrior.uniform(n)
        if self.kind == "bernoulli":
            if self.marginals is None or len(self.marginals) != n:
                raise InvalidInstance(
                    "bernoulli prior needs one marginal per potential goal"
                )
            return GoalPrior.bernoulli(self.marginals)
        if self.kind == "explicit":
            if not self.configs:
                raise InvalidInstance("explicit prior has no configurations")
            weights = {}
            for labels, w in self.configs:
                mask = 0
                for g in labels:
                    if g not in index:
                        raise InvalidInstance(
                            f"prior configuration references unknown goal {g!r}"
                        )
                    mask |= 1 << index[g]
                weights[mask] = weights.get(mask, 0.0) + w
            return GoalPrior.explicit(n, weights)
        raise InvalidInstance(f"unknown prior kind {self.kind!r}")
