"""
Voronoi grouping: each BMAV belongs to the AMAV whose position is nearest
to the BMAV's belief mean.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Sequence

import numpy as np

from src.logic.errors import InvalidArgumentError
from src.logic.estimation import Belief
from src.logic.geometry import Vec2

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupAssignment:
    """
    AMAV index -> BMAV indices it serves for one command interval.

    An AMAV whose Voronoi cell holds no BMAV serves the whole swarm; only that
    AMAV's set may overlap with the others.
    """

    groups: Dict[int, FrozenSet[int]]
    epoch_start: float = 0.0
    fallback: FrozenSet[int] = field(default_factory=frozenset)

    def members(self, amav: int) -> List[int]:
        return sorted(self.groups.get(amav, frozenset()))

    def owner_of(self, bmav: int) -> int:
        """Voronoi owner of a BMAV, ignoring fallback AMAVs."""
        for amav in sorted(self.groups):
            if amav not in self.fallback and bmav in self.groups[amav]:
                return amav
        raise KeyError(bmav)


def nearest_amav(amav_positions: np.ndarray, point: Vec2) -> int:
    """Index of the nearest seed; np.argmin keeps the lowest index on ties."""
    d2 = (amav_positions[:, 0] - point.x) ** 2 + (amav_positions[:, 1] - point.y) ** 2
    return int(np.argmin(d2))


def assign_groups(
    amav_positions: Sequence[Vec2],
    bmav_beliefs: Sequence[Belief],
    epoch_start: float = 0.0,
) -> GroupAssignment:
    """
    Partition the BMAVs among the AMAVs by Voronoi point location.

    Args:
        amav_positions: Current AMAV positions (the Voronoi seeds)
        bmav_beliefs: BMAV beliefs; only the means are used
        epoch_start: Simulation time the grouping becomes valid

    Returns:
        GroupAssignment covering every BMAV
    """
    if not amav_positions:
        raise InvalidArgumentError("grouping needs at least one AMAV")
    if not bmav_beliefs:
        raise InvalidArgumentError("grouping needs at least one BMAV")

    seeds = np.array([[p.x, p.y] for p in amav_positions], dtype=float)
    cells: Dict[int, set] = {j: set() for j in range(len(amav_positions))}
    for i, belief in enumerate(bmav_beliefs):
        cells[nearest_amav(seeds, belief.mean)].add(i)

    everyone = frozenset(range(len(bmav_beliefs)))
    groups: Dict[int, FrozenSet[int]] = {}
    empty = []
    for j, members in cells.items():
        if members:
            groups[j] = frozenset(members)
        else:
            groups[j] = everyone
            empty.append(j)
    if empty:
        logger.debug(f"AMAVs {empty} have empty cells and serve all {len(everyone)} BMAVs")
    return GroupAssignment(groups, epoch_start, frozenset(empty))


def assign_all(n_amav: int, n_bmav: int, epoch_start: float = 0.0) -> GroupAssignment:
    """Every AMAV serves every BMAV (grouping switched off)."""
    everyone = frozenset(range(n_bmav))
    return GroupAssignment({j: everyone for j in range(n_amav)}, epoch_start)
