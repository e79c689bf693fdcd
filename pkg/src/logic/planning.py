"""
Non-myopic AMAV scheduling.

Each AMAV grows a depth-delta search tree over discretized unicycle controls.
Nodes carry the AMAV pose and the predicted beliefs of the AMAV's group; at
every level the tree is pruned with trajectory sigma-crossing and
epsilon-algebraic redundancy, and the leaf with the lowest summed
uncertainty decides the control sequence.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.logic.errors import (
    DegenerateGeometryError,
    InvalidArgumentError,
    NumericalDegeneracyError,
)
from src.logic.estimation import (
    Belief,
    expected_correction,
    log_det_uncertainty,
    predict,
    uncertainty,
)
from src.logic.geometry import (
    AmavControl,
    Arena,
    BmavCommand,
    FovParams,
    Pose,
    amav_step,
    in_fov,
)
from src.logic.noise import MotionNoiseParams, ObservationNoiseParams

logger = logging.getLogger(__name__)

HOVER_CONTROL = AmavControl(0.0, 0.0)
HEADING_MATCH_TOL = 1e-12

CovarianceSet = Union[np.ndarray, Sequence[np.ndarray]]

INDICATORS: Dict[str, Callable[[Belief], float]] = {
    "trace": uncertainty,
    "logdet": log_det_uncertainty,
}


@dataclass(frozen=True)
class ControlSetParams:
    """Motion primitives: every speed is paired with every turn rate."""

    speeds: Tuple[float, ...] = (0.0, 1.0, 3.0)
    turn_rates: Tuple[float, ...] = (0.0, 1.0, -1.0, 3.0, -3.0)

    def __post_init__(self):
        if not self.speeds or not self.turn_rates:
            raise InvalidArgumentError("control set needs at least one speed and one turn rate")


@dataclass(frozen=True)
class PruneParams:
    """epsilon (m^2) for algebraic redundancy, sigma (m) for trajectory crossing."""

    epsilon: float = 1.0
    sigma: float = 10.0
    psd_tolerance: float = 1e-9

    def __post_init__(self):
        if self.epsilon < 0 or self.sigma < 0:
            raise InvalidArgumentError("epsilon and sigma must be non-negative")


@dataclass(frozen=True)
class SearchNode:
    pose: Pose
    beliefs: Tuple[Belief, ...]
    depth: int
    controls_from_root: Tuple[AmavControl, ...]
    score: float

    def covariances(self) -> List[np.ndarray]:
        return [b.cov for b in self.beliefs]


@dataclass(frozen=True)
class Plan:
    """delta controls for one AMAV and the score the planner expects at the end."""

    controls: Tuple[AmavControl, ...]
    predicted_terminal_score: float
    reserved_per_level: Tuple[int, ...] = field(default=())
    nodes_expanded: int = 0

    @classmethod
    def hover(cls, delta: int) -> "Plan":
        return cls(tuple([HOVER_CONTROL] * delta), 0.0, tuple([1] * delta), 0)


def enumerate_controls(params: ControlSetParams) -> List[AmavControl]:
    """Cartesian product speeds x turn_rates, speed-major."""
    return [AmavControl(u, w) for u in params.speeds for w in params.turn_rates]


def _score(beliefs: Sequence[Belief], indicator: str) -> float:
    fn = INDICATORS[indicator]
    return float(sum(fn(b) for b in beliefs))


def _observe_expected(
    pose: Pose, prior: Belief, fov: FovParams, onoise: ObservationNoiseParams
) -> Belief:
    if not in_fov(pose, prior.mean, fov):
        return prior
    try:
        return expected_correction(prior, pose, onoise)
    except (DegenerateGeometryError, NumericalDegeneracyError) as e:
        logger.debug(f"planner skipped a correction at {pose}: {e}")
        return prior


def _predict_group(
    beliefs: Sequence[Belief],
    group_commands: Sequence[BmavCommand],
    dt: float,
    mnoise: MotionNoiseParams,
) -> Tuple[Belief, ...]:
    return tuple(predict(b, v, dt, mnoise) for b, v in zip(beliefs, group_commands))


def _child(
    n: SearchNode,
    predicted: Tuple[Belief, ...],
    c: AmavControl,
    dt: float,
    fov: FovParams,
    onoise: ObservationNoiseParams,
    indicator: str,
) -> SearchNode:
    pose = amav_step(n.pose, c, dt)
    beliefs = tuple(_observe_expected(pose, b, fov, onoise) for b in predicted)
    return SearchNode(
        pose=pose,
        beliefs=beliefs,
        depth=n.depth + 1,
        controls_from_root=n.controls_from_root + (c,),
        score=_score(beliefs, indicator),
    )


def expand_node(
    n: SearchNode,
    c: AmavControl,
    group_commands: Sequence[BmavCommand],
    fov: FovParams,
    mnoise: MotionNoiseParams,
    onoise: ObservationNoiseParams,
    dt: float = 1.0,
    indicator: str = "trace",
) -> SearchNode:
    """
    Create the child reached by applying control c for one step.

    Every group belief is predicted with its BMAV's command; beliefs whose
    predicted mean falls in the child's FoV get the expected covariance
    contraction (mean unchanged).

    Args:
        n: Parent node
        c: Control applied on the edge
        group_commands: Command of each BMAV in n.beliefs, same order
        fov: AMAV sensor sector
        mnoise: Motion noise model used for prediction
        onoise: Observation noise model used for the expected correction
        dt: Edge duration in seconds
        indicator: Name of the per-belief uncertainty indicator

    Returns:
        The child node
    """
    if len(group_commands) != len(n.beliefs):
        raise InvalidArgumentError(
            f"{len(group_commands)} commands for a group of {len(n.beliefs)} beliefs"
        )
    predicted = _predict_group(n.beliefs, group_commands, dt, mnoise)
    return _child(n, predicted, c, dt, fov, onoise, indicator)


def _check_symmetric(m: np.ndarray, tol: float) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"covariance must be square, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=max(tol, 1e-12)):
        raise InvalidArgumentError(f"covariance is not symmetric: {m.tolist()}")


def _min_eig(m: np.ndarray) -> float:
    if m.shape == (2, 2):
        half_tr = 0.5 * (m[0, 0] + m[1, 1])
        half_diff = 0.5 * (m[0, 0] - m[1, 1])
        return float(half_tr - math.hypot(half_diff, m[0, 1]))
    return float(np.linalg.eigvalsh(m)[0])


def _as_blocks(covs: CovarianceSet) -> List[np.ndarray]:
    if isinstance(covs, np.ndarray) and covs.ndim == 2:
        return [covs]
    return [np.asarray(c, dtype=float) for c in covs]


def _dominates(
    candidate: List[np.ndarray], reference: List[np.ndarray], epsilon: float, tol: float
) -> bool:
    if len(candidate) != len(reference):
        raise InvalidArgumentError("covariance sets differ in size")
    for cand, ref in zip(candidate, reference):
        if cand.shape != ref.shape:
            raise InvalidArgumentError(f"block shapes differ: {cand.shape} vs {ref.shape}")
        diff = cand + epsilon * np.eye(cand.shape[0]) - ref
        if _min_eig(diff) < -tol:
            return False
    return True


def is_eps_redundant(
    candidate: CovarianceSet,
    reserved: Sequence[CovarianceSet],
    epsilon: float,
    psd_tolerance: float = 1e-9,
) -> bool:
    """
    epsilon-algebraic redundancy of a node's covariances against reserved nodes.

    A single reserved node k with candidate + epsilon*I >= Sigma_k is taken as the
    witness (all convex weight on k). A block-diagonal covariance may be given
    as its list of per-BMAV blocks; the block test is exact for block-diagonal
    matrices.

    Args:
        candidate: Full covariance matrix or list of per-BMAV 2x2 blocks
        reserved: Covariances of the reserved nodes, same layout as candidate
        epsilon: Slack added to the candidate's diagonal (m^2)
        psd_tolerance: Eigenvalues above -psd_tolerance count as non-negative

    Returns:
        True iff some reserved covariance is dominated by candidate + epsilon*I
    """
    cand_blocks = _as_blocks(candidate)
    for block in cand_blocks:
        _check_symmetric(block, psd_tolerance)
    for ref in reserved:
        ref_blocks = _as_blocks(ref)
        for block in ref_blocks:
            _check_symmetric(block, psd_tolerance)
        if _dominates(cand_blocks, ref_blocks, epsilon, psd_tolerance):
            return True
    return False


def sigma_crosses(a: Pose, b: Pose, sigma: float) -> bool:
    """True iff the two positions are within sigma meters (inclusive); heading ignored."""
    return a.position.distance_to(b.position) <= sigma


def _crossing_for_pruning(a: Pose, b: Pose, sigma: float) -> bool:
    # With zero spatial tolerance only exact duplicates may be pruned, so the
    # headings must agree as well.
    if not sigma_crosses(a, b, sigma):
        return False
    if sigma > 0.0:
        return True
    return abs(a.heading - b.heading) <= HEADING_MATCH_TOL


def prune_level(children: Sequence[SearchNode], prune: PruneParams) -> List[SearchNode]:
    """
    Keep the informative nodes of one tree level.

    Nodes are visited in ascending score (ties by generation order). The first
    is always kept; a later node is dropped only when it sigma-crosses a kept
    node whose covariances it epsilon-redundantly dominates.
    """
    order = sorted(range(len(children)), key=lambda k: (children[k].score, k))
    kept: List[SearchNode] = []
    for k in order:
        node = children[k]
        crossing = [r for r in kept if _crossing_for_pruning(r.pose, node.pose, prune.sigma)]
        # symmetric by construction
        if crossing and any(
            _dominates(node.covariances(), r.covariances(), prune.epsilon, prune.psd_tolerance)
            for r in crossing
        ):
            continue
        kept.append(node)
    return kept


def _root(start: Pose, group: Sequence[Belief], indicator: str) -> SearchNode:
    if indicator not in INDICATORS:
        raise InvalidArgumentError(f"unknown indicator {indicator!r}; choose from {sorted(INDICATORS)}")
    beliefs = tuple(group)
    return SearchNode(start, beliefs, 0, (), _score(beliefs, indicator))


def _expand_level(
    level: Sequence[SearchNode],
    controls: Sequence[AmavControl],
    group_commands: Sequence[BmavCommand],
    dt: float,
    fov: FovParams,
    mnoise: MotionNoiseParams,
    onoise: ObservationNoiseParams,
    arena: Optional[Arena],
    indicator: str,
) -> List[SearchNode]:
    children: List[SearchNode] = []
    for node in level:
        # the prediction is shared by every sibling
        predicted = _predict_group(node.beliefs, group_commands, dt, mnoise)
        for c in controls:
            children.append(_child(node, predicted, c, dt, fov, onoise, indicator))
    if arena is None:
        return children
    inside = [ch for ch in children if arena.contains(ch.pose.position)]
    if not inside:
        logger.warning("every candidate control leaves the arena; keeping unconstrained children")
        return children
    return inside


def plan(
    start: Pose,
    group: Sequence[Belief],
    group_commands: Sequence[BmavCommand],
    delta: int,
    controls: ControlSetParams,
    prune: PruneParams,
    fov: FovParams,
    mnoise: MotionNoiseParams,
    onoise: ObservationNoiseParams,
    arena: Optional[Arena] = None,
    dt: float = 1.0,
    indicator: str = "trace",
) -> Plan:
    """
    Schedule one AMAV for the next delta steps.

    Args:
        start: Current AMAV pose
        group: Current beliefs of the BMAVs assigned to this AMAV
        group_commands: Their commands, held constant over the horizon
        delta: Horizon in steps
        controls: Motion primitive set
        prune: Pruning thresholds
        fov: Sensor sector
        mnoise: Motion noise model used for predictions
        onoise: Observation noise model used for expected corrections
        arena: Child poses outside it are discarded, if given
        dt: Step length in seconds
        indicator: "trace" (default) or "logdet"

    Returns:
        Plan whose controls lead to the minimum-score surviving leaf
    """
    if delta < 1:
        raise InvalidArgumentError(f"delta must be at least 1, got {delta}")
    if len(group) != len(group_commands):
        raise InvalidArgumentError(f"{len(group_commands)} commands for a group of {len(group)}")
    if not group:
        return Plan.hover(delta)

    control_list = enumerate_controls(controls)
    level = [_root(start, group, indicator)]
    reserved: List[int] = []
    expanded = 0
    for _ in range(delta):
        children = _expand_level(
            level, control_list, group_commands, dt, fov, mnoise, onoise, arena, indicator
        )
        expanded += len(level) * len(control_list)
        level = prune_level(children, prune)
        reserved.append(len(level))

    best = min(level, key=lambda node: node.score)
    logger.debug(f"planned {delta} steps from {start}: score {best.score:.4g}, reserved {reserved}")
    return Plan(best.controls_from_root, best.score, tuple(reserved), expanded)


def plan_exhaustive(
    start: Pose,
    group: Sequence[Belief],
    group_commands: Sequence[BmavCommand],
    delta: int,
    controls: ControlSetParams,
    fov: FovParams,
    mnoise: MotionNoiseParams,
    onoise: ObservationNoiseParams,
    arena: Optional[Arena] = None,
    dt: float = 1.0,
    indicator: str = "trace",
) -> Plan:
    """Unpruned search over all |U|^delta control sequences; the reference for plan()."""
    if delta < 1:
        raise InvalidArgumentError(f"delta must be at least 1, got {delta}")
    if not group:
        return Plan.hover(delta)

    control_list = enumerate_controls(controls)
    level = [_root(start, group, indicator)]
    counts: List[int] = []
    expanded = 0
    for _ in range(delta):
        level = _expand_level(
            level, control_list, group_commands, dt, fov, mnoise, onoise, arena, indicator
        )
        expanded += len(level)
        counts.append(len(level))
    best = min(level, key=lambda node: node.score)
    return Plan(best.controls_from_root, best.score, tuple(counts), expanded)

