"""Range-limited peer network: topology from geometry, one-tick delivery.

Link strength falls off as 1/distance.  Each vehicle admits peers inside
its communication radius (unless a scheduled dropout suppresses the
pair), sorts them by strength, and keeps at most ``c_max``.  Because the
cap is applied per vehicle, admission can be asymmetric: i may keep j
while j's list is already full of closer peers.

Messages are delivered with a one-tick delay against the topology that
existed at send time, so no vehicle ever reads a peer's current-tick
state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .geo import Point3, distance3

__all__ = [
    "DropoutWindow",
    "CommConfig",
    "NeighborLink",
    "CommGraph",
    "ThetaMessage",
    "build_topology",
    "deliver",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DropoutWindow:
    """Suppress the link between ``uav_a`` and ``uav_b`` for t in [start_s, end_s)."""

    start_s: float
    end_s: float
    uav_a: int
    uav_b: int

    def __post_init__(self) -> None:
        if not self.start_s < self.end_s:
            raise ValueError(f"dropout window must have start < end, got [{self.start_s}, {self.end_s})")
        if self.uav_a == self.uav_b:
            raise ValueError(f"dropout window must name two distinct vehicles, got {self.uav_a} twice")

    def suppresses(self, i: int, j: int, now: float) -> bool:
        pair = {self.uav_a, self.uav_b}
        return {i, j} == pair and self.start_s <= now < self.end_s


@dataclass(frozen=True)
class CommConfig:
    """Radio parameters shared by the fleet."""

    r_com: float = 30_000.0
    c_max: int = 2
    gamma_signal: float = 1.0
    dropout_schedule: tuple[DropoutWindow, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dropout_schedule", tuple(self.dropout_schedule))
        if not self.r_com > 0.0:
            raise ValueError(f"r_com must be positive, got {self.r_com}")
        if not self.c_max >= 1:
            raise ValueError(f"c_max must be >= 1, got {self.c_max}")
        if not self.gamma_signal > 0.0:
            raise ValueError(f"gamma_signal must be positive, got {self.gamma_signal}")


@dataclass(frozen=True)
class NeighborLink:
    peer: int
    strength: float


@dataclass(frozen=True)
class CommGraph:
    """Per-tick topology: ``neighbors[i]`` is vehicle i's admitted peer list."""

    tick: int
    neighbors: tuple[tuple[NeighborLink, ...], ...]

    @property
    def n_uavs(self) -> int:
        return len(self.neighbors)


@dataclass(frozen=True)
class ThetaMessage:
    """One vehicle's arrival-time estimate, stamped with its send tick."""

    sender: int
    theta: float
    sent_tick: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and self.theta >= 0.0):
            raise ValueError(f"theta must be finite and >= 0, got {self.theta}")


def build_topology(
    positions: Sequence[Point3],
    config: CommConfig,
    tick: int,
    dt: float = 1.0,
) -> CommGraph:
    """Admit, rank, and cap each vehicle's neighbor list for this tick.

    ``dt`` converts the tick count to seconds for the dropout schedule,
    whose windows are expressed in simulated time.  Pure function of its
    arguments.
    """
    n = len(positions)
    if n < 1:
        raise ValueError("need at least one position")
    now = tick * dt
    neighbors = []
    for i in range(n):
        admitted: list[NeighborLink] = []
        for j in range(n):
            if j == i:
                continue
            d = distance3(positions[i], positions[j])
            if d > config.r_com:
                continue
            if any(w.suppresses(i, j, now) for w in config.dropout_schedule):
                continue
            if d < 1.0:
                log.warning("near-coincident vehicles %d and %d at d=%.3g m; strength diverges", i, j, d)
            strength = config.gamma_signal / d if d > 0.0 else math.inf
            admitted.append(NeighborLink(peer=j, strength=strength))
        admitted.sort(key=lambda link: (-link.strength, link.peer))
        neighbors.append(tuple(admitted[: config.c_max]))
    return CommGraph(tick=tick, neighbors=tuple(neighbors))


def deliver(
    messages: Sequence[ThetaMessage],
    graph_at_send: CommGraph,
) -> dict[int, list[tuple[float, float]]]:
    """Route send-tick messages into next-tick inboxes.

    Vehicle i's inbox lists (link strength, theta) for each of its
    admitted peers that sent a message, ordered by sender id.  Delivery
    follows the receiver's own neighbor list, so asymmetric admission
    yields asymmetric delivery.
    """
    thetas: dict[int, float] = {}
    for msg in messages:
        if msg.sent_tick != graph_at_send.tick:
            raise ValueError(
                f"message from {msg.sender} stamped tick {msg.sent_tick}, graph is tick {graph_at_send.tick}"
            )
        if msg.sender in thetas:
            raise ValueError(f"duplicate message from sender {msg.sender}")
        if not 0 <= msg.sender < graph_at_send.n_uavs:
            raise ValueError(f"unknown sender {msg.sender}")
        thetas[msg.sender] = msg.theta

    inboxes: dict[int, list[tuple[float, float]]] = {}
    for i, links in enumerate(graph_at_send.neighbors):
        by_sender = sorted(links, key=lambda link: link.peer)
        inboxes[i] = [
            (link.strength, thetas[link.peer]) for link in by_sender if link.peer in thetas
        ]
    return inboxes
