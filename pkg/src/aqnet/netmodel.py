"""Network model for aggregated quantum routes.

Nodes are connected by paths made of links; every link carries one or more
channels with a capacity bound. A set of parallel paths between the same
endpoints forms an aggregated route over which one logical transmission is
split. This module holds the structural types and the four QoS metrics
(bandwidth, delay, jitter and the loss slot filled in by the fidelity
engine).

Units: lengths in km, times in seconds, probabilities dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ChannelSpec",
    "LinkSpec",
    "PathSpec",
    "AggregatedRoute",
    "QosReport",
    "ParameterError",
    "transmission_probability",
    "path_delay",
    "path_bandwidth",
    "aggregate_bandwidth",
    "jitter",
    "dwell_times",
    "qos_report",
]


class ParameterError(ValueError):
    """A physical parameter is outside its admissible domain."""


@dataclass(frozen=True)
class ChannelSpec:
    """One transmission medium slot on a link.

    ``capacity`` bounds the product of the dimensions of the qudits the
    channel can carry per time slot (e.g. capacity 9 fits one dimension-9
    qudit or two qutrits).
    """

    capacity: int = 9

    def __post_init__(self):
        if self.capacity < 2:
            raise ParameterError(f"channel capacity must be >= 2, got {self.capacity}")


@dataclass(frozen=True)
class LinkSpec:
    """A physical or logical connection between two nodes."""

    length_km: float
    channels: tuple[ChannelSpec, ...]

    def __post_init__(self):
        if self.length_km < 0:
            raise ParameterError(f"link length must be >= 0, got {self.length_km}")
        if not self.channels:
            raise ParameterError("a link must carry at least one channel")

    @property
    def capacity(self) -> int:
        """Aggregate capacity of all channels on the link."""
        return sum(c.capacity for c in self.channels)


@dataclass(frozen=True)
class PathSpec:
    """A sequence of links from source to receiver.

    The per-qudit survival probability is ``eta * exp(-L / L_att)`` unless
    an explicit ``p_override`` is given, in which case the override wins
    (scenario files may fix p directly) and a warning is logged when both
    are present.
    """

    links: tuple[LinkSpec, ...]
    eta: float = 1.0
    attenuation_length_km: float = 22.0
    light_speed_km_per_s: float = 2.0e5
    congestion_time_s: float = 0.0
    p_override: float | None = None

    def __post_init__(self):
        if not self.links:
            raise ParameterError("a path must contain at least one link")
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"eta must be in [0, 1], got {self.eta}")
        if self.attenuation_length_km <= 0:
            raise ParameterError("attenuation length must be positive")
        if self.light_speed_km_per_s <= 0:
            raise ParameterError("light speed must be positive")
        if self.congestion_time_s < 0:
            raise ParameterError("congestion time must be >= 0")
        if self.p_override is not None:
            if not 0.0 <= self.p_override <= 1.0:
                raise ParameterError(f"explicit p must be in [0, 1], got {self.p_override}")

    @property
    def length_km(self) -> float:
        """Total path length: sum of its link lengths."""
        return sum(link.length_km for link in self.links)


@dataclass(frozen=True)
class AggregatedRoute:
    """Parallel paths between one sender/receiver pair, ordered by delay."""

    paths: tuple[PathSpec, ...]

    def __post_init__(self):
        if not self.paths:
            raise ParameterError("an aggregated route needs at least one path")
        ordered = tuple(sorted(self.paths, key=path_delay))
        object.__setattr__(self, "paths", ordered)

    def __len__(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class QosReport:
    """The four QoS metrics of a route for one transmission.

    ``loss`` is the infidelity 1 - F of the received state; it is computed
    by the fidelity engine and only carried here.
    """

    bandwidth_per_slot: int
    delay_s: tuple[float, ...]
    jitter_s: float
    loss: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.loss <= 1.0:
            raise ParameterError(f"loss must be in [0, 1], got {self.loss}")
        if self.jitter_s < 0:
            raise ParameterError("jitter must be >= 0")


def transmission_probability(path: PathSpec) -> float:
    """Per-qudit survival probability eta * exp(-L / L_att), clamped to [0, 1].

    An explicit ``p_override`` wins over the loss parameters; the
    scenario loader warns once when a path carries both.
    """
    if path.p_override is not None:
        return path.p_override
    p = path.eta * math.exp(-path.length_km / path.attenuation_length_km)
    return min(max(p, 0.0), 1.0)


def path_delay(path: PathSpec) -> float:
    """End-to-end delay L / c + t_c in seconds."""
    return path.length_km / path.light_speed_km_per_s + path.congestion_time_s


def path_bandwidth(path: PathSpec) -> int:
    """Capacity of the bottleneck link (per-link capacity = sum over channels)."""
    return min(link.capacity for link in path.links)


def aggregate_bandwidth(route: AggregatedRoute) -> int:
    """Sum of the constituent paths' bandwidths."""
    return sum(path_bandwidth(p) for p in route.paths)


def jitter(arrival_times_s) -> float:
    """Spread (max - min) of a nonempty collection of arrival times."""
    times = list(arrival_times_s)
    if not times:
        raise ParameterError("jitter needs at least one arrival time")
    return max(times) - min(times)


def dwell_times(route: AggregatedRoute) -> tuple[float, ...]:
    """Storage time per path while waiting for the slowest path.

    Returns, aligned with ``route.paths``, the interval each path's qudits
    spend in receiver memory before the last path arrives. Every
    maximal-delay path gets 0.
    """
    delays = [path_delay(p) for p in route.paths]
    tau_max = max(delays)
    return tuple(tau_max - d for d in delays)


def qos_report(route: AggregatedRoute, loss: float = 0.0) -> QosReport:
    """Assemble the QoS report of a route; ``loss`` comes from the fidelity engine."""
    delays = tuple(path_delay(p) for p in route.paths)
    return QosReport(
        bandwidth_per_slot=aggregate_bandwidth(route),
        delay_s=delays,
        jitter_s=max(delays) - min(delays),
        loss=loss,
    )
