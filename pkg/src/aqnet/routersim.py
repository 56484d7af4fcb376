"""Time-slotted simulation of the channel-assignment router.

Users submit requests (destination, payload, optional QoS preference);
the router checks them against channel occupancy, path delays and the
receiver memories' coherence time, then assigns, queues or denies. One
slot is one packet transmission window. Only local synchronization is
assumed: slot indices are per-route counters, not a global clock.

The router is the decision maker; the underlying switch abstraction is
the channel ledger mutated here. Assignments hold their channels for
``1 + ceil(dwell / slot_duration)`` slots; receiver-memory dwell does
not block channels beyond that window.

The simulation core is single threaded and deterministic: identical
schedules replay to identical event logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .assignments import CapacityModel, candidate_splits
from .fidelity import (
    QRS,
    Coding,
    Configuration,
    FidelityParams,
    configuration_fidelity,
)
from .netmodel import AggregatedRoute, ParameterError, path_delay
from .policy import Balanced, Greedy, Regime

__all__ = [
    "UserRequest",
    "RouterEvent",
    "EventKind",
    "DenialReason",
    "RouterState",
    "submit",
    "process_slot",
    "run",
    "event_record",
]


class EventKind(str, Enum):
    REQUESTED = "requested"
    QUEUED = "queued"
    ASSIGNED = "assigned"
    DENIED = "denied"


class DenialReason(str, Enum):
    MALFORMED = "malformed"
    INFEASIBLE = "infeasible"
    COHERENCE = "coherence"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class UserRequest:
    """One user's transmission request."""

    user_id: str
    destination: str
    coding: Coding
    packet_size: int
    regime: Regime = Greedy()
    min_fidelity: float | None = None


@dataclass(frozen=True)
class RouterEvent:
    slot: int
    kind: EventKind
    user_id: str
    configuration: str | None = None
    fidelity: float | None = None
    reason: DenialReason | None = None


def event_record(event: RouterEvent) -> dict:
    """Flat dict form of an event for line-delimited serialization."""
    return {
        "slot": event.slot,
        "kind": event.kind.value,
        "user_id": event.user_id,
        "configuration": event.configuration,
        "fidelity": event.fidelity,
        "reason": event.reason.value if event.reason else None,
    }


@dataclass
class _Reservation:
    start_slot: int
    end_slot: int
    dim_product: int

    def active(self, slot: int) -> bool:
        return self.start_slot <= slot < self.end_slot


class _ChannelLedger:
    """Per-path channels with time-bounded multiplexed reservations."""

    def __init__(self, capacity: CapacityModel):
        self.capacity = capacity
        self.channels: list[list[list[_Reservation]]] = [
            [[] for _ in range(n)] for n in capacity.channels_per_path
        ]

    def _headroom(self, path: int, idx: int, slot: int) -> int:
        # reservations are placed at a nondecreasing clock, so the busiest
        # overlap of a new placement is at its start slot
        used = 1
        for res in self.channels[path][idx]:
            if res.active(slot):
                used *= res.dim_product
        return self.capacity.channel_capacity // used

    def placement(self, counts, dimension: int, slot: int):
        """First-fit plan for per-path qudit counts, or None if it cannot fit."""
        plan = []
        for path, count in enumerate(counts):
            remaining = count
            for idx in range(len(self.channels[path])):
                if remaining == 0:
                    break
                room = self._headroom(path, idx, slot)
                fit = 0
                while fit < remaining and dimension ** (fit + 1) <= room:
                    fit += 1
                if fit:
                    plan.append((path, idx, dimension**fit))
                    remaining -= fit
            if remaining:
                return None
        return plan

    def commit(self, plan, start_slot: int, end_slot: int) -> None:
        for path, idx, dim_product in plan:
            self.channels[path][idx].append(
                _Reservation(start_slot, end_slot, dim_product)
            )

    def usage(self, slot: int) -> tuple[int, ...]:
        """Channels carrying at least one active reservation, per path."""
        return tuple(
            sum(1 for ch in path_channels if any(r.active(slot) for r in ch))
            for path_channels in self.channels
        )


@dataclass
class _Pending:
    request: UserRequest
    age: int = 0
    hopeless_reason: DenialReason | None = None


@dataclass
class RouterState:
    """Mutable router state: route, ledger, queue and event log."""

    route: AggregatedRoute
    capacity: CapacityModel
    receiver_T2_s: float = math.inf
    queue_limit_slots: int = 8
    slot_duration_s: float = 1.0
    classical_latency_slots: int = 0  # hook; zero in this model
    clock: int = 0
    queue: list[_Pending] = field(default_factory=list)
    events: list[RouterEvent] = field(default_factory=list)

    def __post_init__(self):
        if len(self.route.paths) != self.capacity.n_paths:
            raise ParameterError("route and capacity model disagree on path count")
        if self.receiver_T2_s <= 0:
            raise ParameterError("receiver T2 must be positive (or inf)")
        if self.queue_limit_slots < 0:
            raise ParameterError("queue limit must be >= 0")
        self.ledger = _ChannelLedger(self.capacity)

    @property
    def params(self) -> FidelityParams:
        return FidelityParams.from_route(self.route, self.receiver_T2_s)

    def channel_usage(self) -> tuple[int, ...]:
        return self.ledger.usage(self.clock)


def _payload_malformed(req: UserRequest) -> bool:
    if req.packet_size < 1:
        return True
    if isinstance(req.coding, QRS) and req.packet_size != req.coding.n:
        return True
    if req.min_fidelity is not None and not 0.0 <= req.min_fidelity <= 1.0:
        return True
    return False


def _candidates(state: RouterState, req: UserRequest, *, empty: bool):
    """Placeable configurations with their fidelities and plans."""
    ledger = _ChannelLedger(state.capacity) if empty else state.ledger
    params = state.params
    out = []
    for counts in candidate_splits(req.packet_size, state.capacity.n_paths):
        plan = ledger.placement(counts, req.coding.dimension, state.clock)
        if plan is None:
            continue
        config = Configuration(counts, req.coding)
        out.append((config, configuration_fidelity(config, params), plan))
    return out


def _choose(regime: Regime, candidates):
    """Regime preference among one request's feasible configurations."""
    if isinstance(regime, Balanced):
        # Leave as much room as possible for other users, then fidelity.
        return min(candidates, key=lambda c: (len(c[2]), -c[1]))
    # Greedy and (single-request) restricted: best fidelity first.
    return max(candidates, key=lambda c: c[1])


def _config_dwell_s(state: RouterState, config: Configuration) -> float:
    delays = [path_delay(p) for p in state.route.paths]
    used = [d for d, c in zip(delays, config.counts) if c > 0]
    return max(used) - min(used)


def _hopeless_reason(state: RouterState, req: UserRequest) -> DenialReason | None:
    """Denial reason if no future occupancy could satisfy the request."""
    if req.coding.dimension > state.capacity.channel_capacity:
        return DenialReason.INFEASIBLE
    empty = _candidates(state, req, empty=True)
    if not empty:
        return DenialReason.INFEASIBLE
    if req.min_fidelity is None:
        return None
    best = max(f for _, f, _ in empty)
    if best >= req.min_fidelity:
        return None
    ideal = FidelityParams(state.params.p, state.params.dwell_s, math.inf)
    best_ideal = max(
        configuration_fidelity(cfg, ideal) for cfg, _, _ in empty
    )
    if best_ideal >= req.min_fidelity:
        return DenialReason.COHERENCE
    return DenialReason.INFEASIBLE


def _log(state: RouterState, event: RouterEvent) -> RouterEvent:
    state.events.append(event)
    return event


def submit(state: RouterState, req: UserRequest) -> list[RouterEvent]:
    """Accept a request into the queue; deny outright hopeless ones."""
    events = [
        _log(state, RouterEvent(state.clock, EventKind.REQUESTED, req.user_id))
    ]
    if _payload_malformed(req):
        events.append(
            _log(state, RouterEvent(state.clock, EventKind.DENIED, req.user_id,
                                    reason=DenialReason.MALFORMED))
        )
        return events
    reason = _hopeless_reason(state, req)
    if reason is not None:
        events.append(
            _log(state, RouterEvent(state.clock, EventKind.DENIED, req.user_id,
                                    reason=reason))
        )
        return events
    state.queue.append(_Pending(req))
    return events


def process_slot(state: RouterState) -> list[RouterEvent]:
    """One processing pass over the queue, in age (FIFO) order."""
    events: list[RouterEvent] = []
    still_pending: list[_Pending] = []
    for pending in state.queue:
        req = pending.request
        candidates = _candidates(state, req, empty=False)
        if req.min_fidelity is not None:
            candidates = [c for c in candidates if c[1] >= req.min_fidelity]
        if candidates:
            config, fidelity, plan = _choose(req.regime, candidates)
            dwell = _config_dwell_s(state, config)
            duration = 1 + math.ceil(dwell / state.slot_duration_s)
            state.ledger.commit(plan, state.clock, state.clock + duration)
            events.append(
                _log(state, RouterEvent(state.clock, EventKind.ASSIGNED, req.user_id,
                                        configuration=config.label,
                                        fidelity=fidelity))
            )
            continue
        pending.age += 1
        if pending.age > state.queue_limit_slots:
            events.append(
                _log(state, RouterEvent(state.clock, EventKind.DENIED, req.user_id,
                                        reason=DenialReason.TIMEOUT))
            )
            continue
        events.append(
            _log(state, RouterEvent(state.clock, EventKind.QUEUED, req.user_id))
        )
        still_pending.append(pending)
    state.queue = still_pending
    return events


def run(state: RouterState, schedule, slots: int) -> list[RouterEvent]:
    """Deterministic replay of a (slot, request) schedule.

    ``slots`` is the submission horizon; processing continues past it
    until the queue drains, so every request reaches a terminal event.
    """
    if slots < 1:
        raise ParameterError(f"slots must be >= 1, got {slots}")
    by_slot: dict[int, list[UserRequest]] = {}
    for slot, req in schedule:
        if slot < 0:
            raise ParameterError(f"schedule slots must be >= 0, got {slot}")
        by_slot.setdefault(int(slot), []).append(req)
    horizon = max([slots] + [s + 1 for s in by_slot]) if by_slot else slots

    slot = 0
    while slot < horizon or state.queue:
        state.clock = slot
        for req in by_slot.get(slot, []):
            submit(state, req)
        process_slot(state)
        slot += 1
    return list(state.events)
