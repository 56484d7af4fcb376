"""Enumeration of feasible channel assignments.

A *slot* is one configuration together with the number of users
(degeneracy) sharing its channel footprint. The footprint of a slot is
one channel per qudit and path; when the channel capacity admits m > 1
qudits of the slot's dimension per channel (e.g. two qutrits on a
capacity-9 channel), the slot carries m users' identical packets on the
same channels, so its degeneracy is m. An *assignment row* is a maximal
set of slots: no further configuration of the palette fits the channels
left over.

Rows are generated deterministically: every feasible configuration of
every palette entry (largest first) seeds a row, and the remainder is
filled greedily, preferring to repeat the last added configuration and
falling back to the largest palette entry no larger than the seed's,
in canonical (descending first-path count) order. Duplicate rows are
merged, and the output order is canonical and byte-stable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .fidelity import (
    QRS,
    Coding,
    Configuration,
    Unencoded,
    configuration_needs_memory,
)
from .netmodel import ParameterError

__all__ = [
    "CapacityModel",
    "AssignmentRow",
    "enumerate_unencoded",
    "enumerate_encoded",
    "mark_memory_flags",
    "candidate_splits",
]


@dataclass(frozen=True)
class CapacityModel:
    """Channels per path plus the per-channel capacity bound.

    A channel may multiplex qudits as long as the product of their
    dimensions stays within ``channel_capacity``.
    """

    channels_per_path: tuple[int, ...]
    channel_capacity: int = 9

    def __post_init__(self):
        object.__setattr__(
            self, "channels_per_path", tuple(int(c) for c in self.channels_per_path)
        )
        if not self.channels_per_path or any(c < 0 for c in self.channels_per_path):
            raise ParameterError(
                f"channel counts must be nonnegative: {self.channels_per_path}"
            )
        if sum(self.channels_per_path) == 0:
            raise ParameterError("the capacity model must provide at least one channel")
        if self.channel_capacity < 2:
            raise ParameterError(
                f"channel capacity must be >= 2, got {self.channel_capacity}"
            )

    @property
    def n_paths(self) -> int:
        return len(self.channels_per_path)

    def multiplex(self, dimension: int) -> int:
        """Qudits of a given dimension that fit one channel."""
        if dimension > self.channel_capacity:
            raise ParameterError(
                f"dimension {dimension} exceeds channel capacity {self.channel_capacity}"
            )
        m = 1
        while dimension ** (m + 1) <= self.channel_capacity:
            m += 1
        return m


@dataclass(frozen=True)
class AssignmentRow:
    """One table row: slots with degeneracies, flags, and the user count.

    A slot appears once per channel footprint, so a configuration served
    twice over two separate channel groups shows up as two slots of the
    same configuration (mirroring the assignment columns of the tables).
    """

    slots: tuple[tuple[Configuration, int], ...]
    memory_flags: tuple[bool, ...] = ()

    def __post_init__(self):
        if not self.slots or any(deg < 1 for _, deg in self.slots):
            raise ParameterError("a row needs slots with positive degeneracy")
        if not self.memory_flags:
            object.__setattr__(
                self,
                "memory_flags",
                tuple(configuration_needs_memory(cfg) for cfg, _ in self.slots),
            )
        elif len(self.memory_flags) != len(self.slots):
            raise ParameterError("need one memory flag per slot")

    @property
    def served_users(self) -> int:
        return sum(deg for _, deg in self.slots)

    @property
    def configurations(self) -> tuple[Configuration, ...]:
        return tuple(cfg for cfg, _ in self.slots)

    def channel_usage(self) -> tuple[int, ...]:
        """Channels consumed per path (a slot's footprint is one per qudit)."""
        n_paths = len(self.slots[0][0].counts)
        return tuple(
            sum(cfg.counts[l] for cfg, _ in self.slots) for l in range(n_paths)
        )


def mark_memory_flags(row: AssignmentRow) -> AssignmentRow:
    """Recompute the per-slot decoherence flags of a row."""
    return AssignmentRow(
        slots=row.slots,
        memory_flags=tuple(configuration_needs_memory(cfg) for cfg, _ in row.slots),
    )


def candidate_splits(size: int, n_paths: int) -> list[tuple[int, ...]]:
    """All per-path count vectors summing to ``size``, canonical order.

    Canonical order is descending lexicographic, i.e. first-path-heavy
    splits first.
    """
    if size < 1:
        raise ParameterError(f"size must be >= 1, got {size}")
    splits = []
    for cut in itertools.combinations_with_replacement(range(n_paths), size):
        counts = [0] * n_paths
        for path in cut:
            counts[path] += 1
        splits.append(tuple(counts))
    return sorted(set(splits), reverse=True)


def _dimension(coding: Coding) -> int:
    return coding.dimension


def _configs_for(cap: CapacityModel, coding: Coding, size: int,
                 path_confined: bool) -> list[Configuration]:
    """Feasible configurations of one palette entry, canonical order."""
    cap.multiplex(_dimension(coding))  # raises if the dimension cannot be carried
    configs = []
    for counts in candidate_splits(size, cap.n_paths):
        if any(c > ch for c, ch in zip(counts, cap.channels_per_path)):
            continue
        if path_confined and sum(1 for c in counts if c > 0) > 1:
            continue
        configs.append(Configuration(counts, coding))
    return configs


def _fits(config: Configuration, residual: list[int]) -> bool:
    return all(c <= r for c, r in zip(config.counts, residual))


def _fill_row(cap: CapacityModel, seed: Configuration,
              universe: list[tuple[Configuration, int]]) -> AssignmentRow:
    """Grow a row from a seed until nothing in the universe fits.

    ``universe`` holds (configuration, degeneracy) candidates in fill
    preference order; the most recently added configuration is retried
    first so identical assignments pile up before the palette is scanned.
    """
    residual = list(cap.channels_per_path)
    placed: list[tuple[Configuration, int]] = []

    def place(cfg: Configuration, deg: int) -> None:
        for l, c in enumerate(cfg.counts):
            residual[l] -= c
        placed.append((cfg, deg))

    by_config = {cfg: deg for cfg, deg in universe}
    place(seed, by_config[seed])
    last = seed
    while True:
        if _fits(last, residual):
            place(last, by_config[last])
            continue
        for cfg, deg in universe:
            if _fits(cfg, residual):
                place(cfg, deg)
                last = cfg
                break
        else:
            break

    slots = tuple(sorted(placed, key=_slot_key, reverse=True))
    return AssignmentRow(slots=slots)


def _slot_key(slot: tuple[Configuration, int]):
    cfg, _ = slot
    return (_dimension(cfg.coding), cfg.counts)


def _row_key(row: AssignmentRow):
    return tuple(
        (_dimension(cfg.coding), cfg.counts, deg) for cfg, deg in row.slots
    )


def _enumerate(cap: CapacityModel,
               palette: list[tuple[Coding, int, bool]]) -> list[AssignmentRow]:
    """Shared driver; palette entries are (coding, packet size, confined)."""
    palette = sorted(palette, key=lambda e: _dimension(e[0]), reverse=True)
    rows: dict[tuple, AssignmentRow] = {}
    for idx, (coding, size, confined) in enumerate(palette):
        seeds = _configs_for(cap, coding, size, confined)
        universe = [
            (cfg, cap.multiplex(_dimension(cod)))
            for cod, sz, conf in palette[idx:]
            for cfg in _configs_for(cap, cod, sz, conf)
        ]
        for seed in seeds:
            row = _fill_row(cap, seed, universe)
            rows.setdefault(_row_key(row), row)
    ordered = sorted(rows.values(), key=_row_key, reverse=True)
    return ordered


def enumerate_unencoded(cap: CapacityModel, packet_size: int,
                        dims) -> list[AssignmentRow]:
    """All assignment rows for unencoded packets of ``packet_size`` qudits.

    ``dims`` is the allowed qudit dimension palette. Packets whose
    dimension multiplexes more than one qudit per channel ride shared
    channels and are kept on a single path; packets occupying whole
    channels may split across paths arbitrarily.
    """
    if packet_size < 1:
        raise ParameterError(f"packet size must be >= 1, got {packet_size}")
    if not dims:
        raise ParameterError("the dimension palette must not be empty")
    palette = [
        (Unencoded(d), packet_size, cap.multiplex(d) > 1) for d in sorted(set(dims))
    ]
    return _enumerate(cap, palette)


def enumerate_encoded(cap: CapacityModel, codes) -> list[AssignmentRow]:
    """All assignment rows for QRS codewords with lengths from ``codes``."""
    if not codes:
        raise ParameterError("the code palette must not be empty")
    palette = [(QRS(n), n, False) for n in sorted(set(codes))]
    return _enumerate(cap, palette)
