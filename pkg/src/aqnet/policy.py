"""Operating regimes and the numeric solvers behind assignment choices.

Three regimes drive channel assignment. Greedy maximizes the single
best user's fidelity. Restricted serves a small set of users (one
representative per slot, at most ``max_users`` of them) while keeping
their fidelities as close as possible. Balanced serves as many users as
possible, either fairly (minimal fidelity spread) or unfairly (best top
user).

The solvers locate the operating boundaries between configurations:
crossings of two fidelity curves in the second path's transmission
probability, coherence-time thresholds, and the closed-form common
crossing of all mixed unencoded configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .assignments import AssignmentRow
from .fidelity import (
    Configuration,
    FidelityParams,
    configuration_fidelity,
    storage_fidelity_factor,
)
from .netmodel import ParameterError

__all__ = [
    "Greedy",
    "Restricted",
    "Balanced",
    "Regime",
    "Decision",
    "select",
    "two_path_params",
    "crossing_point",
    "t2_threshold",
    "unencoded_common_crossing",
    "fidelity_gap_table",
    "minimal_gap_segments",
    "GapTable",
]


@dataclass(frozen=True)
class Greedy:
    """Maximize one user's fidelity."""


@dataclass(frozen=True)
class Restricted:
    """Serve at most ``max_users`` users with minimal fidelity spread."""

    max_users: int = 2

    def __post_init__(self):
        if self.max_users < 2:
            raise ParameterError(f"max_users must be >= 2, got {self.max_users}")


@dataclass(frozen=True)
class Balanced:
    """Serve as many users as possible; ``fair`` minimizes their spread."""

    fair: bool = True


Regime = Greedy | Restricted | Balanced


@dataclass(frozen=True)
class Decision:
    """A regime's choice: the row, its users' fidelities, and why."""

    chosen_row: AssignmentRow
    per_user_fidelity: dict[str, float]
    rationale: str
    focus_users: tuple[str, ...] = field(default_factory=tuple)


def _row_fidelities(row: AssignmentRow, params: FidelityParams) -> list[float]:
    return [configuration_fidelity(cfg, params) for cfg, _ in row.slots]


def _user_map(row: AssignmentRow, slot_fids: list[float]) -> dict[str, float]:
    users = {}
    u = 0
    for (cfg, deg), fid in zip(row.slots, slot_fids):
        for _ in range(deg):
            u += 1
            users[f"u{u}"] = fid
    return users


def _user_labels_of_slot(row: AssignmentRow, slot_idx: int) -> list[str]:
    start = sum(deg for _, deg in row.slots[:slot_idx])
    deg = row.slots[slot_idx][1]
    return [f"u{start + k + 1}" for k in range(deg)]


def _tiebreak_key(row: AssignmentRow, slot_fids: list[float]):
    # Prefer higher minimum user fidelity, then fewer memory-flagged slots.
    return (-min(slot_fids), sum(row.memory_flags))


def select(regime: Regime, rows, params: FidelityParams) -> Decision:
    """Choose an assignment row (and users) according to the regime.

    ``rows`` must be in canonical enumeration order; it is the final
    tie-break, so selection is deterministic.
    """
    rows = list(rows)
    if not rows:
        raise ParameterError("select needs at least one assignment row")
    fids = [_row_fidelities(r, params) for r in rows]

    if isinstance(regime, Greedy):
        best = max(max(f) for f in fids)
        candidates = [i for i, f in enumerate(fids) if max(f) == best]
        idx = min(candidates, key=lambda i: _tiebreak_key(rows[i], fids[i]))
        slot_idx = fids[idx].index(best)
        return Decision(
            chosen_row=rows[idx],
            per_user_fidelity=_user_map(rows[idx], fids[idx]),
            rationale="greedy-max-fidelity",
            focus_users=(_user_labels_of_slot(rows[idx], slot_idx)[0],),
        )

    if isinstance(regime, Restricted):
        # One representative user per slot; sets of 2..max_users distinct
        # slots compete on their fidelity spread.
        best = None
        for i, row in enumerate(rows):
            n_slots = len(row.slots)
            sizes = range(2, min(regime.max_users, n_slots) + 1)
            if n_slots == 1:
                sizes = [1]
            for size in sizes:
                for combo in combinations(range(n_slots), size):
                    sel = [fids[i][s] for s in combo]
                    spread = max(sel) - min(sel)
                    key = (spread, -min(sel), sum(rows[i].memory_flags), i, combo)
                    if best is None or key < best[0]:
                        best = (key, i, combo)
        _, idx, combo = best
        return Decision(
            chosen_row=rows[idx],
            per_user_fidelity=_user_map(rows[idx], fids[idx]),
            rationale="restricted-min-gap",
            focus_users=tuple(
                _user_labels_of_slot(rows[idx], s)[0] for s in combo
            ),
        )

    if isinstance(regime, Balanced):
        most = max(r.served_users for r in rows)
        candidates = [i for i, r in enumerate(rows) if r.served_users == most]
        if regime.fair:
            idx = min(
                candidates,
                key=lambda i: (max(fids[i]) - min(fids[i]),) + _tiebreak_key(rows[i], fids[i]),
            )
            rationale = "balanced-fair-max-users"
        else:
            idx = min(
                candidates,
                key=lambda i: (-max(fids[i]),) + _tiebreak_key(rows[i], fids[i]),
            )
            rationale = "balanced-unfair-max-users"
        return Decision(
            chosen_row=rows[idx],
            per_user_fidelity=_user_map(rows[idx], fids[idx]),
            rationale=rationale,
            focus_users=tuple(_user_map(rows[idx], fids[idx])),
        )

    raise ParameterError(f"unknown regime: {regime!r}")


def two_path_params(p1: float, p2: float, dwell_s: float = 0.0,
                    T2_s: float = math.inf) -> FidelityParams:
    """Params for the standard two-path route; the faster path waits."""
    return FidelityParams(p=(p1, p2), dwell_s=(dwell_s, 0.0), T2_s=T2_s)


def _bisect(g, lo: float, hi: float, g_lo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid < 0.0) == (g_lo < 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossing_point(config_a: Configuration, config_b: Configuration,
                   p1: float, p2_lo: float, p2_hi: float, *,
                   dwell_s: float = 0.0, T2_s: float = math.inf,
                   points: int = 64, tol: float = 1e-9) -> list[float]:
    """Roots of F_a(p2) - F_b(p2) on [p2_lo, p2_hi], ascending.

    A 64-point scan brackets every sign change (the difference is a
    low-degree polynomial in p2) and bisection refines each bracket to
    ``tol``. Returns [] when the difference never changes sign, e.g.
    for identical configurations.
    """
    if not p2_lo < p2_hi:
        raise ParameterError("need p2_lo < p2_hi")

    def g(p2: float) -> float:
        pr = two_path_params(p1, p2, dwell_s, T2_s)
        return configuration_fidelity(config_a, pr) - configuration_fidelity(config_b, pr)

    xs = [p2_lo + (p2_hi - p2_lo) * k / (points - 1) for k in range(points)]
    gs = [g(x) for x in xs]
    if all(v == 0.0 for v in gs):
        return []
    roots: list[float] = []
    for k in range(points - 1):
        if gs[k] == 0.0:
            roots.append(xs[k])
        elif gs[k] * gs[k + 1] < 0.0:
            roots.append(_bisect(g, xs[k], xs[k + 1], gs[k], tol))
    if gs[-1] == 0.0:
        roots.append(xs[-1])
    deduped = []
    for r in roots:
        if not deduped or r - deduped[-1] > tol:
            deduped.append(r)
    return deduped


def t2_threshold(config_a: Configuration, config_b: Configuration,
                 p1: float, p2: float, dwell_s: float, *,
                 T2_lo: float = 1e-6, T2_hi: float = 1e-1,
                 points: int = 64) -> float | None:
    """Coherence time at which F_a(T2) = F_b(T2), or None.

    Scans a log-spaced grid over [T2_lo, T2_hi] for a sign change and
    bisects in log T2; used to trace (p2, T2*) boundary tables.
    """

    def g(log_t2: float) -> float:
        pr = two_path_params(p1, p2, dwell_s, math.exp(log_t2))
        return configuration_fidelity(config_a, pr) - configuration_fidelity(config_b, pr)

    lo, hi = math.log(T2_lo), math.log(T2_hi)
    xs = [lo + (hi - lo) * k / (points - 1) for k in range(points)]
    gs = [g(x) for x in xs]
    for k in range(points - 1):
        if gs[k] == 0.0:
            return math.exp(xs[k])
        if gs[k] * gs[k + 1] < 0.0:
            return math.exp(_bisect(g, xs[k], xs[k + 1], gs[k], 1e-12))
    if gs[-1] == 0.0:
        return math.exp(xs[-1])
    return None


def unencoded_common_crossing(p1: float, p2: float, dimension: int) -> float | None:
    """Depolarization probability at which every mixed unencoded
    configuration meets the all-second-path one.

    Solves storage_fidelity_factor(p_d, D) = p2 / p1 in closed form:
    p_d* = (D / (D - 1)) * (1 - p2 / p1). The crossing is independent of
    the split, since F_{i+j} / F_{0+(i+j)} = (p1 f / p2)^i. Returns None
    when p2 > p1 (no crossing) or the required p_d exceeds 1 (the factor
    cannot reach p2 / p1).
    """
    if not 0.0 < p2 <= 1.0 or not 0.0 < p1 <= 1.0:
        raise ParameterError("p1 and p2 must be in (0, 1]")
    if p2 > p1:
        return None
    p_d = dimension / (dimension - 1) * (1.0 - p2 / p1)
    if p_d > 1.0:
        return None
    assert abs(storage_fidelity_factor(p_d, dimension) - p2 / p1) < 1e-12
    return p_d


@dataclass(frozen=True)
class GapTable:
    """|F_a - F_b| per configuration pair over a p2 grid."""

    pair_labels: tuple[str, ...]
    p2: tuple[float, ...]
    gaps: tuple[tuple[float, ...], ...]  # one inner tuple per grid point

    def argmin_pair(self, row_idx: int) -> int:
        gaps = self.gaps[row_idx]
        return min(range(len(gaps)), key=gaps.__getitem__)


def _pair_label(pair) -> str:
    a, b = pair
    return f"{a.label}|{b.label}"


def fidelity_gap_table(pairs, p1: float, p2_grid, *, dwell_s: float = 0.0,
                       T2_s: float = math.inf) -> GapTable:
    """Absolute fidelity differences of configuration pairs on a grid."""
    pairs = list(pairs)
    if not pairs:
        raise ParameterError("need at least one configuration pair")
    grid = tuple(float(x) for x in p2_grid)
    rows = []
    for p2 in grid:
        pr = two_path_params(p1, p2, dwell_s, T2_s)
        rows.append(
            tuple(
                abs(configuration_fidelity(a, pr) - configuration_fidelity(b, pr))
                for a, b in pairs
            )
        )
    return GapTable(
        pair_labels=tuple(_pair_label(p) for p in pairs),
        p2=grid,
        gaps=tuple(rows),
    )


def minimal_gap_segments(pairs, p1: float, p2_lo: float, p2_hi: float, *,
                         dwell_s: float = 0.0, T2_s: float = math.inf,
                         points: int = 512) -> list[tuple[str, float, float]]:
    """Partition [p2_lo, p2_hi] by which pair minimizes the gap.

    Returns (pair label, start, end) segments; interior boundaries are
    refined by bisection on the difference of the two competing gaps.
    """
    pairs = list(pairs)

    def gap(pair_idx: int, p2: float) -> float:
        a, b = pairs[pair_idx]
        pr = two_path_params(p1, p2, dwell_s, T2_s)
        return abs(configuration_fidelity(a, pr) - configuration_fidelity(b, pr))

    xs = [p2_lo + (p2_hi - p2_lo) * k / (points - 1) for k in range(points)]
    winners = []
    for x in xs:
        gaps = [gap(i, x) for i in range(len(pairs))]
        winners.append(min(range(len(pairs)), key=gaps.__getitem__))

    segments: list[tuple[str, float, float]] = []
    start = xs[0]
    for k in range(1, points):
        if winners[k] == winners[k - 1]:
            continue
        old, new = winners[k - 1], winners[k]
        g = lambda x: gap(old, x) - gap(new, x)
        boundary = _bisect(g, xs[k - 1], xs[k], g(xs[k - 1]), 1e-9)
        segments.append((_pair_label(pairs[old]), start, boundary))
        start = boundary
    segments.append((_pair_label(pairs[winners[-1]]), start, xs[-1]))
    return segments
