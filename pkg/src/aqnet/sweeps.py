"""Figure data: fidelity curves, gap curves and threshold boundaries.

Every function returns a :class:`SweepTable`, a plain column-oriented
table ready for CSV or JSON emission. Output is deterministic: columns
follow the canonical enumeration order and rows follow the sweep grid.
"""

from __future__ import annotations

from dataclasses import dataclass

from .assignments import enumerate_encoded, enumerate_unencoded
from .fidelity import Configuration, configuration_fidelity, parse_config_label
from .policy import fidelity_gap_table, t2_threshold, two_path_params
from .scenario import Scenario, ScenarioError

__all__ = ["SweepTable", "FIGURES", "figure_table", "tables_rows"]


@dataclass(frozen=True)
class SweepTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[float | None, ...], ...]


def _distinct_configs(rows) -> list[Configuration]:
    seen: list[Configuration] = []
    for row in rows:
        for cfg, _ in row.slots:
            if cfg not in seen:
                seen.append(cfg)
    return seen


def _route_pair_params(scn: Scenario):
    params = scn.fidelity_params()
    if len(params.p) != 2:
        raise ScenarioError("figure sweeps use two-path scenarios")
    return params


def _sweep_grid(scn: Scenario, default_var: str):
    if scn.sweep is None:
        raise ScenarioError("this figure needs a sweep section")
    if scn.sweep.var != default_var:
        raise ScenarioError(
            f"this figure sweeps {default_var}, scenario sweeps {scn.sweep.var}"
        )
    return scn.sweep.grid()


def _fidelity_columns(scn: Scenario, configs) -> SweepTable:
    params = _route_pair_params(scn)
    sweep = scn.sweep
    if sweep is None:
        raise ScenarioError("this figure needs a sweep section")
    grid = sweep.grid()
    rows = []
    for x in grid:
        if sweep.var == "p2":
            pr = two_path_params(params.p[0], x, params.dwell_s[0], scn.T2_s)
        else:
            pr = two_path_params(params.p[0], params.p[1], params.dwell_s[0], x)
        rows.append(tuple([x] + [configuration_fidelity(c, pr) for c in configs]))
    unit = "p2" if sweep.var == "p2" else "T2_s"
    return SweepTable(
        columns=tuple([unit] + [f"F[{c.label}]" for c in configs]),
        rows=tuple(rows),
    )


def _unencoded_fid(scn: Scenario) -> SweepTable:
    if not scn.dims:
        raise ScenarioError("unencoded-fid needs a dims palette")
    configs = _distinct_configs(
        enumerate_unencoded(scn.capacity, scn.packet_size, scn.dims)
    )
    return _fidelity_columns(scn, configs)


def _encoded_fid(scn: Scenario) -> SweepTable:
    if not scn.codes:
        raise ScenarioError("encoded-fid needs a codes palette")
    configs = _distinct_configs(enumerate_encoded(scn.capacity, scn.codes))
    return _fidelity_columns(scn, configs)


def _row_pairs(scn: Scenario):
    """Per-row (user 1, user 2) configuration pairs, canonical order."""
    if scn.codes:
        rows = enumerate_encoded(scn.capacity, scn.codes)
    else:
        rows = enumerate_unencoded(scn.capacity, scn.packet_size, scn.dims)
    pairs = []
    for row in rows:
        first = row.slots[0][0]
        second = next((cfg for cfg, _ in row.slots[1:] if cfg != first), None)
        if second is not None:
            pairs.append((first, second))
    return pairs


def _gap(scn: Scenario) -> SweepTable:
    params = _route_pair_params(scn)
    grid = _sweep_grid(scn, "p2")
    pairs = _row_pairs(scn)
    if not pairs:
        raise ScenarioError("no two-user rows to compare")
    table = fidelity_gap_table(
        pairs, params.p[0], grid, dwell_s=params.dwell_s[0], T2_s=scn.T2_s
    )
    rows = [
        tuple([p2] + list(gaps)) for p2, gaps in zip(table.p2, table.gaps)
    ]
    return SweepTable(
        columns=tuple(["p2"] + [f"gap[{lbl}]" for lbl in table.pair_labels]),
        rows=tuple(rows),
    )


def _greedy_configs(scn: Scenario) -> list[Configuration]:
    """Per palette entry, the configuration sending most via the first path."""
    if scn.codes:
        rows = enumerate_encoded(scn.capacity, scn.codes)
    else:
        rows = enumerate_unencoded(scn.capacity, scn.packet_size, scn.dims)
    best: dict = {}
    for cfg in _distinct_configs(rows):
        key = (type(cfg.coding), cfg.coding.dimension, cfg.size)
        if key not in best or cfg.counts[0] > best[key].counts[0]:
            best[key] = cfg
    return sorted(best.values(), key=lambda c: c.coding.dimension, reverse=True)


def _greedy(scn: Scenario) -> SweepTable:
    return _fidelity_columns(scn, _greedy_configs(scn))


def _default_threshold_pair(scn: Scenario) -> tuple[Configuration, Configuration]:
    if scn.codes:
        greedy = _greedy_configs(scn)
        if len(greedy) < 2:
            raise ScenarioError("t2-inset needs two codes to compare")
        return greedy[0], greedy[1]
    configs = _distinct_configs(
        enumerate_unencoded(scn.capacity, scn.packet_size, scn.dims)
    )
    mixed = [c for c in configs if all(x > 0 for x in c.counts)]
    last_path_only = [c for c in configs if c.counts[0] == 0]
    if not mixed or not last_path_only:
        raise ScenarioError("t2-inset needs a mixed and a second-path configuration")
    a = max(mixed, key=lambda c: c.counts[0])
    return a, last_path_only[0]


def _t2_inset(scn: Scenario) -> SweepTable:
    params = _route_pair_params(scn)
    grid = _sweep_grid(scn, "p2")
    if scn.pair is not None:
        pair = (parse_config_label(scn.pair[0]), parse_config_label(scn.pair[1]))
    else:
        pair = _default_threshold_pair(scn)
    dwell = params.dwell_s[0]
    if dwell <= 0:
        raise ScenarioError("t2-inset needs a nonzero first-path dwell")
    rows = []
    for p2 in grid:
        thr = t2_threshold(pair[0], pair[1], params.p[0], p2, dwell)
        rows.append((p2, thr))
    return SweepTable(
        columns=("p2", f"T2_star_s[{pair[0].label}={pair[1].label}]"),
        rows=tuple(rows),
    )


FIGURES = {
    "unencoded-fid": _unencoded_fid,
    "encoded-fid": _encoded_fid,
    "gap": _gap,
    "greedy": _greedy,
    "t2-inset": _t2_inset,
}


def figure_table(scn: Scenario, figure: str) -> SweepTable:
    """Data behind one named figure of the reference scenarios."""
    try:
        fn = FIGURES[figure]
    except KeyError:
        raise ScenarioError(
            f"unknown figure {figure!r}; choose from {sorted(FIGURES)}"
        ) from None
    return fn(scn)


def tables_rows(scn: Scenario):
    """Assignment rows of the scenario (encoded if codes given, else unencoded)."""
    if scn.codes:
        return enumerate_encoded(scn.capacity, scn.codes)
    if scn.dims:
        return enumerate_unencoded(scn.capacity, scn.packet_size, scn.dims)
    raise ScenarioError("scenario needs a codes or dims palette")
