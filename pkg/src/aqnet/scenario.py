"""Scenario files: the single input document driving every command.

A scenario is a nested key-value document (YAML on disk, plain dicts
over the wire) with fixed field names:

    paths:                # one entry per path, fastest first
      - p: 0.9            # either an explicit transmission probability
        channels: 5
      - length: 50        #   or loss parameters (eta, att_length)
        eta: 1.0
        att_length: 22.0
        channels: 5
        t_congestion: 0.0
        dwell: 6.159e-7   # optional storage-time override
    channels: [5, 5]      # alternative to per-path channel counts
    capacity: 9
    codes: [7, 5, 3]      # QRS palette (encoded scenarios)
    dims: [7, 3]          # qudit dimension palette (unencoded scenarios)
    packet_size: 5
    light_speed: 2.0e5    # km/s, required when lengths are used
    t_congestion: 0.0     # default for paths that do not set their own
    T2: inf               # seconds; the string "inf" means ideal memories
    sweep: {var: p2, lo: 0.6, hi: 1.0, points: 81, scale: linear}
    regime: greedy        # greedy | restricted | balanced | balanced-unfair
    seed: 42

Probabilities must resolve to [0, 1]; a path carrying both an explicit
p and loss parameters keeps the explicit p (warned once at load).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .assignments import CapacityModel
from .fidelity import FidelityParams
from .netmodel import AggregatedRoute, ChannelSpec, LinkSpec, PathSpec, path_delay
from .policy import Balanced, Greedy, Regime, Restricted

__all__ = ["ScenarioError", "SweepSpec", "Scenario", "load_scenario", "parse_scenario"]

log = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """The scenario document is structurally or physically invalid."""


@dataclass(frozen=True)
class SweepSpec:
    var: str
    lo: float
    hi: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.var not in ("p2", "T2"):
            raise ScenarioError(f"sweep var must be 'p2' or 'T2', got {self.var!r}")
        if self.points < 1:
            raise ScenarioError(f"sweep needs >= 1 points, got {self.points}")
        if self.lo > self.hi or (self.points > 1 and self.lo == self.hi):
            raise ScenarioError("sweep range must be ordered (lo < hi)")
        if self.scale not in ("linear", "log"):
            raise ScenarioError(f"sweep scale must be linear or log, got {self.scale!r}")

    def grid(self) -> list[float]:
        if self.points == 1:
            return [self.lo]
        if self.scale == "log":
            llo, lhi = math.log(self.lo), math.log(self.hi)
            return [math.exp(llo + (lhi - llo) * k / (self.points - 1))
                    for k in range(self.points)]
        return [self.lo + (self.hi - self.lo) * k / (self.points - 1)
                for k in range(self.points)]


@dataclass(frozen=True)
class Scenario:
    """A fully validated scenario, ready for the engines."""

    route: AggregatedRoute
    capacity: CapacityModel
    codes: tuple[int, ...]
    dims: tuple[int, ...]
    packet_size: int
    T2_s: float
    regime: Regime
    seed: int
    sweep: SweepSpec | None = None
    dwell_override_s: tuple[float, ...] | None = None
    pair: tuple[str, str] | None = None

    def fidelity_params(self) -> FidelityParams:
        from . import netmodel

        dwell = self.dwell_override_s
        if dwell is None:
            dwell = netmodel.dwell_times(self.route)
        return FidelityParams(
            p=tuple(netmodel.transmission_probability(p) for p in self.route.paths),
            dwell_s=dwell,
            T2_s=self.T2_s,
        )


def _parse_t2(raw) -> float:
    if raw is None:
        return math.inf
    if isinstance(raw, str):
        if raw.strip().lower() in ("inf", ".inf", "infinity"):
            return math.inf
        try:
            return float(raw)
        except ValueError as exc:
            raise ScenarioError(f"bad T2 value: {raw!r}") from exc
    return float(raw)


def _parse_regime(raw) -> Regime:
    if raw is None:
        return Greedy()
    if isinstance(raw, str):
        name = raw.strip().lower()
        if name == "greedy":
            return Greedy()
        if name == "restricted":
            return Restricted()
        if name == "balanced":
            return Balanced(fair=True)
        if name == "balanced-unfair":
            return Balanced(fair=False)
        raise ScenarioError(f"unknown regime: {raw!r}")
    if isinstance(raw, dict):
        name = str(raw.get("name", "")).lower()
        if name == "restricted":
            return Restricted(max_users=int(raw.get("max_users", 2)))
        if name == "balanced":
            return Balanced(fair=bool(raw.get("fair", True)))
        if name == "greedy":
            return Greedy()
    raise ScenarioError(f"unknown regime: {raw!r}")


def _build_path(entry: dict, index: int, defaults: dict, capacity: int,
                channels_count: int) -> PathSpec:
    if channels_count < 1:
        raise ScenarioError(f"path {index}: needs at least one channel")
    channels = tuple(ChannelSpec(capacity) for _ in range(channels_count))
    p = entry.get("p")
    length = float(entry.get("length", 0.0))
    has_loss_params = "length" in entry or "eta" in entry or "att_length" in entry
    if p is None and not has_loss_params:
        raise ScenarioError(
            f"path {index}: needs either p or length/eta/att_length"
        )
    if p is not None and has_loss_params:
        log.warning("path %d: both explicit p and loss parameters given; p wins", index)
    if p is not None and not 0.0 <= float(p) <= 1.0:
        raise ScenarioError(f"path {index}: p must be in [0, 1], got {p}")
    # neither c nor L_att have physical defaults; scenarios must fix them
    if p is None and "att_length" not in entry and "att_length" not in defaults:
        raise ScenarioError(
            f"path {index}: loss parameters require att_length"
        )
    if length > 0 and "light_speed" not in entry and "light_speed" not in defaults:
        raise ScenarioError(
            f"path {index}: lengths require light_speed (no default is assumed)"
        )
    try:
        return PathSpec(
            links=(LinkSpec(length, channels),),
            eta=float(entry.get("eta", 1.0)),
            attenuation_length_km=float(
                entry.get("att_length", defaults.get("att_length", 22.0))
            ),
            light_speed_km_per_s=float(
                entry.get("light_speed", defaults.get("light_speed", 2.0e5))
            ),
            congestion_time_s=float(
                entry.get("t_congestion", defaults.get("t_congestion", 0.0))
            ),
            p_override=None if p is None else float(p),
        )
    except ValueError as exc:
        raise ScenarioError(f"path {index}: {exc}") from exc


def parse_scenario(doc: dict) -> Scenario:
    """Validate a raw scenario document into a Scenario."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a mapping")
    raw_paths = doc.get("paths")
    if not raw_paths or not isinstance(raw_paths, list):
        raise ScenarioError("scenario needs a nonempty paths list")

    capacity = int(doc.get("capacity", 9))
    top_channels = doc.get("channels")
    channel_counts = []
    for i, entry in enumerate(raw_paths):
        if not isinstance(entry, dict):
            raise ScenarioError(f"path {i}: must be a mapping")
        if "channels" in entry:
            channel_counts.append(int(entry["channels"]))
        elif isinstance(top_channels, list) and i < len(top_channels):
            channel_counts.append(int(top_channels[i]))
        else:
            raise ScenarioError(f"path {i}: channel count missing")

    defaults = {
        k: doc[k] for k in ("light_speed", "att_length", "t_congestion") if k in doc
    }
    paths = [
        _build_path(entry, i, defaults, capacity, channel_counts[i])
        for i, entry in enumerate(raw_paths)
    ]

    delays = [path_delay(p) for p in paths]
    if delays != sorted(delays):
        raise ScenarioError(
            "paths must be listed fastest first (ascending delay), since "
            "channel counts and dwell overrides are positional"
        )
    try:
        route = AggregatedRoute(tuple(paths))
        cap = CapacityModel(tuple(channel_counts), capacity)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    dwell = None
    if any("dwell" in entry for entry in raw_paths):
        dwell = tuple(float(entry.get("dwell", 0.0)) for entry in raw_paths)
        if any(d < 0 for d in dwell):
            raise ScenarioError("dwell overrides must be >= 0")

    sweep = None
    if "sweep" in doc and doc["sweep"] is not None:
        s = doc["sweep"]
        if not isinstance(s, dict) or not {"var", "lo", "hi", "points"} <= set(s):
            raise ScenarioError("sweep needs var, lo, hi and points")
        sweep = SweepSpec(
            var=str(s["var"]),
            lo=float(s["lo"]),
            hi=float(s["hi"]),
            points=int(s["points"]),
            scale=str(s.get("scale", "linear")),
        )

    pair = None
    if "pair" in doc and doc["pair"] is not None:
        raw_pair = doc["pair"]
        if not isinstance(raw_pair, list) or len(raw_pair) != 2:
            raise ScenarioError("pair must list exactly two configuration labels")
        pair = (str(raw_pair[0]), str(raw_pair[1]))

    codes = tuple(int(n) for n in doc.get("codes", []) or [])
    dims = tuple(int(d) for d in doc.get("dims", []) or [])
    packet_size = int(doc.get("packet_size", 5))
    if packet_size < 1:
        raise ScenarioError(f"packet_size must be >= 1, got {packet_size}")

    return Scenario(
        route=route,
        capacity=cap,
        codes=codes,
        dims=dims,
        packet_size=packet_size,
        T2_s=_parse_t2(doc.get("T2")),
        regime=_parse_regime(doc.get("regime")),
        seed=int(doc.get("seed", 0)),
        sweep=sweep,
        dwell_override_s=dwell,
        pair=pair,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a YAML scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse scenario {path}: {exc}") from exc
    return parse_scenario(doc)
