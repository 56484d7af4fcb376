"""End-to-end fidelity of multi-path quantum transmissions.

Two payload kinds are modeled. An unencoded packet is a group of
dimension-D qudits that all must survive: losing any qudit destroys the
packet, and qudits stored in receiver memory while waiting for slower
paths are depolarized with probability ``p_d = 1 - exp(-dwell / T2)``.
A quantum Reed-Solomon codeword of length n (dimension-n qudits, one
logical qudit) tolerates ``t = (n - 1) / 2`` erasures and corrects u
unlocated errors plus e erasures whenever ``2u + e <= t``.

Configurations are written ``i+j`` for i qudits on the first (faster)
path and j on the second. Path order everywhere follows the route order:
ascending delay, so the first path waits the longest.

All functions are pure and operate on immutable inputs.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

from .netmodel import ParameterError

__all__ = [
    "Unencoded",
    "QRS",
    "Coding",
    "Configuration",
    "FidelityParams",
    "memory_depolarization_prob",
    "storage_fidelity_factor",
    "unencoded_fidelity",
    "qrs_tolerance",
    "needs_memory",
    "unencoded_needs_memory",
    "encoded_success_ideal",
    "encoded_fidelity",
    "configuration_fidelity",
    "configuration_needs_memory",
    "loss_metric",
    "parse_config_label",
    "parse_coding_label",
]


@dataclass(frozen=True)
class Unencoded:
    """Plain qudit packet of a fixed dimension (no error correction)."""

    dimension: int

    def __post_init__(self):
        if self.dimension < 2:
            raise ParameterError(f"qudit dimension must be >= 2, got {self.dimension}")

    @property
    def label(self) -> str:
        return f"u{self.dimension}"


@dataclass(frozen=True)
class QRS:
    """Quantum Reed-Solomon code of odd length n using dimension-n qudits."""

    n: int

    def __post_init__(self):
        qrs_tolerance(self.n)

    @property
    def dimension(self) -> int:
        return self.n

    @property
    def tolerance(self) -> int:
        """Number of erasures the code corrects."""
        return (self.n - 1) // 2

    @property
    def distance(self) -> int:
        return (self.n + 1) // 2

    @property
    def label(self) -> str:
        return f"n{self.n}"


Coding = Unencoded | QRS


def qrs_tolerance(n: int) -> tuple[int, int]:
    """Erasure tolerance and distance (t, d) of the length-n QRS code."""
    if n < 3 or n % 2 == 0:
        raise ParameterError(f"QRS length must be odd and >= 3, got {n}")
    return (n - 1) // 2, (n + 1) // 2


@dataclass(frozen=True)
class Configuration:
    """Per-path qudit counts for one user's payload, plus the coding."""

    counts: tuple[int, ...]
    coding: Coding

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if not self.counts or any(c < 0 for c in self.counts):
            raise ParameterError(f"counts must be nonnegative, got {self.counts}")
        if sum(self.counts) == 0:
            raise ParameterError("a configuration must place at least one qudit")
        if isinstance(self.coding, QRS) and sum(self.counts) != self.coding.n:
            raise ParameterError(
                f"QRS({self.coding.n}) needs exactly {self.coding.n} qudits, "
                f"got counts {self.counts}"
            )

    @property
    def size(self) -> int:
        return sum(self.counts)

    @property
    def label(self) -> str:
        """Canonical name, e.g. ``5+2/n7`` or ``4+1/u7``."""
        return "+".join(str(c) for c in self.counts) + "/" + self.coding.label


_LABEL_RE = re.compile(r"^(\d+(?:\+\d+)*)/([nu])(\d+)$")
_CODING_RE = re.compile(r"^([nu])(\d+)$")


def parse_config_label(label: str) -> Configuration:
    """Inverse of ``Configuration.label``."""
    m = _LABEL_RE.match(label.strip())
    if not m:
        raise ParameterError(f"bad configuration label: {label!r}")
    counts = tuple(int(c) for c in m.group(1).split("+"))
    coding = QRS(int(m.group(3))) if m.group(2) == "n" else Unencoded(int(m.group(3)))
    return Configuration(counts, coding)


def parse_coding_label(label: str) -> Coding:
    """Parse a coding name: ``n7`` is QRS(7), ``u7`` is Unencoded(7)."""
    m = _CODING_RE.match(label.strip())
    if not m:
        raise ParameterError(f"bad coding label: {label!r}")
    value = int(m.group(2))
    return QRS(value) if m.group(1) == "n" else Unencoded(value)


@dataclass(frozen=True)
class FidelityParams:
    """Channel and memory parameters of one aggregated route.

    Attributes:
        p: per-path transmission probabilities, route order.
        dwell_s: per-path storage times while waiting for the slowest
            path of the route (the slowest path has dwell 0).
        T2_s: coherence time of the receiver memories; ``math.inf``
            for ideal memories.
    """

    p: tuple[float, ...]
    dwell_s: tuple[float, ...]
    T2_s: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        object.__setattr__(self, "dwell_s", tuple(float(x) for x in self.dwell_s))
        if len(self.p) != len(self.dwell_s):
            raise ParameterError("p and dwell_s must have one entry per path")
        if any(not 0.0 <= x <= 1.0 for x in self.p):
            raise ParameterError(f"transmission probabilities must be in [0, 1]: {self.p}")
        if any(d < 0 for d in self.dwell_s):
            raise ParameterError(f"dwell times must be >= 0: {self.dwell_s}")
        if self.T2_s <= 0:
            raise ParameterError(f"T2 must be positive (or inf), got {self.T2_s}")

    @property
    def p_d(self) -> tuple[float, ...]:
        """Per-path depolarization probability for the full route dwell."""
        return tuple(memory_depolarization_prob(d, self.T2_s) for d in self.dwell_s)

    @classmethod
    def from_route(cls, route, T2_s: float = math.inf) -> "FidelityParams":
        from . import netmodel

        return cls(
            p=tuple(netmodel.transmission_probability(pth) for pth in route.paths),
            dwell_s=netmodel.dwell_times(route),
            T2_s=T2_s,
        )


def memory_depolarization_prob(dwell_s: float, T2_s: float) -> float:
    """Probability that a stored qudit depolarizes: 1 - exp(-dwell / T2).

    Exponential decay over the storage interval; 0 for ideal memories
    (infinite T2) or zero dwell.
    """
    if T2_s <= 0:
        raise ParameterError(f"T2 must be positive, got {T2_s}")
    if dwell_s < 0:
        raise ParameterError(f"dwell must be >= 0, got {dwell_s}")
    if math.isinf(T2_s) or dwell_s == 0.0:
        return 0.0
    return -math.expm1(-dwell_s / T2_s)


def storage_fidelity_factor(p_d: float, dimension: int) -> float:
    """Per-qudit fidelity factor after storage: (1 - p_d) + p_d / D.

    A depolarized dimension-D qudit keeps overlap 1/D with the intended
    state, so the factor interpolates between 1 (no decoherence) and 1/D.
    """
    if not 0.0 <= p_d <= 1.0:
        raise ParameterError(f"p_d must be in [0, 1], got {p_d}")
    if dimension < 2:
        raise ParameterError(f"dimension must be >= 2, got {dimension}")
    return (1.0 - p_d) + p_d / dimension


def _check_paths(config: Configuration, params: FidelityParams) -> None:
    if len(config.counts) != len(params.p):
        raise ParameterError(
            f"configuration spans {len(config.counts)} paths but params "
            f"describe {len(params.p)}"
        )


def _effective_dwells(config: Configuration, params: FidelityParams) -> tuple[float, ...]:
    # Storage lasts until the slowest *occupied* path arrives, which may be
    # earlier than the slowest path of the route.
    base = min(d for d, c in zip(params.dwell_s, config.counts) if c > 0)
    return tuple(max(d - base, 0.0) for d in params.dwell_s)


def unencoded_fidelity(config: Configuration, params: FidelityParams) -> float:
    """Fidelity of an unencoded packet split across the route's paths.

    Any qudit loss destroys the packet, so survival contributes
    ``prod_k p_k^(counts_k)``. Qudits on paths that arrive before the
    slowest occupied path wait in memory and each contributes one
    storage fidelity factor.

    For a two-path route with counts (i, j), i, j > 0 this evaluates to
    ``p1^i * p2^j * f^i`` with ``f = storage_fidelity_factor(p_d, D)``,
    and to ``p^size`` for single-path configurations.
    """
    if not isinstance(config.coding, Unencoded):
        raise ParameterError("unencoded_fidelity requires an Unencoded configuration")
    _check_paths(config, params)
    dim = config.coding.dimension
    fid = 1.0
    for count, p, eff in zip(config.counts, params.p, _effective_dwells(config, params)):
        if count == 0:
            continue
        fid *= p**count
        if eff > 0.0:
            p_d = memory_depolarization_prob(eff, params.T2_s)
            fid *= storage_fidelity_factor(p_d, dim) ** count
    return fid


def needs_memory(config: Configuration) -> bool:
    """Whether a QRS configuration can require receiver memory.

    True iff some loss pattern of nonzero probability leaves the qudits
    of the earliest occupied path unable to decode alone (treating all
    qudits still in flight as erasures) while waiting could still
    succeed. For a two-path configuration (i, j) this holds iff i, j > 0
    and some admissible first-path loss count k1 <= min(i, t) satisfies
    k1 + j > t.
    """
    if not isinstance(config.coding, QRS):
        raise ParameterError("needs_memory applies to QRS configurations")
    t = config.coding.tolerance
    occupied = [c for c in config.counts if c > 0]
    if len(occupied) < 2:
        return False
    first, rest = occupied[0], sum(occupied[1:])
    return any(k1 + rest > t for k1 in range(min(first, t) + 1))


def unencoded_needs_memory(config: Configuration) -> bool:
    """Whether an unencoded configuration stores qudits at the receiver."""
    if not isinstance(config.coding, Unencoded):
        raise ParameterError("unencoded_needs_memory applies to Unencoded configurations")
    return sum(1 for c in config.counts if c > 0) >= 2


def _loss_patterns(counts, p):
    """Yield (per-path loss counts, probability) over all loss patterns."""
    ranges = [range(c + 1) for c in counts]
    for losses in itertools.product(*ranges):
        prob = 1.0
        for c, k, pk in zip(counts, losses, p):
            prob *= math.comb(c, k) * pk ** (c - k) * (1.0 - pk) ** k
        if prob > 0.0:
            yield losses, prob


def encoded_success_ideal(config: Configuration, p: tuple[float, ...]) -> float:
    """Decoding probability of a QRS codeword with ideal memories.

    Erasure-only channel: the sum over per-path loss counts (k1, k2, ...)
    with total <= t of the binomial pattern probabilities. Equals the
    fidelity in the infinite-T2 limit.
    """
    if not isinstance(config.coding, QRS):
        raise ParameterError("encoded_success_ideal requires a QRS configuration")
    if len(p) != len(config.counts):
        raise ParameterError("need one transmission probability per path")
    t = config.coding.tolerance
    return sum(
        prob for losses, prob in _loss_patterns(config.counts, p) if sum(losses) <= t
    )


def _binomial_pmf(n: int, q: float) -> list[float]:
    return [math.comb(n, u) * q**u * (1.0 - q) ** (n - u) for u in range(n + 1)]


def _convolve(a: list[float], b: list[float]) -> list[float]:
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def encoded_fidelity(config: Configuration, params: FidelityParams) -> float:
    """Fidelity of a QRS codeword under finite receiver coherence.

    Decoding starts at the earliest path arrival at which treating every
    not-yet-arrived qudit as an erasure satisfies the erasure bound
    (for two paths: j + k1 <= t decodes immediately on the first path's
    survivors). If the decoder must wait, each stored survivor suffers an
    unlocated error with probability ``p_d * (1 - 1/n^2)`` and the
    pattern succeeds iff ``2u + e <= t``. Failures contribute fidelity 0.
    Reduces exactly to ``encoded_success_ideal`` when T2 is infinite.
    """
    if not isinstance(config.coding, QRS):
        raise ParameterError("encoded_fidelity requires a QRS configuration")
    _check_paths(config, params)
    n = config.coding.n
    t = config.coding.tolerance
    err_scale = 1.0 - 1.0 / n**2
    occupied = [l for l, c in enumerate(config.counts) if c > 0]

    total = 0.0
    for losses, prob in _loss_patterns(config.counts, params.p):
        # Earliest arrival (in route order) at which the erasure bound holds.
        decode_at = None
        for idx in range(len(occupied)):
            erasures = sum(losses[l] for l in occupied[: idx + 1]) + sum(
                config.counts[l] for l in occupied[idx + 1 :]
            )
            if erasures <= t:
                decode_at = idx
                break
        if decode_at is None:
            continue  # more than t qudits lost outright
        if decode_at == 0:
            total += prob
            continue
        ref = occupied[decode_at]
        # Distribution of unlocated errors across all stored survivors.
        u_dist = [1.0]
        for l in occupied[:decode_at]:
            dwell = max(params.dwell_s[l] - params.dwell_s[ref], 0.0)
            q = memory_depolarization_prob(dwell, params.T2_s) * err_scale
            u_dist = _convolve(u_dist, _binomial_pmf(config.counts[l] - losses[l], q))
        recoverable = sum(u_dist[u] for u in range(len(u_dist)) if 2 * u + erasures <= t)
        total += prob * recoverable
    return total


def configuration_fidelity(config: Configuration, params: FidelityParams) -> float:
    """Fidelity of any configuration, dispatching on its coding."""
    if isinstance(config.coding, QRS):
        return encoded_fidelity(config, params)
    return unencoded_fidelity(config, params)


def configuration_needs_memory(config: Configuration) -> bool:
    """Memory flag of any configuration, dispatching on its coding."""
    if isinstance(config.coding, QRS):
        return needs_memory(config)
    return unencoded_needs_memory(config)


def loss_metric(fid: float) -> float:
    """Infidelity 1 - F of a transmitted state."""
    if not 0.0 <= fid <= 1.0:
        raise ParameterError(f"fidelity must be in [0, 1], got {fid}")
    return 1.0 - fid
