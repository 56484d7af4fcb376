"""Acceptance suite: one test per release criterion.

Each test prints a single [PASS]/[FAIL] line (visible with ``pytest -s``
or in the captured output of a failure) and enforces its stated
tolerance and runtime budget.
"""

import math
import time
from collections import Counter

import numpy as np
import pytest

from aqnet.assignments import CapacityModel, enumerate_encoded, enumerate_unencoded
from aqnet.fidelity import (
    QRS,
    Configuration,
    FidelityParams,
    Unencoded,
    configuration_fidelity,
    encoded_fidelity,
    parse_config_label,
    unencoded_fidelity,
)
from aqnet.montecarlo import TrialPlan, simulate
from aqnet.policy import (
    crossing_point,
    minimal_gap_segments,
    t2_threshold,
    two_path_params,
    unencoded_common_crossing,
)
from aqnet.routersim import EventKind, RouterState, UserRequest, run
from aqnet.policy import Balanced, Greedy
from conftest import make_route

INF = math.inf
CAP = CapacityModel((5, 5), 9)


def report(number: int, description: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] criterion {number}: {description}{suffix}")


def u7(i, j):
    return Configuration((i, j), Unencoded(7))


def qrs(i, j, n):
    return Configuration((i, j), QRS(n))


def hand_expressions():
    f = [
        lambda p1, p2, pd: p1**5,
        lambda p1, p2, pd: p1**4 * p2 * (
            (1 - pd) ** 4 + 4 / 7 * pd * (1 - pd) ** 3
            + 6 / 49 * pd**2 * (1 - pd) ** 2 + 4 / 343 * pd**3 * (1 - pd)
            + pd**4 / 2401
        ),
        lambda p1, p2, pd: p1**3 * p2**2 * (
            (1 - pd) ** 3 + 3 / 7 * pd * (1 - pd) ** 2
            + 3 / 49 * pd**2 * (1 - pd) + pd**3 / 343
        ),
        lambda p1, p2, pd: p1**2 * p2**3 * (
            (1 - pd) ** 2 + 2 / 7 * pd * (1 - pd) + pd**2 / 49
        ),
        lambda p1, p2, pd: p1 * p2**4 * ((1 - pd) + pd / 7),
        lambda p1, p2, pd: p2**5,
    ]
    counts = [(5, 0), (4, 1), (3, 2), (2, 3), (1, 4), (0, 5)]
    return list(zip(counts, f))


def params_with_pd(p1, p2, pd, T2=1e-4):
    dwell = 0.0 if pd == 0.0 else -T2 * math.log1p(-pd)
    return FidelityParams((p1, p2), (dwell, 0.0), T2 if pd > 0 else INF)


def test_criterion_1_appendix_equivalence():
    start = time.monotonic()
    worst = 0.0
    grid1 = [0.5 + 0.5 * k / 9 for k in range(10)]
    grid_pd = [0.2 * k / 4 for k in range(5)]
    for p1 in grid1:
        for p2 in grid1:
            for pd in grid_pd:
                params = params_with_pd(p1, p2, pd)
                for counts, hand in hand_expressions():
                    mine = unencoded_fidelity(Configuration(counts, Unencoded(7)), params)
                    worst = max(worst, abs(mine - hand(p1, p2, pd)))
    elapsed = time.monotonic() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    report(1, "general packet fidelity matches the six hand transcriptions",
           ok, f"worst |diff| {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-12
    assert elapsed < 1.0


def test_criterion_2_greedy_crossing():
    start = time.monotonic()
    roots = crossing_point(qrs(5, 2, 7), qrs(5, 0, 5), 0.9, 0.5, 0.99)
    ok = len(roots) == 1 and abs(roots[0] - 0.75) <= 1e-6
    closed_ok = True
    for p1 in (0.8, 0.9, 0.95):
        x = math.sqrt(p1 / (1 - p1))
        expected = x / (1 + x)
        got = crossing_point(qrs(5, 2, 7), qrs(5, 0, 5), p1, 0.5, 0.99)[0]
        closed_ok &= abs(got - expected) <= 1e-6
    elapsed = time.monotonic() - start
    report(2, "greedy 5+2/n7 vs 5+0/n5 crossing at p2 = 0.75 and closed form",
           ok and closed_ok and elapsed < 1.0,
           f"root {roots[0]:.9f}, {elapsed:.2f}s")
    assert ok and closed_ok
    assert elapsed < 1.0


def test_criterion_3_common_unencoded_crossing():
    start = time.monotonic()
    p1, p2 = 0.95, 0.945
    closed = unencoded_common_crossing(p1, p2, 7)

    def pd_root(counts):
        cfg = Configuration(counts, Unencoded(7))
        lo, hi = 0.0, 0.5
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            f = unencoded_fidelity(cfg, params_with_pd(p1, p2, mid))
            if f > p2**5:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    roots = [pd_root(c) for c in ((4, 1), (3, 2), (2, 3), (1, 4))]
    spread = max(roots) - min(roots)
    value_ok = abs(closed - 7 / 6 * (1 - p2 / p1)) < 1e-15
    printed_ok = abs(closed - 0.0061404) < 1e-6
    t2 = t2_threshold(u7(4, 1), u7(0, 5), p1, p2, 6.159e-7)
    t2_ok = abs(t2 - 1.0e-4) / 1.0e-4 <= 0.01
    elapsed = time.monotonic() - start
    ok = spread <= 1e-9 and value_ok and printed_ok and t2_ok and elapsed < 1.0
    report(3, "all mixed splits cross 0+5 at one p_d; T2 threshold at 0.1 ms",
           ok, f"spread {spread:.1e}, p_d* {closed:.7f}, T2* {t2:.3e}, {elapsed:.2f}s")
    assert spread <= 1e-9
    assert value_ok and printed_ok and t2_ok
    assert elapsed < 1.0


def test_criterion_4_table_regeneration():
    start = time.monotonic()
    unencoded = [
        (tuple((cfg.label, deg) for cfg, deg in r.slots), r.served_users,
         r.memory_flags)
        for r in enumerate_unencoded(CAP, 5, {7, 3})
    ]
    expected_unencoded = [
        ((("5+0/u7", 1), ("0+5/u7", 1)), 2, (False, False)),
        ((("4+1/u7", 1), ("1+4/u7", 1)), 2, (True, True)),
        ((("3+2/u7", 1), ("2+3/u7", 1)), 2, (True, True)),
        ((("5+0/u3", 2), ("0+5/u3", 2)), 4, (False, False)),
    ]
    encoded = [
        (tuple((cfg.label, deg) for cfg, deg in r.slots), r.served_users,
         r.memory_flags)
        for r in enumerate_encoded(CAP, {7, 5, 3})
    ]
    # The decode rule decides memory flags uniformly: 1+2/n3 can always
    # be forced to wait (one early qudit cannot decode alone), so both of
    # row 9's identical slots carry the flag, as does row 10's.
    expected_encoded = [
        ((("5+2/n7", 1), ("0+3/n3", 2)), 3, (True, False)),
        ((("4+3/n7", 1), ("1+2/n3", 2)), 3, (True, True)),
        ((("3+4/n7", 1), ("2+1/n3", 2)), 3, (True, True)),
        ((("2+5/n7", 1), ("3+0/n3", 2)), 3, (True, False)),
        ((("5+0/n5", 1), ("0+5/n5", 1)), 2, (False, False)),
        ((("4+1/n5", 1), ("1+4/n5", 1)), 2, (True, True)),
        ((("3+2/n5", 1), ("2+3/n5", 1)), 2, (True, True)),
        ((("3+0/n3", 2), ("2+1/n3", 2), ("0+3/n3", 2)), 6, (False, True, False)),
        ((("3+0/n3", 2), ("1+2/n3", 2), ("1+2/n3", 2)), 6, (False, True, True)),
        ((("2+1/n3", 2), ("2+1/n3", 2), ("1+2/n3", 2)), 6, (True, True, True)),
    ]
    elapsed = time.monotonic() - start
    ok = unencoded == expected_unencoded and encoded == expected_encoded
    report(4, "both reference assignment tables regenerate exactly",
           ok and elapsed < 5.0, f"{elapsed:.2f}s")
    assert unencoded == expected_unencoded
    assert encoded == expected_encoded
    assert elapsed < 5.0


def test_criterion_5_oracle_agreement():
    start = time.monotonic()
    rng = np.random.default_rng(20250810)
    trials = 1_000_000
    worst_z = 0.0
    checked = 0
    while checked < 20:
        p1 = 0.5 + 0.5 * rng.random()
        p2 = 0.5 + 0.5 * rng.random()
        T2 = INF if rng.random() < 0.3 else 10 ** rng.uniform(-5.0, -3.5)
        dwell = float(rng.uniform(0.0, 1e-5))
        params = FidelityParams((p1, p2), (dwell, 0.0), T2)
        if checked % 2 == 0:
            n = int(rng.choice([3, 5, 7]))
            i = int(rng.integers(0, n + 1))
            cfg = Configuration((i, n - i), QRS(n))
        else:
            size = int(rng.integers(1, 6))
            i = int(rng.integers(0, size + 1))
            cfg = Configuration((i, size - i), Unencoded(int(rng.choice([3, 7]))))
        analytic = configuration_fidelity(cfg, params)
        est = simulate(TrialPlan(cfg, params, trials, int(rng.integers(0, 2**62))))
        if est.std_error > 0.0:
            z = abs(analytic - est.mean) / est.std_error
        else:
            z = 0.0 if analytic == est.mean else INF
        worst_z = max(worst_z, z)
        assert abs(analytic - est.mean) <= max(4 * est.std_error, 1e-12), (
            cfg.label, analytic, est.mean, est.std_error,
        )
        checked += 1
    elapsed = time.monotonic() - start
    ok = elapsed < 120.0
    report(5, "analytic engine agrees with the Monte Carlo oracle (20 sets, 1e6 trials)",
           ok, f"worst z {worst_z:.2f}, {elapsed:.1f}s")
    assert elapsed < 120.0


def test_criterion_6_below_threshold_behavior():
    start = time.monotonic()
    p1, p2, dwell = 0.95, 0.945, 6.159e-7
    t2_dagger = t2_threshold(u7(4, 1), u7(0, 5), p1, p2, dwell)
    mixed = [u7(4, 1), u7(3, 2), u7(2, 3), u7(1, 4)]

    low = two_path_params(p1, p2, dwell, 0.5 * t2_dagger)
    floor = min(
        configuration_fidelity(u7(5, 0), low), configuration_fidelity(u7(0, 5), low)
    )
    below_ok = all(configuration_fidelity(c, low) < floor for c in mixed)

    high = two_path_params(p1, p2, dwell, 2.0 * t2_dagger)
    above_ok = configuration_fidelity(u7(4, 1), high) > configuration_fidelity(
        u7(0, 5), high
    )
    elapsed = time.monotonic() - start
    ok = below_ok and above_ok and elapsed < 1.0
    report(6, "aggregation loses below the coherence threshold and wins above",
           ok, f"T2-dagger {t2_dagger:.3e}s, {elapsed:.2f}s")
    assert below_ok and above_ok
    assert elapsed < 1.0


def test_criterion_7_minimal_gap_soft_boundaries():
    # Soft criterion: the stored-qudit error model behind the finite-T2
    # curves is committed, not taken from a published formula, so a miss
    # here produces a deviation report instead of a build failure.
    pairs = [
        (qrs(3, 4, 7), qrs(2, 1, 3)),
        (qrs(2, 5, 7), qrs(3, 0, 3)),
        (qrs(3, 2, 5), qrs(2, 3, 5)),
    ]
    segments = minimal_gap_segments(pairs, 0.9, 0.65, 0.95, T2_s=INF)
    boundaries = [seg[2] for seg in segments[:-1]]
    ok = (
        len(segments) == 3
        and abs(boundaries[0] - 0.71) <= 0.03
        and abs(boundaries[1] - 0.81) <= 0.03
    )
    report(7, "restricted-regime segment boundaries near 0.71 and 0.81 (soft)",
           ok, "boundaries " + ", ".join(f"{b:.4f}" for b in boundaries))
    if not ok:
        pytest.xfail(
            "model deviation: minimal-gap boundaries "
            f"{boundaries} fall outside 0.71/0.81 +- 0.03 under the "
            "committed finite-coherence model; see the segment table "
            "emitted by the gap figure for the as-built values"
        )


def test_criterion_8_asymptotic_regime():
    start = time.monotonic()
    dwell = 1e-6
    worst = 0.0
    configs = [
        cfg
        for row in enumerate_encoded(CAP, {7, 5, 3})
        for cfg, _ in row.slots
    ]
    for cfg in configs:
        for p2 in (0.6, 0.75, 0.9):
            finite = encoded_fidelity(cfg, FidelityParams((0.9, p2), (dwell, 0.0), 1e-3))
            ideal = encoded_fidelity(cfg, FidelityParams((0.9, p2), (dwell, 0.0), INF))
            if ideal > 0:
                worst = max(worst, abs(finite - ideal) / ideal)
    elapsed = time.monotonic() - start
    ok = worst <= 0.01 and elapsed < 1.0
    report(8, "encoded fidelities at T2 = 1 ms sit within 1% of ideal memories",
           ok, f"worst rel dev {worst:.4%}, {elapsed:.2f}s")
    assert worst <= 0.01
    assert elapsed < 1.0


def test_criterion_9_router_protocol_properties():
    start = time.monotonic()
    rng = np.random.default_rng(90210)
    for trial in range(100):
        schedule = []
        for i in range(int(rng.integers(2, 10))):
            slot = int(rng.integers(0, 5))
            if rng.random() < 0.5:
                n = int(rng.choice([3, 5, 7]))
                coding, size = QRS(n), n
            else:
                coding = Unencoded(int(rng.choice([3, 7])))
                size = int(rng.integers(1, 6))
            regime = Balanced() if rng.random() < 0.4 else Greedy()
            threshold = None if rng.random() < 0.7 else float(rng.uniform(0.2, 0.9))
            schedule.append(
                (slot, UserRequest(f"u{i}", "R", coding, size, regime, threshold))
            )
        p1 = float(rng.uniform(0.7, 1.0))
        p2 = float(rng.uniform(0.5, 0.95))
        T2 = float(10 ** rng.uniform(-5, -2))
        limit = int(rng.integers(0, 4)) if trial % 2 else 8

        def fresh():
            return RouterState(
                route=make_route(p1, p2),
                capacity=CapacityModel((5, 5), 9),
                receiver_T2_s=T2,
                queue_limit_slots=limit,
            )

        state = fresh()
        log = run(state, schedule, slots=5)
        # termination: exactly one terminal event per request
        terminals = Counter(
            e.user_id for e in log if e.kind in (EventKind.ASSIGNED, EventKind.DENIED)
        )
        assert terminals == Counter(f"u{i}" for i in range(len(schedule)))
        # conservation: per-channel dimension products within capacity
        for path_channels in state.ledger.channels:
            for channel in path_channels:
                for slot in range(30):
                    product = 1
                    for res in channel:
                        if res.active(slot):
                            product *= res.dim_product
                    assert product <= 9
        # determinism: replay equality
        assert run(fresh(), schedule, slots=5) == log
        # promised fidelities recompute exactly
        params = state.params
        for e in log:
            if e.kind == EventKind.ASSIGNED:
                again = configuration_fidelity(
                    parse_config_label(e.configuration), params
                )
                assert abs(again - e.fidelity) <= 1e-12
    elapsed = time.monotonic() - start
    ok = elapsed < 30.0
    report(9, "router conserves channels, terminates, replays deterministically",
           ok, f"100 schedules, {elapsed:.1f}s")
    assert elapsed < 30.0
