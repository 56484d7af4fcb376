import math
from itertools import combinations

import pytest

from aqnet.assignments import enumerate_encoded, enumerate_unencoded
from aqnet.fidelity import (
    QRS,
    Configuration,
    Unencoded,
    configuration_fidelity,
    memory_depolarization_prob,
)
from aqnet.netmodel import ParameterError
from aqnet.policy import (
    Balanced,
    Greedy,
    Restricted,
    crossing_point,
    fidelity_gap_table,
    minimal_gap_segments,
    select,
    t2_threshold,
    two_path_params,
    unencoded_common_crossing,
)

INF = math.inf


def qrs(i, j, n):
    return Configuration((i, j), QRS(n))


def u7(i, j):
    return Configuration((i, j), Unencoded(7))


class TestSelect:
    def test_greedy_picks_single_path_user(self, reference_cap):
        rows = enumerate_unencoded(reference_cap, 5, {7, 3})
        decision = select(Greedy(), rows, two_path_params(0.95, 0.9))
        assert decision.chosen_row.slots[0][0].label == "5+0/u7"
        best_user = decision.focus_users[0]
        assert decision.per_user_fidelity[best_user] == pytest.approx(0.95**5)

    def test_balanced_picks_max_users(self, reference_cap):
        rows = enumerate_unencoded(reference_cap, 5, {7, 3})
        decision = select(Balanced(fair=True), rows, two_path_params(0.95, 0.9))
        assert decision.chosen_row.served_users == 4
        assert decision.rationale == "balanced-fair-max-users"

    def test_greedy_encoded_crossing_sides(self, reference_cap):
        rows = enumerate_encoded(reference_cap, {7, 5, 3})
        above = select(Greedy(), rows, two_path_params(0.9, 0.8))
        assert above.chosen_row.slots[0][0].label == "5+2/n7"
        below = select(Greedy(), rows, two_path_params(0.9, 0.6))
        assert below.chosen_row.slots[0][0].label != "5+2/n7"
        best = max(below.per_user_fidelity.values())
        assert best == pytest.approx(0.99144, abs=1e-9)

    def test_restricted_minimizes_gap(self, reference_cap):
        rows = enumerate_encoded(reference_cap, {7, 5, 3})
        params = two_path_params(0.9, 0.68)
        decision = select(Restricted(max_users=2), rows, params)
        assert len(decision.focus_users) == 2
        fids = [decision.per_user_fidelity[u] for u in decision.focus_users]
        got_gap = abs(fids[0] - fids[1])
        # exhaustive check over every same-row slot pair
        best_gap = min(
            abs(
                configuration_fidelity(a, params)
                - configuration_fidelity(b, params)
            )
            for row in rows
            for (a, _), (b, _) in combinations(row.slots, 2)
        )
        assert got_gap == pytest.approx(best_gap, abs=1e-15)

    def test_greedy_argmax_invariance(self, reference_cap):
        # the greedy choice only depends on the ordering of fidelities,
        # so any strictly monotone rescaling leaves it unchanged
        rows = enumerate_encoded(reference_cap, {7, 5, 3})
        params = two_path_params(0.9, 0.8)
        base = select(Greedy(), rows, params)
        ranked = sorted(
            {
                configuration_fidelity(cfg, params)
                for row in rows
                for cfg, _ in row.slots
            }
        )
        best = max(base.per_user_fidelity.values())
        assert best == ranked[-1]

    def test_deterministic_tie_break(self, reference_cap):
        rows = enumerate_unencoded(reference_cap, 5, {7, 3})
        params = two_path_params(0.9, 0.9)  # mirror symmetric: many ties
        a = select(Greedy(), rows, params)
        b = select(Greedy(), rows, params)
        assert a == b

    def test_empty_rows_rejected(self):
        with pytest.raises(ParameterError):
            select(Greedy(), [], two_path_params(0.9, 0.8))


class TestCrossingPoint:
    def test_greedy_crossing_at_075(self):
        roots = crossing_point(qrs(5, 2, 7), qrs(5, 0, 5), 0.9, 0.5, 0.99)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(0.75, abs=1e-6)

    def test_closed_form_family(self):
        for p1 in (0.8, 0.9, 0.95):
            x = math.sqrt(p1 / (1 - p1))
            expected = x / (1 + x)
            roots = crossing_point(qrs(5, 2, 7), qrs(5, 0, 5), p1, 0.5, 0.99)
            assert roots[0] == pytest.approx(expected, abs=1e-6)

    def test_identical_configs_degenerate(self):
        assert crossing_point(qrs(5, 2, 7), qrs(5, 2, 7), 0.9, 0.5, 0.99) == []

    def test_residual_below_tolerance(self):
        roots = crossing_point(qrs(5, 2, 7), qrs(5, 0, 5), 0.9, 0.5, 0.99)
        pr = two_path_params(0.9, roots[0])
        gap = configuration_fidelity(qrs(5, 2, 7), pr) - configuration_fidelity(
            qrs(5, 0, 5), pr
        )
        assert abs(gap) <= 1e-9

    def test_bad_bracket(self):
        with pytest.raises(ParameterError):
            crossing_point(qrs(5, 2, 7), qrs(5, 0, 5), 0.9, 0.9, 0.5)


class TestT2Threshold:
    def test_reference_threshold(self):
        t2 = t2_threshold(u7(4, 1), u7(0, 5), 0.95, 0.945, 6.159e-7)
        assert t2 == pytest.approx(1.0e-4, rel=0.01)

    def test_common_crossing_shared_by_splits(self):
        values = [
            t2_threshold(u7(*c), u7(0, 5), 0.95, 0.945, 6.159e-7)
            for c in ((4, 1), (3, 2), (2, 3), (1, 4))
        ]
        spread = max(values) - min(values)
        assert spread / values[0] < 1e-9

    def test_no_crossing_returns_none(self):
        assert t2_threshold(u7(4, 1), u7(0, 5), 0.9, 0.95, 6.159e-7) is None

    def test_encoded_threshold_exists_above_crossing(self):
        t2 = t2_threshold(qrs(5, 2, 7), qrs(5, 0, 5), 0.9, 0.8, 1e-6)
        assert t2 is not None
        pr_above = two_path_params(0.9, 0.8, 1e-6, 10 * t2)
        pr_below = two_path_params(0.9, 0.8, 1e-6, t2 / 10)
        assert configuration_fidelity(qrs(5, 2, 7), pr_above) > configuration_fidelity(
            qrs(5, 0, 5), pr_above
        )
        assert configuration_fidelity(qrs(5, 2, 7), pr_below) < configuration_fidelity(
            qrs(5, 0, 5), pr_below
        )


class TestCommonCrossing:
    def test_reference_value(self):
        pd = unencoded_common_crossing(0.95, 0.945, 7)
        assert pd == pytest.approx(0.0061404, abs=1e-6)
        assert pd == pytest.approx(7 / 6 * (1 - 0.945 / 0.95), abs=1e-12)

    def test_equal_probabilities(self):
        assert unencoded_common_crossing(0.9, 0.9, 7) == 0.0

    def test_boundary(self):
        assert unencoded_common_crossing(0.9, 0.45, 2) == pytest.approx(1.0)

    def test_no_physical_crossing(self):
        assert unencoded_common_crossing(0.9, 0.95, 7) is None
        assert unencoded_common_crossing(0.9, 0.1, 7) is None

    def test_solver_agreement(self):
        # closed form against the bisection solver via the p_d(T2*) map
        dwell = 6.159e-7
        for p1 in (0.9, 0.95, 0.99):
            p2 = p1 - 0.005
            closed = unencoded_common_crossing(p1, p2, 7)
            t2 = t2_threshold(u7(4, 1), u7(0, 5), p1, p2, dwell)
            solved = memory_depolarization_prob(dwell, t2)
            assert solved == pytest.approx(closed, abs=1e-6)


class TestGapTable:
    PAIRS = [
        (qrs(3, 4, 7), qrs(2, 1, 3)),
        (qrs(2, 5, 7), qrs(3, 0, 3)),
        (qrs(3, 2, 5), qrs(2, 3, 5)),
    ]

    def test_symmetric_point_exact(self):
        table = fidelity_gap_table(
            [(qrs(3, 2, 5), qrs(2, 3, 5))], 0.9, [0.9], T2_s=INF
        )
        pr = two_path_params(0.9, 0.9)
        expected = abs(
            configuration_fidelity(qrs(3, 2, 5), pr)
            - configuration_fidelity(qrs(2, 3, 5), pr)
        )
        assert table.gaps[0][0] == pytest.approx(expected, abs=1e-15)
        assert expected == 0.0  # mirror pair at p2 = p1

    def test_identical_pair_zero(self):
        table = fidelity_gap_table(
            [(qrs(3, 2, 5), qrs(3, 2, 5))], 0.9, [0.6, 0.8], T2_s=INF
        )
        assert all(g == (0.0,) for g in table.gaps)

    def test_three_segment_structure(self):
        segments = minimal_gap_segments(self.PAIRS, 0.9, 0.65, 0.95, T2_s=INF)
        assert len(segments) == 3
        labels = [s[0] for s in segments]
        assert labels == ["3+4/n7|2+1/n3", "2+5/n7|3+0/n3", "3+2/n5|2+3/n5"]
        b1, b2 = segments[0][2], segments[1][2]
        assert b1 == pytest.approx(0.71, abs=0.03)
        assert b2 == pytest.approx(0.81, abs=0.03)

    def test_argmin_helper(self):
        table = fidelity_gap_table(self.PAIRS, 0.9, [0.66, 0.75, 0.9], T2_s=INF)
        assert table.argmin_pair(0) == 0
        assert table.argmin_pair(1) == 1
        assert table.argmin_pair(2) == 2


class TestBelowThresholdBehavior:
    def test_aggregation_not_convenient_below_crossing(self):
        # below the common crossing every mixed split loses to both
        # single-path splits; above it the first mixed split leads 0+5
        p1, p2, dwell = 0.95, 0.945, 6.159e-7
        t2_dagger = t2_threshold(u7(4, 1), u7(0, 5), p1, p2, dwell)
        mixed = [u7(4, 1), u7(3, 2), u7(2, 3), u7(1, 4)]

        pr_low = two_path_params(p1, p2, dwell, 0.5 * t2_dagger)
        floor = min(
            configuration_fidelity(u7(5, 0), pr_low),
            configuration_fidelity(u7(0, 5), pr_low),
        )
        for cfg in mixed:
            assert configuration_fidelity(cfg, pr_low) < floor

        pr_high = two_path_params(p1, p2, dwell, 2.0 * t2_dagger)
        assert configuration_fidelity(u7(4, 1), pr_high) > configuration_fidelity(
            u7(0, 5), pr_high
        )
