import math

import pytest

from aqnet.assignments import CapacityModel
from aqnet.netmodel import AggregatedRoute, ChannelSpec, LinkSpec, PathSpec


def make_route(p1=0.95, p2=0.9, L1=10.0, L2=20.0, channels=(5, 5), capacity=9):
    paths = []
    for p, L, n in zip((p1, p2), (L1, L2), channels):
        chs = tuple(ChannelSpec(capacity) for _ in range(n))
        paths.append(PathSpec(links=(LinkSpec(L, chs),), p_override=p))
    return AggregatedRoute(tuple(paths))


@pytest.fixture
def reference_cap():
    """Ten channels of capacity 9, split five per path."""
    return CapacityModel((5, 5), 9)


@pytest.fixture
def two_path_route():
    return make_route()


INF = math.inf
