from types import SimpleNamespace

import pytest

from bianchi.geometry import ford_domain
from bianchi.poincare import build_presentation, cusp_orbits, edge_cycles, pair_faces

SURVEY_DISCRIMINANTS = [-3, -4, -7, -8, -11, -15, -19, -20, -23, -24, -31,
                        -35, -39, -40, -43, -47, -51, -52, -55, -56, -59,
                        -67, -68, -71, -79, -83, -84, -87, -88, -91, -95]


@pytest.fixture(scope="session")
def pipeline():
    """Session cache of the full pipeline per (D, mode)."""
    cache = {}

    def get(D, mode):
        key = (D, str(mode))
        if key not in cache:
            dom = ford_domain(D, mode)
            paired = pair_faces(dom)
            cycles = edge_cycles(paired)
            pres = build_presentation(dom, paired, cycles)
            orbits = cusp_orbits(dom, paired)
            cache[key] = SimpleNamespace(dom=dom, paired=paired, cycles=cycles,
                                         pres=pres, orbits=orbits)
        return cache[key]

    return get
