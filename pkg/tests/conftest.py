"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's search code: routes
are checked against exhaustive simple-path enumeration over the full
stop graph, and cycle listings against a depth-first enumeration of
elementary circuits.
"""

import numpy as np
import pytest

from odmts import (
    CostParams,
    Design,
    GeneratorConfig,
    Instance,
    Trip,
    TripClass,
    generate_synthetic,
)
from odmts.router import BUS, SHUTTLE, weights_of


# -- the worked 4-stop example ------------------------------------------


def example_matrices():
    t = np.zeros((4, 4))
    d = np.zeros((4, 4))

    def sym(m, i, j, v):
        m[i, j] = v
        m[j, i] = v

    sym(t, 0, 1, 5); sym(t, 1, 2, 10); sym(t, 2, 3, 4)
    sym(t, 0, 3, 25); sym(t, 0, 2, 30); sym(t, 1, 3, 30)
    sym(d, 0, 1, 2); sym(d, 1, 2, 8); sym(d, 2, 3, 1.5)
    sym(d, 0, 3, 12); sym(d, 0, 2, 15); sym(d, 1, 3, 15)
    return t, d


def make_example_instance(beta_per_arc=2.0, trips=None, ticket=2.5):
    """Four stops on a corridor, hubs {1, 2}, theta = 0.5, omega = 1.
    bus_rate is scaled so each hub arc costs ``beta_per_arc`` dollars."""
    t, d = example_matrices()
    # beta = (1-theta) * rate * n * d_12 = 0.5 * rate * 2 * 8
    rate = beta_per_arc / (0.5 * 2.0 * 8.0)
    params = CostParams(
        theta=0.5, omega=1.0, bus_rate=rate, buses_per_leg=2.0,
        wait=5.0, ticket=ticket, shuttle_between_hubs=False,
    )
    if trips is None:
        trips = (Trip(id=0, origin=0, destination=3, riders=1),)
    return Instance(stops=(0, 1, 2, 3), hubs=(1, 2), time=t, dist=d,
                    trips=tuple(trips), params=params)


@pytest.fixture
def example_instance():
    return make_example_instance()


# -- random Euclidean instances ------------------------------------------


def tiny_config(n_stops=9, n_hubs=3, core=4, mid=4, high=3, max_riders=4):
    """Cost regime calibrated so small instances open arcs: cheap buses,
    modest rider counts."""
    return GeneratorConfig(
        stops=n_stops,
        hubs=n_hubs,
        classes=(
            TripClass(core, None, max_riders),
            TripClass(mid, 2.0, max_riders),
            TripClass(high, 1.5, max_riders),
        ),
        square_km=10.0,
        speed_kmh=30.0,
        theta=0.001,
        omega=1.0,
        bus_rate=0.9,
        buses_per_leg=4.0,
        wait=5.0,
        ticket=2.5,
    )


def tiny_instance(seed, **kw):
    return generate_synthetic(tiny_config(**kw), seed=seed)


def random_design(inst, rng, base=()):
    """A random weakly connected design: a union of arc-disjoint cycles
    on top of ``base`` (itself assumed balanced)."""
    hubs = list(inst.hubs)
    cand = set(inst.candidate_arcs)
    arcs = set(inst.fixed_arcs) | set(base)
    for _ in range(rng.integers(0, 3)):
        k = int(rng.integers(2, min(4, len(hubs)) + 1))
        cyc = list(rng.choice(hubs, size=k, replace=False))
        new = {(cyc[i], cyc[(i + 1) % k]) for i in range(k)}
        if new <= cand and not (new & arcs):
            arcs |= new
    return Design(inst, frozenset(arcs))


# -- independent route oracle ---------------------------------------------


def enumerate_routes(trip, design):
    """Every simple multimodal path from origin to destination, as
    (g, f, legs, stop_seq, mode_seq) tuples. Modes are enumerated
    explicitly, so a hub pair served by both an open bus arc and a legal
    shuttle leg appears twice."""
    inst = design.instance
    w = weights_of(inst)
    sidx = inst.stop_index
    hidx = inst.hub_index
    hubs = set(inst.hubs)
    allowed_shuttle_between_hubs = inst.params.shuttle_between_hubs
    o, d = trip.origin, trip.destination
    out = []

    def extend(u, visited, g, f, legs, seq, modes):
        if u == d:
            out.append((g, f, legs, seq, modes))
            return
        ui = sidx[u]
        for v in inst.stops:
            if v in visited:
                continue
            vi = sidx[v]
            both = u in hubs and v in hubs
            shuttle_ok = (not both) or allowed_shuttle_between_hubs or (u == o and v == d)
            if shuttle_ok:
                extend(
                    v, visited | {v},
                    g + float(w.gamma[ui, vi]), f + float(inst.time[ui, vi]),
                    legs + 1, seq + (v,), modes + (SHUTTLE,),
                )
            if both and (u, v) in design.open_arcs:
                extend(
                    v, visited | {v},
                    g + float(w.tau[hidx[u], hidx[v]]),
                    f + float(inst.time[ui, vi] + inst.wait_matrix[hidx[u], hidx[v]]),
                    legs + 1, seq + (v,), modes + (BUS,),
                )

    extend(o, {o}, 0.0, 0.0, 0, (o,), ())
    return out


MODE_ORDER = {BUS: 0, SHUTTLE: 1}


def oracle_route(trip, design):
    """Lexicographically best enumerated route as (g, f, legs sequence)."""
    best = min(
        enumerate_routes(trip, design),
        key=lambda r: (r[0], r[1], r[2], r[3], tuple(MODE_ORDER[m] for m in r[4])),
    )
    g, f, legs, seq, modes = best
    leg_list = tuple((modes[i], seq[i], seq[i + 1]) for i in range(legs))
    return g, f, leg_list


# -- independent cycle oracle ----------------------------------------------


def brute_cycles(arcs):
    """Elementary directed cycles by DFS from each minimal node."""
    arcs = set(arcs)
    nodes = sorted({u for u, _ in arcs} | {v for _, v in arcs})
    found = set()

    def walk(start, u, path):
        for (a, b) in arcs:
            if a != u:
                continue
            if b == start and len(path) >= 1:
                found.add(tuple(path))
            elif b not in path and b > start:
                walk(start, b, path + [b])

    for s in nodes:
        walk(s, s, [s])
    return sorted(found, key=lambda c: (len(c), c))
