"""Arc-based iterative algorithms.

Instead of growing trip sets, these fix bus arcs permanently: each
iteration solves the fixed-demand problem, decomposes the newly opened
arcs into elementary directed cycles (a cycle is itself a weakly
connected design increment), evaluates adding each cycle to the fixed
design, and keeps the best one if it improves the incumbent. The
evaluation sequence is therefore strictly decreasing and the fixed
design grows monotonically, which is what makes expansion rule (d)
safe: a trip whose travel-time upper bound under the current design
already beats its tolerance keeps adopting every later design.

Expansion rules, applied to the latent trips after each fixing step:
    a  every adopter of the current design
    b  adopters whose route is profitable (shuttle cost <= ticket)
    c  adopters not served by a single direct shuttle leg
    d  adopters whose worst-case future time UB stays adoptable
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import networkx as nx

from .adoption import design_objective, eval_design
from .instance import Instance, Trip
from .router import Design, Route, route_batch
from .trace import HeuristicTrace
from .trip_heuristics import _DfdCache

RULES = ("a", "b", "c", "d")


class CycleCapError(RuntimeError):
    """Too many elementary cycles; use a smaller expansion step."""


@dataclass(frozen=True)
class Cycle:
    """An elementary directed cycle, canonicalized to start at its
    smallest hub."""

    hubs: tuple

    def __post_init__(self):
        lo = self.hubs.index(min(self.hubs))
        object.__setattr__(self, "hubs", self.hubs[lo:] + self.hubs[:lo])

    @property
    def arcs(self) -> tuple:
        seq = self.hubs
        return tuple((seq[i], seq[(i + 1) % len(seq)]) for i in range(len(seq)))

    def __len__(self):
        return len(self.hubs)


def find_cycles(arcs, cap: int = 100_000) -> list:
    """All elementary directed cycles of an arc set, each reported once,
    ordered by (length, hub sequence)."""
    g = nx.DiGraph()
    g.add_edges_from(arcs)
    out = []
    for nodes in nx.simple_cycles(g):
        out.append(Cycle(tuple(nodes)))
        if len(out) > cap:
            raise CycleCapError(
                f"more than {cap} elementary cycles; use a smaller expansion step"
            )
    out.sort(key=lambda c: (len(c), c.hubs))
    return out


def adoption_ub(trip: Trip, r: Route, inst: Instance) -> float:
    """Upper bound on the trip's travel time under any design containing
    the one that produced ``r``. Undefined at theta = 0."""
    theta = inst.params.theta
    if theta == 0.0:
        raise ValueError("travel-time bound undefined at theta = 0")
    scale = (1.0 - theta) / theta * inst.params.omega
    sidx = inst.stop_index
    o, d = sidx[trip.origin], sidx[trip.destination]
    hub_pos = [sidx[h] for h in inst.hubs]
    minsum = min(float(inst.dist[o, h]) for h in hub_pos) + min(
        float(inst.dist[h, d]) for h in hub_pos
    )
    span = r.bus_span
    if span is not None:
        m, n = span
        detour = float(inst.dist[o, sidx[m]] + inst.dist[sidx[n], d]) - minsum
        return r.f + scale * detour
    return max(r.f, r.f + scale * (float(inst.dist[o, d]) - minsum))


def expand(rule: str, latent, design: Design, routes, inst: Instance) -> set:
    """Trip ids admitted by the given rule; ``routes`` align with
    ``latent`` and were computed under ``design``."""
    if rule not in RULES:
        raise ValueError(f"unknown expansion rule {rule!r}")
    out = set()
    for t, r in zip(latent, routes):
        if r.f > t.alpha * t.t_cur:
            continue
        if rule == "b" and r.money > inst.params.ticket:
            continue
        if rule == "c" and r.is_direct_shuttle:
            continue
        if rule == "d" and adoption_ub(t, r, inst) > t.alpha * t.t_cur:
            continue
        out.add(t.id)
    return out


def _arc_stage(inst, rule, state, trace, stage, cache, threads, expanded=False):
    """One greedy fixing phase; mutates state {z_fixed, tbar, B, k}.

    ``expanded`` records whether the current fixed design has already
    had its rule expansion applied. Every fixing step expands right
    after growing the design, so on a normal stop the returned design
    was expanded in the previous iteration; the only gap is stopping
    before any cycle was ever fixed, where the expansion is applied on
    the way out so the reported trip set still covers the returned
    design (the basis of the correct rejection guarantee).
    """
    latent = inst.latent_trips
    while True:
        t0 = time.perf_counter()
        sol = cache.solve(state["tbar"], fixed=state["z_fixed"].open_arcs)
        unfixed = sol.design.open_arcs - state["z_fixed"].open_arcs
        cycles = find_cycles(unfixed)
        if not cycles:
            if not expanded:
                routes = route_batch(latent, state["z_fixed"], threads=threads)
                state["tbar"] = state["tbar"] | expand(
                    rule, latent, state["z_fixed"], routes, inst
                )
            ev = eval_design(inst, state["z_fixed"], state["tbar"], threads=threads)
            trace.add(
                state["k"], stage, len(state["tbar"]), state["z_fixed"],
                ev.objective, len(ev.adopters), time.perf_counter() - t0,
            )
            return
        best_obj = None
        best_cycle = None
        for c in cycles:  # pre-sorted: ties go to the shorter, lex-smaller cycle
            obj = design_objective(
                inst, state["z_fixed"].with_arcs(c.arcs), threads=threads
            )
            if best_obj is None or obj < best_obj:
                best_obj, best_cycle = obj, c
        if best_obj >= state["B"]:
            ev = eval_design(inst, state["z_fixed"], state["tbar"], threads=threads)
            trace.add(
                state["k"], stage, len(state["tbar"]), state["z_fixed"],
                ev.objective, len(ev.adopters), time.perf_counter() - t0,
            )
            return
        state["B"] = best_obj
        state["z_fixed"] = state["z_fixed"].with_arcs(best_cycle.arcs)
        routes = route_batch(latent, state["z_fixed"], threads=threads)
        state["tbar"] = state["tbar"] | expand(rule, latent, state["z_fixed"], routes, inst)
        expanded = True
        ev = eval_design(inst, state["z_fixed"], state["tbar"], threads=threads)
        trace.add(
            state["k"], stage, len(state["tbar"]), state["z_fixed"],
            ev.objective, len(ev.adopters), time.perf_counter() - t0,
        )
        state["k"] += 1


def arc_s1(inst: Instance, rule: str = "a", fixed_init=(), threads: int = 1):
    """Single-stage arc-based greedy. Returns (design, trace)."""
    if rule not in RULES:
        raise ValueError(f"unknown expansion rule {rule!r}")
    z0 = Design(inst, frozenset(tuple(a) for a in fixed_init) | inst.fixed_arcs)
    core_ids = frozenset(t.id for t in inst.trips if not t.is_latent)
    state = {"z_fixed": z0, "tbar": core_ids, "B": float("inf"), "k": 0}
    trace = HeuristicTrace()
    cache = _DfdCache(inst, threads=threads)
    _arc_stage(inst, rule, state, trace, 1, cache, threads)
    return state["z_fixed"], trace.finish(state["z_fixed"], state["tbar"])


def arc_s2(
    inst: Instance,
    rule_stage1: str = "d",
    rule_stage2: str = "a",
    fixed_init=(),
    threads: int = 1,
):
    """Two-stage extension: a conservative expansion rule to convergence,
    then a faster one continuing from the resulting fixed design and
    trip set. Stage one must not be rule (a), which subsumes the rest."""
    if rule_stage1 not in ("b", "c", "d"):
        raise ValueError("stage-1 rule must be one of b, c, d")
    if rule_stage2 not in RULES:
        raise ValueError(f"unknown expansion rule {rule_stage2!r}")
    z0 = Design(inst, frozenset(tuple(a) for a in fixed_init) | inst.fixed_arcs)
    core_ids = frozenset(t.id for t in inst.trips if not t.is_latent)
    state = {"z_fixed": z0, "tbar": core_ids, "B": float("inf"), "k": 0}
    trace = HeuristicTrace()
    cache = _DfdCache(inst, threads=threads)
    _arc_stage(inst, rule_stage1, state, trace, 1, cache, threads)
    # hand the stage-2 rule a first look at the converged design so the
    # second phase starts from an expanded trip set rather than re-solving
    # the exact fixed point stage 1 stopped at
    latent = inst.latent_trips
    routes = route_batch(latent, state["z_fixed"], threads=threads)
    state["tbar"] = state["tbar"] | expand(
        rule_stage2, latent, state["z_fixed"], routes, inst
    )
    _arc_stage(inst, rule_stage2, state, trace, 2, cache, threads, expanded=True)
    return state["z_fixed"], trace.finish(state["z_fixed"], state["tbar"])
