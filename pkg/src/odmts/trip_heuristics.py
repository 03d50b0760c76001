"""Trip-based iterative algorithms.

All three run the fixed-demand solver on a growing or re-selected trip
set and use the choice model to decide which latent trips to consider
next, ranking candidates by net cost (serving cost minus ticket, ties
by trip id).

* greedy adoption (rho-GRAD): permanently absorbs the rho cheapest
  adopters each round; stops when nothing outside the absorbed set
  adopts, so the final design rejects every excluded trip.
* greedy rejection (eta-GRRE): tracks a growing rejection set and a
  quota m (+eta per round) of adopters to keep; returns the best design
  seen because the trip set does not grow monotonically and designs
  can oscillate.
* combined (rho-GAGR): the adoption loop with each inner design
  produced by a full greedy-rejection run seeded at the absorbed set,
  trading time for a much wider design search.
"""

from __future__ import annotations

import time

from .adoption import eval_design, net_cost
from .dfd import CutPool, solve_dfd
from .instance import Instance
from .router import route
from .trace import HeuristicTrace


def default_step(inst: Instance) -> int:
    """Step size scaling with latent demand: one twentieth, at least 1."""
    return max(1, len(inst.latent_trips) // 20)


class _DfdCache:
    """Memoizes fixed-demand solves within one heuristic run and shares
    one cut pool across them; identical (trip set, fixed arcs) inputs
    always yield identical solutions."""

    def __init__(self, inst, threads=1):
        self.inst = inst
        self.threads = threads
        self.hits = {}
        self.pool = CutPool()

    def solve(self, tset, fixed=()):
        key = (frozenset(tset), frozenset(fixed))
        if key not in self.hits:
            self.hits[key] = solve_dfd(
                self.inst, key[0], fixed=key[1], threads=self.threads,
                cut_pool=self.pool,
            )
        return self.hits[key]


def _ranked_adopters(inst, design, candidates, adopters):
    """Adopting candidates ordered by (net cost, trip id)."""
    picked = [t for t in candidates if t.id in adopters]
    return sorted(picked, key=lambda t: (net_cost(route(t, design), inst), t.id))


def rho_grad(
    inst: Instance,
    rho: int | None = None,
    fixed=(),
    threads: int = 1,
    max_iter: int | None = None,
    _cache: _DfdCache | None = None,
):
    """Greedy adoption. Returns (design, tset, trace)."""
    rho = default_step(inst) if rho is None else int(rho)
    if rho < 1:
        raise ValueError("rho must be >= 1")
    latent = inst.latent_trips
    core_ids = frozenset(t.id for t in inst.trips if not t.is_latent)
    cap = max_iter if max_iter is not None else len(latent) // rho + 10
    cache = _cache or _DfdCache(inst, threads=threads)
    trace = HeuristicTrace()
    absorbed = set()
    k = 0
    while k <= cap:
        t0 = time.perf_counter()
        tset = core_ids | absorbed
        sol = cache.solve(tset, fixed=fixed)
        ev = eval_design(inst, sol.design, tset, threads=threads)
        trace.add(
            k, 1, len(tset), sol.design, ev.objective, len(ev.adopters),
            time.perf_counter() - t0,
        )
        candidates = [t for t in latent if t.id not in absorbed]
        ranked = _ranked_adopters(inst, sol.design, candidates, ev.adopters)
        if not ranked:
            return sol.design, frozenset(tset), trace.finish(sol.design, tset)
        absorbed.update(t.id for t in ranked[:rho])
        k += 1
    raise RuntimeError(f"greedy adoption exceeded {cap} iterations")


def eta_grre(
    inst: Instance,
    eta: int | None = None,
    fixed=(),
    start_tset=None,
    threads: int = 1,
    max_iter: int = 100,
    detect_cycles: bool = False,
    _cache: _DfdCache | None = None,
):
    """Greedy rejection. Returns (design, trace); trace.tset is the trip
    set that generated the returned (minimum-objective) design."""
    eta = default_step(inst) if eta is None else int(eta)
    if eta < 1:
        raise ValueError("eta must be >= 1")
    latent = inst.latent_trips
    core_ids = frozenset(t.id for t in inst.trips if not t.is_latent)
    cache = _cache or _DfdCache(inst, threads=threads)
    trace = HeuristicTrace()
    rejected = set()
    m = 0
    k = 0
    tbar = frozenset(start_tset) if start_tset is not None else core_ids
    best_obj = float("inf")
    best_design = None
    best_tset = None
    prev_key = None
    seen_keys = {}
    while k <= max_iter:
        t0 = time.perf_counter()
        sol = cache.solve(tbar, fixed=fixed)
        ev = eval_design(inst, sol.design, tbar, threads=threads)
        trace.add(
            k, 1, len(tbar), sol.design, ev.objective, len(ev.adopters),
            time.perf_counter() - t0,
        )
        if ev.objective < best_obj:
            best_obj = ev.objective
            best_design = sol.design
            best_tset = tbar
        candidates = [t for t in latent if t.id not in rejected]
        adopting = []
        for t in candidates:
            if t.id in ev.adopters:
                adopting.append(t)
            else:
                rejected.add(t.id)
        m += eta
        ranked = sorted(
            adopting, key=lambda t: (net_cost(route(t, sol.design), inst), t.id)
        )
        key = sol.design.key()
        stable = k >= 2 and prev_key == key and (m - eta) >= len(adopting)
        # optional extension: a design recurring non-consecutively marks an
        # oscillation that the stability test alone would never catch
        oscillating = detect_cycles and k >= 2 and prev_key != key and key in seen_keys
        if stable or oscillating:
            return best_design, trace.finish(best_design, best_tset)
        seen_keys[key] = k
        tbar = core_ids | {t.id for t in ranked[:m]}
        prev_key = key
        k += 1
    return best_design, trace.finish(best_design, best_tset, truncated=True)


def rho_gagr(
    inst: Instance,
    rho: int | None = None,
    eta: int | None = None,
    fixed=(),
    time_limit: float | None = None,
    threads: int = 1,
    max_iter: int | None = None,
    _cache: _DfdCache | None = None,
):
    """Combined greedy adoption with greedy-rejection subproblems.
    Returns (design, trace) for the minimum-objective inner result."""
    rho = default_step(inst) if rho is None else int(rho)
    eta = default_step(inst) if eta is None else int(eta)
    if rho < 1 or eta < 1:
        raise ValueError("rho and eta must be >= 1")
    latent = inst.latent_trips
    core_ids = frozenset(t.id for t in inst.trips if not t.is_latent)
    cap = max_iter if max_iter is not None else len(latent) // rho + 10
    cache = _cache or _DfdCache(inst, threads=threads)
    trace = HeuristicTrace()
    started = time.perf_counter()
    absorbed = set()
    best_obj = float("inf")
    best_design = None
    best_tset = None
    k = 0
    while k <= cap:
        t0 = time.perf_counter()
        tbar = core_ids | absorbed
        design, inner = eta_grre(
            inst, eta=eta, fixed=fixed, start_tset=tbar, threads=threads, _cache=cache
        )
        ev = eval_design(inst, design, inner.tset, threads=threads)
        trace.add(
            k, 1, len(inner.tset), design, ev.objective, len(ev.adopters),
            time.perf_counter() - t0,
        )
        if ev.objective < best_obj:
            best_obj = ev.objective
            best_design = design
            best_tset = inner.tset
        candidates = [t for t in latent if t.id not in absorbed]
        ranked = _ranked_adopters(inst, design, candidates, ev.adopters)
        if not ranked:
            break
        if time_limit is not None and time.perf_counter() - started >= time_limit:
            break
        absorbed.update(t.id for t in ranked[:rho])
        k += 1
    return best_design, trace.finish(best_design, best_tset)
