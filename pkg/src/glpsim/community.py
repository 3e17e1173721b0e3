"""Leaders, cliques and triangles on the simple projection.

Everything here works on the simple projection of the multigraph: loops are
dropped and parallel edges collapse to one.  Adjacency is built on demand
for the vertex sets under study, never as a global matrix.

Leaders are per-block maximum-degree vertices (ties broken toward the
smaller id) selected from the degrees at a reference time, typically the
half-way point of a run twice as long, so that their adjacency can then be
inspected in the later graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import process
from .errors import ParameterError

__all__ = [
    "LeaderSet",
    "leaders",
    "CliqueReport",
    "is_clique",
    "max_clique_topk",
    "count_triangles",
    "simple_edges",
    "GrowthRow",
    "clique_growth_experiment",
]

PAIR_CAP = 10_000


def _slot_count(graph: process.GlpGraph, at_time) -> int:
    t = graph.t if at_time is None else int(at_time)
    if not (0 <= t <= graph.t):
        raise ParameterError(f"time {t} outside [0, {graph.t}]")
    return 2 * (t + 1)


def simple_edges(graph: process.GlpGraph, at_time: int | None = None) -> np.ndarray:
    """Distinct non-loop edges as an (E, 2) array with u < v."""
    ep = graph.endpoints[: _slot_count(graph, at_time)]
    pairs = ep.reshape(-1, 2).astype(np.int64)
    u = pairs.min(axis=1)
    v = pairs.max(axis=1)
    keep = u != v
    key = np.unique(u[keep] * (graph.num_vertices + 1) + v[keep])
    return np.column_stack(divmod(key, graph.num_vertices + 1))


@dataclass(frozen=True)
class LeaderSet:
    m: int
    j_lo: int
    j_hi: int
    t_ref: int
    vertices: np.ndarray
    degrees: np.ndarray


def leaders(
    graph: process.GlpGraph,
    m: int,
    j_lo: int,
    j_hi: int,
    at_time: int | None = None,
) -> LeaderSet:
    """Max-degree vertex of each block ``j_lo .. j_hi`` at the reference time.

    Block ``j`` covers ids ``(j-1)*m + 1 .. j*m``.  Ties go to the smaller
    id.  Every block must be fully populated at the reference time.
    """
    if m < 1:
        raise ParameterError(f"block width must be >= 1, got {m}")
    if not (1 <= j_lo <= j_hi):
        raise ParameterError(f"need 1 <= j_lo <= j_hi, got [{j_lo}, {j_hi}]")
    t_ref = graph.t if at_time is None else int(at_time)
    if j_hi * m > graph.vertex_count_at(t_ref):
        raise ParameterError(
            f"block {j_hi} needs vertex {j_hi * m}, but only "
            f"{graph.vertex_count_at(t_ref)} vertices exist at t={t_ref}"
        )
    deg = graph.degrees_at(t_ref)
    lo = (j_lo - 1) * m + 1
    window = deg[lo : j_hi * m + 1].reshape(j_hi - j_lo + 1, m)
    offsets = window.argmax(axis=1)  # argmax picks the first, hence smallest id
    ids = lo + np.arange(window.shape[0], dtype=np.int64) * m + offsets
    return LeaderSet(
        m=m,
        j_lo=j_lo,
        j_hi=j_hi,
        t_ref=t_ref,
        vertices=ids,
        degrees=deg[ids].astype(np.int64),
    )


# ----------------------------------------------------------------------
# cliques


@dataclass(frozen=True)
class CliqueReport:
    candidate_count: int
    pair_fraction: float
    missing_pairs: tuple[tuple[int, int], ...]
    largest_clique_size: int | None
    sampled: bool


def _induced_masks(graph, ids: np.ndarray, at_time) -> list[int]:
    """Bitmask adjacency rows of the simple projection induced on ``ids``."""
    ep = graph.endpoints[: _slot_count(graph, at_time)]
    pairs = ep.reshape(-1, 2)
    hit = np.isin(pairs[:, 0], ids) & np.isin(pairs[:, 1], ids)
    sub = pairs[hit]
    sub = sub[sub[:, 0] != sub[:, 1]]
    order = np.argsort(ids, kind="stable")
    pos_a = order[np.searchsorted(ids, sub[:, 0], sorter=order)]
    pos_b = order[np.searchsorted(ids, sub[:, 1], sorter=order)]
    masks = [0] * len(ids)
    for a, b in zip(pos_a.tolist(), pos_b.tolist()):
        masks[a] |= 1 << b
        masks[b] |= 1 << a
    return masks


def _greedy_clique_mask(masks: list[int], order) -> int:
    clique = 0
    for v in order:
        if masks[v] & clique == clique:
            clique |= 1 << v
    return clique


def _max_clique_mask(masks: list[int]) -> int:
    """Exact maximum clique on bitmask adjacency, branch and bound.

    Candidates are greedily colored; the color count bounds the clique size
    reachable from a branch, and branches are expanded in reverse color
    order so strong bounds apply first.
    """
    n = len(masks)
    deg_order = sorted(range(n), key=lambda v: -masks[v].bit_count())
    best_mask = _greedy_clique_mask(masks, deg_order)
    best = best_mask.bit_count()

    def expand(r_mask: int, r_size: int, cand: int):
        nonlocal best, best_mask
        order: list[tuple[int, int]] = []
        color = 0
        rest = cand
        while rest:
            color += 1
            q = rest
            while q:
                v = (q & -q).bit_length() - 1
                order.append((v, color))
                bit = 1 << v
                rest ^= bit
                q &= ~(masks[v] | bit)
        for v, color in reversed(order):
            if r_size + color <= best:
                return
            bit = 1 << v
            new_cand = cand & masks[v]
            if new_cand:
                expand(r_mask | bit, r_size + 1, new_cand)
            elif r_size + 1 > best:
                best = r_size + 1
                best_mask = r_mask | bit
            cand ^= bit
        return

    expand(0, 0, (1 << n) - 1)
    return best_mask


def is_clique(
    graph: process.GlpGraph,
    vertices,
    at_time: int | None = None,
    pair_cap: int = PAIR_CAP,
    sample_seed: int = 0,
    exact_cap: int = 128,
) -> CliqueReport:
    """How close a vertex set is to a clique in the simple projection.

    Up to ``pair_cap`` pairs are checked exhaustively; beyond that a uniform
    pair sample of that size estimates the fraction and the report is
    flagged as sampled.  In exact mode the report also carries the largest
    complete subset found (exact up to ``exact_cap`` candidates, greedy
    above).  At most 100 missing pairs are listed.
    """
    ids = np.unique(np.asarray(vertices, dtype=np.int64))
    if ids.size < 1:
        raise ParameterError("empty candidate set")
    if ids.min() < 1 or ids.max() > graph.num_vertices:
        raise ParameterError("candidate ids outside the graph")
    s = int(ids.size)
    npairs = s * (s - 1) // 2
    if npairs == 0:
        return CliqueReport(1, 1.0, (), 1, False)

    if npairs <= pair_cap:
        masks = _induced_masks(graph, ids, at_time)
        missing = []
        present = 0
        for a in range(s):
            row = masks[a]
            for b in range(a + 1, s):
                if row >> b & 1:
                    present += 1
                elif len(missing) < 100:
                    missing.append((int(ids[a]), int(ids[b])))
        if s <= exact_cap:
            largest = _max_clique_mask(masks).bit_count()
        else:
            order = sorted(range(s), key=lambda v: -masks[v].bit_count())
            largest = _greedy_clique_mask(masks, order).bit_count()
        return CliqueReport(s, present / npairs, tuple(missing), largest, False)

    # sampled mode: estimate the fraction from pair_cap uniform pairs
    rng = process.make_rng(sample_seed)
    enc = graph.num_vertices + 1
    ep = graph.endpoints[: _slot_count(graph, at_time)]
    pairs = ep.reshape(-1, 2)
    hit = np.isin(pairs[:, 0], ids) & np.isin(pairs[:, 1], ids)
    sub = pairs[hit].astype(np.int64)
    sub = sub[sub[:, 0] != sub[:, 1]]
    edge_keys = np.unique(sub.min(axis=1) * enc + sub.max(axis=1))
    got = 0
    found = 0
    missing = []
    while got < pair_cap:
        a = ids[rng.integers(0, s, size=pair_cap)]
        b = ids[rng.integers(0, s, size=pair_cap)]
        ok = a != b
        a, b = a[ok], b[ok]
        keys = np.minimum(a, b) * enc + np.maximum(a, b)
        take = min(keys.size, pair_cap - got)
        present = np.isin(keys[:take], edge_keys)
        found += int(present.sum())
        for u, v, h in zip(a[:take], b[:take], present):
            if not h and len(missing) < 100:
                missing.append((int(min(u, v)), int(max(u, v))))
        got += take
    return CliqueReport(s, found / pair_cap, tuple(missing), None, True)


def max_clique_topk(
    graph: process.GlpGraph,
    k: int,
    at_time: int | None = None,
    exact_cap: int = 128,
) -> tuple[int, ...]:
    """Largest clique among the ``k`` highest-degree vertices.

    Candidates are ranked by degree at the reference time (ties toward the
    smaller id).  Exact branch and bound up to ``exact_cap`` candidates,
    greedy beyond.  Returns the clique as a sorted id tuple.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    t_ref = graph.t if at_time is None else int(at_time)
    deg = graph.degrees_at(t_ref)[1:]
    k = min(k, deg.size)
    order = np.lexsort((np.arange(1, deg.size + 1), -deg))
    ids = np.sort(order[:k] + 1).astype(np.int64)
    masks = _induced_masks(graph, ids, at_time)
    if k <= exact_cap:
        mask = _max_clique_mask(masks)
    else:
        deg_order = sorted(range(k), key=lambda v: -masks[v].bit_count())
        mask = _greedy_clique_mask(masks, deg_order)
    picked = [int(ids[i]) for i in range(k) if mask >> i & 1]
    return tuple(sorted(picked))


# ----------------------------------------------------------------------
# triangles


def count_triangles(graph: process.GlpGraph, at_time: int | None = None) -> int:
    """Triangle count of the simple projection.

    Edges are oriented from lower to higher simple degree (ids break ties),
    which keeps the sparse path-counting product small on skewed graphs.
    """
    edges = simple_edges(graph, at_time)
    if edges.shape[0] == 0:
        return 0
    n = graph.num_vertices + 1
    sdeg = np.bincount(edges.ravel(), minlength=n)
    rank = np.lexsort((np.arange(n), sdeg))
    pos = np.empty(n, dtype=np.int64)
    pos[rank] = np.arange(n)
    ru = pos[edges[:, 0]]
    rv = pos[edges[:, 1]]
    lo = np.minimum(ru, rv)
    hi = np.maximum(ru, rv)
    b = sparse.csr_matrix(
        (np.ones(lo.size, dtype=np.int64), (lo, hi)), shape=(n, n)
    )
    return int((b @ b).multiply(b).sum())


# ----------------------------------------------------------------------
# growth experiment


@dataclass(frozen=True)
class GrowthRow:
    p: float
    seed: int
    t: int
    j_lo: int
    j_hi: int
    leader_count: int
    pair_fraction: float
    clique_size: int
    topk_clique_size: int


def leader_block_range(t: int, p: float, eps: float, eps_prime: float) -> tuple[int, int]:
    """Block index window ``[ceil(t**eps_prime), floor(t**alpha)]`` where
    ``alpha = (1 - eps) * (1 - p) / (2 - p)``."""
    alpha = (1.0 - eps) * (1.0 - p) / (2.0 - p)
    j_lo = max(1, math.ceil(t**eps_prime))
    j_hi = math.floor(t**alpha)
    if j_hi < j_lo:
        raise ParameterError(
            f"empty block range at t={t}: [{j_lo}, {j_hi}] (p={p}, eps={eps})"
        )
    return j_lo, j_hi


def clique_growth_experiment(
    p: float,
    t_values,
    seeds: int,
    base_seed: int = 0,
    m: int = 10,
    eps: float = 0.1,
    eps_prime: float = 0.05,
    topk: int = 64,
) -> list[GrowthRow]:
    """Leader clique density and top-degree clique size across time scales.

    One run of ``2 * max(t)`` steps per seed serves every ``t``: leaders are
    selected from the degrees at time ``t`` and their pairwise adjacency is
    read from the state at time ``2t`` of the same run, as is the clique
    among the ``topk`` highest-degree vertices.
    """
    ts = sorted(int(t) for t in t_values)
    if not ts:
        raise ParameterError("no time values")
    rows = []
    for r in range(seeds):
        seed = base_seed + r
        res = process.run(process.ProcessParams(p=p, steps=2 * ts[-1], seed=seed))
        g = res.graph
        for t in ts:
            j_lo, j_hi = leader_block_range(t, p, eps, eps_prime)
            led = leaders(g, m=m, j_lo=j_lo, j_hi=j_hi, at_time=t)
            rep = is_clique(g, led.vertices, at_time=2 * t)
            top = max_clique_topk(g, topk, at_time=2 * t)
            rows.append(
                GrowthRow(
                    p=p,
                    seed=seed,
                    t=t,
                    j_lo=j_lo,
                    j_hi=j_hi,
                    leader_count=int(led.vertices.size),
                    pair_fraction=rep.pair_fraction,
                    clique_size=int(rep.largest_clique_size or 0),
                    topk_clique_size=len(top),
                )
            )
    return rows
