"""Growth process with degree-proportional attachment and edge-steps.

The process starts from a single vertex carrying one loop.  At every step,
with probability ``p`` a new vertex joins and attaches to an existing vertex
chosen proportionally to degree (a vertex-step); otherwise an extra edge is
drawn between two existing vertices, each endpoint chosen independently and
proportionally to degree (an edge-step).  Loops and parallel edges are kept.

The multigraph is stored as an append-only flat sequence of edge endpoints,
two entries per edge.  A vertex appears in that sequence exactly ``degree``
times, so degree-proportional sampling is just a uniform draw of one slot.
That representation is what makes single steps O(1) and full runs
vectorizable: all step kinds and slot indices can be drawn up front because
the slot count after ``t`` steps is deterministically ``2*(t+1)``.

Randomness comes from numpy's PCG64 bit generator, a fixed published
algorithm whose stream for a given seed is identical on every platform.
``run`` consumes the stream in a fixed documented layout (see its docstring),
so identical ``(p, steps, seed)`` reproduce identical endpoint sequences.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CapacityError, ParameterError, ParseError, UnknownVertexError

__all__ = [
    "MAX_STEPS",
    "ProcessParams",
    "StepKind",
    "StepOutcome",
    "Snapshot",
    "RunResult",
    "GlpGraph",
    "make_rng",
    "new_graph",
    "sample_endpoint",
    "step",
    "run",
    "export_edges",
    "read_edges",
]

# Vertex ids are 32-bit and the slot count must stay below 2**32.
MAX_STEPS = 2**31 - 3


def make_rng(seed: int) -> np.random.Generator:
    """Return the package-wide generator: PCG64 seeded with ``seed``."""
    if not (0 <= int(seed) < 2**64):
        raise ParameterError(f"seed must be a 64-bit natural, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):  # also rejects NaN
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    return p


@dataclass(frozen=True)
class ProcessParams:
    """Immutable description of one run.

    Parameters
    ----------
    p : float
        Vertex-step probability, in [0, 1].
    steps : int
        Number of growth steps; 0 yields just the initial graph.
    seed : int
        64-bit seed; replica ``r`` of an ensemble uses ``seed + r``.
    snapshot_times : tuple of int
        Strictly increasing times (each <= steps) at which the run records
        the maximum degree and the degrees of ``watched_vertices``.
    watched_vertices : tuple of int
        Vertex ids reported in every snapshot (0 if not yet born).
    watched_blocks : tuple
        Entries ``(j, m, thresholds)`` describing contiguous vertex blocks
        whose threshold crossing times the hitting-times module extracts.
    """

    p: float
    steps: int
    seed: int
    snapshot_times: tuple[int, ...] = ()
    watched_vertices: tuple[int, ...] = ()
    watched_blocks: tuple[tuple[int, int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        _check_p(self.p)
        if int(self.steps) != self.steps or self.steps < 0:
            raise ParameterError(f"steps must be a non-negative integer, got {self.steps!r}")
        if self.steps > MAX_STEPS:
            raise CapacityError(
                f"steps={self.steps} exceeds the 32-bit id budget ({MAX_STEPS})"
            )
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterError(f"seed must be a 64-bit natural, got {self.seed!r}")
        times = tuple(int(t) for t in self.snapshot_times)
        if any(t < 0 or t > self.steps for t in times):
            raise ParameterError("snapshot times must lie in [0, steps]")
        if any(b >= a for a, b in zip(times[1:], times)):
            raise ParameterError("snapshot times must be strictly increasing")
        if any(int(v) < 1 for v in self.watched_vertices):
            raise ParameterError("watched vertex ids must be >= 1")
        for blk in self.watched_blocks:
            j, m, thresholds = blk
            if j < 1 or m < 1 or not thresholds:
                raise ParameterError(f"bad block spec {blk!r}")
            if any(k < 1 for k in thresholds) or list(thresholds) != sorted(thresholds):
                raise ParameterError(f"block thresholds must be sorted naturals: {blk!r}")


class StepKind(Enum):
    VERTEX = "vertex-step"
    EDGE = "edge-step"


@dataclass(frozen=True)
class StepOutcome:
    """What a single step did: the new edge and, for vertex-steps, the new id."""

    kind: StepKind
    edge: tuple[int, int]
    new_vertex: int | None = None


@dataclass(frozen=True)
class Snapshot:
    t: int
    max_degree: int
    watched_degrees: dict[int, int] = field(default_factory=dict)


@dataclass
class RunResult:
    graph: "GlpGraph"
    snapshots: list[Snapshot]


class GlpGraph:
    """Append-only multigraph produced by the growth process.

    Edge ``i`` (0-based) occupies endpoint slots ``2i`` and ``2i+1``; slot
    pairs appear in creation order, so the prefix of the first ``2*(t+1)``
    slots is exactly the state of this run at time ``t``.  Vertex ids are
    1-based and assigned in arrival order.
    """

    __slots__ = ("p", "seed", "_ep", "_len", "_deg", "_nv", "_arr")

    def __init__(self, p: float, seed: int):
        self.p = _check_p(p)
        self.seed = int(seed)
        self._ep = np.empty(64, dtype=np.int32)
        self._ep[0] = self._ep[1] = 1
        self._len = 2
        self._deg = np.zeros(64, dtype=np.int64)
        self._deg[1] = 2
        self._nv = 1
        self._arr = np.zeros(64, dtype=np.int64)

    # ------------------------------------------------------------------
    # construction helpers

    @classmethod
    def _from_arrays(cls, p, seed, endpoints, degrees, arrivals) -> "GlpGraph":
        g = cls.__new__(cls)
        g.p = _check_p(p)
        g.seed = int(seed)
        g._ep = endpoints
        g._len = endpoints.size
        g._deg = degrees
        g._nv = degrees.size - 1
        g._arr = arrivals
        return g

    @classmethod
    def from_endpoints(cls, endpoints, p: float = 0.5, seed: int = 0) -> "GlpGraph":
        """Wrap an explicit endpoint sequence (analysis helper and importer).

        Ids must form a contiguous range 1..V ordered by first appearance;
        arrival times are reconstructed from first appearances.
        """
        ep = np.asarray(endpoints, dtype=np.int32)
        if ep.ndim != 1 or ep.size < 2 or ep.size % 2:
            raise ParameterError("endpoint sequence must be flat with even length >= 2")
        if ep.min() < 1:
            raise ParameterError("vertex ids must be >= 1")
        nv = int(ep.max())
        deg = np.bincount(ep, minlength=nv + 1).astype(np.int64)
        if (deg[1:] == 0).any():
            raise ParameterError("vertex ids must form a contiguous range 1..V")
        ids, first_slot = np.unique(ep, return_index=True)
        if (np.diff(first_slot) <= 0).any():
            raise ParameterError("vertex ids must be ordered by first appearance")
        arr = np.zeros(nv + 1, dtype=np.int64)
        arr[ids] = first_slot // 2  # edge index == step of first appearance
        return cls._from_arrays(p, seed, ep.copy(), deg, arr)

    # ------------------------------------------------------------------
    # growth plumbing (scalar path)

    def _grow(self, buf: np.ndarray, need: int) -> np.ndarray:
        if need <= buf.size:
            return buf
        out = np.empty(max(need, 2 * buf.size), dtype=buf.dtype)
        out[: buf.size] = buf
        return out

    def _append_edge(self, u: int, v: int) -> None:
        self._ep = self._grow(self._ep, self._len + 2)
        self._ep[self._len] = u
        self._ep[self._len + 1] = v
        self._len += 2
        self._deg[u] += 1
        self._deg[v] += 1

    def _add_vertex(self, at_step: int) -> int:
        if self._nv + 1 >= 2**31 - 1:
            raise CapacityError("vertex ids exhausted the 32-bit budget")
        self._nv += 1
        self._deg = self._grow(self._deg, self._nv + 1)
        self._arr = self._grow(self._arr, self._nv + 1)
        self._deg[self._nv] = 0
        self._arr[self._nv] = at_step
        return self._nv

    # ------------------------------------------------------------------
    # queries

    @property
    def t(self) -> int:
        """Number of steps taken so far."""
        return self._len // 2 - 1

    @property
    def num_vertices(self) -> int:
        return self._nv

    @property
    def endpoints(self) -> np.ndarray:
        """Flat endpoint sequence, two slots per edge, read-only view."""
        view = self._ep[: self._len]
        view.flags.writeable = False
        return view

    @property
    def degrees(self) -> np.ndarray:
        """Degrees indexed by vertex: ``degrees[j-1]`` is vertex ``j``, read-only."""
        view = self._deg[1 : self._nv + 1]
        view.flags.writeable = False
        return view

    @property
    def arrival_times(self) -> np.ndarray:
        view = self._arr[1 : self._nv + 1]
        view.flags.writeable = False
        return view

    def edges(self) -> np.ndarray:
        """Edge list as an (E, 2) array in creation order."""
        return self.endpoints.reshape(-1, 2)

    def degree(self, v: int) -> int:
        if not (1 <= v <= self._nv):
            raise UnknownVertexError(v)
        return int(self._deg[v])

    def total_degree(self) -> int:
        return self._len

    def max_degree(self) -> int:
        return int(self._deg[1 : self._nv + 1].max())

    def arrival_time(self, j: int) -> int:
        """Step at which vertex ``j`` was created; vertex 1 arrives at 0."""
        if not (1 <= j <= self._nv):
            raise UnknownVertexError(j)
        return int(self._arr[j])

    def vertex_count_at(self, t: int) -> int:
        """Number of vertices present at time ``t`` of this run."""
        if not (0 <= t <= self.t):
            raise ParameterError(f"time {t} outside [0, {self.t}]")
        return int(np.searchsorted(self._arr[1 : self._nv + 1], t, side="right"))

    def degrees_at(self, t: int) -> np.ndarray:
        """Degree array (indexed by id, slot 0 unused) at time ``t`` of this run."""
        if not (0 <= t <= self.t):
            raise ParameterError(f"time {t} outside [0, {self.t}]")
        prefix = self._ep[: 2 * (t + 1)]
        return np.bincount(prefix, minlength=self._nv + 1)


def new_graph(params: ProcessParams) -> GlpGraph:
    """Initial state: one vertex, one loop, total degree 2, time 0."""
    return GlpGraph(params.p, params.seed)


def sample_endpoint(graph: GlpGraph, rng: np.random.Generator) -> int:
    """Draw one vertex with probability degree / total degree.

    One uniform slot of the endpoint sequence is drawn (a single bounded
    integer from the stream), so the probability of returning ``v`` is
    exactly ``degree(v) / (2*(t+1))``.
    """
    return int(graph._ep[rng.integers(0, graph._len)])


def step(graph: GlpGraph, rng: np.random.Generator) -> StepOutcome:
    """Advance the graph by one step in place.

    Scalar stream order: one uniform for the step kind, then one bounded slot
    index per endpoint sampled (one for a vertex-step, two for an edge-step).
    All endpoint draws use the pre-step slot count, so a new vertex is never
    its own attachment target.
    """
    pre_slots = graph._len
    if rng.random() < graph.p:
        u = int(graph._ep[rng.integers(0, pre_slots)])
        v = graph._add_vertex(at_step=graph.t + 1)
        graph._append_edge(u, v)
        return StepOutcome(StepKind.VERTEX, (u, v), new_vertex=v)
    u = int(graph._ep[rng.integers(0, pre_slots)])
    w = int(graph._ep[rng.integers(0, pre_slots)])
    graph._append_edge(u, w)
    return StepOutcome(StepKind.EDGE, (u, w))


def _generate(p: float, steps: int, seed: int):
    """Vectorized endpoint-sequence generation.

    Stream layout (fixed; changing it changes every seeded run):

    1. ``rng.random(steps)`` compared against ``p`` decides the step kinds.
    2. ``rng.integers(0, bounds)`` with ``bounds = [2,2,4,4,...,2s,2s]``
       yields two uniform slot indices per step.  A vertex-step consumes
       only the first of its pair; the second is discarded so the layout
       stays rectangular.

    Every non-root slot holds a copy of an earlier slot, so the sequence is
    resolved by pointer doubling over the copy forest (a handful of passes,
    since copy chains are logarithmically short with high probability).
    """
    n = int(steps)
    rng = make_rng(seed)
    z = rng.random(n) < p
    bounds = np.repeat(2 * np.arange(1, n + 1, dtype=np.int64), 2)
    draws = rng.integers(0, bounds)

    nslots = 2 * (n + 1)
    ptr = np.empty(nslots, dtype=np.int64)
    ptr[0] = 0
    ptr[1] = 1
    ptr[2::2] = draws[0::2]
    ptr[3::2] = draws[1::2]
    odd = np.arange(3, nslots, 2, dtype=np.int64)
    new_slots = odd[z]
    ptr[new_slots] = new_slots  # roots: slots that hold a brand-new vertex

    root_val = np.zeros(nslots, dtype=np.int64)
    root_val[0] = root_val[1] = 1
    ids = 1 + np.cumsum(z)
    root_val[new_slots] = ids[z]

    while True:
        nxt = ptr[ptr]
        if np.array_equal(nxt, ptr):
            break
        ptr = nxt
    endpoints = root_val[ptr].astype(np.int32)

    nv = int(ids[-1]) if n else 1
    degrees = np.bincount(endpoints, minlength=nv + 1).astype(np.int64)
    arrivals = np.empty(nv + 1, dtype=np.int64)
    arrivals[0] = 0
    arrivals[1] = 0
    arrivals[2:] = np.flatnonzero(z) + 1
    return endpoints, degrees, arrivals


def run(params: ProcessParams) -> RunResult:
    """Run the full process described by ``params``.

    Returns the final graph plus one snapshot per requested time.  Identical
    ``(p, steps, seed)`` produce bit-identical endpoint sequences; see
    ``_generate`` for the exact stream layout.
    """
    endpoints, degrees, arrivals = _generate(params.p, params.steps, params.seed)
    graph = GlpGraph._from_arrays(params.p, params.seed, endpoints, degrees, arrivals)

    snapshots = []
    for t in params.snapshot_times:
        pref = np.bincount(endpoints[: 2 * (t + 1)])
        watched = {
            int(v): int(pref[v]) if v < pref.size else 0
            for v in params.watched_vertices
        }
        snapshots.append(Snapshot(t=int(t), max_degree=int(pref.max()), watched_degrees=watched))
    return RunResult(graph=graph, snapshots=snapshots)


# ----------------------------------------------------------------------
# import / export

_HEADER = "# glp v1 p={p} steps={steps} seed={seed}"


def export_edges(graph: GlpGraph, sink) -> None:
    """Write the edge list in creation order: a header line then ``u v`` lines."""
    own = isinstance(sink, (str, bytes, os.PathLike))
    fh = open(sink, "w") if own else sink
    try:
        fh.write(_HEADER.format(p=repr(graph.p), steps=graph.t, seed=graph.seed) + "\n")
        pairs = graph.endpoints.reshape(-1, 2)
        np.savetxt(fh, pairs, fmt="%d")
    finally:
        if own:
            fh.close()


def read_edges(source) -> GlpGraph:
    """Parse a file produced by :func:`export_edges` back into a graph."""
    own = isinstance(source, (str, bytes, os.PathLike))
    fh = open(source, "r") if own else source
    try:
        header = fh.readline()
        if not header.startswith("# glp v1 "):
            raise ParseError(f"line 1: expected '# glp v1 ...' header, got {header[:40]!r}")
        fields = dict(
            tok.split("=", 1) for tok in header[len("# glp v1 ") :].split() if "=" in tok
        )
        try:
            p = float(fields["p"])
            steps = int(fields["steps"])
            seed = int(fields["seed"])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"line 1: bad header field ({exc})") from exc
        flat = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: non-integer endpoint in {line!r}") from exc
            flat.append(u)
            flat.append(v)
        if len(flat) != 2 * (steps + 1):
            raise ParseError(
                f"edge count {len(flat) // 2} does not match header steps={steps}"
            )
        try:
            graph = GlpGraph.from_endpoints(np.array(flat, dtype=np.int32), p=p, seed=seed)
        except ParameterError as exc:
            raise ParseError(str(exc)) from exc
        return graph
    finally:
        if own:
            fh.close()
