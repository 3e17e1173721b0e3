import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import glpsim as g
from glpsim.errors import CapacityError, ParameterError, ParseError, UnknownVertexError


def scalar_replay(p, steps, seed):
    """Apply the documented draw stream one step at a time.

    Independent of the vectorized resolver: same raw uniforms, but each slot
    index is looked up against the endpoint list as it exists at that step.
    """
    rng = g.make_rng(seed)
    z = rng.random(steps) < p
    bounds = np.repeat(2 * np.arange(1, steps + 1, dtype=np.int64), 2)
    draws = rng.integers(0, bounds)
    ep = [1, 1]
    nv = 1
    for t in range(steps):
        a = ep[draws[2 * t]]
        if z[t]:
            nv += 1
            ep.extend([a, nv])
        else:
            ep.extend([a, ep[draws[2 * t + 1]]])
    return np.array(ep, dtype=np.int32)


# ----------------------------------------------------------------------
# initial graph and parameter validation


def test_initial_graph():
    gr = g.run(g.ProcessParams(p=0.5, steps=0, seed=0)).graph
    assert gr.t == 0
    assert gr.num_vertices == 1
    assert gr.total_degree() == 2
    assert gr.max_degree() == 2
    assert gr.degree(1) == 2
    assert gr.arrival_time(1) == 0
    assert [tuple(e) for e in gr.edges()] == [(1, 1)]


@pytest.mark.parametrize("bad", [-0.1, 1.0001, float("nan")])
def test_p_out_of_range(bad):
    with pytest.raises(ParameterError):
        g.ProcessParams(p=bad, steps=10, seed=0)


def test_param_validation():
    with pytest.raises(ParameterError):
        g.ProcessParams(p=0.5, steps=-1, seed=0)
    with pytest.raises(CapacityError):
        g.ProcessParams(p=0.5, steps=2**31, seed=0)
    with pytest.raises(ParameterError):
        g.ProcessParams(p=0.5, steps=10, seed=-1)
    with pytest.raises(ParameterError):
        g.ProcessParams(p=0.5, steps=10, seed=0, snapshot_times=(5, 20))
    with pytest.raises(ParameterError):
        g.ProcessParams(p=0.5, steps=10, seed=0, snapshot_times=(7, 7))
    with pytest.raises(ParameterError):
        g.ProcessParams(p=0.5, steps=10, seed=0, watched_vertices=(0,))


def test_unknown_vertex():
    gr = g.run(g.ProcessParams(p=0.5, steps=50, seed=1)).graph
    with pytest.raises(UnknownVertexError):
        gr.degree(0)
    with pytest.raises(UnknownVertexError):
        gr.degree(gr.num_vertices + 1)
    with pytest.raises(UnknownVertexError):
        gr.arrival_time(gr.num_vertices + 1)


# ----------------------------------------------------------------------
# conservation and determinism


@settings(max_examples=60, deadline=None)
@given(
    p=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    steps=st.integers(min_value=0, max_value=300),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_conservation_property(p, steps, seed):
    gr = g.run(g.ProcessParams(p=p, steps=steps, seed=seed)).graph
    assert gr.endpoints.size == 2 * (steps + 1)
    assert gr.total_degree() == 2 * (steps + 1)
    assert gr.degrees.sum() == 2 * (steps + 1)
    # every id in 1..V appears, and V is the largest id
    seen = np.unique(gr.endpoints)
    assert seen[0] == 1 and seen[-1] == gr.num_vertices
    assert seen.size == gr.num_vertices
    # arrivals: vertex 1 at 0, later vertices strictly ordered, within [0, t]
    arr = gr.arrival_times
    assert arr[0] == 0
    assert (np.diff(arr) > 0).all() or arr.size == 1
    assert arr[-1] <= steps


def test_vertex_count_matches_kind_stream():
    # the documented protocol draws kinds first; recount them independently
    for p, seed in [(0.3, 5), (0.5, 6), (0.9, 7)]:
        steps = 2000
        gr = g.run(g.ProcessParams(p=p, steps=steps, seed=seed)).graph
        z = g.make_rng(seed).random(steps) < p
        assert gr.num_vertices == 1 + int(z.sum())


def test_determinism_and_seed_sensitivity():
    params = g.ProcessParams(p=0.5, steps=400, seed=11)
    a = g.run(params).graph.endpoints
    b = g.run(params).graph.endpoints
    assert np.array_equal(a, b)
    c = g.run(g.ProcessParams(p=0.5, steps=400, seed=12)).graph.endpoints
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("p", [0.0, 0.3, 0.5, 0.75, 1.0])
@pytest.mark.parametrize("seed", [0, 17])
def test_scalar_replay_matches_run(p, seed):
    got = g.run(g.ProcessParams(p=p, steps=500, seed=seed)).graph.endpoints
    assert np.array_equal(got, scalar_replay(p, 500, seed))


# ----------------------------------------------------------------------
# step kinds at the deterministic ends


def test_p_one_is_a_growing_tree():
    gr = g.run(g.ProcessParams(p=1.0, steps=50, seed=2)).graph
    assert gr.num_vertices == 51
    edges = list(gr.edges())
    # only the initial loop; every later edge attaches a brand-new vertex
    assert tuple(edges[0]) == (1, 1)
    for t, e in enumerate(edges[1:], start=1):
        assert e[1] == t + 1
        assert e[0] < e[1]
    assert gr.arrival_time(51) == 50


def test_p_zero_stays_on_the_root():
    gr = g.run(g.ProcessParams(p=0.0, steps=80, seed=3)).graph
    assert gr.num_vertices == 1
    assert gr.degree(1) == 2 * 81
    assert all(tuple(e) == (1, 1) for e in gr.edges())


def test_scalar_step_outcomes():
    gr = g.new_graph(g.ProcessParams(p=1.0, steps=1, seed=0))
    out = g.step(gr, g.make_rng(0))
    assert out.kind is g.StepKind.VERTEX
    assert out.new_vertex == 2
    assert gr.t == 1 and gr.degree(2) == 1

    gr = g.new_graph(g.ProcessParams(p=0.0, steps=1, seed=0))
    out = g.step(gr, g.make_rng(0))
    assert out.kind is g.StepKind.EDGE
    assert out.new_vertex is None
    assert gr.num_vertices == 1 and gr.total_degree() == 4


def test_scalar_step_conserves():
    gr = g.new_graph(g.ProcessParams(p=0.5, steps=1, seed=9))
    rng = g.make_rng(9)
    for i in range(200):
        before = gr.total_degree()
        g.step(gr, rng)
        assert gr.total_degree() == before + 2
    assert gr.t == 200


# ----------------------------------------------------------------------
# attachment sampling distribution


def test_sample_endpoint_proportions():
    # degrees (2, 4, 4) select with probabilities (0.2, 0.4, 0.4)
    ep = np.array([1, 1, 2, 3, 2, 3, 2, 3, 2, 3], dtype=np.int64)
    gr = g.GlpGraph.from_endpoints(ep, p=0.5, seed=0)
    assert gr.degree(1) == 2 and gr.degree(2) == 4 and gr.degree(3) == 4
    rng = g.make_rng(123)
    n = 200_000
    counts = np.zeros(4)
    for _ in range(n):
        counts[g.sample_endpoint(gr, rng)] += 1
    emp = counts[1:] / n
    tv = 0.5 * np.abs(emp - np.array([0.2, 0.4, 0.4])).sum()
    assert tv < 0.01  # ~3e-3 expected at this n


def test_single_step_drift_via_step():
    """Scalar step() hits vertex 1 at the exact-normalization rate."""
    base = g.run(g.ProcessParams(p=0.5, steps=20, seed=3)).graph
    ep0 = base.endpoints.copy()
    d1 = base.degree(1)
    exact = (2 - 0.5) * d1 / base.total_degree()
    rng = g.make_rng(99)
    n = 20_000
    incs = np.empty(n)
    for i in range(n):
        trial = g.GlpGraph.from_endpoints(ep0, p=0.5, seed=0)
        g.step(trial, rng)
        incs[i] = trial.degree(1) - d1
    se = incs.std(ddof=1) / np.sqrt(n)
    assert abs(incs.mean() - exact) < 3 * se


def test_interarrival_gaps_are_geometric():
    """Chi-square GOF at the 1% level on vertex inter-arrival gaps."""
    from scipy import stats

    p = 0.5
    gr = g.run(g.ProcessParams(p=p, steps=4000, seed=21)).graph
    gaps = np.diff(gr.arrival_times[2:])  # between consecutive vertex-steps
    kmax = 8
    obs = np.bincount(np.minimum(gaps, kmax), minlength=kmax + 1)[1:]
    probs = np.array(
        [(1 - p) ** (k - 1) * p for k in range(1, kmax)] + [(1 - p) ** (kmax - 1)]
    )
    chi2 = ((obs - gaps.size * probs) ** 2 / (gaps.size * probs)).sum()
    assert chi2 < stats.chi2.ppf(0.99, df=kmax - 1)


# ----------------------------------------------------------------------
# snapshots and time-indexed views


def test_snapshots_match_prefix_views():
    params = g.ProcessParams(
        p=0.5, steps=1000, seed=8, snapshot_times=(0, 10, 500, 1000),
        watched_vertices=(1, 2),
    )
    res = g.run(params)
    gr = res.graph
    assert [s.t for s in res.snapshots] == [0, 10, 500, 1000]
    for s in res.snapshots:
        deg_t = gr.degrees_at(s.t)  # id-indexed, slot 0 unused
        assert s.max_degree == deg_t.max()
        assert deg_t.sum() == 2 * (s.t + 1)
        for v, d in s.watched_degrees.items():
            assert d == deg_t[v]
    assert gr.vertex_count_at(0) == 1
    assert gr.vertex_count_at(1000) == gr.num_vertices


def test_vertex_count_at_is_monotone():
    gr = g.run(g.ProcessParams(p=0.7, steps=300, seed=14)).graph
    counts = [gr.vertex_count_at(t) for t in range(0, 301, 25)]
    assert counts == sorted(counts)


# ----------------------------------------------------------------------
# edge-list round trip


def test_export_read_round_trip(tmp_path):
    gr = g.run(g.ProcessParams(p=0.75, steps=333, seed=4)).graph
    path = tmp_path / "edges.txt"
    g.export_edges(gr, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# glp v1 p=0.75 steps=333 seed=4"
    assert lines[1] == "1 1"
    back = g.read_edges(path)
    assert back.p == gr.p and back.seed == gr.seed and back.t == gr.t
    assert np.array_equal(back.endpoints, gr.endpoints)
    assert np.array_equal(back.degrees, gr.degrees)
    assert np.array_equal(back.arrival_times, gr.arrival_times)


def test_read_edges_diagnostics(tmp_path):
    path = tmp_path / "bad.txt"

    path.write_text("")
    with pytest.raises(ParseError):
        g.read_edges(path)

    path.write_text("# wrong header\n1 1\n")
    with pytest.raises(ParseError):
        g.read_edges(path)

    path.write_text("# glp v1 p=0.5 steps=2 seed=0\n1 1\n1 2\n")
    with pytest.raises(ParseError, match="does not match header"):
        g.read_edges(path)

    path.write_text("# glp v1 p=0.5 steps=1 seed=0\n1 1\n1 x\n")
    with pytest.raises(ParseError, match="line 3"):
        g.read_edges(path)


def test_from_endpoints_validation():
    with pytest.raises(ParameterError):
        g.GlpGraph.from_endpoints([1, 1, 3, 3])  # id 2 missing
    with pytest.raises(ParameterError):
        g.GlpGraph.from_endpoints([1, 1, 2])  # odd length
    with pytest.raises(ParameterError):
        g.GlpGraph.from_endpoints([2, 2, 1, 1])  # not ordered by first appearance
    with pytest.raises(ParameterError):
        g.GlpGraph.from_endpoints([0, 1])


@settings(max_examples=30, deadline=None)
@given(
    p=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    steps=st.integers(min_value=0, max_value=120),
    seed=st.integers(min_value=0, max_value=10**6),
)
def test_from_endpoints_rebuilds_run_output(p, steps, seed):
    gr = g.run(g.ProcessParams(p=p, steps=steps, seed=seed)).graph
    back = g.GlpGraph.from_endpoints(gr.endpoints, p=p, seed=seed)
    assert np.array_equal(back.degrees, gr.degrees)
    assert np.array_equal(back.arrival_times, gr.arrival_times)
