import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import netlaplace as nl
import oracles as o

seeds = st.integers(0, 2**32 - 1)


def _random_ts(seed, lo=3, hi=12, reversible=None):
    rng = np.random.default_rng(seed)
    rev = bool(rng.random() < 0.3) if reversible is None else reversible
    n = int(rng.integers(lo, hi + 1))
    return nl.build_transition(nl.random_network(n, rng, reversible=rev))


def test_build_transition_path(path4):
    P = path4.P
    for k in range(1, 4):
        assert P[k, k - 1] == P[k, k + 1] == 0.5
    assert P[0, 1] == 1 and P[4, 3] == 1
    assert np.allclose(path4.masses, [1, 2, 2, 2, 1])


def test_build_transition_cycle_is_permutation():
    ts = nl.build_transition(nl.cycle(6))
    assert np.array_equal(ts.P, np.roll(np.eye(6), 1, axis=1))
    assert np.allclose(ts.pi, 1 / 6)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_stationary(seed):
    ts = _random_ts(seed)
    pi = ts.pi
    assert np.abs(pi @ ts.P - pi).max() <= 1e-10
    assert abs(pi.sum() - 1) <= 1e-12 and pi.min() > 0
    assert np.allclose(pi, o.stationary_eig(ts.P), atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_reverse_twice(seed):
    ts = _random_ts(seed)
    hat = nl.reverse(ts)
    assert np.allclose(hat.pi, ts.pi, atol=1e-12)
    assert np.abs(nl.reverse(hat).P - ts.P).max() <= 1e-12


def test_reverse_examples():
    for N in (2, 5):
        ts = nl.build_transition(nl.path_a(N))
        assert np.allclose(nl.reverse(ts).P, ts.P, atol=1e-15)
        assert nl.is_reversible(ts)
    cyc = nl.build_transition(nl.cycle(6))
    assert np.array_equal(nl.reverse(cyc).P, cyc.P.T)
    assert not nl.is_reversible(cyc)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([1.0, 2.0, 1 + 1j, -1.5, 1.2j]))
def test_green_residual(seed, lam):
    ts = _random_ts(seed)
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, ts.n))
    A = sorted(rng.choice(ts.n, k, replace=False).tolist())
    G = nl.green_restricted(ts, A, lam)
    M = lam * np.eye(k) - ts.block(A, A)
    assert np.abs(M @ G.matrix - np.eye(k)).max() <= 1e-9
    assert G.residual <= 1e-9
    if lam == 1.0:
        assert G.matrix.min() >= -1e-12


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_green_neumann_series(seed):
    ts = _random_ts(seed, 3, 8)
    i = list(ts.interior)
    PA = ts.block(i, i)
    if np.abs(np.linalg.eigvals(PA)).max() > 0.9:
        return  # the truncated series is too slow to converge here
    G = nl.green_restricted(ts, i).matrix
    assert np.abs(o.neumann_series(PA, 200) - G).max() <= 1e-6


def test_green_rejects_bad_arguments(path4):
    with pytest.raises(ValueError):
        nl.green_restricted(path4, range(5))
    with pytest.raises(ValueError):
        nl.green_restricted(path4, [])
    with pytest.raises(ValueError):
        nl.green_restricted(path4, [1, 2], lam=0.5)


def test_green_examples(path4):
    G = nl.green_restricted(path4, [1, 2, 3, 4]).matrix
    assert np.allclose(G, o.path_green_ground(4), atol=1e-12)
    G = nl.green_restricted(path4, [1, 2, 3]).matrix
    assert np.allclose(G, o.path_green_interior(4), atol=1e-12)
    for N in (3, 5):
        ts = nl.funnel_transition(np.full(N, 1 / N))
        G = nl.green_restricted(ts, range(1, N)).matrix
        assert np.allclose(G, o.funnel_green_ground(N), atol=1e-12)


def test_green_padded(path4):
    G = nl.green_restricted(path4, [1, 2, 3])
    full = G.padded(5)
    assert np.all(full[0] == 0) and np.all(full[:, 4] == 0)
    assert np.array_equal(full[1:4, 1:4], G.matrix)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_hitting_rows_are_probabilities(seed):
    ts = _random_ts(seed)
    if not ts.interior:
        return
    Y = nl.hitting_matrix(ts)
    assert Y.min() >= -1e-12
    assert np.abs(Y.sum(axis=1) - 1).max() <= 1e-10


def test_hitting_examples():
    for N in (2, 3, 6):
        ts = nl.build_transition(nl.path_a(N))
        assert np.allclose(nl.hitting_matrix(ts), o.path_hitting(N), atol=1e-12)
    p = np.array([0.1, 0.2, 0.3, 0.15, 0.25])
    ts = nl.funnel_transition(p)
    nu = np.array([p[3], p[4]]) / (p[3] + p[4])
    assert np.allclose(nl.hitting_matrix(ts), np.tile(nu, (3, 1)), atol=1e-12)
    # another boundary for the same chain
    ts = nl.build_transition(nl.path_a(4))
    assert np.allclose(nl.hitting_matrix(ts, [0, 2, 4]), [[0.5, 0.5, 0], [0, 0.5, 0.5]])


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_boundary_chain_properties(seed):
    ts = _random_ts(seed)
    if not ts.interior:
        return
    app = nl.boundary_chain(ts)
    d, i = list(ts.boundary), list(ts.interior)
    Q = app.Q
    assert Q.min() >= -1e-12 and np.abs(Q.sum(axis=1) - 1).max() <= 1e-12
    ref = ts.block(d, d) + ts.block(d, i) @ o.kernel(ts.P, i) @ ts.block(i, d)
    assert np.abs(Q - ref).max() <= 1e-12 * max(1, np.abs(ref).max())
    pd = ts.pi[d]
    assert np.abs(pd @ Q - pd).max() <= 1e-10
    assert abs(app.nu_pi.sum() - 1) <= 1e-10 and app.nu_pi.min() >= -1e-12
    hat = nl.reverse(ts)
    assert np.allclose(app.hitting_reversed, nl.hitting_matrix(hat), atol=1e-12)


def test_boundary_chain_examples(path4):
    app = nl.boundary_chain(path4)
    assert np.allclose(app.Q, np.array([[3, 1], [1, 3]]) / 4, atol=1e-14)
    assert app.exit == app.entrance == (0, 4)
    p = np.array([0.4, 0.3, 0.2, 0.1])
    app = nl.boundary_chain(nl.funnel_transition(p))
    nu = p[2:] / p[2:].sum()
    assert np.allclose(app.Q[1], [1, 0]) and np.allclose(app.Q[0], nu)
    assert app.entrance == (2,) and app.exit == (2, 3)


def test_resolvent_at_one(path4):
    assert np.allclose(nl.boundary_chain_resolvent(path4, 1.0), nl.boundary_chain(path4).Q)
    Q2 = nl.boundary_chain_resolvent(path4, 2.0)
    assert np.allclose(Q2, o.boundary_resolvent(path4.P, [1, 2, 3], [0, 4], 2.0))


def test_subnetwork_transition_path():
    net = nl.path_a(5)
    sub = nl.subnetwork_transition(nl.make_subnetwork(net, ["1", "2", "3", "4"]))
    assert sub.vertices == ("1", "2", "3", "4")
    assert sub.P[0, 1] == 1 and sub.P[3, 2] == 1
    ts = nl.build_transition(net)
    # inner rows of the sub-network chain are the original rows
    assert np.array_equal(sub.P[1:3], ts.P[2:4, 1:5])
    assert sub.labels(sub.boundary) == ["1", "4"]


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_subnetwork_inner_rows_unchanged(seed):
    ts = _random_ts(seed, 4, 10)
    i = list(ts.interior)
    try:
        sub = nl.subnetwork_transition(ts, i)
    except nl.NetworkError:
        return
    inner = [i[k] for k in sub.interior]
    assert np.allclose(sub.P[np.ix_(sub.interior, range(sub.n))], ts.block(inner, i), atol=1e-15)
    assert np.allclose(sub.P.sum(axis=1), 1)


def test_subnetwork_not_strongly_connected():
    ts = nl.build_transition(nl.cycle(8))
    with pytest.raises(nl.NetworkError):
        nl.subnetwork_transition(ts, range(6))


def test_with_overrides(path4):
    row = {"0": 0.5, "1": 0.5}
    with pytest.raises(ValueError):
        path4.with_overrides({"2": row})
    # a row must be a probability vector; the loop here is fine for the chain
    ts = path4.with_overrides({"0": row})
    assert ts.overridden == (0,)
    assert np.allclose(ts.P[0], [0.5, 0.5, 0, 0, 0])
    assert np.allclose(ts.pi @ ts.P, ts.pi)
    with pytest.raises(ValueError):
        path4.with_overrides({"0": {"1": 0.7}})


def test_transition_system_validation():
    with pytest.raises(ValueError):
        nl.TransitionSystem.from_matrix([[0.5, 0.4], [1, 0]], boundary=[0])
    with pytest.raises(nl.NetworkError):
        nl.TransitionSystem.from_matrix([[1, 0], [1, 0]], boundary=[0])
    with pytest.raises(ValueError):
        nl.TransitionSystem.from_matrix([[0, 1], [1, 0]], boundary=[])


def test_vector_accepts_mappings(path4):
    v = path4.vector({"0": 1, "4": 2j}, path4.boundary)
    assert v.dtype == complex and v[1] == 2j
    with pytest.raises(ValueError, match="missing"):
        path4.vector({"0": 1}, path4.boundary)
    with pytest.raises(ValueError, match="outside"):
        path4.vector({"0": 1, "4": 1, "2": 0}, path4.boundary)
    with pytest.raises(ValueError):
        path4.vector([1, np.nan], path4.boundary)
