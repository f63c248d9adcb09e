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
    return nl.build_transition(nl.random_network(n, rng, reversible=rev)), rng


def _lap(ts, u):
    return ts.P @ u - u


def _cplx(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def _scale(*a):
    return max([1.0] + [float(np.abs(x).max(initial=0)) for x in a])


# -- blocks ----------------------------------------------------------------------------

def test_blocks_path(path4):
    b = nl.bi_blocks(path4)
    assert np.allclose(b.R, np.array([[7, 5], [5, 7]]) / 4, atol=1e-12)
    inv = np.linalg.inv(np.eye(2) + b.R)
    assert np.allclose(inv, np.array([[33, -15], [-15, 33]]) / 72, atol=1e-12)
    assert b.invertible and b.ir_invertible


def test_blocks_cycle8_singular():
    ts = nl.build_transition(nl.cycle(8))
    b = nl.bi_blocks(ts)
    expected = np.eye(4) + np.roll(np.eye(4), 1, axis=1)
    assert np.array_equal(b.S, expected)
    assert not b.invertible and not b.ir_invertible and b.K is None
    with pytest.raises(nl.SingularSystemError, match="S is singular"):
        nl.solve_bidirichlet(ts, np.zeros(4), np.zeros(4))
    with pytest.raises(nl.SingularSystemError):
        nl.transfer_matrix(ts)


def test_blocks_funnel_zero_bottom_row():
    b = nl.bi_blocks(nl.funnel_transition([0.4, 0.3, 0.2, 0.1]))
    assert np.all(b.R[1] == 0) and np.all(b.R[0] > 0)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_block_assembly(seed):
    ts, _ = _random_ts(seed)
    if not ts.interior:
        return
    b = nl.bi_blocks(ts)
    order = list(ts.interior) + list(ts.boundary)
    L = ts.P - np.eye(ts.n)
    assert np.abs(b.assembled() - (L @ L)[np.ix_(order, order)]).max() <= 1e-12
    assert b.invertible == b.ir_invertible
    if b.invertible:
        G = nl.green_restricted(ts, ts.interior).matrix
        assert np.allclose(b.K @ G @ b.S, np.eye(len(ts.interior)), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_reversible_always_regular(seed):
    ts, _ = _random_ts(seed, reversible=True)
    if ts.interior:
        b = nl.bi_blocks(ts)
        assert b.invertible and b.ir_invertible


def test_r_matrix_lambda(path4):
    assert np.allclose(nl.r_matrix(path4), nl.bi_blocks(path4).R)
    assert np.allclose(nl.r_matrix(path4, 2.0), o.r_of_lambda(path4.P, [1, 2, 3], [0, 4], 2.0))
    with pytest.raises(ValueError):
        nl.r_matrix(path4, 0.5)


# -- transfer matrix and the bi-Dirichlet to Neumann map ---------------------------------

@settings(max_examples=50, deadline=None)
@given(seeds)
def test_transfer_matrix_kernel(seed):
    ts, rng = _random_ts(seed)
    if not ts.interior or not nl.bi_blocks(ts).ir_invertible:
        return
    T = nl.transfer_matrix(ts).T
    nd = len(ts.boundary)
    assert np.abs(T @ np.ones(nd)).max() <= 1e-10
    nu_pi = nl.boundary_chain(ts).nu_pi
    g = _cplx(rng, nd)
    assert abs(nu_pi @ (T @ g)) <= 1e-10 * _scale(g, T)


def test_bi_d2n_examples(path4):
    assert np.allclose(nl.bi_d2n(path4, [1, 0]), [1 / 6, -1 / 6], atol=1e-12)
    assert np.abs(nl.bi_d2n(path4, [2, 2])).max() <= 1e-12
    T = nl.transfer_matrix(path4)
    assert np.allclose(T @ np.array([1.0, 0.0]), [1 / 6, -1 / 6])


def test_bi_n2d_trivial(path4):
    assert np.allclose(nl.bi_n2d(path4, [0, 0], c=3.0), [3, 3])
    with pytest.raises(nl.SolvabilityError):
        nl.bi_n2d(path4, [1, 0])
    with pytest.raises(ValueError, match="not a boundary"):
        nl.bi_n2d(path4, [0, 0], anchor="2")


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_d2n_n2d_round_trip(seed):
    ts, rng = _random_ts(seed)
    if not ts.interior or not nl.bi_blocks(ts).ir_invertible:
        return
    d = list(ts.boundary)
    g2 = _cplx(rng, len(d))
    f = _cplx(rng, len(ts.interior))
    g1 = nl.bi_d2n(ts, g2, f)
    z = d[int(rng.integers(len(d)))]
    back = nl.bi_n2d(ts, g1, f, anchor=z, c=g2[d.index(z)])
    assert np.abs(back - g2).max() <= 1e-8 * _scale(g2, g1)
    # the pair (f, g1, g2) is admissible plate data
    assert nl.plate1_condition(ts, f, g1, g2).satisfied


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_condition_equivalence(seed):
    ts, rng = _random_ts(seed)
    if not ts.interior:
        return
    f, g = _cplx(rng, len(ts.interior)), _cplx(rng, len(ts.boundary))
    a = nl.bineumann_condition(ts, f, g)
    b = nl.bilaplace.bi_n2d_condition(ts, g, f)
    assert abs(a - b) <= 1e-10 * _scale(a, b, f, g)


# -- iterated Poisson, bi-Neumann, bi-Dirichlet -------------------------------------------

def test_zero_data_gives_zero(path4):
    assert np.array_equal(nl.solve_iterated_poisson(path4, np.zeros(5)), np.zeros(5))
    assert np.array_equal(nl.solve_bineumann(path4, np.zeros(3), np.zeros(2)), np.zeros(5))
    assert np.abs(nl.solve_bidirichlet(path4, np.zeros(3), np.zeros(2))).max() == 0


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_second_order_residuals(seed):
    ts, rng = _random_ts(seed)
    i, d = list(ts.interior), list(ts.boundary)
    f = _cplx(rng, ts.n)
    f -= ts.pi @ f
    u = nl.solve_iterated_poisson(ts, f)
    assert np.abs(_lap(ts, _lap(ts, u)) - f).max() <= 1e-9 * _scale(u, f)
    assert u[ts.root] == 0
    if not i:
        return
    fi, g = _cplx(rng, len(i)), _cplx(rng, len(d))
    # make g admissible for bi-Neumann by shifting along nu_pi
    nu_pi = nl.boundary_chain(ts).nu_pi
    g = g - nl.bineumann_condition(ts, fi, g) / (nu_pi @ nu_pi) * nu_pi
    u = nl.solve_bineumann(ts, fi, g)
    L = _lap(ts, u)
    assert np.abs(_lap(ts, L)[i] - fi).max() <= 1e-9 * _scale(u, L)
    assert np.abs(-L[d] - g).max() <= 1e-9 * _scale(u, L)
    if nl.bi_blocks(ts).invertible:
        g = _cplx(rng, len(d))
        u = nl.solve_bidirichlet(ts, fi, g)
        assert np.abs(_lap(ts, _lap(ts, u))[i] - fi).max() <= 1e-9 * _scale(u)
        assert np.array_equal(u[d], g)
        zero = nl.solve_bidirichlet(ts, np.zeros(len(i)), np.zeros(len(d)))
        assert np.abs(zero).max() == 0


def test_bineumann_condition_gate(path4):
    with pytest.raises(nl.SolvabilityError) as info:
        nl.solve_bineumann(path4, np.ones(3), np.zeros(2))
    assert info.value.residual != 0


def test_bidirichlet_constants():
    ts, rng = _random_ts(41, reversible=True)
    u = nl.solve_bidirichlet(ts, np.zeros(len(ts.interior)), np.full(len(ts.boundary), 2 - 1j))
    assert np.allclose(u, 2 - 1j, atol=1e-12)


# -- plate, first variant -----------------------------------------------------------

def test_plate1_constants(path4):
    cond = nl.plate1_condition(path4, np.zeros(3), np.zeros(2), [4, 4])
    assert cond.satisfied and np.abs(cond.residual).max() <= 1e-12
    assert np.allclose(nl.solve_plate1(path4, np.zeros(3), np.zeros(2), [4, 4]), 4)


def test_plate1_violation(path4):
    with pytest.raises(nl.SolvabilityError):
        nl.solve_plate1(path4, np.zeros(3), np.zeros(2), [1, 0])


def test_plate1_single_boundary_point():
    ts, rng = _random_ts(43, 5, 9)
    z = ts.root
    ts = ts.with_boundary([z])
    i = list(ts.interior)
    G = o.kernel(ts.P, i)
    f = rng.normal(size=len(i))
    Pdi, Pid = ts.block([z], i), ts.block(i, [z])
    R = (Pdi @ G @ G @ Pid)[0, 0]
    g1 = -(Pdi @ G @ G @ f)[0] / (1 + R)
    g2 = 1.7
    u = nl.solve_plate1(ts, f, [g1], [g2])
    assert np.allclose(u[i], G @ G @ f + g1 * G.sum(axis=1) + g2, atol=1e-10)
    assert u[z] == g2


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_plate1_condition_implies_bineumann_condition(seed):
    ts, rng = _random_ts(seed)
    if not ts.interior or not nl.bi_blocks(ts).ir_invertible:
        return
    f = _cplx(rng, len(ts.interior))
    g2 = _cplx(rng, len(ts.boundary))
    g1 = nl.bi_d2n(ts, g2, f)
    assert nl.plate1_condition(ts, f, g1, g2).satisfied
    assert abs(nl.bineumann_condition(ts, f, g1)) <= 1e-9 * _scale(f, g1, g2)
    u = nl.solve_plate1(ts, f, g1, g2)
    L = _lap(ts, u)
    i, d = list(ts.interior), list(ts.boundary)
    assert np.abs(_lap(ts, L)[i] - f).max() <= 1e-9 * _scale(u, L)
    assert np.abs(-L[d] - g1).max() <= 1e-9 * _scale(u, L)
    assert np.abs(u[d] - g2).max() <= 1e-12 * _scale(g2)


# -- plate, second variant ---------------------------------------------------------

def test_plate2_constants():
    ts = nl.build_transition(nl.path_a(6))
    u = nl.solve_plate2(ts, np.zeros(3), np.zeros(2), [5, 5])
    assert np.allclose(u, 5)


def test_plate2_path_is_shifted_example():
    N = 7
    ts = nl.build_transition(nl.path_a(N))
    rng = np.random.default_rng(5)
    f = rng.normal(size=N - 3)
    g1 = rng.normal(size=2)
    g2 = rng.normal(size=2)
    u = nl.solve_plate2(ts, f, g1, g2)
    # sub-network on 1..N-1 is the path of length N-2; data g = g2(neighbour) - g1
    inner = nl.build_transition(nl.path_a(N - 2))
    gY = np.array([g2[0], g2[1]]) - g1
    assert np.allclose(u[1:N], nl.solve_bidirichlet(inner, f, gY), atol=1e-12)
    star = nl.normal_derivative(ts, u, "star", Y=range(1, N))
    assert np.allclose(star, g1, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_plate2_residuals_reversible(seed):
    ts, rng = _random_ts(seed, 5, 12, reversible=True)
    i, d = list(ts.interior), list(ts.boundary)
    try:
        sub = nl.subnetwork_transition(ts, i)
    except (nl.NetworkError, ValueError):
        return
    dY = [i[k] for k in sub.boundary]
    Yo = [i[k] for k in sub.interior]
    f, g1, g2 = _cplx(rng, len(Yo)), _cplx(rng, len(dY)), _cplx(rng, len(d))
    u = nl.solve_plate2(ts, f, g1, g2)
    uy = u[i]
    Ly = sub.P @ uy - uy
    scale = _scale(u, Ly)
    assert np.abs((sub.P @ Ly - Ly)[list(sub.interior)] - f).max(initial=0) <= 1e-9 * scale
    assert np.abs(nl.normal_derivative(ts, u, "star", Y=i) - g1).max() <= 1e-9 * scale
    assert np.array_equal(u[d], g2)


# -- iterated Dirichlet -------------------------------------------------------------

def test_iterated_dirichlet_path6():
    N = 6
    ts = nl.build_transition(nl.path_a(N))
    rng = np.random.default_rng(9)
    f, g1, g2 = rng.normal(size=3), rng.normal(size=2), rng.normal(size=2)
    u = nl.solve_iterated_dirichlet(ts, f, g1, g2)
    GX = o.path_green_interior(N)  # on 1..5
    GY = o.path_green_interior(N - 2)  # on 2..4 after shifting by one
    h1 = np.concatenate([[g1[0]], o.path_hitting(N - 2) @ g1, [g1[1]]])
    h2 = o.path_hitting(N) @ g2
    pad = np.concatenate([[0], GY @ f, [0]])
    assert np.allclose(u[1:N], GX @ pad - GX @ h1 + h2, atol=1e-12)
    L = _lap(ts, u)
    assert np.allclose(_lap(ts, L)[2:5], f) and np.allclose(L[[1, 5]], g1)


def test_iterated_dirichlet_constants_and_errors(path4):
    ts = nl.build_transition(nl.path_a(6))
    assert np.allclose(nl.solve_iterated_dirichlet(ts, np.zeros(3), np.zeros(2), [1, 1]), 1)
    with pytest.raises(ValueError):
        nl.solve_iterated_dirichlet(nl.build_transition(nl.path_a(3)), [], [0, 0], [0, 0])


# -- bi-harmonic kernels ----------------------------------------------------------

def test_biharmonic_kernels_path6():
    ts = nl.build_transition(nl.path_a(6))
    it = nl.biharmonic_green(ts, "iterated")
    assert it.cols == (2, 3, 4) and np.all(it.matrix > 0)
    sq = nl.biharmonic_green(ts, "squared")
    G = nl.green_restricted(ts, ts.interior).matrix
    assert np.array_equal(sq.matrix, G @ G) and sq.nonnegative
    p2 = nl.biharmonic_green(ts, "plate2")
    assert np.allclose(p2.matrix @ nl.bi_blocks(ts).S, np.eye(5), atol=1e-10)
    assert p2.nonnegative == (p2.negative_entries == 0)
    assert p2.negative_entries == int((p2.matrix < -1e-12).sum())
    with pytest.raises(ValueError):
        nl.biharmonic_green(ts, "cubed")
    with pytest.raises(nl.SingularSystemError):
        nl.biharmonic_green(nl.build_transition(nl.cycle(8)), "plate2")


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_squared_and_iterated_kernels_nonnegative(seed):
    ts, _ = _random_ts(seed)
    if not ts.interior:
        return
    assert nl.biharmonic_green(ts, "squared").nonnegative
    try:
        assert nl.biharmonic_green(ts, "iterated").nonnegative
    except ValueError:
        pass


def test_plate2_kernel_not_positive_everywhere():
    # positive on the path, but negative entries show up on generic reversible chains
    found = 0
    for s in range(40):
        r = np.random.default_rng(s)
        ts = nl.build_transition(nl.random_network(int(r.integers(4, 10)), r, reversible=True))
        if ts.interior:
            k = nl.biharmonic_green(ts, "plate2")
            assert np.allclose(k.matrix @ nl.bi_blocks(ts).S, np.eye(len(ts.interior)), atol=1e-9)
            found += k.negative_entries > 0
    assert found > 0
