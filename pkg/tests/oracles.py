"""Independent reference computations for the test suite.

Nothing here calls the solvers of the package: closed forms are evaluated
directly, kernels come from Neumann series or ``numpy.linalg.inv``, and
connectivity from plain breadth-first search.
"""

from collections import deque

import numpy as np


# -- Chebyshev polynomials by the three-term recurrence ----------------------------

def cheb_first(k, x):
    """``T_k(x)``: ``T_0 = 1``, ``T_1 = x``, ``T_{k+1} = 2x T_k - T_{k-1}``."""
    a, b = 1.0 + 0 * x, x
    if k == 0:
        return a
    for _ in range(k - 1):
        a, b = b, 2 * x * b - a
    return b


def cheb_second(k, x):
    """``U_k(x)`` with ``U_{-1} = 0``, ``U_0 = 1``, ``U_{k+1} = 2x U_k - U_{k-1}``."""
    if k == -1:
        return 0.0 * x
    a, b = 0.0 * x, 1.0 + 0 * x
    for _ in range(k):
        a, b = b, 2 * x * b - a
    return b


def path_green_potential(N, lam):
    """Kernel of ``I - P / lam`` on the whole path ``0..N``."""
    eps = np.full(N + 1, 2.0)
    eps[[0, N]] = 1.0
    G = np.empty((N + 1, N + 1), dtype=np.result_type(lam, float))
    c = lam / (lam**2 - 1) / cheb_second(N - 1, lam)
    for k in range(N + 1):
        for m in range(N + 1):
            lo, hi = min(k, m), max(k, m)
            G[k, m] = eps[m] * c * cheb_first(lo, lam) * cheb_first(N - hi, lam)
    return G


def path_green_potential_interior(N, lam):
    """Kernel of ``I - P / lam`` on ``1..N-1`` (indices shifted by one)."""
    G = np.empty((N - 1, N - 1), dtype=np.result_type(lam, float))
    RN = cheb_second(N - 1, lam)
    for k in range(1, N):
        for m in range(1, N):
            lo, hi = min(k, m), max(k, m)
            G[k - 1, m - 1] = 2 * lam * cheb_second(lo - 1, lam) * cheb_second(N - hi - 1, lam) / RN
    return G


def path_hitting_potential(N, lam):
    RN = cheb_second(N - 1, lam)
    return np.array(
        [[cheb_second(N - k - 1, lam) / RN, cheb_second(k - 1, lam) / RN] for k in range(1, N)]
    )


# -- simple random walk on 0..N --------------------------------------------------------

def path_pi(N):
    pi = np.full(N + 1, 1.0 / N)
    pi[0] = pi[N] = 1.0 / (2 * N)
    return pi


def path_green_ground(N):
    """``G`` on ``1..N`` (ground 0): ``2 min(k, m)`` for ``m < N``, ``k`` for ``m = N``."""
    G = np.empty((N, N))
    for k in range(1, N + 1):
        for m in range(1, N + 1):
            G[k - 1, m - 1] = k if m == N else 2 * min(k, m)
    return G


def path_green_interior(N):
    G = np.empty((N - 1, N - 1))
    for k in range(1, N):
        for m in range(1, N):
            lo, hi = min(k, m), max(k, m)
            G[k - 1, m - 1] = 2 * lo * (N - hi) / N
    return G


def path_hitting(N):
    return np.array([[(N - k) / N, k / N] for k in range(1, N)])


def path_boundary_mats(N):
    Q = np.array([[N - 1, 1], [1, N - 1]]) / N
    R = (N - 1) / (3 * N) * np.array([[2 * N - 1, N + 1], [N + 1, 2 * N - 1]])
    IRinv = np.array([[2 * N**2 + 1, 1 - N**2], [1 - N**2, 2 * N**2 + 1]]) / (N**3 + 2 * N)
    T = 3 / (N**2 + 2) * np.array([[1, -1], [-1, 1]])
    return Q, R, IRinv, T


def robin_kernel(N):
    G = np.empty((N + 1, N + 1))
    for k in range(N + 1):
        for m in range(N + 1):
            lo, hi = min(k, m), max(k, m)
            G[k, m] = 2 * (lo + 1) * (N + 1 - hi) / (N + 2)
    return G


# -- funnel chain ------------------------------------------------------------------------

def funnel_matrix(p):
    p = np.asarray(p, float)
    N = p.size
    P = np.zeros((N, N))
    P[0] = p
    for k in range(1, N):
        P[k, k - 1] = 1
    return P


def funnel_pi(p):
    p = np.asarray(p, float)
    N = p.size
    total = sum((m + 1) * p[m] for m in range(N))
    return np.array([p[k:].sum() for k in range(N)]) / total


def funnel_green_ground(N):
    G = np.zeros((N - 1, N - 1))
    for k in range(2, N + 1):
        for m in range(2, k + 1):
            G[k - 2, m - 2] = 1.0
    return G


def funnel_green_interior_printed(p):
    """Interior kernel exactly as printed: ``pi(m)/pi(N-1)`` for ``k <= m``."""
    pi = funnel_pi(p)
    N = len(p)
    x = pi[N - 2]
    G = np.empty((N - 2, N - 2))
    for k in range(1, N - 1):
        for m in range(1, N - 1):
            G[k - 1, m - 1] = pi[m - 1] / x if k <= m else (pi[m - 1] - x) / x
    return G


def funnel_green_interior_corrected(p):
    """Same two expressions with the case split swapped (``m <= k`` first)."""
    pi = funnel_pi(p)
    N = len(p)
    x = pi[N - 2]
    G = np.empty((N - 2, N - 2))
    for k in range(1, N - 1):
        for m in range(1, N - 1):
            G[k - 1, m - 1] = pi[m - 1] / x if m <= k else (pi[m - 1] - x) / x
    return G


def funnel_boundary_mats(p):
    pi = funnel_pi(p)
    N = len(p)
    x, y = pi[N - 2], pi[N - 1]
    c = pi[0] / x
    Q = np.array([[c * p[N - 2], c * p[N - 1]], [1.0, 0.0]])
    C = pi[0] * (1 - x - y) / x**2
    R = np.array([[C * p[N - 2], C * p[N - 1]], [0.0, 0.0]])
    return Q, R


def funnel_D_printed(p):
    pi = funnel_pi(p)
    N = len(p)
    x, y = pi[N - 2], pi[N - 1]
    return (y**2 - y + 2 * y * x) / (y**2 - y + x)


def funnel_D_derived(p):
    pi = funnel_pi(p)
    N = len(p)
    x, y = pi[N - 2], pi[N - 1]
    return (y - y**2) / (y**2 - y + x)


# -- generic numerical references -------------------------------------------------------

def neumann_series(PA, terms=200):
    """``sum_{n < terms} PA^n``."""
    S = np.eye(PA.shape[0], dtype=PA.dtype)
    term = S.copy()
    for _ in range(terms - 1):
        term = term @ PA
        S = S + term
    return S


def stationary_eig(P):
    """Left Perron eigenvector via ``numpy.linalg.eig``."""
    w, v = np.linalg.eig(P.T)
    k = np.argmin(np.abs(w - 1))
    pi = np.real(v[:, k])
    return pi / pi.sum()


def reachable(adj, s):
    seen = {s}
    todo = deque([s])
    while todo:
        x = todo.popleft()
        for y in np.flatnonzero(adj[x]):
            if y not in seen:
                seen.add(int(y))
                todo.append(int(y))
    return seen


def strongly_connected_bfs(adj):
    adj = np.asarray(adj) != 0
    n = adj.shape[0]
    return len(reachable(adj, 0)) == n and len(reachable(adj.T, 0)) == n


def kernel(P, A, lam=1.0):
    A = list(A)
    return np.linalg.inv(lam * np.eye(len(A)) - P[np.ix_(A, A)])


def boundary_resolvent(P, interior, boundary, lam):
    i, d = list(interior), list(boundary)
    G = kernel(P, i, lam)
    return P[np.ix_(d, d)] + P[np.ix_(d, i)] @ G @ P[np.ix_(i, d)]


def r_of_lambda(P, interior, boundary, lam):
    i, d = list(interior), list(boundary)
    G = kernel(P, i, lam)
    return P[np.ix_(d, i)] @ G @ G @ P[np.ix_(i, d)]
