"""Closed-form kernels of the built-in example networks.

These formulas are evaluated directly, without any linear solve, and serve
as regression expectations for the ``example`` command.
"""

import numpy as np

__all__ = ["path_closed_forms", "funnel_closed_forms", "cycle_closed_forms"]


def path_closed_forms(N):
    """Simple random walk on ``0..N`` with boundary ``{0, N}``.

    Index conventions: ``green_ground`` is over ``1..N``, ``green_interior``
    and ``hitting`` over ``1..N-1``, boundary matrices over ``(0, N)``.
    """
    pi = np.full(N + 1, 1.0 / N)
    pi[[0, N]] = 1.0 / (2 * N)
    ks = np.arange(1, N + 1)
    Go = 2.0 * np.minimum.outer(ks, ks)
    Go[:, -1] = ks
    inner = np.arange(1, N)
    k, m = np.meshgrid(inner, inner, indexing="ij")
    Gi = np.where(k <= m, 2.0 * k * (N - m) / N, 2.0 * m * (N - k) / N)
    hitting = np.column_stack([(N - inner) / N, inner / N])
    Q = np.array([[N - 1, 1], [1, N - 1]]) / N
    R = (N - 1) / (3 * N) * np.array([[2 * N - 1, N + 1], [N + 1, 2 * N - 1]])
    IRinv = np.array([[2 * N**2 + 1, 1 - N**2], [1 - N**2, 2 * N**2 + 1]]) / (N**3 + 2 * N)
    T = 3.0 / (N**2 + 2) * np.array([[1.0, -1.0], [-1.0, 1.0]])
    return {
        "pi": pi,
        "green_ground": Go,
        "green_interior": Gi,
        "hitting": hitting,
        "Q": Q,
        "R": R,
        "I_plus_R_inverse": IRinv,
        "T": T,
    }


def funnel_closed_forms(p):
    """Funnel chain ``p(1, k) = p_k``, ``p(k, k-1) = 1`` on ``1..N`` (holding at 1 kept).

    ``p`` is the full vector ``p_1..p_N``.  ``green_interior`` uses the case
    split that inverts ``I - P`` on ``1..N-2`` (larger index column: ``pi(m)``
    over ``pi(N-1)`` minus one; otherwise ``pi(m) / pi(N-1)``), and ``T`` has
    top-left entry ``(y - y^2) / (y^2 - y + x)`` with ``x = pi(N-1)``,
    ``y = pi(N)``.
    """
    p = np.asarray(p, dtype=float)
    N = p.size
    tail = np.cumsum(p[::-1])[::-1]
    pi = tail / np.sum(np.arange(1, N + 1) * p)
    ks = np.arange(2, N + 1)
    Go = (ks[None, :] <= ks[:, None]).astype(float)
    inner = np.arange(1, N - 1)
    k, m = np.meshgrid(inner, inner, indexing="ij")
    x, y = pi[N - 2], pi[N - 1]
    Gi = np.where(m <= k, pi[m - 1] / x, (pi[m - 1] - x) / x)
    nu1 = p[N - 2 :] / (p[N - 2] + p[N - 1])
    hitting = np.tile(nu1, (N - 2, 1))
    Q = np.array([nu1, [1.0, 0.0]])
    C = pi[0] * (1.0 - x - y) / x**2
    R = np.array([[C * p[N - 2], C * p[N - 1]], [0.0, 0.0]])
    D = (y - y**2) / (y**2 - y + x)
    T = np.array([[D, -D], [-1.0, 1.0]])
    return {
        "pi": pi,
        "green_ground": Go,
        "green_interior": Gi,
        "hitting": hitting,
        "Q": Q,
        "R": R,
        "T": T,
    }


def cycle_closed_forms(length):
    """Oriented cycle of even length ``2N`` with odd vertices on the boundary:
    ``S`` and ``I + R`` are singular exactly when ``N`` is even."""
    N = length // 2
    return {"pi": np.full(length, 1.0 / length), "S_singular": N % 2 == 0}
