"""First-order boundary value problems for the normalized Laplacian ``P - I``.

All solvers take a :class:`~netlaplace.markov.TransitionSystem` (which carries
the boundary and the root) and return the solution as a vector over all
vertices.  Data on the interior are vectors in interior order, data on the
boundary vectors in boundary order; mappings ``vertex -> value`` work too.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import _linalg
from .exceptions import ResidualError, SolvabilityError
from .markov import boundary_chain, induced_boundary, reverse, subnetwork_transition

__all__ = [
    "NormalDerivativeKind",
    "PotentialTransform",
    "BalayageResult",
    "apply_laplacian",
    "normal_derivative",
    "charge",
    "solve_poisson",
    "solve_neumann",
    "solve_dirichlet",
    "harmonic_extension",
    "solve_mixed",
    "dirichlet_to_neumann",
    "potential_transform",
    "solve_poisson_potential",
    "solve_dirichlet_potential",
    "RobinTransform",
    "robin_transform",
    "solve_robin",
    "balayage",
]

BALANCE_TOL = 1e-9


class NormalDerivativeKind(str, enum.Enum):
    STANDARD = "standard"
    REVERSED = "reversed"
    SUBNETWORK = "subnetwork"
    EXTERIOR_STAR = "star"
    OVERRIDDEN = "override"

    @classmethod
    def parse(cls, kind):
        aliases = {"exterior_star": "star", "overridden": "override"}
        if isinstance(kind, cls):
            return kind
        return cls(aliases.get(kind, kind))


def _dtype(*arrays):
    return np.result_type(float, *[np.asarray(a).dtype for a in arrays])


def apply_laplacian(ts, u):
    """``(P - I) u`` for ``u`` defined on all vertices."""
    u = ts.vector(u)
    return ts.P @ u - u


def charge(ts, f, support=None):
    """``sum_x pi(x) f(x)`` over ``support`` (default: all vertices)."""
    support = tuple(range(ts.n)) if support is None else tuple(support)
    return ts.pi[list(support)] @ ts.vector(f, support)


def normal_derivative(ts, u, kind="standard", Y=None, overrides=None):
    """Outer normal derivative of ``u`` in one of five conventions.

    ``standard``
        ``-(P - I) u`` on the boundary.
    ``reversed``
        the same with the time-reversed chain.
    ``subnetwork``
        ``-(P_[Y] - I) u`` on the induced boundary of ``Y``.
    ``star``
        ``sum_{z not in Y} p(y, z) (u(z) - u(y)) / p(y, X \\ Y)`` on the
        induced boundary of ``Y``.
    ``override``
        ``-sum_y p'(x, y) (u(y) - u(x))`` with replacement rows ``p'`` given
        by ``overrides`` (vertex -> row); without ``overrides`` the rows of
        ``ts`` itself are used, which is right for a system built with
        :meth:`~netlaplace.markov.TransitionSystem.with_overrides`.

    The result is ordered like the boundary (or induced boundary).
    """
    kind = NormalDerivativeKind.parse(kind)
    u = ts.vector(u)
    bd = list(ts.boundary)
    if kind is NormalDerivativeKind.STANDARD:
        return -(ts.P[bd] @ u - u[bd])
    if kind is NormalDerivativeKind.REVERSED:
        return -(reverse(ts).P[bd] @ u - u[bd])
    if kind is NormalDerivativeKind.OVERRIDDEN:
        P = ts.with_overrides(overrides).P if overrides else ts.P
        return -(P[bd] @ u - u[bd])
    if Y is None:
        raise ValueError(f"normal derivative {kind.value!r} needs the vertex subset Y")
    Y = sorted(set(ts.indices(Y)))
    if kind is NormalDerivativeKind.SUBNETWORK:
        sub = subnetwork_transition(ts, Y)
        uy = u[Y]
        dy = list(sub.boundary)
        return -(sub.P[dy] @ uy - uy[dy])
    outside = [i for i in range(ts.n) if i not in set(Y)]
    dY = list(induced_boundary(ts, Y))
    out = np.empty(len(dY), dtype=u.dtype)
    for k, y in enumerate(dY):
        w = ts.P[y, outside]
        mass = w.sum()
        if mass <= 0:
            raise ValueError(f"vertex {ts.vertices[y]!r} has no transition leaving Y")
        out[k] = w @ (u[outside] - u[y]) / mass
    return out


def _check_balance(value, scale, tol, what):
    if np.isfinite(tol) and abs(value) > tol * scale:
        raise SolvabilityError(f"{what} violated: residual {value:.6g}", residual=value)


def solve_poisson(ts, f, ground=None, tol=BALANCE_TOL):
    """Grounded solution of ``(P - I) u = f`` on all vertices.

    Parameters
    ----------
    f : array_like or mapping
        Charge on all vertices; it must be balanced, ``sum pi f = 0``.
    ground : vertex, optional
        Vertex where ``u`` vanishes; defaults to the system's root.

    Returns
    -------
    ndarray
        ``u = -G_{X minus ground} f`` extended by 0 at the ground vertex.
        Every other solution differs by a constant.

    Raises
    ------
    SolvabilityError
        If ``|sum pi f| > tol * max|f|``.
    """
    f = ts.vector(f)
    o = ts.root if ground is None else ts.index_of(ground)
    _check_balance(ts.pi @ f, np.abs(f).max(initial=0.0), tol, "charge balance")
    rest = [i for i in range(ts.n) if i != o]
    u = np.zeros(ts.n, dtype=f.dtype)
    A = np.eye(len(rest)) - ts.block(rest, rest)
    u[rest] = _linalg.solve(A, -f[rest], what="I - P restricted to X minus ground")
    return u


def solve_neumann(ts, f, g, ground=None, tol=BALANCE_TOL):
    """Solve ``(P - I) u = f`` on the interior with ``-(P - I) u = g`` on the boundary.

    Solvable iff ``sum_int pi f = sum_bd pi g``; the returned representative is
    grounded, the solution is unique up to an additive constant.
    """
    interior, boundary = ts.interior, ts.boundary
    f = ts.vector(f, interior)
    g = ts.vector(g, boundary)
    pi = ts.pi
    lhs = pi[list(interior)] @ f
    rhs = pi[list(boundary)] @ g
    scale = max(np.abs(f).max(initial=0.0), np.abs(g).max(initial=0.0))
    _check_balance(lhs - rhs, scale, tol, "Neumann compatibility")
    full = np.zeros(ts.n, dtype=_dtype(f, g))
    full[list(interior)] = f
    full[list(boundary)] = -g
    return solve_poisson(ts, full, ground, tol=np.inf)


def solve_dirichlet(ts, f, g):
    """Unique solution of ``(P - I) u = f`` on the interior with ``u = g`` on the boundary.

    ``u = -G_int (f - P_int,bd g)`` on the interior, ``u = g`` on the boundary.
    """
    interior, boundary = list(ts.interior), list(ts.boundary)
    f = ts.vector(f, interior)
    g = ts.vector(g, boundary)
    u = np.zeros(ts.n, dtype=_dtype(f, g))
    u[boundary] = g
    if interior:
        A = np.eye(len(interior)) - ts.block(interior, interior)
        rhs = ts.block(interior, boundary) @ g - f
        u[interior] = _linalg.solve(A, rhs, what="I - P restricted to the interior")
    return u


def harmonic_extension(ts, g):
    """``h(x) = sum_y nu_x(y) g(y)``: harmonic on the interior, equal to ``g`` on the boundary."""
    return solve_dirichlet(ts, np.zeros(len(ts.interior)), g)


def solve_mixed(ts, f, g, dirichlet, neumann=None):
    """Dirichlet data on ``dirichlet``, Neumann data on the rest of the boundary.

    ``g`` is given on the whole boundary; its values on the Dirichlet part are
    boundary values, on the Neumann part outer normal derivatives.
    """
    boundary = ts.boundary
    D = set(ts.indices(dirichlet))
    N = set(boundary) - D if neumann is None else set(ts.indices(neumann))
    if not D or not N or D & N or D | N != set(boundary):
        raise ValueError("dirichlet and neumann parts must be non-empty and partition the boundary")
    f = ts.vector(f, ts.interior)
    g = ts.vector(g, boundary)
    gmap = dict(zip(boundary, g))
    W = sorted(set(ts.interior) | N)
    Dl = sorted(D)
    ftilde = np.array(
        [f[ts.interior.index(w)] if w not in N else -gmap[w] for w in W],
        dtype=_dtype(f, g),
    )
    gD = np.array([gmap[d] for d in Dl])
    u = np.zeros(ts.n, dtype=ftilde.dtype)
    u[Dl] = gD
    A = np.eye(len(W)) - ts.block(W, W)
    u[W] = _linalg.solve(A, ts.block(W, Dl) @ gD - ftilde, what="I - P on interior and Neumann part")
    return u


def dirichlet_to_neumann(ts, g):
    """``(I - Q) g``: normal derivative of the harmonic extension of ``g``."""
    g = ts.vector(g, ts.boundary)
    Q = boundary_chain(ts).Q
    return g - Q @ g


# -- potentials -------------------------------------------------------------

POTENTIAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PotentialTransform:
    """Rescaled chain ``p~(x, y) = p(x, y) / (1 + v(x))`` on a vertex subset.

    ``P_tilde`` holds the rows of ``support`` over all vertices, ``G_tilde`` is
    ``(I - P_tilde restricted to support)^{-1}``.
    """

    support: tuple
    v: np.ndarray
    P_tilde: np.ndarray
    f_tilde: np.ndarray
    G_tilde: np.ndarray


def _check_potential(v, strict):
    scale = np.abs(1.0 + v)
    if np.any(scale < 1.0 - POTENTIAL_TOL):
        raise ValueError("potential violates |1 + v(x)| >= 1")
    if strict and not np.any(scale > 1.0 + POTENTIAL_TOL):
        raise ValueError("potential needs |1 + v(x)| > 1 somewhere")


def potential_transform(ts, v, f=None, support=None, strict=None):
    """Build the rescaled matrix, right-hand side and Green kernel for a potential ``v``.

    ``support`` defaults to all vertices; in that case ``|1 + v| > 1`` must hold
    somewhere.  On a strict subset the killing at the complement already makes
    ``I - P_tilde`` invertible and only ``|1 + v| >= 1`` is required.
    """
    support = tuple(range(ts.n)) if support is None else tuple(support)
    if strict is None:
        strict = len(support) == ts.n
    v = ts.vector(v, support)
    _check_potential(v, strict)
    lam = 1.0 + v
    Pt = ts.P[list(support)] / lam[:, None]
    ft = None if f is None else ts.vector(f, support) / lam
    A = np.eye(len(support)) - Pt[:, list(support)]
    Gt = _linalg.compact(_linalg.inverse(A, what="I - P~"))
    return PotentialTransform(support, v, Pt, ft, Gt)


def solve_poisson_potential(ts, f, v):
    """Unique solution of ``(P - I) u - v u = f`` on all vertices (complex ``v`` allowed)."""
    tr = potential_transform(ts, v, f)
    return -tr.G_tilde @ tr.f_tilde


def solve_dirichlet_potential(ts, f, g, v):
    """``(P - I) u - v u = f`` on the interior, ``u = g`` on the boundary.

    ``v`` is given on the interior only.
    """
    interior, boundary = list(ts.interior), list(ts.boundary)
    g = ts.vector(g, boundary)
    tr = potential_transform(ts, v, f, interior)
    u = np.zeros(ts.n, dtype=_dtype(tr.f_tilde, g, tr.G_tilde))
    u[boundary] = g
    u[interior] = -tr.G_tilde @ (tr.f_tilde - tr.P_tilde[:, boundary] @ g)
    return u


@dataclass(frozen=True, eq=False)
class RobinTransform:
    """Robin problem recast as a Dirichlet problem.

    ``support`` is the interior together with the boundary points where
    ``beta != 0``; ``dirichlet`` holds the points with ``beta = 0``.  Rows of
    ``P_tilde`` (over all vertices) are scaled by ``beta / (alpha + beta)`` at
    the added boundary points, and ``G_tilde`` inverts ``I - P_tilde`` on the
    support.
    """

    support: tuple
    dirichlet: tuple
    alpha: np.ndarray
    beta: np.ndarray
    P_tilde: np.ndarray
    G_tilde: np.ndarray


def robin_transform(ts, alpha, beta):
    """Check the Robin coefficients and build the rescaled chain and its kernel.

    Boundary points with ``beta = 0`` need ``alpha != 0``.  Elsewhere
    ``|alpha + beta| >= |beta|`` must hold, strictly at some point when no
    boundary point has ``beta = 0``.
    """
    boundary = ts.boundary
    alpha = ts.vector(alpha, boundary)
    beta = ts.vector(beta, boundary)
    B = [b for b, be in zip(boundary, beta) if be == 0]
    A = [b for b, be in zip(boundary, beta) if be != 0]
    coef = dict(zip(boundary, zip(alpha, beta)))
    for b in B:
        if coef[b][0] == 0:
            raise ValueError(f"alpha and beta both vanish at {ts.vertices[b]!r}")
    ratio = np.array([abs(coef[a][0] + coef[a][1]) / abs(coef[a][1]) for a in A])
    if np.any(ratio < 1.0 - POTENTIAL_TOL):
        raise ValueError("Robin coefficients violate |alpha + beta| >= |beta|")
    if not B and not np.any(ratio > 1.0 + POTENTIAL_TOL):
        raise ValueError("Robin coefficients need |alpha + beta| > |beta| somewhere")
    W = sorted(set(ts.interior) | set(A))
    scale = np.ones(len(W), dtype=_dtype(alpha, beta))
    for k, w in enumerate(W):
        if w in coef:
            a, b = coef[w]
            scale[k] = b / (a + b)
    Pt = ts.P[W] * scale[:, None]
    Gt = _linalg.compact(_linalg.inverse(np.eye(len(W)) - Pt[:, W], what="I - P~ for the Robin problem"))
    return RobinTransform(tuple(W), tuple(B), alpha, beta, Pt, Gt)


def solve_robin(ts, f, g, alpha, beta):
    """Solve ``(P - I) u = f`` on the interior with ``alpha u + beta dn u = g`` on the boundary.

    Boundary points with ``beta = 0`` act as Dirichlet points with value
    ``g / alpha``.  The others join the interior with transition probabilities
    scaled by ``beta / (alpha + beta)`` and charge ``-g / (alpha + beta)``;
    see :func:`robin_transform` for the admissible coefficients.
    """
    interior, boundary = ts.interior, ts.boundary
    f = ts.vector(f, interior)
    g = ts.vector(g, boundary)
    tr = robin_transform(ts, alpha, beta)
    gmap = dict(zip(boundary, g))
    amap = dict(zip(boundary, tr.alpha))
    bmap = dict(zip(boundary, tr.beta))
    fmap = dict(zip(interior, f))
    dtype = _dtype(f, g, tr.alpha, tr.beta)
    ftilde = np.array(
        [fmap[w] if w in fmap else -gmap[w] / (amap[w] + bmap[w]) for w in tr.support],
        dtype=dtype,
    )
    B, W = list(tr.dirichlet), list(tr.support)
    gB = np.array([gmap[b] / amap[b] for b in B], dtype=dtype)
    u = np.zeros(ts.n, dtype=dtype)
    u[B] = gB
    u[W] = tr.G_tilde @ (tr.P_tilde[:, B] @ gB - ftilde)
    return u


# -- balayage ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BalayageResult:
    """Reduced function ``u^Y`` and swept charge ``f^Y = (P - I) u^Y``."""

    Y: tuple
    potential: np.ndarray
    reduite: np.ndarray
    balayee: np.ndarray


def balayage(ts, f, Y, ground=None, tol=BALANCE_TOL):
    """Sweep a balanced charge ``f`` onto the vertex subset ``Y``.

    The reduced function agrees with the grounded potential ``u`` of ``f`` on
    ``Y`` and is harmonic off ``Y``.  The swept charge equals ``f`` on the
    inner part of ``Y``, ``f + P_{dY, Z} G_Z f`` on the induced boundary
    ``dY`` of ``Y`` (``Z`` the complement of ``Y``), and vanishes on ``Z``.
    """
    Yi = sorted(set(ts.indices(Y)))
    if not Yi or len(Yi) == ts.n:
        raise ValueError("balayage needs a non-empty strict subset")
    f = ts.vector(f)
    u = solve_poisson(ts, f, ground, tol=tol)
    Z = [i for i in range(ts.n) if i not in set(Yi)]
    AZ = np.eye(len(Z)) - ts.block(Z, Z)
    reduite = u.copy()
    reduite[Z] = _linalg.solve(AZ, ts.block(Z, Yi) @ u[Yi], what="I - P off Y")

    balayee = np.zeros(ts.n, dtype=u.dtype)
    balayee[Yi] = f[Yi]
    dY = list(induced_boundary(ts, Yi))
    GZf = _linalg.solve(AZ, f[Z], what="I - P off Y")
    balayee[dY] += ts.block(dY, Z) @ GZf

    direct = ts.P @ reduite - reduite
    scale = max(1.0, np.abs(f).max(initial=0.0), np.abs(u).max(initial=0.0))
    if np.abs(direct - balayee).max() > 1e-8 * scale:
        raise ResidualError("swept charge disagrees with the Laplacian of the reduced function")
    return BalayageResult(tuple(Yi), u, reduite, balayee)
