"""Boundary value problems for the bi-Laplacian ``(P - I)^2``.

Block notation: ``i`` is the interior, ``d`` the boundary, ``G`` the interior
Green kernel ``(I - P_ii)^{-1}`` and ``Y = G P_id`` the hitting matrix.
"""

from dataclasses import dataclass

import numpy as np

from . import _linalg
from .exceptions import ResidualError, SingularSystemError, SolvabilityError
from .laplace import BALANCE_TOL, solve_dirichlet, solve_poisson
from .markov import (
    boundary_chain,
    green_restricted,
    induced_boundary,
    subnetwork_transition,
)

__all__ = [
    "BiLaplaceBlocks",
    "TransferMatrix",
    "PlateCondition",
    "BiharmonicKernel",
    "bi_blocks",
    "r_matrix",
    "transfer_matrix",
    "solve_iterated_poisson",
    "bineumann_condition",
    "solve_bineumann",
    "solve_bidirichlet",
    "plate1_condition",
    "solve_plate1",
    "bi_d2n",
    "bi_n2d_condition",
    "bi_n2d",
    "solve_plate2",
    "solve_iterated_dirichlet",
    "biharmonic_green",
    "apply_bilaplacian",
]

RESIDUAL_TOL = 1e-9
DUAL_FORM_TOL = 1e-8


def _scale(*arrays):
    return max([1.0] + [float(np.abs(a).max(initial=0.0)) for a in arrays])


def _dtype(*arrays):
    return np.result_type(float, *[np.asarray(a).dtype for a in arrays])


def _require_interior(ts):
    if not ts.interior:
        raise ValueError("the problem needs a non-empty interior")


def _parts(ts):
    i, d = list(ts.interior), list(ts.boundary)
    return i, d, ts.block(i, i), ts.block(i, d), ts.block(d, i), ts.block(d, d)


def _green(ts):
    return green_restricted(ts, ts.interior).matrix


def apply_bilaplacian(ts, u):
    u = ts.vector(u)
    w = ts.P @ u - u
    return ts.P @ w - w


@dataclass(frozen=True, eq=False)
class BiLaplaceBlocks:
    """Block decomposition of the bi-Laplacian along interior and boundary.

    ``(P - I)^2 = [[S, -U], [-U_prime, S_prime]]`` with rows and columns
    ordered interior first.  ``K`` is ``None`` when ``S`` is singular.
    """

    interior: tuple
    boundary: tuple
    R: np.ndarray
    S: np.ndarray
    S_prime: np.ndarray
    U: np.ndarray
    U_prime: np.ndarray
    K: np.ndarray
    invertible: bool
    ir_invertible: bool
    condition_S: float
    condition_IR: float

    def assembled(self):
        """``(P - I)^2`` in interior-then-boundary order, rebuilt from the blocks."""
        return np.block([[self.S, -self.U], [-self.U_prime, self.S_prime]])


def bi_blocks(ts):
    """Assemble ``R, S, S', U, U', K`` and decide invertibility of ``S`` and ``I + R``.

    Singularity is reported in the flags, never raised.  A matrix counts as
    singular when an LU pivot vanishes (relative size below 1e-12) or when its
    1-norm condition estimate exceeds 1e12.
    """
    _require_interior(ts)
    i, d, Pii, Pid, Pdi, Pdd = _parts(ts)
    Ii, Id = np.eye(len(i)), np.eye(len(d))
    G = _green(ts)
    A = Ii - Pii
    S = A @ A + Pid @ Pdi
    Sp = (Id - Pdd) @ (Id - Pdd) + Pdi @ Pid
    U = A @ Pid + Pid @ (Id - Pdd)
    Up = Pdi @ A + (Id - Pdd) @ Pdi
    R = Pdi @ G @ G @ Pid
    fs = _linalg.factorize(S)
    fr = _linalg.factorize(Id + R)
    K = None
    if not fs.singular:
        K = _linalg.inverse(A + G @ Pid @ Pdi, what="K")
    return BiLaplaceBlocks(
        tuple(i), tuple(d), R, S, Sp, U, Up, K,
        not fs.singular, not fr.singular, fs.condition, fr.condition,
    )


def r_matrix(ts, lam=1.0):
    """``R(lam) = P_di G(lam)^2 P_id`` with ``G(lam) = (lam I - P_ii)^{-1}``, ``|lam| >= 1``."""
    _require_interior(ts)
    i, d, _, Pid, Pdi, _ = _parts(ts)
    G = green_restricted(ts, i, lam).matrix
    return _linalg.compact(Pdi @ G @ G @ Pid)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """``T = (I + R)^{-1} (I - Q)``: maps boundary values of a biharmonic
    function to its outer normal derivative."""

    boundary: tuple
    T: np.ndarray
    condition: float

    def __matmul__(self, g):
        return self.T @ g


def _ir_factor(ts, R=None):
    R = bi_blocks(ts).R if R is None else R
    fac = _linalg.factorize(np.eye(R.shape[0]) + R)
    if fac.singular:
        raise SingularSystemError(
            f"I + R is singular (condition estimate {fac.condition:.3g})", condition=fac.condition
        )
    return fac


def transfer_matrix(ts):
    _require_interior(ts)
    i, d, _, Pid, Pdi, _ = _parts(ts)
    G = _green(ts)
    R = Pdi @ G @ G @ Pid
    fac = _ir_factor(ts, R)
    Q = boundary_chain(ts).Q
    return TransferMatrix(tuple(d), fac.solve(np.eye(len(d)) - Q), fac.condition)


# -- iterated Poisson and bi-Neumann -------------------------------------------

def solve_iterated_poisson(ts, f, ground=None, tol=BALANCE_TOL):
    """Grounded solution of ``(P - I)^2 u = f`` on all vertices.

    ``f`` must be balanced.  With ``G_o`` the kernel of ``X`` minus the
    ground vertex, ``u = G_o (G_o f - sum pi G_o f)``.
    """
    f = ts.vector(f)
    v = solve_poisson(ts, f, ground, tol=tol)
    v = v - ts.pi @ v
    return solve_poisson(ts, v, ground, tol=np.inf)


def bineumann_condition(ts, f, g):
    """``sum_int pi G f + sum_bd nu_pi g``; the bi-Neumann problem needs it to vanish."""
    _require_interior(ts)
    f = ts.vector(f, ts.interior)
    g = ts.vector(g, ts.boundary)
    G = _green(ts)
    app = boundary_chain(ts)
    return ts.pi[list(ts.interior)] @ (G @ f) + app.nu_pi @ g


def solve_bineumann(ts, f, g, ground=None, tol=BALANCE_TOL):
    """Solve ``(P - I)^2 u = f`` on the interior with ``-(P - I) u = g`` on the boundary.

    The solution exists iff :func:`bineumann_condition` vanishes and is unique
    up to an additive constant; the representative returned vanishes at
    ``ground`` (default: the root).
    """
    f = ts.vector(f, ts.interior)
    g = ts.vector(g, ts.boundary)
    cond = bineumann_condition(ts, f, g)
    if abs(cond) > tol * _scale(f, g):
        raise SolvabilityError(f"bi-Neumann condition violated: residual {cond:.6g}", residual=cond)
    # w = (P - I) u solves a Dirichlet problem with boundary values -g
    w = solve_dirichlet(ts, f, -g)
    return solve_poisson(ts, w, ground, tol=np.inf)


def solve_bidirichlet(ts, f, g):
    """Unique solution of ``(P - I)^2 u = f`` on the interior, ``u = g`` on the boundary.

    ``u = K G (f + U g)`` on the interior, where ``K G = S^{-1}``.

    Raises
    ------
    SingularSystemError
        If ``S`` is singular; then non-zero biharmonic functions vanishing on
        the boundary exist (an oriented cycle of length ``2N``, ``N`` even,
        with every other vertex on the boundary is the standard example).
    """
    blocks = bi_blocks(ts)
    if not blocks.invertible:
        raise SingularSystemError(
            f"S is singular (condition estimate {blocks.condition_S:.3g}); "
            "the bi-Dirichlet problem has no unique solution",
            condition=blocks.condition_S,
        )
    i, d = list(blocks.interior), list(blocks.boundary)
    f = ts.vector(f, i)
    g = ts.vector(g, d)
    G = _green(ts)
    u = np.zeros(ts.n, dtype=_dtype(f, g))
    u[d] = g
    rhs = f + blocks.U @ g
    u[i] = blocks.K @ (G @ rhs)
    if np.abs(blocks.S @ u[i] - rhs).max() > RESIDUAL_TOL * _scale(rhs, u):
        raise ResidualError("bi-Dirichlet solution fails S u = f + U g")
    return u


# -- plate equation, first variant -----------------------------------------------

@dataclass(frozen=True, eq=False)
class PlateCondition:
    """Residual ``(Q - I) g2 + P_di G^2 f + (I + R) g1`` of the plate solvability condition."""

    residual: np.ndarray
    satisfied: bool
    scale: float


def plate1_condition(ts, f, g1, g2, tol=RESIDUAL_TOL):
    _require_interior(ts)
    i, d, _, Pid, Pdi, _ = _parts(ts)
    f = ts.vector(f, i)
    g1 = ts.vector(g1, d)
    g2 = ts.vector(g2, d)
    G = _green(ts)
    Q = boundary_chain(ts).Q
    R = Pdi @ G @ G @ Pid
    res = Q @ g2 - g2 + Pdi @ (G @ (G @ f)) + g1 + R @ g1
    scale = _scale(f, g1, g2)
    return PlateCondition(res, bool(np.abs(res).max(initial=0.0) <= tol * scale), scale)


def _harmonic(ts, g, Y):
    """Harmonic extension ``h``: ``g`` on the boundary, ``Y g`` on the interior."""
    h = np.zeros(ts.n, dtype=_dtype(g, Y))
    h[list(ts.boundary)] = g
    h[list(ts.interior)] = Y @ g
    return h


def solve_plate1(ts, f, g1, g2, anchor=None, tol=RESIDUAL_TOL):
    """Plate equation with both boundary values and normal derivatives prescribed.

    Solves ``(P - I)^2 u = f`` on the interior, ``-(P - I) u = g1`` and
    ``u = g2`` on the boundary.  Solvable iff :func:`plate1_condition` holds;
    the solution is then unique.  It is computed twice, as
    ``G^2 f + G h1 + h2`` and as ``G_z (G f + h1) + g2(z)`` with ``G_z`` the
    kernel of ``X`` minus the anchor ``z``, and the two must agree.
    """
    cond = plate1_condition(ts, f, g1, g2, tol)
    if not cond.satisfied:
        worst = cond.residual[np.abs(cond.residual).argmax()]
        raise SolvabilityError(
            f"plate condition violated: max residual {abs(worst):.6g}", residual=cond.residual
        )
    i, d = list(ts.interior), list(ts.boundary)
    f = ts.vector(f, i)
    g1 = ts.vector(g1, d)
    g2 = ts.vector(g2, d)
    G = _green(ts)
    Y = G @ ts.block(i, d)
    h1 = _harmonic(ts, g1, Y)
    h2 = _harmonic(ts, g2, Y)
    u = h2.astype(_dtype(h2, f, g1))
    u[i] += G @ (G @ f) + G @ h1[i]

    z = _anchor(ts, anchor)
    rest = [k for k in range(ts.n) if k != z]
    Gf = np.zeros(ts.n, dtype=u.dtype)
    Gf[i] = G @ f
    Gz = green_restricted(ts, rest).matrix
    alt = np.full(ts.n, g2[d.index(z)], dtype=u.dtype)
    alt[rest] += Gz @ (Gf + h1)[rest]
    if np.abs(alt - u).max() > DUAL_FORM_TOL * _scale(u, alt):
        raise ResidualError("the two closed forms of the plate solution disagree")
    return u


def _anchor(ts, anchor):
    if anchor is None:
        return ts.root if ts.root in ts.boundary else ts.boundary[0]
    z = ts.index_of(anchor)
    if z not in ts.boundary:
        raise ValueError(f"anchor {ts.vertices[z]!r} is not a boundary vertex")
    return z


def bi_d2n(ts, g2, f=None):
    """Normal derivative ``g1`` of the bi-Dirichlet solution with boundary values ``g2``.

    ``g1 = -(I + R)^{-1} ((Q - I) g2 + P_di G^2 f)``; for ``f = 0`` this is ``T g2``.
    """
    _require_interior(ts)
    i, d, _, Pid, Pdi, _ = _parts(ts)
    g2 = ts.vector(g2, d)
    f = np.zeros(len(i)) if f is None else ts.vector(f, i)
    G = _green(ts)
    fac = _ir_factor(ts, Pdi @ G @ G @ Pid)
    Q = boundary_chain(ts).Q
    return -fac.solve(Q @ g2 - g2 + Pdi @ (G @ (G @ f)))


def _n2d_rhs(ts, g1, f):
    i, d, _, Pid, Pdi, _ = _parts(ts)
    G = _green(ts)
    R = Pdi @ G @ G @ Pid
    return Pdi @ (G @ (G @ f)) + g1 + R @ g1


def bi_n2d_condition(ts, g1, f=None):
    """``sum_bd pi (P_di G^2 f + (I + R) g1)``; equals :func:`bineumann_condition` of ``(f, g1)``."""
    _require_interior(ts)
    g1 = ts.vector(g1, ts.boundary)
    f = np.zeros(len(ts.interior)) if f is None else ts.vector(f, ts.interior)
    return ts.pi[list(ts.boundary)] @ _n2d_rhs(ts, g1, f)


def bi_n2d(ts, g1, f=None, anchor=None, c=0.0, tol=BALANCE_TOL):
    """Boundary values ``g2`` compatible with normal derivatives ``g1``.

    The compatible ``g2`` form a line ``g2 + const``; the member with
    ``g2(anchor) = c`` is returned.  Needs :func:`bi_n2d_condition` to vanish.
    """
    _require_interior(ts)
    d = list(ts.boundary)
    g1 = ts.vector(g1, d)
    f = np.zeros(len(ts.interior)) if f is None else ts.vector(f, ts.interior)
    rhs = _n2d_rhs(ts, g1, f)
    cond = ts.pi[d] @ rhs
    if abs(cond) > tol * _scale(f, g1):
        raise SolvabilityError(f"Neumann data incompatible: residual {cond:.6g}", residual=cond)
    z = _anchor(ts, anchor)
    k = d.index(z)
    rest = [j for j in range(len(d)) if j != k]
    g2 = np.full(len(d), c, dtype=_dtype(rhs, np.asarray(c)))
    if rest:
        Q = boundary_chain(ts).Q
        A = np.eye(len(rest)) - Q[np.ix_(rest, rest)]
        g2[rest] += _linalg.solve(A, rhs[rest], what="I - Q off the anchor")
    return g2


# -- plate equation, second variant, and iterated Dirichlet -----------------------

def solve_plate2(ts, f, g1, g2):
    """Plate equation posed on the interior as a network in its own right.

    ``Y`` is the interior with its induced boundary ``dY`` and inner part
    ``Y°``.  The solution equals ``g2`` on the boundary, satisfies the
    bi-Laplace equation of the sub-network chain on ``Y°`` and has exterior
    normal derivative ``g1`` on ``dY``:
    ``sum_{z} p(y, z) (u(z) - u(y)) / p(y, boundary) = g1(y)``.

    ``f`` is given on ``Y°``, ``g1`` on ``dY`` (both in vertex order), ``g2``
    on the boundary.
    """
    _require_interior(ts)
    d = list(ts.boundary)
    sub = subnetwork_transition(ts, ts.interior)
    Y = list(ts.interior)
    dY = [Y[k] for k in sub.boundary]
    Yo = [Y[k] for k in sub.interior]
    f = ts.vector(f, Yo)
    g1 = ts.vector(g1, dY)
    g2 = ts.vector(g2, d)
    Pyd = ts.block(dY, d)
    gY = (Pyd @ g2) / Pyd.sum(axis=1) - g1
    u = np.zeros(ts.n, dtype=_dtype(f, g1, g2))
    u[d] = g2
    if Yo:
        u[Y] = solve_bidirichlet(sub, f, gY)
    else:
        u[dY] = gY
    return u


def solve_iterated_dirichlet(ts, f, g1, g2):
    """Solve ``(P - I)^2 u = f`` on ``Y°``, ``(P - I) u = g1`` on ``dY``, ``u = g2`` on the boundary.

    ``Y`` is the interior, ``dY`` its induced boundary and ``Y°`` the rest,
    which must be non-empty.  ``u = G_int G_Y° f - G_int h1 + h2`` where
    ``h1``, ``h2`` are the harmonic extensions of ``g1`` (in ``Y``) and
    ``g2`` (in ``X``).
    """
    _require_interior(ts)
    i, d = list(ts.interior), list(ts.boundary)
    dY = list(induced_boundary(ts, i))
    Yo = [y for y in i if y not in set(dY)]
    if not Yo:
        raise ValueError("the interior has an empty inner part; nothing to iterate over")
    f = ts.vector(f, Yo)
    g1 = ts.vector(g1, dY)
    g2 = ts.vector(g2, d)
    GY = green_restricted(ts, Yo).matrix
    # v = (P - I) u is the Dirichlet solution on Y with data g1 on dY
    h1 = np.zeros(len(i), dtype=_dtype(g1, f))
    pos = {x: k for k, x in enumerate(i)}
    h1[[pos[y] for y in dY]] = g1
    h1[[pos[y] for y in Yo]] = GY @ (ts.block(Yo, dY) @ g1)
    GGf = np.zeros(len(i), dtype=h1.dtype)
    GGf[[pos[y] for y in Yo]] = GY @ f
    G = _green(ts)
    u = solve_dirichlet(ts, np.zeros(len(i)), g2).astype(_dtype(h1, g2))
    u[i] += G @ (GGf - h1)
    return u


# -- bi-harmonic Green kernels ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class BiharmonicKernel:
    """Kernel ``M`` with ``u = M f`` for zero boundary data; rows and columns are vertex indices."""

    kind: str
    rows: tuple
    cols: tuple
    matrix: np.ndarray
    nonnegative: bool
    negative_entries: int


def biharmonic_green(ts, kind="squared"):
    """Bi-harmonic Green kernels.

    ``squared``
        ``G_int^2`` (plate equation, first variant), interior x interior.
    ``iterated``
        ``G_int G_Y°`` (iterated Dirichlet problem), interior x ``Y°``.
    ``plate2``
        ``K G_int = S^{-1}`` (bi-Dirichlet problem), interior x interior;
        this one can take negative values.
    """
    _require_interior(ts)
    i = list(ts.interior)
    G = _green(ts)
    if kind == "squared":
        M, cols = G @ G, i
    elif kind == "iterated":
        dY = set(induced_boundary(ts, i))
        cols = [y for y in i if y not in dY]
        if not cols:
            raise ValueError("the interior has an empty inner part")
        GY = green_restricted(ts, cols).matrix
        M = G[:, [i.index(y) for y in cols]] @ GY
    elif kind == "plate2":
        blocks = bi_blocks(ts)
        if not blocks.invertible:
            raise SingularSystemError("S is singular", condition=blocks.condition_S)
        M, cols = blocks.K @ G, i
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    M = _linalg.compact(M)
    neg = int(np.count_nonzero(np.real(M) < -1e-12)) if np.isrealobj(M) else -1
    return BiharmonicKernel(kind, tuple(i), tuple(cols), M, neg == 0, neg)
