"""Transition matrices and the potential-theoretic kernels built from them.

Functions on the vertex set are plain numpy vectors in vertex order; functions
on a subset (interior, boundary, ...) are vectors in the order of that subset.
Measures are the same kind of vectors, read as row vectors.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _linalg
from .exceptions import NetworkError, SingularSystemError
from .network import Network, SubNetwork, _is_strongly_connected

__all__ = [
    "TransitionSystem",
    "GreenKernel",
    "BoundaryApparatus",
    "build_transition",
    "funnel_transition",
    "stationary",
    "reverse",
    "is_reversible",
    "green_restricted",
    "hitting_matrix",
    "boundary_chain",
    "boundary_chain_resolvent",
    "subnetwork_transition",
    "induced_boundary",
]

ROW_TOL = 1e-12
STATIONARY_TOL = 1e-10


def _off_diagonal_graph(P):
    g = np.asarray(P) != 0
    np.fill_diagonal(g, False)
    return g


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    """Row-stochastic transition matrix over a labelled vertex set.

    Parameters
    ----------
    vertices : tuple of str
        Vertex labels; index ``i`` of every vector refers to ``vertices[i]``.
    P : ndarray
        Irreducible row-stochastic matrix.  Diagonal entries are allowed here
        (a network never has loops, but chains given directly may hold).
    boundary : tuple of int
        Indices of the boundary vertices.
    root : int
        Index of the grounding vertex.
    masses : ndarray, optional
        Vertex masses ``m(x)`` when the system comes from conductances.
    overridden : tuple of int
        Boundary rows that were replaced via :meth:`with_overrides`.
    """

    vertices: tuple
    P: np.ndarray
    boundary: tuple
    root: int
    masses: np.ndarray = None
    overridden: tuple = ()
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        n = P.shape[0]
        if P.ndim != 2 or P.shape != (n, n) or n == 0:
            raise ValueError(f"transition matrix must be square, got {P.shape}")
        if len(self.vertices) != n:
            raise ValueError("number of vertex labels does not match the matrix")
        if not np.all(np.isfinite(P)) or P.min() < 0:
            raise ValueError("transition probabilities must be finite and non-negative")
        rows = np.abs(P.sum(axis=1) - 1.0)
        if rows.max() > ROW_TOL:
            bad = int(rows.argmax())
            raise ValueError(f"row {self.vertices[bad]!r} of P sums to {P[bad].sum()!r}")
        if n > 1 and not _is_strongly_connected(_off_diagonal_graph(P)):
            raise NetworkError("transition matrix is not irreducible")
        boundary = tuple(sorted({int(b) for b in self.boundary}))
        if not boundary or boundary[0] < 0 or boundary[-1] >= n:
            raise ValueError("boundary must be a non-empty set of vertex indices")
        if not 0 <= int(self.root) < n:
            raise ValueError("root index out of range")
        P.setflags(write=False)
        vertices = tuple(str(v) for v in self.vertices)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "root", int(self.root))
        object.__setattr__(self, "overridden", tuple(sorted(self.overridden)))
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(vertices)})

    @classmethod
    def from_matrix(cls, P, vertices=None, boundary=(), root=0):
        """Build a system directly from a stochastic matrix.

        ``boundary`` and ``root`` may be given as labels or indices.
        """
        P = np.asarray(P, dtype=float)
        if vertices is None:
            vertices = tuple(str(i) for i in range(P.shape[0]))
        tmp = {str(v): i for i, v in enumerate(vertices)}

        def idx(v):
            return v if isinstance(v, (int, np.integer)) else tmp[str(v)]

        return cls(tuple(vertices), P, tuple(idx(b) for b in boundary), idx(root))

    # -- indexing helpers ---------------------------------------------------

    @property
    def n(self):
        return len(self.vertices)

    @property
    def interior(self):
        b = set(self.boundary)
        return tuple(i for i in range(self.n) if i not in b)

    def index_of(self, v):
        """Index of a vertex given by label (str) or index (int)."""
        if isinstance(v, (int, np.integer)):
            if not 0 <= v < self.n:
                raise IndexError(f"vertex index {v} out of range")
            return int(v)
        try:
            return self._index[str(v)]
        except KeyError:
            raise KeyError(f"unknown vertex {v!r}") from None

    def indices(self, vs):
        return tuple(self.index_of(v) for v in vs)

    def labels(self, idx):
        return [self.vertices[i] for i in idx]

    def vector(self, values, support=None):
        """Vector over ``support`` (default: all vertices) from an array or mapping.

        A mapping must provide a value for every vertex of the support.
        """
        support = tuple(range(self.n)) if support is None else tuple(support)
        if isinstance(values, Mapping):
            got = {self.index_of(k): v for k, v in values.items()}
            extra = set(got) - set(support)
            if extra:
                raise ValueError(f"values given outside the support: {self.labels(sorted(extra))}")
            missing = [i for i in support if i not in got]
            if missing:
                raise ValueError(f"missing values at {self.labels(missing)}")
            values = [got[i] for i in support]
        arr = np.asarray(values)
        if arr.dtype == object or arr.dtype.kind not in "biufc":
            arr = arr.astype(complex)
        if arr.shape != (len(support),):
            raise ValueError(f"expected {len(support)} values, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        return arr.astype(np.result_type(arr.dtype, float))

    def block(self, rows, cols):
        return self.P[np.ix_(rows, cols)]

    # -- derived quantities -------------------------------------------------

    @cached_property
    def pi(self):
        """Stationary probability vector."""
        return stationary(self.P)

    @cached_property
    def laplacian(self):
        return self.P - np.eye(self.n)

    def with_boundary(self, boundary, root=None):
        """Same chain with another boundary (labels or indices)."""
        root = self.root if root is None else self.index_of(root)
        return TransitionSystem(self.vertices, self.P, self.indices(boundary), root,
                                self.masses, self.overridden)

    def with_overrides(self, rows):
        """Replace transition rows at boundary vertices.

        ``rows`` maps a boundary vertex to a probability row (array over all
        vertices or a mapping ``vertex -> probability``).  The result uses the
        new matrix everywhere, including its own stationary distribution.
        """
        P = np.array(self.P)
        touched = set(self.overridden)
        bset = set(self.boundary)
        for v, row in rows.items():
            i = self.index_of(v)
            if i not in bset:
                raise ValueError(f"can only override boundary rows, {self.vertices[i]!r} is interior")
            if isinstance(row, Mapping):
                vec = np.zeros(self.n)
                for k, p in row.items():
                    vec[self.index_of(k)] = p
            else:
                vec = np.asarray(row, dtype=float)
            if vec.shape != (self.n,) or vec.min() < 0 or abs(vec.sum() - 1.0) > ROW_TOL:
                raise ValueError(f"override row at {self.vertices[i]!r} is not a probability vector")
            P[i] = vec
            touched.add(i)
        return TransitionSystem(self.vertices, P, self.boundary, self.root, None, tuple(touched))

    def __repr__(self):
        return (
            f"TransitionSystem(n={self.n}, boundary={self.labels(self.boundary)}, "
            f"root={self.vertices[self.root]!r})"
        )


def build_transition(network):
    """Normalized transition matrix ``p(x, y) = a(x, y) / m(x)`` of a network."""
    a = np.asarray(network.weights)
    m = a.sum(axis=1)
    P = a / m[:, None]
    idx = network.index
    return TransitionSystem(
        network.vertices, P, tuple(idx[b] for b in network.boundary), idx[network.root], m
    )


def funnel_transition(p):
    """Funnel chain on ``1..N`` that keeps the holding probability ``p(1, 1) = p_1``.

    ``p(1, k) = p_k`` for all k and ``p(k, k-1) = 1`` for ``k >= 2``; boundary
    ``{N-1, N}``, root ``1``.  This chain has a loop at 1 and therefore is
    not representable as a :class:`~netlaplace.network.Network`.
    """
    p = np.asarray(p, dtype=float)
    N = p.size
    if N < 3:
        raise ValueError("funnel chain needs N >= 3")
    if p.min() <= 0 or abs(p.sum() - 1.0) > ROW_TOL:
        raise ValueError("funnel probabilities must be positive and sum to 1")
    P = np.zeros((N, N))
    P[0] = p
    for k in range(1, N):
        P[k, k - 1] = 1.0
    vertices = tuple(str(k) for k in range(1, N + 1))
    return TransitionSystem(vertices, P, (N - 2, N - 1), 0)


def stationary(P):
    """Unique stationary probability vector of an irreducible stochastic matrix.

    Solves ``(P^T - I) pi = 0`` with the last equation replaced by the
    normalization ``sum(pi) = 1``.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = _linalg.solve(A, b, what="stationary system")
    resid = np.abs(pi @ P - pi).max()
    if resid > STATIONARY_TOL or pi.min() <= 0:
        raise np.linalg.LinAlgError(
            f"stationary distribution failed (residual {resid:.3g}, min {pi.min():.3g})"
        )
    pi.setflags(write=False)
    return pi


def reverse(ts):
    """Time reversal ``p^(x, y) = pi(y) p(y, x) / pi(x)``; same stationary vector."""
    pi = ts.pi
    Phat = (pi[None, :] * ts.P.T) / pi[:, None]
    # renormalize away rounding so the row-sum invariant holds at 1e-12
    Phat /= Phat.sum(axis=1, keepdims=True)
    return TransitionSystem(ts.vertices, Phat, ts.boundary, ts.root, ts.masses, ts.overridden)


def is_reversible(ts, tol=1e-12):
    flow = ts.pi[:, None] * ts.P
    return bool(np.abs(flow - flow.T).max() <= tol)


@dataclass(frozen=True, eq=False)
class GreenKernel:
    """``(lam I_A - P_A)^{-1}`` over a strict vertex subset ``A``."""

    subset: tuple
    matrix: np.ndarray
    lam: complex
    condition: float
    residual: float

    def padded(self, n):
        """The kernel as an ``n x n`` matrix, zero outside ``A x A``."""
        out = np.zeros((n, n), dtype=self.matrix.dtype)
        out[np.ix_(self.subset, self.subset)] = self.matrix
        return out


def _check_lambda(lam):
    if abs(lam) < 1.0:
        raise ValueError(f"resolvent parameter must satisfy |lambda| >= 1, got {lam!r}")


def green_restricted(ts, A, lam=1.0):
    """Green kernel of the chain killed when leaving ``A``.

    Entry ``(x, y)`` at ``lam = 1`` is the expected number of visits to ``y``
    before leaving ``A`` when starting at ``x``.  ``A`` is given by labels or
    indices and must be a non-empty strict subset.
    """
    A = tuple(ts.indices(A))
    if not A or len(set(A)) == ts.n:
        raise ValueError("Green kernel needs a non-empty strict vertex subset")
    if len(set(A)) != len(A):
        raise ValueError("duplicate vertices in subset")
    _check_lambda(lam)
    PA = ts.block(A, A)
    M = lam * np.eye(len(A)) - PA
    fac = _linalg.factorize(M)
    if fac.exactly_singular:
        raise SingularSystemError("lambda I - P_A is singular", condition=fac.condition)
    G = _linalg.compact(fac.solve(np.eye(len(A), dtype=M.dtype)))
    residual = float(np.abs(M @ G - np.eye(len(A))).max())
    G.setflags(write=False)
    return GreenKernel(A, G, lam, fac.condition, residual)


def hitting_matrix(ts, boundary=None):
    """Matrix over interior x boundary whose row ``x`` is the hitting law ``nu_x``.

    ``nu_x(y)`` is the probability that the chain started at ``x`` enters the
    boundary at ``y``.  Rows of boundary vertices (point masses) are not stored.
    """
    if boundary is not None:
        ts = ts.with_boundary(boundary)
    interior = ts.interior
    if not interior:
        raise ValueError("hitting distributions need a non-empty interior")
    G = green_restricted(ts, interior).matrix
    return G @ ts.block(interior, ts.boundary)


def induced_boundary(ts, Y):
    """Vertices of ``Y`` with a positive transition leaving ``Y``."""
    Y = tuple(ts.indices(Y))
    outside = [i for i in range(ts.n) if i not in set(Y)]
    return tuple(y for y in Y if ts.P[y, outside].sum() > 0)


@dataclass(frozen=True, eq=False)
class BoundaryApparatus:
    """Hitting laws, reversed hitting laws and the induced chain on the boundary."""

    boundary: tuple
    interior: tuple
    hitting: np.ndarray
    hitting_reversed: np.ndarray
    Q: np.ndarray
    exit: tuple
    entrance: tuple
    nu_pi: np.ndarray

    @property
    def boundary_laplacian(self):
        return self.Q - np.eye(len(self.boundary))


def boundary_chain(ts):
    """Boundary chain ``Q = P_dd + P_di G_i P_id`` and related objects.

    ``nu_pi`` is ``sum_x pi(x) nu_x`` over all vertices, boundary vertices
    contributing their point masses; it is a probability vector on the boundary.
    """
    interior, boundary = ts.interior, ts.boundary
    if not interior:
        raise ValueError("boundary chain needs a non-empty interior")
    Y = hitting_matrix(ts)
    Yhat = hitting_matrix(reverse(ts))
    Q = ts.block(boundary, boundary) + ts.block(boundary, interior) @ Y
    exit_ = tuple(b for b in boundary if ts.P[list(interior), b].sum() > 0)
    entrance = tuple(b for b in boundary if ts.P[b, list(interior)].sum() > 0)
    pi = ts.pi
    nu_pi = pi[list(boundary)] + pi[list(interior)] @ Y
    return BoundaryApparatus(boundary, interior, Y, Yhat, Q, exit_, entrance, nu_pi)


def boundary_chain_resolvent(ts, lam):
    """``Q(lam) = P_dd + P_di (lam I - P_ii)^{-1} P_id``; ``Q(1)`` is the boundary chain."""
    interior, boundary = ts.interior, ts.boundary
    G = green_restricted(ts, interior, lam).matrix
    return ts.block(boundary, boundary) + ts.block(boundary, interior) @ G @ ts.block(interior, boundary)


def subnetwork_transition(source, Y=None):
    """Transition system of a sub-network in its own right.

    ``p_[Y](x, y) = a(x, y) / m_[Y](x)`` for ``x, y`` in ``Y``, i.e. the rows of
    ``P_Y`` renormalized to sum one.  The result carries the induced boundary
    of ``Y`` as its boundary.

    ``source`` is a :class:`~netlaplace.network.SubNetwork`, or a
    :class:`TransitionSystem` together with the vertex subset ``Y``.
    """
    if isinstance(source, SubNetwork):
        net = source.parent
        ts = build_transition(net)
        Y = source.Y
    elif isinstance(source, Network):
        ts = build_transition(source)
    else:
        ts = source
    if Y is None:
        raise ValueError("vertex subset Y is required")
    Y = tuple(sorted(set(ts.indices(Y))))
    if not Y or len(Y) == ts.n:
        raise ValueError("sub-network needs a non-empty strict vertex subset")
    PY = ts.block(Y, Y)
    if len(Y) < 2 or not _is_strongly_connected(_off_diagonal_graph(PY)):
        raise NetworkError("induced sub-network is not strongly connected")
    mass = PY.sum(axis=1)
    PYn = PY / mass[:, None]
    dY = induced_boundary(ts, Y)
    local = {v: i for i, v in enumerate(Y)}
    root = local.get(ts.root, 0)
    masses = None
    if isinstance(source, SubNetwork):
        masses = np.asarray(source.parent.weights)[np.ix_(Y, Y)].sum(axis=1)
    return TransitionSystem(
        tuple(ts.vertices[i] for i in Y), PYn, tuple(local[b] for b in dY), root, masses
    )
