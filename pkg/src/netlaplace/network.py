"""Directed weighted networks with a designated boundary.

A network is a finite, strongly connected directed graph without loops or
multiple edges.  Each edge ``(x, y)`` carries a positive conductance
``a(x, y)``.  A non-empty subset of the vertices is the boundary, the rest is
the interior, and one vertex is the root used to ground solutions that are
only determined up to an additive constant.
"""

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import NetworkError

__all__ = [
    "Network",
    "SubNetwork",
    "parse_network",
    "serialize_network",
    "load_network",
    "save_network",
    "strongly_connected",
    "make_subnetwork",
    "builtin_example",
    "path_a",
    "funnel_b",
    "cycle",
    "random_network",
]


def _is_strongly_connected(adjacency):
    n = adjacency.shape[0]
    if n == 0:
        return False
    ncomp, _ = connected_components(
        csr_matrix(adjacency != 0), directed=True, connection="strong"
    )
    return ncomp == 1


@dataclass(frozen=True, eq=False)
class Network:
    """Validated directed network.

    Parameters
    ----------
    vertices : sequence of str
        Distinct vertex identifiers; their order fixes every matrix index.
    edges : mapping ``(x, y) -> weight``
        Positive, finite conductances.  Loops are not allowed.
    boundary : iterable of str
        Non-empty set of boundary vertices.
    root : str
        Reference vertex for grounded solutions.
    """

    vertices: tuple
    edges: MappingProxyType
    boundary: tuple
    root: str
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        vertices = tuple(str(v) for v in self.vertices)
        if not vertices:
            raise NetworkError("network has no vertices")
        index = {}
        for i, v in enumerate(vertices):
            if v in index:
                raise NetworkError(f"duplicate vertex {v!r}")
            index[v] = i
        edges = {}
        for (x, y), w in dict(self.edges).items():
            x, y = str(x), str(y)
            for v in (x, y):
                if v not in index:
                    raise NetworkError(f"edge ({x!r}, {y!r}) uses unknown vertex {v!r}")
            if x == y:
                raise NetworkError(f"loop edge at vertex {x!r}")
            w = float(w)
            if not math.isfinite(w) or w <= 0.0:
                raise NetworkError(f"non-positive weight {w!r} on edge ({x!r}, {y!r})")
            edges[(x, y)] = w
        boundary = set()
        for b in self.boundary:
            b = str(b)
            if b not in index:
                raise NetworkError(f"unknown boundary vertex {b!r}")
            boundary.add(b)
        if not boundary:
            raise NetworkError("empty boundary")
        root = str(self.root)
        if root not in index:
            raise NetworkError(f"unknown root vertex {root!r}")

        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", MappingProxyType(edges))
        object.__setattr__(self, "boundary", tuple(v for v in vertices if v in boundary))
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "_index", index)
        if not _is_strongly_connected(self.weights):
            raise NetworkError("network is not strongly connected")

    @property
    def index(self):
        return MappingProxyType(self._index)

    @property
    def interior(self):
        b = set(self.boundary)
        return tuple(v for v in self.vertices if v not in b)

    @cached_property
    def weights(self):
        """Dense conductance matrix ``a`` in vertex order."""
        n = len(self.vertices)
        a = np.zeros((n, n))
        for (x, y), w in self.edges.items():
            a[self._index[x], self._index[y]] = w
        a.setflags(write=False)
        return a

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return (
            f"Network(|X|={len(self.vertices)}, |E|={len(self.edges)}, "
            f"boundary={list(self.boundary)}, root={self.root!r})"
        )


@dataclass(frozen=True, eq=False)
class SubNetwork:
    """Vertex subset ``Y`` of a network with its induced boundary and interior.

    The induced boundary consists of the vertices of ``Y`` having at least one
    edge leaving ``Y``.
    """

    parent: Network
    Y: tuple
    induced_boundary: tuple
    induced_interior: tuple

    @property
    def strongly_connected(self):
        idx = [self.parent.index[y] for y in self.Y]
        return _is_strongly_connected(self.parent.weights[np.ix_(idx, idx)])


def make_subnetwork(network, Y):
    """Induced sub-network on the vertex subset ``Y``.

    Raises
    ------
    NetworkError
        If ``Y`` is empty, equal to the whole vertex set, or contains an
        unknown vertex.
    """
    wanted = {str(y) for y in Y}
    unknown = wanted - set(network.vertices)
    if unknown:
        raise NetworkError(f"unknown vertices in subset: {sorted(unknown)}")
    if not wanted:
        raise NetworkError("sub-network vertex set is empty")
    if len(wanted) == len(network.vertices):
        raise NetworkError("sub-network must be a strict subset")
    ys = tuple(v for v in network.vertices if v in wanted)
    boundary = tuple(
        y for y in ys
        if any(x == y and z not in wanted for (x, z) in network.edges)
    )
    interior = tuple(y for y in ys if y not in boundary)
    return SubNetwork(network, ys, boundary, interior)


def strongly_connected(network):
    """True iff a single strongly connected component covers all vertices."""
    return _is_strongly_connected(network.weights)


# -- JSON file format -------------------------------------------------------

_TOP_KEYS = {"vertices", "edges", "boundary", "root"}
_EDGE_KEYS = {"from", "to", "weight"}


def parse_network(text):
    """Parse and validate a network document (see README for the schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise NetworkError("network document must be a JSON object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise NetworkError(f"unknown fields: {sorted(extra)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise NetworkError(f"missing fields: {sorted(missing)}")
    vertices = doc["vertices"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise NetworkError("'vertices' must be a list of strings")
    edges = {}
    if not isinstance(doc["edges"], list):
        raise NetworkError("'edges' must be a list")
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, dict) or set(e) != _EDGE_KEYS:
            raise NetworkError(f"edge #{i} must have exactly the keys from, to, weight")
        w = e["weight"]
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise NetworkError(f"edge #{i}: weight must be a number")
        key = (e["from"], e["to"])
        if key in edges:
            raise NetworkError(f"duplicate edge {key}")
        edges[key] = w
    boundary = doc["boundary"]
    if not isinstance(boundary, list):
        raise NetworkError("'boundary' must be a list")
    if len(set(boundary)) != len(boundary):
        raise NetworkError("duplicate boundary vertex")
    return Network(tuple(vertices), edges, tuple(boundary), doc["root"])


def _num(x):
    return format(float(x), ".17g")


def serialize_network(network):
    """Canonical JSON text: file vertex order, edges sorted by index pair."""
    idx = network.index
    edges = sorted(network.edges.items(), key=lambda kv: (idx[kv[0][0]], idx[kv[0][1]]))
    lines = ["{"]
    lines.append(f'  "vertices": {json.dumps(list(network.vertices))},')
    lines.append('  "edges": [')
    body = [
        f'    {{"from": {json.dumps(x)}, "to": {json.dumps(y)}, "weight": {_num(w)}}}'
        for (x, y), w in edges
    ]
    lines.append(",\n".join(body))
    lines.append("  ],")
    lines.append(f'  "boundary": {json.dumps(list(network.boundary))},')
    lines.append(f'  "root": {json.dumps(network.root)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_network(path):
    return parse_network(Path(path).read_text(encoding="utf-8"))


def save_network(network, path):
    Path(path).write_text(serialize_network(network), encoding="utf-8")


# -- built-in examples ------------------------------------------------------

def path_a(N):
    """Unit-conductance path ``0 - 1 - ... - N`` with boundary ``{0, N}``, root 0."""
    if N < 2:
        raise NetworkError("path example needs N >= 2")
    edges = {}
    for k in range(N):
        edges[(str(k), str(k + 1))] = 1.0
        edges[(str(k + 1), str(k))] = 1.0
    return Network(tuple(str(k) for k in range(N + 1)), edges, (str(0), str(N)), "0")


def funnel_b(p, allow_loop_fold=False, tol=1e-12):
    """Funnel network: ``1 -> k`` with probability ``p_k``, ``k -> k-1`` surely.

    Vertices are ``"1" .. "N"``, boundary ``{N-1, N}``, root ``"1"``.

    By default ``p`` lists the jump probabilities ``p_2, ..., p_N`` out of
    vertex 1 (the network has no loop at 1); they are used as conductances,
    so they need not sum to one.  With ``allow_loop_fold=True`` the full
    vector ``p_1, ..., p_N`` summing to one is accepted and the holding
    probability ``p_1`` is folded away, giving ``p(1, k) = p_k / (1 - p_1)``.
    Use :func:`netlaplace.markov.funnel_transition` for the chain that keeps
    the holding probability.
    """
    p = [float(x) for x in p]
    if any(not math.isfinite(x) or x <= 0 for x in p):
        raise NetworkError("funnel probabilities must be positive")
    if allow_loop_fold:
        if abs(sum(p) - 1.0) > tol:
            raise NetworkError(f"funnel probabilities sum to {sum(p)!r}, not 1")
        jumps = p[1:]
        N = len(p)
    else:
        jumps = p
        N = len(p) + 1
    if N < 3:
        raise NetworkError("funnel example needs N >= 3")
    edges = {("1", str(k)): w for k, w in zip(range(2, N + 1), jumps)}
    for k in range(2, N + 1):
        edges[(str(k), str(k - 1))] = 1.0
    return Network(tuple(str(k) for k in range(1, N + 1)), edges, (str(N - 1), str(N)), "1")


def cycle(length):
    """Oriented cycle ``0 -> 1 -> ... -> length-1 -> 0``; odd vertices form the boundary."""
    if length < 4 or length % 2:
        raise NetworkError("cycle example needs an even length >= 4")
    vertices = tuple(str(k) for k in range(length))
    edges = {(str(k), str((k + 1) % length)): 1.0 for k in range(length)}
    boundary = tuple(str(k) for k in range(1, length, 2))
    return Network(vertices, edges, boundary, "0")


def builtin_example(kind, *params, **options):
    """Dispatch to :func:`path_a`, :func:`funnel_b` or :func:`cycle` by name."""
    builders = {"pathA": path_a, "funnelB": funnel_b, "cycle": cycle}
    try:
        builder = builders[kind]
    except KeyError:
        raise NetworkError(f"unknown example kind {kind!r}") from None
    if kind == "funnelB":
        return builder(params if len(params) != 1 else params[0], **options)
    return builder(*params, **options)


def random_network(n, rng=None, edge_prob=0.3, reversible=False, boundary_size=None):
    """Random strongly connected network on ``n`` vertices.

    A random Hamiltonian cycle guarantees strong connectivity; further edges
    are added independently with probability ``edge_prob``.  With
    ``reversible=True`` the edge set and conductances are symmetric.
    """
    rng = np.random.default_rng(rng)
    if n < 2:
        raise NetworkError("need at least two vertices")
    order = rng.permutation(n)
    a = np.zeros((n, n))
    for i in range(n):
        a[order[i], order[(i + 1) % n]] = 1.0
    a[rng.random((n, n)) < edge_prob] = 1.0
    np.fill_diagonal(a, 0.0)
    a *= rng.uniform(0.2, 3.0, size=(n, n))
    if reversible:
        a = np.where((a > 0) | (a.T > 0), np.maximum(a, a.T), 0.0)
    vertices = tuple(f"v{i}" for i in range(n))
    edges = {(vertices[i], vertices[j]): a[i, j] for i, j in zip(*np.nonzero(a))}
    if boundary_size is None:
        boundary_size = int(rng.integers(1, n))
    boundary = rng.choice(n, size=boundary_size, replace=False)
    root = vertices[int(rng.integers(n))]
    return Network(vertices, edges, tuple(vertices[i] for i in boundary), root)
