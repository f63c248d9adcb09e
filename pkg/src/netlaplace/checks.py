"""Self-checks: structural identities and solver residuals on a given system.

Every check returns a :class:`CheckResult`; ``value`` is the measured error
(or a flag) and ``limit`` the threshold it is compared with.  Random data are
drawn from the supplied :class:`numpy.random.Generator`.
"""

from dataclasses import dataclass

import numpy as np

from . import bilaplace as bl
from . import laplace as lp
from ._linalg import factorize
from .exceptions import NetworkError, SingularSystemError
from .markov import (
    boundary_chain,
    boundary_chain_resolvent,
    green_restricted,
    hitting_matrix,
    induced_boundary,
    reverse,
    subnetwork_transition,
)
from .simulate import estimate_boundary_chain, estimate_green, estimate_hitting

__all__ = [
    "CheckResult",
    "identity_checks",
    "solver_checks",
    "resolvent_check",
    "montecarlo_checks",
    "random_data",
]

IDENTITY_TOL = 1e-10
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    skipped: bool = False

    def line(self):
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{status} {self.name} value={self.value:.3e} limit={self.limit:.1e}"


def _result(name, value, limit):
    value = float(value)
    return CheckResult(name, bool(value <= limit), value, limit)


def _skip(name):
    return CheckResult(name, True, 0.0, 0.0, skipped=True)


def _err(a, b=0.0):
    return float(np.abs(np.asarray(a) - np.asarray(b)).max(initial=0.0))


def _rel(a, b, *scales):
    s = max([1.0] + [float(np.abs(x).max(initial=0.0)) for x in scales])
    return _err(a, b) / s


def random_data(rng, size, complex_=False):
    x = rng.normal(size=size)
    if complex_:
        x = x + 1j * rng.normal(size=size)
    return x


# -- identities ---------------------------------------------------------------------

def identity_checks(ts, rng, tol=IDENTITY_TOL):
    """Stationarity, Green's second identity, the reversal identities for
    ``P_di G``, the inner-product form of ``R``, the bi-Laplacian block
    structure and the invertibility equivalence of ``S`` and ``I + R``."""
    out = []
    pi = ts.pi
    out.append(_result("stationary", _err(pi @ ts.P, pi), tol))
    out.append(_result("stationary-sum", abs(pi.sum() - 1.0), 1e-12))
    i, d = list(ts.interior), list(ts.boundary)
    if not i:
        return out
    hat = reverse(ts)
    f = random_data(rng, ts.n, True)
    g = random_data(rng, ts.n, True)
    Lg = ts.P @ g - g
    Lhf = hat.P @ f - f
    lhs = pi[i] @ (f * Lg - g * Lhf)[i]
    rhs = pi[d] @ (f * -Lg - g * -Lhf)[d]
    out.append(_result("green-second-identity", abs(lhs - rhs) / max(1.0, abs(lhs)), tol))

    G = green_restricted(ts, i).matrix
    Pdi, Pid = ts.block(d, i), ts.block(i, d)
    Yhat = hitting_matrix(hat)
    Y = hitting_matrix(ts)
    nt = np.diag(pi[d]) @ Pdi @ G - Yhat.T @ np.diag(pi[i])
    out.append(_result("reversal-exit-identity", _err(nt), 1e-12 * max(1.0, np.abs(G).max())))

    R = Pdi @ G @ G @ Pid
    g1 = random_data(rng, len(d), True)
    g2 = random_data(rng, len(d), True)
    a = np.sum(pi[d] * g1 * np.conj(R @ g2))
    b = np.sum(pi[i] * (Yhat @ g1) * np.conj(Y @ g2))
    out.append(_result("R-inner-product", abs(a - b) / max(1.0, abs(a)), tol))

    blocks = bl.bi_blocks(ts)
    L = ts.P - np.eye(ts.n)
    order = i + d
    L2 = (L @ L)[np.ix_(order, order)]
    out.append(_result("bilaplacian-blocks", _err(blocks.assembled(), L2), 1e-12))

    agree = blocks.invertible == blocks.ir_invertible
    out.append(CheckResult("S-vs-I+R-invertibility", agree, float(not agree), 0.0))
    if blocks.K is not None:
        out.append(_result("S-inverse-is-KG", _rel(blocks.K @ G @ blocks.S, np.eye(len(i))), 1e-9))
    return out


def resolvent_check(ts, lam=1.0, h=1e-6, tol=1e-4):
    """Finite-difference derivative of ``lam I - Q(lam)`` against ``I + R(lam)``.

    Uses the second-order one-sided stencil at ``lam, lam + h, lam + 2h`` so
    that every evaluation stays in the region ``|lam| >= 1``.
    """
    if not ts.interior:
        return _skip("resolvent-derivative")
    nd = len(ts.boundary)
    F = lambda t: t * np.eye(nd) - boundary_chain_resolvent(ts, t)
    fd = (-3 * F(lam) + 4 * F(lam + h) - F(lam + 2 * h)) / (2 * h)
    return _result("resolvent-derivative", _err(fd, np.eye(nd) + bl.r_matrix(ts, lam)), tol)


# -- solver residuals ---------------------------------------------------------------

def _lap(ts, u):
    return ts.P @ u - u


def _balanced(ts, rng, complex_=True):
    f = random_data(rng, ts.n, complex_)
    return f - ts.pi @ f


def _run(name, fn, tol):
    try:
        return _result(name, fn(), tol)
    except (SingularSystemError, NetworkError) as exc:
        # structural obstruction, not a residual failure
        return CheckResult(f"{name} ({type(exc).__name__})", True, 0.0, tol, skipped=True)


def solver_checks(ts, rng, tol=RESIDUAL_TOL):
    """Residuals of every solver on random admissible data, plus the
    Poisson/Dirichlet equivalence, the plate dual forms, the Dirichlet/Neumann
    round trip and the agreement of the two bi-Neumann conditions."""
    out = []
    i, d = list(ts.interior), list(ts.boundary)
    ni, nd = len(i), len(d)
    pi = ts.pi

    def poisson():
        f = _balanced(ts, rng)
        u = lp.solve_poisson(ts, f)
        return max(_rel(_lap(ts, u), f, f, u), abs(u[ts.root]))

    out.append(_run("poisson", poisson, tol))

    def poisson_as_dirichlet():
        f = _balanced(ts, rng)
        o = ts.root
        rest = [k for k in range(ts.n) if k != o]
        u = lp.solve_poisson(ts, f)
        single = ts.with_boundary([o])
        w = lp.solve_dirichlet(single, f[rest], [0.0])
        fo = -(pi[rest] @ f[rest]) / pi[o]
        return max(_rel(u, w, u), abs(fo - f[o]) / max(1.0, abs(f[o])))

    if ts.n > 1:
        out.append(_run("poisson-equals-dirichlet-at-root", poisson_as_dirichlet, IDENTITY_TOL))

    if not i:
        return out

    def neumann():
        f, g = random_data(rng, ni, True), random_data(rng, nd, True)
        g = g + (pi[i] @ f - pi[d] @ g) / pi[d].sum()
        u = lp.solve_neumann(ts, f, g)
        L = _lap(ts, u)
        return max(_rel(L[i], f, f, u), _rel(-L[d], g, g, u))

    def dirichlet():
        f, g = random_data(rng, ni, True), random_data(rng, nd, True)
        u = lp.solve_dirichlet(ts, f, g)
        return max(_rel(_lap(ts, u)[i], f, f, u), _err(u[d], g))

    def mixed():
        f, g = random_data(rng, ni, True), random_data(rng, nd, True)
        D = [d[0]]
        u = lp.solve_mixed(ts, f, g, D)
        L = _lap(ts, u)
        return max(_rel(L[i], f, f, u), _err(u[D], g[:1]), _rel(-L[d[1:]], g[1:], g, u))

    def robin():
        f, g = random_data(rng, ni, True), random_data(rng, nd, True)
        alpha = rng.uniform(0.2, 2.0, nd)
        beta = rng.uniform(0.2, 2.0, nd)
        beta[rng.random(nd) < 0.3] = 0.0
        u = lp.solve_robin(ts, f, g, alpha, beta)
        L = _lap(ts, u)
        return max(_rel(L[i], f, f, u), _rel(alpha * u[d] - beta * L[d], g, g, u))

    def potential():
        f = random_data(rng, ts.n, True)
        v = rng.uniform(1.0, 2.0, ts.n) * np.exp(1j * rng.uniform(0, 2 * np.pi, ts.n)) - 1.0
        u = lp.solve_poisson_potential(ts, f, v)
        return _rel(_lap(ts, u) - v * u, f, f, u)

    def dirichlet_potential():
        f, g = random_data(rng, ni, True), random_data(rng, nd, True)
        v = rng.uniform(1.0, 2.0, ni) * np.exp(1j * rng.uniform(0, 2 * np.pi, ni)) - 1.0
        u = lp.solve_dirichlet_potential(ts, f, g, v)
        return max(_rel(_lap(ts, u)[i] - v * u[i], f, f, u), _err(u[d], g))

    def sweep():
        f = _balanced(ts, rng)
        Y = list(rng.choice(ts.n, size=rng.integers(1, ts.n), replace=False))
        res = lp.balayage(ts, f, Y)
        Z = [k for k in range(ts.n) if k not in set(Y)]
        return max(
            _rel(_lap(ts, res.reduite), res.balayee, f, res.reduite),
            _err(res.reduite[Y], res.potential[Y]),
            _err(res.balayee[Z]),
        )

    def iterated_poisson():
        f = _balanced(ts, rng)
        u = bl.solve_iterated_poisson(ts, f)
        L = _lap(ts, u)
        return _rel(_lap(ts, L), f, f, u)

    def bineumann():
        f, g = random_data(rng, ni, True), random_data(rng, nd, True)
        g = g - bl.bineumann_condition(ts, f, g)
        u = bl.solve_bineumann(ts, f, g)
        L = _lap(ts, u)
        return max(_rel(_lap(ts, L)[i], f, f, u), _rel(-L[d], g, g, u))

    def bidirichlet():
        f, g = random_data(rng, ni, True), random_data(rng, nd, True)
        u = bl.solve_bidirichlet(ts, f, g)
        return max(_rel(_lap(ts, _lap(ts, u))[i], f, f, u), _err(u[d], g))

    def plate1():
        f, g1 = random_data(rng, ni, True), random_data(rng, nd, True)
        g1 = g1 - bl.bineumann_condition(ts, f, g1)
        g2 = bl.bi_n2d(ts, g1, f, c=rng.normal())
        u = bl.solve_plate1(ts, f, g1, g2)
        L = _lap(ts, u)
        return max(_rel(_lap(ts, L)[i], f, f, u), _rel(-L[d], g1, g1, u), _err(u[d], g2))

    def plate2():
        sub = subnetwork_transition(ts, i)
        dY = [i[k] for k in sub.boundary]
        Yo = [i[k] for k in sub.interior]
        f, g1, g2 = (random_data(rng, len(Yo), True), random_data(rng, len(dY), True),
                     random_data(rng, nd, True))
        u = bl.solve_plate2(ts, f, g1, g2)
        uy = u[i]
        Ly = sub.P @ uy - uy
        L2y = sub.P @ Ly - Ly
        star = lp.normal_derivative(ts, u, "star", Y=i)
        return max(_rel(L2y[list(sub.interior)], f, f, u), _err(u[d], g2), _rel(star, g1, g1, u))

    dY = list(induced_boundary(ts, i))
    Yo = [y for y in i if y not in set(dY)]

    def iterated_dirichlet():
        f, g1, g2 = (random_data(rng, len(Yo), True), random_data(rng, len(dY), True),
                     random_data(rng, nd, True))
        u = bl.solve_iterated_dirichlet(ts, f, g1, g2)
        L = _lap(ts, u)
        return max(_rel(_lap(ts, L)[Yo], f, f, u), _rel(L[dY], g1, g1, u), _err(u[d], g2))

    def plate_dual_forms():
        f, g1 = random_data(rng, ni, True), random_data(rng, nd, True)
        g1 = g1 - bl.bineumann_condition(ts, f, g1)
        g2 = bl.bi_n2d(ts, g1, f)
        G = green_restricted(ts, i).matrix
        Y = hitting_matrix(ts)
        u1 = np.zeros(ts.n, dtype=complex)
        u1[d] = g2
        u1[i] = G @ (G @ f) + G @ (Y @ g1) + Y @ g2
        errs = []
        for z in d:
            rest = [k for k in range(ts.n) if k != z]
            Gz = green_restricted(ts, rest).matrix
            h1 = np.zeros(ts.n, dtype=complex)
            h1[d], h1[i] = g1, Y @ g1 + G @ f
            u2 = np.full(ts.n, g2[d.index(z)], dtype=complex)
            u2[rest] += Gz @ h1[rest]
            errs.append(_rel(u1, u2, u1))
        return max(errs)

    def round_trip():
        g2 = random_data(rng, nd, True)
        g1 = bl.bi_d2n(ts, g2)
        z = d[-1]
        back = bl.bi_n2d(ts, g1, anchor=z, c=g2[-1])
        return _rel(back, g2, g2)

    def condition_agreement():
        f, g1 = random_data(rng, ni, True), random_data(rng, nd, True)
        a = bl.bineumann_condition(ts, f, g1)
        b = bl.bi_n2d_condition(ts, g1, f)
        return abs(a - b) / max(1.0, abs(a))

    out.append(_run("neumann", neumann, tol))
    out.append(_run("dirichlet", dirichlet, tol))
    if nd >= 2:
        out.append(_run("mixed", mixed, tol))
    out.append(_run("robin", robin, tol))
    out.append(_run("poisson-potential", potential, tol))
    out.append(_run("dirichlet-potential", dirichlet_potential, tol))
    out.append(_run("balayage", sweep, tol))
    out.append(_run("iterated-poisson", iterated_poisson, tol))
    out.append(_run("bi-neumann", bineumann, tol))
    out.append(_run("bi-dirichlet", bidirichlet, tol))
    out.append(_run("plate-1", plate1, tol))
    out.append(_run("plate-1-dual-forms", plate_dual_forms, 1e-8))
    out.append(_run("plate-2", plate2, tol) if ni >= 2 else _skip("plate-2"))
    out.append(_run("iterated-dirichlet", iterated_dirichlet, tol) if Yo else _skip("iterated-dirichlet"))
    out.append(_run("bi-d2n-n2d-round-trip", round_trip, tol))
    out.append(_run("condition-equivalence", condition_agreement, IDENTITY_TOL))
    return out


# -- Monte Carlo ----------------------------------------------------------------------

def montecarlo_checks(ts, trials, seed, k=4.0):
    """Compare sampled hitting laws, Green kernel entries and boundary-chain rows
    with the exact values, within ``k`` standard errors."""
    out = []
    i, d = list(ts.interior), list(ts.boundary)
    if not i:
        return out
    Y = hitting_matrix(ts)
    G = green_restricted(ts, i).matrix
    Q = boundary_chain(ts).Q
    V = ts.vertices

    def zmax(report, expected):
        z = report.zscores(expected)
        return max(abs(v) for v in z.values())

    for r, x in enumerate(i):
        rep = estimate_hitting(ts, x, trials, seed + r)
        exp = {V[b]: Y[r, c] for c, b in enumerate(d)}
        out.append(_result(f"mc-hitting[{V[x]}]", zmax(rep, exp), k))
    x = i[0]
    for c, y in enumerate(i):
        rep = estimate_green(ts, i, x, y, trials, seed + 1000 + c)
        out.append(_result(f"mc-green[{V[x]},{V[y]}]", zmax(rep, {(V[x], V[y]): G[0, c]}), k))
    rep = estimate_boundary_chain(ts, trials, seed + 2000)
    exp = {(V[a], V[b]): Q[r, c] for r, a in enumerate(d) for c, b in enumerate(d)}
    out.append(_result("mc-boundary-chain", zmax(rep, exp), k))
    return out


def singularity_report(ts):
    """Condition estimates of ``S`` and ``I + R``."""
    blocks = bl.bi_blocks(ts)
    fs = factorize(blocks.S)
    fr = factorize(np.eye(len(blocks.boundary)) + blocks.R)
    return {
        "S": {"singular": fs.singular, "condition": fs.condition, "min_pivot": fs.min_pivot},
        "I+R": {"singular": fr.singular, "condition": fr.condition, "min_pivot": fr.min_pivot},
    }
