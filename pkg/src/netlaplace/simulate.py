"""Monte Carlo estimates of hitting laws, Green kernels and the boundary chain.

These are independent of the linear algebra in :mod:`netlaplace.markov` and
serve as a statistical oracle for it.  Walks are simulated in batches: all
trials advance one step at a time, using numpy's PCG64 generator.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EstimateReport",
    "STEP_CAP",
    "sample_step",
    "estimate_hitting",
    "estimate_green",
    "estimate_boundary_chain",
    "estimate_boundary_occupation",
]

# a walk longer than this is taken as a bug, not bad luck
STEP_CAP = 10**8


@dataclass(frozen=True)
class EstimateReport:
    """Point estimates with standard errors ``sd / sqrt(trials)``.

    Keys are vertex labels or pairs of labels, depending on the estimator.
    """

    point_estimates: dict
    standard_errors: dict
    trials: int
    seed: int
    steps: int = field(default=0, compare=False)

    def within(self, expected, k=4.0, floor=1e-12):
        """True if every estimate lies within ``k`` standard errors of ``expected[key]``."""
        return all(
            abs(self.point_estimates[key] - expected[key])
            <= k * self.standard_errors[key] + floor
            for key in self.point_estimates
        )

    def zscores(self, expected):
        out = {}
        for key, est in self.point_estimates.items():
            se = self.standard_errors[key]
            diff = est - expected[key]
            if abs(diff) <= 1e-12:
                out[key] = 0.0
            else:
                out[key] = np.inf if se == 0 else diff / se
        return out


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _cumulative(P):
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    return cum


def _advance(cum, states, rng):
    u = rng.random(states.size)
    return (u[:, None] < cum[states]).argmax(axis=1)


def sample_step(ts, x, rng):
    """Draw the successor of ``x`` with probabilities ``p(x, .)``.

    ``rng`` is a :class:`numpy.random.Generator` and advances by one draw.
    """
    x = ts.index_of(x)
    cum = np.cumsum(ts.P[x])
    cum[-1] = 1.0
    return int(np.searchsorted(cum, rng.random(), side="right"))


def _walk_until(ts, start, stop_mask, rng, on_step=None, first_step=False):
    """Run walks from ``start`` until they sit in ``stop_mask``.

    With ``first_step`` the stopping rule applies from time 1 on.  ``on_step``
    is called with the active walk indices and their states before each move.
    Returns the final states and the total number of steps taken.
    """
    cum = _cumulative(ts.P)
    states = np.asarray(start, dtype=np.intp).copy()
    steps = 0
    if first_step:
        states = _advance(cum, states, rng)
        steps += states.size
    active = np.flatnonzero(~stop_mask[states])
    n = 0
    while active.size:
        if on_step is not None:
            on_step(active, states[active])
        states[active] = _advance(cum, states[active], rng)
        steps += active.size
        active = active[~stop_mask[states[active]]]
        n += 1
        if n > STEP_CAP:
            raise RuntimeError(f"walk exceeded {STEP_CAP} steps without stopping")
    return states, steps


def _mean_and_se(samples):
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    sd = samples.std(ddof=1) if n > 1 else 0.0
    return float(samples.mean()), float(sd / np.sqrt(n))


def estimate_hitting(ts, x, trials, seed, boundary=None):
    """Empirical law of the first boundary vertex reached from ``x``.

    ``x`` must be an interior vertex (of ``boundary`` if given).
    """
    if boundary is not None:
        ts = ts.with_boundary(boundary)
    x = ts.index_of(x)
    if x in ts.boundary:
        raise ValueError("starting point must be interior")
    stop = np.zeros(ts.n, dtype=bool)
    stop[list(ts.boundary)] = True
    final, steps = _walk_until(ts, np.full(trials, x), stop, _rng(seed))
    est, se = {}, {}
    for b in ts.boundary:
        est[ts.vertices[b]], se[ts.vertices[b]] = _mean_and_se(final == b)
    return EstimateReport(est, se, trials, seed, steps)


def estimate_green(ts, A, x, y, trials, seed):
    """Mean number of visits to ``y`` (time 0 included) before the walk from ``x`` leaves ``A``."""
    A = set(ts.indices(A))
    if not A or len(A) == ts.n:
        raise ValueError("A must be a non-empty strict subset")
    x, y = ts.index_of(x), ts.index_of(y)
    if x not in A or y not in A:
        raise ValueError("x and y must lie in A")
    stop = np.ones(ts.n, dtype=bool)
    stop[list(A)] = False
    visits = np.zeros(trials)

    def count(active, states):
        visits[active[states == y]] += 1

    _, steps = _walk_until(ts, np.full(trials, x), stop, _rng(seed), on_step=count)
    m, s = _mean_and_se(visits)
    key = (ts.vertices[x], ts.vertices[y])
    return EstimateReport({key: m}, {key: s}, trials, seed, steps)


def estimate_boundary_chain(ts, trials, seed, boundary=None):
    """Empirical boundary chain: for each boundary ``x``, the law of the next boundary visit.

    The walk starts at ``x`` and stops at the first boundary vertex reached at
    a time ``n >= 1``.  ``trials`` walks are run from every boundary vertex.
    """
    if boundary is not None:
        ts = ts.with_boundary(boundary)
    stop = np.zeros(ts.n, dtype=bool)
    stop[list(ts.boundary)] = True
    rng = _rng(seed)
    est, se = {}, {}
    total = 0
    for x in ts.boundary:
        final, steps = _walk_until(ts, np.full(trials, x), stop, rng, first_step=True)
        total += steps
        for b in ts.boundary:
            key = (ts.vertices[x], ts.vertices[b])
            est[key], se[key] = _mean_and_se(final == b)
    return EstimateReport(est, se, trials, seed, total)


def estimate_boundary_occupation(ts, visits, seed, batches=50, boundary=None):
    """Long-run share of boundary visits spent at each boundary vertex.

    A single walk is run until it has made ``visits`` boundary visits; the
    standard errors come from ``batches`` consecutive batch means.  The target
    is ``pi`` restricted to the boundary and renormalized.
    """
    if boundary is not None:
        ts = ts.with_boundary(boundary)
    if visits < 2 * batches:
        raise ValueError("need at least two visits per batch")
    rng = _rng(seed)
    stop = np.zeros(ts.n, dtype=bool)
    stop[list(ts.boundary)] = True
    # the boundary chain embedded in one long path: chain one excursion per draw
    seq = np.empty(visits, dtype=np.intp)
    state = np.array([ts.boundary[0]])
    total = 0
    for k in range(visits):
        state, steps = _walk_until(ts, state, stop, rng, first_step=True)
        total += steps
        seq[k] = state[0]
    per = visits // batches
    seq = seq[: per * batches].reshape(batches, per)
    est, se = {}, {}
    for b in ts.boundary:
        est[ts.vertices[b]], se[ts.vertices[b]] = _mean_and_se((seq == b).mean(axis=1))
    return EstimateReport(est, se, visits, seed, total)
