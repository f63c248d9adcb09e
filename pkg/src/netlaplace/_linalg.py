"""Dense LU with partial pivoting plus a LAPACK 1-norm condition estimate."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .exceptions import SingularSystemError

# relative pivot size below which a matrix is treated as exactly singular
PIVOT_TOL = 1e-12
# 1-norm condition estimate above which a matrix is reported ill-conditioned
COND_LIMIT = 1e12


class IllConditionedWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class LUFactor:
    lu: np.ndarray
    piv: np.ndarray
    condition: float
    min_pivot: float

    @property
    def exactly_singular(self):
        return self.min_pivot < PIVOT_TOL

    @property
    def singular(self):
        return self.exactly_singular or self.condition > COND_LIMIT

    def solve(self, b):
        return linalg.lu_solve((self.lu, self.piv), b, check_finite=False)


def factorize(a):
    """LU-factorize a square matrix and estimate its 1-norm condition number."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return LUFactor(a.copy(), np.zeros(0, dtype=np.int32), 1.0, np.inf)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(a)
    scale = max(1.0, float(np.abs(a).max()))
    min_pivot = float(np.abs(np.diag(lu)).min()) / scale
    if min_pivot == 0.0:
        return LUFactor(lu, piv, np.inf, 0.0)
    (gecon,) = lapack.get_lapack_funcs(("gecon",), (lu,))
    anorm = float(np.abs(a).sum(axis=0).max())
    rcond, info = gecon(lu, anorm, norm="1")
    condition = np.inf if rcond == 0.0 else 1.0 / float(rcond)
    return LUFactor(lu, piv, condition, min_pivot)


def solve(a, b, what="matrix"):
    """Solve ``a x = b``; raise on exact singularity, warn when ill-conditioned."""
    fac = factorize(a)
    if fac.exactly_singular:
        raise SingularSystemError(f"{what} is singular", condition=fac.condition)
    if fac.condition > COND_LIMIT:
        warnings.warn(
            f"{what} is ill-conditioned (condition estimate {fac.condition:.3g})",
            IllConditionedWarning,
            stacklevel=2,
        )
    return fac.solve(b)


def inverse(a, what="matrix"):
    a = np.asarray(a)
    return solve(a, np.eye(a.shape[0], dtype=a.dtype), what=what)


def compact(a, tol=1e-14):
    """Drop imaginary parts that vanish below ``tol`` (storage only)."""
    a = np.asarray(a)
    if np.iscomplexobj(a) and (a.size == 0 or np.abs(a.imag).max() <= tol):
        return np.ascontiguousarray(a.real)
    return a
