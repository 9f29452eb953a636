"""Dense complex matrix kernel.

Operators and vectors are carried as 2-D ``complex128`` ndarrays; this module
validates them and wraps the handful of LAPACK-backed primitives the rest of
the package relies on (products, solves, spectral norms, eigendecompositions),
together with the JSON matrix schema used by the command line.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from hkcheck.defaults import COND_MAX
from hkcheck.errors import NonDiagonalizable, SingularMatrix

EPS = np.finfo(float).eps


def as_cmatrix(x):
    """Return `x` as a finite 2-D complex128 array (vectors become columns)."""
    a = np.array(x, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _check_square(a, what="matrix"):
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")


def identity(n):
    return np.eye(n, dtype=np.complex128)


def matmul(a, b):
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def solve(a, rhs):
    """Solve ``a x = rhs``; raise SingularMatrix when `a` is singular to
    working precision (LAPACK reciprocal condition below eps)."""
    a = as_cmatrix(a)
    rhs = as_cmatrix(rhs)
    _check_square(a)
    if a.shape[0] != rhs.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} \\ {rhs.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(a, rhs, check_finite=False)
        except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError) as exc:
            raise SingularMatrix(str(exc)) from None


def inv(a):
    a = as_cmatrix(a)
    return solve(a, identity(a.shape[0]))


def spectral_norm(a):
    """Largest singular value."""
    a = np.asarray(a, dtype=np.complex128)
    return float(scipy.linalg.svdvals(a, check_finite=False)[0])


def cond2(a):
    s = scipy.linalg.svdvals(np.asarray(a, dtype=np.complex128), check_finite=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def min_singular_values(stack):
    """Smallest singular value of each matrix in a (k, n, n) stack."""
    return np.linalg.svd(stack, compute_uv=False)[..., -1]


@dataclass(frozen=True)
class EigDecomposition:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    cond: float
    residual: float

    def apply(self, fvals):
        """``V diag(fvals) V^{-1}``."""
        v = self.vectors
        return solve(v.T, (v * fvals).T).T


def eig(a, cond_max=COND_MAX):
    """Eigendecomposition with a diagonalizability check.

    Raises NonDiagonalizable when the eigenvector matrix has 2-norm condition
    number above `cond_max`.
    """
    a = as_cmatrix(a)
    _check_square(a)
    w, v = scipy.linalg.eig(a, check_finite=False)
    c = cond2(v)
    if not c <= cond_max:
        raise NonDiagonalizable(c, cond_max)
    res = spectral_norm(a @ v - v * w)
    return EigDecomposition(w, v, c, res)


# -- JSON schema -----------------------------------------------------------

def to_json(a):
    a = as_cmatrix(a)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a],
    }


def from_json(obj):
    """Parse the matrix schema; errors name the offending field."""
    if not isinstance(obj, dict):
        raise ValueError("matrix: expected an object")
    for key in ("rows", "cols", "entries"):
        if key not in obj:
            raise ValueError(f"matrix: missing field '{key}'")
    rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    if not isinstance(rows, int) or rows < 1:
        raise ValueError("matrix: field 'rows' must be a positive integer")
    if not isinstance(cols, int) or cols < 1:
        raise ValueError("matrix: field 'cols' must be a positive integer")
    if not isinstance(entries, list) or len(entries) != rows:
        raise ValueError(f"matrix: field 'entries' must hold {rows} rows")
    out = np.empty((rows, cols), dtype=np.complex128)
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != cols:
            raise ValueError(f"matrix: field 'entries[{i}]' must hold {cols} entries")
        for j, pair in enumerate(row):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(p, (int, float)) for p in pair)):
                raise ValueError(f"matrix: field 'entries[{i}][{j}]' must be [re, im]")
            out[i, j] = complex(pair[0], pair[1])
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix: field 'entries' has non-finite values")
    return out
