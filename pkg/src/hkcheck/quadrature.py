"""Composite Gauss-Legendre rules for matrix-valued integrands."""

import functools
import math
from dataclasses import dataclass

import numpy as np

from hkcheck import defaults

EPS = np.finfo(float).eps
MAX_PANELS = 50_000


@dataclass(frozen=True)
class QuadratureConfig:
    """Panel layout for the real-line and contour quadratures.

    `x_lo`, `x_hi` are the default truncation bounds in the logarithmic
    variable; routes extend them when the analytic tail bound at the default
    bounds exceeds `tail_tol`. The default panel width
    ``(x_hi - x_lo) / panel_count`` is a cap, never exceeded.
    """

    nodes_per_panel: int = defaults.NODES_PER_PANEL
    panel_count: int = defaults.PANEL_COUNT
    x_lo: float = defaults.X_BOUNDS[0]
    x_hi: float = defaults.X_BOUNDS[1]
    tail_tol: float = defaults.TAIL_TOL
    contour_tail_tol: float = defaults.CONTOUR_TAIL_TOL

    def __post_init__(self):
        if self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be >= 2")
        if self.panel_count < 1:
            raise ValueError("panel_count must be >= 1")
        if not self.x_lo < self.x_hi:
            raise ValueError("truncation bounds must be ordered")
        if not (self.tail_tol > 0 and self.contour_tail_tol > 0):
            raise ValueError("tolerances must be positive")

    @property
    def panel_width(self):
        return (self.x_hi - self.x_lo) / self.panel_count


@functools.lru_cache(maxsize=None)
def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def panel_rule(lo, hi, width, n):
    """Nodes and weights of an `n`-point rule on equal panels of width <= `width`."""
    n_pan = max(1, math.ceil((hi - lo) / width - 1e-9))
    if n_pan > MAX_PANELS:
        raise ValueError(f"quadrature would need {n_pan} panels")
    edges = np.linspace(lo, hi, n_pan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x, w = gauss_legendre(n)
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


@dataclass(frozen=True)
class Segment:
    """One integration segment: ``integrand`` maps an array of parameter
    values to a stack of matrices, Jacobian and orientation included."""

    lo: float
    hi: float
    width: float
    integrand: object


@dataclass(frozen=True)
class QuadOutcome:
    value: np.ndarray
    refinement_diff: float
    roundoff: float
    nodes: int


def integrate(segments, n):
    """Integrate over `segments` with `n` and ``n // 2`` nodes per panel.

    Returns the `n`-node value together with the 2-norm difference to the
    half-resolution value and a rounding-error estimate.
    """
    total = None
    coarse = None
    roundoff = 0.0
    count = 0
    for seg in segments:
        x, w = panel_rule(seg.lo, seg.hi, seg.width, n)
        f = seg.integrand(x)
        part = np.tensordot(w, f, axes=(0, 0))
        fro = np.sqrt(np.sum(np.abs(f) ** 2, axis=(1, 2)))
        roundoff += float(np.dot(np.abs(w), fro))
        xc, wc = panel_rule(seg.lo, seg.hi, seg.width, max(2, n // 2))
        part_c = np.tensordot(wc, seg.integrand(xc), axes=(0, 0))
        total = part if total is None else total + part
        coarse = part_c if coarse is None else coarse + part_c
        count += x.size
    dim = total.shape[0]
    diff = float(np.linalg.norm(total - coarse, 2))
    return QuadOutcome(total, diff, 16 * dim * EPS * roundoff, count)


def resolvents(a, shifts):
    """Stack of ``(a + shift I)^{-1}`` for each complex shift."""
    shifts = np.asarray(shifts, dtype=np.complex128)
    n = a.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    stack = a[None, :, :] + shifts[:, None, None] * eye
    return np.linalg.solve(stack, np.broadcast_to(eye, stack.shape))
