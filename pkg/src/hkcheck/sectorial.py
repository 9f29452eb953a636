"""Sectoriality certificates, resolvent regions and integration contours.

A matrix ``A`` is certified *invertible sectorial* with constant ``K`` when
``(1 + s) ||(A + s)^{-1}|| <= K`` on the scanned ``s >= 0``, and *sectorial*
with constant ``L`` when ``s ||(B + s)^{-1}|| <= L`` on ``s > 0``. From the
constant follow the resolvent regions

* ``Omega_K``: the sector ``|arg z| <= arcsin(1/(2K))`` together with the disc
  ``|z| <= 1/(2K)``, where ``(1 + |z|) ||(A + z)^{-1}|| <= 2K + 1``;
* ``S_L``: the sector ``|arg z| <= arcsin(1/(2L))``, where
  ``|z| ||(B + z)^{-1}|| <= 2L - 1``.

Certification samples the scalar function of ``s`` on a logarithmic grid and
polishes the grid maximizer with a golden-section search; it is evidence, not
proof, and the scan is kept in the certificate for that reason.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from hkcheck import defaults
from hkcheck.cmatrix import EPS, as_cmatrix
from hkcheck.errors import InvalidExponent, ResolventSingular

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Kind(str, enum.Enum):
    INVERTIBLE = "InvertibleSectorial"
    SECTORIAL = "Sectorial"


class Region(str, enum.Enum):
    OMEGA_K = "OmegaK"
    S_L = "SL"


@dataclass(frozen=True)
class SectorialCertificate:
    kind: Kind
    constant: float
    angle: float
    radius: float
    scan: tuple
    refined: bool

    @property
    def region_bound(self):
        """Resolvent bound valid on the region boundary (2K+1 or 2L-1)."""
        if self.kind is Kind.INVERTIBLE:
            return 2.0 * self.constant + 1.0
        return 2.0 * self.constant - 1.0

    def to_json(self):
        return {
            "kind": self.kind.value,
            "constant": self.constant,
            "angle": self.angle,
            "radius": self.radius,
            "scan": [[s, v] for s, v in self.scan],
            "refined": self.refined,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            kind=Kind(obj["kind"]),
            constant=float(obj["constant"]),
            angle=float(obj["angle"]),
            radius=float(obj["radius"]),
            scan=tuple((float(s), float(v)) for s, v in obj["scan"]),
            refined=bool(obj["refined"]),
        )


@dataclass(frozen=True)
class ContourSpec:
    """Truncated boundary of ``Omega_K`` or ``S_L``.

    Segments are traversed in a fixed order: the ray at ``-angle`` inwards
    from ``R``, the arc of radius `radius` through ``arg = pi`` (absent for
    ``S_L``), then the ray at ``+angle`` back out to ``R``. For ``S_L`` the
    rays are cut at `inner` instead of meeting at the origin.
    """

    region: Region
    angle: float
    radius: float
    R: float
    inner: float
    nodes_per_segment: int = defaults.NODES_PER_PANEL

    def __post_init__(self):
        if not self.R > self.radius:
            raise ValueError("truncation radius must exceed the arc radius")
        if self.nodes_per_segment < 2:
            raise ValueError("nodes_per_segment must be >= 2")


def _products(a, s, invertible):
    """(1+s)||(a+s)^{-1}|| (or s||.||) for each s, via smallest singular values."""
    n = a.shape[0]
    s = np.asarray(s, dtype=float)
    stack = a[None, :, :] + s[:, None, None] * np.eye(n)
    sv = np.linalg.svd(stack, compute_uv=False)
    smin, smax = sv[:, -1], sv[:, 0]
    bad = smin <= n * EPS * smax
    if np.any(bad):
        raise ResolventSingular(float(s[np.argmax(bad)]))
    weight = 1.0 + s if invertible else s
    return weight / smin


def _golden_max(f, lo, hi, iters):
    """Maximize a unimodal scalar function on [lo, hi]."""
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    for _ in range(iters):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
        for x, fx in ((c, fc), (d, fd)):
            if fx > best_f:
                best_x, best_f = x, fx
        if hi - lo <= 1e-13 * max(1.0, abs(lo), abs(hi)):
            break
    return best_x, best_f


def _certify(a, grid, invertible, iters):
    values = _products(a, grid, invertible)
    i = int(np.argmax(values))
    lo_i, hi_i = max(i - 1, 0), min(i + 1, grid.size - 1)

    # refine in log s; the s = 0 cell is bracketed linearly
    if grid[lo_i] == 0.0:
        to_s = float
        lo, hi = 0.0, float(grid[hi_i])
    else:
        to_s = math.exp
        lo, hi = math.log(grid[lo_i]), math.log(grid[hi_i])

    def scalar(u):
        return float(_products(a, [to_s(u)], invertible)[0])

    refined = False
    best = float(values[i])
    if hi > lo:
        _, fbest = _golden_max(scalar, lo, hi, iters)
        best = max(best, fbest)
        refined = True
    constant = max(1.0, best)
    kind = Kind.INVERTIBLE if invertible else Kind.SECTORIAL
    angle = math.asin(1.0 / (2.0 * constant))
    radius = 1.0 / (2.0 * constant) if invertible else 0.0
    scan = tuple(zip(grid.tolist(), values.tolist()))
    return SectorialCertificate(kind, constant, angle, radius, scan, refined)


def certify_invertible_sectorial(a, s_max=defaults.SCAN_S_MAX,
                                 n_grid=defaults.SCAN_N_GRID,
                                 s_min=defaults.SCAN_S_MIN,
                                 iters=defaults.GOLDEN_ITERS):
    """Certify ``K = max(1, sup_s (1+s)||(a+s)^{-1}||)`` by scanning.

    The grid is ``s = 0`` plus `n_grid` log-spaced points on [`s_min`, `s_max`].
    Raises ResolventSingular when ``a + s`` is numerically singular at a grid
    point.
    """
    a = as_cmatrix(a)
    grid = np.concatenate([[0.0], np.geomspace(s_min, s_max, n_grid)])
    return _certify(a, grid, True, iters)


def certify_sectorial(b, s_min=defaults.SCAN_S_MIN, s_max=defaults.SCAN_S_MAX,
                      n_grid=defaults.SCAN_N_GRID, iters=defaults.GOLDEN_ITERS):
    """Certify ``L = max(1, sup_s s||(b+s)^{-1}||)`` on a log grid."""
    b = as_cmatrix(b)
    grid = np.geomspace(s_min, s_max, n_grid)
    return _certify(b, grid, False, iters)


def omega_tail_bound(constant, R, re_z, im_z=0.0):
    """Norm bound on the Dunford integrand beyond radius R (both rays)."""
    return ((2.0 * constant + 1.0) * math.exp(math.pi * abs(im_z))
            * R ** re_z / (math.pi * abs(re_z)))


def regularizer_scale(cert, m, k, im_eta=0.0):
    kk = max(k, 1.0 / k)
    s2 = math.sin(cert.angle) ** 2
    return ((kk / s2) ** m * (2.0 * cert.constant - 1.0)
            * math.exp(math.pi * abs(im_eta)) / math.pi)


def build_contour(cert, re_z, tol_tail, im_z=0.0, m=None, k=None,
                  nodes=defaults.NODES_PER_PANEL):
    """Truncated integration contour for the certificate's region.

    For ``Omega_K`` (invertible certificates) `re_z` must be negative and
    ``R`` solves ``(2K+1) R^re_z / (pi |re_z|) = tol_tail`` (times
    ``exp(pi |im_z|)`` for complex exponents). For ``S_L`` the regularizer
    order `m` and parameter `k` are required, ``|re_z| < m``, and both the
    inner and outer cut-offs are set from the regularized tail bound.
    """
    try:
        if cert.kind is Kind.INVERTIBLE and m is None:
            if not re_z < 0:
                raise InvalidExponent(f"Omega_K contour needs Re z < 0, got {re_z}")
            c = (2.0 * cert.constant + 1.0) * math.exp(math.pi * abs(im_z))
            R = (c / (math.pi * abs(re_z) * tol_tail)) ** (1.0 / abs(re_z))
            R = max(R, 2.0 * cert.radius, 1.0)
            if not math.isfinite(R) or R > 1e300:
                raise InvalidExponent(f"tail tolerance unreachable for Re z = {re_z}")
            return ContourSpec(Region.OMEGA_K, cert.angle, cert.radius, R,
                               cert.radius, nodes)
        if m is None or k is None:
            raise InvalidExponent("S_L contour needs the regularizer order m and k")
        if not abs(re_z) < m:
            raise InvalidExponent(f"|Re eta| = {abs(re_z)} must be below m = {m}")
        c = regularizer_scale(cert, m, k, im_z)
        kk = max(k, 1.0 / k)
        lo_rate, hi_rate = m + re_z, m - re_z
        inner = min(1.0 / kk, (tol_tail * lo_rate / c) ** (1.0 / lo_rate))
        R = max(kk, (tol_tail * hi_rate / c) ** (-1.0 / hi_rate))
    except OverflowError:
        raise InvalidExponent("tail tolerance unreachable") from None
    if not (math.isfinite(R) and R < 1e300 and inner > 1e-300):
        raise InvalidExponent("tail tolerance unreachable")
    return ContourSpec(Region.S_L, cert.angle, 0.0, R, inner, nodes)


def boundary_points(cert, n_samples, r_max=defaults.SCAN_S_MAX,
                    r_min=defaults.SCAN_S_MIN):
    """`n_samples` points on the region boundary, symmetric about the apex.

    A parameter ``tau`` runs over [-1, 1]; ``|tau| <= 1/3`` covers the arc
    (``tau = 0`` is the apex ``-radius``), the rest the rays, log-spaced out
    to `r_max`. For ``S_L`` the arc collapses to the origin and the rays start
    at `r_min`.
    """
    tau = np.zeros(1) if n_samples == 1 else np.linspace(-1.0, 1.0, n_samples)
    theta = cert.angle
    tau_arc = 1.0 / 3.0
    out = np.empty(tau.size, dtype=np.complex128)
    r0 = cert.radius if cert.kind is Kind.INVERTIBLE else r_min
    for j, t in enumerate(tau):
        sgn = 1.0 if t >= 0 else -1.0
        if abs(t) <= tau_arc:
            if cert.kind is Kind.INVERTIBLE:
                phi = math.pi - (math.pi - theta) * abs(t) / tau_arc
                out[j] = cert.radius * complex(math.cos(phi), sgn * math.sin(phi))
            else:
                out[j] = 0.0
        else:
            frac = (abs(t) - tau_arc) / (1.0 - tau_arc)
            rho = r0 * (r_max / r0) ** frac
            out[j] = rho * complex(math.cos(theta), sgn * math.sin(theta))
    return out


def verify_region_bound(a, cert, n_samples=defaults.REGION_SAMPLES):
    """Sample the region boundary and report ``(lambda, bound - witnessed)``.

    Violations show up as negative margins; nothing is raised.
    """
    a = as_cmatrix(a)
    lam = boundary_points(cert, n_samples)
    n = a.shape[0]
    stack = a[None, :, :] + lam[:, None, None] * np.eye(n)
    smin = np.linalg.svd(stack, compute_uv=False)[:, -1]
    mod = np.abs(lam)
    weight = 1.0 + mod if cert.kind is Kind.INVERTIBLE else mod
    with np.errstate(divide="ignore", invalid="ignore"):
        witnessed = np.where(weight == 0.0, 0.0, weight / smin)
    margins = cert.region_bound - witnessed
    return [(complex(z), float(mg)) for z, mg in zip(lam, margins)]
