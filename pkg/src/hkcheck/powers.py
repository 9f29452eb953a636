"""Complex powers of sectorial matrices.

Five routes, each returning a :class:`PowerResult` with an a-posteriori error
estimate:

``Oracle``
    eigendecomposition, ``V diag(mu^z) V^{-1}`` on the principal branch;
``Balakrishnan``
    ``A^{-a} = sin(pi a)/pi * int_0^inf s^{-a} (A+s)^{-1} ds``, ``0 < a < 1``;
``Dunford``
    ``A^z = 1/(2 pi i) int (-lam)^z (A+lam)^{-1} dlam`` over the boundary of
    ``Omega_K``, ``Re z < 0``;
``ImaginaryIntegral``
    ``A^{it} = sinh(pi t)/(pi t) * int_0^inf s^{it} (A+s)^{-2} A ds``;
``ExtendedCalculusQ``
    the regularized contour integral ``Q(eta, m, k)`` over the boundary of
    ``S_L``, which tends to ``B^eta`` as ``k -> inf``.

Real-line integrals are taken in ``x = log s`` with composite Gauss-Legendre
panels; contour rays likewise in ``x = log |lam|``. The error estimate is the
analytic tail bound plus the difference to a half-resolution re-run plus a
rounding term.
"""

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from hkcheck import defaults
from hkcheck.cmatrix import EPS, as_cmatrix, eig, identity, spectral_norm, to_json
from hkcheck.errors import (
    AlphaOutOfRange,
    ExponentNotNegative,
    RegularizerOrderTooLow,
    SpectrumOnCut,
)
from hkcheck.quadrature import QuadratureConfig, Segment, integrate, resolvents
from hkcheck.sectorial import (
    Kind,
    build_contour,
    certify_invertible_sectorial,
    certify_sectorial,
    omega_tail_bound,
)

__all__ = [
    "Method",
    "PowerResult",
    "QuadratureConfig",
    "oracle_power",
    "balakrishnan_neg_power",
    "dunford_power",
    "imaginary_power",
    "pos_power",
    "extended_power_q",
    "general_power",
    "power",
]


class Method(str, enum.Enum):
    ORACLE = "Oracle"
    BALAKRISHNAN = "Balakrishnan"
    DUNFORD = "Dunford"
    IMAGINARY = "ImaginaryIntegral"
    EXTENDED_Q = "ExtendedCalculusQ"
    IDENTITY = "Identity"


@dataclass(frozen=True)
class PowerResult:
    value: np.ndarray
    exponent: complex
    method: Method
    error_estimate: float
    nodes: int = 0
    truncation: tuple = field(default=())

    def to_json(self):
        return {
            "method": self.method.value,
            "exponent": [self.exponent.real, self.exponent.imag],
            "error_estimate": self.error_estimate,
            "nodes": self.nodes,
            "truncation": list(self.truncation),
            "value": to_json(self.value),
        }


_DEFAULT_CFG = QuadratureConfig()


def _identity_result(a, z):
    return PowerResult(identity(a.shape[0]), complex(z), Method.IDENTITY, 0.0)


def _check_off_cut(mu):
    on_cut = (np.abs(mu.imag) <= defaults.SPECTRUM_CUT_TOL * np.maximum(1.0, np.abs(mu))) \
        & (mu.real <= defaults.SPECTRUM_CUT_TOL)
    if np.any(on_cut):
        raise SpectrumOnCut(f"eigenvalue {mu[np.argmax(on_cut)]} on (-inf, 0]")


def oracle_power(a, z, cond_max=defaults.COND_MAX):
    """``a^z`` through the eigendecomposition (principal branch)."""
    a = as_cmatrix(a)
    z = complex(z)
    if z == 0:
        return _identity_result(a, z)
    dec = eig(a, cond_max)
    mu = dec.eigenvalues
    _check_off_cut(mu)
    logs = np.log(mu)
    fvals = np.exp(z * logs)
    value = dec.apply(fvals)
    deriv = np.max(np.abs(z * fvals / mu))
    n = a.shape[0]
    err = dec.cond * (dec.residual * deriv + n * EPS * dec.cond * np.max(np.abs(fvals)))
    return PowerResult(value, z, Method.ORACLE, float(err))


def _spectrum(a):
    mu = scipy.linalg.eigvals(a, check_finite=False)
    _check_off_cut(mu)
    return mu


def _wrap(angle):
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def _width(cfg, gap):
    return min(cfg.panel_width, 1.5 * gap)


def _invertible_cert(a, cert):
    if cert is None:
        cert = certify_invertible_sectorial(a)
    if cert.kind is not Kind.INVERTIBLE:
        raise ValueError("an InvertibleSectorial certificate is required")
    return cert


def balakrishnan_neg_power(a, alpha, cfg=_DEFAULT_CFG, cert=None):
    """``a^{-alpha}`` for ``0 < alpha < 1`` from the resolvent integral.

    The truncation interval is widened beyond ``[cfg.x_lo, cfg.x_hi]`` until
    ``sin(pi a)/pi * K e^{(1-a) x_lo} / (1-a)`` and
    ``sin(pi a)/pi * K e^{-a x_hi} / a`` both fall below ``cfg.tail_tol``
    relative to ``||a||^{-alpha}``, a lower bound for ``||a^{-alpha}||``.
    """
    a = as_cmatrix(a)
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha = {alpha} not in (0, 1)")
    cert = _invertible_cert(a, cert)
    K = cert.constant
    mu = _spectrum(a)
    gap = np.pi - float(np.max(np.abs(np.angle(mu))))
    c = math.sin(math.pi * alpha) / math.pi
    tol = cfg.tail_tol * spectral_norm(a) ** (-alpha)
    x_lo = min(cfg.x_lo, math.log(tol * (1.0 - alpha) / (c * K)) / (1.0 - alpha))
    x_hi = max(cfg.x_hi, -math.log(tol * alpha / (c * K)) / alpha)
    tail = c * K * (math.exp((1.0 - alpha) * x_lo) / (1.0 - alpha)
                    + math.exp(-alpha * x_hi) / alpha)

    def integrand(x):
        s = np.exp(x)
        return (c * np.exp((1.0 - alpha) * x))[:, None, None] * resolvents(a, s)

    out = integrate([Segment(x_lo, x_hi, _width(cfg, gap), integrand)],
                    cfg.nodes_per_panel)
    err = tail + out.refinement_diff + out.roundoff
    return PowerResult(out.value, complex(-alpha), Method.BALAKRISHNAN, err,
                       out.nodes, (x_lo, x_hi))


def pos_power(a, alpha, cfg=_DEFAULT_CFG, cert=None):
    """``a^{alpha}`` for ``0 < alpha < 1`` as ``a @ a^{alpha - 1}``."""
    a = as_cmatrix(a)
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha = {alpha} not in (0, 1)")
    neg = balakrishnan_neg_power(a, 1.0 - alpha, cfg, cert)
    value = a @ neg.value
    err = spectral_norm(a) * neg.error_estimate
    return PowerResult(value, complex(alpha), Method.BALAKRISHNAN, err,
                       neg.nodes, neg.truncation)


def imaginary_power(a, t, cfg=_DEFAULT_CFG, cert=None):
    """``a^{it}`` from ``sinh(pi t)/(pi t) int s^{it} (a+s)^{-2} a ds``.

    Panels are capped at width ``pi / (4|t|)`` for the oscillatory factor.
    """
    a = as_cmatrix(a)
    t = float(t)
    if t == 0.0:
        return _identity_result(a, 0)
    cert = _invertible_cert(a, cert)
    K = cert.constant
    mu = _spectrum(a)
    gap = np.pi - float(np.max(np.abs(np.angle(mu))))
    pref = math.sinh(math.pi * t) / (math.pi * t)
    norm_a = spectral_norm(a)
    tol = cfg.tail_tol
    left = abs(pref) * (1.0 + K) * K
    right = abs(pref) * norm_a * K * K
    x_lo = min(cfg.x_lo, math.log(tol / left))
    x_hi = max(cfg.x_hi, -math.log(tol / right))
    tail = left * math.exp(x_lo) + right * math.exp(-x_hi)
    width = min(_width(cfg, gap), math.pi / (4.0 * abs(t)))

    def integrand(x):
        s = np.exp(x)
        r = resolvents(a, s)
        f = r - s[:, None, None] * (r @ r)
        return (pref * np.exp((1.0 + 1j * t) * x))[:, None, None] * f

    out = integrate([Segment(x_lo, x_hi, width, integrand)], cfg.nodes_per_panel)
    err = tail + out.refinement_diff + out.roundoff
    return PowerResult(out.value, complex(0.0, t), Method.IMAGINARY, err,
                       out.nodes, (x_lo, x_hi))


def _ray_gap(mu, theta):
    """Angular distance, seen from the rays at +-theta, to the poles -mu."""
    if mu.size == 0:
        return np.pi
    arg = np.angle(-mu)
    return float(min(np.min(np.abs(_wrap(arg - theta))),
                     np.min(np.abs(_wrap(arg + theta)))))


def _ray_segments(a, theta, lo, hi, width, weight):
    """Lower ray (inwards) and upper ray (outwards) at angle +-theta.

    `weight(x, sign)` returns the scalar factor times ``dlam/dx`` on the ray
    ``lam = e^x e^{sign i theta}``; the resolvent is multiplied in here.
    """
    segs = []
    for sign, orient in ((-1.0, -1.0), (1.0, 1.0)):
        rot = cmath.exp(1j * sign * theta)

        def integrand(x, sign=sign, orient=orient, rot=rot):
            lam = np.exp(x) * rot
            return (orient * weight(x, sign))[:, None, None] * resolvents(a, lam)

        segs.append(Segment(lo, hi, width, integrand))
    return segs


def dunford_power(a, z, cert=None, cfg=_DEFAULT_CFG):
    """``a^z`` for ``Re z < 0`` from the Dunford integral over ``Omega_K``."""
    a = as_cmatrix(a)
    z = complex(z)
    if not z.real < 0:
        raise ExponentNotNegative(f"Re z = {z.real} must be negative")
    cert = _invertible_cert(a, cert)
    contour = build_contour(cert, z.real, cfg.contour_tail_tol, im_z=z.imag,
                            nodes=cfg.nodes_per_panel)
    theta, r, R = contour.angle, contour.radius, contour.R
    mu = _spectrum(a)
    gap = _ray_gap(mu, theta)
    scale = 1.0 / (2j * np.pi)

    def ray_weight(x, sign):
        # -lam = e^x e^{i(sign*theta + pi)} taken on the principal branch
        arg = -sign * (np.pi - theta)
        lam = np.exp(x) * cmath.exp(1j * sign * theta)
        return scale * np.exp(z * (x + 1j * arg)) * lam

    segs = _ray_segments(a, theta, math.log(r), math.log(R),
                         _width(cfg, gap), ray_weight)

    # arc lam = r e^{i phi}, phi from -theta down to -(2 pi - theta)
    def arc(phi):
        lam = r * np.exp(1j * phi)
        w = -scale * np.exp(z * (math.log(r) + 1j * (phi + np.pi))) * 1j * lam
        return w[:, None, None] * resolvents(a, lam)

    arc_gap = math.log(float(np.min(np.abs(mu))) / r)
    arc_seg = Segment(-(2.0 * np.pi - theta), -theta, min(1.0, 1.5 * arc_gap), arc)
    out = integrate([segs[0], arc_seg, segs[1]], cfg.nodes_per_panel)
    tail = omega_tail_bound(cert.constant, R, z.real, z.imag)
    err = tail + out.refinement_diff + out.roundoff
    return PowerResult(out.value, z, Method.DUNFORD, err, out.nodes, (r, R))


def regularizer(lam, k):
    """``k/(k-lam) - 1/(1-k lam)``, in the factored form
    ``lam (1 - k^2) / ((k - lam)(1 - k lam))`` that avoids cancellation."""
    return lam * (1.0 - k * k) / ((k - lam) * (1.0 - k * lam))


def extended_power_q(b, eta, m, k, cert=None, cfg=_DEFAULT_CFG):
    """The regularized contour integral ``Q(eta, m, k)`` for sectorial `b`.

    ``Q = 1/(2 pi i) int (k/(k-lam) - 1/(1-k lam))^m (-lam)^eta (b+lam)^{-1} dlam``
    over the two rays bounding ``S_L``. In functional-calculus terms this is
    ``psi_k(b)^m b^eta`` with ``psi_k(mu) = k/(k+mu) - 1/(1+k mu)``, which
    converges to ``b^eta`` as ``k -> inf``.
    """
    b = as_cmatrix(b)
    eta = complex(eta)
    m = int(m)
    k = float(k)
    if not abs(eta.real) < m:
        raise RegularizerOrderTooLow(f"|Re eta| = {abs(eta.real)} needs m > {abs(eta.real)}")
    if not k > 0:
        raise ValueError("k must be positive")
    if cert is None:
        cert = certify_sectorial(b)
    contour = build_contour(cert, eta.real, cfg.contour_tail_tol, im_z=eta.imag,
                            m=m, k=k, nodes=cfg.nodes_per_panel)
    theta = contour.angle
    mu = scipy.linalg.eigvals(b, check_finite=False)
    mu = mu[np.abs(mu) > 0]
    gap = min(_ray_gap(mu, theta), theta)
    scale = 1.0 / (2j * np.pi)

    def ray_weight(x, sign):
        arg = -sign * (np.pi - theta)
        lam = np.exp(x) * cmath.exp(1j * sign * theta)
        return scale * regularizer(lam, k) ** m * np.exp(eta * (x + 1j * arg)) * lam

    segs = _ray_segments(b, theta, math.log(contour.inner), math.log(contour.R),
                         _width(cfg, gap), ray_weight)
    out = integrate(segs, cfg.nodes_per_panel)
    tail = 2.0 * cfg.contour_tail_tol
    err = tail + out.refinement_diff + out.roundoff
    return PowerResult(out.value, eta, Method.EXTENDED_Q, err, out.nodes,
                       (contour.inner, contour.R))


def general_power(a, w, cert=None, cfg=_DEFAULT_CFG):
    """``a^w`` for any complex `w`: the oracle when `a` is diagonalizable,
    otherwise ``a^j`` times a Dunford power with ``Re(w - j)`` in (-1.5, -0.5]."""
    a = as_cmatrix(a)
    w = complex(w)
    if w == 0:
        return _identity_result(a, w)
    try:
        return oracle_power(a, w)
    except np.linalg.LinAlgError:
        pass
    j = math.ceil(w.real + 0.5)
    base = dunford_power(a, w - j, cert, cfg)
    if j >= 0:
        left = np.linalg.matrix_power(a, j)
    else:
        left = np.linalg.matrix_power(np.linalg.inv(a), -j)
    value = left @ base.value
    err = spectral_norm(left) * base.error_estimate
    return PowerResult(value, w, Method.DUNFORD, err, base.nodes, base.truncation)


def power(a, z, method="auto", cfg=_DEFAULT_CFG, cert=None):
    """Dispatch for the command line; `method` is one of ``auto``, ``oracle``,
    ``balakrishnan``, ``dunford``, ``imaginary``."""
    a = as_cmatrix(a)
    z = complex(z)
    if z == 0:
        return _identity_result(a, z)
    if method == "auto":
        try:
            return oracle_power(a, z)
        except np.linalg.LinAlgError:
            pass
        if z.imag == 0 and -1.0 < z.real < 0.0:
            return balakrishnan_neg_power(a, -z.real, cfg, cert)
        if z.imag == 0 and 0.0 < z.real < 1.0:
            return pos_power(a, z.real, cfg, cert)
        if z.real == 0:
            return imaginary_power(a, z.imag, cfg, cert)
        return general_power(a, z, cert, cfg)
    if method == "oracle":
        return oracle_power(a, z)
    if method == "balakrishnan":
        if z.imag != 0:
            raise AlphaOutOfRange("the Balakrishnan route needs a real exponent")
        if z.real < 0:
            return balakrishnan_neg_power(a, -z.real, cfg, cert)
        return pos_power(a, z.real, cfg, cert)
    if method == "dunford":
        return dunford_power(a, z, cert, cfg)
    if method == "imaginary":
        if z.real != 0:
            raise ExponentNotNegative("the imaginary route needs Re z = 0")
        return imaginary_power(a, z.imag, cfg, cert)
    raise ValueError(f"unknown method {method!r}")
