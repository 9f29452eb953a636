"""Numerical checks of the Heinz-Kato inequality.

Given sectorial ``A`` (n1 x n1), ``B`` (n2 x n2) and ``T`` (n2 x n1) with
``||B T u|| <= M ||A u||``, the inequality bounds ``||B^a T A^{-a}||`` for
``0 < a < 1`` by one of three constants:

* Hilbert-space (positive self-adjoint A, B):  ``M^a ||T||^{1-a}``;
* bounded imaginary powers, interpolation:     ``M_A M_B M^a ||T||^{1-a}
  exp((phi_A^2 + phi_B^2)/4 + 2 max(a, 1-a)^2)``;
* invertible, three-lines:                     ``M_A M_B M^a ||T||^{1-a}
  exp((phi_A + phi_B) sqrt(a (1-a)))``.

In finite dimensions ``M = ||B T A^{-1}||`` is the least admissible constant
and the operator norm ``||B^a T A^{-a}||`` is the worst case over ``u``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from hkcheck import defaults
from hkcheck.bip import BipCertificate, Provenance, analytic_bip, fit_bip, sample_imaginary_norms
from hkcheck.cmatrix import EPS, as_cmatrix, eig, solve, spectral_norm
from hkcheck.errors import HKError, ResolventSingular, StructureUnknown
from hkcheck.powers import (
    QuadratureConfig,
    balakrishnan_neg_power,
    general_power,
    oracle_power,
    pos_power,
)
from hkcheck.sectorial import certify_invertible_sectorial, _golden_max

_DEFAULT_CFG = QuadratureConfig()


# -- constants ------------------------------------------------------------

def _check_a(a):
    if not 0.0 < a < 1.0:
        raise ValueError(f"exponent a = {a} must lie in (0, 1)")


def bound_thm1(M, normT, a):
    _check_a(a)
    return M ** a * normT ** (1.0 - a)


def bound_thm2(bipA, bipB, M, normT, a):
    _check_a(a)
    expo = (bipA.phi ** 2 + bipB.phi ** 2) / 4.0 + 2.0 * max(a, 1.0 - a) ** 2
    return bipA.M * bipB.M * M ** a * math.exp(expo) * normT ** (1.0 - a)


def bound_thm3(bipA, bipB, M, normT, a):
    _check_a(a)
    expo = (bipA.phi + bipB.phi) * math.sqrt(a * (1.0 - a))
    return bipA.M * bipB.M * M ** a * math.exp(expo) * normT ** (1.0 - a)


# -- instances ------------------------------------------------------------

@dataclass(frozen=True)
class HeinzKatoInstance:
    A: np.ndarray
    B: np.ndarray
    T: np.ndarray
    bipA: BipCertificate
    bipB: BipCertificate
    certA: object
    certB: object
    M: float
    normT: float
    notes: tuple = ()

    @property
    def hermitian(self):
        return _is_hpd(self.A) and _is_hpd(self.B)


def _is_hpd(x):
    if np.linalg.norm(x - x.conj().T, 2) > 1e-12 * max(1.0, spectral_norm(x)):
        return False
    return bool(np.min(np.linalg.eigvalsh(0.5 * (x + x.conj().T))) > 0)


def compute_m(A, B, T):
    """Least ``M`` with ``||B T u|| <= M ||A u||``, i.e. ``||B T A^{-1}||``."""
    A, B, T = as_cmatrix(A), as_cmatrix(B), as_cmatrix(T)
    t_ainv = solve(A.T, T.T).T
    return spectral_norm(B @ t_ainv)


def _certify_or_shift(x, name, notes):
    try:
        return x, certify_invertible_sectorial(x)
    except ResolventSingular as exc:
        if exc.s != 0.0:
            raise
    mu = defaults.SHIFT_MU
    notes.append(f"{name} is singular; checked through {name} + {mu:g} I")
    x = x + mu * np.eye(x.shape[0])
    return x, certify_invertible_sectorial(x)


def _bip_for(x, structure, mode, cert, t_grid, phi_grid):
    if mode == "analytic":
        if not structure:
            raise StructureUnknown("analytic BIP needs structure metadata")
        return analytic_bip(x, structure)
    samples = sample_imaginary_norms(x, t_grid, cert=cert)
    return fit_bip(samples, phi_grid)


def build_instance(A, B, T, structure=None, bip="analytic", bipA=None, bipB=None,
                   t_grid=defaults.BIP_T_GRID, phi_grid=defaults.BIP_PHI_GRID):
    """Certify ``A``, ``B`` and attach BIP certificates.

    `bip` is ``"analytic"`` (needs ``structure = {"A": ..., "B": ...}``) or
    ``"fitted"``; explicit `bipA` / `bipB` take precedence. A singular operator
    is replaced by its shift by ``1e-6`` and the substitution noted.
    """
    A, B, T = as_cmatrix(A), as_cmatrix(B), as_cmatrix(T)
    n1, n2 = A.shape[0], B.shape[0]
    if A.shape != (n1, n1) or B.shape != (n2, n2) or T.shape != (n2, n1):
        raise ValueError(f"incompatible shapes A{A.shape} B{B.shape} T{T.shape}")
    notes = []
    A, certA = _certify_or_shift(A, "A", notes)
    B, certB = _certify_or_shift(B, "B", notes)
    structure = structure or {}
    if bipA is None:
        bipA = _bip_for(A, structure.get("A"), bip, certA, t_grid, phi_grid)
    if bipB is None:
        bipB = _bip_for(B, structure.get("B"), bip, certB, t_grid, phi_grid)
    return HeinzKatoInstance(A, B, T, bipA, bipB, certA, certB,
                             compute_m(A, B, T), spectral_norm(T), tuple(notes))


# -- left-hand side -------------------------------------------------------

def _diagonalizable(x):
    try:
        eig(x)
        return True
    except np.linalg.LinAlgError:
        return False


def lhs_norm(inst, a, cfg=_DEFAULT_CFG, route="auto"):
    """``(||B^a T A^{-a}||, error estimate, route)``.

    Route ``auto`` uses the eigendecomposition oracle when both operators are
    diagonalizable and the resolvent quadratures otherwise.
    """
    _check_a(a)
    if route == "auto":
        route = ("oracle" if _diagonalizable(inst.A) and _diagonalizable(inst.B)
                 else "quadrature")
    if route == "oracle":
        pb = oracle_power(inst.B, a)
        na = oracle_power(inst.A, -a)
    else:
        pb = pos_power(inst.B, a, cfg, inst.certB)
        na = balakrishnan_neg_power(inst.A, a, cfg, inst.certA)
    x = pb.value @ inst.T @ na.value
    nb, nn = spectral_norm(pb.value), spectral_norm(na.value)
    eb, ea = pb.error_estimate, na.error_estimate
    nt = inst.normT
    n = max(inst.A.shape[0], inst.B.shape[0])
    err = (eb * nt * nn + nb * nt * ea + eb * nt * ea
           + 4 * n * EPS * nb * nt * nn)
    return spectral_norm(x), float(err), route


# -- report ---------------------------------------------------------------

@dataclass
class Row:
    a: float
    lhs: float = None
    lhs_error: float = None
    route: str = None
    bound1: float = None
    bound2: float = None
    bound3: float = None
    margin1: float = None
    margin2: float = None
    margin3: float = None
    pass1: bool = None
    pass2: bool = None
    pass3: bool = None
    status: str = "ok"

    @property
    def violation(self):
        return any(p is False for p in (self.pass1, self.pass2, self.pass3))

    def to_json(self):
        out = {"a": self.a, "status": self.status}
        if self.status != "ok":
            return out
        out.update(lhs=self.lhs, lhs_error=self.lhs_error, route=self.route)
        if self.bound1 is not None:
            out["bound1"] = self.bound1
        out.update(bound2=self.bound2, bound3=self.bound3)
        margins = {"thm2": self.margin2, "thm3": self.margin3}
        passes = {"thm2": self.pass2, "thm3": self.pass3}
        if self.bound1 is not None:
            margins = {"thm1": self.margin1, **margins}
            passes = {"thm1": self.pass1, **passes}
        out.update(margins=margins, pass_=passes)
        out["pass"] = out.pop("pass_")
        return out


@dataclass
class HeinzKatoReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    @property
    def violations(self):
        return sum(r.violation for r in self.rows)

    @property
    def failures(self):
        return sum(r.status != "ok" for r in self.rows)

    @property
    def worst_margin(self):
        ms = [m for r in self.rows if r.status == "ok"
              for m in (r.margin1, r.margin2, r.margin3) if m is not None]
        return min(ms) if ms else None

    @property
    def all_pass(self):
        return self.violations == 0

    def to_json(self):
        return {
            "instance": self.metadata,
            "rows": [r.to_json() for r in self.rows],
            "worst_margin": self.worst_margin,
            "violations": self.violations,
            "quadrature_failures": self.failures,
        }


def _bip_json(c):
    return {"M": c.M, "phi": c.phi, "provenance": c.provenance.value,
            "t_max": None if math.isinf(c.t_max) else c.t_max}


def check_inequality(inst, a_grid=defaults.A_GRID, cfg=_DEFAULT_CFG, route="auto"):
    """Evaluate every bound against the left-hand side on `a_grid`.

    A row passes a bound when ``lhs <= bound + lhs_error``; margins are the
    signed ``bound - lhs``. The Hilbert-space bound is added only when both
    operators are Hermitian positive definite.
    """
    hermitian = inst.hermitian
    rows = []
    for a in a_grid:
        a = float(a)
        row = Row(a)
        try:
            lhs, err, used = lhs_norm(inst, a, cfg, route)
        except (HKError, np.linalg.LinAlgError, ValueError):
            row.status = "QuadratureFailed"
            rows.append(row)
            continue
        row.lhs, row.lhs_error, row.route = float(lhs), float(err), used
        if hermitian:
            row.bound1 = bound_thm1(inst.M, inst.normT, a)
            row.margin1 = row.bound1 - lhs
            row.pass1 = bool(lhs <= row.bound1 + err)
        row.bound2 = bound_thm2(inst.bipA, inst.bipB, inst.M, inst.normT, a)
        row.bound3 = bound_thm3(inst.bipA, inst.bipB, inst.M, inst.normT, a)
        row.margin2, row.margin3 = row.bound2 - lhs, row.bound3 - lhs
        row.pass2 = bool(lhs <= row.bound2 + err)
        row.pass3 = bool(lhs <= row.bound3 + err)
        rows.append(row)
    fitted = not (inst.bipA.provenance.analytic and inst.bipB.provenance.analytic)
    meta = {
        "dims": [inst.A.shape[0], inst.B.shape[0]],
        "M": inst.M,
        "normT": inst.normT,
        "K_A": inst.certA.constant,
        "K_B": inst.certB.constant,
        "hermitian": hermitian,
        "bipA": _bip_json(inst.bipA),
        "bipB": _bip_json(inst.bipB),
        "fitted_bip": fitted,
        "notes": list(inst.notes),
    }
    if fitted:
        meta["notes"].append("fitted BIP constants are only sound for |t| <= t_max")
    return HeinzKatoReport(rows, meta)


# -- three-lines trace ----------------------------------------------------

@dataclass(frozen=True)
class TraceRecord:
    a: float
    phi: float
    xi: float
    sup0: float
    sup1: float
    center: float
    bound: float
    holds: bool
    interior0: bool
    interior1: bool

    def to_json(self):
        return dict(self.__dict__)


class _ProofFunction:
    """``f(z) = e^{xi z(z-1)} <v, B^{1-z} T A^{z+a-1} u>``."""

    def __init__(self, inst, a, u, v, xi, cfg):
        self.a, self.xi, self.cfg, self.inst = a, xi, cfg, inst
        self.u = as_cmatrix(u)[:, 0]
        self.v = as_cmatrix(v)[:, 0]
        try:
            ea, eb = eig(inst.A), eig(inst.B)
        except np.linalg.LinAlgError:
            self.spectral = None
            return
        self.mu_a, self.mu_b = ea.eigenvalues, eb.eigenvalues
        ca = solve(ea.vectors, self.u[:, None])[:, 0]
        core = solve(eb.vectors, inst.T @ ea.vectors)
        self.left = self.v.conj() @ eb.vectors
        self.mid = core * ca[None, :]
        self.log_a, self.log_b = np.log(self.mu_a), np.log(self.mu_b)
        self.spectral = True

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        gauss = np.exp(self.xi * z * (z - 1.0))
        if self.spectral:
            pa = np.exp(np.outer(z + self.a - 1.0, self.log_a))
            pb = np.exp(np.outer(1.0 - z, self.log_b))
            vals = np.einsum("i,zi,ij,zj->z", self.left, pb, self.mid, pa)
        else:
            vals = np.empty(z.size, dtype=np.complex128)
            inst = self.inst
            for j, zj in enumerate(z):
                pa = general_power(inst.A, zj + self.a - 1.0, inst.certA, self.cfg).value
                pb = general_power(inst.B, 1.0 - zj, inst.certB, self.cfg).value
                vals[j] = np.vdot(self.v, pb @ (inst.T @ (pa @ self.u)))
        return gauss * vals


def _line_sup(f, re, t_grid):
    t = np.asarray(t_grid, dtype=float)
    vals = np.abs(f(re + 1j * t))
    i = int(np.argmax(vals))
    best = float(vals[i])
    interior = 0 < i < t.size - 1
    if t.size >= 3:
        lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
        _, refined = _golden_max(lambda s: float(np.abs(f(re + 1j * s))[0]), lo, hi, 60)
        best = max(best, refined)
    return best, interior


def three_lines_trace(inst, a, u, v, t_grid=defaults.TRACE_T_GRID, cfg=_DEFAULT_CFG):
    """Evaluate the three-lines proof function on ``Re z = 0, 1`` and at ``1 - a``.

    Line suprema are grid maxima polished by golden-section search (so they
    never exceed the true supremum). ``xi = (phi_A + phi_B) / (2 sqrt(a(1-a)))``,
    and ``xi = 0`` when both BIP angles vanish.
    """
    _check_a(a)
    phi = inst.bipA.phi + inst.bipB.phi
    xi = phi / (2.0 * math.sqrt(a * (1.0 - a))) if phi > 0 else 0.0
    f = _ProofFunction(inst, a, u, v, xi, cfg)
    sup0, int0 = _line_sup(f, 0.0, t_grid)
    sup1, int1 = _line_sup(f, 1.0, t_grid)
    center = float(np.abs(f(1.0 - a))[0])
    bound = sup0 ** a * sup1 ** (1.0 - a)
    holds = center <= bound * (1.0 + 1e-9)
    return TraceRecord(a, phi, xi, sup0, sup1, center, bound, bool(holds), int0, int1)
