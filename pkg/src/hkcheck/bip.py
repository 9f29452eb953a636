"""Bounded-imaginary-powers certificates ``||A^{it}|| <= M e^{phi |t|}``.

Analytic certificates hold for every real ``t`` and come from the structure a
generator records alongside the matrix:

* ``A = S D S^{-1}`` with ``D`` diagonal, eigenvalues off the negative axis:
  ``M = cond_2(S)``, ``phi = max |arg d_i|``;
* ``A = lam I + N`` with ``N`` nilpotent, ``||N|| = nu``, ``r = nu / lam``:
  ``(1, -log(1 - r))`` when ``r < 1`` (negative binomial series), else
  ``(sum_{j<n} r^j, H_{n-1})`` from ``|binom(it, j)| <= e^{|t| H_j}``.

Fitted certificates only dominate the sampled range ``|t| <= t_max``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from hkcheck import defaults
from hkcheck.cmatrix import as_cmatrix, cond2, from_json, spectral_norm
from hkcheck.errors import EmptySamples, StructureUnknown
from hkcheck.powers import imaginary_power, oracle_power

STRUCTURE_TOL = 1e-8


class Provenance(str, enum.Enum):
    ANALYTIC_NORMAL = "AnalyticNormal"
    ANALYTIC_SIMILARITY = "AnalyticSimilarity"
    ANALYTIC_JORDAN = "AnalyticJordan"
    FITTED = "Fitted"

    @property
    def analytic(self):
        return self is not Provenance.FITTED


@dataclass(frozen=True)
class BipCertificate:
    M: float
    phi: float
    provenance: Provenance
    t_max: float
    samples: tuple = ()

    def bound(self, t):
        return self.M * math.exp(self.phi * abs(t))

    def to_json(self):
        return {
            "M": self.M,
            "phi": self.phi,
            "provenance": self.provenance.value,
            "t_max": self.t_max,
            "samples": [[t, v] for t, v in self.samples],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(float(obj["M"]), float(obj["phi"]), Provenance(obj["provenance"]),
                   float(obj["t_max"]),
                   tuple((float(t), float(v)) for t, v in obj["samples"]))


def sample_imaginary_norms(a, t_grid, cfg=None, cert=None):
    """``[(t, ||a^{it}||)]``; oracle when diagonalizable, quadrature otherwise."""
    a = as_cmatrix(a)
    out = []
    use_oracle = True
    for t in t_grid:
        t = float(t)
        if t == 0.0:
            out.append((t, 1.0))
            continue
        val = None
        if use_oracle:
            try:
                val = oracle_power(a, 1j * t).value
            except np.linalg.LinAlgError:
                use_oracle = False
        if val is None:
            kw = {} if cfg is None else {"cfg": cfg}
            val = imaginary_power(a, t, cert=cert, **kw).value
        out.append((t, spectral_norm(val)))
    return out


def _harmonic(n):
    return sum(1.0 / j for j in range(1, n + 1))


def analytic_bip(a, structure):
    """Global certificate from generator metadata.

    `structure` is the dict written by :mod:`hkcheck.gen`; it is checked
    against `a` and StructureUnknown is raised when it is missing, of an
    unknown class, or does not reproduce `a`.
    """
    a = as_cmatrix(a)
    if not structure or "class" not in structure:
        raise StructureUnknown("no structure metadata")
    cls = structure["class"]
    scale = max(1.0, spectral_norm(a))
    if cls in ("HermitianDiag", "NormalSector", "SimilarityPerturbed"):
        d = np.array([complex(re, im) for re, im in structure["spectrum"]])
        sim = structure.get("similarity")
        s = np.eye(d.size, dtype=complex) if sim is None else from_json(sim)
        if s.shape != a.shape:
            raise StructureUnknown("similarity shape does not match the operator")
        recon = (s * d) @ np.linalg.inv(s)
        if spectral_norm(recon - a) > STRUCTURE_TOL * scale * cond2(s):
            raise StructureUnknown("structure does not reproduce the operator")
        if np.any((np.abs(d.imag) == 0) & (d.real <= 0)):
            raise StructureUnknown("spectrum touches (-inf, 0]")
        M = max(1.0, cond2(s))
        phi = float(np.max(np.abs(np.angle(d))))
        prov = (Provenance.ANALYTIC_SIMILARITY if cls == "SimilarityPerturbed"
                else Provenance.ANALYTIC_NORMAL)
        return BipCertificate(M, phi, prov, math.inf)
    if cls == "JordanBlock":
        lam = float(structure["lambda"])
        n = a.shape[0]
        nil = a - lam * np.eye(n)
        if np.linalg.norm(np.linalg.matrix_power(nil, n)) > STRUCTURE_TOL * scale ** n:
            raise StructureUnknown("structure does not reproduce the operator")
        if not lam > 0:
            raise StructureUnknown("Jordan eigenvalue must be positive")
        r = spectral_norm(nil) / lam
        if r < 1.0:
            return BipCertificate(1.0, -math.log1p(-r), Provenance.ANALYTIC_JORDAN, math.inf)
        M = sum(r ** j for j in range(n))
        return BipCertificate(M, _harmonic(n - 1), Provenance.ANALYTIC_JORDAN, math.inf)
    raise StructureUnknown(f"unknown structure class {cls!r}")


def fit_bip(samples, phi_grid=defaults.BIP_PHI_GRID):
    """Fit ``(M, phi)`` dominating every sample.

    For each candidate ``phi``, ``M(phi) = max(1, max norm e^{-phi |t|})``; the
    pair minimizing ``M(phi) e^{phi t_ref}`` (``t_ref = max |t|``) wins, ties
    going to the smaller ``M``.
    """
    samples = [(float(t), float(v)) for t, v in samples]
    if not samples:
        raise EmptySamples("no samples to fit")
    t = np.array([s[0] for s in samples])
    v = np.array([s[1] for s in samples])
    t_ref = float(np.max(np.abs(t)))
    best = None
    for phi in phi_grid:
        phi = float(phi)
        M = max(1.0, float(np.max(v * np.exp(-phi * np.abs(t)))))
        obj = M * math.exp(phi * t_ref)
        if best is None or obj < best[0] * (1 - 1e-9) or (
                obj <= best[0] * (1 + 1e-9) and M < best[1]):
            best = (obj, M, phi)
    _, M, phi = best
    return BipCertificate(M, phi, Provenance.FITTED, t_ref, tuple(samples))
