"""Seeded generators of invertible sectorial test operators.

All randomness comes from numpy's counter-based Philox bit generator keyed by
the 64-bit seed; independent sub-streams for A, B and T are spawned from a
SeedSequence so that the three matrices do not depend on each other's sizes.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from hkcheck.cmatrix import spectral_norm, to_json

CLASSES = ("HermitianDiag", "NormalSector", "SimilarityPerturbed", "JordanBlock")


@dataclass(frozen=True)
class InstanceSpec:
    seed: int
    cls: str = "HermitianDiag"
    dims: tuple = (4, 4)
    spectrum: tuple = (0.5, 10.0)
    cond_target: float = 10.0
    sector_angle: float = math.pi / 4
    norm_t: float = 1.0

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"unknown instance class {self.cls!r}")
        lo, hi = self.spectrum
        if not 0 < lo <= hi:
            raise ValueError("spectrum bounds must satisfy 0 < lo <= hi")
        if min(self.dims) < 1:
            raise ValueError("dimensions must be >= 1")
        if self.cond_target < 1:
            raise ValueError("cond_target must be >= 1")
        if not 0 <= self.sector_angle < math.pi / 2:
            raise ValueError("sector_angle must lie in [0, pi/2)")
        if not self.norm_t > 0:
            raise ValueError("norm_t must be positive")

    def to_json(self):
        d = asdict(self)
        d["class"] = d.pop("cls")
        d["dims"] = list(self.dims)
        d["spectrum"] = list(self.spectrum)
        return d

    @classmethod
    def from_json(cls, obj):
        obj = dict(obj)
        obj["cls"] = obj.pop("class")
        obj["dims"] = tuple(obj["dims"])
        obj["spectrum"] = tuple(obj["spectrum"])
        return cls(**obj)


def _rng(seed, stream):
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1)).spawn(3)[stream]
    return np.random.Generator(np.random.Philox(ss))


def _complex_gauss(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng, n):
    q, r = np.linalg.qr(_complex_gauss(rng, (n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def _spectrum_json(d):
    return [[float(z.real), float(z.imag)] for z in d]


def gen_operator(spec, which=0):
    """Operator of size ``spec.dims[which]`` with its structure metadata.

    `which` = 0 builds A, 1 builds B; each uses its own sub-stream.
    """
    n = spec.dims[which]
    rng = _rng(spec.seed, which)
    lo, hi = spec.spectrum
    cls = spec.cls
    if cls == "JordanBlock":
        lam = float(rng.uniform(lo, hi))
        a = lam * np.eye(n, dtype=np.complex128) + np.eye(n, k=1, dtype=np.complex128)
        return a, {"class": cls, "lambda": lam, "nilpotent_norm": 1.0 if n > 1 else 0.0}
    d = rng.uniform(lo, hi, n).astype(np.complex128)
    if cls == "HermitianDiag":
        return np.diag(d), {"class": cls, "spectrum": _spectrum_json(d), "similarity": None}
    if cls == "NormalSector":
        d = d * np.exp(1j * rng.uniform(-spec.sector_angle, spec.sector_angle, n))
        u = random_unitary(rng, n)
        a = (u * d) @ u.conj().T
        return a, {"class": cls, "spectrum": _spectrum_json(d), "similarity": to_json(u)}
    # SimilarityPerturbed: S = U1 diag(1 .. c) U2 has cond_2(S) = c exactly
    u1, u2 = random_unitary(rng, n), random_unitary(rng, n)
    sigma = np.geomspace(1.0, spec.cond_target, n)
    s = (u1 * sigma) @ u2
    a = np.ascontiguousarray(np.linalg.solve(s.T, (s * d).T).T)
    return a, {"class": cls, "spectrum": _spectrum_json(d), "similarity": to_json(s)}


def gen_t(seed, n2, n1, norm_target=1.0):
    """Random complex ``n2 x n1`` matrix rescaled to spectral norm `norm_target`."""
    if not norm_target > 0:
        raise ValueError("norm_target must be positive")
    t = _complex_gauss(_rng(seed, 2), (n2, n1))
    return t * (norm_target / spectral_norm(t))


def gen_bundle(spec):
    """``{spec, A, B, T, structure: {A, B}}`` with matrices as ndarrays."""
    a, sa = gen_operator(spec, 0)
    b, sb = gen_operator(spec, 1)
    t = gen_t(spec.seed, spec.dims[1], spec.dims[0], spec.norm_t)
    return {"spec": spec, "A": a, "B": b, "T": t, "structure": {"A": sa, "B": sb}}


def bundle_to_json(bundle):
    out = {k: to_json(bundle[k]) for k in ("A", "B", "T")}
    out["structure"] = bundle.get("structure") or {}
    if bundle.get("spec") is not None:
        out["spec"] = bundle["spec"].to_json()
    return out


def corpus(per_class=50, max_dim=16, classes=CLASSES, seed0=0):
    """Deterministic list of specs cycling through sizes 2 .. max_dim."""
    specs = []
    span = max_dim - 1
    for cls in classes:
        for i in range(per_class):
            n1 = 2 + (i % span)
            n2 = 2 + ((7 * i + 3) % span)
            specs.append(InstanceSpec(seed=seed0 + i, cls=cls, dims=(n1, n2)))
    return specs
