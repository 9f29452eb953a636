"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also collected in the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np

from hkcheck import defaults
from hkcheck.bip import BipCertificate, Provenance
from hkcheck.gen import InstanceSpec, corpus, gen_bundle, gen_operator
from hkcheck.heinzkato import (
    bound_thm1, bound_thm2, bound_thm3, build_instance, check_inequality, three_lines_trace,
)
from hkcheck.powers import (
    balakrishnan_neg_power, dunford_power, extended_power_q, imaginary_power, oracle_power,
)
from hkcheck.sectorial import certify_invertible_sectorial, verify_region_bound

from conftest import record_acceptance


def rel(x, y):
    return np.linalg.norm(x - y, 2) / np.linalg.norm(y, 2)


def normal_sector_8():
    return [gen_operator(InstanceSpec(seed, "NormalSector", (8, 8)))[0] for seed in range(20)]


def test_criterion_01_oracle_agreement():
    a = np.diag(np.arange(1.0, 11.0))
    worst_err, worst_time = 0.0, 0.0
    for alpha in (0.1, 0.3, 0.5, 0.7, 0.9):
        t0 = time.perf_counter()
        res = balakrishnan_neg_power(a, alpha)
        worst_time = max(worst_time, time.perf_counter() - t0)
        worst_err = max(worst_err, rel(res.value, oracle_power(a, -alpha).value))
    ok = worst_err <= 1e-6 and worst_time < 1.0
    record_acceptance(1, "Balakrishnan vs oracle on diag(1..10)", ok,
                      f"max rel err {worst_err:.2e}, max time {worst_time:.3f} s")
    assert ok


def test_criterion_02_route_agreement():
    worst_abs, within_est = 0.0, True
    for a in normal_sector_8():
        cert = certify_invertible_sectorial(a)
        d = dunford_power(a, -0.5, cert)
        b = balakrishnan_neg_power(a, 0.5, cert=cert)
        diff = np.linalg.norm(d.value - b.value, 2)
        worst_abs = max(worst_abs, diff)
        within_est &= diff <= d.error_estimate + b.error_estimate
    ok = within_est and worst_abs <= 1e-5
    record_acceptance(2, "Dunford vs Balakrishnan at -1/2, 20 NormalSector 8x8", ok,
                      f"max diff {worst_abs:.2e}, within estimates: {within_est}")
    assert ok


def test_criterion_03_semigroup():
    worst = 0.0
    for a in normal_sector_8():
        cert = certify_invertible_sectorial(a)
        p3 = balakrishnan_neg_power(a, 0.3, cert=cert).value
        p4 = balakrishnan_neg_power(a, 0.4, cert=cert).value
        p7 = balakrishnan_neg_power(a, 0.7, cert=cert).value
        worst = max(worst, rel(p3 @ p4, p7))
    ok = worst <= 1e-6
    record_acceptance(3, "semigroup A^-0.3 A^-0.4 = A^-0.7", ok, f"max rel defect {worst:.2e}")
    assert ok


def test_criterion_04_imaginary_powers():
    ts = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
    worst = 0.0
    for seed in range(10):
        cls = "SimilarityPerturbed" if seed % 2 else "NormalSector"
        a = gen_operator(InstanceSpec(seed, cls, (6, 6)))[0]
        cert = certify_invertible_sectorial(a)
        for t in ts:
            got = imaginary_power(a, t, cert=cert).value
            worst = max(worst, rel(got, oracle_power(a, 1j * t).value))
    unit_dev = 0.0
    for seed in range(10):
        a = gen_operator(InstanceSpec(seed, "HermitianDiag", (6, 6)))[0]
        cert = certify_invertible_sectorial(a)
        for t in ts:
            unit_dev = max(unit_dev, abs(np.linalg.norm(imaginary_power(a, t, cert=cert).value, 2) - 1))
    ok = worst <= 1e-4 and unit_dev <= 1e-6
    record_acceptance(4, "imaginary powers vs oracle; unit norm on positive normal", ok,
                      f"max rel err {worst:.2e}, max | ||A^it|| - 1 | {unit_dev:.2e}")
    assert ok


def test_criterion_05_extended_calculus():
    b = np.diag([1.0, 3.0])
    target = oracle_power(b, 0.5).value
    errs = [np.linalg.norm(extended_power_q(b, 0.5, 2, k).value - target, 2)
            for k in (10.0, 100.0, 1000.0)]
    decreasing = errs[0] > errs[1] > errs[2]
    ok = decreasing and errs[2] <= 1e-3
    record_acceptance(5, "regularized Q(1/2, 2, k) on diag(1,3) converging to B^1/2", ok,
                      "errors " + ", ".join(f"{e:.3e}" for e in errs)
                      + f"; decreasing: {decreasing}; k=1000 within 1e-3: {errs[2] <= 1e-3}")
    assert ok


def test_criterion_06_heinz_kato_thm2_thm3():
    t0 = time.perf_counter()
    bad2 = bad3 = rows = failed = 0
    specs = corpus(per_class=50, max_dim=16)
    for spec in specs:
        b = gen_bundle(spec)
        inst = build_instance(b["A"], b["B"], b["T"], b["structure"])
        rep = check_inequality(inst, defaults.A_GRID)
        for r in rep.rows:
            rows += 1
            failed += r.status != "ok"
            bad2 += r.pass2 is False
            bad3 += r.pass3 is False
    elapsed = time.perf_counter() - t0
    ok = len(specs) == 200 and len(defaults.A_GRID) == 19 and bad2 == bad3 == failed == 0 \
        and elapsed < 120
    record_acceptance(6, "Heinz-Kato with BIP constants on 200 generated instances", ok,
                      f"{rows} rows, violations thm2={bad2} thm3={bad3}, "
                      f"quadrature failures {failed}, {elapsed:.1f} s")
    assert ok


def test_criterion_07_heinz_kato_thm1():
    bad = 0
    for seed in range(50):
        b = gen_bundle(InstanceSpec(seed, "HermitianDiag", (2 + seed % 15, 2 + (7 * seed + 3) % 15)))
        inst = build_instance(b["A"], b["B"], b["T"], b["structure"])
        bad += sum(r.pass1 is not True for r in check_inequality(inst).rows)
    hd = lambda d: {"class": "HermitianDiag", "spectrum": [[x, 0.0] for x in d], "similarity": None}
    inst = build_instance(np.diag([1.0, 4.0]), np.diag([1.0, 9.0]), np.eye(2),
                          {"A": hd([1.0, 4.0]), "B": hd([1.0, 9.0])})
    row = check_inequality(inst, [0.5]).rows[0]
    # ||B T A^-1|| = max(1/1, 9/4) = 9/4, so the bound is (9/4)^(1/2) = 3/2 = lhs
    closed = abs(inst.M - 2.25) < 1e-15 and abs(row.lhs - 1.5) < 1e-14 \
        and abs(row.bound1 - math.sqrt(2.25)) < 1e-15 and row.pass1
    ok = bad == 0 and closed
    record_acceptance(7, "Hilbert-space bound on 50 HermitianDiag + closed-form row", ok,
                      f"violations {bad}; closed form lhs={row.lhs!r}, bound={row.bound1!r}")
    assert ok


def test_criterion_08_constant_formulas():
    unit = BipCertificate(1.0, 0.0, Provenance.ANALYTIC_NORMAL, math.inf)
    b2 = bound_thm2(unit, unit, 1.0, 1.0, 0.5)
    b3 = bound_thm3(unit, unit, 1.0, 1.0, 0.5)
    # direct: e^{(0+0)/4 + 2 max(a,1-a)^2} and e^{(0+0) sqrt(a(1-a))}, times M^a ||T||^(1-a)
    ok = abs(b2 - math.exp(0.5)) <= 1e-15 and abs(b3 - 1.0) <= 1e-15 \
        and abs(bound_thm1(1.0, 1.0, 0.5) - 1.0) <= 1e-15
    record_acceptance(8, "bound constants at unit BIP data", ok, f"thm2={b2!r}, thm3={b3!r}")
    assert ok


def test_criterion_09_three_lines():
    rng = np.random.default_rng(9)
    grid = np.linspace(-10.0, 10.0, 81)
    checks = fails = 0
    worst = 0.0
    for seed in range(10):
        cls = ("NormalSector", "SimilarityPerturbed")[seed % 2]
        b = gen_bundle(InstanceSpec(seed, cls, (4, 5)))
        inst = build_instance(b["A"], b["B"], b["T"], b["structure"])
        n1, n2 = inst.A.shape[0], inst.B.shape[0]
        for _ in range(50):
            u = rng.standard_normal(n1) + 1j * rng.standard_normal(n1)
            v = rng.standard_normal(n2) + 1j * rng.standard_normal(n2)
            for a in (0.25, 0.5, 0.75):
                rec = three_lines_trace(inst, a, u, v, grid)
                checks += 1
                fails += not rec.holds
                if rec.bound > 0:
                    worst = max(worst, rec.center / rec.bound)
    ok = fails == 0
    record_acceptance(9, "three-lines interpolation along the proof function", ok,
                      f"{checks} checks, {fails} failures, max center/bound {worst:.4f}")
    assert ok


def test_criterion_10_region_bound():
    worst = math.inf
    count = 0
    for spec in corpus(per_class=50, max_dim=16):
        for which in (0, 1):
            a = gen_operator(spec, which)[0]
            if np.linalg.svd(a, compute_uv=False)[-1] == 0.0:
                continue
            cert = certify_invertible_sectorial(a)
            margins = [m for _, m in verify_region_bound(a, cert, 100)]
            worst = min(worst, min(margins))
            count += 1
    ok = worst >= -1e-9
    record_acceptance(10, "resolvent bound 2K+1 on the region boundary", ok,
                      f"{count} certified operators x 100 samples, min margin {worst:.3e}")
    assert ok


def test_criterion_11_reproducibility():
    cmd = [sys.executable, "-m", "hkcheck", "heinz-kato", "--gen", "class=SimilarityPerturbed", "seed=42"]
    runs = [subprocess.run(cmd, capture_output=True) for _ in range(2)]
    ok = runs[0].stdout == runs[1].stdout and len(runs[0].stdout) > 0 \
        and runs[0].returncode == runs[1].returncode == 0
    record_acceptance(11, "byte-identical heinz-kato reports for a fixed seed", ok,
                      f"{len(runs[0].stdout)} bytes, exit {runs[0].returncode}")
    assert ok
