"""Acceptance criteria, one PASS/FAIL line per check.

Run with ``pytest tests/test_acceptance.py -s`` or directly as a script.
Checks that are known not to hold are marked xfail(strict=True): they print
FAIL and the suite stays green only while they keep failing.
"""

from __future__ import annotations

import functools
import io
import sys

import numpy as np
import pytest

from platelab import EigenModel
from platelab.cli import run
from platelab.evolution import dyadic_times, fit_decay, simulate_decay, smoothed_random_state, worst_case_decay
from platelab.inequalities import lemma_ratio_scan
from platelab.resolvent import block_norms, dense_oracle_norm
from platelab.scaling import UNCLASSIFIED, classify_regularity, scan_and_verify
from platelab.csvout import read_body
from platelab.verify import run_all
from platelab.witness import geometric_indices, increases_over_last_half, ratio_test, sharpness_wall, witness_points

SQ = EigenModel.power_law()


@functools.lru_cache(maxsize=None)
def scan(sigma, omega):
    return scan_and_verify(SQ, sigma, omega)


def c1():
    r = scan(1.0, 0.0)
    ok = 0.95 <= r.phi_est <= 1.05 and r.fit.r_squared >= 0.98
    return ok, f"phi_est {r.phi_est:.4f} in [0.95, 1.05], r2 {r.fit.r_squared:.4f} >= 0.98"


def c2(sigma):
    def check():
        r = scan(sigma, 1.0)
        return 0.95 <= r.phi_est <= 1.05, f"phi_est {r.phi_est:.4f} in [0.95, 1.05]"
    return check


def c3():
    r = scan(0.75, 0.0)
    return 0.4 <= r.phi_est <= 0.6, f"phi_est {r.phi_est:.4f} in [0.4, 0.6] (theory 0.5)"


def c4():
    r = scan(1.1, 1.0)
    return 0.3 <= r.phi_est <= 0.5, f"phi_est {r.phi_est:.4f} in [0.3, 0.5] (theory 0.4)"


def c5():
    cases = [(s, 0.0) for s in (0.5, 0.75, 1.0, 1.25, 1.5)] + [(s, 1.0) for s in (1.0, 1.25, 1.5)]
    bad = []
    ratios = []
    for s, w in cases:
        r = scan(s, w)
        lam = np.array([x.lam for x in r.samples])
        nrm = np.array([x.norm for x in r.samples])
        top = nrm[lam >= lam.max() / 4 * (1 - 1e-12)].max()
        rest = nrm[lam < lam.max() / 4 * (1 - 1e-12)].max()
        ratios.append(top / rest)
        if not r.bounded:
            bad.append((s, w))
    detail = f"top-two-octave max / earlier max <= {max(ratios):.4f} (limit 1.1) over {len(cases)} cases"
    if bad:
        detail += f"; unbounded at {bad}"
    return not bad, detail


def c6_growth():
    r = scan(0.25, 0.0)
    return 0.4 <= r.growth_exponent <= 0.6, f"growth exponent {r.growth_exponent:.4f} in [0.4, 0.6] (theory 0.5)"


def c6_decay():
    times = dyadic_times()
    curve = worst_case_decay(SQ, 0.25, 0.0, 10_000, times)
    p = fit_decay(curve, "polynomial")
    single = fit_decay(simulate_decay(SQ, 0.25, 0.0, smoothed_random_state(SQ, 10_000, 0.0), times), "polynomial")
    detail = (f"sup over smoothed data of ||U(t)||: exponent {p:.4f} in [1.6, 2.4]; "
              f"one random smoothed datum (info): {single:.3f}")
    return abs(p - 2.0) <= 0.4, detail


def c7_omega():
    rt = ratio_test(witness_points(1.1, 1.0, geometric_indices(), SQ))
    return rt.converged, f"omega=1 sigma=1.1 spread {rt.max_rel_spread:.2e} <= 0.05"


def c7_zero():
    rt = ratio_test(witness_points(0.75, 0.0, geometric_indices(), SQ))
    return rt.converged, f"omega=0 sigma=0.75 spread {rt.max_rel_spread:.2e} <= 0.05"


def c8():
    wall = sharpness_wall(witness_points(0.75, 0.0, geometric_indices(), SQ), phi=0.5, delta=0.2)
    half = wall[len(wall) // 2:]
    return increases_over_last_half(wall), f"last half {half[0]:.4g} -> {half[-1]:.4g}, strictly increasing"


def c9():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(50):
        sigma = rng.uniform(0, 1.5)
        omega = rng.uniform(0, 2) if rng.random() < 0.7 else 0.0
        lam = float(rng.choice([-1, 1]) * 10.0 ** rng.uniform(-1, 3))
        dense = dense_oracle_norm(SQ, lam, sigma, omega, 8)
        blocks = block_norms(SQ.eigenvalues(np.arange(1, 9)), lam, sigma, omega).max()
        worst = max(worst, abs(dense - blocks) / blocks)
    return worst <= 1e-10, f"max rel err {worst:.2e} <= 1e-10 over 50 draws, N=8"


@functools.lru_cache(maxsize=None)
def suites():
    return run_all(draws=10_000, seed=0)


def c10():
    res = suites()
    return all(r.passed for r in res), "; ".join(r.line() for r in res)


def c11(item, omega, sigmas):
    def check():
        reps = [lemma_ratio_scan(item, SQ, s, omega) for s in sigmas]
        ok = all(r.bounded_verdict for r in reps)
        parts = ", ".join(f"sigma={s:g}: sup {r.sup_ratio:.3g}{'' if r.bounded_verdict else ' (grows)'}"
                          for s, r in zip(sigmas, reps))
        return ok, f"{item} omega={omega:g}: {parts}"
    return check


def c12():
    out, err = io.StringIO(), io.StringIO()
    code = run(["region-map", "--omega", "0", "--sigma-grid", "1.1:1.4:0.1"], out, err)
    rows = [line.split(",") for line in read_body(out.getvalue())[1:]]
    sharp = [classify_regularity(float(r[0]), 0.0).sharp for r in rows]
    ok = code == 0 and not any(sharp) and all(r[-1] == UNCLASSIFIED for r in rows)
    finding = ", ".join(f"sigma={float(r[0]):.1f}: {float(r[4]):.3f} vs 1/sigma {1 / float(r[0]):.3f}" for r in rows)
    return ok, f"exit {code}, sharp=false; phi_est {finding}"


VIII = "lemma item measured unbounded on exact resonances"
CHECKS = [
    ("1", "analyticity omega=0 sigma=1", c1, None),
    ("2a", "analyticity omega=1 sigma=1.25", c2(1.25), None),
    ("2b", "analyticity omega=1 sigma=1.4", c2(1.4), None),
    ("2c", "analyticity omega=1 sigma=1.5", c2(1.5), None),
    ("3", "sharp gevrey omega=0 sigma=0.75", c3, None),
    ("4", "sharp gevrey omega=1 sigma=1.1", c4, None),
    ("5", "exponential-stability bands", c5, None),
    ("6a", "resolvent growth omega=0 sigma=0.25", c6_growth, None),
    ("6b", "polynomial time decay omega=0 sigma=0.25", c6_decay, None),
    ("7a", "witness ratio convergence omega=1", c7_omega, None),
    ("7b", "witness ratio convergence omega=0", c7_zero, None),
    ("8", "sharpness wall omega=0 sigma=0.75 delta=0.2", c8, None),
    ("9", "dense oracle equivalence", c9, None),
    ("10", "identity suites", c10, None),
    ("11a", "lemma base identity", c11("base", 0.0, (0.25, 1.0)), None),
    ("11b", "lemma base identity omega>0", c11("base", 1.0, (0.75, 1.2)), None),
    ("11c", "lemma L3.4-iii", c11("L3.4-iii", 0.0, (0.0, 0.5, 1.0, 1.5)), None),
    ("11d", "lemma L3.4-v on [1/2, 3/2]", c11("L3.4-v", 0.0, (0.5, 0.75, 1.0, 1.25, 1.5)), None),
    ("11e", "lemma L3.4-v below 1/2", c11("L3.4-v", 0.0, (0.0, 0.25)), VIII),
    ("11f", "lemma L3.4-viii on [1/2, 11/8]", c11("L3.4-viii", 0.0, (0.5, 0.75, 1.0, 1.25, 1.375)), VIII),
    ("11g", "lemma L3.6-i", c11("L3.6-i", 1.0, (0.0, 0.5, 1.0, 1.2, 1.5)), None),
    ("11h", "lemma L3.6-iv", c11("L3.6-iv", 1.0, (0.0, 0.5, 1.0, 1.2, 1.5)), None),
    ("12", "finding omega=0 sigma in (1, 3/2)", c12, None),
]


def line(cid, label, ok, detail) -> str:
    return f"{'PASS' if ok else 'FAIL'} [{cid}] {label}: {detail}"


PARAMS = [
    pytest.param(cid, label, fn, id=cid, marks=[pytest.mark.xfail(strict=True, reason=known)] if known else [])
    for cid, label, fn, known in CHECKS
]


@pytest.mark.parametrize("cid, label, fn", PARAMS)
def test_criterion(cid, label, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + line(cid, label, ok, detail))
    assert ok, detail


def main() -> int:
    unexpected = 0
    for cid, label, fn, known in CHECKS:
        ok, detail = fn()
        print(line(cid, label, ok, detail), flush=True)
        if ok == bool(known):
            unexpected += 1
    return 1 if unexpected else 0


if __name__ == "__main__":
    sys.exit(main())
