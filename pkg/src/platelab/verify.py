"""Randomised invariant suites behind the ``verify`` subcommand."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from platelab.evolution import ModalPropagator, Propagator, propagate_block, random_state
from platelab.inequalities import interpolation_check, resolvent_identity_check
from platelab.modal import dissipation_rate, generator_block, weighted_inner
from platelab.resolvent import block_norms, dense_oracle_norm, resolvent_norm
from platelab.spectrum import EigenModel, frac_power_coeff, resonant_mode


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    limit: float
    cases: int

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst {self.worst:.3e} (limit {self.limit:.0e}, {self.cases} cases)"


def _cvec(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _eta(rng):
    return float(10.0 ** rng.uniform(-2, 4))


def dissipation_suite(draws: int, rng) -> SuiteResult:
    worst = 0.0
    for _ in range(draws):
        b = generator_block(_eta(rng), rng.uniform(-1, 1.5), float(rng.choice([0.0, 0.5, 1.0])))
        x = _cvec(rng, 3)
        err = abs(dissipation_rate(b, x) + b.eta * abs(x[2]) ** 2)
        worst = max(worst, err / (1 + weighted_inner(b, x, x).real))
    return SuiteResult("dissipation identity", worst <= 1e-12, worst, 1e-12, draws)


def resolvent_identity_suite(draws: int, rng, model: EigenModel) -> SuiteResult:
    worst = 0.0
    for _ in range(draws):
        sigma = rng.uniform(0, 1.5)
        omega = float(rng.choice([0.0, 0.5, 1.0]))
        lam = float(rng.choice([-1, 1]) * 10.0 ** rng.uniform(-1, 6))
        res = resolvent_identity_check(model, sigma, omega, lam, trials=1, seed=int(rng.integers(2**31)), n_modes=4)
        worst = max(worst, res)
    return SuiteResult("resolvent identity", worst <= 1e-10, worst, 1e-10, draws)


def interpolation_suite(draws: int, rng) -> SuiteResult:
    failures = 0
    worst = 0.0
    for _ in range(draws):
        n = int(rng.integers(1, 12))
        eta = np.sort(10.0 ** rng.uniform(-2, 4, n))
        u = _cvec(rng, n) * (rng.random(n) < 0.8)
        a, b, c = np.sort(rng.uniform(-2, 2, 3))
        if not a < b < c:
            continue
        r = interpolation_check(u, eta, a, b, c)
        if not r.holds:
            failures += 1
        if r.rhs > 0:
            worst = max(worst, r.lhs / r.rhs - 1.0)
    return SuiteResult("interpolation L=1", failures == 0, max(worst, 0.0), 1e-12, draws)


def decoupling_suite(draws: int, rng, model: EigenModel, N: int = 8) -> SuiteResult:
    worst = 0.0
    for _ in range(draws):
        sigma = rng.uniform(0, 1.5)
        omega = float(rng.uniform(0, 2)) if rng.random() < 0.7 else 0.0
        lam = float(rng.choice([-1, 1]) * 10.0 ** rng.uniform(-1, 3))
        dense = dense_oracle_norm(model, lam, sigma, omega, N)
        blocks = float(block_norms(model.eigenvalues(np.arange(1, N + 1)), lam, sigma, omega).max())
        worst = max(worst, abs(dense - blocks) / blocks)
    return SuiteResult("dense oracle vs block sup", worst <= 1e-10, worst, 1e-10, draws)


def symmetry_suite(draws: int, rng, model: EigenModel) -> SuiteResult:
    worst = 0.0
    for _ in range(draws):
        sigma = rng.uniform(0, 1.5)
        omega = float(rng.choice([0.0, 1.0]))
        lam = float(10.0 ** rng.uniform(0, 6))
        a = resolvent_norm(model, lam, sigma, omega).norm
        b = resolvent_norm(model, -lam, sigma, omega).norm
        worst = max(worst, abs(a - b) / a)
    return SuiteResult("resolvent symmetry in lambda", worst <= 1e-12, worst, 1e-12, draws)


def propagator_suite(draws: int, rng) -> SuiteResult:
    """Identity at t=0, semigroup law and contraction on random blocks."""
    worst = 0.0
    for _ in range(draws):
        b = generator_block(float(10.0 ** rng.uniform(-1, 2)), rng.uniform(0, 1.5), float(rng.choice([0.0, 1.0])))
        p = Propagator.from_block(b)
        x0 = _cvec(rng, 3)
        n0 = b.norm(x0)
        t, s = rng.uniform(0, 10, 2)
        e0 = np.max(np.abs(propagate_block(p, x0, 0.0) - x0)) / np.max(np.abs(x0))
        lhs = propagate_block(p, x0, t + s)
        rhs = propagate_block(p, propagate_block(p, x0, t), s)
        e1 = b.norm(lhs - rhs) / n0
        grow = max(0.0, b.norm(propagate_block(p, x0, t)) - n0) / n0
        worst = max(worst, e0, e1, grow)
    return SuiteResult("propagator identity/semigroup/contraction", worst <= 1e-10, worst, 1e-10, draws)


def monotone_energy_suite(draws: int, rng, model: EigenModel) -> SuiteResult:
    worst = 0.0
    times = np.concatenate([[0.0], 2.0 ** np.arange(-4, 8, 0.5)])
    for _ in range(draws):
        sigma = rng.uniform(0, 1.5)
        omega = float(rng.choice([0.0, 1.0]))
        state = random_state(model, 16, omega, seed=int(rng.integers(2**31)))
        prop = ModalPropagator(model, sigma, omega, 16)
        y0 = state.scaled(omega)
        norms = [np.linalg.norm(prop.evolve_scaled(y0, t)) for t in times]
        worst = max(worst, float(np.max(np.diff(norms), initial=0.0)))
    return SuiteResult("monotone energy", worst <= 1e-12, worst, 1e-12, draws)


def spectrum_suite(draws: int, rng) -> SuiteResult:
    worst = 0.0
    bad = 0
    for _ in range(draws):
        eta = float(10.0 ** rng.uniform(-3, 6))
        r1, r2 = rng.uniform(-2, 2, 2)
        prod = frac_power_coeff(eta, r1) * frac_power_coeff(eta, r2)
        worst = max(worst, abs(frac_power_coeff(eta, r1 + r2) - prod) / prod)
    for _ in range(20):
        model = EigenModel.power_law(float(rng.uniform(0.5, 2)), float(rng.uniform(0.5, 3)))
        omega = float(rng.choice([0.0, 1.0]))
        lam = float(10.0 ** rng.uniform(-1, 2.5))
        ns = np.arange(1, 2001)
        eta = model.eigenvalues(ns)
        mis = np.abs(lam * lam * (1 + omega * eta) - eta * eta)
        if resonant_mode(model, lam, omega, n_max=2000) != int(ns[np.argmin(mis)]):
            bad += 1
        if np.any(np.diff(eta) < 0):
            bad += 1
    return SuiteResult("spectrum powers/monotonicity/resonant mode", worst <= 1e-12 and bad == 0, worst, 1e-12, draws)


def block_spectrum_suite(draws: int, rng) -> SuiteResult:
    """Block eigenvalues (characteristic polynomial roots) lie in Re <= 0."""
    worst = -np.inf
    for _ in range(draws):
        b = generator_block(_eta(rng), rng.uniform(-1, 1.5), float(rng.choice([0.0, 0.5, 1.0])))
        roots = np.roots(np.poly(b.scaled()))
        worst = max(worst, float(np.max(roots.real) / max(1.0, np.max(np.abs(roots)))))
    return SuiteResult("block eigenvalues in closed left half-plane", worst <= 1e-10, worst, 1e-10, draws)


def run_all(draws: int = 10_000, seed: int = 0, model: EigenModel = None) -> List[SuiteResult]:
    model = model or EigenModel.power_law()
    root = np.random.SeedSequence(seed)
    suites: list[Callable] = [
        lambda r: dissipation_suite(draws, r),
        lambda r: resolvent_identity_suite(draws, r, model),
        lambda r: interpolation_suite(draws, r),
        lambda r: decoupling_suite(50, r, model),
        lambda r: symmetry_suite(20, r, model),
        lambda r: propagator_suite(min(draws, 2000), r),
        lambda r: monotone_energy_suite(20, r, model),
        lambda r: spectrum_suite(draws, r),
        lambda r: block_spectrum_suite(min(draws, 2000), r),
    ]
    return [suite(np.random.default_rng(ss)) for suite, ss in zip(suites, root.spawn(len(suites)))]
