"""Explicit lower-bound sequences for the resolvent at resonant frequencies.

With U_n = (mu e_n, i lambda mu e_n, nu e_n) the resolvent system collapses to a
2x2 linear system in (mu, nu). That system is solved exactly here; the
asymptotic size of |mu| is only checked after the fact by ``ratio_test``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from platelab.errors import PlateLabError, RangeError, TooFewSamplesError
from platelab.spectrum import EigenModel, frac_power_coeff

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class WitnessPoint:
    n: int
    eta: float
    lam: float
    mu: complex
    nu: complex
    u_norm_lower: float
    f_norm: float
    predicted_exponent: float
    residual: float = 0.0

    @property
    def lower_bound(self) -> float:
        """Lower bound on the resolvent norm at ``lam``."""
        return self.u_norm_lower / self.f_norm


@dataclass(frozen=True)
class RatioTest:
    ratios: tuple
    max_rel_spread: float
    converged: bool


def _check_sigma(sigma):
    if not -1e-12 <= sigma <= 1.5 + 1e-12:
        raise RangeError(f"sigma={sigma} outside [0, 3/2]")


def _solve2(A: np.ndarray, b: np.ndarray):
    """Cramer's rule on a 2x2 complex system with a relative residual check."""
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if det == 0:
        raise PlateLabError("witness system is singular")
    x = np.array([b[0] * A[1, 1] - A[0, 1] * b[1], A[0, 0] * b[1] - b[0] * A[1, 0]]) / det
    scale = np.abs(A) @ np.abs(x) + np.abs(b)
    res = float(np.max(np.abs(A @ x - b) / np.where(scale > 0, scale, 1.0)))
    if res > RESIDUAL_TOL:
        raise PlateLabError(f"witness solve residual {res:.2e} exceeds {RESIDUAL_TOL:g}")
    return complex(x[0]), complex(x[1]), res


def witness_zero(sigma: float, n: int, model: EigenModel) -> WitnessPoint:
    """Plate without rotational inertia: F = (0, -e_n/2, e_n/2) at lambda = eta_n."""
    _check_sigma(sigma)
    eta = model.eigenvalue(n)
    lam = eta
    c = frac_power_coeff(eta, sigma)
    A = np.array([[lam * lam - eta * eta, c], [1j * lam * c, 1j * lam + eta]], dtype=complex)
    mu, nu, res = _solve2(A, np.array([0.5, 0.5], dtype=complex))
    return WitnessPoint(
        n=int(n),
        eta=eta,
        lam=lam,
        mu=mu,
        nu=nu,
        u_norm_lower=lam * abs(mu),
        f_norm=math.sqrt(0.5),
        predicted_exponent=1 - 2 * sigma if sigma <= 1 else -sigma,
        residual=res,
    )


def witness_omega(sigma: float, omega: float, n: int, model: EigenModel) -> WitnessPoint:
    """Rotational inertia case: F = (0, -e_n, 0) with ||e_n||_{H^1} = 1."""
    _check_sigma(sigma)
    if not omega > 0:
        raise RangeError("witness_omega needs omega > 0")
    eta = model.eigenvalue(n)
    inertia = 1 + omega * eta
    lam = eta / math.sqrt(inertia)
    c = frac_power_coeff(eta, sigma)
    A = np.array([[lam * lam * inertia - eta * eta, c], [1j * lam * c, 1j * lam + eta]], dtype=complex)
    mu, nu, res = _solve2(A, np.array([inertia, 0.0], dtype=complex))
    return WitnessPoint(
        n=int(n),
        eta=eta,
        lam=lam,
        mu=mu,
        nu=nu,
        u_norm_lower=lam * abs(mu),
        f_norm=1.0,
        predicted_exponent=4 - 4 * sigma,
        residual=res,
    )


def witness_points(sigma: float, omega: float, ns: Sequence[int], model: EigenModel) -> list:
    if omega == 0:
        return [witness_zero(sigma, n, model) for n in ns]
    return [witness_omega(sigma, omega, n, model) for n in ns]


def geometric_indices(n_min: int = 20, n_max: int = 160, per_octave: int = 4) -> list:
    octaves = math.log2(n_max / n_min)
    k = np.arange(int(round(octaves * per_octave)) + 1)
    return sorted(set(int(v) for v in np.rint(n_min * 2.0 ** (k / per_octave))))


def ratio_test(points: Sequence[WitnessPoint], spread_tol: float = 0.05) -> RatioTest:
    if len(points) < 4:
        raise TooFewSamplesError("ratio_test needs at least 4 points")
    ns = [p.n for p in points]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("witness points must have increasing n")
    r = np.array([p.u_norm_lower / p.lam**p.predicted_exponent for p in points])
    tail = r[len(r) // 2:]
    spread = float((tail.max() - tail.min()) / tail.mean())
    return RatioTest(ratios=tuple(float(x) for x in r), max_rel_spread=spread, converged=spread <= spread_tol)


def sharpness_wall(points: Sequence[WitnessPoint], phi: float, delta: float = 0.2) -> np.ndarray:
    """|lambda_n|^(phi + delta) * lower bound; unbounded growth rules out exponent phi + delta."""
    return np.array([p.lam ** (phi + delta) * p.lower_bound for p in points])


def increases_over_last_half(values) -> bool:
    v = np.asarray(values, dtype=float)
    tail = v[len(v) // 2:]
    return bool(np.all(np.diff(tail) > 0))
