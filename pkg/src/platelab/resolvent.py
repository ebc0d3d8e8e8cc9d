"""Resolvent norms ||(i lambda - A_omega)^{-1}|| on the phase space.

The generator is block diagonal in the eigenbasis, so the operator norm is the
supremum over modes of the 3x3 block norms. ``resolvent_norm`` searches the
mode index for that supremum; ``dense_oracle_norm`` assembles a small
truncation as one dense matrix and is used only as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from platelab.errors import PlateLabError
from platelab.linalg import (
    gauss_inverse,
    inverse_small,
    largest_singular_value,
    power_sigma_max,
    solve_small,
)
from platelab.modal import ModeBlock, scaled_generators
from platelab.spectrum import EigenModel, frac_power_coeff, resonance_eta, resonant_mode


@dataclass(frozen=True)
class SearchParams:
    rho: float = 64.0
    n_max: int = 10**6
    neighbors: int = 64
    window_points: int = 257
    # brackets at most this wide are scanned mode by mode during refinement
    exhaustive_span: int = 2048
    identity_tol: float = 1e-10
    probe_seed: int = 0


@dataclass(frozen=True)
class ResolventSample:
    lam: float
    norm: float
    argmax_mode: int
    modes_scanned: int
    identity_residual: float


def shifted_blocks(eta, lam: float, sigma: float, omega: float) -> np.ndarray:
    """Batch of D (i lam - M) D^{-1}."""
    return 1j * lam * np.eye(3) - scaled_generators(eta, sigma, omega)


def block_norms(eta, lam: float, sigma: float, omega: float) -> np.ndarray:
    """Weighted norm of the block resolvent for every eigenvalue in ``eta``."""
    R = inverse_small(shifted_blocks(eta, lam, sigma, omega))
    return largest_singular_value(R)


def solve_block(block: ModeBlock, lam: float, f) -> np.ndarray:
    """Solve (i lam - M) x = f for one mode, in raw coefficients."""
    f = np.asarray(f, dtype=complex)
    D = block.D
    lhs = 1j * lam * np.eye(3) - block.scaled()
    return solve_small(lhs, D * f) / D


def block_resolvent_norm(block: ModeBlock, lam: float) -> float:
    return float(block_norms(np.array([block.eta]), lam, block.sigma, block.omega)[0])


def _dyadic(limit: int) -> list:
    out = []
    n = 1
    while n <= limit:
        out.append(n)
        n *= 2
    return out


def _candidate_modes(model: EigenModel, lam: float, omega: float, search: SearchParams) -> np.ndarray:
    top = model.max_index
    cands = set(_dyadic(min(search.n_max, top)))
    if top <= min(search.n_max, 64):
        cands |= set(range(1, top + 1))
    if lam != 0:
        nr = resonant_mode(model, lam, omega)
        lo_n = max(1, nr - search.neighbors)
        hi_n = min(top, nr + search.neighbors)
        cands |= set(range(lo_n, hi_n + 1))
        root = resonance_eta(abs(lam), omega)
        w_lo = model.first_index_at_least(root / search.rho)
        w_hi = min(top, model.first_index_at_least(root * search.rho))
        if w_hi > w_lo:
            grid = np.geomspace(w_lo, w_hi, search.window_points)
            cands |= set(int(v) for v in np.unique(np.rint(grid)))
        cands.add(w_lo)
        cands.add(w_hi)
    return np.array(sorted(c for c in cands if 1 <= c <= top), dtype=np.int64)


def _refine(model, lam, sigma, omega, lo, hi, best_n, best_v, search, seen):
    """Narrow the bracket [lo, hi] around the current best mode."""
    while True:
        if hi - lo <= search.exhaustive_span:
            ns = np.arange(lo, hi + 1, dtype=np.int64)
        else:
            grid = np.geomspace(lo, hi, search.window_points)
            ns = np.unique(np.concatenate([np.rint(grid).astype(np.int64), [lo, best_n, hi]]))
        vals = block_norms(model.eigenvalues(ns), lam, sigma, omega)
        seen.update(ns.tolist())
        i = int(np.argmax(vals))
        if vals[i] > best_v or (vals[i] == best_v and ns[i] < best_n):
            best_n, best_v = int(ns[i]), float(vals[i])
        if hi - lo <= search.exhaustive_span:
            return best_n, best_v
        j = int(np.searchsorted(ns, best_n))
        new_lo = int(ns[max(j - 1, 0)])
        new_hi = int(ns[min(j + 1, len(ns) - 1)])
        if (new_lo, new_hi) == (lo, hi):
            return best_n, best_v
        lo, hi = new_lo, new_hi


def identity_residuals(eta, lam: float, sigma: float, omega: float, seed: int = 0) -> np.ndarray:
    """|eta |theta|^2 - Re<F, U>_W| / (||F|| ||U||) for one random probe per mode."""
    eta = np.asarray(eta, dtype=float)
    rng = np.random.default_rng(seed)
    F = rng.standard_normal(eta.shape + (3,)) + 1j * rng.standard_normal(eta.shape + (3,))
    U = solve_small(shifted_blocks(eta, lam, sigma, omega), F)
    # scaled coordinates: the theta slot has weight one
    lhs = eta * np.abs(U[..., 2]) ** 2
    rhs = np.real(np.sum(F * np.conj(U), axis=-1))
    denom = np.linalg.norm(F, axis=-1) * np.linalg.norm(U, axis=-1)
    return np.abs(lhs - rhs) / denom


def resolvent_norm(
    model: EigenModel,
    lam: float,
    sigma: float,
    omega: float,
    search: Optional[SearchParams] = None,
) -> ResolventSample:
    search = search or SearchParams()
    lam = float(lam)
    cands = _candidate_modes(model, lam, omega, search)
    if cands.size == 0:
        raise PlateLabError("empty mode scan window")
    vals = block_norms(model.eigenvalues(cands), lam, sigma, omega)
    seen = set(cands.tolist())
    i = int(np.argmax(vals))
    lo = int(cands[max(i - 1, 0)])
    hi = int(cands[min(i + 1, len(cands) - 1)])
    best_n, best_v = _refine(model, lam, sigma, omega, lo, hi, int(cands[i]), float(vals[i]), search, seen)

    scanned = np.array(sorted(seen), dtype=np.int64)
    res = identity_residuals(model.eigenvalues(scanned), lam, sigma, omega, seed=search.probe_seed)
    return ResolventSample(
        lam=lam,
        norm=best_v,
        argmax_mode=best_n,
        modes_scanned=len(scanned),
        identity_residual=float(res.max()),
    )


def assemble_dense(model: EigenModel, lam: float, sigma: float, omega: float, N: int) -> np.ndarray:
    """Weighted matrix of (i lam - A_omega) on the first N modes.

    Unknowns are ordered component-major, (u_1..u_N, v_1..v_N, theta_1..theta_N),
    so the operator is a 3x3 array of diagonal N x N blocks rather than the
    mode-major block diagonal used elsewhere.
    """
    eta = model.eigenvalues(np.arange(1, N + 1))
    inertia = 1.0 + omega * eta
    coupling = frac_power_coeff(eta, sigma)
    Z = np.zeros((N, N))
    I = np.eye(N)
    gen = np.block(
        [
            [Z, I, Z],
            [np.diag(-eta**2 / inertia), Z, np.diag(coupling / inertia)],
            [Z, np.diag(-coupling), np.diag(-eta)],
        ]
    ).astype(complex)
    op = 1j * lam * np.eye(3 * N) - gen
    w = np.sqrt(np.concatenate([eta**2, inertia, np.ones(N)]))
    return (w[:, None] * op) / w[None, :]


def dense_oracle_norm(model: EigenModel, lam: float, sigma: float, omega: float, N: int) -> float:
    if not 1 <= N <= 64:
        raise ValueError("dense oracle is limited to 1 <= N <= 64")
    K = assemble_dense(model, lam, sigma, omega, N)
    return power_sigma_max(gauss_inverse(K), tol=1e-12)
