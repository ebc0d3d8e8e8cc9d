"""Interpolation inequality and empirical constants of the resolvent lemma estimates.

Every lemma item is written as N(U) <= C (E(U) + ||F|| ||U||), where N is the
left side and E collects any solution terms that appear on the right. A scan
over lambda records sup N / (E + ||F|| ||U||); the item looks bounded when the
tail of the sweep does not climb above the earlier maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from platelab.errors import PlateLabError, RangeError
from platelab.linalg import solve_small, top_singular_pair
from platelab.resolvent import block_norms, resolvent_norm, shifted_blocks
from platelab.scaling import SweepConfig, sweep_lambdas
from platelab.spectrum import EigenModel, frac_power_coeff, resonant_mode


@dataclass(frozen=True)
class InterpolationResult:
    lhs: float
    rhs: float
    holds: bool


def _log_power_norm(u, eta, r) -> float:
    """log ||A^r u|| without overflow; -inf for the zero vector."""
    a = np.abs(np.asarray(u, dtype=complex))
    mask = a > 0
    if not np.any(mask):
        return -math.inf
    terms = 2.0 * (r * np.log(np.asarray(eta, dtype=float)[mask]) + np.log(a[mask]))
    top = terms.max()
    return 0.5 * (top + math.log(np.sum(np.exp(terms - top))))


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def interpolation_check(u, eta, alpha: float, beta: float, gamma: float) -> InterpolationResult:
    """||A^b u|| <= ||A^a u||^((g-b)/(g-a)) ||A^g u||^((b-a)/(g-a)) with constant 1."""
    if not alpha < beta < gamma:
        raise ValueError("need alpha < beta < gamma")
    u = np.asarray(u, dtype=complex)
    eta = np.asarray(eta, dtype=float)
    if u.shape != eta.shape:
        raise ValueError("u and eta must have matching shapes")
    la = _log_power_norm(u, eta, alpha)
    if la == -math.inf:
        return InterpolationResult(0.0, 0.0, True)
    lb = _log_power_norm(u, eta, beta)
    lg = _log_power_norm(u, eta, gamma)
    theta = (beta - alpha) / (gamma - alpha)
    lr = (1 - theta) * la + theta * lg
    holds = lb <= lr + math.log1p(1e-12)
    # the verdict is decided in log space; the reported sides may saturate
    return InterpolationResult(_exp(lb), _exp(lr), bool(holds))


# --- lemma items ------------------------------------------------------------

@dataclass(frozen=True)
class ModalSolution:
    """Raw coefficients of U and the norms entering each estimate."""

    eta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    lam: float
    omega: float
    f_norm: float
    u_norm: float
    f_dot_u: float


def _pnorm2(eta, x, r) -> float:
    """||A^r x||^2 = sum eta^(2r) |x_n|^2."""
    return float(np.sum(frac_power_coeff(eta, 2 * r) * np.abs(x) ** 2))


@dataclass(frozen=True)
class LemmaItem:
    item_id: str
    omega_case: str  # "zero", "positive" or "any"
    sigma_range: tuple  # (lo, hi, closed_lo, closed_hi)
    lhs: Callable
    extra: Optional[Callable] = None
    acceptance: bool = False
    identity: bool = False

    def check_range(self, sigma: float, omega: float) -> None:
        if self.omega_case == "zero" and omega != 0:
            raise RangeError(f"{self.item_id} is stated for omega = 0")
        if self.omega_case == "positive" and not omega > 0:
            raise RangeError(f"{self.item_id} is stated for omega > 0")
        lo, hi, clo, chi = self.sigma_range
        eps = 1e-12
        ok_lo = sigma >= lo - eps if clo else sigma > lo + eps
        ok_hi = sigma <= hi + eps if chi else sigma < hi - eps
        if not (ok_lo and ok_hi):
            raise RangeError(f"{self.item_id} is stated for sigma in {_fmt_range(self.sigma_range)}, got {sigma}")


def _fmt_range(r) -> str:
    lo, hi, clo, chi = r
    return f"{'[' if clo else '('}{lo:g}, {hi:g}{']' if chi else ')'}"


def _base(S: ModalSolution, sigma):
    return abs(float(np.sum(S.eta * np.abs(S.theta) ** 2)) - S.f_dot_u)


def _u2(S):
    return _pnorm2(S.eta, S.u, 1.0)


def _v2(S):
    return _pnorm2(S.eta, S.v, 0.0)


def _theta2(S):
    return _pnorm2(S.eta, S.theta, 0.0)


def _vh1(S):
    return _v2(S) + S.omega * _pnorm2(S.eta, S.v, 0.5)


_FULL = (0.0, 1.5, True, True)

ITEMS = {
    it.item_id: it
    for it in [
        LemmaItem("base", "any", (-math.inf, 1.5, False, True), _base, acceptance=True, identity=True),
        LemmaItem("L3.4-i1", "zero", _FULL, lambda S, s: abs(S.lam) * _v2(S),
                  extra=lambda S, s: abs(S.lam) * (_u2(S) + _theta2(S))),
        LemmaItem("L3.4-i2", "zero", _FULL, lambda S, s: abs(S.lam) * (_u2(S) + _theta2(S)),
                  extra=lambda S, s: abs(S.lam) * _v2(S)),
        LemmaItem("L3.4-ii", "zero", (1.0, 1.5, True, True), lambda S, s: abs(S.lam) * _u2(S),
                  extra=lambda S, s: abs(S.lam) * _pnorm2(S.eta, S.theta, 1 - s)),
        LemmaItem("L3.4-iii", "zero", _FULL, lambda S, s: _pnorm2(S.eta, S.v, s - 1), acceptance=True),
        LemmaItem("L3.4-iv", "zero", (1.0, 1.0, True, True), lambda S, s: _pnorm2(S.eta, S.v, 0.5)),
        LemmaItem("L3.4-v", "zero", _FULL, lambda S, s: _pnorm2(S.eta, S.v, (2 * s - 1) / 4), acceptance=True),
        LemmaItem("L3.4-vi", "zero", (1.0, 7 / 6, False, True), lambda S, s: _pnorm2(S.eta, S.u, (2 * s + 3) / 4)),
        LemmaItem("L3.4-vii", "zero", (7 / 6, 1.5, False, False), lambda S, s: _pnorm2(S.eta, S.u, (5 - 2 * s) / 2)),
        LemmaItem("L3.4-viii", "zero", (0.5, 11 / 8, True, True), lambda S, s: _pnorm2(S.eta, S.v, (8 * s - 3) / 8),
                  acceptance=True),
        LemmaItem("L3.4-ix", "zero", (0.5, 1.0, False, False), lambda S, s: _pnorm2(S.eta, S.u, (2 * s + 1) / 2)),
        LemmaItem("L3.4-x", "zero", (1.0, 7 / 6, False, True), lambda S, s: _pnorm2(S.eta, S.u, (5 - 2 * s) / 2)),
        LemmaItem("L3.5", "zero", (7 / 6, 1.5, False, False), lambda S, s: _pnorm2(S.eta, S.v, 0.5)),
        LemmaItem("L3.6-i", "positive", _FULL,
                  lambda S, s: abs(S.lam) * (_pnorm2(S.eta, S.theta, -0.5) + S.omega * _theta2(S)), acceptance=True),
        LemmaItem("L3.6-ii", "positive", (1.25, 1.5, True, True), lambda S, s: abs(S.lam) * _u2(S)),
        LemmaItem("L3.6-iii", "positive", _FULL, lambda S, s: abs(S.lam) * _vh1(S),
                  extra=lambda S, s: abs(S.lam) * (_u2(S) + _theta2(S))),
        LemmaItem("L3.6-iv", "positive", _FULL,
                  lambda S, s: _pnorm2(S.eta, S.v, s - 1) + S.omega * _pnorm2(S.eta, S.v, (2 * s - 1) / 2),
                  acceptance=True),
        LemmaItem("L3.6-v", "positive", (1.0, 1.25, False, False), lambda S, s: _pnorm2(S.eta, S.u, s)),
    ]
}

ACCEPTANCE_ITEMS = tuple(k for k, v in ITEMS.items() if v.acceptance)


def get_item(item_id: str) -> LemmaItem:
    try:
        return ITEMS[item_id]
    except KeyError:
        raise PlateLabError(f"unknown lemma item {item_id!r}; known: {', '.join(ITEMS)}") from None


def solve_modal(model: EigenModel, ns, lam: float, sigma: float, omega: float, F_scaled: np.ndarray) -> ModalSolution:
    """Solve the resolvent system for data given in scaled coordinates on modes ``ns``."""
    ns = np.asarray(ns, dtype=np.int64)
    eta = model.eigenvalues(ns)
    F = np.asarray(F_scaled, dtype=complex).reshape(len(ns), 3)
    U = solve_small(shifted_blocks(eta, lam, sigma, omega), F)
    f_norm = float(np.sqrt(np.sum(np.abs(F) ** 2)))
    u_norm = float(np.sqrt(np.sum(np.abs(U) ** 2)))
    return ModalSolution(
        eta=eta,
        u=U[:, 0] / eta,
        v=U[:, 1] / np.sqrt(1.0 + omega * eta),
        theta=U[:, 2],
        lam=float(lam),
        omega=float(omega),
        f_norm=f_norm,
        u_norm=u_norm,
        f_dot_u=float(np.real(np.sum(F * np.conj(U)))),
    )


def item_ratio(item: LemmaItem, S: ModalSolution, sigma: float) -> float:
    denom = S.f_norm * S.u_norm
    if denom == 0:
        return 0.0
    if item.extra is not None:
        denom += item.extra(S, sigma)
    return float(item.lhs(S, sigma) / denom)


@dataclass(frozen=True)
class RatioReport:
    item_id: str
    sup_ratio: float
    argmax_lambda: float
    samples: int
    bounded_verdict: bool
    seed: int
    rows: tuple = ()


def _probe_modes(model, lam, sigma, omega, width: int = 2) -> np.ndarray:
    """Modes near the resonance and near the resolvent maximiser."""
    top = model.max_index
    centres = {resonant_mode(model, lam, omega), resolvent_norm(model, lam, sigma, omega).argmax_mode}
    out = set()
    for c in centres:
        out |= set(range(max(1, c - width), min(top, c + width) + 1))
    return np.array(sorted(out), dtype=np.int64)


def _ratio_at(item, model, lam, sigma, omega, rng, trials) -> float:
    ns = _probe_modes(model, lam, sigma, omega)
    eta = model.eigenvalues(ns)
    best = 0.0
    # worst-case data for ||U|| / ||F|| on each probe mode
    R = np.linalg.inv(shifted_blocks(eta, lam, sigma, omega))
    _, vecs = top_singular_pair(R)
    for k in range(len(ns)):
        for f in (vecs[k], np.conj(vecs[k])):
            S = solve_modal(model, ns[k:k + 1], lam, sigma, omega, f[None])
            best = max(best, item_ratio(item, S, sigma))
    for _ in range(trials):
        F = rng.standard_normal((len(ns), 3)) + 1j * rng.standard_normal((len(ns), 3))
        F /= np.sqrt(np.sum(np.abs(F) ** 2))
        S = solve_modal(model, ns, lam, sigma, omega, F)
        best = max(best, item_ratio(item, S, sigma))
        k = int(rng.integers(len(ns)))
        S = solve_modal(model, ns[k:k + 1], lam, sigma, omega, F[k:k + 1])
        best = max(best, item_ratio(item, S, sigma))
    return best


def tail_bounded(lams, ratios, decades: float = 1.0, factor: float = 1.1) -> bool:
    """Max over the last ``decades`` of the sweep <= factor x max over the earlier part."""
    lams = np.asarray(lams, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    cut = lams.max() / 10.0**decades
    head = ratios[lams < cut * (1 - 1e-12)]
    tail = ratios[lams >= cut * (1 - 1e-12)]
    if head.size == 0:
        raise PlateLabError("sweep shorter than the tail window")
    return bool(tail.max() <= factor * head.max())


def lemma_ratio_scan(
    item_id: str,
    model: EigenModel,
    sigma: float,
    omega: float,
    sweep: Optional[SweepConfig] = None,
    seed: int = 0,
    trials: int = 8,
) -> RatioReport:
    item = get_item(item_id)
    item.check_range(sigma, omega)
    cfg = sweep or SweepConfig(lambda_max=2.0**20)
    lams = sweep_lambdas(cfg)
    # one stream per lambda so results do not depend on scheduling
    streams = np.random.SeedSequence(seed).spawn(len(lams))
    ratios = np.array(
        [_ratio_at(item, model, lam, sigma, omega, np.random.default_rng(s), trials) for lam, s in zip(lams, streams)]
    )
    i = int(np.argmax(ratios))
    if item.identity:
        bounded = bool(ratios.max() <= 1e-10)
    else:
        bounded = tail_bounded(lams, ratios, factor=cfg.bound_factor)
    return RatioReport(
        item_id=item_id,
        sup_ratio=float(ratios[i]),
        argmax_lambda=float(lams[i]),
        samples=len(lams),
        bounded_verdict=bounded,
        seed=seed,
        rows=tuple(zip(map(float, lams), map(float, ratios))),
    )


def resolvent_identity_check(
    model: EigenModel,
    sigma: float,
    omega: float,
    lam: float,
    trials: int = 100,
    seed: int = 0,
    n_modes: int = 32,
    F: Optional[np.ndarray] = None,
) -> float:
    """max |sum eta |theta|^2 - Re<F, U>_W| / (||F|| ||U||) over random data.

    Data live on the first ``n_modes`` modes and, for lambda != 0, on as many
    modes around the resonance. An explicit ``F`` (scaled coordinates on the
    first modes) replaces the random draws.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    top = model.max_index
    ns = set(range(1, min(n_modes, top) + 1))
    if lam:
        c = resonant_mode(model, lam, omega)
        ns |= set(range(max(1, c - n_modes // 2), min(top, c + n_modes // 2) + 1))
    ns = np.array(sorted(ns), dtype=np.int64)
    item = ITEMS["base"]
    if F is not None:
        F = np.asarray(F, dtype=complex).reshape(-1, 3)
        S = solve_modal(model, np.arange(1, len(F) + 1), lam, sigma, omega, F)
        return item_ratio(item, S, sigma)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        Fr = rng.standard_normal((len(ns), 3)) + 1j * rng.standard_normal((len(ns), 3))
        S = solve_modal(model, ns, lam, sigma, omega, Fr)
        worst = max(worst, item_ratio(item, S, sigma))
    return worst
