"""Exact per-mode propagation of e^{tA_omega} and decay-rate fits.

Blocks are exponentiated in scaled coordinates (D M D^{-1}), where the phase
norm is Euclidean and the matrix is real with entries of moderate size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from platelab.errors import TooFewSamplesError
from platelab.linalg import largest_singular_value
from platelab.modal import ModalState, ModeBlock, block_weights, scaled_generators
from platelab.spectrum import EigenModel

DEFECTIVE_COND = 1e8


@dataclass(frozen=True)
class Propagator:
    block: ModeBlock
    eigvals: np.ndarray = field(repr=False)
    eigvecs: np.ndarray = field(repr=False)
    defective: bool
    # scaled generator, exponentiated directly when the eigenbasis is unusable
    fallback: Optional[np.ndarray] = field(default=None, repr=False)
    inv_eigvecs: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_block(cls, block: ModeBlock) -> "Propagator":
        S = block.scaled()
        w, V = np.linalg.eig(S)
        cond = np.linalg.cond(V)
        if not np.isfinite(cond) or cond >= DEFECTIVE_COND:
            return cls(block, w, V, True, fallback=S)
        return cls(block, w, V, False, inv_eigvecs=np.linalg.inv(V))

    def reconstruction_error(self) -> float:
        """||V diag(w) V^{-1} - S|| / ||S|| in scaled coordinates."""
        S = self.block.scaled()
        if self.defective:
            return float("nan")
        R = (self.eigvecs * self.eigvals) @ self.inv_eigvecs
        return float(np.linalg.norm(R - S) / np.linalg.norm(S))

    def scaled_exp(self, t: float) -> np.ndarray:
        if self.defective:
            return scipy.linalg.expm(t * self.fallback)
        return (self.eigvecs * np.exp(self.eigvals * t)) @ self.inv_eigvecs


def _signed_propagate(prop: Propagator, x0, t: float) -> np.ndarray:
    D = prop.block.D
    y = prop.scaled_exp(t) @ (D * np.asarray(x0, dtype=complex))
    return y / D


def propagate_block(prop: Propagator, x0, t: float) -> np.ndarray:
    """e^{tM} x0 in raw coefficients."""
    if t < 0:
        raise ValueError("propagation is forward in time only")
    return _signed_propagate(prop, x0, t)


def energy_derivative_fd(prop: Propagator, x0, h: float = 1e-6) -> float:
    """Central difference of t -> 1/2 ||e^{tM} x0||_W^2 at t = 0."""
    plus = prop.block.norm(_signed_propagate(prop, x0, h)) ** 2
    minus = prop.block.norm(_signed_propagate(prop, x0, -h)) ** 2
    return 0.25 * (plus - minus) / h


class ModalPropagator:
    """Propagators for modes 1..N, batched in scaled coordinates."""

    def __init__(self, model: EigenModel, sigma: float, omega: float, N: int):
        if N < 1:
            raise ValueError("need at least one mode")
        self.omega = float(omega)
        self.eta = model.eigenvalues(np.arange(1, N + 1))
        S = scaled_generators(self.eta, sigma, omega)
        self.S = S
        w, V = np.linalg.eig(S)
        cond = np.linalg.cond(V)
        self.defective = ~np.isfinite(cond) | (cond >= DEFECTIVE_COND)
        Vs = np.where(self.defective[:, None, None], np.eye(3), V)
        self.w = w
        self.V = Vs
        self.Vi = np.linalg.inv(Vs)

    def exp(self, t: float) -> np.ndarray:
        """Batch of e^{t S_n}, shape (N, 3, 3)."""
        E = np.einsum("nij,nj,njk->nik", self.V, np.exp(self.w * t), self.Vi)
        for k in np.flatnonzero(self.defective):
            E[k] = scipy.linalg.expm(t * self.S[k])
        return E

    def evolve_scaled(self, y0: np.ndarray, t: float) -> np.ndarray:
        c = np.einsum("nij,nj->ni", self.Vi, y0)
        y = np.einsum("nij,nj->ni", self.V, c * np.exp(self.w * t))
        for k in np.flatnonzero(self.defective):
            y[k] = scipy.linalg.expm(t * self.S[k]) @ y0[k]
        return y


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.size == 0:
        raise ValueError("empty time grid")
    if t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ValueError("times must start at 0 and increase")
    return t


def simulate_decay(model: EigenModel, sigma: float, omega: float, init: ModalState, times) -> list:
    t = _check_times(times)
    prop = ModalPropagator(model, sigma, omega, init.n_modes)
    y0 = init.scaled(omega)
    out = []
    for ti in t:
        y = y0 if ti == 0 else prop.evolve_scaled(y0, ti)
        out.append((float(ti), float(np.sqrt(np.sum(np.abs(y) ** 2)))))
    return out


def random_state(model: EigenModel, N: int, omega: float, seed: int = 0, smoothing: float = 0.0) -> ModalState:
    """Random data of unit phase norm, optionally multiplied by (I + A)^(-smoothing).

    Draws are made in scaled coordinates (every slot carries energy of order
    one) and converted back to raw coefficients.
    """
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((N, 3)) + 1j * rng.standard_normal((N, 3))
    y /= np.sqrt(np.sum(np.abs(y) ** 2))
    eta = model.eigenvalues(np.arange(1, N + 1))
    if smoothing:
        y = y * ((1.0 + eta) ** -smoothing)[:, None]
    return ModalState(model, y / np.sqrt(block_weights(eta, omega)))


def smoothed_random_state(model: EigenModel, N: int, omega: float, seed: int = 0) -> ModalState:
    return random_state(model, N, omega, seed=seed, smoothing=1.0)


def worst_case_decay(model: EigenModel, sigma: float, omega: float, N: int, times) -> list:
    """t -> ||S(t) (I + A)^{-1}|| on the first N modes.

    (I + A)^{-1} acts on each slot and commutes with the blocks, so this is
    max_n ||e^{t S_n}||_2 / (1 + eta_n): the decay of the worst smoothed datum.
    """
    t = _check_times(times)
    prop = ModalPropagator(model, sigma, omega, N)
    damp = 1.0 / (1.0 + prop.eta)
    out = []
    for ti in t:
        s = largest_singular_value(prop.exp(ti)) * damp
        out.append((float(ti), float(s.max())))
    return out


def dyadic_times(t_min: float = 2.0**-4, t_max: float = 1e4, per_octave: int = 4) -> np.ndarray:
    k = np.arange(int(np.floor(np.log2(t_max / t_min) * per_octave + 1e-9)) + 1)
    return np.concatenate([[0.0], t_min * 2.0 ** (k / per_octave)])


def fit_decay(curve: Sequence, kind: str) -> float:
    """Exponential rate (per unit time) or polynomial exponent of a decaying curve."""
    pts = np.array([(float(t), float(v)) for t, v in curve])
    if len(pts) < 4:
        raise TooFewSamplesError("fit_decay needs at least 4 points")
    t, v = pts[:, 0], pts[:, 1]
    if np.any(~(v > 0)):
        raise ValueError("norms must be positive")
    if kind == "exponential":
        slope = np.polyfit(t, np.log(v), 1)[0]
        return float(-slope)
    if kind == "polynomial":
        pos = t > 0
        t, v = t[pos], v[pos]
        if t.size < 4 or t.max() / t.min() < 100 * (1 - 1e-12):
            raise TooFewSamplesError("polynomial fit needs positive times spanning at least 2 decades")
        tail = t >= t.max() / 10 * (1 - 1e-12)
        if tail.sum() < 4:
            raise TooFewSamplesError("need at least 4 points in the final decade")
        slope = np.polyfit(np.log(t[tail]), np.log(v[tail]), 1)[0]
        return float(-slope)
    raise ValueError(f"unknown decay kind {kind!r}")
