"""Per-mode 3x3 generator blocks and the weighted phase-space inner product.

On span{e_n}^3 the generator acts on coefficients (u, v, theta) as

    [ 0                     1   0                   ]
    [ -eta^2/(1+omega eta)  0   eta^sigma/(1+omega eta) ]
    [ 0              -eta^sigma  -eta               ]

with the phase norm weights W = (eta^2, 1 + omega eta, 1). Conjugating by
D = diag(sqrt(W)) gives the "scaled" block, a real skew matrix plus
diag(0, 0, -eta), which is what the numerical paths actually work with.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from platelab.spectrum import EigenModel, frac_power_coeff


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModeBlock:
    eta: float
    sigma: float
    omega: float
    M: np.ndarray = field(repr=False, compare=False)
    W: np.ndarray = field(repr=False, compare=False)

    @property
    def D(self) -> np.ndarray:
        return np.sqrt(self.W)

    def scaled(self) -> np.ndarray:
        """D M D^{-1}: the block in coordinates where the phase norm is Euclidean."""
        return scaled_generators(np.array([self.eta]), self.sigma, self.omega)[0]

    def norm(self, x) -> float:
        return float(np.sqrt(weighted_inner(self, x, x).real))


@dataclass(frozen=True)
class ModalState:
    """Coefficients (u_n, v_n, theta_n) of U on the first len(coeffs) modes."""

    model: EigenModel
    coeffs: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[1] != 3 or c.shape[0] < 1:
            raise ValueError("ModalState coefficients must have shape (N, 3) with N >= 1")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def n_modes(self) -> int:
        return self.coeffs.shape[0]

    def etas(self) -> np.ndarray:
        return self.model.eigenvalues(np.arange(1, self.n_modes + 1))

    def scaled(self, omega: float) -> np.ndarray:
        """D x for every mode: Euclidean coordinates of the phase norm."""
        return self.coeffs * np.sqrt(block_weights(self.etas(), omega))

    def norm(self, omega: float) -> float:
        return float(np.sqrt(np.sum(np.abs(self.scaled(omega)) ** 2)))


def block_weights(eta, omega: float) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    return np.stack([eta * eta, 1.0 + omega * eta, np.ones_like(eta)], axis=-1)


def scaled_generators(eta, sigma: float, omega: float) -> np.ndarray:
    """Batch of D M D^{-1} for an array of eigenvalues, shape (N, 3, 3), real."""
    eta = np.asarray(eta, dtype=float)
    root = np.sqrt(1.0 + omega * eta)
    a = eta / root
    b = frac_power_coeff(eta, sigma) / root
    out = np.zeros(eta.shape + (3, 3))
    out[..., 0, 1] = a
    out[..., 1, 0] = -a
    out[..., 1, 2] = b
    out[..., 2, 1] = -b
    out[..., 2, 2] = -eta
    return out


def generator_block(eta: float, sigma: float, omega: float) -> ModeBlock:
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if omega < 0:
        raise ValueError(f"omega must be nonnegative, got {omega}")
    eta = float(eta)
    inertia = 1.0 + omega * eta
    coupling = frac_power_coeff(eta, sigma)
    M = np.array(
        [
            [0.0, 1.0, 0.0],
            [-eta * eta / inertia, 0.0, coupling / inertia],
            [0.0, -coupling, -eta],
        ],
        dtype=complex,
    )
    W = np.array([eta * eta, inertia, 1.0])
    return ModeBlock(eta=eta, sigma=float(sigma), omega=float(omega), M=_frozen(M), W=_frozen(W))


def weighted_inner(block: ModeBlock, x, y) -> complex:
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return complex(np.sum(block.W * x * np.conj(y)))


def dissipation_rate(block: ModeBlock, x) -> float:
    """Re <M x, x>_W; equals -eta |theta|^2 for every sigma and omega."""
    x = np.asarray(x, dtype=complex)
    # Re <Mx, x>_W = x^H Herm(W M) x; forming the Hermitian part first cancels
    # the conservative couplings entrywise instead of after summing large terms
    WM = block.W[:, None] * block.M
    H = 0.5 * (WM + np.conj(WM.T))
    return float(np.real(np.conj(x) @ H @ x))
