"""Small dense linear algebra used by the block path and by the dense oracle.

Everything here is batched over leading array dimensions. The block path uses
``solve_small`` / ``inverse_small`` plus ``jacobi_eigh``; the oracle path uses
``gauss_inverse`` and ``power_sigma_max``, which share no code with the former.
"""

from __future__ import annotations

import numpy as np

from platelab.errors import JacobiConvergenceError, SingularSystemError

PIVOT_FLOOR = 1e-300


def jacobi_eigh(G, tol: float = 1e-14, max_sweeps: int = 30, vectors: bool = False):
    """Eigen-decomposition of Hermitian matrices by cyclic complex Jacobi.

    ``G`` has shape (..., n, n). Pairs (p, q) are visited in row-cyclic order.
    Iteration stops once the off-diagonal Frobenius norm drops below
    ``tol * ||G||_F`` for every matrix in the batch.

    Returns eigenvalues in ascending order (and the unitary of column
    eigenvectors when ``vectors`` is set).
    """
    A = np.array(G, dtype=complex, copy=True)
    if A.shape[-1] != A.shape[-2]:
        raise ValueError("jacobi_eigh needs square matrices")
    n = A.shape[-1]
    batch = A.shape[:-2]
    A = A.reshape((-1, n, n))
    # symmetrise so round-off in the input cannot stall the sweep
    A = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))
    V = np.broadcast_to(np.eye(n, dtype=complex), A.shape).copy() if vectors else None
    # Jacobi is scale invariant; normalising keeps tiny entries out of the
    # subnormal range where g / |g| loses its phase
    scale = np.sqrt(np.sum(np.abs(A) ** 2, axis=(-2, -1)))
    scale = np.where(scale > 0, scale, 1.0)
    A = A / scale[:, None, None]
    off_mask = ~np.eye(n, dtype=bool)

    def off_norm(M):
        return np.sqrt(np.sum(np.abs(M[:, off_mask]) ** 2, axis=-1))

    for _ in range(max_sweeps + 1):
        if np.all(off_norm(A) <= tol):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = A[:, p, q]
                ag = np.abs(g)
                active = ag > 1e-200
                if not np.any(active):
                    continue
                a = A[:, p, p].real
                b = A[:, q, q].real
                safe = np.where(active, ag, 1.0)
                phase = np.where(active, g / safe, 1.0)
                # real symmetric rotation zeroing |g| after removing the phase
                tau = (b - a) / (2.0 * safe)
                t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
                t = np.where(tau == 0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                J = np.broadcast_to(np.eye(n, dtype=complex), A.shape).copy()
                J[:, p, p] = c
                J[:, p, q] = s
                J[:, q, p] = -s * np.conj(phase)
                J[:, q, q] = c * np.conj(phase)
                A = np.conj(np.swapaxes(J, -1, -2)) @ A @ J
                A[:, p, q] = 0.0
                A[:, q, p] = 0.0
                if vectors:
                    V = V @ J
    else:
        raise JacobiConvergenceError(f"no convergence after {max_sweeps} sweeps")

    w = np.real(np.diagonal(A, axis1=-2, axis2=-1)) * scale[:, None]
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1).reshape(batch + (n,))
    if not vectors:
        return w
    V = np.take_along_axis(V, order[:, None, :], axis=-1).reshape(batch + (n, n))
    return w, V


def largest_singular_value(R, tol: float = 1e-14, max_sweeps: int = 30):
    """sigma_max of each matrix in the batch, via Jacobi on R^H R."""
    R = np.asarray(R)
    G = np.conj(np.swapaxes(R, -1, -2)) @ R
    w = jacobi_eigh(G, tol=tol, max_sweeps=max_sweeps)
    return np.sqrt(np.maximum(w[..., -1], 0.0))


def top_singular_pair(R, tol: float = 1e-14, max_sweeps: int = 30):
    """(sigma_max, right singular vector) for each matrix in the batch."""
    R = np.asarray(R)
    G = np.conj(np.swapaxes(R, -1, -2)) @ R
    w, V = jacobi_eigh(G, tol=tol, max_sweeps=max_sweeps, vectors=True)
    return np.sqrt(np.maximum(w[..., -1], 0.0)), V[..., :, -1]


def _eliminate(A, B):
    """Batched Gaussian elimination with partial pivoting on A X = B.

    A: (m, n, n), B: (m, n, k). Returns X, raising SingularSystemError when a
    pivot magnitude falls below PIVOT_FLOOR.
    """
    A = np.array(A, dtype=complex, copy=True)
    B = np.array(B, dtype=complex, copy=True)
    m, n, _ = A.shape
    rows = np.arange(m)
    for k in range(n):
        piv = k + np.argmax(np.abs(A[:, k:, k]), axis=1)
        if np.any(piv != k):
            for M in (A, B):
                rk = M[rows, k].copy()
                M[rows, k] = M[rows, piv]
                M[rows, piv] = rk
        pivots = A[:, k, k]
        if np.any(np.abs(pivots) < PIVOT_FLOOR):
            raise SingularSystemError(f"pivot below {PIVOT_FLOOR:g} in column {k}")
        if k + 1 < n:
            f = A[:, k + 1:, k] / pivots[:, None]
            A[:, k + 1:, k:] -= f[:, :, None] * A[:, None, k, k:]
            B[:, k + 1:, :] -= f[:, :, None] * B[:, None, k, :]
    X = np.empty_like(B)
    for k in range(n - 1, -1, -1):
        acc = B[:, k, :] - np.einsum("mj,mjk->mk", A[:, k, k + 1:], X[:, k + 1:, :])
        X[:, k, :] = acc / A[:, k, k][:, None]
    return X


def solve_small(A, b):
    """Solve A x = b for a batch of small systems; A (..., n, n), b (..., n)."""
    A = np.asarray(A)
    b = np.asarray(b)
    shape = b.shape
    n = A.shape[-1]
    X = _eliminate(A.reshape((-1, n, n)), b.reshape((-1, n, 1)))
    return X.reshape(shape)


def inverse_small(A):
    A = np.asarray(A)
    n = A.shape[-1]
    flat = A.reshape((-1, n, n))
    eye = np.broadcast_to(np.eye(n, dtype=complex), flat.shape)
    return _eliminate(flat, eye).reshape(A.shape)


def gauss_inverse(A):
    """Inverse of one dense matrix by row-by-row elimination with partial pivoting."""
    A = np.array(A, dtype=complex, copy=True)
    n = A.shape[0]
    aug = np.hstack([A, np.eye(n, dtype=complex)])
    for k in range(n):
        p = k + int(np.argmax(np.abs(aug[k:, k])))
        if abs(aug[p, k]) < PIVOT_FLOOR:
            raise SingularSystemError(f"singular matrix at column {k}")
        if p != k:
            aug[[k, p]] = aug[[p, k]]
        aug[k] /= aug[k, k]
        others = np.arange(n) != k
        aug[others] -= np.outer(aug[others, k], aug[k])
    return aug[:, n:]


def power_sigma_max(A, tol: float = 1e-12, max_iter: int = 500_000, seed: int = 12345) -> float:
    """Largest singular value by power iteration on the Gram matrix A^H A.

    Stops when the extrapolated remaining error of the Rayleigh quotient,
    ``delta_k * r / (1 - r)`` with ``r = delta_k / delta_{k-1}``, is below
    ``tol`` relative; a bare step-size test stops too early on small gaps.
    """
    A = np.asarray(A, dtype=complex)
    G = np.conj(A.T) @ A
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(G.shape[0]) + 1j * rng.standard_normal(G.shape[0])
    x /= np.linalg.norm(x)
    est = None
    prev_step = None
    for _ in range(max_iter):
        y = G @ x
        new = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        if est is not None:
            step = abs(new - est)
            if step == 0.0:
                est = new
                break
            if prev_step:
                r = min(step / prev_step, 0.999999999)
                if step * r / (1.0 - r) <= tol * abs(new):
                    est = new
                    break
            prev_step = step
        est = new
    est = max(est, float(np.real(np.vdot(x, G @ x))))
    return float(np.sqrt(max(est, 0.0)))
