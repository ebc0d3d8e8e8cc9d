"""Eigenvalue models for the positive self-adjoint operator A.

A is represented only through its eigenvalues eta_1 <= eta_2 <= ...; fractional
powers act diagonally, ``A^r e_n = eta_n^r e_n``. Mode indices are 1-based.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from platelab.errors import PlateLabError, SpectrumFileError

POWER_LAW = "power-law"
EXPLICIT_LIST = "explicit-list"
FILE_BACKED = "file-backed"

# Largest index handed out for unbounded models; keeps n**p finite in float64.
UNBOUNDED_INDEX_CAP = 10**15


@dataclass(frozen=True)
class EigenModel:
    kind: str
    c: float = 1.0
    p: float = 2.0
    values: tuple = field(default=(), repr=False)
    source: Optional[str] = None

    def __post_init__(self):
        if self.kind == POWER_LAW:
            if not (self.c > 0 and self.p > 0 and math.isfinite(self.c) and math.isfinite(self.p)):
                raise ValueError(f"power-law model needs c > 0 and p > 0, got c={self.c}, p={self.p}")
        elif self.kind in (EXPLICIT_LIST, FILE_BACKED):
            vals = tuple(float(v) for v in self.values)
            if not vals:
                raise ValueError("explicit eigenvalue list is empty")
            for i, v in enumerate(vals):
                if not (v > 0 and math.isfinite(v)):
                    raise ValueError(f"eigenvalue #{i + 1} must be positive and finite, got {v}")
                if i and v < vals[i - 1]:
                    raise ValueError(f"eigenvalues must be nondecreasing (entry #{i + 1})")
            object.__setattr__(self, "values", vals)
        else:
            raise ValueError(f"unknown eigen model kind {self.kind!r}")

    @classmethod
    def power_law(cls, c: float = 1.0, p: float = 2.0) -> "EigenModel":
        return cls(POWER_LAW, c=float(c), p=float(p))

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "EigenModel":
        return cls(EXPLICIT_LIST, values=tuple(values))

    @classmethod
    def from_file(cls, path) -> "EigenModel":
        return cls(FILE_BACKED, values=tuple(read_eigenvalue_file(path)), source=str(path))

    @property
    def size(self) -> Optional[int]:
        """Number of modes, or None when the model is unbounded."""
        if self.kind == POWER_LAW:
            return None
        return len(self.values)

    @property
    def max_index(self) -> int:
        return UNBOUNDED_INDEX_CAP if self.size is None else self.size

    def eigenvalue(self, n: int) -> float:
        return eigenvalue(self, n)

    def eigenvalues(self, ns) -> np.ndarray:
        """Vectorised lookup for an integer array of 1-based indices."""
        ns = np.asarray(ns, dtype=np.int64)
        if ns.size and ns.min() < 1:
            raise ValueError("mode indices are 1-based")
        if self.kind == POWER_LAW:
            return self.c * ns.astype(float) ** self.p
        if ns.size and ns.max() > len(self.values):
            raise IndexError(f"mode {int(ns.max())} beyond explicit list of {len(self.values)}")
        return np.asarray(self.values)[ns - 1]

    def first_index_at_least(self, eta: float) -> int:
        """Smallest n with eta_n >= eta (clamped to the model size)."""
        if eta <= 0:
            return 1
        if self.kind == POWER_LAW:
            x = (eta / self.c) ** (1.0 / self.p)
            if x >= UNBOUNDED_INDEX_CAP:
                return UNBOUNDED_INDEX_CAP
            n = max(1, math.ceil(x))
            # float rounding in the root can be off by one either way
            while n > 1 and self.eigenvalue(n - 1) >= eta:
                n -= 1
            while n < UNBOUNDED_INDEX_CAP and self.eigenvalue(n) < eta:
                n += 1
            return n
        i = bisect.bisect_left(self.values, eta)
        return min(i + 1, len(self.values))

    def describe(self) -> str:
        if self.kind == POWER_LAW:
            return f"power:{self.c!r},{self.p!r}"
        if self.kind == FILE_BACKED:
            return f"file:{self.source}"
        return "list:" + ",".join(repr(v) for v in self.values)


def read_eigenvalue_file(path) -> list:
    """Parse one positive decimal per line, strictly increasing.

    Blank lines and ``#`` comments are skipped.
    """
    path = Path(path)
    out: list = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                value = float(line)
            except ValueError:
                raise SpectrumFileError(path, lineno, f"not a number: {line!r}") from None
            if not (value > 0 and math.isfinite(value)):
                raise SpectrumFileError(path, lineno, f"eigenvalue must be positive and finite: {line!r}")
            if out and value <= out[-1]:
                raise SpectrumFileError(path, lineno, f"eigenvalues must be strictly increasing ({value!r} after {out[-1]!r})")
            out.append(value)
    if not out:
        raise SpectrumFileError(path, 0, "no eigenvalues found")
    return out


def eigenvalue(model: EigenModel, n: int) -> float:
    if int(n) != n or n < 1:
        raise ValueError(f"mode index must be a positive integer, got {n!r}")
    n = int(n)
    if model.kind == POWER_LAW:
        return model.c * float(n) ** model.p
    if n > len(model.values):
        raise IndexError(f"mode {n} beyond explicit list of {len(model.values)}")
    return model.values[n - 1]


def frac_power_coeff(eta, r: float):
    """Diagonal coefficient of A^r on an eigenvector: exp(r * ln(eta))."""
    arr = np.asarray(eta, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("fractional powers need eta > 0")
    out = np.exp(r * np.log(arr))
    return float(out) if out.ndim == 0 else out


def resonance_eta(lam: float, omega: float) -> float:
    """Positive root of eta^2 - omega*lam^2*eta - lam^2 = 0."""
    lam2 = lam * lam
    if omega == 0:
        return abs(lam)
    b = omega * lam2
    return 0.5 * (b + math.hypot(b, 2.0 * abs(lam)))


def resonant_mode(model: EigenModel, lam: float, omega: float, n_max: Optional[int] = None) -> int:
    """Index minimising |lam^2 (1 + omega eta_n) - eta_n^2| over 1..n_max.

    As a function of eta the mismatch rises from lam^2 at eta=0 to a bump at
    omega*lam^2/2, falls to zero at the resonance root and grows after it, so
    over a nondecreasing sequence the minimiser is n=1, the last index below
    the root, or the first index at or above it. Ties go to the smaller n.
    """
    if not lam:
        raise ValueError("resonant_mode needs lambda != 0")
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    limit = model.max_index if n_max is None else min(int(n_max), model.max_index)
    if limit < 1:
        raise PlateLabError("empty searchable mode range")
    lam = abs(float(lam))
    root = resonance_eta(lam, omega)
    above = min(model.first_index_at_least(root), limit)
    below = max(1, above - 1)
    # repeated eigenvalues: the tie goes to the first copy
    below = min(below, model.first_index_at_least(model.eigenvalue(below)))
    candidates = sorted({1, below, above})

    def mismatch(n):
        eta = model.eigenvalue(n)
        return abs(lam * lam * (1.0 + omega * eta) - eta * eta)

    best = min(candidates, key=lambda n: (mismatch(n), n))
    return best
