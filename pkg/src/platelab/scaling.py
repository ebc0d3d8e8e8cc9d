"""Dyadic frequency sweeps, power-law fits and the regularity map in (sigma, omega)."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from platelab.errors import RangeError, TooFewSamplesError
from platelab.resolvent import ResolventSample, SearchParams, resolvent_norm
from platelab.spectrum import EigenModel

ANALYTIC = "analytic"
GEVREY = "gevrey"
EXP_STABLE = "exp-stable-only"
POLYNOMIAL = "polynomial"

MATCH = "match"
MISMATCH = "mismatch"
UNCLASSIFIED = "unclassified"

# exact rationals at the region boundaries are compared with this slack
_EDGE = 1e-12


@dataclass(frozen=True)
class SweepConfig:
    lambda_min: float = 16.0
    lambda_max: float = 2.0**24
    points_per_octave: int = 4
    fit: str = "envelope"
    envelope_octaves: float = 1.0
    tol: float = 0.1
    tol_analytic: float = 0.05
    bound_factor: float = 1.1
    bound_octaves: float = 2.0
    search: SearchParams = field(default_factory=SearchParams)
    threads: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.lambda_min < self.lambda_max:
            raise ValueError("need 0 < lambda_min < lambda_max")
        if self.points_per_octave < 1:
            raise ValueError("points_per_octave must be >= 1")
        if self.fit not in ("envelope", "raw"):
            raise ValueError(f"fit mode must be 'envelope' or 'raw', got {self.fit!r}")


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    lambda_window: tuple
    samples_used: int

    @property
    def phi(self) -> float:
        return -self.slope


@dataclass(frozen=True)
class RegionPrediction:
    sigma: float
    omega: float
    regularity: str
    phi: Optional[float] = None
    gevrey_order_bound: Optional[float] = None
    poly_rate: Optional[float] = None
    sharp: bool = False
    notes: str = ""


@dataclass
class ScanReport:
    sigma: float
    omega: float
    prediction: RegionPrediction
    samples: list
    fit: ExponentFit
    phi_est: float
    verdict: str
    bounded: bool
    growth_exponent: Optional[float] = None
    growth_expected: Optional[float] = None


def sweep_lambdas(cfg: SweepConfig) -> np.ndarray:
    """lambda_min * 2^(k / points_per_octave) up to lambda_max."""
    octaves = math.log2(cfg.lambda_max / cfg.lambda_min)
    k = np.arange(int(math.floor(octaves * cfg.points_per_octave + 1e-9)) + 1)
    return cfg.lambda_min * 2.0 ** (k / cfg.points_per_octave)


def fit_exponent(samples: Sequence, window: Optional[tuple] = None) -> ExponentFit:
    """OLS of log(norm) on log(lambda) for the samples inside ``window``."""
    pts = [(float(l), float(v)) for l, v in samples]
    if window is not None:
        lo, hi = window
        pts = [(l, v) for l, v in pts if lo <= l <= hi]
    if len(pts) < 3:
        raise TooFewSamplesError(f"need at least 3 samples in the fit window, got {len(pts)}")
    lam = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    if np.any(lam <= 0):
        raise ValueError("fit needs positive lambda")
    if np.any(~(val > 0)):
        raise ValueError("fit needs positive norms")
    x = np.log(lam)
    y = np.log(val)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise TooFewSamplesError("fit needs at least two distinct lambda values")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    sst = np.sum((y - ym) ** 2)
    sse = np.sum((y - intercept - slope * x) ** 2)
    r2 = 1.0 if sst <= 1e-30 * max(1.0, ym * ym) * len(y) else float(1.0 - sse / sst)
    r2 = min(1.0, max(0.0, r2))
    win = (float(lam.min()), float(lam.max())) if window is None else (float(window[0]), float(window[1]))
    return ExponentFit(slope=slope, intercept=intercept, r_squared=r2, lambda_window=win, samples_used=len(pts))


def envelope(values, halfwidth: int) -> np.ndarray:
    """Centred running maximum over +-halfwidth neighbouring samples."""
    v = np.asarray(values, dtype=float)
    if halfwidth <= 0:
        return v.copy()
    out = np.empty_like(v)
    for k in range(len(v)):
        out[k] = v[max(0, k - halfwidth): k + halfwidth + 1].max()
    return out


def _between(x, lo, hi, closed_lo=True, closed_hi=True) -> bool:
    left = x >= lo - _EDGE if closed_lo else x > lo + _EDGE
    right = x <= hi + _EDGE if closed_hi else x < hi - _EDGE
    return left and right


def _near(x, y) -> bool:
    return abs(x - y) <= _EDGE


def classify_regularity(sigma: float, omega: float) -> RegionPrediction:
    if omega < 0:
        raise RangeError("omega must be nonnegative")
    if not _between(sigma, 0.0, 1.5):
        raise RangeError(f"sigma={sigma} is outside the classified range [0, 3/2]")
    s, w = float(sigma), float(omega)
    if w == 0:
        if _near(s, 1.0):
            return RegionPrediction(s, w, ANALYTIC, phi=1.0, sharp=True, notes="analytic at sigma = 1")
        if _between(s, 0.5, 1.0, closed_lo=False, closed_hi=False):
            phi = 2 * s - 1
            return RegionPrediction(s, w, GEVREY, phi=phi, gevrey_order_bound=1 / phi, sharp=True,
                                    notes="gevrey s > 1/(2 sigma - 1)")
        if _between(s, 1.0, 1.5, closed_lo=False, closed_hi=False):
            return RegionPrediction(s, w, GEVREY, phi=1 / s, gevrey_order_bound=s, sharp=False,
                                    notes="gevrey s > sigma; sharpness argument does not close for sigma > 1")
        if _near(s, 0.5) or _near(s, 1.5):
            return RegionPrediction(s, w, EXP_STABLE, phi=0.0, notes="exponentially stable, no smoothing claimed")
        rate = 1 / (1 - 2 * s)
        return RegionPrediction(s, w, POLYNOMIAL, phi=2 * s - 1, poly_rate=rate, sharp=True,
                                notes="polynomial decay t^(-1/(1 - 2 sigma)); resolvent grows like lambda^(1 - 2 sigma)")
    if _between(s, 1.25, 1.5):
        return RegionPrediction(s, w, ANALYTIC, phi=1.0, sharp=True, notes="analytic on [5/4, 3/2]")
    if _between(s, 1.0, 1.25, closed_lo=False, closed_hi=False):
        phi = 4 * (s - 1)
        return RegionPrediction(s, w, GEVREY, phi=phi, gevrey_order_bound=1 / phi, sharp=True,
                                notes="gevrey s > 1/(4 (sigma - 1))")
    if _near(s, 1.0):
        return RegionPrediction(s, w, EXP_STABLE, phi=0.0, notes="exponentially stable, no smoothing claimed")
    if _between(s, 0.5, 1.0, closed_hi=False):
        rate = 1 / (4 - 4 * s)
        return RegionPrediction(s, w, POLYNOMIAL, phi=4 * s - 4, poly_rate=rate, sharp=True,
                                notes="polynomial decay t^(-1/(4 - 4 sigma))")
    return RegionPrediction(s, w, POLYNOMIAL, notes="not exponentially stable; no decay rate stated for sigma < 1/2")


def run_sweep(model: EigenModel, sigma: float, omega: float, cfg: SweepConfig) -> list:
    lams = sweep_lambdas(cfg)
    threads = cfg.threads or os.cpu_count() or 1

    def one(lam):
        return resolvent_norm(model, lam, sigma, omega, cfg.search)

    if threads == 1:
        return [one(l) for l in lams]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, lams))


def fit_samples(samples: Sequence[ResolventSample], cfg: SweepConfig) -> ExponentFit:
    lams = np.array([s.lam for s in samples])
    norms = np.array([s.norm for s in samples])
    if cfg.fit == "envelope":
        norms = envelope(norms, int(round(cfg.envelope_octaves * cfg.points_per_octave)))
    lo = math.sqrt(lams.min() * lams.max())
    return fit_exponent(list(zip(lams, norms)), (lo * (1 - 1e-12), lams.max() * (1 + 1e-12)))


def bounded_top(lams, norms, octaves: float = 2.0, factor: float = 1.1) -> bool:
    """Max over the top ``octaves`` of the sweep <= factor x max over the rest."""
    lams = np.asarray(lams, dtype=float)
    norms = np.asarray(norms, dtype=float)
    cut = lams.max() / 2.0**octaves
    top = norms[lams >= cut * (1 - 1e-12)]
    rest = norms[lams < cut * (1 - 1e-12)]
    if rest.size == 0:
        raise TooFewSamplesError("sweep too short for a boundedness check")
    return bool(top.max() <= factor * rest.max())


def _verdict(pred: RegionPrediction, phi_est: float, bounded: bool, cfg: SweepConfig) -> str:
    if pred.regularity == ANALYTIC:
        return MATCH if abs(phi_est - 1.0) <= cfg.tol_analytic else MISMATCH
    if pred.regularity == GEVREY:
        if not pred.sharp:
            return UNCLASSIFIED
        return MATCH if abs(phi_est - pred.phi) <= cfg.tol else MISMATCH
    if pred.regularity == EXP_STABLE:
        return MATCH if bounded else MISMATCH
    return UNCLASSIFIED


def scan_and_verify(model: EigenModel, sigma: float, omega: float, sweep: Optional[SweepConfig] = None) -> ScanReport:
    cfg = sweep or SweepConfig()
    pred = classify_regularity(sigma, omega)
    samples = run_sweep(model, sigma, omega, cfg)
    fit = fit_samples(samples, cfg)
    lams = [s.lam for s in samples]
    norms = [s.norm for s in samples]
    bounded = bounded_top(lams, norms, cfg.bound_octaves, cfg.bound_factor)
    growth = growth_expected = None
    if pred.regularity == POLYNOMIAL and omega == 0:
        growth = fit.slope
        growth_expected = 1 - 2 * sigma
    return ScanReport(
        sigma=float(sigma),
        omega=float(omega),
        prediction=pred,
        samples=samples,
        fit=fit,
        phi_est=fit.phi,
        verdict=_verdict(pred, fit.phi, bounded, cfg),
        bounded=bounded,
        growth_exponent=growth,
        growth_expected=growth_expected,
    )
