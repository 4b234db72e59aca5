# analysis/mobility.py
"""临界能带公式与迁移率 mu 的拟合."""
from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy.optimize import minimize_scalar

from analysis.bands import BandStructure
from utils.errors import DomainError, FitError
from utils.logger import setup_logger

logger = setup_logger(__name__)

FIT_XATOL = 1e-8
COARSE_POINTS = 201
BOUND_RESIDUAL = 0.05
WINDINGS = range(-3, 4)
OSCILLATORS = range(0, 4)


@dataclass(frozen=True)
class MobilityFit:
    mu: float
    rms_residual: float
    offset: float
    band_index: int
    grid_size: int
    at_bound: bool
    flagged: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "mu": self.mu,
            "rms_residual": self.rms_residual,
            "offset": self.offset,
            "band_index": self.band_index,
            "grid_size": self.grid_size,
            "at_bound": self.at_bound,
            "flagged": self.flagged,
        }


def _lambda(mu, xi):
    return np.arccos(np.sqrt(mu) * np.cos(2.0 * np.pi * xi)) / (2.0 * np.pi)


def cft_energy(mu, xi, n: int = 0, p: int = 0):
    """(lambda + n)^2 + p with lambda = arccos(sqrt(mu) cos 2 pi xi) / 2 pi, in units of Delta."""
    mu_arr = np.asarray(mu, dtype=float)
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(mu_arr < 0) or np.any(mu_arr > 1):
        raise DomainError("mobility must lie in [0, 1]", mu=np.atleast_1d(mu_arr).tolist())
    if np.any(np.abs(xi_arr) > 0.5 + 1e-12):
        raise DomainError("bias must lie in [-1/2, 1/2]")
    if int(n) != n or int(p) != p or p < 0:
        raise DomainError("n must be an integer and p a non-negative integer", n=n, p=p)
    result = (_lambda(mu_arr, xi_arr) + n) ** 2 + p
    return float(result) if np.ndim(result) == 0 else result


def cft_bands(mu: float, xi, n_bands: int) -> np.ndarray:
    """Lowest n_bands of the full set (n in -3..3, p in 0..3), sorted per xi."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    levels = np.stack([cft_energy(mu, xi, n, p) for n in WINDINGS for p in OSCILLATORS], axis=1)
    return np.sort(levels, axis=1)[:, :n_bands]


def _offset_residual(model: np.ndarray, target: np.ndarray):
    """Best constant offset in closed form and the rms residual."""
    offset = float(np.mean(target - model))
    rms = float(np.sqrt(np.mean((target - model - offset) ** 2)))
    return offset, rms


def fit_curve(xi: np.ndarray, band: np.ndarray) -> MobilityFit:
    """Bounded least-squares fit of cft_energy(mu, xi, 0, 0) + offset to one band."""
    keep = np.isfinite(band)
    xi, band = xi[keep], band[keep]
    if len(xi) < 3:
        raise FitError("need at least three finite band points", points=int(len(xi)))

    def objective(mu):
        return _offset_residual(cft_energy(mu, xi), band)[1]

    coarse = np.linspace(0.0, 1.0, COARSE_POINTS)
    values = np.array([objective(m) for m in coarse])
    best = int(np.argmin(values))
    lo, hi = coarse[max(best - 1, 0)], coarse[min(best + 1, COARSE_POINTS - 1)]
    result = minimize_scalar(objective, bounds=(lo, hi), method='bounded',
                             options={'xatol': FIT_XATOL})
    mu = float(result.x) if result.fun <= values[best] else float(coarse[best])
    offset, rms = _offset_residual(cft_energy(mu, xi), band)

    at_bound = mu <= 1e-6 or mu >= 1.0 - 1e-6
    flagged = at_bound and rms > BOUND_RESIDUAL
    if flagged:
        logger.warning(f"Mobility fit at bound mu={mu:.6f} with rms residual {rms:.3e}")
    return MobilityFit(mu=mu, rms_residual=rms, offset=offset, band_index=0,
                       grid_size=int(len(xi)), at_bound=at_bound, flagged=flagged)


def fit_mobility(bands: BandStructure, band_index: int = 0) -> MobilityFit:
    """Fit of the lowest band, already rescaled to units of Delta."""
    if bands.n_bands <= band_index:
        raise FitError(f"band {band_index} not present", n_bands=bands.n_bands)
    fit = fit_curve(bands.bias, bands.energies[:, band_index])
    logger.debug(f"Fitted mu={fit.mu:.6f}, rms={fit.rms_residual:.3e} on {fit.grid_size} points")
    return MobilityFit(fit.mu, fit.rms_residual, fit.offset, band_index, fit.grid_size,
                       fit.at_bound, fit.flagged)


def band_fit_residual(bands: BandStructure, mu: float, k: int = 3) -> float:
    """rms misfit of bands 1..k against the CFT set, with one shared offset."""
    k = min(k, bands.n_bands)
    model = cft_bands(mu, bands.bias, k)
    target = bands.energies[:, :k]
    keep = np.all(np.isfinite(target), axis=1)
    return _offset_residual(model[keep], target[keep])[1]
