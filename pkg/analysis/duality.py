# analysis/duality.py
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from utils.errors import DualityExtractionError
from utils.logger import setup_logger

logger = setup_logger(__name__)

HALF = 0.5
DENSE_POINTS = 201
COINCIDENT_TOL = 1e-9


@dataclass(frozen=True)
class DualityMap:
    charge_samples: np.ndarray   # (n, 2): E_J, mu
    flux_samples: np.ndarray     # (m, 2): E_J bar, mu bar
    domain: Tuple[float, float]
    map_grid: np.ndarray         # E_J values inside the domain
    map_values: np.ndarray       # F(E_J)
    self_dual_point: Optional[float]
    fixed_point: Optional[float]
    coincident: bool = False     # F(E) = E on the whole domain

    def __call__(self, e_j):
        return _build_map(self.charge_samples, self.flux_samples)(np.asarray(e_j, dtype=float))

    def charge_mobility(self, e_j):
        """Interpolated mu(E_J) of the charge circuit (NaN outside the samples)."""
        return _curve(self.charge_samples)(np.asarray(e_j, dtype=float))

    def to_dict(self) -> Dict[str, object]:
        return {
            "charge_samples": self.charge_samples.tolist(),
            "flux_samples": self.flux_samples.tolist(),
            "domain": list(self.domain),
            "map": [[float(e), float(f)] for e, f in zip(self.map_grid, self.map_values)],
            "self_dual_point": self.self_dual_point,
            "fixed_point": self.fixed_point,
            "coincident": self.coincident,
        }


def _as_samples(samples, label: str) -> np.ndarray:
    data = np.asarray(samples, dtype=float).reshape(-1, 2)
    data = data[np.argsort(data[:, 0], kind="stable")]
    if len(data) < 2:
        raise DualityExtractionError(f"{label} curve needs at least two samples", curve=label)
    if np.any(np.diff(data[:, 0]) <= 0):
        raise DualityExtractionError(f"{label} samples repeat an E_J value", curve=label)
    steps = np.diff(data[:, 1])
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise DualityExtractionError(f"{label} mobility is not monotone in E_J", curve=label,
                                     mu=data[:, 1].tolist())
    return data


def _curve(data: np.ndarray) -> PchipInterpolator:
    """mu(E_J); PCHIP keeps monotone samples monotone."""
    return PchipInterpolator(data[:, 0], data[:, 1], extrapolate=False)


def _overlap(charge: np.ndarray, flux: np.ndarray) -> Tuple[float, float]:
    lo = max(charge[:, 1].min(), flux[:, 1].min())
    hi = min(charge[:, 1].max(), flux[:, 1].max())
    if lo >= hi:
        raise DualityExtractionError("mobility ranges of the two circuits do not overlap",
                                     charge_range=[float(charge[:, 1].min()), float(charge[:, 1].max())],
                                     flux_range=[float(flux[:, 1].min()), float(flux[:, 1].max())])
    return lo, hi


def _root(func, lo: float, hi: float) -> Optional[float]:
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if not np.isfinite(f_lo) or not np.isfinite(f_hi) or np.sign(f_lo) == np.sign(f_hi):
        return None
    return float(brentq(func, lo, hi, xtol=1e-14))


def _level_crossing(curve: PchipInterpolator, lo: float, hi: float, level: float) -> float:
    """x in [lo, hi] with curve(x) = level, NaN if the level is outside the curve's range."""
    if not np.isfinite(level):
        return float("nan")
    # 端点处 PPoly 求值有舍入误差
    tol = 1e-13 * max(1.0, abs(level))
    for end in (lo, hi):
        if abs(float(curve(end)) - level) <= tol:
            return end
    x = _root(lambda e: float(curve(e)) - level, lo, hi)
    return float("nan") if x is None else x


def _build_map(charge: np.ndarray, flux: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """F(E_J) = mu_bar^-1(mu(E_J)), the inverse solved on the forward flux curve."""
    mu = _curve(charge)
    mu_bar = _curve(flux)
    lo, hi = float(flux[0, 0]), float(flux[-1, 0])

    def mapping(e_j: np.ndarray) -> np.ndarray:
        e_j = np.asarray(e_j, dtype=float)
        targets = np.atleast_1d(mu(e_j))
        values = np.array([_level_crossing(mu_bar, lo, hi, float(t)) for t in targets])
        return values.reshape(e_j.shape)

    return mapping


def _mu_domain(charge: np.ndarray, mu_lo: float, mu_hi: float) -> Tuple[float, float]:
    """E_J interval whose charge mobility lies inside [mu_lo, mu_hi]."""
    mu = _curve(charge)
    lo, hi = float(charge[0, 0]), float(charge[-1, 0])
    ends = sorted(_level_crossing(mu, lo, hi, level) for level in (mu_lo, mu_hi))
    return float(ends[0]), float(ends[1])


def _fixed_point(mapping, grid: np.ndarray, values: np.ndarray) -> Tuple[Optional[float], bool]:
    """First sign change of F(E) - E inside the domain; (None, True) when F is the identity there."""
    gap = values - grid
    if np.all(np.abs(gap) <= COINCIDENT_TOL * np.maximum(1.0, np.abs(grid))):
        return None, True
    sign = np.sign(gap)
    for i in range(1, len(grid) - 1):
        if sign[i] == 0 and sign[i - 1] * sign[i + 1] < 0:
            return float(grid[i]), False
    changes = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    if len(changes) == 0:
        return None, False
    i = int(changes[0])
    return _root(lambda e: float(mapping(e)) - e, float(grid[i]), float(grid[i + 1])), False


def extract_duality(charge_samples: Sequence[Sequence[float]],
                    flux_samples: Sequence[Sequence[float]]) -> DualityMap:
    """
    F(E_J) = mu_bar^-1(mu(E_J)) on the overlap of both mobility ranges, the
    self-dual point mu(E_J*) = 1/2 and the fixed point F(E) = E.
    """
    charge = _as_samples(charge_samples, "charge")
    flux = _as_samples(flux_samples, "flux")
    mu_lo, mu_hi = _overlap(charge, flux)
    lo, hi = _mu_domain(charge, mu_lo, mu_hi)
    mapping = _build_map(charge, flux)

    inside = charge[(charge[:, 0] >= lo) & (charge[:, 0] <= hi), 0]
    grid = np.unique(np.concatenate([inside, np.linspace(lo, hi, DENSE_POINTS)]))
    values = mapping(grid)
    keep = np.isfinite(values)
    grid, values = grid[keep], values[keep]

    mu = _curve(charge)
    self_dual = _root(lambda e: float(mu(e)) - HALF, charge[0, 0], charge[-1, 0])
    if self_dual is None:
        raise DualityExtractionError("mobility never crosses 1/2 on the sampled range",
                                     mu=charge[:, 1].tolist())
    fixed, coincident = _fixed_point(mapping, grid, values) if len(grid) > 1 else (None, False)
    logger.info(f"Duality map on E_J in [{lo:.4g}, {hi:.4g}]: E_J*={self_dual:.6g}, "
                f"fixed point={'identity' if coincident else fixed if fixed is None else round(fixed, 6)}")
    return DualityMap(
        charge_samples=charge,
        flux_samples=flux,
        domain=(lo, hi),
        map_grid=grid,
        map_values=values,
        self_dual_point=self_dual,
        fixed_point=fixed,
        coincident=coincident,
    )
