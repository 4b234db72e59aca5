# analysis/heatmap.py
"""迁移率曲线与 (Z, E_J) 热图: 每个点 = 能带扫描 + 归一化 + 拟合."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis.bands import BandStructure, band_sweep, rescale_bands
from analysis.mobility import MobilityFit, fit_mobility
from circuit.spec import Boundary, CircuitSpec
from config.settings import NumericsConfig
from utils.logger import setup_logger

logger = setup_logger(__name__)

CRITICAL_Z = 1.0


def reference_bands(spec: CircuitSpec, numerics: NumericsConfig) -> BandStructure:
    """Zero-bias levels of the same circuit at Z = R_q, the rescale reference."""
    return band_sweep(spec.with_(z_ratio=CRITICAL_Z, bias=0.0), numerics, bias_grid=[0.0], n_bands=3)


def mobility_at(spec: CircuitSpec, numerics: NumericsConfig, bias_grid: Sequence[float] = None,
                threads: int = 1, reference: Optional[BandStructure] = None,
                skip_failed: bool = False) -> Tuple[MobilityFit, BandStructure]:
    if reference is None:
        reference = reference_bands(spec, numerics)
    bands = band_sweep(spec, numerics, bias_grid=bias_grid, n_bands=3, threads=threads,
                       skip_failed=skip_failed)
    rescaled = rescale_bands(bands, reference)
    return fit_mobility(rescaled), rescaled


def mobility_curve(spec: CircuitSpec, numerics: NumericsConfig, e_j_grid: Sequence[float],
                   bias_grid: Sequence[float] = None, threads: int = 1,
                   skip_failed: bool = False) -> np.ndarray:
    """(E_J, mu) samples of one circuit type at fixed impedance."""
    samples = []
    for e_j in e_j_grid:
        point = spec.with_(e_j=float(e_j))
        fit, _ = mobility_at(point, numerics, bias_grid, threads, skip_failed=skip_failed)
        samples.append((float(e_j), fit.mu))
        logger.info(f"{spec.boundary.value} circuit z={spec.z_ratio} E_J={e_j}: mu={fit.mu:.6f}")
    return np.array(samples, dtype=float).reshape(-1, 2)


def dual_curves(spec: CircuitSpec, numerics: NumericsConfig, e_j_grid: Sequence[float],
                bias_grid: Sequence[float] = None, threads: int = 1,
                skip_failed: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Charge curve at z and flux curve at the dual impedance 1/z."""
    charge = spec.with_(boundary=Boundary.OPEN)
    flux = spec.with_(boundary=Boundary.SHORT, z_ratio=1.0 / spec.z_ratio)
    return (mobility_curve(charge, numerics, e_j_grid, bias_grid, threads, skip_failed),
            mobility_curve(flux, numerics, e_j_grid, bias_grid, threads, skip_failed))


@dataclass(frozen=True)
class MobilityHeatmap:
    z_ratio: np.ndarray
    e_j: np.ndarray
    mu: np.ndarray        # charge circuit at z
    mu_bar: np.ndarray    # flux circuit at 1/z
    flagged: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return [(float(z), float(e), float(self.mu[i, j]), float(self.mu_bar[i, j]))
                for i, z in enumerate(self.z_ratio) for j, e in enumerate(self.e_j)]

    def to_dict(self) -> Dict[str, Any]:
        def clean(table):
            return [[float(x) if np.isfinite(x) else None for x in row] for row in table]

        return {
            "z_ratio": self.z_ratio.tolist(),
            "e_j": self.e_j.tolist(),
            "mu": clean(self.mu),
            "mu_bar": clean(self.mu_bar),
            "flagged": self.flagged.tolist(),
            "metadata": self.metadata,
        }


def heatmap_sweep(spec: CircuitSpec, numerics: NumericsConfig, z_grid: Sequence[float],
                  e_j_grid: Sequence[float], bias_grid: Sequence[float] = None,
                  threads: int = 1, skip_failed: bool = False) -> MobilityHeatmap:
    """
    mu(Z, E_J) for the charge circuit and mu_bar(R_q^2/Z, E_J) for the flux
    circuit. References at Z = R_q depend on E_J and circuit type only, so
    they are computed once per column.
    """
    z_grid = np.asarray(z_grid, dtype=float)
    e_j_grid = np.asarray(e_j_grid, dtype=float)
    mu = np.full((len(z_grid), len(e_j_grid)), np.nan)
    mu_bar = np.full_like(mu, np.nan)
    flagged = np.zeros(mu.shape, dtype=bool)

    references: Dict[Tuple[str, float], BandStructure] = {}
    for j, e_j in enumerate(e_j_grid):
        for boundary in (Boundary.OPEN, Boundary.SHORT):
            references[(boundary.value, e_j)] = reference_bands(
                spec.with_(boundary=boundary, e_j=float(e_j)), numerics)

    for i, z in enumerate(z_grid):
        for j, e_j in enumerate(e_j_grid):
            charge = spec.with_(boundary=Boundary.OPEN, z_ratio=float(z), e_j=float(e_j))
            flux = spec.with_(boundary=Boundary.SHORT, z_ratio=1.0 / float(z), e_j=float(e_j))
            fit, _ = mobility_at(charge, numerics, bias_grid, threads,
                                 references[(Boundary.OPEN.value, e_j)], skip_failed)
            fit_bar, _ = mobility_at(flux, numerics, bias_grid, threads,
                                     references[(Boundary.SHORT.value, e_j)], skip_failed)
            mu[i, j], mu_bar[i, j] = fit.mu, fit_bar.mu
            flagged[i, j] = fit.flagged or fit_bar.flagged
        logger.info(f"Heatmap row z={z}: mu={np.round(mu[i], 4).tolist()}, mu_bar={np.round(mu_bar[i], 4).tolist()}")

    return MobilityHeatmap(
        z_ratio=z_grid,
        e_j=e_j_grid,
        mu=mu,
        mu_bar=mu_bar,
        flagged=flagged,
        metadata={"spec": spec.to_dict()},
    )
