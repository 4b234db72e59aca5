# analysis/bands.py
"""能带扫描: 只算 xi >= 0, 镜像到整个布里渊区, 线程池并行, 输出顺序确定."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from circuit.spec import CircuitSpec
from config.settings import NumericsConfig
from polaron.solver import solve_levels
from utils.errors import DomainError, DualityError, ReferenceLevelError
from utils.logger import setup_logger

logger = setup_logger(__name__)

REFERENCE_LEVEL = 2  # third level at zero bias


@dataclass(frozen=True)
class BandStructure:
    bias: np.ndarray            # xi_j on [-1/2, 1/2]
    energies: np.ndarray        # (n_points, n_bands), lowest band's global minimum at 0
    bias_name: str
    rescale_reference: Optional[float] = None
    failed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_bands(self) -> int:
        return self.energies.shape[1] if self.energies.ndim == 2 else 0

    def level_at(self, xi: float, level: int) -> float:
        idx = np.flatnonzero(np.isclose(self.bias, xi, atol=1e-12))
        if len(idx) == 0 or level >= self.n_bands:
            raise ReferenceLevelError(f"no level {level + 1} at bias {xi}", bias=xi, level=level + 1)
        value = self.energies[idx[0], level]
        if not np.isfinite(value):
            raise ReferenceLevelError(f"level {level + 1} at bias {xi} is missing", bias=xi, level=level + 1)
        return float(value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bias_name": self.bias_name,
            "bias": self.bias.tolist(),
            "energies": [[float(x) if np.isfinite(x) else None for x in row] for row in self.energies],
            "rescale_reference": self.rescale_reference,
            "failed": self.failed.tolist(),
            "metadata": self.metadata,
        }


def half_zone_grid(points: int) -> np.ndarray:
    return np.linspace(0.0, 0.5, points)


def mirror(half_bias: np.ndarray, half_values: np.ndarray):
    """xi >= 0 samples -> full zone, using E(-xi) = E(xi)."""
    keep = half_bias > 0
    bias = np.concatenate([-half_bias[keep][::-1], half_bias])
    values = np.concatenate([half_values[keep][::-1], half_values])
    return bias, values


def _levels_at(spec: CircuitSpec, numerics: NumericsConfig, n_bands: int, skip_failed: bool):
    try:
        energies = solve_levels(spec, numerics, n_bands)[0].energies
        if len(energies) < n_bands:
            energies = np.r_[energies, np.full(n_bands - len(energies), np.nan)]
        return energies, False
    except DualityError as e:
        if not skip_failed:
            raise
        logger.warning(f"Bias point {spec.bias} failed and is marked: {e}")
        return np.full(n_bands, np.nan), True


def band_sweep(spec: CircuitSpec, numerics: NumericsConfig, bias_grid: Sequence[float] = None,
               n_bands: int = 3, threads: int = 1, skip_failed: bool = False) -> BandStructure:
    """
    Lowest n_bands levels over the zone. ``bias_grid`` holds the xi >= 0
    points (default 41 on [0, 1/2]); results are mirrored to xi < 0.
    """
    half = np.asarray(half_zone_grid(41) if bias_grid is None else bias_grid, dtype=float)
    if np.any(half < 0) or np.any(half > 0.5):
        raise DomainError("bias grid must lie in [0, 1/2]", grid=half.tolist())
    half = np.unique(half)
    points = [spec.with_(bias=float(x)) for x in half]
    logger.info(f"Band sweep: {spec.boundary.value} circuit, z={spec.z_ratio}, E_J={spec.e_j}, "
                f"N_m={spec.n_modes}, {len(points)} points, {threads} threads")

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results: List = list(pool.map(lambda p: _levels_at(p, numerics, n_bands, skip_failed), points))

    half_energies = np.array([r[0] for r in results], dtype=float).reshape(len(points), n_bands)
    half_failed = np.array([r[1] for r in results], dtype=bool)
    bias, energies = mirror(half, half_energies)
    _, failed = mirror(half, half_failed)
    if np.all(np.isnan(energies[:, 0])):
        floor = 0.0
    else:
        floor = float(np.nanmin(energies[:, 0]))
    return BandStructure(
        bias=bias,
        energies=energies - floor,
        bias_name=spec.boundary.bias_name,
        failed=failed,
        metadata={"spec": spec.to_dict(), "ground_energy": floor},
    )


def rescale_bands(bands: BandStructure, reference: BandStructure) -> BandStructure:
    """Divide by the third level at zero bias of the critical-impedance run."""
    value = reference.level_at(0.0, REFERENCE_LEVEL)
    if value <= 0:
        raise ReferenceLevelError(f"rescale reference {value} is not positive", reference=value)
    return BandStructure(
        bias=bands.bias,
        energies=bands.energies / value,
        bias_name=bands.bias_name,
        rescale_reference=value,
        failed=bands.failed,
        metadata=dict(bands.metadata),
    )


def zone_edge_diagnostics(bands: BandStructure) -> Dict[str, float]:
    """First band width E_0(1/2) - E_0(0) and edge gap E_1(1/2) - E_0(1/2)."""
    width = bands.level_at(0.5, 0) - bands.level_at(0.0, 0)
    gap = bands.level_at(0.5, 1) - bands.level_at(0.5, 0) if bands.n_bands > 1 else float("nan")
    return {"band_width": width, "edge_gap": gap}


def impedance_scan(spec: CircuitSpec, numerics: NumericsConfig, z_grid: Sequence[float],
                   biases: Sequence[float] = (0.0, 0.5), n_levels: int = 3,
                   threads: int = 1) -> Dict[str, Any]:
    """Lowest levels versus impedance at fixed biases, relative to the ground state at the first bias."""
    jobs = [spec.with_(z_ratio=float(z), bias=float(b)) for z in z_grid for b in biases]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        levels = list(pool.map(lambda p: solve_levels(p, numerics, n_levels)[0].energies, jobs))
    table = np.array(levels).reshape(len(z_grid), len(biases), -1)
    return {
        "z_ratio": [float(z) for z in z_grid],
        "bias": [float(b) for b in biases],
        "levels": (table - table[:, :1, :1]).tolist(),
    }


def anticrossing_positions(bands: BandStructure, lower: int = 0) -> np.ndarray:
    """
    Bias values where the gap between bands ``lower`` and ``lower+1`` has a local minimum.
    The zone edges count too: bands are even and periodic, so an edge gap below
    its neighbour is a minimum.
    """
    gap = bands.energies[:, lower + 1] - bands.energies[:, lower]
    inner = np.flatnonzero((gap[1:-1] < gap[:-2]) & (gap[1:-1] <= gap[2:])) + 1
    edges = []
    if len(gap) > 1 and np.isclose(abs(bands.bias[0]), 0.5) and gap[0] < gap[1]:
        edges.append(0)
    if len(gap) > 1 and np.isclose(abs(bands.bias[-1]), 0.5) and gap[-1] < gap[-2]:
        edges.append(len(gap) - 1)
    return bands.bias[np.sort(np.r_[inner, edges].astype(int))]
