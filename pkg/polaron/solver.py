# polaron/solver.py
"""从电路参数到最低能级: 组装并对角化极化子哈密顿量."""
from dataclasses import replace
from typing import Dict, Sequence, Tuple

import numpy as np

from circuit.builder import charge_gauge_bath, line_normal_modes
from circuit.spec import Boundary, CircuitSpec
from config.settings import NumericsConfig
from polaron.configs import build_photon_configs
from polaron.eigensolver import EigenResult, lowest_eigs
from polaron.hamiltonian import PolaronHamiltonian, build_charge_hamiltonian, build_flux_hamiltonian
from utils.logger import setup_logger

logger = setup_logger(__name__)


def photon_cutoff(spec: CircuitSpec, numerics: NumericsConfig) -> float:
    if numerics.e_cut is not None:
        return numerics.e_cut
    return numerics.e_cut_delta * spec.delta


def assemble(spec: CircuitSpec, numerics: NumericsConfig) -> PolaronHamiltonian:
    modes = line_normal_modes(spec)
    e_cut = photon_cutoff(spec, numerics)
    if spec.boundary is Boundary.OPEN:
        bath = charge_gauge_bath(modes, spec)
        configs = build_photon_configs(bath.frequencies, e_cut, max_configs=numerics.max_basis)
        return build_charge_hamiltonian(spec, bath, configs, numerics.n_max, n_bands=numerics.n_bands,
                                        drop_tol=numerics.drop_tol, max_dim=numerics.max_basis)
    configs = build_photon_configs(modes.frequencies, e_cut, max_configs=numerics.max_basis)
    return build_flux_hamiltonian(spec, modes, configs, numerics.n_lev, grid_factor=numerics.grid_factor,
                                  drop_tol=numerics.drop_tol, max_dim=numerics.max_basis)


def diagonalize(h: PolaronHamiltonian, numerics: NumericsConfig, n_levels: int,
                return_vectors: bool = False) -> EigenResult:
    k = min(n_levels, h.dim)
    return lowest_eigs(
        h, k,
        dense_threshold=numerics.dense_threshold,
        tol=numerics.eig_tol,
        max_iter=numerics.max_iter,
        shift_invert=numerics.shift_invert,
        residual_tol=numerics.residual_tol,
        return_vectors=return_vectors,
    )


def solve_levels(spec: CircuitSpec, numerics: NumericsConfig, n_levels: int = None,
                 return_vectors: bool = False) -> Tuple[EigenResult, PolaronHamiltonian]:
    h = assemble(spec, numerics)
    result = diagonalize(h, numerics, n_levels or numerics.n_levels, return_vectors=return_vectors)
    logger.debug(f"{spec.boundary.value} circuit at bias {spec.bias}: E0={result.energies[0]:.10g} (dim {h.dim})")
    return result, h


def doubled_cutoffs(spec: CircuitSpec, numerics: NumericsConfig) -> Dict[str, NumericsConfig]:
    """每个截断单独加倍"""
    variants = {}
    if numerics.e_cut is not None:
        variants["e_cut"] = replace(numerics, e_cut=2.0 * numerics.e_cut)
    else:
        variants["e_cut"] = replace(numerics, e_cut_delta=2.0 * numerics.e_cut_delta)
    if spec.boundary is Boundary.OPEN:
        variants["n_max"] = replace(numerics, n_max=2 * numerics.n_max)
    else:
        variants["n_lev"] = replace(numerics, n_lev=2 * numerics.n_lev)
    return variants


def convergence_audit(spec: CircuitSpec, numerics: NumericsConfig, biases: Sequence[float] = (0.0, 0.5),
                      n_levels: int = None) -> Dict[str, float]:
    """Maximum level shift, per cutoff, when that cutoff is doubled."""
    n_levels = n_levels or numerics.n_levels
    report = {}
    for bias in biases:
        point = spec.with_(bias=bias)
        base = solve_levels(point, numerics, n_levels)[0].energies
        for name, variant in doubled_cutoffs(point, numerics).items():
            shifted = solve_levels(point, variant, n_levels)[0].energies
            k = min(len(base), len(shifted))
            shift = float(np.max(np.abs(shifted[:k] - base[:k])))
            report[name] = max(report.get(name, 0.0), shift)
            logger.info(f"Audit {name} at bias {bias}: max level shift {shift:.3e}")
    return report
