# polaron/hamiltonian.py
"""
Polaron-frame Hamiltonians of both circuits.

Charge circuit: basis |N, n~> with photon displacement alpha_N = -i (N - nu) g/omega.
The photon states are rotated |n~> -> i^|n| |n~> so every hop element is real.
Flux circuit: basis |phi_j, n~> on the discrete phase grid spanned by the
lowest fluxonium eigenstates, displacement alpha_j = -phi_j f/Omega.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from circuit.builder import BathModes, ChargeGaugeBath
from circuit.spec import Boundary, CircuitSpec
from junction.fluxonium import fluxonium_eigs
from junction.transmon import transmon_eigs
from polaron.configs import PhotonConfigSet
from polaron.overlaps import displacement_matrix, rotated_charge_overlaps
from utils.errors import BasisOverflowError, DomainError, GridResolutionError
from utils.logger import setup_logger

logger = setup_logger(__name__)

ROW_CHUNK = 512
TAIL_TOLERANCE = 1e-8
MIN_GRID_SPACING = 1e-8


@dataclass(frozen=True)
class PolaronHamiltonian:
    matrix: sp.csr_matrix
    kind: str
    bias: float
    junction_dim: int
    configs: PhotonConfigSet
    creation_shift: np.ndarray
    junction_transform: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def asymmetry(self) -> float:
        diff = self.matrix - self.matrix.T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def expand(self, vectors: np.ndarray) -> np.ndarray:
        """Map vectors of a compressed junction basis back to |N, n~>."""
        if self.junction_transform is None:
            return vectors
        n_conf = len(self.configs)
        blocks = vectors.reshape(self.junction_transform.shape[1], n_conf, -1)
        return np.einsum('jb,bcv->jcv', self.junction_transform, blocks).reshape(-1, vectors.shape[1])


def _product_overlaps(configs: PhotonConfigSet, tables, rows: slice) -> np.ndarray:
    """prod_k table_k[m_k, n_k] for config rows m in ``rows`` and all columns n."""
    occ = configs.configs
    block = np.ones((len(range(*rows.indices(len(occ)))), len(occ)))
    for k, table in enumerate(tables):
        block *= table[occ[rows, k][:, None], occ[None, :, k]]
    return block


def _sparse_product(configs: PhotonConfigSet, tables, drop_tol: float) -> sp.csr_matrix:
    n_conf = len(configs)
    rows, cols, vals = [], [], []
    for start in range(0, n_conf, ROW_CHUNK):
        chunk = slice(start, min(start + ROW_CHUNK, n_conf))
        block = _product_overlaps(configs, tables, chunk)
        r, c = np.nonzero(np.abs(block) > drop_tol)
        rows.append(r + start)
        cols.append(c)
        vals.append(block[r, c])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_conf, n_conf),
    )


def _check_size(dim: int, max_dim: Optional[int]):
    if max_dim is not None and dim > max_dim:
        raise BasisOverflowError(dim, max_dim, what="polaron Hamiltonian")


def build_charge_hamiltonian(spec: CircuitSpec, bath: ChargeGaugeBath, configs: PhotonConfigSet,
                             n_max: int, n_bands: Optional[int] = None, drop_tol: float = 1e-14,
                             max_dim: Optional[int] = None) -> PolaronHamiltonian:
    """电荷电路: 对角 4E_C~(N-nu)^2 + sum n omega, N -> N+1 的跳跃为 -(E_J/2) J"""
    if spec.boundary is not Boundary.OPEN:
        raise DomainError("charge Hamiltonian requires an open-ended circuit", boundary=spec.boundary.value)
    nu = spec.bias
    charges = np.arange(-n_max, n_max + 1)
    n_charge = len(charges)
    n_conf = len(configs)
    _check_size(n_charge * n_conf, max_dim)

    offsets = charges - nu
    diagonal = np.kron(4.0 * bath.e_c_tilde * offsets ** 2, np.ones(n_conf)) \
        + np.kron(np.ones(n_charge), configs.energies)
    matrix = sp.diags(diagonal).tocsr()

    if spec.e_j > 0:
        occ_max = configs.configs.max(axis=0) if n_conf else np.zeros(0, dtype=int)
        tables = [rotated_charge_overlaps(x, int(top) + 1) for x, top in zip(bath.displacements, occ_max)]
        hop = _sparse_product(configs, tables, drop_tol)
        raise_charge = sp.diags(np.ones(n_charge - 1), -1, shape=(n_charge, n_charge))
        upper = sp.kron(raise_charge, hop, format='csr')
        matrix = (matrix - 0.5 * spec.e_j * (upper + upper.T)).tocsr()

    shift = -np.outer(offsets, bath.displacements)
    transform = None
    if n_bands is not None and n_bands < n_charge:
        e_j_tilde = spec.e_j * bath.josephson_suppression
        transform = transmon_eigs(bath.e_c_tilde, e_j_tilde, nu, n_max=n_max,
                                  n_levels=n_bands, grow=False).vectors
        projector = sp.kron(sp.csr_matrix(transform), sp.identity(n_conf), format='csr')
        matrix = (projector.T @ matrix @ projector).tocsr()

    logger.debug(
        f"Charge polaron Hamiltonian: N_max={n_max}, configs={n_conf}, dim={matrix.shape[0]}, nnz={matrix.nnz}"
    )
    return PolaronHamiltonian(
        matrix=matrix,
        kind="charge",
        bias=nu,
        junction_dim=n_charge if transform is None else transform.shape[1],
        configs=configs,
        creation_shift=shift,
        junction_transform=transform,
        metadata={"spec": spec.to_dict(), "n_max": n_max, "n_bands": n_bands,
                  "e_cut": configs.energy_cutoff},
    )


def flux_grid(spec: CircuitSpec, n_lev: int, grid_factor: int = 8):
    """
    Phase grid phi_j = eigenvalues of phi projected on the lowest n_lev
    fluxonium states, and the junction Hamiltonian on that grid.
    """
    flux = fluxonium_eigs(spec.e_l, spec.e_c, spec.e_j, spec.bias,
                          oscillator_cutoff=grid_factor * n_lev, n_levels=n_lev)
    tail = flux.tail_weight()
    if tail > TAIL_TOLERANCE:
        raise GridResolutionError(f"fluxonium states not resolved by the oscillator basis (tail {tail:.2e})",
                                  tail_weight=tail)
    projected = flux.vectors.T @ flux.phase_operator() @ flux.vectors
    grid, rotation = scipy.linalg.eigh(projected)
    spacing = float(np.min(np.diff(grid))) if len(grid) > 1 else np.inf
    if spacing < MIN_GRID_SPACING:
        raise GridResolutionError(f"degenerate phase grid (spacing {spacing:.2e})", spacing=spacing)
    junction = rotation.T @ np.diag(flux.energies) @ rotation
    return grid, junction


def build_flux_hamiltonian(spec: CircuitSpec, modes: BathModes, configs: PhotonConfigSet,
                           n_lev: int, grid_factor: int = 8, drop_tol: float = 1e-14,
                           max_dim: Optional[int] = None) -> PolaronHamiltonian:
    """磁通电路: 相位网格上的结哈密顿量 ⊗ 实位移重叠"""
    if spec.boundary is not Boundary.SHORT:
        raise DomainError("flux Hamiltonian requires a short-ended circuit", boundary=spec.boundary.value)
    n_conf = len(configs)
    _check_size(n_lev * n_conf, max_dim)
    grid, junction = flux_grid(spec, n_lev, grid_factor)

    beta = modes.couplings / modes.frequencies
    alpha = -np.outer(grid, beta)
    polaron_shift = float(np.sum(modes.couplings ** 2 / modes.frequencies))
    occ_max = configs.configs.max(axis=0) if n_conf else np.zeros(0, dtype=int)

    rows, cols, vals = [], [], []
    diagonal = np.concatenate([
        junction[j, j] - polaron_shift * grid[j] ** 2 + configs.energies for j in range(n_lev)
    ])
    rows.append(np.arange(n_lev * n_conf))
    cols.append(np.arange(n_lev * n_conf))
    vals.append(diagonal)

    for j in range(n_lev):
        for jp in range(j + 1, n_lev):
            weight = junction[jp, j]
            if abs(weight) <= drop_tol:
                continue
            gamma = alpha[j] - alpha[jp]
            tables = [displacement_matrix(g, int(top) + 1) for g, top in zip(gamma, occ_max)]
            block = _sparse_product(configs, tables, drop_tol).tocoo()
            data = weight * block.data
            # block (jp, j) and its transpose (j, jp)
            rows += [block.row + jp * n_conf, block.col + j * n_conf]
            cols += [block.col + j * n_conf, block.row + jp * n_conf]
            vals += [data, data]

    dim = n_lev * n_conf
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    logger.debug(f"Flux polaron Hamiltonian: N_lev={n_lev}, configs={n_conf}, dim={dim}, nnz={matrix.nnz}")
    return PolaronHamiltonian(
        matrix=matrix,
        kind="flux",
        bias=spec.bias,
        junction_dim=n_lev,
        configs=configs,
        creation_shift=alpha,
        metadata={"spec": spec.to_dict(), "n_lev": n_lev, "grid_factor": grid_factor,
                  "e_cut": configs.energy_cutoff, "phase_grid": grid.tolist()},
    )
