# junction/transmon.py
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from utils.errors import CutoffSaturationError
from utils.logger import setup_logger

logger = setup_logger(__name__)

BOUNDARY_THRESHOLD = 1e-10
N_MAX_LIMIT = 512


@dataclass(frozen=True)
class TransmonEigs:
    quasicharge: float
    charge_cutoff: int
    energies: np.ndarray
    vectors: np.ndarray

    @property
    def charges(self) -> np.ndarray:
        return np.arange(-self.charge_cutoff, self.charge_cutoff + 1)


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """每列最大分量取正, 保证结果可复现"""
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def transmon_hamiltonian_bands(e_c: float, e_j: float, nu: float, n_max: int):
    """Diagonal and off-diagonal of 4E_C(N-nu)^2 - (E_J/2)(|N+1><N| + h.c.)."""
    charges = np.arange(-n_max, n_max + 1)
    diagonal = 4.0 * e_c * (charges - nu) ** 2
    off_diagonal = np.full(2 * n_max, -0.5 * e_j)
    return diagonal, off_diagonal


def _solve(e_c, e_j, nu, n_max, n_levels):
    diagonal, off_diagonal = transmon_hamiltonian_bands(e_c, e_j, nu, n_max)
    energies, vectors = eigh_tridiagonal(
        diagonal, off_diagonal, select='i', select_range=(0, n_levels - 1)
    )
    return energies, vectors


def transmon_eigs(e_c: float, e_j: float, nu: float, n_max: int = 12, n_levels: int = 6,
                  grow: bool = True, n_max_limit: int = N_MAX_LIMIT) -> TransmonEigs:
    """
    Lowest transmon levels in the charge basis N in [-n_max, n_max].

    With ``grow`` the cutoff doubles until every kept eigenvector has
    amplitude below 1e-10 on the boundary charges.
    """
    n_max = max(int(n_max), (n_levels + 1) // 2)
    while True:
        energies, vectors = _solve(e_c, e_j, nu, n_max, n_levels)
        boundary = float(max(np.abs(vectors[0]).max(), np.abs(vectors[-1]).max()))
        if boundary < BOUNDARY_THRESHOLD or not grow:
            break
        if 2 * n_max > n_max_limit:
            raise CutoffSaturationError(
                f"transmon charge cutoff saturated at N_max={n_max}", n_max, boundary
            )
        logger.debug(f"Growing transmon cutoff {n_max} -> {2 * n_max} (boundary {boundary:.2e})")
        n_max *= 2
    return TransmonEigs(
        quasicharge=nu,
        charge_cutoff=n_max,
        energies=energies,
        vectors=fix_phases(vectors),
    )
