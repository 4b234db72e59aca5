# junction/fluxonium.py
"""
Fluxonium-like junction (E_L/2) phi^2 + 4 E_C N^2 - E_J cos(phi + 2 pi phi_x)
solved in the eigenbasis of its quadratic part.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from junction.transmon import fix_phases
from polaron.overlaps import displacement_matrix
from utils.errors import CutoffSaturationError, DomainError
from utils.logger import setup_logger

logger = setup_logger(__name__)

MAX_CUTOFF = 768  # Laguerre closed form overflows beyond ~1000 levels
TAIL_CONVERGED = 1e-16


@dataclass(frozen=True)
class FluxoniumEigs:
    e_l: float
    flux_bias: float
    oscillator_cutoff: int
    energies: np.ndarray
    vectors: np.ndarray
    phi_zpf: float
    omega0: float

    def phase_operator(self) -> np.ndarray:
        """phi = phi_zpf (a + a^+) in the oscillator basis."""
        return phi_matrix(self.oscillator_cutoff, self.phi_zpf)

    def tail_weight(self, fraction: float = 0.125) -> float:
        """Largest weight any kept state puts on the top oscillator levels."""
        start = int(self.oscillator_cutoff * (1.0 - fraction))
        return float(np.max(np.sum(self.vectors[start:] ** 2, axis=0)))


def oscillator_scales(e_l: float, e_c: float):
    """(omega0, phi_zpf) = (sqrt(8 E_L E_C), (2 E_C / E_L)^(1/4))."""
    return math.sqrt(8.0 * e_l * e_c), (2.0 * e_c / e_l) ** 0.25


def phi_matrix(dim: int, phi_zpf: float) -> np.ndarray:
    off = phi_zpf * np.sqrt(np.arange(1, dim))
    return np.diag(off, 1) + np.diag(off, -1)


def cosine_matrix(dim: int, phi_zpf: float, shift: float) -> np.ndarray:
    """cos(phi + shift) = Re(e^{i shift} D(i phi_zpf)), real symmetric."""
    return (np.exp(1j * shift) * displacement_matrix(1j * phi_zpf, dim)).real


def fluxonium_hamiltonian(e_l: float, e_c: float, e_j: float, phi: float, dim: int) -> np.ndarray:
    omega0, phi_zpf = oscillator_scales(e_l, e_c)
    h = np.diag(omega0 * (np.arange(dim) + 0.5))
    if e_j:
        h -= e_j * cosine_matrix(dim, phi_zpf, 2.0 * np.pi * phi)
    return h


def _solve(e_l, e_c, e_j, phi, dim, n_levels):
    h = fluxonium_hamiltonian(e_l, e_c, e_j, phi, dim)
    return scipy.linalg.eigh(h, subset_by_index=[0, n_levels - 1])


def fluxonium_eigs(e_l: float, e_c: float, e_j: float, phi: float,
                   oscillator_cutoff: Optional[int] = None, n_levels: int = 6,
                   auto: bool = True, tol: float = 1e-9,
                   max_cutoff: int = MAX_CUTOFF) -> FluxoniumEigs:
    """
    Lowest ``n_levels`` fluxonium levels. With ``auto`` the oscillator cutoff
    doubles until the kept levels move less than ``tol`` (relative).
    """
    if e_l <= 0:
        raise DomainError("fluxonium requires e_l > 0", e_l=e_l)
    omega0, phi_zpf = oscillator_scales(e_l, e_c)
    dim = max(int(oscillator_cutoff or 0), 4 * n_levels, 32)
    energies, vectors = _solve(e_l, e_c, e_j, phi, dim, n_levels)

    while auto:
        weight = float(np.max(np.sum(vectors[-(dim // 8):] ** 2, axis=0)))
        if weight < TAIL_CONVERGED:
            break
        if 2 * dim > max_cutoff:
            raise CutoffSaturationError(
                f"fluxonium levels not converged at oscillator cutoff {dim}", dim, weight
            )
        new_energies, new_vectors = _solve(e_l, e_c, e_j, phi, 2 * dim, n_levels)
        scale = np.maximum(np.abs(new_energies), omega0)
        shift = float(np.max(np.abs(new_energies - energies) / scale))
        dim *= 2
        energies, vectors = new_energies, new_vectors
        if shift < tol:
            break
        logger.debug(f"Fluxonium cutoff grown to {dim} (level shift {shift:.2e})")

    return FluxoniumEigs(
        e_l=e_l,
        flux_bias=phi,
        oscillator_cutoff=dim,
        energies=energies,
        vectors=fix_phases(vectors),
        phi_zpf=phi_zpf,
        omega0=omega0,
    )
