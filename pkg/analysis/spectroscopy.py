# analysis/spectroscopy.py
"""
光子谱函数 D(omega).

Photon operators are taken back to the bare frame before the amplitudes are
formed: in the polaron basis a_k^+ = R_k^+ + s_k(junction), where s_k is the
junction-diagonal creation shift stored on the Hamiltonian (up to a global
phase, which drops out of |.|^2).
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence

import numpy as np
import scipy.sparse as sp

from circuit.spec import CircuitSpec
from config.settings import NumericsConfig
from polaron.hamiltonian import PolaronHamiltonian
from polaron.solver import assemble, diagonalize
from utils.errors import DomainError
from utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class SpectralFunction:
    omega: np.ndarray
    values: np.ndarray
    gamma: float
    bias: float
    transitions: np.ndarray      # E_n - E_G
    weights: np.ndarray          # sum_k |<E_n|a_k^+|G>|^2
    normalized: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega": self.omega.tolist(),
            "values": self.values.tolist(),
            "gamma": self.gamma,
            "bias": self.bias,
            "transitions": self.transitions.tolist(),
            "weights": self.weights.tolist(),
            "normalized": self.normalized,
            "metadata": self.metadata,
        }


def bare_creation_operators(h: PolaronHamiltonian):
    """a_k^+ for every mode on the full (uncompressed) |junction, n~> basis."""
    n_junction = h.creation_shift.shape[0]
    identity_j = sp.identity(n_junction, format='csr')
    identity_c = sp.identity(len(h.configs), format='csr')
    operators = []
    for k in range(h.creation_shift.shape[1]):
        shift = sp.diags(h.creation_shift[:, k])
        operators.append((sp.kron(identity_j, h.configs.creation_operator(k))
                          + sp.kron(shift, identity_c)).tocsr())
    return operators


def transition_weights(h: PolaronHamiltonian, vectors: np.ndarray) -> np.ndarray:
    """sum_k |<E_n|a_k^+|G>|^2 for every eigenvector column n."""
    states = h.expand(vectors)
    ground = states[:, 0]
    weights = np.zeros(states.shape[1])
    for op in bare_creation_operators(h):
        weights += np.abs(states.T @ (op @ ground)) ** 2
    return weights


def lorentzian_sum(omega: np.ndarray, transitions: np.ndarray, weights: np.ndarray,
                   gamma: float) -> np.ndarray:
    """sum_n w_n gamma^2 / (gamma^2 + (omega - dE_n)^2), unit peak height per term."""
    detuning = omega[:, None] - transitions[None, :]
    return (gamma ** 2 / (gamma ** 2 + detuning ** 2)) @ weights


def spectral_function(spec: CircuitSpec, numerics: NumericsConfig, omega_grid: Sequence[float],
                      gamma: float = None, n_states: int = None,
                      normalize: bool = False) -> SpectralFunction:
    """D(omega) at zero bias from the lowest n_states polaron eigenpairs."""
    gamma = numerics.gamma if gamma is None else float(gamma)
    if gamma <= 0:
        raise DomainError("linewidth must be positive", gamma=gamma)
    n_states = n_states or numerics.n_states
    omega = np.asarray(omega_grid, dtype=float)
    point = spec.with_(bias=0.0)

    h = assemble(point, numerics)
    # diagonalize raises EigenSolverError when residuals exceed residual_tol * |H|_1
    result = diagonalize(h, numerics, n_states, return_vectors=True)

    transitions = result.energies - result.energies[0]
    weights = transition_weights(h, result.vectors)
    values = lorentzian_sum(omega, transitions, weights, gamma)
    if normalize and values.size and values.max() > 0:
        values = values / values.max()
    logger.info(f"Spectral function: {spec.boundary.value} circuit, E_J={spec.e_j}, z={spec.z_ratio}, "
                f"{len(transitions)} states, total weight {weights.sum():.6g}")
    return SpectralFunction(
        omega=omega,
        values=values,
        gamma=gamma,
        bias=0.0,
        transitions=transitions,
        weights=weights,
        normalized=normalize,
        metadata={"spec": point.to_dict(), "dim": h.dim, "solver": result.solver},
    )
