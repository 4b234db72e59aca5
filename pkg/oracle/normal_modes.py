# oracle/normal_modes.py
"""Quadratic-form oracles: full-circuit normal modes and Williamson frequencies."""
from typing import Tuple

import numpy as np
import scipy.linalg

from circuit.builder import BathModes, build_matrices, line_normal_modes
from circuit.spec import Boundary, CircuitSpec
from utils.errors import DomainError


def full_circuit_normal_modes(spec: CircuitSpec) -> np.ndarray:
    """
    Simultaneous diagonalization of the full C, Gamma pencil (junction node
    included, E_J = 0). The open circuit's zero mode is dropped.
    """
    capacitance, inductance = build_matrices(spec)
    omega_sq = scipy.linalg.eigh(inductance, capacitance, eigvals_only=True)
    if spec.boundary is Boundary.OPEN:
        omega_sq = omega_sq[1:]
    return np.sqrt(np.clip(omega_sq, 0.0, None))


def symplectic_frequencies(hessian: np.ndarray) -> np.ndarray:
    """
    Normal frequencies of H = z.hessian.z/2 with z = (x_1..x_n, p_1..p_n):
    the positive imaginary parts of the eigenvalues of J.hessian.
    """
    hessian = np.asarray(hessian, dtype=float)
    n = hessian.shape[0] // 2
    j = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    eigenvalues = np.linalg.eigvals(j @ hessian)
    positive = np.sort(eigenvalues.imag[eigenvalues.imag > 0])
    return positive[:n]


def williamson_frequencies(stiffness: np.ndarray, inverse_mass: np.ndarray) -> np.ndarray:
    """Frequencies of x.K.x/2 + p.M.p/2 from the symmetric product M^1/2 K M^1/2."""
    root = scipy.linalg.sqrtm(inverse_mass).real
    return np.sqrt(np.clip(np.linalg.eigvalsh(root @ stiffness @ root), 0.0, None))


def charge_bath_hessian(modes: BathModes, e_c: float) -> np.ndarray:
    """Quadrature Hessian of sum Omega a^+a + 4E_C (sum beta_i i(a^+ - a))^2."""
    beta = modes.couplings / modes.frequencies
    stiffness = np.diag(modes.frequencies)
    inverse_mass = np.diag(modes.frequencies) + 16.0 * e_c * np.outer(beta, beta)
    return scipy.linalg.block_diag(stiffness, inverse_mass)


def flux_loop_hessian(spec: CircuitSpec, modes: BathModes) -> np.ndarray:
    """
    Hessian in (phi, x_i; N, p_i) of 4E_C N^2 + (E_L/2) phi^2 + sum Omega a^+a
    + phi sum f_i (a_i + a_i^+), the E_J = 0 flux circuit.
    """
    n = modes.n_modes
    stiffness = np.zeros((n + 1, n + 1))
    stiffness[0, 0] = spec.e_l
    stiffness[0, 1:] = stiffness[1:, 0] = np.sqrt(2.0) * modes.couplings
    stiffness[1:, 1:] = np.diag(modes.frequencies)
    inverse_mass = np.diag(np.r_[8.0 * spec.e_c, modes.frequencies])
    return scipy.linalg.block_diag(stiffness, inverse_mass)


def charge_oracle_bath(spec: CircuitSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    (omega_k, |g_k|) of the charge-gauge bath without a Bogoliubov rotation.

    omega_k are the nonzero normal modes of the full C, Gamma pencil. Each
    coupling follows from the secular function s(l) = sum_i u_i^2/(Omega_i^2 - l),
    u_i^2 = f_i^2/Omega_i, as g_k^2 = 1/(4 omega_k s'(omega_k^2)). The sign of g_k
    is a per-mode parity and does not change the spectrum.
    """
    if spec.boundary is not Boundary.OPEN:
        raise DomainError("charge-gauge bath requires an open-ended line", boundary=spec.boundary.value)
    modes = line_normal_modes(spec)
    frequencies = full_circuit_normal_modes(spec)
    u_sq = modes.couplings ** 2 / modes.frequencies
    detuning = modes.frequencies[None, :] ** 2 - frequencies[:, None] ** 2
    slope = np.sum(u_sq[None, :] / detuning ** 2, axis=1)
    return frequencies, np.sqrt(1.0 / (4.0 * frequencies * slope))
