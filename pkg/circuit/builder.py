# circuit/builder.py
"""
线路矩阵、线路本征模式以及电荷规范下的 Bogoliubov 转动。

All matrices are expressed in units of the junction capacitance C_J:
capacitance = diag(1, c, ..., c) with c = C/C_J and inductance matrix
Gamma = (2 E_C/e^2)(1/L) T, where T carries the junction row [1, -1],
interior diagonal 2 and boundary entry B (1 open, 2 short).
"""
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import scipy.linalg

from circuit.spec import Boundary, CircuitSpec, E_SQUARED
from utils.errors import BogoliubovError, CircuitBuildError, DomainError
from utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class BathModes:
    frequencies: np.ndarray
    couplings: np.ndarray
    boundary: Boundary
    inductive_scale: float
    vectors: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    def sum_rule_residual(self) -> float:
        """Phi0^2/(2L) - sum f^2/Omega: zero for the open line."""
        return self.inductive_scale - float(np.sum(self.couplings ** 2 / self.frequencies))


@dataclass(frozen=True)
class ChargeGaugeBath:
    frequencies: np.ndarray
    couplings: np.ndarray
    e_c_tilde: float
    josephson_suppression: float
    rotation: np.ndarray

    @property
    def displacements(self) -> np.ndarray:
        """g_k / omega_k, the photon shift per unit of island charge."""
        return self.couplings / self.frequencies


def _tridiagonal(n_nodes: int, boundary_entry: int) -> np.ndarray:
    t = np.zeros((n_nodes, n_nodes))
    idx = np.arange(n_nodes)
    t[idx, idx] = 2.0
    t[idx[:-1], idx[:-1] + 1] = -1.0
    t[idx[:-1] + 1, idx[:-1]] = -1.0
    t[0, 0] = 1.0
    t[-1, -1] = float(boundary_entry)
    return t


def build_matrices(spec: CircuitSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Full (N_m+1)x(N_m+1) capacitance and inductance matrices; node 0 is the junction island."""
    n = spec.n_modes + 1
    capacitance = np.diag(np.r_[1.0, np.full(spec.n_modes, spec.capacitance_ratio)])
    scale = (2.0 * spec.e_c / E_SQUARED) / spec.inductance
    inductance = scale * _tridiagonal(n, spec.boundary.entry)
    return capacitance, inductance


def _condition_report(capacitance: np.ndarray, inductance: np.ndarray) -> Dict[str, float]:
    return {
        "cond_capacitance": float(np.linalg.cond(capacitance)),
        "cond_inductance": float(np.linalg.cond(inductance)),
    }


def line_normal_modes(spec: CircuitSpec) -> BathModes:
    """解线路子矩阵的广义本征问题, 返回 Omega_i 与 f_i (P_1i >= 0)"""
    capacitance, inductance = build_matrices(spec)
    c_line = capacitance[1:, 1:]
    g_line = inductance[1:, 1:]
    try:
        omega_sq, vectors = scipy.linalg.eigh(g_line, c_line)
    except (np.linalg.LinAlgError, ValueError) as e:
        report = _condition_report(c_line, g_line)
        logger.error(f"Line normal modes failed for N_m={spec.n_modes}: {e}; {report}")
        raise CircuitBuildError(f"generalized eigenproblem failed: {e}", report)
    if np.any(omega_sq <= 0):
        raise CircuitBuildError("non-positive line frequency", _condition_report(c_line, g_line))

    signs = np.where(vectors[0] < 0, -1.0, 1.0)
    vectors = vectors * signs
    frequencies = np.sqrt(omega_sq)
    couplings = spec.e_l * np.sqrt(4.0 * spec.e_c / frequencies) * vectors[0]
    logger.debug(
        f"Line modes ({spec.boundary.value}, N_m={spec.n_modes}): "
        f"Omega_1={frequencies[0]:.6g}, Omega_max={frequencies[-1]:.6g}"
    )
    return BathModes(
        frequencies=frequencies,
        couplings=couplings,
        boundary=spec.boundary,
        inductive_scale=0.5 * spec.e_l,
        vectors=vectors,
    )


def charge_gauge_bath(modes: BathModes, spec: CircuitSpec) -> ChargeGaugeBath:
    """
    Symplectic diagonalization of sum Omega a^+a + 4E_C (sum beta_i i(a^+ - a))^2.

    With quadratures x, p the form is x.A.x/2 + p.B.p/2, A = diag(Omega),
    B = A + 16 E_C beta beta^T, beta = f/Omega. The normal frequencies are
    the square roots of the eigenvalues of A^1/2 B A^1/2.
    """
    if spec.boundary is not Boundary.OPEN:
        raise DomainError("charge gauge bath requires an open-ended line", boundary=spec.boundary.value)
    omega_line = modes.frequencies
    u = modes.couplings / np.sqrt(omega_line)
    hessian = np.diag(omega_line ** 2) + 16.0 * spec.e_c * np.outer(u, u)
    omega_sq, rotation = scipy.linalg.eigh(hessian)
    if np.any(omega_sq <= 0) or not np.all(np.isfinite(omega_sq)):
        raise BogoliubovError("symplectic diagonalization gave non-positive frequencies",
                              smallest=float(omega_sq.min()))
    frequencies = np.sqrt(omega_sq)
    weights = (rotation.T @ u) / np.sqrt(frequencies)
    signs = np.where(weights < 0, -1.0, 1.0)
    rotation = rotation * signs
    couplings = 8.0 * spec.e_c * weights * signs

    # Sherman-Morrison: sum g^2/omega = 64 E_C^2 s/(1 + 16 E_C s), s = sum f^2/Omega^3
    s = float(np.sum(modes.couplings ** 2 / omega_line ** 3))
    e_c_tilde = spec.e_c / (1.0 + 16.0 * spec.e_c * s)
    suppression = float(np.exp(-0.5 * np.sum((couplings / frequencies) ** 2)))
    logger.debug(f"Charge gauge bath: E_C~={e_c_tilde:.6g}, E_J suppression={suppression:.6g}")
    return ChargeGaugeBath(
        frequencies=frequencies,
        couplings=couplings,
        e_c_tilde=e_c_tilde,
        josephson_suppression=suppression,
        rotation=rotation,
    )


def low_frequency_coupling(omega, spec: CircuitSpec):
    """Low-frequency estimate of g^2: 2 Delta z omega / (1 + pi omega z / (4 E_C))."""
    omega = np.asarray(omega, dtype=float)
    return 2.0 * spec.delta * spec.z_ratio * omega / (1.0 + np.pi * omega * spec.z_ratio / (4.0 * spec.e_c))
