# oracle/bare.py
"""
Brute-force diagonalization in undisplaced bases: charge (or oscillator)
junction states times truncated Fock spaces. Slow but literal.
"""
from dataclasses import dataclass
from functools import reduce
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from circuit.builder import line_normal_modes
from circuit.spec import Boundary, CircuitSpec
from oracle.normal_modes import charge_oracle_bath
from polaron.eigensolver import EigenResult
from utils.errors import DomainError, OracleDimensionError
from utils.logger import setup_logger

logger = setup_logger(__name__)

DENSE_LIMIT = 3000


@dataclass(frozen=True)
class BareBasisSpec:
    fock_cutoffs: Tuple[int, ...]
    junction_cutoff: int
    max_dim: int = 20000

    @property
    def junction_dim(self) -> int:
        return self.junction_cutoff

    @property
    def dim(self) -> int:
        return self.junction_dim * int(np.prod(self.fock_cutoffs, dtype=np.int64))

    def check(self):
        if self.dim > self.max_dim:
            raise OracleDimensionError(self.dim, self.max_dim)


def _annihilation(dim: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, dim)), 1, shape=(dim, dim), format='csr')


def _embed(op, position: int, cutoffs: Sequence[int]) -> sp.csr_matrix:
    factors = [op if i == position else sp.identity(d, format='csr') for i, d in enumerate(cutoffs)]
    return reduce(lambda a, b: sp.kron(a, b, format='csr'), factors)


class _Photons:
    """Single-mode operators embedded in the multi-mode Fock space."""

    def __init__(self, cutoffs: Sequence[int]):
        self.cutoffs = list(cutoffs)
        self.dim = int(np.prod(self.cutoffs, dtype=np.int64))
        self.lowering: List[sp.csr_matrix] = [
            _embed(_annihilation(d), k, self.cutoffs) for k, d in enumerate(self.cutoffs)
        ]

    def identity(self):
        return sp.identity(self.dim, format='csr')

    def number_energy(self, frequencies) -> sp.csr_matrix:
        total = sp.csr_matrix((self.dim, self.dim))
        for w, a in zip(frequencies, self.lowering):
            total = total + w * (a.T @ a)
        return total

    def weighted_sum(self, weights, kind: str) -> sp.csr_matrix:
        """sum_k w_k (a^+ + a) for kind 'x', sum_k w_k i(a^+ - a) for kind 'p'."""
        total = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for w, a in zip(weights, self.lowering):
            if kind == "x":
                total = total + w * (a.T + a)
            else:
                total = total + 1j * w * (a.T - a)
        return total


def _solve(h: sp.csr_matrix, k: int) -> EigenResult:
    dim = h.shape[0]
    if k >= dim:
        raise DomainError(f"oracle asked for {k} levels of a {dim}-dimensional space", k=k, dim=dim)
    if dim <= DENSE_LIMIT:
        energies, vectors = scipy.linalg.eigh(h.toarray(), subset_by_index=[0, k - 1])
        solver = "dense"
    else:
        v0 = np.random.default_rng(1).standard_normal(dim).astype(h.dtype)
        energies, vectors = eigsh(h, k=k, which='SA', v0=v0, tol=1e-13)
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]
        solver = "lanczos"
    residuals = np.linalg.norm(h @ vectors - vectors * energies, axis=0)
    return EigenResult(np.asarray(energies, dtype=float), vectors, residuals, solver)


def dense_ed_charge(spec: CircuitSpec, bare: BareBasisSpec, k: int) -> EigenResult:
    """
    4E_C(N-nu)^2 - (E_J/2)(|N+1><N| + h.c.) + sum omega a^+a + i(N-nu) sum g(a^+ - a)
    with N in [-n_max, n_max], junction_cutoff = 2 n_max + 1.
    """
    if spec.boundary is not Boundary.OPEN:
        raise DomainError("charge oracle requires an open-ended circuit", boundary=spec.boundary.value)
    bare.check()
    frequencies, couplings = charge_oracle_bath(spec)
    if len(bare.fock_cutoffs) != len(frequencies):
        raise DomainError("one Fock cutoff per mode is required", modes=len(frequencies))
    n_max = (bare.junction_cutoff - 1) // 2
    offsets = np.arange(-n_max, n_max + 1) - spec.bias
    charge = sp.diags(offsets, format='csr')
    hop = sp.diags(np.ones(2 * n_max), -1, format='csr')
    junction = sp.diags(4.0 * spec.e_c * offsets ** 2) - 0.5 * spec.e_j * (hop + hop.T)

    photons = _Photons(bare.fock_cutoffs)
    h = sp.kron(junction, photons.identity()) \
        + sp.kron(sp.identity(len(offsets)), photons.number_energy(frequencies)) \
        + sp.kron(charge, photons.weighted_sum(couplings, "p"))
    logger.debug(f"Charge oracle: dim={h.shape[0]}")
    return _solve(h.tocsr(), k)


def _junction_oscillator(e_l: float, e_c: float, e_j: float, phi_x: float, dim: int):
    """(H_junction, phi, N) in the oscillator basis of (E_C, E_L); cos from a 2x larger phi."""
    omega0 = np.sqrt(8.0 * e_l * e_c)
    phi_zpf = (2.0 * e_c / e_l) ** 0.25
    big = 2 * dim
    lowering = np.diag(np.sqrt(np.arange(1, big)), 1)
    phi_big = phi_zpf * (lowering + lowering.T)
    grid, vectors = np.linalg.eigh(phi_big)
    cos_big = (vectors * np.cos(grid + 2.0 * np.pi * phi_x)) @ vectors.T
    a = lowering[:dim, :dim]
    phi = phi_zpf * (a + a.T)
    charge = 1j * (a.T - a) / (2.0 * phi_zpf)
    h = np.diag(omega0 * (np.arange(dim) + 0.5)) - e_j * cos_big[:dim, :dim]
    return h, phi, charge


def dense_ed_flux(spec: CircuitSpec, bare: BareBasisSpec, k: int, gauge: str = "flux") -> EigenResult:
    """
    gauge='flux': 4E_C N^2 + (E_L/2)phi^2 - E_J cos(phi + 2 pi phi_x) + sum Omega a^+a + phi sum f (a + a^+).
    gauge='charge': 4E_C (N + sum beta i(a^+ - a))^2 + (E_L~/2)phi^2 - E_J cos(...) + sum Omega a^+a,
    with beta = f/Omega and E_L~ = E_L - 2 sum f^2/Omega.
    """
    if spec.boundary is not Boundary.SHORT:
        raise DomainError("flux oracle requires a short-ended circuit", boundary=spec.boundary.value)
    if gauge not in ("flux", "charge"):
        raise DomainError(f"unknown gauge '{gauge}'", allowed="flux, charge")
    bare.check()
    modes = line_normal_modes(spec)
    if len(bare.fock_cutoffs) != modes.n_modes:
        raise DomainError("one Fock cutoff per mode is required", modes=modes.n_modes)
    photons = _Photons(bare.fock_cutoffs)
    n_j = bare.junction_cutoff
    identity_j = sp.identity(n_j, format='csr')
    bath_energy = sp.kron(identity_j, photons.number_energy(modes.frequencies))

    if gauge == "flux":
        junction, phi, _ = _junction_oscillator(spec.e_l, spec.e_c, spec.e_j, spec.bias, n_j)
        h = sp.kron(sp.csr_matrix(junction), photons.identity()) + bath_energy \
            + sp.kron(sp.csr_matrix(phi), photons.weighted_sum(modes.couplings, "x"))
    else:
        e_l_tilde = spec.e_l - 2.0 * float(np.sum(modes.couplings ** 2 / modes.frequencies))
        if e_l_tilde <= 0:
            raise DomainError("renormalized inductive energy is not positive", e_l_tilde=e_l_tilde)
        junction, _, charge = _junction_oscillator(e_l_tilde, spec.e_c, spec.e_j, spec.bias, n_j)
        momentum = photons.weighted_sum(modes.couplings / modes.frequencies, "p")
        h = sp.kron(sp.csr_matrix(junction), photons.identity()) + bath_energy \
            + 8.0 * spec.e_c * sp.kron(sp.csr_matrix(charge), momentum) \
            + 4.0 * spec.e_c * sp.kron(identity_j, momentum @ momentum)
    logger.debug(f"Flux oracle ({gauge} gauge): dim={h.shape[0]}")
    return _solve(h.tocsr(), k)
