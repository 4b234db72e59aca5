# polaron/eigensolver.py
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh
from scipy.sparse.linalg import norm as sparse_norm

from utils.errors import DomainError, EigenSolverError
from utils.logger import setup_logger

logger = setup_logger(__name__)

DENSE_THRESHOLD = 2000


@dataclass(frozen=True)
class EigenResult:
    energies: np.ndarray
    vectors: Optional[np.ndarray]
    residuals: np.ndarray
    solver: str

    def drop_vectors(self) -> "EigenResult":
        return EigenResult(self.energies, None, self.residuals, self.solver)


def _as_operator(h):
    return getattr(h, "matrix", h)


def _norm(matrix) -> float:
    if sp.issparse(matrix):
        return float(sparse_norm(matrix, ord=1)) or 1.0
    return float(np.linalg.norm(matrix, ord=1)) or 1.0


def _residuals(matrix, energies, vectors) -> np.ndarray:
    applied = matrix @ vectors
    return np.linalg.norm(applied - vectors * energies, axis=0)


def lowest_eigs(h, k: int, dense_threshold: int = DENSE_THRESHOLD, tol: float = 1e-12,
                max_iter: Optional[int] = None, shift_invert: bool = False,
                residual_tol: float = 1e-8, return_vectors: bool = True,
                force: Optional[str] = None) -> EigenResult:
    """
    The k smallest eigenpairs of a real-symmetric or Hermitian operator.

    ``h`` is a PolaronHamiltonian, a dense array or a sparse matrix. Dense
    LAPACK is used up to ``dense_threshold``, ARPACK above it; ``force``
    selects 'dense' or 'sparse' explicitly.
    """
    matrix = _as_operator(h)
    dim = matrix.shape[0]
    if k < 1 or k > dim:
        raise DomainError(f"requested {k} eigenpairs of a {dim}-dimensional operator", k=k, dim=dim)

    use_dense = force == "dense" or k == dim or (force is None and dim <= dense_threshold)
    if use_dense:
        dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
        energies, vectors = scipy.linalg.eigh(dense, subset_by_index=[0, k - 1])
        solver = "dense"
    else:
        # 固定种子的初始向量, 结果可复现
        v0 = np.random.default_rng(0).standard_normal(dim)
        if np.iscomplexobj(matrix):
            v0 = v0.astype(complex)
        try:
            if shift_invert:
                sigma = _lower_bound(matrix)
                energies, vectors = eigsh(matrix, k=k, sigma=sigma, which='LM', v0=v0,
                                          tol=tol, maxiter=max_iter)
            else:
                energies, vectors = eigsh(matrix, k=k, which='SA', v0=v0, tol=tol, maxiter=max_iter)
        except ArpackNoConvergence as e:
            found = e.eigenvalues
            residuals = _residuals(matrix, found, e.eigenvectors) if len(found) else []
            logger.error(f"ARPACK did not converge: {len(found)}/{k} eigenpairs (dim={dim})")
            raise EigenSolverError(f"iterative solver did not converge for {k} eigenpairs", residuals)
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]
        solver = "shift-invert" if shift_invert else "lanczos"

    residuals = _residuals(matrix, energies, vectors)
    bound = residual_tol * _norm(matrix)
    if np.any(residuals > bound):
        logger.error(f"Eigenpair residuals {residuals.max():.3e} exceed {bound:.3e} ({solver})")
        raise EigenSolverError("eigenpair residuals above tolerance", residuals)
    logger.debug(f"lowest_eigs: dim={dim}, k={k}, solver={solver}, E0={energies[0]:.10g}")
    return EigenResult(
        energies=np.asarray(energies, dtype=float),
        vectors=vectors if return_vectors else None,
        residuals=residuals,
        solver=solver,
    )


def _lower_bound(matrix) -> float:
    """Gershgorin bound below the spectrum, the shift for shift-invert."""
    if sp.issparse(matrix):
        csr = sp.csr_matrix(matrix)
        diag = csr.diagonal().real
        radius = np.asarray(abs(csr).sum(axis=1)).ravel() - np.abs(diag)
    else:
        diag = np.diag(matrix).real
        radius = np.abs(matrix).sum(axis=1) - np.abs(diag)
    return float(np.min(diag - radius)) - 1.0
