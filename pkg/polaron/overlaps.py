# polaron/overlaps.py
"""位移数态重叠 <m|D^+(beta) D(alpha)|n> 的 Laguerre 闭式, 在对数域计算。"""
import numpy as np
from scipy.special import eval_genlaguerre, gammaln


def _matrix_elements(m, n, gamma: complex) -> np.ndarray:
    """<m|D(gamma)|n> for broadcastable integer arrays m, n."""
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    m, n = np.broadcast_arrays(m, n)
    if gamma == 0:
        return (m == n).astype(complex)

    lo = np.minimum(m, n)
    k = np.abs(m - n)
    x = abs(gamma) ** 2
    log_mag = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) + k * np.log(abs(gamma)) - 0.5 * x
    laguerre = eval_genlaguerre(lo, k, x)
    theta = np.angle(gamma)
    # m >= n: gamma^k ; m < n: (-gamma*)^k
    phase = np.where(m >= n, np.exp(1j * k * theta), (-1.0) ** k * np.exp(-1j * k * theta))
    return np.exp(log_mag) * laguerre * phase


def displaced_overlap(n: int, m: int, alpha: complex, beta: complex = 0.0) -> complex:
    """<m| D^+(beta) D(alpha) |n>, stable for n, m up to a few hundred."""
    if n < 0 or m < 0:
        raise ValueError("occupation numbers must be non-negative")
    alpha = complex(alpha)
    beta = complex(beta)
    phase = np.exp(0.5 * (alpha * beta.conjugate() - alpha.conjugate() * beta))
    return complex(phase * _matrix_elements(m, n, alpha - beta))


def displacement_matrix(gamma: complex, dim: int) -> np.ndarray:
    """Dense <m|D(gamma)|n> for m, n < dim; real dtype when gamma is real."""
    idx = np.arange(dim)
    values = _matrix_elements(idx[:, None], idx[None, :], complex(gamma))
    if complex(gamma).imag == 0:
        return values.real
    return values


def rotated_charge_overlaps(x: float, dim: int) -> np.ndarray:
    """
    Re(<m|D(i x)|n> i^(n-m)): the charge-hop overlap after the basis
    rotation |n> -> i^n |n>, which makes it exactly real.
    """
    idx = np.arange(dim)
    values = _matrix_elements(idx[:, None], idx[None, :], 1j * x)
    rotation = (1j) ** ((idx[None, :] - idx[:, None]) % 4)
    return (values * rotation).real
