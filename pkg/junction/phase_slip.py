# junction/phase_slip.py
import numpy as np

from junction.transmon import transmon_eigs
from utils.errors import DomainError


def extract_phase_slip_amplitude(e_c: float, e_j: float, method: str = "bandwidth") -> float:
    """U_0 = (E_0(1/2) - E_0(0)) / 2, or a cosine fit over the zone with method='fit'."""
    if method == "fit":
        return fit_u0_cosine(e_c, e_j)
    if method != "bandwidth":
        raise DomainError(f"unknown U_0 method '{method}'", allowed="bandwidth, fit")
    top = transmon_eigs(e_c, e_j, 0.5, n_levels=1).energies[0]
    bottom = transmon_eigs(e_c, e_j, 0.0, n_levels=1).energies[0]
    return 0.5 * float(top - bottom)


def fit_u0_cosine(e_c: float, e_j: float, points: int = 101) -> float:
    """Least-squares fit of E_0(nu) = c - U_0 cos(2 pi nu) on a uniform zone grid."""
    nu = np.linspace(-0.5, 0.5, points)
    band = np.array([transmon_eigs(e_c, e_j, x, n_levels=1).energies[0] for x in nu])
    design = np.column_stack([np.ones_like(nu), -np.cos(2.0 * np.pi * nu)])
    (_, u0), *_ = np.linalg.lstsq(design, band, rcond=None)
    return float(u0)
