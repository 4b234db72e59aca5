# circuit/renormalization.py
"""单带近似下的弹性重整化比值: 电荷电路 E_J~/E_C~, 磁通电路 U_0~/E_L~."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from circuit.builder import charge_gauge_bath, line_normal_modes
from circuit.spec import Boundary, CircuitSpec
from junction.phase_slip import extract_phase_slip_amplitude
from utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class OneBandRatio:
    boundary: Boundary
    value: float
    numerator: float
    denominator: float
    flagged: bool = False

    def to_dict(self):
        return {
            "boundary": self.boundary.value,
            "ratio": self.value,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "flagged": self.flagged,
        }


def renormalized_flux_scales(frequencies, couplings, e_l: float, u0: float):
    """(E_L~, U_0~) with E_L~ = E_L - 2 sum f^2/Omega and U_0~ = U_0 exp(-2 pi^2 sum f^2/Omega^2)."""
    frequencies = np.asarray(frequencies, dtype=float)
    couplings = np.asarray(couplings, dtype=float)
    e_l_tilde = e_l - 2.0 * float(np.sum(couplings ** 2 / frequencies))
    u0_tilde = u0 * float(np.exp(-2.0 * np.pi ** 2 * np.sum((couplings / frequencies) ** 2)))
    return e_l_tilde, u0_tilde


def one_band_renormalization(spec: CircuitSpec, u0: Optional[float] = None,
                             method: str = "bandwidth") -> OneBandRatio:
    modes = line_normal_modes(spec)
    if spec.boundary is Boundary.OPEN:
        bath = charge_gauge_bath(modes, spec)
        e_j_tilde = spec.e_j * bath.josephson_suppression
        return OneBandRatio(spec.boundary, e_j_tilde / bath.e_c_tilde, e_j_tilde, bath.e_c_tilde)

    if u0 is None:
        u0 = extract_phase_slip_amplitude(spec.e_c, spec.e_j, method=method)
    e_l_tilde, u0_tilde = renormalized_flux_scales(modes.frequencies, modes.couplings, spec.e_l, u0)
    if e_l_tilde <= 0:
        logger.warning(f"Non-positive renormalized inductive energy {e_l_tilde:.3e} at z={spec.z_ratio}")
        return OneBandRatio(spec.boundary, float("inf"), u0_tilde, e_l_tilde, flagged=True)
    return OneBandRatio(spec.boundary, u0_tilde / e_l_tilde, u0_tilde, e_l_tilde)
