# circuit/spec.py
"""
Circuit description and the unit bookkeeping shared by every solver.

Units: hbar = 1, R_q = 1, so e^2 = pi/2 and the reduced flux quantum
Phi0 = hbar/2e has Phi0^2 = 1/(2 pi). Energies are in the unit of ``e_c``.
"""
import math
from dataclasses import dataclass, replace
from enum import Enum

from utils.errors import SpecValidationError

E_SQUARED = math.pi / 2.0
PHI0_SQUARED = 1.0 / (2.0 * math.pi)


class Boundary(str, Enum):
    OPEN = "open"    # capacitive termination, charge circuit
    SHORT = "short"  # inductive termination, flux circuit

    @property
    def entry(self) -> int:
        return 1 if self is Boundary.OPEN else 2

    @property
    def bias_name(self) -> str:
        return "nu" if self is Boundary.OPEN else "phi"


@dataclass(frozen=True)
class CircuitSpec:
    e_j: float
    e_c: float
    z_ratio: float
    omega_c: float
    n_modes: int
    boundary: Boundary
    bias: float = 0.0

    def __post_init__(self):
        if not isinstance(self.boundary, Boundary):
            try:
                object.__setattr__(self, "boundary", Boundary(self.boundary))
            except ValueError:
                raise SpecValidationError("boundary", "open or short", self.boundary)
        checks = (
            ("e_j", self.e_j >= 0, ">= 0"),
            ("e_c", self.e_c > 0, "> 0"),
            ("z_ratio", self.z_ratio > 0, "> 0"),
            ("omega_c", self.omega_c > 0, "> 0"),
            ("n_modes", int(self.n_modes) == self.n_modes and self.n_modes >= 1, "integer >= 1"),
            ("bias", -0.5 <= self.bias <= 0.5, "[-0.5, 0.5]"),
        )
        for name, ok, allowed in checks:
            if not ok:
                raise SpecValidationError(name, allowed, getattr(self, name))
        object.__setattr__(self, "n_modes", int(self.n_modes))

    @classmethod
    def from_block(cls, block) -> "CircuitSpec":
        """Build from a validated ``config.settings.CircuitBlock``."""
        return cls(
            e_j=block.e_j,
            e_c=block.e_c,
            z_ratio=block.z_ratio,
            omega_c=block.omega_c,
            n_modes=block.n_modes,
            boundary=Boundary(block.boundary),
            bias=block.bias,
        )

    def with_(self, **changes) -> "CircuitSpec":
        return replace(self, **changes)

    @property
    def delta(self) -> float:
        """Level spacing pi*omega_c/(2 N_m)."""
        return math.pi * self.omega_c / (2.0 * self.n_modes)

    @property
    def junction_capacitance(self) -> float:
        return E_SQUARED / (2.0 * self.e_c)

    @property
    def inductance(self) -> float:
        return 2.0 * self.z_ratio / self.omega_c

    @property
    def capacitance(self) -> float:
        return 2.0 / (self.omega_c * self.z_ratio)

    @property
    def capacitance_ratio(self) -> float:
        """C / C_J = 8 E_C / (pi z omega_c)."""
        return self.capacitance / self.junction_capacitance

    @property
    def e_l(self) -> float:
        """Phi0^2 / L = omega_c / (4 pi z)."""
        return PHI0_SQUARED / self.inductance

    def to_dict(self):
        return {
            "e_j": self.e_j,
            "e_c": self.e_c,
            "z_ratio": self.z_ratio,
            "omega_c": self.omega_c,
            "n_modes": self.n_modes,
            "boundary": self.boundary.value,
            "bias": self.bias,
        }
