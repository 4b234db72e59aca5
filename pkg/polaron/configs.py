# polaron/configs.py
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from utils.errors import BasisOverflowError, DomainError
from utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_MAX_CONFIGS = 200000


@dataclass(frozen=True)
class PhotonConfigSet:
    frequencies: np.ndarray
    energy_cutoff: float
    configs: np.ndarray  # (n_configs, n_modes) occupation numbers

    def __len__(self):
        return self.configs.shape[0]

    @property
    def energies(self) -> np.ndarray:
        return self.configs @ self.frequencies

    def index(self) -> Dict[Tuple[int, ...], int]:
        return {tuple(int(x) for x in row): i for i, row in enumerate(self.configs)}

    def creation_operator(self, mode: int) -> sp.csr_matrix:
        """a_k^+ restricted to the configuration set (transitions leaving it are dropped)."""
        lookup = self.index()
        rows: List[int] = []
        cols: List[int] = []
        vals: List[float] = []
        for j, row in enumerate(self.configs):
            raised = tuple(int(x) + (1 if k == mode else 0) for k, x in enumerate(row))
            i = lookup.get(raised)
            if i is not None:
                rows.append(i)
                cols.append(j)
                vals.append(np.sqrt(row[mode] + 1.0))
        n = len(self)
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def build_photon_configs(frequencies: Sequence[float], e_cut: float,
                         max_configs: int = DEFAULT_MAX_CONFIGS) -> PhotonConfigSet:
    """
    All occupation vectors with sum n_k omega_k < e_cut, ordered by
    (total energy, occupation vector).
    """
    if e_cut <= 0:
        raise DomainError("photon energy cutoff must be positive", e_cut=e_cut)
    freqs = np.asarray(frequencies, dtype=float)
    if np.any(freqs <= 0):
        raise DomainError("photon frequencies must be positive")
    n_modes = len(freqs)
    found: List[Tuple[int, ...]] = []
    current = [0] * n_modes

    # 深度优先枚举, 超过上限立即中止
    def visit(mode: int, energy: float):
        if mode == n_modes:
            found.append(tuple(current))
            if len(found) > max_configs:
                raise BasisOverflowError(len(found), max_configs, what="photon configuration set")
            return
        n = 0
        while energy + n * freqs[mode] < e_cut:
            current[mode] = n
            visit(mode + 1, energy + n * freqs[mode])
            n += 1
        current[mode] = 0

    visit(0, 0.0)
    found.sort(key=lambda c: (round(float(np.dot(c, freqs)), 12), c))
    configs = np.array(found, dtype=np.int64).reshape(len(found), n_modes)
    logger.debug(f"Photon configs: {len(found)} states below E_cut={e_cut:.6g} for {n_modes} modes")
    return PhotonConfigSet(frequencies=freqs, energy_cutoff=float(e_cut), configs=configs)
