# commands/run.py
"""命令层: 把 RunConfig 变成结果记录, 走缓存, 写文件."""
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from analysis.bands import (anticrossing_positions, band_sweep, half_zone_grid, impedance_scan, rescale_bands,
                            zone_edge_diagnostics)
from analysis.duality import extract_duality
from analysis.heatmap import dual_curves, heatmap_sweep, mobility_at, reference_bands
from analysis.mobility import band_fit_residual
from analysis.spectroscopy import spectral_function
from circuit.builder import charge_gauge_bath, line_normal_modes, low_frequency_coupling
from circuit.renormalization import one_band_renormalization
from circuit.spec import Boundary, CircuitSpec
from commands.verify import run_checks
from config.settings import RunConfig
from polaron.solver import convergence_audit
from results.cache import ResultCache
from results.records import ResultRecord, cache_key, emit_results, make_record
from utils.errors import ConfigValidationError, DualityError, ReferenceLevelError
from utils.logger import setup_logger

logger = setup_logger(__name__)

COMMANDS = ("modes", "bands", "fit", "duality", "spectroscopy", "heatmap", "verify")


class CommandRunner:
    """
    Builds the payload of each command from one validated RunConfig.
    ``threads`` only changes wall time; payloads are identical for any value.
    """

    def __init__(self, cfg: RunConfig, threads: int = 1):
        self.cfg = cfg
        self.threads = max(1, int(threads))
        self.spec = CircuitSpec.from_block(cfg.circuit)
        self.numerics = cfg.numerics
        self.sweep = cfg.sweep
        self.handlers: Dict[str, Callable[[], Dict[str, Any]]] = {
            "modes": self.modes,
            "bands": self.bands,
            "fit": self.fit,
            "duality": self.duality,
            "spectroscopy": self.spectroscopy,
            "heatmap": self.heatmap,
            "verify": self.verify,
        }

    @property
    def bias_grid(self) -> np.ndarray:
        return half_zone_grid(self.sweep.bias_points)

    def payload(self, name: str) -> Dict[str, Any]:
        return self.handlers[name]()

    def modes(self) -> Dict[str, Any]:
        spec = self.spec
        modes = line_normal_modes(spec)
        ratio = one_band_renormalization(spec, method=self.numerics.u0_method)
        payload = {
            "boundary": spec.boundary.value,
            "frequencies": modes.frequencies,
            "couplings": modes.couplings,
            "sum_rule_residual": modes.sum_rule_residual(),
            "one_band_ratio": ratio.value,
            "one_band": ratio.to_dict(),
            "bath": None,
        }
        if spec.boundary is Boundary.OPEN:
            bath = charge_gauge_bath(modes, spec)
            payload["bath"] = {
                "frequencies": bath.frequencies,
                "couplings": bath.couplings,
                "approx_couplings": np.sqrt(low_frequency_coupling(bath.frequencies, spec)),
            }
            payload["e_c_tilde"] = bath.e_c_tilde
            payload["josephson_suppression"] = bath.josephson_suppression
        else:
            payload["e_l_tilde"] = spec.e_l - 2.0 * float(np.sum(modes.couplings ** 2 / modes.frequencies))
        return payload

    def _bands(self):
        bands = band_sweep(self.spec, self.numerics, self.bias_grid, n_bands=self.numerics.n_levels,
                           threads=self.threads, skip_failed=self.sweep.skip_failed)
        if self.cfg.output.rescale:
            bands = rescale_bands(bands, reference_bands(self.spec, self.numerics))
        return bands

    def bands(self) -> Dict[str, Any]:
        bands = self._bands()
        payload = bands.to_dict()
        try:
            payload["diagnostics"] = zone_edge_diagnostics(bands)
        except ReferenceLevelError as e:
            logger.warning(f"Zone-edge diagnostics unavailable: {e.message}")
            payload["diagnostics"] = None
        if bands.n_bands > 1:
            payload["anticrossings"] = anticrossing_positions(bands)
        return payload

    def fit(self) -> Dict[str, Any]:
        fit, bands = mobility_at(self.spec, self.numerics, self.bias_grid, self.threads,
                                 skip_failed=self.sweep.skip_failed)
        return {
            "fit": fit.to_dict(),
            "cft_residual": band_fit_residual(bands, fit.mu, k=3),
            "bands": bands.to_dict(),
        }

    def duality(self) -> Dict[str, Any]:
        charge, flux = dual_curves(self.spec, self.numerics, self.sweep.e_j, self.bias_grid,
                                   self.threads, self.sweep.skip_failed)
        duality = extract_duality(charge, flux)
        payload = duality.to_dict()
        payload["z_ratio"] = self.spec.z_ratio
        payload["mu_at_self_dual"] = float(duality.charge_mobility(duality.self_dual_point))
        return payload

    def spectroscopy(self) -> Dict[str, Any]:
        omega = np.linspace(self.sweep.omega_min, self.sweep.omega_max, self.sweep.omega_points)
        normalize = self.cfg.output.normalize_columns

        def column(e_j):
            return spectral_function(self.spec.with_(e_j=float(e_j)), self.numerics, omega,
                                     normalize=normalize)

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = list(pool.map(column, self.sweep.e_j))
        return {
            "boundary": self.spec.boundary.value,
            "omega": omega,
            "e_j": list(self.sweep.e_j),
            "values": [r.values for r in results],
            "gamma": self.numerics.gamma,
            "normalized": normalize,
            "transitions": [{"energies": r.transitions, "weights": r.weights} for r in results],
        }

    def heatmap(self) -> Dict[str, Any]:
        result = heatmap_sweep(self.spec, self.numerics, self.sweep.z_ratio, self.sweep.e_j,
                               self.bias_grid, self.threads, self.sweep.skip_failed)
        payload = result.to_dict()
        # 固定偏置 (0, 1/2) 下最低几个能级随 Z 的变化, 同一电路类型与 E_J
        payload["impedance_scan"] = impedance_scan(self.spec, self.numerics, self.sweep.z_ratio,
                                                   n_levels=min(3, self.numerics.n_levels),
                                                   threads=self.threads)
        return payload

    def verify(self) -> Dict[str, Any]:
        checks = run_checks(self.cfg.verify.checks, include_slow=self.cfg.verify.include_slow)
        return {"checks": checks, "passed": all(c["passed"] for c in checks)}


def run_command(name: str, cfg: RunConfig, out_dir: Optional[str] = None, fmt: Optional[str] = None,
                threads: int = 1, audit: bool = False,
                cache: Optional[ResultCache] = None) -> Tuple[int, List[str], ResultRecord]:
    """
    Run one command and write its artifacts.

    Returns (exit status, written paths, record). Errors propagate as
    DualityError subclasses; the caller turns them into an error record.
    """
    if name not in COMMANDS:
        raise ConfigValidationError("command", "one of " + ", ".join(COMMANDS), name)
    out_dir = out_dir or cfg.output.out_dir
    fmt = fmt or cfg.output.format
    use_cache = cfg.output.use_cache and name != "verify" and not audit
    cache = cache if cache is not None else (ResultCache() if use_cache else None)

    record = None
    if use_cache:
        record = cache.get(cache_key(name, cfg))

    if record is None:
        runner = CommandRunner(cfg, threads)
        logger.info(f"Running '{name}' ({runner.spec.boundary.value} circuit, N_m={runner.spec.n_modes}, "
                    f"threads={runner.threads})")
        payload = runner.payload(name)
        report = convergence_audit(runner.spec, cfg.numerics) if audit else None
        record = make_record(name, cfg, payload, audit=report)
        if use_cache:
            try:
                cache.put(record)
            except DualityError as e:
                logger.warning(f"Result not cached: {e.message}")

    paths = emit_results(record, fmt, out_dir)
    status = 0
    if name == "verify" and not record.payload.get("passed", False):
        status = 1
    return status, paths, record
