# commands/verify.py
"""
可运行的性质检查. 每个检查返回 (passed, detail), 与 tests/ 中的断言一致,
慢的检查默认跳过.
"""
import traceback
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from analysis.bands import band_sweep, half_zone_grid, rescale_bands
from analysis.duality import extract_duality
from analysis.heatmap import dual_curves, mobility_at, reference_bands
from analysis.mobility import band_fit_residual, cft_energy, fit_curve
from analysis.spectroscopy import spectral_function
from circuit.builder import charge_gauge_bath, line_normal_modes
from circuit.spec import Boundary, CircuitSpec
from config.settings import NumericsConfig
from junction.transmon import transmon_eigs
from oracle.bare import BareBasisSpec, dense_ed_charge, dense_ed_flux
from oracle.normal_modes import (charge_bath_hessian, flux_loop_hessian, full_circuit_normal_modes,
                                 symplectic_frequencies)
from polaron.configs import build_photon_configs
from polaron.overlaps import displacement_matrix
from polaron.solver import solve_levels
from utils.errors import ConfigValidationError, DualityError
from utils.logger import setup_logger

logger = setup_logger(__name__)

CheckResult = Tuple[bool, str]


@dataclass(frozen=True)
class Check:
    name: str
    func: Callable[[], CheckResult]
    slow: bool = False


CHECKS: Dict[str, Check] = {}


def check(name: str, slow: bool = False):
    def register(func):
        CHECKS[name] = Check(name, func, slow)
        return func
    return register


def _spec(boundary="open", **kw) -> CircuitSpec:
    values = dict(e_j=1.0, e_c=1.0, z_ratio=1.0, omega_c=4.0, n_modes=1, boundary=boundary)
    values.update(kw)
    return CircuitSpec(**values)


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0)))


# ---- circuit ------------------------------------------------------------------

@check("sum_rule")
def check_sum_rule() -> CheckResult:
    rng = np.random.default_rng(7)
    worst = 0.0
    for n_modes in range(1, 65):
        spec = _spec(z_ratio=rng.uniform(0.3, 3.0), omega_c=rng.uniform(1.0, 10.0), n_modes=n_modes)
        modes = line_normal_modes(spec)
        worst = max(worst, abs(modes.sum_rule_residual()) / modes.inductive_scale)
    # 短路端: 剩余 E_L/(2(N_m+1)) 不为零
    smallest = float("inf")
    for n_modes in range(1, 17):
        short = line_normal_modes(_spec("short", n_modes=n_modes))
        smallest = min(smallest, short.sum_rule_residual() / short.inductive_scale)
    ok = worst < 1e-10 and smallest > 1e-3
    return ok, f"open (N_m 1..64) max relative residual {worst:.2e}; short (N_m 1..16) min {smallest:.4g}"


@check("bogoliubov")
def check_bogoliubov() -> CheckResult:
    worst = 0.0
    for n_modes in (1, 4, 10):
        spec = _spec(n_modes=n_modes, z_ratio=0.7)
        modes = line_normal_modes(spec)
        bath = charge_gauge_bath(modes, spec)
        identity = 4.0 * spec.e_c - float(np.sum(bath.couplings ** 2 / bath.frequencies))
        closed = spec.e_c / (1.0 + n_modes * spec.capacitance_ratio)
        worst = max(
            worst,
            abs(4.0 * bath.e_c_tilde - identity),
            abs(bath.e_c_tilde - closed) / closed,
            _rel(bath.frequencies, full_circuit_normal_modes(spec)),
            _rel(symplectic_frequencies(charge_bath_hessian(modes, spec.e_c)), bath.frequencies),
        )
    return worst < 1e-8, f"max deviation {worst:.2e}"


@check("flux_loop_modes")
def check_flux_loop_modes() -> CheckResult:
    worst = 0.0
    for n_modes in (1, 3, 6):
        spec = _spec("short", n_modes=n_modes, z_ratio=1.5)
        modes = line_normal_modes(spec)
        found = symplectic_frequencies(flux_loop_hessian(spec, modes))
        worst = max(worst, _rel(found, full_circuit_normal_modes(spec)))
    return worst < 1e-8, f"max relative deviation {worst:.2e}"


# ---- junction / overlaps ------------------------------------------------------

@check("laguerre_overlaps")
def check_laguerre_overlaps() -> CheckResult:
    big = 160
    lowering = np.diag(np.sqrt(np.arange(1, big)), 1)
    worst = 0.0
    for gamma in (0.7, 0.3 + 0.5j, -1.2j):
        dense = scipy.linalg.expm(gamma * lowering.T - np.conj(gamma) * lowering)[:20, :20]
        worst = max(worst, float(np.max(np.abs(displacement_matrix(gamma, 20) - dense))))
    return worst < 1e-10, f"max |closed form - expm| {worst:.2e}"


@check("transmon_free_limit")
def check_transmon_free_limit() -> CheckResult:
    eigs = transmon_eigs(1.0, 0.0, 0.3, n_max=8, n_levels=6)
    expected = np.sort(4.0 * (np.arange(-8, 9) - 0.3) ** 2)[:6]
    error = float(np.max(np.abs(eigs.energies - expected)))
    return error < 1e-10, f"max deviation {error:.2e}"


# ---- polaron ED vs oracles ------------------------------------------------------

def _charge_pair(e_j: float, z_ratio: float, nu: float, k: int = 5):
    spec = _spec(e_j=e_j, z_ratio=z_ratio, bias=nu)
    bath = charge_gauge_bath(line_normal_modes(spec), spec)
    numerics = NumericsConfig(n_max=3, e_cut=30.0 * float(bath.frequencies.max()))
    polaron = solve_levels(spec, numerics, k)[0].energies
    oracle = dense_ed_charge(spec, BareBasisSpec((60,), 7), k).energies
    return polaron, oracle


def _flux_pair(e_j: float, z_ratio: float, phi: float, k: int = 5):
    spec = _spec("short", e_j=e_j, z_ratio=z_ratio, bias=phi)
    modes = line_normal_modes(spec)
    numerics = NumericsConfig(n_lev=40, e_cut=30.0 * float(modes.frequencies.max()))
    polaron = solve_levels(spec, numerics, k)[0].energies
    oracle = dense_ed_flux(spec, BareBasisSpec((30,), 60), k).energies
    return polaron, oracle


@check("oracle_charge")
def check_oracle_charge() -> CheckResult:
    worst = 0.0
    for e_j in (0.0, 0.5, 2.0):
        for z_ratio in (0.5, 1.0, 2.0):
            polaron, oracle = _charge_pair(e_j, z_ratio, 0.2)
            worst = max(worst, _rel(polaron, oracle))
    return worst < 1e-7, f"max relative deviation {worst:.2e}"


@check("oracle_flux")
def check_oracle_flux() -> CheckResult:
    worst = 0.0
    for e_j in (0.0, 0.5, 2.0):
        for z_ratio in (0.5, 1.0, 2.0):
            polaron, oracle = _flux_pair(e_j, z_ratio, 0.2)
            worst = max(worst, _rel(polaron, oracle))
    return worst < 1e-6, f"max relative deviation {worst:.2e}"


@check("gauge_invariance")
def check_gauge_invariance() -> CheckResult:
    spec = _spec("short", e_j=1.0, z_ratio=1.0, bias=0.25)
    bare = BareBasisSpec((30,), 60)
    flux = dense_ed_flux(spec, bare, 4, gauge="flux").energies
    charge = dense_ed_flux(spec, bare, 4, gauge="charge").energies
    error = _rel(flux, charge)
    return error < 1e-6, f"max relative deviation {error:.2e}"


@check("gauge_invariance_two_modes", slow=True)
def check_gauge_invariance_two_modes() -> CheckResult:
    spec = _spec("short", e_j=1.0, z_ratio=1.0, bias=0.25, n_modes=2)
    bare = BareBasisSpec((14, 14), 36, max_dim=20000)
    flux = dense_ed_flux(spec, bare, 4, gauge="flux").energies
    charge = dense_ed_flux(spec, bare, 4, gauge="charge").energies
    error = _rel(flux, charge)
    return error < 1e-6, f"max relative deviation {error:.2e}"


@check("flux_quadratic_limit")
def check_flux_quadratic_limit() -> CheckResult:
    spec = _spec("short", e_j=0.0, n_modes=2, bias=0.3)
    modes = line_normal_modes(spec)
    numerics = NumericsConfig(e_cut=10.0 * float(modes.frequencies.max()))
    levels = solve_levels(spec, numerics, 6)[0].energies
    normal = full_circuit_normal_modes(spec)
    expected = build_photon_configs(normal, 4.0 * float(normal.max())).energies[:6]
    error = _rel(levels - levels[0], expected)
    return error < 1e-6, f"max relative deviation of excitation energies {error:.2e}"


@check("charge_free_band")
def check_charge_free_band() -> CheckResult:
    spec = _spec(e_j=0.0, n_modes=3)
    bath = charge_gauge_bath(line_normal_modes(spec), spec)
    bands = band_sweep(spec, NumericsConfig(n_max=3), half_zone_grid(11), n_bands=1)
    expected = 4.0 * bath.e_c_tilde * bands.bias ** 2
    error = float(np.max(np.abs(bands.energies[:, 0] - expected)))
    return error < 1e-9, f"max deviation from 4 E_C~ nu^2: {error:.2e}"


@check("band_symmetry")
def check_band_symmetry() -> CheckResult:
    numerics = NumericsConfig(n_max=8)
    worst = 0.0
    for boundary in ("open", "short"):
        spec = _spec(boundary, e_j=1.0, n_modes=2)
        for a, b in ((0.3, -0.3), (0.5, -0.5)):
            lo = solve_levels(spec.with_(bias=a), numerics, 4)[0].energies
            hi = solve_levels(spec.with_(bias=b), numerics, 4)[0].energies
            worst = max(worst, float(np.max(np.abs(lo - hi))))
    return worst < 1e-8, f"max |E(xi) - E(-xi)| {worst:.2e}"


# ---- analysis ---------------------------------------------------------------------

@check("cft_values")
def check_cft_values() -> CheckResult:
    values = [cft_energy(1.0, 0.0), cft_energy(0.0, 0.3), cft_energy(0.5, 0.0)]
    expected = [0.0, 0.0625, 0.015625]
    xi = np.linspace(0.0, 0.5, 21)
    even = bool(np.allclose(cft_energy(0.4, xi), cft_energy(0.4, -xi), atol=1e-14))
    edges = abs(cft_energy(0.4, 0.5) - cft_energy(0.4, -0.5)) < 1e-14
    monotone = bool(np.all(np.diff(cft_energy(0.4, xi)) > 0))
    ok = bool(np.allclose(values, expected, atol=1e-14)) and even and edges and monotone
    return ok, f"values {values}, even {even}, periodic {edges}, monotone {monotone}"


@check("fit_round_trip")
def check_fit_round_trip() -> CheckResult:
    rng = np.random.default_rng(11)
    xi = np.linspace(-0.5, 0.5, 81)
    worst = 0.0
    for mu in rng.uniform(0.01, 0.99, 100):
        fit = fit_curve(xi, cft_energy(mu, xi) + 0.3)
        worst = max(worst, abs(fit.mu - mu))
    return worst < 1e-5, f"max |mu_fit - mu| {worst:.2e}"


@check("duality_identity")
def check_duality_identity() -> CheckResult:
    e_j = np.linspace(0.1, 3.0, 12)
    samples = np.column_stack([e_j, np.exp(-e_j)])
    duality = extract_duality(samples, samples)
    error = float(np.max(np.abs(duality.map_values - duality.map_grid)))
    star = abs(duality.self_dual_point - np.log(2.0))
    ok = error < 1e-9 and star < 1e-2 and duality.coincident and duality.fixed_point is None
    return ok, f"identity error {error:.2e} on {len(duality.map_grid)} points, E_J* - ln 2 = {star:.2e}"


@check("spectral_free_limit")
def check_spectral_free_limit() -> CheckResult:
    spec = _spec(e_j=0.0, n_modes=3)
    bath = charge_gauge_bath(line_normal_modes(spec), spec)
    numerics = NumericsConfig(n_max=4)
    result = spectral_function(spec, numerics, bath.frequencies, gamma=1e-3, n_states=60)
    worst = 0.0
    for w in bath.frequencies:
        near = np.abs(result.transitions - w) < 1e-9
        worst = max(worst, abs(float(result.weights[near].sum()) - 1.0))
    total = abs(float(result.weights.sum()) - len(bath.frequencies))
    return worst < 1e-9 and total < 1e-9, f"peak weight error {worst:.2e}, total weight error {total:.2e}"


# ---- desk-scale physics (slow) --------------------------------------------------------

def _rescaled_drift(z_ratio: float) -> float:
    """Largest change of the first three rescaled bands between N_m = 5, 7 and 10."""
    numerics = NumericsConfig(n_max=8)
    grid = half_zone_grid(11)
    curves = {}
    for n_modes in (5, 7, 10):
        spec = _spec(e_j=1.0, z_ratio=z_ratio, n_modes=n_modes)
        curves[n_modes] = rescale_bands(band_sweep(spec, numerics, grid, n_bands=3),
                                        reference_bands(spec, numerics)).energies
    return max(float(np.max(np.abs(curves[n] - curves[10]))) for n in (5, 7))


@check("critical_scale_invariance", slow=True)
def check_critical_scale_invariance() -> CheckResult:
    drift = _rescaled_drift(1.0)
    return drift < 0.05, f"max rescaled band drift across N_m {drift:.3f}"


@check("critical_drift", slow=True)
def check_critical_drift() -> CheckResult:
    drifts = {z: _rescaled_drift(z) for z in (0.5, 2.0)}
    ok = all(d > 0.05 for d in drifts.values())
    return ok, "rescaled band drift across N_m " + ", ".join(f"z={z}: {d:.3f}" for z, d in drifts.items())


@check("cft_fit_quality", slow=True)
def check_cft_fit_quality() -> CheckResult:
    numerics = NumericsConfig(n_max=8)
    rows = []
    ok = True
    for e_j in (0.25, 1.0, 2.0):
        fit, bands = mobility_at(_spec(e_j=e_j, n_modes=6), numerics, half_zone_grid(21))
        residual = band_fit_residual(bands, fit.mu, k=3)
        ok = ok and 0.0 < fit.mu < 1.0 and residual < 0.05
        rows.append(f"E_J={e_j}: mu={fit.mu:.4f}, rms={residual:.4f}")
    return ok, "; ".join(rows)


@check("duality_relation", slow=True)
def check_duality_relation() -> CheckResult:
    numerics = NumericsConfig(n_max=8)
    spec = _spec(n_modes=6)
    charge, flux = dual_curves(spec, numerics, (0.25, 1.0, 2.0, 4.0), half_zone_grid(11))
    deviation = np.abs(charge[:, 1] + flux[:, 1] - 1.0)
    detail = f"|mu + mu_bar - 1| = {np.round(deviation, 4).tolist()}"
    try:
        duality = extract_duality(charge, flux)
    except DualityError as e:
        return False, f"{detail}; {e}"
    star = duality.self_dual_point
    ok = bool(np.all(deviation < 0.03)) and star < 1.0 \
        and abs(float(duality.charge_mobility(star)) - 0.5) < 0.01
    return ok, f"{detail}; E_J* = {star:.4f}"


def run_checks(names: Sequence[str] = (), include_slow: bool = False) -> List[Dict[str, object]]:
    """按注册顺序运行检查; 指定 names 时只跑这些 (slow 也跑)"""
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigValidationError("verify.checks", "one of " + ", ".join(CHECKS), unknown)
    if names:
        selected = [c for c in CHECKS.values() if c.name in names]
    else:
        selected = [c for c in CHECKS.values() if include_slow or not c.slow]

    results = []
    for item in selected:
        try:
            passed, detail = item.func()
        except DualityError as e:
            passed, detail = False, f"{type(e).__name__}: {e.message}"
        except Exception as e:
            logger.error(f"Check {item.name} crashed: {e}")
            traceback.print_exc()
            passed, detail = False, f"{type(e).__name__}: {e}"
        level = logger.info if passed else logger.error
        level(f"[{'PASS' if passed else 'FAIL'}] {item.name}: {detail}")
        results.append({"name": item.name, "passed": bool(passed), "detail": detail, "slow": item.slow})
    return results
