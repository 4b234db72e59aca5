# tests/test_polaron.py
from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from circuit.builder import charge_gauge_bath, line_normal_modes
from circuit.spec import CircuitSpec
from config.settings import NumericsConfig
from oracle.bare import BareBasisSpec, dense_ed_charge, dense_ed_flux
from oracle.normal_modes import full_circuit_normal_modes
from polaron.configs import build_photon_configs
from polaron.eigensolver import lowest_eigs
from polaron.solver import assemble, convergence_audit, doubled_cutoffs, photon_cutoff, solve_levels
from utils.errors import BasisOverflowError, DomainError


def make_spec(boundary="open", **kw):
    values = dict(e_j=1.0, e_c=1.0, z_ratio=1.0, omega_c=4.0, n_modes=1, boundary=boundary)
    values.update(kw)
    return CircuitSpec(**values)


class TestPhotonConfigs:
    def test_strict_cutoff_and_ordering(self):
        configs = build_photon_configs([1.0, 2.5], 5.0)
        energies = configs.energies
        assert np.all(energies < 5.0)
        assert np.all(np.diff(energies) >= 0)
        assert tuple(configs.configs[0]) == (0, 0)
        # 0, 1, 2, 2.5, 3, 3.5, 4, 4.5; (5,0) and (0,2) sit on the cutoff
        assert len(configs) == 8

    def test_ties_are_ordered_by_occupation(self):
        configs = build_photon_configs([1.0, 1.0], 2.5)
        assert [tuple(c) for c in configs.configs] == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]

    def test_overflow(self):
        with pytest.raises(BasisOverflowError):
            build_photon_configs([0.1, 0.1, 0.1], 5.0, max_configs=100)

    def test_non_positive_cutoff(self):
        with pytest.raises(DomainError):
            build_photon_configs([1.0], 0.0)

    def test_creation_operator(self):
        configs = build_photon_configs([1.0, 3.0], 4.5)
        lookup = configs.index()
        raise_first = configs.creation_operator(0).toarray()
        assert raise_first[lookup[(2, 0)], lookup[(1, 0)]] == pytest.approx(np.sqrt(2.0))
        assert raise_first[lookup[(1, 1)], lookup[(0, 1)]] == pytest.approx(1.0)
        # (1,1) -> (2,1) leaves the set
        assert np.count_nonzero(raise_first[:, lookup[(1, 1)]]) == 0


class TestEigensolver:
    def setup_method(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((300, 300))
        self.dense = a + a.T
        self.expected = np.linalg.eigvalsh(self.dense)[:4]

    def test_dense_and_sparse_agree(self):
        matrix = sp.csr_matrix(self.dense)
        dense = lowest_eigs(matrix, 4, force="dense")
        sparse = lowest_eigs(matrix, 4, force="sparse")
        assert dense.solver == "dense"
        assert sparse.solver == "lanczos"
        assert_allclose(dense.energies, self.expected, atol=1e-9)
        assert_allclose(sparse.energies, self.expected, atol=1e-9)

    def test_shift_invert(self):
        result = lowest_eigs(sp.csr_matrix(self.dense), 4, force="sparse", shift_invert=True)
        assert result.solver == "shift-invert"
        assert_allclose(result.energies, self.expected, atol=1e-8)

    def test_full_spectrum_of_small_matrix(self):
        result = lowest_eigs(np.array([[2.0, 1.0], [1.0, 2.0]]), 2)
        assert_allclose(result.energies, [1.0, 3.0])

    def test_too_many_levels(self):
        with pytest.raises(DomainError):
            lowest_eigs(np.eye(3), 4)

    def test_repeated_runs_are_bit_identical(self):
        matrix = sp.csr_matrix(self.dense)
        first = lowest_eigs(matrix, 3, force="sparse").energies
        second = lowest_eigs(matrix, 3, force="sparse").energies
        assert np.array_equal(first, second)


class TestChargeHamiltonian:
    def test_matrix_is_symmetric(self):
        h = assemble(make_spec(n_modes=3, bias=0.3), NumericsConfig(n_max=4))
        assert h.kind == "charge"
        assert h.asymmetry() < 1e-13

    @pytest.mark.parametrize("e_j", [0.0, 0.5, 2.0])
    @pytest.mark.parametrize("z_ratio", [0.5, 1.0, 2.0])
    def test_matches_bare_oracle_single_mode(self, e_j, z_ratio):
        spec = make_spec(e_j=e_j, z_ratio=z_ratio, bias=0.2)
        bath = charge_gauge_bath(line_normal_modes(spec), spec)
        numerics = NumericsConfig(n_max=3, e_cut=30.0 * float(bath.frequencies.max()))
        polaron = solve_levels(spec, numerics, 5)[0].energies
        oracle = dense_ed_charge(spec, BareBasisSpec((60,), 7), 5).energies
        assert_allclose(polaron, oracle, rtol=1e-7, atol=1e-9)

    @pytest.mark.slow
    def test_matches_bare_oracle_two_modes(self):
        spec = make_spec(e_j=1.0, n_modes=2, bias=0.1)
        bath = charge_gauge_bath(line_normal_modes(spec), spec)
        numerics = NumericsConfig(n_max=3, e_cut=14.0 * float(bath.frequencies.max()))
        polaron = solve_levels(spec, numerics, 5)[0].energies
        oracle = dense_ed_charge(spec, BareBasisSpec((30, 24), 7, max_dim=6000), 5).energies
        assert_allclose(polaron, oracle, rtol=1e-7, atol=1e-9)

    def test_free_band_is_parabolic(self):
        spec = make_spec(e_j=0.0, n_modes=3)
        bath = charge_gauge_bath(line_normal_modes(spec), spec)
        for nu in (0.0, 0.2, 0.45):
            energy = solve_levels(spec.with_(bias=nu), NumericsConfig(n_max=3), 1)[0].energies[0]
            assert energy == pytest.approx(4.0 * bath.e_c_tilde * nu ** 2, abs=1e-10)

    def test_compressed_junction_basis_tracks_full_basis(self):
        spec = make_spec(e_j=0.5, n_modes=2, bias=0.25)
        numerics = NumericsConfig(n_max=6)
        full = solve_levels(spec, numerics, 3)[0].energies
        compressed, h = solve_levels(spec, replace(numerics, n_bands=7), 3)
        assert h.junction_dim == 7
        assert_allclose(compressed.energies, full, atol=5e-3)

    def test_expand_restores_full_basis(self):
        spec = make_spec(e_j=0.5, n_modes=2)
        result, h = solve_levels(spec, NumericsConfig(n_max=4, n_bands=5), 2, return_vectors=True)
        states = h.expand(result.vectors)
        assert states.shape == (9 * len(h.configs), 2)
        assert_allclose(np.linalg.norm(states, axis=0), 1.0, atol=1e-12)


class TestFluxHamiltonian:
    def test_matrix_is_symmetric(self):
        h = assemble(make_spec("short", n_modes=2, bias=0.3), NumericsConfig())
        assert h.kind == "flux"
        assert h.asymmetry() < 1e-12

    @pytest.mark.parametrize("e_j", [0.0, 0.5, 2.0])
    @pytest.mark.parametrize("z_ratio", [1.0, 2.0])
    def test_matches_bare_oracle_single_mode(self, e_j, z_ratio):
        spec = make_spec("short", e_j=e_j, z_ratio=z_ratio, bias=0.2)
        modes = line_normal_modes(spec)
        numerics = NumericsConfig(n_lev=40, e_cut=30.0 * float(modes.frequencies.max()))
        polaron = solve_levels(spec, numerics, 5)[0].energies
        oracle = dense_ed_flux(spec, BareBasisSpec((30,), 60), 5).energies
        assert_allclose(polaron, oracle, rtol=1e-6, atol=1e-8)

    def test_quadratic_limit_matches_normal_modes(self):
        spec = make_spec("short", e_j=0.0, n_modes=2, bias=0.3)
        modes = line_normal_modes(spec)
        numerics = NumericsConfig(e_cut=10.0 * float(modes.frequencies.max()))
        levels = solve_levels(spec, numerics, 6)[0].energies
        normal = full_circuit_normal_modes(spec)
        expected = build_photon_configs(normal, 4.0 * float(normal.max())).energies[:6]
        assert_allclose(levels - levels[0], expected, rtol=1e-6, atol=1e-8)

    def test_bias_symmetry(self):
        spec = make_spec("short", e_j=1.5, n_modes=2)
        up = solve_levels(spec.with_(bias=0.3), NumericsConfig(), 4)[0].energies
        down = solve_levels(spec.with_(bias=-0.3), NumericsConfig(), 4)[0].energies
        assert_allclose(up, down, atol=1e-8)


class TestSolver:
    def test_default_cutoff_is_multiple_of_level_spacing(self):
        spec = make_spec(n_modes=6)
        assert photon_cutoff(spec, NumericsConfig()) == pytest.approx(6.0 * spec.delta)
        assert photon_cutoff(spec, NumericsConfig(e_cut=3.0)) == 3.0

    def test_doubled_cutoffs(self):
        variants = doubled_cutoffs(make_spec("short"), NumericsConfig())
        assert variants["e_cut"].e_cut_delta == 12.0
        assert variants["n_lev"].n_lev == 48

    def test_audit_reports_every_cutoff(self):
        report = convergence_audit(make_spec(e_j=0.5, n_modes=2), NumericsConfig(n_max=4, n_levels=3))
        assert set(report) == {"e_cut", "n_max"}
        assert all(value >= 0 for value in report.values())
