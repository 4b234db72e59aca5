# tests/test_circuit.py
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from circuit.builder import build_matrices, charge_gauge_bath, line_normal_modes, low_frequency_coupling
from circuit.renormalization import one_band_renormalization, renormalized_flux_scales
from circuit.spec import Boundary, CircuitSpec
from oracle.normal_modes import (charge_bath_hessian, flux_loop_hessian, full_circuit_normal_modes,
                                 symplectic_frequencies, williamson_frequencies)
from utils.errors import DomainError, SpecValidationError


def make_spec(boundary="open", **kw):
    values = dict(e_j=1.0, e_c=1.0, z_ratio=1.0, omega_c=4.0, n_modes=4, boundary=boundary)
    values.update(kw)
    return CircuitSpec(**values)


class TestCircuitSpec:
    def test_derived_quantities(self):
        spec = make_spec(z_ratio=2.0, omega_c=4.0, n_modes=10)
        assert spec.delta == pytest.approx(math.pi * 4.0 / 20.0)
        assert spec.e_l == pytest.approx(4.0 / (4.0 * math.pi * 2.0))
        assert spec.capacitance_ratio == pytest.approx(8.0 / (math.pi * 2.0 * 4.0))
        assert spec.inductance * spec.capacitance == pytest.approx(4.0 / 16.0)

    def test_boundary_coerced_from_string(self):
        spec = make_spec("short")
        assert spec.boundary is Boundary.SHORT
        assert spec.boundary.entry == 2
        assert spec.boundary.bias_name == "phi"

    @pytest.mark.parametrize("field, value", [
        ("e_c", 0.0), ("z_ratio", -1.0), ("n_modes", 0), ("bias", 0.6), ("boundary", "ground"),
    ])
    def test_validation(self, field, value):
        with pytest.raises(SpecValidationError) as info:
            make_spec(**{field: value})
        assert info.value.field == field


class TestLineModes:
    @settings(max_examples=40, deadline=None)
    @given(n_modes=st.integers(1, 64), z_ratio=st.floats(0.2, 5.0), omega_c=st.floats(0.5, 20.0))
    def test_open_sum_rule(self, n_modes, z_ratio, omega_c):
        modes = line_normal_modes(make_spec(n_modes=n_modes, z_ratio=z_ratio, omega_c=omega_c))
        total = float(np.sum(modes.couplings ** 2 / modes.frequencies))
        assert abs(total - modes.inductive_scale) <= 1e-10 * modes.inductive_scale

    @pytest.mark.parametrize("n_modes", [1, 2, 5, 12])
    def test_short_residual_is_nonzero(self, n_modes):
        spec = make_spec("short", n_modes=n_modes)
        residual = line_normal_modes(spec).sum_rule_residual()
        assert residual > 0
        assert residual == pytest.approx(0.5 * spec.e_l / (n_modes + 1), rel=1e-10)

    def test_couplings_are_non_negative_and_sorted(self):
        modes = line_normal_modes(make_spec(n_modes=8))
        assert np.all(modes.couplings >= 0)
        assert np.all(np.diff(modes.frequencies) > 0)

    @pytest.mark.parametrize("boundary", ["open", "short"])
    def test_exact_dispersion(self, boundary):
        spec = make_spec(boundary, n_modes=9, omega_c=3.0)
        n = np.arange(1, 10)
        if boundary == "open":
            expected = 3.0 * np.sin((2 * n - 1) * np.pi / (4 * 9 + 2))
        else:
            expected = 3.0 * np.sin(n * np.pi / (2 * 9 + 2))
        assert_allclose(line_normal_modes(spec).frequencies, expected, rtol=1e-10)

    def test_low_modes_are_evenly_spaced(self):
        open_modes = line_normal_modes(make_spec(n_modes=32)).frequencies
        short_modes = line_normal_modes(make_spec("short", n_modes=32)).frequencies
        delta = make_spec(n_modes=32).delta
        n = np.arange(1, 5)
        assert_allclose(open_modes[:4], (n - 0.5) * delta, rtol=0.05)
        assert_allclose(short_modes[:4], n * delta, rtol=0.05)

    @pytest.mark.parametrize("n_modes", range(1, 17))
    def test_open_and_short_frequencies_interlace(self, n_modes):
        # line-only frequencies do not depend on z
        open_modes = line_normal_modes(make_spec(n_modes=n_modes, z_ratio=0.7)).frequencies
        short_modes = line_normal_modes(make_spec("short", n_modes=n_modes, z_ratio=1.0 / 0.7)).frequencies
        assert np.all(open_modes < short_modes)
        assert np.all(short_modes[:-1] < open_modes[1:])

    @pytest.mark.parametrize("boundary", ["open", "short"])
    def test_mode_vectors_are_capacitance_orthonormal(self, boundary):
        spec = make_spec(boundary, n_modes=7, z_ratio=1.3)
        modes = line_normal_modes(spec)
        capacitance, inductance = build_matrices(spec)
        vectors = modes.vectors
        assert_allclose(vectors.T @ capacitance[1:, 1:] @ vectors, np.eye(7), atol=1e-12)
        assert_allclose(vectors.T @ inductance[1:, 1:] @ vectors, np.diag(modes.frequencies ** 2),
                        atol=1e-10 * float(modes.frequencies.max() ** 2))

    @pytest.mark.parametrize("boundary", ["open", "short"])
    @pytest.mark.parametrize("z_ratio", [0.5, 1.0, 2.0])
    def test_lowest_coupling_scales_with_level_spacing(self, boundary, z_ratio):
        spec = make_spec(boundary, n_modes=32, z_ratio=z_ratio)
        modes = line_normal_modes(spec)
        expected = spec.delta / (2.0 * np.pi ** 2 * z_ratio)
        assert modes.couplings[0] ** 2 / modes.frequencies[0] == pytest.approx(expected, rel=0.1)

    def test_matrices(self):
        spec = make_spec("short", n_modes=3)
        capacitance, inductance = build_matrices(spec)
        assert capacitance.shape == (4, 4)
        assert_allclose(np.diag(capacitance)[1:], spec.capacitance_ratio)
        scale = inductance[0, 0]
        assert_allclose(inductance[0, 1] / scale, -1.0)
        assert_allclose(inductance[-1, -1] / scale, 2.0)
        assert_allclose(inductance, inductance.T)


class TestChargeGaugeBath:
    def setup_method(self):
        self.spec = make_spec(n_modes=6, z_ratio=0.7)
        self.modes = line_normal_modes(self.spec)
        self.bath = charge_gauge_bath(self.modes, self.spec)

    def test_renormalized_charging_energy_closed_form(self):
        expected = self.spec.e_c / (1.0 + self.spec.n_modes * self.spec.capacitance_ratio)
        assert self.bath.e_c_tilde == pytest.approx(expected, rel=1e-10)

    def test_coupling_identity(self):
        total = float(np.sum(self.bath.couplings ** 2 / self.bath.frequencies))
        assert 4.0 * self.bath.e_c_tilde == pytest.approx(4.0 * self.spec.e_c - total, rel=1e-10)

    def test_frequencies_match_full_circuit(self):
        assert_allclose(self.bath.frequencies, full_circuit_normal_modes(self.spec), rtol=1e-9)

    def test_frequencies_match_symplectic_oracle(self):
        hessian = charge_bath_hessian(self.modes, self.spec.e_c)
        assert_allclose(symplectic_frequencies(hessian), self.bath.frequencies, rtol=1e-9)

    def test_suppression_factor(self):
        expected = math.exp(-0.5 * float(np.sum(self.bath.displacements ** 2)))
        assert self.bath.josephson_suppression == pytest.approx(expected)
        assert 0 < self.bath.josephson_suppression < 1

    def test_requires_open_line(self):
        spec = make_spec("short")
        with pytest.raises(DomainError):
            charge_gauge_bath(line_normal_modes(spec), spec)

    def test_low_frequency_coupling_estimate(self):
        spec = make_spec(n_modes=32, z_ratio=1.0, omega_c=4.0)
        bath = charge_gauge_bath(line_normal_modes(spec), spec)
        # g_1^2/omega_1 -> 2 Delta z for a long line
        assert bath.couplings[0] ** 2 / bath.frequencies[0] == pytest.approx(2.0 * spec.delta * spec.z_ratio,
                                                                             rel=0.1)
        estimate = float(low_frequency_coupling(bath.frequencies[0], spec))
        assert bath.couplings[0] ** 2 == pytest.approx(estimate, rel=0.1)
        assert low_frequency_coupling(0.0, spec) == 0.0

    def test_trace_is_preserved(self):
        total = float(np.sum(self.bath.frequencies ** 2))
        expected = float(np.sum(self.modes.frequencies ** 2)) \
            + 16.0 * self.spec.e_c * float(np.sum(self.modes.couplings ** 2 / self.modes.frequencies))
        assert total == pytest.approx(expected, rel=1e-10)


class TestFluxLoop:
    @pytest.mark.parametrize("n_modes, z_ratio", [(1, 1.0), (3, 0.5), (6, 2.0)])
    def test_flux_hamiltonian_reproduces_full_circuit(self, n_modes, z_ratio):
        spec = make_spec("short", n_modes=n_modes, z_ratio=z_ratio)
        modes = line_normal_modes(spec)
        found = symplectic_frequencies(flux_loop_hessian(spec, modes))
        assert_allclose(found, full_circuit_normal_modes(spec), rtol=1e-9)

    def test_williamson_agrees_with_symplectic(self):
        spec = make_spec("short", n_modes=3)
        hessian = flux_loop_hessian(spec, line_normal_modes(spec))
        n = hessian.shape[0] // 2
        direct = williamson_frequencies(hessian[:n, :n], hessian[n:, n:])
        assert_allclose(np.sort(direct), symplectic_frequencies(hessian), rtol=1e-9)

    def test_renormalized_inductive_energy(self):
        spec = make_spec("short", n_modes=5)
        modes = line_normal_modes(spec)
        e_l_tilde, u0_tilde = renormalized_flux_scales(modes.frequencies, modes.couplings, spec.e_l, 0.1)
        assert e_l_tilde == pytest.approx(spec.e_l / (spec.n_modes + 1), rel=1e-10)
        assert 0 < u0_tilde < 0.1


class TestOneBandRatio:
    def test_open_ratio(self):
        spec = make_spec(e_j=0.5, n_modes=5)
        bath = charge_gauge_bath(line_normal_modes(spec), spec)
        ratio = one_band_renormalization(spec)
        assert ratio.value == pytest.approx(0.5 * bath.josephson_suppression / bath.e_c_tilde)
        assert not ratio.flagged

    def test_short_ratio_is_positive(self):
        ratio = one_band_renormalization(make_spec("short", e_j=2.0, n_modes=5), method="fit")
        assert ratio.value > 0
        assert ratio.to_dict()["boundary"] == "short"

    @pytest.mark.parametrize("z_ratio, grows", [(0.25, True), (4.0, False)])
    def test_ratio_flows_with_line_length(self, z_ratio, grows):
        values = [one_band_renormalization(make_spec(e_j=4.0, z_ratio=z_ratio, n_modes=n)).value
                  for n in (4, 8, 16)]
        steps = np.diff(values)
        assert np.all(steps > 0) if grows else np.all(steps < 0)
