"""Device model: gate potentials, control mapping, grid assembly."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad

from exchangesim.device import (
    ControlPoint,
    DeviceLayout,
    GateElement,
    MaterialParams,
    PotentialGrid,
    assemble_potential,
    gate_potential,
    grid_from_text,
    harmonic_well,
    interpolate_controls,
    model_double_well,
)
from exchangesim.errors import ConfigError


def make_gate(**kw):
    base = dict(x_min=-30.0, x_max=30.0, y_min=-20.0, y_max=20.0,
                voltage_off=-100.0, voltage_on=-50.0, role="plunger", name="g")
    base.update(kw)
    return GateElement(**base)


def simple_layout(gates=None, domain=(-60.0, 60.0, -60.0, 60.0)):
    if gates is None:
        gates = (make_gate(),)
    return DeviceLayout(gates=tuple(gates), material=MaterialParams(),
                        domain=domain)


class TestGatePotential:
    def test_matches_halfspace_quadrature(self):
        """Oracle: direct 2D quadrature of the pinned-surface kernel."""
        gate = make_gate()
        depth = 40.0

        def kernel(yp, xp, x, y):
            r2 = (x - xp) ** 2 + (y - yp) ** 2
            return depth / (2.0 * np.pi * (r2 + depth * depth) ** 1.5)

        for point in [(0.0, 0.0), (15.0, -8.0), (-45.0, 33.0), (100.0, 0.0)]:
            integral, _ = dblquad(kernel, gate.x_min, gate.x_max,
                                  gate.y_min, gate.y_max, args=point,
                                  epsabs=1e-13, epsrel=1e-13)
            expected = -(-100.0) * integral   # energy = -voltage * coverage
            got = gate_potential(gate, -100.0, point, depth)
            assert got == pytest.approx(expected, rel=1e-9)

    def test_center_of_large_gate_approaches_full_voltage(self):
        # The coverage deficit decays only like depth/size, so the gate must
        # be enormous relative to the 40 nm depth to get within 1e-4.
        gate = make_gate(x_min=-5e6, x_max=5e6, y_min=-5e6, y_max=5e6)
        u = gate_potential(gate, -100.0, (0.0, 0.0), 40.0)
        assert u == pytest.approx(100.0, rel=1e-4)

    def test_sign_convention(self):
        # A negative gate voltage raises the electron's potential energy.
        assert gate_potential(make_gate(), -100.0, (0.0, 0.0), 40.0) > 0
        assert gate_potential(make_gate(), 50.0, (0.0, 0.0), 40.0) < 0

    def test_mirror_symmetry(self):
        gate = make_gate()
        for y in (0.0, 11.0):
            left = gate_potential(gate, -80.0, (-12.0, y), 40.0)
            right = gate_potential(gate, -80.0, (12.0, y), 40.0)
            assert left == pytest.approx(right, rel=1e-12)

    def test_invalid_depth(self):
        with pytest.raises(ConfigError):
            gate_potential(make_gate(), -100.0, (0.0, 0.0), 0.0)

    @settings(max_examples=50, deadline=None)
    @given(x=st.floats(-200, 200), y=st.floats(-200, 200))
    def test_coverage_bounded(self, x, y):
        """|energy| never exceeds |applied voltage| (coverage in (0, 1))."""
        u = gate_potential(make_gate(), -100.0, (x, y), 40.0)
        assert 0.0 < u < 100.0


class TestGateElement:
    def test_degenerate_footprint_rejected(self):
        with pytest.raises(ConfigError):
            make_gate(x_min=30.0, x_max=30.0)

    def test_unknown_role_rejected(self):
        with pytest.raises(ConfigError):
            make_gate(role="accumulation")

    def test_channel_gate_must_hold_voltage(self):
        with pytest.raises(ConfigError):
            make_gate(role="channel", voltage_off=-100.0, voltage_on=-50.0)


class TestControlMapping:
    def test_plunger_interpolates_affinely(self):
        layout = simple_layout()
        for v, expected in [(0.0, -100.0), (0.5, -75.0), (1.0, -50.0)]:
            (_, applied), = interpolate_controls(layout, ControlPoint(v))
            assert applied == pytest.approx(expected)

    def test_channel_gate_fixed(self):
        gate = make_gate(role="channel", voltage_on=-100.0)
        layout = simple_layout((gate,))
        (_, applied), = interpolate_controls(layout, ControlPoint(0.7))
        assert applied == -100.0

    def test_control_range(self):
        ControlPoint(0.0)
        ControlPoint(1.1)
        with pytest.raises(ConfigError):
            ControlPoint(-0.01)
        with pytest.raises(ConfigError):
            ControlPoint(1.2)

    def test_plunger_swing(self):
        layout = simple_layout()
        assert layout.plunger_swing() == pytest.approx(50.0)


class TestAssemblePotential:
    def test_superposition(self):
        g1 = make_gate(name="a")
        g2 = make_gate(x_min=40.0, x_max=55.0, name="b")
        both = simple_layout((g1, g2))
        only1 = simple_layout((g1,))
        only2 = simple_layout((g2,))
        c = ControlPoint(0.3)
        v_both = assemble_potential(both, c, 33, 33).values
        v_sum = assemble_potential(only1, c, 33, 33).values \
            + assemble_potential(only2, c, 33, 33).values
        np.testing.assert_allclose(v_both, v_sum, atol=1e-12)

    def test_background_offset(self):
        layout = DeviceLayout(gates=(make_gate(),), material=MaterialParams(),
                              domain=(-60, 60, -60, 60), background_offset=25.0)
        base = simple_layout()
        c = ControlPoint(0.0)
        diff = assemble_potential(layout, c, 33, 33).values \
            - assemble_potential(base, c, 33, 33).values
        np.testing.assert_allclose(diff, -25.0, atol=1e-12)

    def test_rejects_tiny_grid(self):
        with pytest.raises(ConfigError):
            assemble_potential(simple_layout(), ControlPoint(0.0), 8, 8)

    def test_rejects_non_square_cells(self):
        layout = simple_layout(domain=(-60.0, 60.0, -30.0, 30.0))
        with pytest.raises(ConfigError):
            assemble_potential(layout, ControlPoint(0.0), 33, 33)

    def test_gate_outside_domain_rejected(self):
        with pytest.raises(ConfigError):
            simple_layout((make_gate(x_min=100.0, x_max=140.0),))

    def test_degenerate_domain_rejected(self):
        with pytest.raises(ConfigError):
            simple_layout(domain=(60.0, -60.0, -60.0, 60.0))

    def test_grid_geometry(self):
        grid = assemble_potential(simple_layout(), ControlPoint(0.0), 25, 25)
        assert grid.spacing == pytest.approx(120.0 / 24)
        xs, ys = grid.axes()
        assert xs[0] == -60.0 and xs[-1] == pytest.approx(60.0)
        assert ys[0] == -60.0 and ys[-1] == pytest.approx(60.0)


class TestModelPotentials:
    def test_double_well_minima(self):
        grid = model_double_well(40.0, 3.0, 1.0, 81, 81, (-80, 80, -80, 80))
        xs, _ = grid.axes()
        mid = grid.values[:, 40]
        assert mid[40] > mid.min()          # barrier at the center
        left = xs[np.argmin(mid[:40])]
        assert left == pytest.approx(-20.0, abs=grid.spacing)

    def test_double_well_parameter_validation(self):
        with pytest.raises(ConfigError):
            model_double_well(0.0, 3.0, 1.0, 33, 33, (-60, 60, -60, 60))
        with pytest.raises(ConfigError):
            model_double_well(40.0, -1.0, 1.0, 33, 33, (-60, 60, -60, 60))

    def test_harmonic_well_curvature(self):
        # V(r) = (hbar w)^2 r^2 / (4 hbar^2/2m): check against a point.
        from exchangesim.constants import HBAR2_OVER_2ME
        hw = 3.0
        grid = harmonic_well(hw, 41, 41, (-80, 80, -80, 80))
        xs, _ = grid.axes()
        i = np.argmin(np.abs(xs - 40.0))
        k = hw ** 2 / (4.0 * HBAR2_OVER_2ME / 0.19)
        assert grid.values[i, 20] == pytest.approx(k * xs[i] ** 2, rel=1e-12)


class TestGridIO:
    def test_text_round_trip(self):
        grid = assemble_potential(simple_layout(), ControlPoint(0.4), 17, 17)
        back = grid_from_text(grid.to_text(), origin=grid.origin)
        assert back.nx == grid.nx and back.ny == grid.ny
        assert back.spacing == grid.spacing
        np.testing.assert_array_equal(back.values, grid.values)

    def test_missing_header_rejected(self):
        with pytest.raises(ConfigError):
            grid_from_text("1 2 3\n4 5 6\n")

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            PotentialGrid(nx=3, ny=3, spacing=1.0, origin=(0, 0),
                          values=np.zeros((3, 4)))

    def test_non_finite_rejected(self):
        values = np.zeros((3, 3))
        values[1, 1] = np.nan
        with pytest.raises(ConfigError):
            PotentialGrid(nx=3, ny=3, spacing=1.0, origin=(0, 0),
                          values=values)


class TestMaterialParams:
    @pytest.mark.parametrize("field,value", [
        ("effective_mass", 0.0),
        ("relative_permittivity", 0.5),
        ("dot_depth", -1.0),
        ("softening_length", 0.0),
    ])
    def test_invalid_values_rejected(self, field, value):
        with pytest.raises(ConfigError):
            MaterialParams(**{field: value})
