"""Discrete calculus identities and field container behavior."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from latgauge.grid import (
    GridSpec,
    ScalarField,
    VectorField,
    curl_z,
    dbar,
    divergence,
    sum_by_parts_residual,
)


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return ScalarField(grid, rng.standard_normal(grid.shape))


class TestGridSpec:
    def test_rejects_small_lattice(self):
        with pytest.raises(ValueError):
            GridSpec(2, 1.0)

    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(ValueError):
            GridSpec(5, 0.0)

    def test_wrap(self):
        grid = GridSpec(5, 1.0)
        assert grid.wrap(-1, 5) == (4, 0)
        assert grid.wrap(7, -3) == (2, 2)


class TestDbar:
    def test_constant_field_derivative_vanishes(self):
        grid = GridSpec(6, 0.5)
        f = ScalarField.constant(grid, 3.7)
        assert dbar(f, "x").max_abs() == 0.0
        assert dbar(f, "y").max_abs() == 0.0

    def test_column_ramp_stencil_by_hand(self):
        # f[i,j] = j on N=5, a=1: interior slope 1, wrap columns -1.5
        grid = GridSpec(5, 1.0)
        f = ScalarField(grid, np.tile(np.arange(5.0), (5, 1)))
        dx = dbar(f, "x").values
        expected = np.tile([-1.5, 1.0, 1.0, 1.0, -1.5], (5, 1))
        np.testing.assert_array_equal(dx, expected)

    def test_schwarz_commutation_exact(self):
        grid = GridSpec(7, 1.0)
        f = random_field(grid, 1)
        xy = dbar(dbar(f, "y"), "x")
        yx = dbar(dbar(f, "x"), "y")
        assert (xy - yx).max_abs() < 1e-15

    def test_rejects_unknown_direction(self):
        grid = GridSpec(5, 1.0)
        with pytest.raises(ValueError):
            dbar(ScalarField.zeros(grid), "z")

    @given(
        data=arrays(np.float64, (6, 6), elements=st.floats(-10, 10)),
        alpha=st.floats(-5, 5),
        beta=st.floats(-5, 5),
    )
    @settings(max_examples=50, deadline=None)
    def test_linearity(self, data, alpha, beta):
        grid = GridSpec(6, 1.0)
        f = ScalarField(grid, data)
        g = ScalarField(grid, data[::-1].copy())
        combo = dbar(ScalarField(grid, alpha * data + beta * g.values), "x")
        separate = alpha * dbar(f, "x") + beta * dbar(g, "x")
        scale = max(combo.max_abs(), 1.0)
        assert (combo - separate).max_abs() < 1e-13 * scale

    def test_symmetric_product_rule_exact(self):
        grid = GridSpec(8, 1.0)
        f = random_field(grid, 2)
        g = random_field(grid, 3)
        fg = ScalarField(grid, f.values * g.values)
        for direction, axis in (("x", 1), ("y", 0)):
            mid_g = 0.5 * (np.roll(g.values, -1, axis) + np.roll(g.values, 1, axis))
            mid_f = 0.5 * (np.roll(f.values, -1, axis) + np.roll(f.values, 1, axis))
            lhs = dbar(fg, direction).values
            rhs = mid_g * dbar(f, direction).values + mid_f * dbar(g, direction).values
            assert np.max(np.abs(lhs - rhs)) < 1e-14


class TestCurlDivergence:
    def test_zero_field(self):
        grid = GridSpec(5, 1.0)
        assert curl_z(VectorField.zeros(grid)).max_abs() == 0.0
        assert divergence(VectorField.zeros(grid)).max_abs() == 0.0

    def test_pure_gauge_has_no_curl(self):
        grid = GridSpec(9, 1.0)
        eps = random_field(grid, 4)
        q = VectorField(-1.0 * dbar(eps, "x"), -1.0 * dbar(eps, "y"))
        assert curl_z(q).max_abs() < 1e-15

    def test_column_ramp_curl(self):
        grid = GridSpec(5, 1.0)
        ramp = ScalarField(grid, np.tile(np.arange(5.0), (5, 1)))
        q = VectorField(ScalarField.zeros(grid), ramp)
        np.testing.assert_array_equal(curl_z(q).values, dbar(ramp, "x").values)

    def test_gradient_pair_divergence_is_laplacian(self):
        grid = GridSpec(9, 1.0)
        s = random_field(grid, 5)
        p = VectorField(dbar(s, "x"), dbar(s, "y"))
        laplacian = dbar(dbar(s, "x"), "x") + dbar(dbar(s, "y"), "y")
        assert (divergence(p) - laplacian).max_abs() < 1e-15

    def test_curl_type_field_is_divergence_free(self):
        grid = GridSpec(9, 1.0)
        g = random_field(grid, 6)
        p = VectorField(dbar(g, "y"), -1.0 * dbar(g, "x"))
        assert divergence(p).max_abs() < 1e-15


class TestSumByParts:
    def test_unit_weight_telescopes(self):
        grid = GridSpec(9, 1.0)
        f = random_field(grid, 7)
        g = ScalarField.constant(grid, 1.0)
        # g = 1: the identity reduces to the periodic telescoping sum
        assert abs(sum_by_parts_residual(f, g, "x")) < 1e-13

    def test_random_fields(self):
        grid = GridSpec(9, 1.0)
        f = random_field(grid, 8)
        g = random_field(grid, 9)
        bound = 1e-12 * f.norm() * g.norm()
        for direction in ("x", "y"):
            assert abs(sum_by_parts_residual(f, g, direction)) < bound

    def test_self_pairing_antisymmetry(self):
        grid = GridSpec(7, 1.0)
        f = random_field(grid, 10)
        assert abs(sum_by_parts_residual(f, f, "y")) < 1e-13


class TestSerialization:
    def test_csv_round_trip(self, tmp_path):
        grid = GridSpec(4, 0.5)
        f = random_field(grid, 11)
        path = tmp_path / "field.csv"
        f.to_csv(path)
        back = ScalarField.from_csv(path)
        assert back.grid == grid
        np.testing.assert_array_equal(back.values, f.values)

    def test_json_round_trip_bit_exact(self, tmp_path):
        grid = GridSpec(5, 1.0)
        f = random_field(grid, 12)
        f.values[0, 0] = 0.1 + 0.2  # a value without a short decimal form
        path = tmp_path / "field.json"
        f.to_json(path)
        back = ScalarField.from_json(path)
        assert back.grid == grid
        assert (back.values == f.values).all()

    def test_csv_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nope\n5,1.0\n")
        with pytest.raises(ValueError):
            ScalarField.from_csv(path)


class TestVectorField:
    def test_mismatched_grids_rejected(self):
        with pytest.raises(ValueError):
            VectorField(
                ScalarField.zeros(GridSpec(4, 1.0)),
                ScalarField.zeros(GridSpec(5, 1.0)),
            )

    def test_component_lookup(self):
        grid = GridSpec(4, 1.0)
        v = VectorField.zeros(grid)
        assert v.component("x") is v.x
        assert v.component("y") is v.y
        with pytest.raises(ValueError):
            v.component("z")
