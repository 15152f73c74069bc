"""Exact operator algebra: commutators, gauge invariance, nullspaces,
local generators, centers, and sector labels."""

from fractions import Fraction

import numpy as np
import pytest

from latgauge.algebra import (
    GeneratorSet,
    Region,
    b_operator,
    center_basis,
    center_dimension,
    commutator_scalar,
    constraint_operator,
    dressing_exponent,
    gauge_invariant_nullspace,
    in_center_span,
    is_gauge_invariant,
    local_generators,
    p_op,
    q_op,
    sector_label,
)
from latgauge.gaussian import NonNeutralWarning, coulomb_momentum
from latgauge.grid import GridSpec, ScalarField
from latgauge.matter import MatterConfig, density
from latgauge.spectral import build_kernels


class TestCommutator:
    def test_canonical_pair(self):
        assert commutator_scalar(q_op((0, 0), "x"), p_op((0, 0), "x")) == 1

    def test_component_mismatch(self):
        assert commutator_scalar(q_op((0, 0), "x"), p_op((0, 0), "y")) == 0

    def test_b_commutes_with_every_cross(self):
        grid = GridSpec(7, 1.0)
        b = b_operator(grid, (3, 3))
        for n in range(7):
            for m in range(7):
                assert commutator_scalar(b, constraint_operator(grid, (n, m))) == 0

    def test_antisymmetry(self):
        grid = GridSpec(7, 1.0)
        ops = [
            b_operator(grid, (2, 3)),
            constraint_operator(grid, (3, 3)),
            q_op((2, 2), "y") + 3 * p_op((4, 1), "x"),
        ]
        for lhs in ops:
            for rhs in ops:
                assert commutator_scalar(lhs, rhs) == -commutator_scalar(rhs, lhs)

    def test_bilinearity_exact(self):
        grid = GridSpec(7, 1.0)
        a = q_op((1, 1), "x") + Fraction(2, 3) * q_op((1, 2), "y")
        b = p_op((1, 1), "x") - Fraction(5, 7) * p_op((1, 2), "y")
        c = constraint_operator(grid, (1, 2))
        lam = Fraction(9, 4)
        assert commutator_scalar(a + lam * b, c) == commutator_scalar(
            a, c
        ) + lam * commutator_scalar(b, c)

    def test_rational_spacing_embeds_exactly(self):
        grid = GridSpec(5, 0.5)
        cross = constraint_operator(grid, (2, 2))
        assert cross.p_coeffs[((2, 3), "x")] == Fraction(1, 1)  # 1/(2*0.5)


class TestGaugeInvariance:
    def test_momentum_is_invariant(self):
        assert is_gauge_invariant(p_op((3, 3), "x"), GridSpec(7, 1.0))

    def test_position_is_not(self):
        assert not is_gauge_invariant(q_op((3, 3), "x"), GridSpec(7, 1.0))

    def test_magnetic_cross_is_invariant(self):
        grid = GridSpec(7, 1.0)
        assert is_gauge_invariant(b_operator(grid, (3, 3)), grid)

    def test_all_sites_all_small_lattices(self):
        for n in (5, 7, 9):
            grid = GridSpec(n, 1.0)
            for i in range(n):
                for j in range(n):
                    assert is_gauge_invariant(b_operator(grid, (i, j)), grid)


class TestNullspace:
    def test_cross_support_is_spanned_by_b(self):
        grid = GridSpec(9, 1.0)
        center = (4, 4)
        support = [
            (center[0] + 1, center[1]),
            (center[0] - 1, center[1]),
            (center[0], center[1] + 1),
            (center[0], center[1] - 1),
        ]
        basis = gauge_invariant_nullspace(support, grid)
        assert len(basis) == 1
        b = b_operator(grid, center)
        op = basis[0]
        ratios = {
            op.q_coeffs.get(key, Fraction(0)) / coeff for key, coeff in b.q_coeffs.items()
        }
        assert len(ratios) == 1 and Fraction(0) not in ratios
        assert set(op.q_coeffs) == set(b.q_coeffs)

    def test_single_site_support_is_trivial(self):
        assert gauge_invariant_nullspace([(4, 4)], GridSpec(9, 1.0)) == []

    def test_m4_square_dimension(self):
        grid = GridSpec(11, 1.0)
        basis = gauge_invariant_nullspace(Region.square((3, 3), 4), grid)
        assert len(basis) == 4

    def test_every_nullspace_element_is_invariant(self):
        grid = GridSpec(11, 1.0)
        for op in gauge_invariant_nullspace(Region.square((3, 3), 4), grid):
            assert is_gauge_invariant(op, grid)

    def test_four_crosses_through_one_site(self):
        # widen the support around a site until all four magnetic
        # crosses containing it fit; each must appear in the nullspace
        grid = GridSpec(9, 1.0)
        site = (4, 4)
        support = [
            (i, j) for i in range(site[0] - 2, site[0] + 3)
            for j in range(site[1] - 2, site[1] + 3)
        ]
        basis = gauge_invariant_nullspace(support, grid)
        span = GeneratorSet(basis)  # just to assert independence
        assert len(span) == 9  # (5-2)^2 crosses fit the 5x5 block
        centers = [(4, 5), (4, 3), (5, 4), (3, 4)]
        coords = sorted({k for op in basis for k in op.q_coeffs})
        index = {c: i for i, c in enumerate(coords)}

        def to_vec(op):
            vec = [Fraction(0)] * len(coords)
            for key, val in op.q_coeffs.items():
                vec[index[key]] = val
            return vec

        from latgauge.algebra import _IncrementalRref

        for center in centers:
            b = b_operator(grid, center)
            tracker = _IncrementalRref(len(coords))
            for op in basis:
                tracker.try_insert(to_vec(op))
            assert tracker.contains(to_vec(b))


class TestLocalGenerators:
    def test_m3_counts(self):
        grid = GridSpec(9, 1.0)
        gens = local_generators(Region.square((3, 3), 3), grid)
        kinds = [label.kind for label in gens.labels]
        assert kinds.count("P") == 18 and kinds.count("B") == 1

    def test_m5_counts(self):
        grid = GridSpec(11, 1.0)
        gens = local_generators(Region.square((3, 3), 5), grid)
        kinds = [label.kind for label in gens.labels]
        assert kinds.count("P") == 50 and kinds.count("B") == 9

    def test_generators_are_gauge_invariant(self):
        grid = GridSpec(11, 1.0)
        gens = local_generators(Region.square((3, 3), 5), grid)
        assert all(is_gauge_invariant(g, grid) for g in gens.generators)

    def test_disjoint_regions_commute(self):
        grid = GridSpec(11, 1.0)
        gens_a = local_generators(Region.square((1, 1), 3), grid)
        gens_b = local_generators(Region.square((6, 6), 3), grid)
        assert all(
            commutator_scalar(ga, gb) == 0
            for ga in gens_a.generators
            for gb in gens_b.generators
        )

    def test_region_validation(self):
        with pytest.raises(ValueError):
            Region.square((0, 0), 2)
        with pytest.raises(ValueError):
            Region.square((8, 8), 5).validate_on(GridSpec(11, 1.0))
        with pytest.raises(ValueError):
            Region((0, 0), 3, 4)


class TestCenter:
    def test_m3_dimension_from_exact_nullspace(self):
        # one magnetic cross pairs off exactly one momentum direction
        # (its q-part is a single functional on the p's, not two), so
        # 2 M^2 - (M-2)^2 = 17
        grid = GridSpec(9, 1.0)
        assert center_dimension(Region.square((3, 3), 3), grid) == 17

    def test_m5_dimension(self):
        grid = GridSpec(11, 1.0)
        region = Region.square((3, 3), 5)
        assert center_dimension(region, grid) == 50 - 9
        assert len(center_basis(region, grid).generators) == 41

    def test_interior_crosses_lie_in_center(self):
        grid = GridSpec(11, 1.0)
        region = Region.square((3, 3), 5)
        for site in region.stencil_interior_sites():
            assert in_center_span(constraint_operator(grid, site), region, grid)

    def test_center_elements_commute_with_all_generators(self):
        grid = GridSpec(11, 1.0)
        region = Region.square((3, 3), 5)
        basis = center_basis(region, grid)
        gens = local_generators(region, grid)
        assert all(
            commutator_scalar(z, g) == 0
            for z in basis.generators
            for g in gens.generators
        )

    def test_labels_cover_the_catalog_kinds(self):
        grid = GridSpec(11, 1.0)
        basis = center_basis(Region.square((3, 3), 5), grid)
        kinds = {label.kind for label in basis.labels}
        assert kinds == {"CROSS", "EDGE", "CORNER"}
        crosses = [label for label in basis.labels if label.kind == "CROSS"]
        assert len(crosses) == 9

    def test_non_member_rejected(self):
        grid = GridSpec(11, 1.0)
        region = Region.square((3, 3), 5)
        assert not in_center_span(b_operator(grid, (5, 5)), region, grid)
        assert not in_center_span(p_op((0, 0), "x"), region, grid)  # outside

    @pytest.mark.parametrize("m,n", [(3, 9), (4, 11), (7, 15)])
    def test_dimension_formula_across_sizes(self, m, n):
        # each magnetic cross pairs off one momentum direction
        grid = GridSpec(n, 1.0)
        region = Region.square((1, 1), m)
        basis = center_basis(region, grid)
        assert len(basis.generators) == 2 * m * m - (m - 2) ** 2


class TestSectorLabel:
    def test_vacuum_labels_vanish(self):
        grid = GridSpec(11, 1.0)
        region = Region.square((3, 3), 5)
        from latgauge.grid import VectorField

        labels = sector_label(VectorField.zeros(grid), region, ScalarField.zeros(grid))
        assert labels == [0.0] * len(labels)

    def test_interior_charge_reads_minus_rho_on_crosses(self):
        grid = GridSpec(21, 1.0)
        kernels = build_kernels(grid)
        region = Region.square((7, 7), 7)
        config = MatterConfig.from_sites(grid, [(10, 10)])
        rho = density(config)
        with pytest.warns(NonNeutralWarning):
            p = coulomb_momentum(rho, kernels)
        basis = center_basis(region, grid)
        values = sector_label(p, region, rho)
        mean = 1.0 / grid.n**2  # uniform mode dropped with the zero mode
        edge_seen = 0.0
        for label, value in zip(basis.labels, values):
            if label.kind == "CROSS":
                expected = -(rho.values[label.site] - mean)
                assert value == pytest.approx(expected, abs=1e-9)
            elif label.kind == "EDGE":
                edge_seen = max(edge_seen, abs(value))
        assert edge_seen > 1e-6  # the background leaks through the boundary

    def test_outside_support_is_invisible(self):
        grid = GridSpec(13, 1.0)
        region = Region.square((1, 1), 5)
        rng = np.random.default_rng(0)
        from latgauge.grid import VectorField

        base = VectorField.from_arrays(
            grid, rng.standard_normal(grid.shape), rng.standard_normal(grid.shape)
        )
        bumped = base.copy()
        bumped.x.values[10, 10] += 3.0  # outside the region's closure
        bumped.y.values[9, 11] -= 2.0
        rho = ScalarField.zeros(grid)
        assert sector_label(base, region, rho) == sector_label(bumped, region, rho)


class TestDressingExponent:
    def test_commutator_bookkeeping(self):
        # the exponent of the left-move dressing pairs with exactly the
        # two crosses the move affects, with opposite unit weights
        grid = GridSpec(11, 1.0)
        row, col = 5, 5
        w = dressing_exponent(grid, (row, col - 1), -2.0 * grid.spacing)
        for n in range(11):
            for m in range(11):
                c = commutator_scalar(w, constraint_operator(grid, (n, m)))
                if (n, m) == (row, col):
                    assert c == 1
                elif (n, m) == (row, col - 2):
                    assert c == -1
                else:
                    assert c == 0


class TestRendering:
    def test_plain_text_dump(self):
        grid = GridSpec(9, 1.0)
        text = str(b_operator(grid, (4, 4)))
        assert "q_y[4,5]" in text and "(-1/2)" in text and "(1/2)" in text

    def test_scalar_only(self):
        from latgauge.algebra import LinearOperator

        assert str(LinearOperator(scalar=Fraction(3, 4))) == "(3/4)"


class TestGeneratorSet:
    def test_rejects_dependent_generators(self):
        grid = GridSpec(9, 1.0)
        b = b_operator(grid, (4, 4))
        with pytest.raises(ValueError):
            GeneratorSet([b, 2 * b])

    def test_rejects_duplicate_singletons(self):
        with pytest.raises(ValueError):
            GeneratorSet([p_op((1, 1), "x"), p_op((1, 1), "x")])
