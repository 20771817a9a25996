"""Field layer: Green's function, spectral sampler, harmonic extension and
the binary dump format.

The two load-bearing identities are checked by independent routes: the dense
Green matrix against random-walk occupation times, and the sampler's implied
covariance against that same matrix assembled through the eigenbasis.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from gffperc import gff
from gffperc.gff import (
    ZERO_BC,
    alternating_bc,
    boundary_values,
    dirichlet_green_dense,
    green_center_diagonal,
    harmonic_extension,
    load_field,
    sample_with_boundary,
    sample_zero_boundary,
    sample_zero_boundary_batch,
    save_field,
    sine_transform_2d,
)
from gffperc.lattice import Arc, build_lattice


class TestGreenMatrix:
    def test_single_interior_vertex(self):
        lat = build_lattice(1.0, 1 / 4)
        g = dirichlet_green_dense(lat)
        assert g.matrix.shape == (1, 1)
        assert g.matrix[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_symmetry_and_positivity(self):
        lat = build_lattice(1.5, 1 / 8)
        g = dirichlet_green_dense(lat)
        assert np.array_equal(g.matrix, g.matrix.T)
        assert (np.linalg.eigvalsh(g.matrix) > 0).all()
        assert (g.matrix > 0).all()  # irreducible interior walk

    def test_boundary_rows_are_zero(self):
        lat = build_lattice(1.0, 1 / 8)
        g = dirichlet_green_dense(lat)
        b = int(np.flatnonzero(lat.boundary_mask)[0])
        u = int(lat.interior_ids[0])
        assert g.value(b, u) == 0.0
        assert g.value(b, b) == 0.0

    def test_frame_adjacent_diagonal_below_four(self):
        lat = build_lattice(1.0, 1 / 12)
        g = dirichlet_green_dense(lat)
        for v in map(int, lat.interior_ids):
            i, j = lat.grid_coords(v)
            if min(i - 1, lat.nx - i, j - 1, lat.ny - j) == 1:
                assert g.value(v, v) <= 4.0

    def test_against_walk_occupation_times(self):
        lat = build_lattice(1.0, 1 / 8)
        g = dirichlet_green_dense(lat)
        u = lat.vertex_id(4, 4)
        for v, seed in ((lat.vertex_id(4, 4), 2), (lat.vertex_id(5, 4), 3),
                        (lat.vertex_id(2, 2), 4)):
            mc, se = oracles.srw_occupation_mc(lat, u, v, 60_000, seed)
            assert abs(mc - g.value(u, v)) < 5 * se

    def test_centre_diagonal_matches_dense(self):
        lat = build_lattice(1.0, 1 / 8)
        g = dirichlet_green_dense(lat)
        centre = lat.vertex_id(4, 4)
        assert green_center_diagonal(7) == pytest.approx(g.value(centre, centre),
                                                         abs=1e-10)

    def test_centre_diagonal_log_growth_slope(self):
        # The growth constant is measured, not assumed; the band brackets
        # 2/pi and excludes pi/2 by a wide margin.
        extents = np.array([17, 33, 65, 129])
        diags = [green_center_diagonal(int(n)) for n in extents]
        slope = float(np.polyfit(np.log(extents), diags, 1)[0])
        assert 0.5 <= slope <= 0.75


class TestSineTransform:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 70), st.integers(2, 70), st.integers(0, 10_000))
    def test_naive_matches_fast(self, rows, cols, seed):
        arr = np.random.default_rng(seed).standard_normal((rows, cols))
        naive = sine_transform_2d(arr, method="naive")
        fast = sine_transform_2d(arr, method="fast")
        assert np.max(np.abs(naive - fast)) < 1e-8

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 40), st.integers(2, 40), st.integers(0, 10_000))
    def test_involution_and_isometry(self, rows, cols, seed):
        arr = np.random.default_rng(seed).standard_normal((rows, cols))
        out = sine_transform_2d(arr)
        assert np.max(np.abs(sine_transform_2d(out) - arr)) < 1e-10
        assert np.linalg.norm(out) == pytest.approx(np.linalg.norm(arr), rel=1e-12)

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError):
            sine_transform_2d(np.ones((3, 3)), method="wavelet")


class TestSampler:
    def test_implied_covariance_equals_green(self):
        # Kronecker-assembled sampler covariance vs the resolvent route.
        lat = build_lattice(1.0, 1 / 8)
        my, mx = lat.interior_shape
        t = np.kron(gff._sine_matrix(my), gff._sine_matrix(mx))
        lam = gff._generator_eigenvalues(lat).ravel()
        cov = (t / lam) @ t.T
        dense = dirichlet_green_dense(lat).matrix
        assert np.max(np.abs(cov - dense)) < 1e-10

    def test_determinism_and_boundary_zeros(self):
        lat = build_lattice(1.0, 1 / 8)
        one = sample_zero_boundary(lat, 42)
        two = sample_zero_boundary(lat, 42)
        other = sample_zero_boundary(lat, 43)
        assert np.array_equal(one.values, two.values)
        assert not np.array_equal(one.values, other.values)
        assert (one.values[lat.boundary_mask] == 0).all()
        assert (one.values[lat.interior_mask] != 0).all()

    def test_batch_matches_single_sample_law(self):
        lat = build_lattice(1.0, 1 / 8)
        batch = sample_zero_boundary_batch(lat, 4000, 7)
        assert batch.shape == (4000, lat.n_interior)
        centre_col = int(lat.interior_index[lat.vertex_id(4, 4)])
        g_cc = dirichlet_green_dense(lat).value(lat.vertex_id(4, 4),
                                                lat.vertex_id(4, 4))
        var = batch[:, centre_col].var()
        se = g_cc * math.sqrt(2.0 / 4000)
        assert abs(var - g_cc) < 5 * se
        assert abs(batch[:, centre_col].mean()) < 5 * math.sqrt(g_cc / 4000)

    def test_empty_interior_raises(self):
        lat = build_lattice(2.0, 1 / 3)
        with pytest.raises(ValueError):
            sample_zero_boundary(lat, 0)


class TestHarmonicExtension:
    def test_constant_data(self):
        lat = build_lattice(1.0, 1 / 8)
        out = harmonic_extension(lat, np.full(lat.n_vertices, -1.75))
        assert np.max(np.abs(out.values + 1.75)) < 1e-9

    def test_single_vertex_is_neighbour_average(self):
        lat = build_lattice(1.0, 1 / 4)
        rng = np.random.default_rng(5)
        data = np.zeros(lat.n_vertices)
        data[lat.boundary_mask] = rng.uniform(-3, 3, 8)
        out = harmonic_extension(lat, data)
        nbrs = [lat.vertex_id(1, 2), lat.vertex_id(3, 2),
                lat.vertex_id(2, 1), lat.vertex_id(2, 3)]
        centre = lat.vertex_id(2, 2)
        assert out.values[centre] == pytest.approx(float(data[nbrs].mean()), abs=1e-12)

    def test_against_walk_exit_values(self):
        lat = build_lattice(1.0, 1 / 8)
        rng = np.random.default_rng(0)
        data = np.zeros(lat.n_vertices)
        data[lat.boundary_mask] = rng.uniform(-2, 2, int(lat.boundary_mask.sum()))
        out = harmonic_extension(lat, data)
        u = lat.vertex_id(4, 4)
        mc, se = oracles.srw_exit_value_mc(lat, data, u, 60_000, 4)
        assert abs(mc - out.values[u]) < 5 * se

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_maximum_principle(self, seed):
        lat = build_lattice(1.0, 1 / 8)
        rng = np.random.default_rng(seed)
        data = np.zeros(lat.n_vertices)
        data[lat.boundary_mask] = rng.uniform(-5, 5, int(lat.boundary_mask.sum()))
        out = harmonic_extension(lat, data)
        lo, hi = data[lat.boundary_mask].min(), data[lat.boundary_mask].max()
        assert (out.values >= lo - 1e-12).all()
        assert (out.values <= hi + 1e-12).all()

    def test_linearity(self):
        lat = build_lattice(1.0, 1 / 8)
        rng = np.random.default_rng(9)
        nb = int(lat.boundary_mask.sum())
        f = np.zeros(lat.n_vertices)
        g = np.zeros(lat.n_vertices)
        f[lat.boundary_mask] = rng.standard_normal(nb)
        g[lat.boundary_mask] = rng.standard_normal(nb)
        combo = harmonic_extension(lat, 2.0 * f - 0.5 * g).values
        split = 2.0 * harmonic_extension(lat, f).values \
            - 0.5 * harmonic_extension(lat, g).values
        assert np.max(np.abs(combo - split)) < 1e-9


class TestBoundaryConditions:
    def test_zero(self):
        lat = build_lattice(1.0, 1 / 8)
        assert not boundary_values(lat, ZERO_BC).any()

    def test_alternating_signs(self):
        lat = build_lattice(1.0, 1 / 8)
        vals = boundary_values(lat, alternating_bc(0.7))
        lab = lat.arc_label
        assert (vals[(lab == Arc.LEFT) | (lab == Arc.RIGHT)] == 0.7).all()
        assert (vals[(lab == Arc.BOTTOM) | (lab == Arc.TOP)] == -0.7).all()
        assert not vals[lat.interior_mask].any()

    def test_validation(self):
        with pytest.raises(ValueError):
            alternating_bc(-1.0)
        with pytest.raises(ValueError):
            gff.BoundaryCondition("periodic")

    def test_sample_with_boundary_frame_and_mean(self):
        lat = build_lattice(1.0, 1 / 8)
        bc = alternating_bc(1.3)
        target = boundary_values(lat, bc)
        mean = harmonic_extension(lat, target).values
        centre = lat.vertex_id(4, 4)
        g_cc = dirichlet_green_dense(lat).value(centre, centre)
        acc = 0.0
        n = 3000
        for seed in range(n):
            f = sample_with_boundary(lat, bc, seed)
            acc += f.values[centre]
            if seed < 10:
                assert np.array_equal(f.values[lat.boundary_mask],
                                      target[lat.boundary_mask])
        assert abs(acc / n - mean[centre]) < 5 * math.sqrt(g_cc / n)


class TestDumpFormat:
    def test_round_trip_with_alternating_bc(self, tmp_path):
        lat = build_lattice(1.0, 1 / 8)
        field = sample_with_boundary(lat, alternating_bc(1.1), 3)
        path = str(tmp_path / "f.bin")
        save_field(field, path)
        back = load_field(path, lat)
        assert np.array_equal(back.values, field.values)
        assert back.bc.kind == "alternating"
        assert back.bc.lam == 1.1
        assert back.lat is lat

    def test_round_trip_zero_bc_without_lattice(self, tmp_path):
        lat = build_lattice(1.0, 1 / 4)
        field = sample_with_boundary(lat, ZERO_BC, 0)
        path = str(tmp_path / "f.bin")
        save_field(field, path)
        back = load_field(path)
        assert np.array_equal(back.values, field.values)
        assert back.bc.kind == "zero"
        assert back.lat is None

    def test_header_is_32_bytes_and_magic_checked(self, tmp_path):
        lat = build_lattice(1.0, 1 / 4)
        field = sample_with_boundary(lat, ZERO_BC, 0)
        path = str(tmp_path / "f.bin")
        save_field(field, path)
        raw = open(path, "rb").read()
        assert len(raw) == 32 + lat.n_vertices * 8
        bad = str(tmp_path / "bad.bin")
        open(bad, "wb").write(b"NOTAHDR!" + raw[8:])
        with pytest.raises(ValueError):
            load_field(bad)

    def test_lattice_shape_mismatch_rejected(self, tmp_path):
        lat = build_lattice(1.0, 1 / 4)
        field = sample_with_boundary(lat, ZERO_BC, 0)
        path = str(tmp_path / "f.bin")
        save_field(field, path)
        with pytest.raises(ValueError):
            load_field(path, build_lattice(1.0, 1 / 8))
