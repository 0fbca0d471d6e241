import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import finite_difference_jacobian
from skmzbf import (DimensionError, GaussianLayer, ParameterError, check_embedding, gauss_kernel,
                    kernel_map, kernel_map_jacobian)

coords = st.floats(-5.0, 5.0, allow_nan=False)


class TestGaussKernel:
    def test_identity_point(self):
        assert gauss_kernel([0.3, -1.2], [0.3, -1.2], 0.7) == 1.0

    def test_distance_equal_to_bandwidth(self):
        assert gauss_kernel([1.0, 0.0], [0.0, 0.0], 1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)

    def test_hand_value(self):
        # ||x - c||^2 = 4, sigma^2 = 8
        assert gauss_kernel([2.0, 0.0], [0.0, 0.0], 2 * math.sqrt(2)) == pytest.approx(
            0.6065306597, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            gauss_kernel([1.0, 0.0], [0.0, 0.0, 0.0], 1.0)

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_nonpositive_bandwidth(self, sigma):
        with pytest.raises(ParameterError):
            gauss_kernel([1.0], [0.0], sigma)


class TestGaussianLayer:
    def test_scalar_bandwidth_broadcasts(self, two_center_layer):
        assert two_center_layer.bandwidths.tolist() == [1.0, 1.0]
        assert (two_center_layer.n_c, two_center_layer.n_d) == (2, 2)

    def test_duplicate_center_rejected(self):
        with pytest.raises(ParameterError):
            GaussianLayer([[0.0, 0.0], [0.0, 0.0]], 1.0)

    def test_same_center_other_bandwidth_allowed(self):
        layer = GaussianLayer([[0.0, 0.0], [0.0, 0.0]], [1.0, 0.5])
        assert layer.n_c == 2

    def test_bandwidth_count_mismatch(self):
        with pytest.raises(DimensionError):
            GaussianLayer([[0.0, 0.0], [1.0, 0.0]], [1.0, 1.0, 1.0])

    def test_layer_is_immutable(self, two_center_layer):
        with pytest.raises(ValueError):
            two_center_layer.centers[0, 0] = 5.0

    def test_merged_drops_duplicates(self, two_center_layer):
        other = GaussianLayer([[1.0, 0.0], [2.0, 0.0]], 1.0)
        merged = two_center_layer.merged(other)
        assert merged.centers.tolist() == [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]


class TestKernelMap:
    def test_at_first_center(self, two_center_layer):
        np.testing.assert_allclose(kernel_map(two_center_layer, [0.0, 0.0]), [1.0, math.exp(-1)],
                                   atol=1e-15)

    def test_symmetry(self, two_center_layer):
        np.testing.assert_allclose(kernel_map(two_center_layer, [1.0, 0.0]), [math.exp(-1), 1.0],
                                   atol=1e-15)

    def test_far_point_tends_to_origin(self, two_center_layer):
        assert np.all(kernel_map(two_center_layer, [10.0, 10.0]) < 1e-60)

    def test_stack_shape(self, two_center_layer, rng):
        assert kernel_map(two_center_layer, rng.normal(size=(7, 2))).shape == (7, 2)

    def test_wrong_dimension(self, two_center_layer):
        with pytest.raises(DimensionError):
            kernel_map(two_center_layer, [1.0, 2.0, 3.0])

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(coords, coords), min_size=1, max_size=5, unique=True),
           st.tuples(coords, coords))
    def test_range_and_peak(self, centers, x):
        layer = GaussianLayer(np.array(centers), 1.3)
        z = kernel_map(layer, np.array(x))
        assert np.all((z >= 0.0) & (z <= 1.0))
        for i, c in enumerate(centers):
            gap = np.hypot(x[0] - c[0], x[1] - c[1])
            if gap == 0.0:
                assert z[i] == 1.0
            elif gap > 1e-6:
                # closer pairs round to exactly 1 in double precision
                assert z[i] < 1.0

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 2 * math.pi), st.floats(0.3, 3.0))
    def test_decay_along_rays(self, theta, sigma):
        layer = GaussianLayer([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], sigma)
        direction = np.array([math.cos(theta), math.sin(theta)])
        start = np.array([1 / 3, 1 / 3])
        t = np.linspace(2.0, 12.0, 50)
        sup = np.max(kernel_map(layer, start + t[:, None] * direction), axis=1)
        assert np.all(np.diff(sup) <= 1e-15)

    def test_injectivity_witness(self, rng):
        layer = GaussianLayer(rng.uniform(-1, 1, size=(4, 2)), 0.8)
        assert check_embedding(layer).is_embedding
        pts = rng.uniform(-1, 1, size=(1000, 2))
        z = kernel_map(layer, pts)
        dx = np.abs(pts[:, None] - pts[None]).max(axis=2)
        dz = np.abs(z[:, None] - z[None]).max(axis=2)
        far = dx > 1e-6
        assert dz[far].min() > 1e-12


class TestJacobian:
    def test_zero_row_at_center(self, two_center_layer):
        jac = kernel_map_jacobian(two_center_layer, [1.0, 0.0])
        assert np.all(jac[1] == 0.0)

    def test_hand_derivative(self):
        layer = GaussianLayer([[0.0, 0.0]], 1.0)
        np.testing.assert_allclose(kernel_map_jacobian(layer, [1.0, 0.0]),
                                   [[-2 * math.exp(-1), 0.0]], atol=1e-15)

    def test_finite_differences(self, rng):
        for _ in range(10):
            layer = GaussianLayer(rng.normal(size=(5, 2)), rng.uniform(0.5, 2.0, size=5))
            x = rng.normal(size=2)
            jac = kernel_map_jacobian(layer, x)
            ref = finite_difference_jacobian(layer.map, x)
            err = np.abs(jac - ref) / np.maximum(np.abs(ref), 1e-9)
            assert err.max() <= 1e-6

    def test_stacked_shape(self, two_center_layer, rng):
        assert kernel_map_jacobian(two_center_layer, rng.normal(size=(4, 2))).shape == (4, 2, 2)


class TestCheckEmbedding:
    def test_non_collinear(self):
        r = check_embedding(GaussianLayer([[0, 0], [1, 0], [0, 1]], 1.0))
        assert (r.satisfies_count, r.has_affine_basis) == (True, True)

    def test_collinear(self):
        r = check_embedding(GaussianLayer([[0, 0], [1, 1], [2, 2]], 1.0))
        assert (r.satisfies_count, r.has_affine_basis) == (True, False)

    def test_too_few_centers(self):
        r = check_embedding(GaussianLayer([[0, 0], [1, 0]], 1.0))
        assert (r.satisfies_count, r.has_affine_basis) == (False, False)
        assert not r.is_embedding
