import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import richardson_jacobian
from skmzbf import (Classification, DimensionError, FormatError, GaussianLayer, LabeledDataset,
                    OuterFunction, ParameterError, PolyKernel, PolyLayer, ZbfModel,
                    boundary_band_check, classify, deserialize, fit_multipoly, serialize,
                    zbf_gradient, zbf_value)

OUTERS = [OuterFunction("identity"), OuterFunction("linear_scale", 2.5),
          OuterFunction("saturated_tanh", 0.7)]


def random_model(rng, outer=None):
    n_c = int(rng.integers(1, 6))
    layer = GaussianLayer(rng.uniform(-1, 1, size=(n_c, 2)), rng.uniform(0.4, 1.5, size=n_c))
    kernels = [PolyKernel(rng.normal(size=n_c), float(rng.uniform(0, 1)), int(p))
               for p in rng.integers(1, 4, size=int(rng.integers(1, 6)))]
    poly = PolyLayer(kernels, include_bias=bool(rng.integers(2)))
    return ZbfModel(layer, poly, rng.normal(size=poly.n_out), outer or OuterFunction())


@pytest.fixture
def fitted(tri_layer, blob):
    data, _ = blob
    poly = PolyLayer.default(3, orders=(1, 2))
    surf = fit_multipoly(tri_layer, poly, data)
    return ZbfModel.from_surface(tri_layer, poly, surf), data, surf


@pytest.fixture
def bump():
    """Single center, quadratic kernel, no bias: h = 1 - k(x)^2."""
    layer = GaussianLayer([[0.0, 0.0]], 1.0)
    return ZbfModel(layer, PolyLayer.quadratic(1), [1.0])


class TestValue:
    def test_active_unsafe_point_is_zero(self, fitted):
        model, data, _ = fitted
        h = model.pre_value(data.unsafe)
        assert np.max(h) <= 1e-9
        assert np.min(np.abs(h)) <= 1e-9

    def test_margin_safe_point_is_two(self, fitted):
        model, data, surf = fitted
        f = model.cut_value(data.safe)
        margin = np.flatnonzero(np.abs(f + 1.0) <= 1e-9)
        assert margin.size > 0
        np.testing.assert_allclose(zbf_value(model, data.safe[margin]), 2.0, atol=1e-9)

    def test_far_limit(self, bump):
        x = [40.0, 40.0]
        assert bump.gaussian.map(x).max() < 1e-12
        assert zbf_value(bump, x) == pytest.approx(1.0, abs=1e-12)
        assert classify(bump, x) is Classification.SAFE

    def test_dimension_check(self, bump):
        with pytest.raises(DimensionError):
            zbf_value(bump, [1.0, 2.0, 3.0])

    def test_alpha_length_checked(self, tri_layer):
        with pytest.raises(DimensionError):
            ZbfModel(tri_layer, PolyLayer.identity(3), [1.0, 2.0])

    def test_no_nan_on_inflated_box(self, fitted):
        model, data, _ = fitted
        pts = data.points()
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 0.25 * (hi - lo)
        xs = np.linspace(lo[0] - pad[0], hi[0] + pad[0], 200)
        ys = np.linspace(lo[1] - pad[1], hi[1] + pad[1], 200)
        gx, gy = np.meshgrid(xs, ys)
        h = model.value(np.column_stack([gx.ravel(), gy.ravel()])).reshape(200, 200)
        assert np.all(np.isfinite(h))
        assert np.all(np.isfinite(np.diff(h, 2, axis=0))) and np.all(np.isfinite(np.diff(h, 2, axis=1)))


class TestGradient:
    def test_vanishes_at_center(self, bump):
        np.testing.assert_allclose(zbf_gradient(bump, [0.0, 0.0]), [0.0, 0.0], atol=1e-15)

    def test_finite_differences(self, rng):
        for _ in range(10):
            for outer in OUTERS:
                model = random_model(rng, outer)
                x = rng.uniform(-1.5, 1.5, size=2)
                ref = richardson_jacobian(model.value, x)[0]
                np.testing.assert_allclose(zbf_gradient(model, x), ref, rtol=1e-6, atol=1e-9)

    def test_linear_scale_factor(self, rng):
        model = random_model(rng)
        scaled = ZbfModel(model.gaussian, model.poly, model.alpha, OuterFunction("linear_scale", 3.0))
        x = rng.uniform(-1, 1, size=(5, 2))
        np.testing.assert_allclose(zbf_gradient(scaled, x), 3.0 * zbf_gradient(model, x), rtol=1e-15)


class TestClassify:
    def test_unsafe_training_points_never_safe(self, fitted):
        model, data, _ = fitted
        labels = classify(model, data.unsafe)
        assert Classification.SAFE not in set(labels)

    def test_exact_zero_is_boundary(self):
        layer = GaussianLayer([[0.0, 0.0]], 1.0)
        model = ZbfModel(layer, PolyLayer.identity(1), [1.0])
        assert classify(model, [0.0, 0.0]) is Classification.BOUNDARY

    def test_negative_tolerance(self, bump):
        with pytest.raises(ParameterError):
            classify(bump, [0.0, 0.0], tol=-1.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_outer_function_does_not_move_the_boundary(self, seed):
        rng = np.random.default_rng(seed)
        base = random_model(rng)
        pts = rng.uniform(-2, 2, size=(50, 2))
        ref = classify(base, pts)
        for outer in OUTERS[1:]:
            other = ZbfModel(base.gaussian, base.poly, base.alpha, outer)
            assert list(classify(other, pts)) == list(ref)


class TestOuterFunction:
    @pytest.mark.parametrize("outer", OUTERS)
    def test_increasing_and_fixes_zero(self, outer):
        s = np.linspace(-5, 5, 2001)
        v = outer(s)
        assert outer(0.0) == 0.0
        assert np.all(np.diff(v) > 0)

    def test_gamma_must_be_positive(self):
        with pytest.raises(ParameterError):
            OuterFunction("linear_scale", 0.0)


class TestBoundaryBand:
    def test_radial_model(self):
        layer = GaussianLayer([[0.0, 0.0]], 1.0)
        model = ZbfModel(layer, PolyLayer.identity(1), [1.0])
        data = LabeledDataset([[2.0, 0.0], [0.0, -1.5]], [[0.0, 0.0]])
        report = boundary_band_check(model, data)
        assert report.fraction == 1.0
        assert not report.constant

    def test_zero_alpha_is_flagged(self, tri_layer, blob):
        model = ZbfModel(tri_layer, PolyLayer.identity(3), np.zeros(3))
        assert boundary_band_check(model, blob[0]).constant

    def test_fitted_model_is_mostly_monotone(self, fitted):
        model, data, _ = fitted
        report = boundary_band_check(model, data)
        assert report.segments == data.n_unsafe
        assert report.fraction >= 0.9


class TestSerialization:
    def test_round_trip(self, rng):
        for outer in OUTERS:
            model = random_model(rng, outer)
            model.metadata["seed"] = 7
            back = deserialize(serialize(model))
            assert back.gaussian == model.gaussian
            assert back.poly == model.poly
            assert np.array_equal(back.alpha, model.alpha)
            assert back.outer == model.outer
            assert back.metadata == model.metadata
            assert serialize(back) == serialize(model)

    def test_truncated_document(self, bump):
        text = serialize(bump)
        with pytest.raises(FormatError):
            deserialize(text[: len(text) // 2])

    def test_missing_field(self, bump):
        doc = json.loads(serialize(bump))
        del doc["alpha"]
        with pytest.raises(FormatError, match="alpha"):
            deserialize(doc)

    def test_unknown_version(self, bump):
        doc = json.loads(serialize(bump))
        doc["version"] = 99
        with pytest.raises(FormatError, match="version 99"):
            deserialize(doc)

    def test_file_round_trip(self, bump, tmp_path):
        path = tmp_path / "model.json"
        bump.save(path)
        assert ZbfModel.load(path).dumps() == bump.dumps()

    def test_shift_convention_recorded(self, fitted):
        doc = json.loads(serialize(fitted[0]))
        assert doc["shift_convention"] == "one_minus"
        assert doc["metadata"]["formulation"] == "multipoly"

    def test_non_finite_alpha_rejected(self, bump):
        with pytest.raises(ParameterError):
            ZbfModel(bump.gaussian, bump.poly, [math.inf])
