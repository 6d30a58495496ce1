import math

import numpy as np
import pytest

from subrep.functions import (
    FAMILIES,
    BallIndicator,
    Box,
    Cube,
    TestFunction,
    cube_average,
)
from subrep.quadrature import QuadratureScheme, halton_points

SCHEME = QuadratureScheme()
RNG = np.random.default_rng(20260819)


def make(family, n=2, center=None, scale=1.0, amplitude=1.0):
    center = tuple([0.0] * n) if center is None else center
    return TestFunction(family, center, scale, amplitude)


def test_hat_pointwise_1d():
    f = make("tensor_hat", n=1)
    assert f.value([0.5]) == pytest.approx(0.5, abs=1e-14)
    assert f.value([0.0]) == pytest.approx(1.0)
    assert f.value([1.2]) == 0.0


def test_bump_center_value():
    f = make("smooth_bump")
    assert f.value([0.0, 0.0]) == pytest.approx(math.exp(-1.0), rel=1e-14)


@pytest.mark.parametrize("family", FAMILIES)
def test_support_containment(family):
    # f vanishes outside B(center, scale) for every family.
    f = TestFunction(family, (0.3, -0.7), scale=1.3, amplitude=2.0)
    dirs = RNG.normal(size=(200, 2))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    outside = f.support_center + dirs * (1.3 + 1e-9)
    assert np.all(f.values(outside) == 0.0)
    far = f.support_center + dirs * 5.0
    assert np.all(f.values(far) == 0.0)
    assert np.all(np.linalg.norm(f.gradient(outside), axis=1) == 0.0)


@pytest.mark.parametrize("family", FAMILIES)
def test_gradient_matches_finite_differences(family):
    f = TestFunction(family, (0.1, 0.2), scale=1.1, amplitude=1.7)
    # Stay away from kink sets: sample strictly inside, off the axes.
    pts = np.array([[0.3, 0.5], [-0.2, 0.1], [0.4, -0.3], [0.15, 0.33]])
    h = 1e-6
    grad = f.gradient(pts)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (f.values(pts + e) - f.values(pts - e)) / (2.0 * h)
        assert np.allclose(grad[:, i], fd, atol=5e-6)


@pytest.mark.parametrize("family", FAMILIES)
def test_lipschitz_constant_is_sharp_sup(family):
    f = TestFunction(family, (0.0, 0.0), scale=1.4, amplitude=2.3)
    L = f.lipschitz_constant
    pts = (halton_points(20000, 2) * 2.0 - 1.0) * 1.4
    norms = f.gradient_norm(pts)
    assert norms.max() <= L * (1.0 + 1e-12)
    assert norms.max() >= 0.95 * L  # sup nearly attained on a dense sample


@pytest.mark.parametrize("family", FAMILIES)
def test_scaling_relations(family):
    # values scale with amplitude; support scales with scale.
    base = TestFunction(family, (0.0, 0.0), 1.0, 1.0)
    double = TestFunction(family, (0.0, 0.0), 1.0, 2.0)
    pts = RNG.uniform(-1.0, 1.0, size=(50, 2))
    assert np.allclose(double.values(pts), 2.0 * base.values(pts), rtol=1e-13)
    wide = base.rescaled(2.0)
    assert wide.scale == 2.0
    assert np.allclose(wide.values(2.0 * pts), base.values(pts), rtol=1e-13)


def test_zero_amplitude_gives_zero_field():
    f = TestFunction("smooth_bump", (0.0, 0.0), 1.0, 0.0)
    pts = RNG.uniform(-2.0, 2.0, size=(64, 2))
    assert np.all(f.values(pts) == 0.0)
    assert f.lipschitz_constant == 0.0


def test_validation():
    with pytest.raises(ValueError):
        TestFunction("sombrero", (0.0, 0.0))
    with pytest.raises(ValueError):
        TestFunction("smooth_bump", (0.0, 0.0), scale=-1.0)
    with pytest.raises(ValueError):
        TestFunction("smooth_bump", (0.0, 0.0), amplitude=-0.5)


def test_box_basics():
    b = Box((0.0, -1.0), (2.0, 1.0))
    assert b.volume == pytest.approx(4.0)
    assert b.dimension == 2
    inside = b.contains(np.array([[1.0, 0.0], [3.0, 0.0]]))
    assert inside.tolist() == [True, False]
    g = b.grid(4)
    assert g.shape == (16, 2)
    assert np.all(b.contains(g))
    with pytest.raises(ValueError):
        Box((0.0,), (0.0,))


def test_cube_basics():
    q = Cube((1.0, 1.0), 2.0)
    assert q.volume == pytest.approx(4.0)
    box = q.to_box()
    assert box.lower == (0.0, 0.0) and box.upper == (2.0, 2.0)
    with pytest.raises(ValueError):
        Cube((0.0,), -1.0)


def test_cube_average_hat_1d():
    # Hat of height 1 on [-1, 1]: mean over that interval is 1/2.
    f = make("tensor_hat", n=1)
    q = Cube((0.0,), 2.0)
    assert cube_average(f, q, SCHEME) == pytest.approx(0.5, rel=1e-6)


def test_cube_average_constant_region():
    # Cube strictly inside the flat top of a wide indicator.
    ball = BallIndicator((0.0, 0.0), 4.0, amplitude=3.0)
    q = Cube((0.0, 0.0), 1.0)
    assert cube_average(ball, q, SCHEME) == pytest.approx(3.0, rel=1e-12)


def test_ball_indicator_geometry():
    ball = BallIndicator((1.0, 0.0), 0.5, amplitude=2.0)
    assert ball.value([1.2, 0.0]) == 2.0
    assert ball.value([1.6, 0.0]) == 0.0
    assert ball.support_radius == 0.5
