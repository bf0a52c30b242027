import math

import numpy as np
import pytest

from ibim.experiments import StudyConfig, convergence_study, dyadic
from ibim.geometry import Capsule, Circle, Segment, Sphere
from ibim.lattice import LatticeFrame, sample_frame
from ibim.quadrature import (
    ONE,
    SQNORM,
    TEST2D,
    TEST3D,
    QuadratureResult,
    ibim_integrate,
    quadrature_error,
    upper_mask,
)
from ibim.reference import reference_integral
from ibim.weights import WeightFunction


def test_integrand_values():
    x = np.array([[0.3, -0.4]])
    assert TEST2D(x)[0] == pytest.approx(math.cos(0.09 + 0.4) * math.sin(0.16 - 0.027))
    y = np.array([[0.3, -0.4, 0.2]])
    assert TEST3D(y)[0] == pytest.approx(math.cos(0.09 + 0.4 - 0.008) * math.sin(0.16 - 0.027 - 0.2))
    assert SQNORM(x)[0] == pytest.approx(0.25)
    m = upper_mask(TEST2D, 0.1)
    assert m(np.array([[0.3, 0.05]]))[0] == 0.0 and m(np.array([[0.3, 0.1]]))[0] == TEST2D(np.array([[0.3, 0.1]]))[0]


def test_circle_perimeter():
    h = 2.0**-10
    r = ibim_integrate(Circle(0.75), ONE, WeightFunction("hat", 2 * h), LatticeFrame(h))
    assert abs(r.value - 2 * math.pi * 0.75) < 0.05
    assert r.point_count > 0 and r.h == h and r.eps == 2 * h


def test_golden_slope_segment_length():
    h, beta = 2.0**-10, math.atan((1 + math.sqrt(5)) / 2)
    seg = Segment((0.0, 0.0), (math.cos(beta), math.sin(beta)))
    r = ibim_integrate(seg, ONE, WeightFunction("cos", 0.1), LatticeFrame(h))
    assert abs(r.value - 1.0) < 5e-3


def test_sphere_area():
    h = 2.0**-6
    r = ibim_integrate(Sphere(0.75), ONE, WeightFunction("hat", 2 * h), LatticeFrame(h, (0, 0, 0)))
    assert abs(r.value - 4 * math.pi * 0.75**2) < 0.15


def test_empty_tube():
    r = ibim_integrate(Circle(0.75), ONE, WeightFunction("cos", 0.01), LatticeFrame(0.5))
    assert (r.value, r.point_count) == (0.0, 0)
    assert quadrature_error(r, 4.712) == 4.712


def test_quadrature_error():
    assert quadrature_error(4.70, 4.71238898) == pytest.approx(0.01238898)
    assert quadrature_error(1.5, 1.5) == 0.0
    with pytest.raises(ValueError):
        quadrature_error(1.0, math.inf)


def test_rigid_invariance(rng):
    for _ in range(5):
        c = rng.uniform(-0.3, 0.3, 2)
        phi, theta = rng.uniform(0, 2 * math.pi, 2)
        shift = tuple(rng.random(2))
        R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        w = WeightFunction("cos", 0.05)
        a = ibim_integrate(Circle(0.75, tuple(c)), ONE, w, LatticeFrame(0.01, shift, theta))
        b = ibim_integrate(Circle(0.75, tuple(R @ c)), ONE, w, LatticeFrame(0.01, shift, theta + phi))
        assert a.point_count == b.point_count
        assert abs(a.value - b.value) <= 1e-12


def test_shift_periodicity():
    w = WeightFunction("hat", 0.05)
    b = Circle(0.75, (0.1, 0.2))
    a = ibim_integrate(b, TEST2D, w, LatticeFrame(0.02, (0.25, 0.5)))
    c = ibim_integrate(b, TEST2D, w, LatticeFrame(0.02, (2.25, -3.5)))
    assert a.value == c.value and a.point_count == c.point_count


@pytest.mark.parametrize("boundary", [Circle(0.75, (0.1, 0.1)), Capsule()], ids=["circle", "capsule"])
def test_threads_do_not_change_bits(boundary):
    w = WeightFunction("hat", 0.04)
    frame = sample_frame(3, 0, 0.004, "shift_and_rotation")
    one = ibim_integrate(boundary, TEST2D, w, frame, threads=1)
    for t in (2, 4, 0):
        assert ibim_integrate(boundary, TEST2D, w, frame, threads=t).value == one.value


def test_unbiased_over_random_shifts():
    b = Circle(0.75, (0.1, -0.05))
    ref = reference_integral(b, TEST2D)
    h = 2.0**-6
    w = WeightFunction("hat", 2 * h)
    vals = np.array([ibim_integrate(b, TEST2D, w, sample_frame(99, i, h)).value for i in range(4096)])
    assert abs(vals.mean() - ref) <= 4 * vals.std(ddof=1) / math.sqrt(len(vals))


def test_capsule_pieces_counted_once():
    cap = Capsule()
    h = 2.0**-8
    w = WeightFunction("cos", 0.1)
    r = ibim_integrate(cap, ONE, w, LatticeFrame(h, (0.3, 0.7), 0.4))
    assert abs(r.value - (2 + 2 * math.pi * 0.2)) < 1e-3


def test_jacobian_modes():
    b = Circle(0.75, (0.1, 0.0))
    h = 2.0**-7
    frame = LatticeFrame(h, (0.2, 0.4))
    w = WeightFunction("cos", 0.1)
    exact = ibim_integrate(b, ONE, w, frame, "exact").value
    lap = ibim_integrate(b, ONE, w, frame, "laplacian").value
    unity = ibim_integrate(b, ONE, w, frame, "unity").value
    assert abs(exact - 2 * math.pi * 0.75) < 2e-5
    assert abs(lap - exact) < 1e-6
    # in 2D the factor 1 + eta*kappa is linear in eta, so J = 1 is unbiased for even weights
    assert abs(unity - 2 * math.pi * 0.75) < 2e-5
    with pytest.raises(ValueError):
        ibim_integrate(b, ONE, w, frame, "bogus")


def test_unity_jacobian_bias_on_sphere():
    # J = 1 adds m2 * int f G dsigma, m2 the second moment of the weight
    r, eps = 0.75, 0.1
    b = Sphere(r, (0.05, -0.1, 0.02))
    w = WeightFunction("cos", eps)
    frame = LatticeFrame(2.0**-6, (0.3, 0.1, 0.6))
    exact = ibim_integrate(b, TEST3D, w, frame, "exact").value
    unity = ibim_integrate(b, TEST3D, w, frame, "unity").value
    m2 = eps**2 * (1 / 3 - 2 / math.pi**2)
    predicted = m2 * reference_integral(b, TEST3D) / r**2
    assert unity - exact == pytest.approx(predicted, rel=0.02)


@pytest.mark.parametrize("shape,hs", [("circle", dyadic(5, 10, 4))])
def test_exact_and_unity_jacobian_rates_agree(shape, hs):
    base = dict(shape=shape, integrand="test3d" if shape == "sphere" else "test2d",
                weight="hat", alpha=1.0, hs=hs, seed=4)
    a = convergence_study(StudyConfig("exact", jacobian_mode="exact", **base))
    b = convergence_study(StudyConfig("unity", jacobian_mode="unity", **base))
    assert abs(a.slope - b.slope) < 0.2


def test_result_type():
    r = ibim_integrate(Circle(0.75), ONE, WeightFunction("hat", 0.1), LatticeFrame(0.1))
    assert isinstance(r, QuadratureResult) and math.isfinite(r.value) and r.jacobian_mode == "exact"
