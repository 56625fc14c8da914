import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from vkde.kernels import (
    KERNEL_NAMES,
    compute_moments,
    eval_kernel,
    eval_kernel_grad,
    eval_L,
    get_kernel,
    multi_indices,
)

u = sp.symbols("u", real=True)
TRICUBE = sp.Rational(70, 81) * (1 - u**3) ** 3  # on [0, 1], even extension


def tricube_moment(expr):
    return float(2 * sp.integrate(expr, (u, 0, 1)))


@pytest.mark.parametrize("x", [0.0, 0.25, 0.5, 0.9, 1.0])
def test_tricube_value_and_gradient_match_symbolic(x):
    k = get_kernel("tricube")
    assert eval_kernel(k, x) == pytest.approx(float(TRICUBE.subs(u, x)), rel=1e-14, abs=1e-15)
    deriv = float(sp.diff(TRICUBE, u).subs(u, x))
    assert eval_kernel_grad(k, x) == pytest.approx(deriv, rel=1e-12, abs=1e-14)


def test_tricube_half_point_exact():
    # 70/81 * (7/8)^3
    assert eval_kernel(get_kernel("tricube"), 0.5) == pytest.approx(70 / 81 * (7 / 8) ** 3, rel=1e-15)


@pytest.mark.parametrize("name", KERNEL_NAMES)
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_kernels_integrate_to_one(name, dim):
    mom = compute_moments(get_kernel(name, dim))
    assert mom.tau[(0,) * dim] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_two_dim_normalization_by_cubature(name):
    k = get_kernel(name, 2)
    val, _ = integrate.dblquad(
        lambda y, x: float(eval_kernel(k, np.array([x, y]))),
        -1, 1, lambda x: -math.sqrt(max(0.0, 1 - x * x)), lambda x: math.sqrt(max(0.0, 1 - x * x)),
    )
    assert val == pytest.approx(1.0, abs=1e-7)


def test_tricube_moments_match_symbolic():
    mom = compute_moments(get_kernel("tricube"))
    assert mom.mu0 == pytest.approx(tricube_moment(TRICUBE**2), abs=1e-12)
    assert mom.mu0 == pytest.approx(175 / 247, abs=1e-14)
    assert mom.tau2 == pytest.approx(tricube_moment(u**2 * TRICUBE), abs=1e-12)
    assert mom.tau4 == pytest.approx(tricube_moment(u**4 * TRICUBE), abs=1e-12)
    assert mom.mu[(2,)] == pytest.approx(tricube_moment(u**2 * TRICUBE**2), abs=1e-12)
    L = TRICUBE + u * sp.diff(TRICUBE, u)
    assert mom.r_of_L == pytest.approx(tricube_moment(L**2), abs=1e-12)


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_L_integrates_to_zero(name):
    k = get_kernel(name)
    val, _ = integrate.quad(lambda x: float(eval_L(k, x)), -1, 1, points=[0])
    first, _ = integrate.quad(lambda x: x * float(eval_L(k, x)), -1, 1, points=[0])
    assert abs(val) < 1e-10 and abs(first) < 1e-10


def test_two_dim_moment_structure():
    mom = compute_moments(get_kernel("biweight", 2))
    # radial symmetry: tau_(4,0) = 3 tau_(2,2), odd entries vanish
    assert mom.tau[(4, 0)] == pytest.approx(3 * mom.tau[(2, 2)], rel=1e-12)
    assert mom.tau_of((3, 1)) == 0.0
    assert mom.mu_of((1, 1)) == 0.0
    assert set(multi_indices(2, 4)) == {(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)}


def test_moments_serialization():
    d = compute_moments(get_kernel("tricube", 2)).to_dict()
    assert d["kernel"] == "tricube" and d["dim"] == 2
    assert "2,2" in d["tau"] and "0,0" in d["mu"]


@given(st.floats(-3, 3, allow_nan=False), st.sampled_from(KERNEL_NAMES))
def test_kernel_nonnegative_symmetric_compact(x, name):
    k = get_kernel(name)
    v = float(eval_kernel(k, x))
    assert v >= 0
    assert v == float(eval_kernel(k, -x))
    if abs(x) > 1:
        assert v == 0.0


@settings(max_examples=50)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=2))
def test_radial_in_two_dims(pt):
    k = get_kernel("tricube", 2)
    r = math.hypot(*pt)
    rotated = np.array([r, 0.0])
    assert float(eval_kernel(k, np.array(pt))) == pytest.approx(float(eval_kernel(k, rotated)), rel=1e-12, abs=1e-15)


def test_lookup_and_shape_errors():
    with pytest.raises(LookupError):
        get_kernel("gaussian")
    with pytest.raises(ValueError):
        eval_kernel(get_kernel("tricube", 2), np.zeros(3))
    assert get_kernel("TriCube") is get_kernel("tricube")
