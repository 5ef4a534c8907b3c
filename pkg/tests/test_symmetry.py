import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finsler import metrics
from finsler.errors import FinslerError, NonSmoothError
from finsler.fields import VectorField, coordinate_field, dilation_field, poly, rotation_field
from finsler.geometry import fundamental_tensor
from finsler.symmetry import (
    killing_residual,
    lie_derivative_g_residual,
    orthogonal_one_form,
    static_frobenius_residual,
)

E2 = metrics.euclidean(2)
ROT = rotation_field(0, 1, 2)
DIL1 = dilation_field(2, [0])
DIL = dilation_field(2)
# a base metric that is not invariant under rotations or dilations
WINDY = metrics.randers(E2, [poly((0.2, (0, 1))), 0.1])

STATIC_FAMILIES = [
    metrics.standard_static(metrics.randers(E2, [poly((0.2, (0, 1))), 0.1])),
    metrics.f_omega_static(E2, poly((1.0, (0, 0)), (0.3, (1, 0))), [poly((0.2, (0, 1))), 0.1]),
    metrics.stationary_splitting(E2, poly((1.0, (0, 0)), (0.1, (2, 0))), [poly((1.0, (0, 1))), 0.0]),
    metrics.stationary_splitting(metrics.randers(E2, [0.1, 0.0]), 2.0, {"norm": E2, "scale": poly((0.2, (1, 0)))}),
    metrics.schwarzschild(1.0),
    metrics.rutz_schwarzschild(1.0, 0.05),
]


def _points(spec, rng, count):
    out = []
    for _ in range(count):
        if spec.dimension == 4:
            x = np.array([rng.uniform(0, 3), rng.uniform(3, 20), rng.uniform(0.4, 2.7), rng.uniform(0, 6)])
        else:
            x = np.array([rng.uniform(-5, 5), *rng.uniform(-1, 1, spec.dimension - 1)])
        y = rng.standard_normal(spec.dimension)
        y[0] = 3 + abs(y[0])
        out.append((x, y))
    return out


@pytest.mark.parametrize("spec", STATIC_FAMILIES, ids=lambda s: s.family)
def test_time_translation_is_killing(spec):
    K = coordinate_field(0, spec.dimension)
    rng = np.random.default_rng(30)
    for x, y in _points(spec, rng, 10):
        assert abs(killing_residual(spec, K, x, y)) <= 1e-10
        assert np.max(np.abs(lie_derivative_g_residual(spec, K, x, y))) <= 1e-10


@pytest.mark.parametrize("spec", [metrics.schwarzschild(1.0), metrics.rutz_schwarzschild(1.0, 0.05)], ids=["schw", "rutz"])
def test_azimuthal_rotation_is_killing(spec):
    K = coordinate_field(3, 4)
    for x, y in _points(spec, np.random.default_rng(31), 5):
        assert abs(killing_residual(spec, K, x, y)) <= 1e-10


def test_euclidean_rotation():
    rng = np.random.default_rng(32)
    for _ in range(10):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        assert abs(killing_residual(E2, ROT, x, y)) <= 1e-10
        assert np.max(np.abs(lie_derivative_g_residual(E2, ROT, x, y))) <= 1e-10


def test_dilation_along_first_axis():
    x, y = np.array([0.7, -1.2]), np.array([1.5, 2.0])
    assert killing_residual(E2, DIL1, x, y) == pytest.approx(2 * 1.5**2, rel=1e-14)
    np.testing.assert_allclose(lie_derivative_g_residual(E2, DIL1, x, y), [[2, 0], [0, 0]], atol=1e-10)


def test_isotropic_dilation():
    x, y = np.array([0.7, -1.2]), np.array([1.5, 2.0])
    assert killing_residual(E2, DIL, x, y) == pytest.approx(2 * 6.25, rel=1e-14)
    np.testing.assert_allclose(lie_derivative_g_residual(E2, DIL, x, y), 2 * np.eye(2), atol=1e-10)


def _flow_oracle(spec, flow, x, y, h=1e-5):
    """d/ds L(phi_s(x), dphi_s(y)) at s = 0 by central differences."""
    vals = []
    for s in (h, -h):
        xs, ys = flow(s, x, y)
        vals.append(spec.energy(list(xs), list(ys)))
    return (vals[0] - vals[1]) / (2 * h)


def _dilation_flow(s, x, y):
    return np.exp(s) * x, np.exp(s) * y


def _rotation_flow(s, x, y):
    c, sn = math.cos(s), math.sin(s)
    R = np.array([[c, -sn], [sn, c]])
    return R @ x, R @ y


def _axis_flow(s, x, y):
    a = np.array([math.exp(s), 1.0])
    return a * x, a * y


@pytest.mark.parametrize(
    "K,flow", [(DIL, _dilation_flow), (ROT, _rotation_flow), (DIL1, _axis_flow)], ids=["dilation", "rotation", "axis"]
)
@pytest.mark.parametrize("spec", [E2, WINDY], ids=["euclidean", "randers"])
def test_killing_residual_matches_flow_pullback(spec, K, flow):
    rng = np.random.default_rng(33)
    for _ in range(5):
        x, y = rng.uniform(-1, 1, 2), rng.standard_normal(2)
        ref = _flow_oracle(spec, flow, x, y)
        assert killing_residual(spec, K, x, y) == pytest.approx(ref, abs=1e-6)


def test_lie_derivative_matches_flow_pullback_of_g():
    rng = np.random.default_rng(34)
    h = 1e-5
    for _ in range(3):
        x, y = rng.uniform(-1, 1, 2), rng.standard_normal(2)
        # (phi_s^* g)_(x,y) = A^T g(phi_s x, A y) A with A = dphi_s
        pulled = []
        for s in (h, -h):
            c, sn = math.cos(s), math.sin(s)
            A = np.array([[c, -sn], [sn, c]])
            pulled.append(A.T @ fundamental_tensor(WINDY, A @ x, A @ y) @ A)
        ref = (pulled[0] - pulled[1]) / (2 * h)
        np.testing.assert_allclose(lie_derivative_g_residual(WINDY, ROT, x, y), ref, atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 10_000))
def test_killing_residual_is_linear_in_K(a, b, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(-1, 1, 2), rng.standard_normal(2)
    combo = ROT.scaled(a) + DIL1.scaled(b)
    lhs = killing_residual(WINDY, combo, x, y)
    rhs = a * killing_residual(WINDY, ROT, x, y) + b * killing_residual(WINDY, DIL1, x, y)
    assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(a) + abs(b)))


@pytest.mark.parametrize(
    "spec,K,killing",
    [(E2, ROT, True), (E2, DIL, False), (WINDY, ROT, False), (STATIC_FAMILIES[0], coordinate_field(0, 3), True)],
    ids=["rot", "dil", "windy_rot", "static_t"],
)
def test_killing_iff_lie_derivative_vanishes(spec, K, killing):
    rng = np.random.default_rng(35)
    grid = [(rng.uniform(-1, 1, spec.dimension), rng.standard_normal(spec.dimension) + 2.0 * np.eye(spec.dimension)[0]) for _ in range(8)]
    k_zero = all(abs(killing_residual(spec, K, x, y)) <= 1e-8 for x, y in grid)
    l_zero = all(np.max(np.abs(lie_derivative_g_residual(spec, K, x, y))) <= 1e-8 for x, y in grid)
    assert k_zero == l_zero == killing


def test_field_dimension_mismatch():
    with pytest.raises(ValueError):
        killing_residual(E2, coordinate_field(0, 3), [0, 0], [1, 0])


def test_vector_field_from_json():
    K = VectorField.parse({"builtin": "rotation", "dimension": 2, "plane": [0, 1]})
    assert K([2.0, 3.0]) == [-3.0, 2.0]
    K = VectorField.parse({"components": [{"poly": [[1.0, [0, 1]]]}, 0.0]})
    assert K([2.0, 3.0]) == [3.0, 0.0]


# -- staticity ----------------------------------------------------------

DT3 = coordinate_field(0, 3)


def test_nonclosed_omega_hand_expansion():
    # L = -tau^2 + 2 x^2 v^1 tau + |v|^2, theta = -2 dt + 2 x^2 dx^1, dtheta = 2 dx^2 ^ dx^1
    spec = metrics.stationary_splitting(E2, 1.0, [poly((1.0, (0, 1))), 0.0])
    x = np.array([0.3, 0.7, -0.4])
    form = orthogonal_one_form(spec, DT3, x)
    np.testing.assert_allclose(form.theta, [-2.0, 2 * x[2], 0.0], atol=1e-14)
    d_ref = np.zeros((3, 3))
    d_ref[2, 1], d_ref[1, 2] = 2.0, -2.0
    np.testing.assert_allclose(form.dtheta, d_ref, atol=1e-14)
    wedge = form.wedge()
    assert list(wedge) == [(0, 1, 2)]
    assert wedge[(0, 1, 2)] == pytest.approx((-2.0) * (-2.0), abs=1e-8)
    assert static_frobenius_residual(spec, DT3, x) == pytest.approx(4.0, abs=1e-8)


def test_closed_omega_is_static():
    # omega = d(x^1 x^2) is exact
    spec = metrics.stationary_splitting(E2, 1.0, [poly((1.0, (0, 1))), poly((1.0, (1, 0)))])
    assert static_frobenius_residual(spec, DT3, [0.0, 0.4, -0.3]) <= 1e-12


@pytest.mark.parametrize(
    "spec",
    [STATIC_FAMILIES[0], STATIC_FAMILIES[1], metrics.standard_static(E2), metrics.rutz_schwarzschild(1.0, 0.0), metrics.schwarzschild(2.0)],
    ids=["static_randers", "f_omega_static", "static_euclidean", "rutz0", "schw"],
)
def test_static_families_pass_frobenius(spec):
    K = coordinate_field(0, spec.dimension)
    x = [0.0, 5.0, 1.0, 0.2] if spec.dimension == 4 else [0.0, 0.3, -0.2]
    assert static_frobenius_residual(spec, K, x) <= 1e-8


def test_warped_lorentzian_is_static():
    spec = metrics.lorentzian(
        [[poly((-1.0, (0, 0, 0)), (-0.5, (0, 1, 0)), (-0.2, (0, 1, 1))), 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, poly((1.0, (0, 0, 0)), (0.1, (0, 1, 0)))]]
    )
    form = orthogonal_one_form(spec, DT3, [0.0, 0.3, 0.5])
    assert np.max(np.abs(form.dtheta)) > 0.1
    assert static_frobenius_residual(spec, DT3, [0.0, 0.3, 0.5]) <= 1e-12


def test_rutz_perturbation_frobenius_undefined():
    with pytest.raises(NonSmoothError):
        static_frobenius_residual(metrics.rutz_schwarzschild(1.0, 0.1), coordinate_field(0, 4), [0, 5.0, 1.0, 0.0])


def test_spacelike_field_refused():
    with pytest.raises(FinslerError):
        static_frobenius_residual(metrics.standard_static(E2), coordinate_field(1, 3), [0, 0, 0])


def test_nonconstant_field_at_c1_point_refused():
    spec = metrics.f_omega_static(E2, 1.0, [0.3, 0.0])
    K = VectorField.parse([poly((1.0, (0, 0, 0)), (0.1, (0, 1, 0))), 0.0, 0.0])
    with pytest.raises(NonSmoothError):
        static_frobenius_residual(spec, K, [0.0, 0.2, 0.1])
