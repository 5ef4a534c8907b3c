import math

import numpy as np
import pytest
from oracles import LeviCivitaOracle, fd_hessian, fd_jacobian, float_spray, schwarzschild_oracle

from finsler import geometry, metrics
from finsler.errors import DegenerateMetricError, NullDirectionError
from finsler.fields import poly

E2 = metrics.euclidean(2)
SCHW = metrics.schwarzschild(1.0)
FLAT_RANDERS = metrics.randers(E2, [0.3, 0.1])
# beta = 0.2 x^2 dx^1 in the spatial labelling (x^1, x^2) = (x[0], x[1])
NON_BERWALD = metrics.randers(E2, [poly((0.2, (0, 1))), 0.0])
SPHERE_LINE_RANDERS = metrics.randers(metrics.sphere_line(1.0), [0.0, 0.0, 0.4])


def _schw_points(rng, count, timelike=False):
    out = []
    while len(out) < count:
        x = np.array([rng.uniform(0, 5), rng.uniform(2.5, 30), rng.uniform(0.3, 2.8), rng.uniform(0, 6)])
        y = rng.standard_normal(4)
        if timelike:
            y[0] = 3.0 + abs(y[0])
            if SCHW.eval_L(x, y) >= -1e-3:
                continue
        out.append((x, y))
    return out


def test_schwarzschild_matches_symbolic_oracle():
    oracle = schwarzschild_oracle(1.0)
    rng = np.random.default_rng(10)
    for x, y in _schw_points(rng, 5):
        rep = geometry.curvature_report(SCHW, x, y, fieldeq=True)
        np.testing.assert_allclose(rep.g, oracle.g(x), atol=1e-8, rtol=1e-12)
        np.testing.assert_allclose(rep.Gamma, oracle.christoffel(x), atol=1e-8)
        np.testing.assert_allclose(rep.R4, oracle.riemann(x), atol=1e-8)
        assert rep.ricci_scalar == pytest.approx(oracle.ricci_scalar(x, y), abs=1e-8)
        assert rep.fieldeq_residual == pytest.approx(oracle.fieldeq(x, y), abs=1e-8)


def _warped_matrix(x):
    # a non-vacuum 3d Lorentzian metric with off-diagonal terms
    return [
        [-(1 + 0.3 * x[1] ** 2), 0.1 * x[2], 0],
        [0.1 * x[2], 1 + 0.2 * x[2] ** 2, 0.05 * x[1]],
        [0, 0.05 * x[1], 1 + 0.1 * x[1] * x[2] + 0.1 * x[1] ** 2],
    ]


def _warped_spec():
    return metrics.lorentzian(
        [
            [poly((-1.0, (0, 0, 0)), (-0.3, (0, 2, 0))), poly((0.1, (0, 0, 1))), 0.0],
            [poly((0.1, (0, 0, 1))), poly((1.0, (0, 0, 0)), (0.2, (0, 0, 2))), poly((0.05, (0, 1, 0)))],
            [0.0, poly((0.05, (0, 1, 0))), poly((1.0, (0, 0, 0)), (0.1, (0, 1, 1)), (0.1, (0, 2, 0)))],
        ]
    )


def test_non_vacuum_lorentzian_matches_oracle():
    spec = _warped_spec()
    oracle = LeviCivitaOracle(_warped_matrix, 3)
    rng = np.random.default_rng(11)
    for _ in range(4):
        x = rng.uniform(-0.8, 0.8, 3)
        y = np.array([2.0, *rng.standard_normal(2) * 0.5])
        rep = geometry.curvature_report(spec, x, y, fieldeq=True)
        np.testing.assert_allclose(rep.g, oracle.g(x), atol=1e-12)
        np.testing.assert_allclose(rep.Gamma, oracle.christoffel(x), atol=1e-8)
        np.testing.assert_allclose(rep.R4, oracle.riemann(x), atol=1e-8)
        ref = oracle.ricci_scalar(x, y)
        assert abs(ref) > 1e-3
        assert rep.ricci_scalar == pytest.approx(ref, abs=1e-8)
        assert rep.fieldeq_residual == pytest.approx(oracle.fieldeq(x, y), abs=1e-8)


def test_schwarzschild_radial_spray():
    G = geometry.spray(SCHW, [0, 4, math.pi / 2, 0], [1, 0, 0, 0])
    assert G[1] == pytest.approx(0.015625, rel=1e-13)
    assert np.allclose(np.delete(G, 1), 0)


def test_minkowski_everything_zero():
    rep = geometry.curvature_report(metrics.minkowski(4), np.zeros(4), [2.0, 0.3, -0.1, 0.5], fieldeq=True)
    np.testing.assert_array_equal(rep.g, np.diag([-1.0, 1, 1, 1]))
    for a in (rep.G, rep.N, rep.Gamma, rep.R4, rep.R2, rep.P):
        assert np.max(np.abs(a)) == 0.0
    assert rep.fieldeq_residual == 0.0


def test_x_independent_metric_has_zero_spray():
    for y in ([1, 1], [-0.3, 2.0], [0.5, -0.1]):
        assert np.max(np.abs(geometry.spray(FLAT_RANDERS, [0.4, -0.9], y))) == 0.0


def test_randers_fundamental_tensor_matches_fd_hessian():
    spec = metrics.randers(E2, [0.2, 0.0])
    x = np.array([0.7, -0.2])
    g = geometry.fundamental_tensor(spec, x, [1, 1])
    ref = 0.5 * fd_hessian(lambda v: spec.eval_F(x, v) ** 2, [1.0, 1.0])
    np.testing.assert_allclose(g, ref, atol=1e-6)


def test_randers_closed_form_fundamental_tensor():
    # g = (F/a)(I - l l^T) + (l + b)(l + b)^T for Euclidean alpha
    b = np.array([0.3, 0.1])
    rng = np.random.default_rng(12)
    for _ in range(10):
        y = rng.standard_normal(2)
        a = np.linalg.norm(y)
        l = y / a
        F = a + b @ y
        ref = (F / a) * (np.eye(2) - np.outer(l, l)) + np.outer(l + b, l + b)
        np.testing.assert_allclose(geometry.fundamental_tensor(FLAT_RANDERS, [0, 0], y), ref, atol=1e-13)


def test_lorentzian_quadratic_g_independent_of_y():
    x = [0, 5, 1.1, 0]
    g1 = geometry.fundamental_tensor(SCHW, x, [1, 0.2, 0, 0])
    g2 = geometry.fundamental_tensor(SCHW, x, [0.1, -3, 0.4, 0.1])
    np.testing.assert_array_equal(g1, g2)


@pytest.mark.parametrize("rho", [1.0, 2.5])
def test_sphere_ricci_scalar(rho):
    spec = metrics.round_sphere(rho)
    rng = np.random.default_rng(13)
    for _ in range(10):
        x = [rng.uniform(0.3, 2.8), rng.uniform(0, 6)]
        y = rng.standard_normal(2)
        gyy = spec.eval_F(x, y) ** 2
        assert geometry.ricci_scalar(spec, x, y) == pytest.approx(gyy / rho**2, abs=1e-8)


def test_berwald_symbols_independent_of_direction():
    x = [1.0, 0.3, 0.2]
    g1 = geometry.chern_symbols(SPHERE_LINE_RANDERS, x, [0.3, -0.5, 0.8])
    g2 = geometry.chern_symbols(SPHERE_LINE_RANDERS, x, [-1.0, 0.2, 0.1])
    np.testing.assert_allclose(g1, g2, atol=1e-8)
    # the Riemannian part is the sphere's Levi-Civita connection
    assert g1[0, 1, 1] == pytest.approx(-math.sin(1.0) * math.cos(1.0), abs=1e-12)
    assert g1[1, 0, 1] == pytest.approx(math.cos(1.0) / math.sin(1.0), abs=1e-12)


def _fd_chern(spec, x, y, h=1e-5):
    """Chern symbols from finite differences of the order-2 quantities g and G."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    g = lambda p, v: geometry.fundamental_tensor(spec, p, v)
    N = fd_jacobian(lambda v: geometry.spray(spec, x, v), y, h)
    dgx = fd_jacobian(lambda p: g(p, y), x, h)  # [j, k, l] = d_l g_jk
    dgy = fd_jacobian(lambda v: g(x, v), y, h)
    dg = dgx - np.einsum("jkm,ml->jkl", dgy, N)
    t = np.einsum("lkj->ljk", dg) - np.einsum("jkl->ljk", dg) + dg
    return 0.5 * np.einsum("il,ljk->ijk", np.linalg.inv(g(x, y)), t)


def _fd_spray_hessian(spec, x, y, h=1e-4):
    G = lambda v: geometry.spray(spec, x, v)
    e = np.eye(len(y)) * h
    out = np.empty((len(y),) * 3)
    for j in range(len(y)):
        for k in range(len(y)):
            out[:, j, k] = (G(y + e[j] + e[k]) - G(y + e[j] - e[k]) - G(y - e[j] + e[k]) + G(y - e[j] - e[k])) / (4 * h * h)
    return out


def test_landsberg_non_berwald_matches_fd():
    x, y = np.array([0.4, 0.6]), np.array([1.0, 0.5])
    P, Ptr = geometry.landsberg(NON_BERWALD, x, y)
    assert np.max(np.abs(P)) > 1e-4
    ref = _fd_spray_hessian(NON_BERWALD, x, y) - _fd_chern(NON_BERWALD, x, y)
    np.testing.assert_allclose(P, ref, atol=1e-6)
    np.testing.assert_allclose(Ptr, np.einsum("lli->i", P), atol=1e-15)


def test_chern_matches_fd_oracle():
    x, y = np.array([0.4, 0.6]), np.array([1.0, 0.5])
    np.testing.assert_allclose(geometry.chern_symbols(NON_BERWALD, x, y), _fd_chern(NON_BERWALD, x, y), atol=1e-6)


def test_spray_matches_float_oracle():
    x, y = np.array([0.4, 0.6]), np.array([1.0, 0.5])
    E = lambda p, v: NON_BERWALD.energy(list(p), list(v))
    np.testing.assert_allclose(geometry.spray(NON_BERWALD, x, y), float_spray(E, x, y), atol=1e-7)


@pytest.mark.parametrize("spec,y", [(FLAT_RANDERS, [0.4, 0.9]), (SPHERE_LINE_RANDERS, [0.2, 0.5, -0.4])], ids=["flat", "sphere_line"])
def test_berwald_landsberg_vanishes(spec, y):
    x = [1.0, 0.3, 0.2][: spec.dimension]
    P, Ptr = geometry.landsberg(spec, x, y)
    assert np.max(np.abs(P)) <= 1e-9
    assert np.max(np.abs(Ptr)) <= 1e-9


HOMOGENEITY_CASES = [
    (NON_BERWALD, [0.4, 0.6], [1.0, 0.5]),
    (metrics.f_omega_static(E2, poly((1.0, (0, 0)), (0.2, (1, 0))), [0.3, poly((0.2, (1, 0)))]), [0.0, 0.3, 0.2], [2.0, 0.5, 0.7]),
    (SCHW, [0, 6, 1.0, 0.5], [1.0, 0.1, 0.02, 0.03]),
]


@pytest.mark.parametrize("spec,x,y", HOMOGENEITY_CASES, ids=lambda v: getattr(v, "family", ""))
def test_homogeneity_degrees(spec, x, y):
    a = geometry.curvature_report(spec, x, y)
    b = geometry.curvature_report(spec, x, 2 * np.asarray(y))
    degrees = {"g": 0, "G": 2, "N": 1, "Gamma": 0, "R2": 2, "P": 0}
    for name, d in degrees.items():
        np.testing.assert_allclose(getattr(b, name), 2**d * getattr(a, name), rtol=1e-9, atol=1e-10)
    assert b.ricci_scalar == pytest.approx(4 * a.ricci_scalar, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("spec,x,y", HOMOGENEITY_CASES, ids=lambda v: getattr(v, "family", ""))
def test_report_invariants(spec, x, y):
    rep = geometry.curvature_report(spec, x, y)
    n = spec.dimension
    np.testing.assert_allclose(rep.g, rep.g.T, atol=0)
    np.testing.assert_allclose(rep.g @ rep.g_inv, np.eye(n), atol=1e-10)
    np.testing.assert_allclose(rep.Gamma, np.swapaxes(rep.Gamma, 1, 2), atol=1e-12)
    via = np.einsum("ijkl,j,l->ik", rep.R4, rep.y, rep.y)
    assert np.max(np.abs(via - rep.R2)) <= 1e-8 * max(1.0, np.max(np.abs(rep.R2)))
    np.testing.assert_allclose(rep.P_trace, np.einsum("lli->i", rep.P), atol=1e-14)
    np.testing.assert_allclose(rep.N @ rep.y, 2 * rep.G, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("spec,x,y", [(FLAT_RANDERS, [0.1, 0.1], [0.5, 1.0]), (SPHERE_LINE_RANDERS, [1.0, 0.3, 0.2], [0.2, 0.5, -0.4]), (SCHW, [0, 5, 1.2, 0], [1, 0.1, 0.05, 0.02])], ids=["flat", "sphere_line", "schwarzschild"])
def test_berwald_euler_identities(spec, x, y):
    rep = geometry.curvature_report(spec, x, y)
    y = np.asarray(y, float)
    np.testing.assert_allclose(rep.N @ y, 2 * rep.G, atol=1e-9)
    np.testing.assert_allclose(np.einsum("ijk,j,k->i", rep.Gamma, y, y), 2 * rep.G, atol=1e-9)


def test_fieldeq_schwarzschild_timelike():
    rng = np.random.default_rng(14)
    for x, y in _schw_points(rng, 5, timelike=True):
        assert abs(geometry.fieldeq_residual(SCHW, x, y)) <= 1e-7


def test_fieldeq_static_over_flat_berwald_base():
    spec = metrics.standard_static(FLAT_RANDERS)
    rng = np.random.default_rng(15)
    for _ in range(5):
        v = rng.standard_normal(2)
        tau = 1.5 * FLAT_RANDERS.eval_F([0, 0], v) + 0.1
        assert abs(geometry.fieldeq_residual(spec, [0.0, *rng.standard_normal(2)], [tau, *v])) <= 1e-7


def test_fieldeq_is_scale_invariant():
    spec = _warped_spec()
    x, y = np.array([0.3, 0.4, -0.2]), np.array([2.0, 0.3, 0.1])
    a = geometry.fieldeq_residual(spec, x, y)
    b = geometry.fieldeq_residual(spec, x, y / math.sqrt(-spec.eval_L(x, y)))
    assert abs(a) > 1e-3
    assert b == pytest.approx(a, rel=1e-9)


def test_fieldeq_null_direction_raises():
    with pytest.raises(NullDirectionError):
        geometry.fieldeq_residual(metrics.minkowski(4), np.zeros(4), [1.0, 1.0, 0, 0])


def test_degenerate_metric_raises():
    spec = metrics.lorentzian([[0.0, 0.0], [0.0, 1.0]])
    with pytest.raises(DegenerateMetricError):
        geometry.spray(spec, [0, 0], [1.0, 1.0])


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        geometry.spray(E2, [0, 0], [0, 0])


def test_report_serialises():
    import json

    rep = geometry.curvature_report(SCHW, [0, 6, 1.0, 0], [1.0, 0.1, 0, 0], fieldeq=True)
    data = json.loads(json.dumps(rep.to_json()))
    assert len(data["R4"]) == 4 and data["fieldeq_residual"] is not None
