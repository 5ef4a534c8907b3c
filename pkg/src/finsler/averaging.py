"""The averaged Riemannian metric of a positive-definite Finsler metric.

``h_x`` is the mean of the fundamental tensor over the indicatrix
``S_x = {F(x, .) = 1}`` with respect to a measure induced by the Lebesgue
measure of the fibre coordinates.  The indicatrix is parametrised radially,
``u -> u / F(x, u)`` for ``u`` on the unit sphere.  The default measure
gives a patch of ``S_x`` the volume of the cone over it,
``dsigma(u) / (n F(u)^n)``; the alternative is the Euclidean surface area,
the Gram determinant of the parametrisation.

Quadrature: trapezoid on the circle for ``n = 2``, Gauss-Legendre in
``cos(theta)`` times trapezoid in ``phi`` for ``n = 3``.  Node counts are
doubled until two successive averages agree to ``QUAD_TOL``.

Derivatives of ``h`` in ``x`` are central differences taken with a fixed
node count, so the quadrature error is a smooth function of ``x`` and does
not pollute the difference quotients.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import jets
from .errors import ConsistencyError, DegenerateMetricError, QuadratureError
from .geometry import ricci_hessian
from .metrics import MetricSpec

QUAD_TOL = 1e-8
FD_STEP = 1e-3
START_NODES = {2: 32, 3: 16}
MAX_NODES = {2: 1 << 16, 3: 512}
RICHARDSON_TOL = 1e-3
DEFAULT_MEASURE = "cone"


def sphere_nodes(dim: int, nodes: int):
    """Points ``u``, tangent frames ``du`` (``[k, a, i]``) and weights on ``S^{dim-1}``."""
    if dim == 2:
        th = 2 * np.pi * np.arange(nodes) / nodes
        u = np.column_stack([np.cos(th), np.sin(th)])
        du = np.column_stack([-np.sin(th), np.cos(th)])[:, None, :]
        return u, du, np.full(nodes, 2 * np.pi / nodes)
    if dim == 3:
        t, wt = np.polynomial.legendre.leggauss(nodes)
        m = 2 * nodes
        ph = 2 * np.pi * np.arange(m) / m
        T, P = np.meshgrid(t, ph, indexing="ij")
        W = np.outer(wt, np.full(m, 2 * np.pi / m))
        T, P, W = T.ravel(), P.ravel(), W.ravel()
        s = np.sqrt(1 - T * T)
        u = np.column_stack([s * np.cos(P), s * np.sin(P), T])
        du_t = np.column_stack([-T / s * np.cos(P), -T / s * np.sin(P), np.ones_like(T)])
        du_p = np.column_stack([-s * np.sin(P), s * np.cos(P), np.zeros_like(T)])
        return u, np.stack([du_t, du_p], axis=1), W
    raise ValueError(f"averaging is implemented for dimension 2 and 3, not {dim}")


def _average_fixed(spec: MetricSpec, x, nodes: int, measure: str = DEFAULT_MEASURE) -> np.ndarray:
    n = spec.dimension
    u, du, w = sphere_nodes(n, nodes)
    k = u.shape[0]
    lifted = jets.lift_all(u, 2)
    xs = [np.full(k, c) for c in np.asarray(x, float)]
    e = spec.energy(xs, lifted)
    E = np.asarray(e.value)
    if np.any(E <= 0):
        raise DegenerateMetricError("F vanishes on the unit sphere; the metric is not positive definite")
    F = np.sqrt(E)
    gradF = np.stack([e.partial(i) for i in range(n)], axis=-1) / (2 * F[:, None])
    g = np.stack([np.stack([0.5 * e.partial(i, j) for j in range(n)], axis=-1) for i in range(n)], axis=-2)
    if measure == "cone":
        # Lebesgue volume of the cone over the patch: dsigma(u) / (n F(u)^n)
        dsig = np.sqrt(np.linalg.det(np.einsum("kai,kbi->kab", du, du))) * w
        dlam = dsig / F**n
    elif measure == "surface":
        # y = u / F(u):  dy = (du - u (gradF . du) / F) / F
        slope = np.einsum("ki,kai->ka", gradF, du)
        dy = (du - u[:, None, :] * (slope / F[:, None])[:, :, None]) / F[:, None, None]
        dlam = np.sqrt(np.linalg.det(np.einsum("kai,kbi->kab", dy, dy))) * w
    else:
        raise ValueError(f"unknown measure {measure!r}")
    return np.einsum("k,kij->ij", dlam, g) / np.sum(dlam)


def _symmetrize(h):
    return 0.5 * (h + h.T)


@dataclass
class Average:
    h: np.ndarray
    nodes: int
    change: float


def converge(spec: MetricSpec, x, tol: float = QUAD_TOL, start: int | None = None, measure: str = DEFAULT_MEASURE) -> Average:
    """Double the node count until successive averages differ by less than ``tol``."""
    if spec.kind != "base":
        raise TypeError("only positive-definite base metrics are averaged")
    n = spec.dimension
    nodes = start or START_NODES.get(n, 16)
    prev = _average_fixed(spec, x, nodes, measure)
    while nodes < MAX_NODES[n]:
        nodes *= 2
        cur = _average_fixed(spec, x, nodes, measure)
        change = float(np.max(np.abs(cur - prev)))
        if change < tol:
            return Average(_symmetrize(cur), nodes, change)
        prev = cur
    raise QuadratureError(f"indicatrix quadrature did not converge to {tol} with {nodes} nodes")


def average_metric(baseF: MetricSpec, x, nodes: int | None = None, measure: str = DEFAULT_MEASURE) -> np.ndarray:
    """Averaged metric ``h_x``; adaptive when ``nodes`` is None, else a fixed rule.

    ``measure`` is ``"cone"`` (Lebesgue volume of the unit-ball sector over a
    patch of ``S_x``) or ``"surface"`` (Euclidean surface area of ``S_x``).
    Only the cone measure is carried to itself by linear maps of the fibre,
    which is what makes ``h`` parallel for Berwald metrics.
    """
    x = np.asarray(x, float)
    baseF.check_chart(x)
    if nodes is None:
        h = converge(baseF, x, measure=measure).h
    else:
        h = _symmetrize(_average_fixed(baseF, x, nodes, measure))
    if np.any(np.linalg.eigvalsh(h) <= 0):
        raise DegenerateMetricError("averaged metric is not positive definite")
    return h


def _derivatives(spec, x, step, nodes, measure):
    """``h``, ``dh[k, i, j] = d_k h_ij`` and ``d2h[k, l, i, j]`` by central differences."""
    n = spec.dimension
    x = np.asarray(x, float)
    e = np.eye(n) * step
    h = lambda p: average_metric(spec, p, nodes, measure)
    h0 = h(x)
    plus = [h(x + e[k]) for k in range(n)]
    minus = [h(x - e[k]) for k in range(n)]
    dh = np.array([(plus[k] - minus[k]) / (2 * step) for k in range(n)])
    d2h = np.empty((n, n, n, n))
    for k in range(n):
        d2h[k, k] = (plus[k] - 2 * h0 + minus[k]) / step**2
        for l in range(k + 1, n):
            mixed = (
                h(x + e[k] + e[l]) - h(x + e[k] - e[l]) - h(x - e[k] + e[l]) + h(x - e[k] - e[l])
            ) / (4 * step**2)
            d2h[k, l] = d2h[l, k] = mixed
    return h0, dh, d2h


def _christoffel(h, dh):
    hinv = np.linalg.inv(h)
    # first kind [l, j, k] = 1/2 (d_j h_lk + d_k h_lj - d_l h_jk)
    first = 0.5 * (np.einsum("jlk->ljk", dh) + np.einsum("klj->ljk", dh) - dh)
    return np.einsum("il,ljk->ijk", hinv, first)


def _condition_check(h):
    if np.linalg.cond(h) > 1e10:
        raise DegenerateMetricError("averaged metric is ill-conditioned")


def _nodes_for(spec, x, nodes, measure):
    if nodes is not None:
        return nodes
    # one extra doubling gives margin for the neighbouring stencil points
    return 2 * converge(spec, x, measure=measure).nodes


def christoffel_of_h(
    baseF: MetricSpec, x, fd_step: float = FD_STEP, nodes: int | None = None, measure: str = DEFAULT_MEASURE
) -> np.ndarray:
    """Levi-Civita symbols ``Gamma(h)^i_jk`` at ``x``."""
    x = np.asarray(x, float)
    nodes = _nodes_for(baseF, x, nodes, measure)
    n = baseF.dimension
    h = lambda p: average_metric(baseF, p, nodes, measure)
    e = np.eye(n) * fd_step
    h0 = h(x)
    _condition_check(h0)
    dh = np.array([(h(x + e[k]) - h(x - e[k])) / (2 * fd_step) for k in range(n)])
    return _christoffel(h0, dh)


def _ricci_fd(spec, x, step, nodes, measure):
    h, dh, d2h = _derivatives(spec, x, step, nodes, measure)
    _condition_check(h)
    hinv = np.linalg.inv(h)
    gamma = _christoffel(h, dh)
    # d_m Gamma^i_jk = d_m(h^il) first_ljk + h^il d_m first_ljk
    first = 0.5 * (np.einsum("jlk->ljk", dh) + np.einsum("klj->ljk", dh) - dh)
    dfirst = 0.5 * (
        np.einsum("mjlk->mljk", d2h) + np.einsum("mklj->mljk", d2h) - d2h
    )
    dhinv = -np.einsum("ia,mab,bl->mil", hinv, dh, hinv)
    dgamma = np.einsum("mil,ljk->mijk", dhinv, first) + np.einsum("il,mljk->mijk", hinv, dfirst)
    ric = (
        np.einsum("iijk->jk", dgamma)
        - np.einsum("kiji->jk", dgamma)
        + np.einsum("iip,pjk->jk", gamma, gamma)
        - np.einsum("ikp,pji->jk", gamma, gamma)
    )
    return 0.5 * (ric + ric.T), h


@dataclass
class RicciComparison:
    ricci_h: np.ndarray
    ricci_jets: np.ndarray
    difference: float
    step_halving_diff: float
    h: np.ndarray
    nodes: int
    y: np.ndarray

    def to_json(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in asdict(self).items()}


def ricci_of_h(
    baseF: MetricSpec, x, fd_step: float = FD_STEP, nodes: int | None = None, y=None, measure: str = DEFAULT_MEASURE
) -> RicciComparison:
    """Ricci tensor of ``h`` by finite differences, next to ``1/2 d^2 R / dy^2`` from jets.

    For Berwald metrics the two agree; the jet path is evaluated at ``y``
    (a fixed unit direction by default).
    """
    x = np.asarray(x, float)
    nodes = _nodes_for(baseF, x, nodes, measure)
    ric, h = _ricci_fd(baseF, x, fd_step, nodes, measure)
    ric_half, _ = _ricci_fd(baseF, x, fd_step / 2, nodes, measure)
    halving = float(np.max(np.abs(ric - ric_half)))
    if halving > RICHARDSON_TOL * max(1.0, float(np.max(np.abs(ric)))):
        raise ConsistencyError(f"finite-difference Ricci is noise dominated (step-halving change {halving:.3e})")
    if y is None:
        y = np.ones(baseF.dimension) / np.sqrt(baseF.dimension)
    y = np.asarray(y, float)
    jet_ric = ricci_hessian(baseF, x, y)
    return RicciComparison(ric, jet_ric, float(np.max(np.abs(ric - jet_ric))), halving, h, nodes, y)
