"""Connection and curvature of a Finsler (or Lorentz-Finsler) energy at one point.

Every quantity is carried as a jet in all ``2(n+1)`` tangent-bundle
variables, so horizontal derivatives ``d/dx^i - N^m_i d/dy^m`` of the
fundamental tensor, the Chern symbols and the Landsberg trace are exact to
rounding.  Each derivative consumes one order of the jet, so:

* spray and fundamental tensor need order 2,
* Chern symbols need order 3,
* the hh-curvature and Landsberg tensor need order 4,
* the field-equation residual needs order 6.

Index conventions: ``g[i, j]``, ``G[i]``, ``N[i, j] = dG^i/dy^j``,
``Gamma[i, j, k]`` (upper index first), ``R4[i, j, k, l] = R^i_{jkl}``,
``R2[i, k] = R^i_k``, ``P[i, j, k] = P^i_{jk}``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from functools import cached_property

import numpy as np

from . import jets
from .errors import ConsistencyError, DegenerateMetricError, NullDirectionError
from .jets import einsum
from .metrics import MetricSpec

DEGENERACY_TOL = 1e-12
CROSS_CHECK_RTOL = 1e-6

ORDER_SPRAY = 2
ORDER_CONNECTION = 3
ORDER_CURVATURE = 4
ORDER_BERWALD = 5
ORDER_FIELDEQ = 6


class TangentJets:
    """Lazily evaluated connection/curvature jets of ``spec`` at ``(x, y)``."""

    def __init__(self, spec: MetricSpec, x, y, order: int = ORDER_CURVATURE):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n = spec.dimension
        if x.shape != (n,) or y.shape != (n,):
            raise ValueError(f"x and y must have shape ({n},)")
        if not np.any(y):
            raise ValueError("y must be non-zero (slit tangent bundle)")
        self.spec = spec
        self.n = n
        self.order = order
        self.x, self.y = x, y
        lifted = jets.lift_all(np.concatenate([x, y]), order)
        self.xs, self.ys = lifted[:n], lifted[n:]
        self.yjet = jets.stack(self.ys)
        self.L = spec.energy(self.xs, self.ys)
        if not isinstance(self.L, jets.Jet):
            self.L = jets.constant(self.L, 2 * n, order)

    # -- derivative helpers -----------------------------------------------
    def dx(self, t: jets.Jet) -> jets.Jet:
        return jets.stack([t.diff(k) for k in range(self.n)], axis=-1)

    def dy(self, t: jets.Jet) -> jets.Jet:
        return jets.stack([t.diff(self.n + k) for k in range(self.n)], axis=-1)

    def delta(self, t: jets.Jet) -> jets.Jet:
        """Horizontal derivative, appended as the last tensor index."""
        return self.dx(t) - einsum("...m,mi->...i", self.dy(t), self.N)

    # -- pipeline ---------------------------------------------------------
    @cached_property
    def g(self) -> jets.Jet:
        return 0.5 * self.dy(self.dy(self.L))

    @cached_property
    def g_inv(self) -> jets.Jet:
        g0 = np.asarray(self.g.value)
        det = np.linalg.det(g0)
        scale = np.max(np.abs(g0)) ** self.n
        if not np.isfinite(det) or abs(det) < DEGENERACY_TOL * scale:
            raise DegenerateMetricError(f"fundamental tensor is degenerate (det = {det:.3e})")
        a0 = np.linalg.inv(g0)  # LAPACK getrf/getri, partial pivoting
        # (g0 + H)^-1 = sum_k (-a0 H)^k a0, exact once H^k truncates away
        step = -einsum("ij,jk->ik", a0, self.g._nilpotent())
        out = jets.constant(a0, 2 * self.n, self.g.order)
        for _ in range(self.g.order):
            out = einsum("ij,jk->ik", step, out) + a0
        return out

    @cached_property
    def G(self) -> jets.Jet:
        mixed = einsum("jk,k->j", self.dx(self.dy(self.L)), self.yjet)
        return 0.25 * einsum("ij,j->i", self.g_inv, mixed - self.dx(self.L))

    @cached_property
    def N(self) -> jets.Jet:
        return self.dy(self.G)

    @cached_property
    def Gamma(self) -> jets.Jet:
        dg = self.delta(self.g)  # dg[j, k, l] = delta g_jk / delta x^l
        t = einsum("lkj->ljk", dg) - einsum("jkl->ljk", dg) + dg
        return 0.5 * einsum("il,ljk->ijk", self.g_inv, t)

    @cached_property
    def R4(self) -> jets.Jet:
        d_gamma = self.delta(self.Gamma)  # [i, j, k, m] = delta Gamma^i_jk / delta x^m
        return (
            einsum("ijlk->ijkl", d_gamma)
            - d_gamma
            + einsum("mjl,imk->ijkl", self.Gamma, self.Gamma)
            - einsum("mjk,iml->ijkl", self.Gamma, self.Gamma)
        )

    @cached_property
    def R2(self) -> jets.Jet:
        """Riemann curvature ``R^i_k`` from the spray."""
        G, N = self.G, self.N
        return (
            2 * self.dx(G)
            - einsum("ikm,m->ik", self.dx(N), self.yjet)
            + 2 * einsum("m,imk->ik", G, self.dy(N))
            - einsum("im,mk->ik", N, N)
        )

    @cached_property
    def ricci(self) -> jets.Jet:
        return einsum("ii->", self.R2)

    @cached_property
    def P(self) -> jets.Jet:
        return self.dy(self.N) - self.Gamma

    @cached_property
    def P_trace(self) -> jets.Jet:
        return einsum("lli->i", self.P)

    @cached_property
    def landsberg_block(self) -> float:
        """``g^ij (dP_i/dx^j - P_h Gamma^h_ij - P_i P_j + d/dy^j(y^k(...)))``."""
        p = self.P_trace
        a = self.delta(p) - einsum("h,hij->ij", p, self.Gamma)
        q = einsum("k,ik->i", self.yjet, a)
        inner = a - einsum("i,j->ij", p, p) + self.dy(q)
        return float(einsum("ij,ij->", self.g_inv, inner).value)

    @cached_property
    def fieldeq(self) -> float:
        lv = self.L.value
        if abs(lv) <= 1e-14 * float(np.dot(self.y, self.y)):
            raise NullDirectionError("field equation divides by L, which vanishes here")
        r = self.ricci
        hess_r = self.dy(self.dy(r))
        main = 3 * r.value / lv - 0.5 * float(einsum("ij,ij->", self.g_inv, hess_r).value)
        return main - self.landsberg_block

    def check_dual_path(self):
        r2 = np.asarray(self.R2.value)
        via_r4 = np.einsum("ijkl,j,l->ik", self.R4.value, self.y, self.y)
        err = float(np.max(np.abs(via_r4 - r2)))
        tol = CROSS_CHECK_RTOL * max(1.0, float(np.max(np.abs(r2))))
        if err > tol:
            raise ConsistencyError(f"R^i_jkl y^j y^l != R^i_k (max diff {err:.3e})")
        return err


@dataclass
class CurvatureReport:
    x: np.ndarray
    y: np.ndarray
    L: float
    g: np.ndarray
    g_inv: np.ndarray
    G: np.ndarray
    N: np.ndarray
    Gamma: np.ndarray
    R4: np.ndarray
    R2: np.ndarray
    ricci_scalar: float
    P: np.ndarray
    P_trace: np.ndarray
    dual_path_error: float
    fieldeq_residual: float | None = None
    fieldeq_normalized: float | None = None
    landsberg_block: float | None = None

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


def curvature_report(spec: MetricSpec, x, y, fieldeq: bool = False) -> CurvatureReport:
    """All connection/curvature quantities at ``(x, y)``.

    With ``fieldeq=True`` the jets are carried to order 6 and the vacuum
    field-equation residual is included.
    """
    tj = TangentJets(spec, x, y, ORDER_FIELDEQ if fieldeq else ORDER_CURVATURE)
    err = tj.check_dual_path()
    ricci = float(tj.ricci.value)
    rep = CurvatureReport(
        x=tj.x,
        y=tj.y,
        L=float(tj.L.value),
        g=np.asarray(tj.g.value),
        g_inv=np.asarray(tj.g_inv.value),
        G=np.asarray(tj.G.value),
        N=np.asarray(tj.N.value),
        Gamma=np.asarray(tj.Gamma.value),
        R4=np.asarray(tj.R4.value),
        R2=np.asarray(tj.R2.value),
        ricci_scalar=ricci,
        P=np.asarray(tj.P.value),
        P_trace=np.asarray(tj.P_trace.value),
        dual_path_error=err,
    )
    if fieldeq:
        res = tj.fieldeq
        rep.fieldeq_residual = res
        rep.fieldeq_normalized = res / (1.0 + abs(ricci) / abs(rep.L))
        rep.landsberg_block = tj.landsberg_block
    return rep


def fundamental_tensor(spec: MetricSpec, x, y) -> np.ndarray:
    """``g_ij = 1/2 d^2 E / dy^i dy^j`` (raises on degenerate ``g``)."""
    tj = TangentJets(spec, x, y, ORDER_SPRAY)
    tj.g_inv  # degeneracy check
    return np.asarray(tj.g.value)


def fundamental_tensor_batch(spec: MetricSpec, x, ys) -> np.ndarray:
    """Fundamental tensor at a fixed base point for many fibre vectors ``ys[k]``.

    Only the fibre variables are lifted, so this is cheap for quadrature.
    """
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    x = np.asarray(x, dtype=float)
    lifted = jets.lift_all(ys, 2)
    xs = [np.full(ys.shape[0], c) for c in x]
    e = spec.energy(xs, lifted)
    n = spec.dimension
    return np.stack(
        [np.stack([0.5 * e.partial(i, j) for j in range(n)], axis=-1) for i in range(n)], axis=-2
    )


def spray(spec: MetricSpec, x, y) -> np.ndarray:
    return np.asarray(TangentJets(spec, x, y, ORDER_SPRAY).G.value)


def nonlinear_connection(spec: MetricSpec, x, y) -> np.ndarray:
    return np.asarray(TangentJets(spec, x, y, ORDER_CONNECTION).N.value)


def chern_symbols(spec: MetricSpec, x, y) -> np.ndarray:
    return np.asarray(TangentJets(spec, x, y, ORDER_CONNECTION).Gamma.value)


def hh_curvature(spec: MetricSpec, x, y) -> np.ndarray:
    tj = TangentJets(spec, x, y, ORDER_CURVATURE)
    tj.check_dual_path()
    return np.asarray(tj.R4.value)


def riemann_R2(spec: MetricSpec, x, y) -> np.ndarray:
    tj = TangentJets(spec, x, y, ORDER_CURVATURE)
    tj.check_dual_path()
    return np.asarray(tj.R2.value)


def ricci_scalar(spec: MetricSpec, x, y) -> float:
    tj = TangentJets(spec, x, y, ORDER_CURVATURE)
    tj.check_dual_path()
    return float(tj.ricci.value)


def ricci_hessian(spec: MetricSpec, x, y) -> np.ndarray:
    """``1/2 d^2 R / dy^a dy^b``; equals the Ricci tensor for Berwald metrics."""
    tj = TangentJets(spec, x, y, ORDER_FIELDEQ)
    return 0.5 * np.asarray(tj.dy(tj.dy(tj.ricci)).value)


def landsberg(spec: MetricSpec, x, y) -> tuple[np.ndarray, np.ndarray]:
    tj = TangentJets(spec, x, y, ORDER_CURVATURE)
    return np.asarray(tj.P.value), np.asarray(tj.P_trace.value)


def fieldeq_residual(spec: MetricSpec, x, y) -> float:
    """Left-hand side of the completed vacuum field equation at ``(x, y)``, ``L != 0``."""
    return TangentJets(spec, x, y, ORDER_FIELDEQ).fieldeq
