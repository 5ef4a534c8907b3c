"""Killing fields and staticity.

The complete lift of a vector field ``K`` acts on functions on the tangent
bundle by ``K^h d/dx^h + (dK^h/dx^i) y^i d/dy^h``.  ``K`` is Killing when this
annihilates ``L``; it is static when, in addition, the distribution
``ker dL/dy(x, K(x))`` is integrable, which we test pointwise through the
Frobenius condition ``theta ^ d theta = 0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import FinslerError, JetDomainError, NonSmoothError
from .fields import VectorField
from .metrics import MetricSpec

C1_LIMIT_STEP = 1e-10
C1_JUMP_TOL = 1e-6


def _field_jet(K: VectorField, xs, nvars: int, order: int) -> jets.Jet:
    if K.dimension != len(xs):
        raise ValueError(f"vector field has {K.dimension} components, chart has {len(xs)}")
    comps = []
    for c in K(xs):
        comps.append(c if isinstance(c, jets.Jet) else jets.constant(c, nvars, order))
    return jets.stack(comps)


def _complete_lift(K: VectorField, n: int, xs, yjet, t: jets.Jet) -> jets.Jet:
    """Apply ``K^c`` to a (tensor) jet ``t``; the order drops by one."""
    k = _field_jet(K, xs, 2 * n, t.order)
    dk = jets.stack([k.diff(i) for i in range(n)], axis=-1)  # dk[h, i] = dK^h/dx^i
    dxt = jets.stack([t.diff(h) for h in range(n)], axis=-1)
    dyt = jets.stack([t.diff(n + h) for h in range(n)], axis=-1)
    return jets.einsum("h,...h->...", k, dxt) + jets.einsum("hi,i,...h->...", dk, yjet, dyt)


def _lift(spec: MetricSpec, x, y, order: int):
    n = spec.dimension
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    lifted = jets.lift_all(np.concatenate([x, y]), order)
    xs, ys = lifted[:n], lifted[n:]
    return n, xs, jets.stack(ys), spec.energy(xs, ys)


def killing_residual(spec: MetricSpec, K: VectorField, x, y) -> float:
    """``K^c(L)(x, y)``."""
    n, xs, yjet, L = _lift(spec, x, y, 1)
    return float(_complete_lift(K, n, xs, yjet, L).value)


def lie_derivative_g_residual(spec: MetricSpec, K: VectorField, x, y) -> np.ndarray:
    """``K^c(g_lj) + dK^h/dx^l g_hj + dK^h/dx^j g_lh`` at ``(x, y)``."""
    n, xs, yjet, L = _lift(spec, x, y, 3)
    dy = lambda t: jets.stack([t.diff(n + h) for h in range(n)], axis=-1)
    g = 0.5 * dy(dy(L))
    kc = np.asarray(_complete_lift(K, n, xs, yjet, g).value)
    k = _field_jet(K, xs, 2 * n, 1)
    dk = np.array([[k[h].partial(i) for i in range(n)] for h in range(n)])  # [h, l]
    g0 = np.asarray(g.value)
    return kc + dk.T @ g0 + g0 @ dk


@dataclass(frozen=True)
class OneFormSample:
    """``theta_i`` at ``x`` and the antisymmetric ``dtheta[j, k] = d_j theta_k - d_k theta_j``."""

    theta: np.ndarray
    dtheta: np.ndarray

    def wedge(self) -> dict:
        """Components of ``theta ^ dtheta`` on ``dx^i ^ dx^j ^ dx^k``, ``i < j < k``."""
        t, d = self.theta, self.dtheta
        return {
            (i, j, k): float(t[i] * d[j, k] + t[j] * d[k, i] + t[k] * d[i, j])
            for i, j, k in itertools.combinations(range(len(t)), 3)
        }


def orthogonal_one_form(spec: MetricSpec, K: VectorField, x) -> OneFormSample:
    """``theta = dL/dy(x, K(x))`` and its exterior derivative at ``x``.

    Only first fibre derivatives are taken at ``K(x)``, so ``L`` need only be
    C^1 there.
    """
    n = spec.dimension
    x = np.asarray(x, float)
    xs1 = jets.lift_all(x, 1)
    k = _field_jet(K, xs1, n, 1)
    kx = np.asarray(k.value, float)
    dk = np.array([[k[h].partial(i) for i in range(n)] for h in range(n)])  # [h, j]
    if float(spec.eval_L(x, kx)) >= 0:
        raise FinslerError("K is not timelike at x")
    try:
        theta, dtheta_dx = _theta_jet(spec, x, kx, dk)
    except (NonSmoothError, JetDomainError):
        if np.any(dk):
            raise NonSmoothError("L is not C^2 at K(x) and K is not constant; d theta is undefined") from None
        # L is only C^1 at K(x): take the symmetric limit along a transverse direction
        u = np.ones(n) / np.sqrt(n)
        eps = C1_LIMIT_STEP * float(np.linalg.norm(kx))
        parts = [_theta_jet(spec, x, kx + s * eps * u, dk) for s in (1.0, -1.0)]
        jump = float(np.max(np.abs(parts[0][0] - parts[1][0])))
        if jump > C1_JUMP_TOL * max(1.0, float(np.max(np.abs(parts[0][0])))):
            raise NonSmoothError(f"dL/dy jumps by {jump:.3e} across K(x); L is not C^1 there") from None
        theta = 0.5 * (parts[0][0] + parts[1][0])
        dtheta_dx = 0.5 * (parts[0][1] + parts[1][1])
    return OneFormSample(theta, dtheta_dx.T - dtheta_dx)


def _theta_jet(spec, x, y, dk):
    n = spec.dimension
    order = 2 if np.any(dk) else 1
    lifted = jets.lift_all(np.concatenate([x, y]), order + 1)
    L = spec.energy(lifted[:n], lifted[n:])
    theta = np.array([L.partial(n + i) for i in range(n)])
    # d/dx^j of theta_i(x, K(x)), chain rule through y = K(x); [i, j] = d_j theta_i
    dtheta_dx = np.array([[L.partial(j, n + i) for j in range(n)] for i in range(n)])
    if order == 2:
        hess = np.array([[L.partial(n + i, n + m) for m in range(n)] for i in range(n)])
        dtheta_dx = dtheta_dx + hess @ dk
    return theta, dtheta_dx


def static_frobenius_residual(spec: MetricSpec, K: VectorField, x) -> float:
    """Max-norm of ``theta ^ dtheta``; zero iff ``ker theta`` is integrable near ``x``."""
    comps = orthogonal_one_form(spec, K, x).wedge()
    return max((abs(v) for v in comps.values()), default=0.0)
