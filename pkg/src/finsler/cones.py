"""Causal classification for splitting families.

Every supported spacetime family can be written fibrewise as

    L(x, (tau, v)) = -Lam(x) tau^2 + 2 b(x, v) tau + F^2(x, v),

so the two roots of ``L = 0`` in ``tau`` are available in closed form and the
future cone ``T`` is ``tau > tau_plus``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .metrics import MetricSpec

NULL_TOL = 1e-10


class CausalClass(str, Enum):
    TIMELIKE_FUTURE = "timelike_future"
    TIMELIKE_OTHER = "timelike_other"
    NULL = "null"
    SPACELIKE = "spacelike"
    NON_SMOOTH_LOCUS = "non_smooth_locus"
    ZERO = "zero"


@dataclass(frozen=True)
class ConeResult:
    causal_class: CausalClass
    L_value: float
    boundary_tau: tuple[float, float] | None

    @property
    def in_T(self) -> bool:
        return self.causal_class is CausalClass.TIMELIKE_FUTURE


def boundary_tau(spec: MetricSpec, x, v) -> tuple[float, float]:
    """Roots ``(tau_plus, tau_minus)`` of ``L(x, (tau, v)) = 0``."""
    lam, b, f2 = spec.splitting(x, v)
    lam = np.asarray(lam, float)
    if np.any(lam <= 0):
        raise ValueError("d/dt must be timelike (Lam > 0) for a cone classification")
    disc = np.sqrt(np.maximum(b * b / (lam * lam) + f2 / lam, 0.0))
    return b / lam + disc, b / lam - disc


def _check_family(spec: MetricSpec):
    if not (spec.is_splitting or spec.family == "lorentzian_quadratic"):
        raise TypeError(f"cone classification is not defined for {spec.family}")


def classify(spec: MetricSpec, x, y) -> ConeResult:
    """Causal class of the tangent vector ``y`` at ``x``."""
    _check_family(spec)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if not np.any(y):
        return ConeResult(CausalClass.ZERO, 0.0, None)
    tau, v = y[0], y[1:]
    L = float(spec.eval_L(x, y))
    roots = boundary_tau(spec, x, v)
    roots = (float(roots[0]), float(roots[1]))
    if not np.any(v) and spec.nonsmooth(x, y):
        return ConeResult(CausalClass.NON_SMOOTH_LOCUS, L, roots)
    if abs(L) <= NULL_TOL * float(np.dot(y, y)):
        cls = CausalClass.NULL
    elif tau > roots[0]:
        cls = CausalClass.TIMELIKE_FUTURE
    elif tau < roots[1]:
        cls = CausalClass.TIMELIKE_OTHER
    else:
        cls = CausalClass.SPACELIKE
    return ConeResult(cls, L, roots)


def classify_batch(spec: MetricSpec, x, ys) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`classify` for many ``ys`` at one ``x``.

    Returns the class labels (strings) and the directly evaluated ``L``.
    """
    _check_family(spec)
    ys = np.atleast_2d(np.asarray(ys, float))
    k = ys.shape[0]
    xs = [np.full(k, c) for c in np.asarray(x, float)]
    cols = [ys[:, i] for i in range(ys.shape[1])]
    L = np.asarray(spec.eval_L(xs, cols), float)
    tp, tm = boundary_tau(spec, xs, cols[1:])
    tau = ys[:, 0]
    labels = np.where(tau > tp, CausalClass.TIMELIKE_FUTURE.value, CausalClass.SPACELIKE.value).astype(object)
    labels[tau < tm] = CausalClass.TIMELIKE_OTHER.value
    labels[np.abs(L) <= NULL_TOL * np.sum(ys * ys, axis=1)] = CausalClass.NULL.value
    labels[~np.any(ys, axis=1)] = CausalClass.ZERO.value
    return labels, L


@dataclass(frozen=True)
class ConvexityReport:
    pairs: int
    violations: int
    out_of_cone: int
    mode: str


def _sample_in_cone(spec, x, rng, sign: int, size: int) -> np.ndarray:
    n = spec.dimension
    v = rng.standard_normal((size, n - 1))
    tp, tm = boundary_tau(spec, [np.full(size, c) for c in x], [v[:, i] for i in range(n - 1)])
    margin = rng.exponential(1.0, size) * (1.0 + np.abs(tp - tm))
    tau = tp + margin if sign > 0 else tm - margin
    return np.column_stack([tau, v])


def cone_convexity_probe(spec: MetricSpec, x, samples: int = 1000, seed: int = 0, mode: str = "same") -> ConvexityReport:
    """Check that midpoints of pairs in ``T_x`` stay in ``T_x``.

    ``mode="same"`` draws both vectors from ``T``; a midpoint outside ``T``
    is a violation.  ``mode="opposite"`` pairs ``T`` with the past cone; such
    pairs lie in different components, so exits are reported as
    ``out_of_cone`` rather than as violations.
    """
    if not spec.is_splitting and spec.family != "lorentzian_quadratic":
        raise TypeError(f"cone probe is not defined for {spec.family}")
    rng = np.random.default_rng(seed)
    x = np.asarray(x, float)
    a = _sample_in_cone(spec, x, rng, +1, samples)
    b = _sample_in_cone(spec, x, rng, +1 if mode == "same" else -1, samples)
    labels, _ = classify_batch(spec, x, 0.5 * (a + b))
    exits = int(np.sum(labels != CausalClass.TIMELIKE_FUTURE.value))
    if mode == "same":
        return ConvexityReport(samples, exits, 0, mode)
    if mode == "opposite":
        return ConvexityReport(samples, 0, exits, mode)
    raise ValueError(f"unknown probe mode {mode!r}")
