"""Geodesics: fixed-step RK4 for ``x'' = -2 G(x, x')``.

The spray is evaluated from a compiled symbolic form of ``L`` when the
metric can be written symbolically, which is about forty times faster than
the jet pipeline; otherwise the jet spray is used.  Both solve
``1/2 Hess_y L . G = 1/4 (d_x d_y L . y - d_x L)`` at each call.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartError, FinslerError, NonSmoothError
from .geometry import spray as jet_spray
from .metrics import MetricSpec


@dataclass
class GeodesicState:
    x: np.ndarray
    y: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, float)
        self.y = np.asarray(self.y, float)


class CompiledSpray:
    """``G(x, y)`` and ``L(x, y)`` from a lambdified symbolic energy."""

    def __init__(self, spec: MetricSpec):
        import sympy

        n = spec.dimension
        xs = sympy.symbols(f"x0:{n}", real=True)
        ys = sympy.symbols(f"y0:{n}", real=True)
        L = spec.energy(list(xs), list(ys))
        dLdy = [sympy.diff(L, v) for v in ys]
        # rhs_i = d_yi d_xk L y^k - d_xi L, so that Hess_y L . G = rhs / 2
        rhs = [sum(sympy.diff(d, xk) * yk for xk, yk in zip(xs, ys)) - sympy.diff(L, xi) for d, xi in zip(dLdy, xs)]
        hess = [sympy.diff(d, v) for d in dLdy for v in ys]
        self._f = sympy.lambdify([xs, ys], [L, *rhs, *hess], modules="math", cse=True)
        self.n = n

    def __call__(self, x, y):
        out = self._f(x, y)
        n = self.n
        return 0.5 * np.linalg.solve(np.reshape(out[n + 1 :], (n, n)), out[1 : n + 1])

    def energy(self, x, y) -> float:
        return float(self._f(x, y)[0])


class JetSpray:
    def __init__(self, spec: MetricSpec):
        self.spec = spec

    def __call__(self, x, y):
        return jet_spray(self.spec, x, y)

    def energy(self, x, y) -> float:
        return float(self.spec.energy(list(x), list(y)))


@functools.lru_cache(maxsize=32)
def compile_spray(spec: MetricSpec):
    """Symbolically compiled spray for ``spec``, or the jet spray if that fails."""
    try:
        return CompiledSpray(spec)
    except Exception:  # opaque plugin energies cannot be traced symbolically
        return JetSpray(spec)


@dataclass
class Trajectory:
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    L: np.ndarray
    exit: str | None = None
    message: str = ""
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.s)

    def rows(self):
        for k in range(len(self.s)):
            yield [self.s[k], *self.x[k], *self.y[k], self.L[k]]

    def header(self) -> list:
        n = self.x.shape[1]
        return ["s", *[f"x{i}" for i in range(n)], *[f"y{i}" for i in range(n)], "L"]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.header())
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])


def _smooth(spec, x, y) -> bool:
    return not spec.nonsmooth(x, y)


def integrate(spec: MetricSpec, initial: GeodesicState, s_end: float, step: float, compiled: bool = True) -> Trajectory:
    """RK4 trajectory from ``initial`` up to affine parameter ``s_end``.

    The trajectory stops early, with ``exit`` set, if it leaves the chart
    (``"chart"``) or reaches a direction where ``L`` is not smooth
    (``"cone"``); the last sample is then the last admissible one.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x0, y0 = initial.x, initial.y
    spec.check_chart(x0)
    if not _smooth(spec, x0, y0):
        raise NonSmoothError("initial velocity lies where L is not differentiable; no geodesic equation there")
    G = compile_spray(spec) if compiled else JetSpray(spec)
    check_chart = spec._impl.check_chart
    nsteps = int(round((s_end - initial.s) / step))
    if nsteps < 0:
        raise ValueError("s_end must not precede the initial parameter")
    xs = np.empty((nsteps + 1, spec.dimension))
    ys = np.empty_like(xs)
    ss = initial.s + step * np.arange(nsteps + 1)
    xs[0], ys[0] = x0, y0
    exit_flag, message = None, ""
    x, y = x0.copy(), y0.copy()
    h = step
    k = 0
    for k in range(1, nsteps + 1):
        try:
            a1 = -2.0 * G(x, y)
            x2, y2 = x + 0.5 * h * y, y + 0.5 * h * a1
            check_chart(x2.tolist())
            a2 = -2.0 * G(x2, y2)
            x3, y3 = x + 0.5 * h * y2, y + 0.5 * h * a2
            check_chart(x3.tolist())
            a3 = -2.0 * G(x3, y3)
            x4, y4 = x + h * y3, y + h * a3
            check_chart(x4.tolist())
            a4 = -2.0 * G(x4, y4)
            xn = x + h / 6.0 * (y + 2 * y2 + 2 * y3 + y4)
            yn = y + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
            if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(yn))):
                raise ChartError("non-finite state")
            check_chart(xn.tolist())
        except (ChartError, np.linalg.LinAlgError, ZeroDivisionError, ValueError) as exc:
            exit_flag, message = "chart", str(exc)
            k -= 1
            break
        if not _smooth(spec, xn, yn):
            exit_flag, message = "cone", "velocity reached the non-smooth locus of L"
            k -= 1
            break
        x, y = xn, yn
        xs[k], ys[k] = x, y
    else:
        k = nsteps
    xs, ys, ss = xs[: k + 1], ys[: k + 1], ss[: k + 1]
    L = np.array([G.energy(a, b) for a, b in zip(xs, ys)])
    return Trajectory(ss, xs, ys, L, exit_flag, message, {"step": step, "backend": type(G).__name__})


def conservation_check(traj: Trajectory) -> float:
    """``max |L(s) - L(0)|`` over the samples."""
    if len(traj) == 0:
        raise FinslerError("empty trajectory")
    return float(np.max(np.abs(traj.L - traj.L[0])))


def circular_orbit_state(m: float, r: float) -> GeodesicState:
    """Equatorial circular Schwarzschild orbit with ``L = -1``."""
    omega = np.sqrt(m / r**3)
    f = 1 - 2 * m / r
    tdot = 1.0 / np.sqrt(f - r * r * omega * omega)
    return GeodesicState([0.0, r, np.pi / 2, 0.0], [tdot, 0.0, 0.0, omega * tdot])
