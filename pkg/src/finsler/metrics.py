"""Metric families.

A :class:`MetricSpec` is either a *spacetime* family, evaluated through the
Lorentz-Finsler function ``L(x, y)``, or a positive-definite *base* family,
evaluated through the Finsler norm ``F(x, y)``.  The curvature pipeline works
with the "energy" of a spec: ``L`` for spacetimes, ``F**2`` for bases.

Evaluators are written against plain arithmetic plus the elementary
functions of :mod:`finsler.jets`, so the same code runs on floats, numpy
arrays (batched points), jets (derivatives) and sympy symbols (tests).

Spacetime coordinates are ``x = (t, x^1, ..., x^n)`` with fibre coordinates
``y = (tau, y^1, ..., y^n)``; geometric units ``G = c = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from . import jets
from .errors import ChartError, ConfigError, NonSmoothError, PositivityError
from .fields import Constant, OneForm, field_to_json, scalar_field

SPACETIME_FAMILIES = (
    "lorentzian_quadratic",
    "stationary_splitting",
    "standard_static_product",
    "f_omega_static",
    "rutz_schwarzschild",
)
BASE_FAMILIES = ("riemannian_base", "randers_base", "f_omega", "g_plus_beta")
SPLITTING_FAMILIES = (
    "stationary_splitting",
    "standard_static_product",
    "f_omega_static",
    "rutz_schwarzschild",
)

_ZERO_TOL = 1e-12


def _is_zero(v, scale) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.sqrt(np.sum(v * v, axis=0)) if v.ndim else abs(v)
    return norm <= _ZERO_TOL * np.maximum(scale, 1e-300)


def _values(seq):
    try:
        return [np.asarray(jets.value_of(c), dtype=float) for c in seq]
    except TypeError:  # symbolic input
        return None


def _any_jet(*seqs) -> bool:
    return any(isinstance(c, jets.Jet) for seq in seqs for c in seq)


def _positive_field(f, x, what: str):
    v = f(x)
    try:
        val = jets.value_of(v)
    except TypeError:
        return v
    if np.any(np.asarray(val) <= 0):
        raise ChartError(f"{what} must be positive on the chart")
    return v


# ---------------------------------------------------------------------------
# base families (positive definite Finsler norms on M)
# ---------------------------------------------------------------------------

class _Riemannian:
    """``F = sqrt(a_x(y, y))``; presets or a matrix of scalar fields."""

    def __init__(self, params: Mapping, dimension: int | None):
        preset = params.get("preset")
        self.preset = preset
        self.radius = float(params.get("radius", 1.0))
        if preset == "euclidean":
            if dimension is None:
                raise ConfigError("euclidean preset needs a dimension")
            self.dimension = dimension
        elif preset == "sphere":
            self.dimension = 2
        elif preset == "sphere_line":
            self.dimension = 3
        elif preset is None:
            rows = params.get("matrix")
            if rows is None:
                raise ConfigError("riemannian_base needs 'preset' or 'matrix'")
            self.rows = tuple(tuple(scalar_field(c) for c in row) for row in rows)
            self.dimension = len(self.rows)
            if any(len(r) != self.dimension for r in self.rows):
                raise ConfigError("riemannian_base matrix must be square")
        else:
            raise ConfigError(f"unknown riemannian preset {preset!r}")
        if preset in ("sphere", "sphere_line") and self.radius <= 0:
            raise ConfigError("sphere radius must be positive")

    def to_params(self) -> dict:
        if self.preset is None:
            return {"matrix": [[field_to_json(c) for c in row] for row in self.rows]}
        if self.preset == "euclidean":
            return {"preset": "euclidean"}
        return {"preset": self.preset, "radius": self.radius}

    def check_chart(self, x):
        if self.preset in ("sphere", "sphere_line"):
            theta = x[0]
            if np.any(theta <= 0) or np.any(theta >= np.pi):
                raise ChartError("sphere chart requires 0 < theta < pi")

    def matrix(self, x) -> list:
        """Component functions a_ij(x) (floats, arrays or jets)."""
        n = self.dimension
        if self.preset == "euclidean":
            return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
        if self.preset in ("sphere", "sphere_line"):
            rho2 = self.radius**2
            s = jets.sin(x[0])
            m = [[0.0] * n for _ in range(n)]
            m[0][0] = rho2
            m[1][1] = rho2 * s * s
            if n == 3:
                m[2][2] = 1.0
            return m
        return [[c(x) for c in row] for row in self.rows]

    def energy(self, x, y):
        a = self.matrix(x)
        n = self.dimension
        total = 0.0
        for i in range(n):
            for j in range(n):
                aij = a[i][j]
                if isinstance(aij, float) and aij == 0.0:
                    continue
                total = total + aij * y[i] * y[j]
        return total

    def finsler(self, x, y):
        return jets.sqrt(self.energy(x, y))

    def nonsmooth(self, x, y) -> bool:
        return False


class _Randers:
    """``F = alpha(x, y) + beta_x(y)`` with ``alpha`` any base metric."""

    def __init__(self, params: Mapping, dimension: int | None):
        self.alpha = as_spec(params["alpha"], kind="base")
        self.beta = OneForm.parse(params["beta"])
        self.dimension = self.alpha.dimension
        if self.beta.dimension != self.dimension:
            raise ConfigError("beta dimension does not match alpha")

    def to_params(self) -> dict:
        return {"alpha": self.alpha.to_dict(), "beta": self.beta.to_json()}

    def check_chart(self, x):
        self.alpha._impl.check_chart(x)

    def finsler(self, x, y):
        f = self.alpha._impl.finsler(x, y) + self.beta(x, y)
        _check_positive(f, y)
        return f

    def energy(self, x, y):
        f = self.finsler(x, y)
        return f * f

    def nonsmooth(self, x, y) -> bool:
        return bool(np.any(_is_zero(y, 1.0)))


class _FOmega:
    """``F_w = w/Lam + sqrt(w^2/Lam^2 + F^2/Lam)``."""

    def __init__(self, params: Mapping, dimension: int | None):
        self.base = as_spec(params["base"], kind="base")
        self.lapse = scalar_field(params.get("lapse", 1.0))
        self.omega = OneForm.parse(params["omega"])
        self.dimension = self.base.dimension
        if self.omega.dimension != self.dimension:
            raise ConfigError("omega dimension does not match base")

    def to_params(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "lapse": field_to_json(self.lapse),
            "omega": self.omega.to_json(),
        }

    def check_chart(self, x):
        self.base._impl.check_chart(x)

    def finsler(self, x, y):
        lam = _positive_field(self.lapse, x, "lapse")
        w = self.omega(x, y) / lam
        return w + jets.sqrt(w * w + self.base._impl.energy(x, y) / lam)

    def energy(self, x, y):
        f = self.finsler(x, y)
        return f * f

    def nonsmooth(self, x, y) -> bool:
        return bool(np.any(_is_zero(y, 1.0)))


class _GPlusBeta:
    """``sqrt(F^2/Lam + beta^2) + beta``."""

    def __init__(self, params: Mapping, dimension: int | None):
        self.base = as_spec(params["base"], kind="base")
        self.lapse = scalar_field(params.get("lapse", 1.0))
        self.beta = OneForm.parse(params["beta"])
        self.dimension = self.base.dimension
        if self.beta.dimension != self.dimension:
            raise ConfigError("beta dimension does not match base")

    def to_params(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "lapse": field_to_json(self.lapse),
            "beta": self.beta.to_json(),
        }

    def check_chart(self, x):
        self.base._impl.check_chart(x)

    def finsler(self, x, y):
        lam = _positive_field(self.lapse, x, "lapse")
        b = self.beta(x, y)
        f = jets.sqrt(self.base._impl.energy(x, y) / lam + b * b) + b
        _check_positive(f, y)
        return f

    def energy(self, x, y):
        f = self.finsler(x, y)
        return f * f

    def nonsmooth(self, x, y) -> bool:
        return bool(np.any(_is_zero(y, 1.0)))


def _check_positive(f, y):
    try:
        val = np.asarray(jets.value_of(f))
        yv = _values(y)
    except TypeError:
        return
    if yv is None:
        return
    # F(0) = 0 is allowed; a non-zero vector must have positive norm
    nonzero = ~_is_zero(np.array(yv), 1.0) if yv else True
    if np.any((val < 0) | ((val == 0) & nonzero)):
        raise PositivityError("Finsler norm is not positive at the queried vector")


# ---------------------------------------------------------------------------
# spacetime families
# ---------------------------------------------------------------------------

class _LorentzianQuadratic:
    """``L = h_x(y, y)``."""

    def __init__(self, params: Mapping, dimension: int | None):
        self.preset = params.get("preset")
        self.m = float(params.get("m", 1.0))
        if self.preset == "minkowski":
            self.dimension = dimension or 4
        elif self.preset == "schwarzschild":
            self.dimension = 4
            if self.m <= 0:
                raise ConfigError("schwarzschild mass must be positive")
        elif self.preset is None:
            rows = params.get("matrix")
            if rows is None:
                raise ConfigError("lorentzian_quadratic needs 'preset' or 'matrix'")
            self.rows = tuple(tuple(scalar_field(c) for c in row) for row in rows)
            self.dimension = len(self.rows)
        else:
            raise ConfigError(f"unknown lorentzian preset {self.preset!r}")

    def to_params(self) -> dict:
        if self.preset == "schwarzschild":
            return {"preset": "schwarzschild", "m": self.m}
        if self.preset == "minkowski":
            return {"preset": "minkowski"}
        return {"matrix": [[field_to_json(c) for c in row] for row in self.rows]}

    def check_chart(self, x):
        if self.preset == "schwarzschild":
            _check_schwarzschild_chart(x, self.m)

    def matrix(self, x) -> list:
        n = self.dimension
        if self.preset == "minkowski":
            return [[(-1.0 if i == 0 else 1.0) if i == j else 0.0 for j in range(n)] for i in range(n)]
        if self.preset == "schwarzschild":
            r, th = x[1], x[2]
            f = 1 - 2 * self.m / r
            s = jets.sin(th)
            m = [[0.0] * 4 for _ in range(4)]
            m[0][0] = -f
            m[1][1] = 1 / f
            m[2][2] = r * r
            m[3][3] = r * r * s * s
            return m
        return [[c(x) for c in row] for row in self.rows]

    def energy(self, x, y):
        h = self.matrix(x)
        total = 0.0
        for i, row in enumerate(h):
            for j, hij in enumerate(row):
                if isinstance(hij, float) and hij == 0.0:
                    continue
                total = total + hij * y[i] * y[j]
        return total

    def nonsmooth(self, x, y) -> bool:
        return False

    def splitting(self, x, v):
        h = self.matrix(x)
        lam = -np.asarray(jets.value_of(h[0][0]), float)
        b = sum(np.asarray(jets.value_of(h[0][a + 1]), float) * v[a] for a in range(len(v)))
        f2 = sum(
            np.asarray(jets.value_of(h[a + 1][c + 1]), float) * v[a] * v[c]
            for a in range(len(v))
            for c in range(len(v))
        )
        return lam, b, f2


def _check_schwarzschild_chart(x, m):
    r, th = x[1], x[2]
    if isinstance(r, float) and isinstance(th, float):
        if not (r > 2 * m and 0 < th < np.pi):
            raise ChartError("Schwarzschild chart requires r > 2m and 0 < theta < pi")
        return
    r, th = np.asarray(r, float), np.asarray(th, float)
    if np.any(r <= 2 * m):
        raise ChartError("Schwarzschild chart requires r > 2m")
    if np.any(th <= 0) or np.any(th >= np.pi):
        raise ChartError("Schwarzschild chart requires 0 < theta < pi")


class _ConformalNorm:
    """Fibre function ``b = s(x) * F_0(x, y)`` built from a base norm."""

    def __init__(self, norm, scale):
        self.norm = as_spec(norm, kind="base")
        self.scale = scalar_field(scale)

    def __call__(self, x, y):
        return self.scale(x) * self.norm._impl.finsler(x, y)

    def to_json(self):
        return {"norm": self.norm.to_dict(), "scale": field_to_json(self.scale)}


def _parse_b(desc):
    if isinstance(desc, (OneForm, _ConformalNorm)):
        return desc
    if isinstance(desc, dict) and "one_form" in desc:
        return OneForm.parse(desc["one_form"])
    if isinstance(desc, dict) and "norm" in desc:
        return _ConformalNorm(desc["norm"], desc.get("scale", 1.0))
    if isinstance(desc, (list, tuple)):
        return OneForm.parse(desc)
    raise ConfigError(f"cannot interpret fibre function b = {desc!r}")


class _Stationary:
    """``L = -Lam tau^2 + 2 b tau + F^2``."""

    def __init__(self, params: Mapping, dimension: int | None):
        self.base = as_spec(params["base"], kind="base")
        self.lapse = scalar_field(params.get("lapse", 1.0))
        self.b = _parse_b(params.get("b", [0.0] * self.base.dimension))
        self.dimension = self.base.dimension + 1

    def to_params(self) -> dict:
        b = {"one_form": self.b.to_json()} if isinstance(self.b, OneForm) else self.b.to_json()
        return {"base": self.base.to_dict(), "lapse": field_to_json(self.lapse), "b": b}

    def check_chart(self, x):
        self.base._impl.check_chart(x[1:])

    def energy(self, x, y):
        xs, tau, v = x[1:], y[0], y[1:]
        lam = _positive_field(self.lapse, xs, "lapse")
        return -lam * tau * tau + 2 * self.b(xs, v) * tau + self.base._impl.energy(xs, v)

    def nonsmooth(self, x, y) -> bool:
        # smooth off the t-line; on it only if every fibre piece is quadratic
        quadratic = isinstance(self.b, OneForm) and isinstance(self.base._impl, _Riemannian)
        return not quadratic and bool(np.any(_is_zero(y[1:], np.abs(y[0]))))

    def splitting(self, x, v):
        xs = x[1:]
        return (
            np.asarray(self.lapse(xs), float),
            np.asarray(self.b(xs, v), float),
            np.asarray(self.base._impl.energy(xs, v), float),
        )


class _StandardStatic:
    """``L = -tau^2 + F^2``."""

    def __init__(self, params: Mapping, dimension: int | None):
        self.base = as_spec(params["base"], kind="base")
        self.dimension = self.base.dimension + 1

    def to_params(self) -> dict:
        return {"base": self.base.to_dict()}

    def check_chart(self, x):
        self.base._impl.check_chart(x[1:])

    def energy(self, x, y):
        return -y[0] * y[0] + self.base._impl.energy(x[1:], y[1:])

    def nonsmooth(self, x, y) -> bool:
        v = y[1:]
        if isinstance(self.base._impl, _Riemannian):
            return False
        return bool(np.any(_is_zero(v, np.abs(y[0]))))

    def splitting(self, x, v):
        return 1.0, np.zeros_like(np.asarray(v[0], float)), np.asarray(self.base._impl.energy(x[1:], v), float)


class _FOmegaStatic(_StandardStatic):
    """``L_w = -tau^2 + F_w^2``."""

    def __init__(self, params: Mapping, dimension: int | None):
        self.f_omega = MetricSpec("f_omega", None, dict(params))
        self.base = self.f_omega
        self.dimension = self.f_omega.dimension + 1

    def to_params(self) -> dict:
        return self.f_omega._impl.to_params()


class _Rutz:
    """Finsler perturbation of Schwarzschild with parameter ``eps``."""

    def __init__(self, params: Mapping, dimension: int | None):
        self.m = float(params.get("m", 1.0))
        self.eps = float(params.get("eps", 0.0))
        self.dimension = 4
        if self.m <= 0:
            raise ConfigError("rutz_schwarzschild mass must be positive")

    def to_params(self) -> dict:
        return {"m": self.m, "eps": self.eps}

    def check_chart(self, x):
        _check_schwarzschild_chart(x, self.m)

    def energy(self, x, y):
        r, th = x[1], x[2]
        tau, yr, yth, yph = y
        f = 1 - 2 * self.m / r
        s = jets.sin(th)
        q = yth * yth + s * s * yph * yph
        out = -f * tau * tau + yr * yr / f + r * r * q
        if self.eps != 0.0:
            out = out + self.eps * f * tau * jets.sqrt(q)
        return out

    def nonsmooth(self, x, y) -> bool:
        if self.eps == 0.0:
            return False
        return bool(np.any(_is_zero(np.asarray([y[2], y[3]], float), 1.0 + np.abs(y[0]) + np.abs(y[1]))))

    def splitting(self, x, v):
        r, th = np.asarray(x[1], float), np.asarray(x[2], float)
        f = 1 - 2 * self.m / r
        q = v[1] ** 2 + np.sin(th) ** 2 * v[2] ** 2
        return f, 0.5 * self.eps * f * np.sqrt(q), v[0] ** 2 / f + r**2 * q


_FAMILIES: dict[str, Callable] = {
    "lorentzian_quadratic": _LorentzianQuadratic,
    "riemannian_base": _Riemannian,
    "randers_base": _Randers,
    "stationary_splitting": _Stationary,
    "standard_static_product": _StandardStatic,
    "f_omega_static": _FOmegaStatic,
    "rutz_schwarzschild": _Rutz,
    "f_omega": _FOmega,
    "g_plus_beta": _GPlusBeta,
}


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """Immutable description of a metric family instance.

    ``params`` holds parsed field objects; ``to_dict`` gives the JSON form.
    A ``custom`` family accepts ``params={"energy": callable, "kind": ...}``
    where the callable maps ``(x, y)`` sequences to the energy and must
    accept jets.
    """

    family: str
    dimension: int | None
    params: Mapping[str, Any] = field(default_factory=dict)
    warnings: tuple = ()
    _impl: Any = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.family == "custom":
            impl = _Custom(self.params, self.dimension)
        elif self.family in _FAMILIES:
            impl = _FAMILIES[self.family](self.params, self.dimension)
        else:
            raise ConfigError(f"unknown metric family {self.family!r}")
        if self.dimension is not None and self.dimension != impl.dimension:
            raise ConfigError(
                f"{self.family}: declared dimension {self.dimension} != implied {impl.dimension}"
            )
        lo = 2 if self.kind == "spacetime" else 1
        if not lo <= impl.dimension <= 4:
            raise ConfigError(f"dimension {impl.dimension} outside supported range [{lo}, 4]")
        object.__setattr__(self, "_impl", impl)
        object.__setattr__(self, "dimension", impl.dimension)

    # -- classification ---------------------------------------------------
    @property
    def kind(self) -> str:
        if self.family == "custom":
            return self.params.get("kind", "spacetime")
        return "base" if self.family in BASE_FAMILIES else "spacetime"

    @property
    def is_splitting(self) -> bool:
        return self.family in SPLITTING_FAMILIES

    @property
    def base(self) -> "MetricSpec | None":
        return getattr(self._impl, "base", None)

    # -- evaluation -------------------------------------------------------
    def energy(self, x, y):
        """``L(x, y)`` for spacetimes, ``F(x, y)**2`` for base metrics."""
        x, y = list(x), list(y)
        n = self.dimension
        if len(x) != n or len(y) != n:
            raise ValueError(f"expected {n} coordinates, got {len(x)} and {len(y)}")
        xv, yv = _values(x), _values(y)
        if xv is not None:
            self._impl.check_chart(xv)
            if _any_jet(x, y) and self._impl.nonsmooth(xv, yv):
                raise NonSmoothError(f"{self.family} is not differentiable at y = {yv}")
        return self._impl.energy(x, y)

    def eval_L(self, x, y):
        if self.kind != "spacetime":
            raise TypeError(f"{self.family} is a base metric; use eval_F")
        return self.energy(x, y)

    def eval_F(self, x, y):
        if self.kind != "base":
            raise TypeError(f"{self.family} is a spacetime metric; use eval_L")
        x, y = list(x), list(y)
        xv, yv = _values(x), _values(y)
        if xv is not None:
            self._impl.check_chart(xv)
            if _any_jet(x, y) and self._impl.nonsmooth(xv, yv):
                raise NonSmoothError(f"{self.family} is not differentiable at y = {yv}")
        return self._impl.finsler(x, y)

    def nonsmooth(self, x, y) -> bool:
        return bool(self._impl.nonsmooth([np.asarray(c, float) for c in x], [np.asarray(c, float) for c in y]))

    def check_chart(self, x):
        self._impl.check_chart([np.asarray(c, float) for c in x])

    def splitting(self, x, v):
        """``(Lam, b, F^2)`` with ``L = -Lam tau^2 + 2 b tau + F^2`` at spatial vector ``v``."""
        if not hasattr(self._impl, "splitting"):
            raise TypeError(f"{self.family} is not a splitting family")
        x = [np.asarray(c, float) for c in x]
        v = [np.asarray(c, float) for c in v]
        self._impl.check_chart(x)
        return self._impl.splitting(x, v)

    def matrix(self, x) -> np.ndarray:
        """Coefficient matrix for quadratic families (Riemannian or Lorentzian)."""
        if not hasattr(self._impl, "matrix"):
            raise TypeError(f"{self.family} has no coefficient matrix")
        x = [np.asarray(c, float) for c in x]
        self._impl.check_chart(x)
        return np.array([[float(jets.value_of(c)) for c in row] for row in self._impl.matrix(x)])

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        return {"family": self.family, "dimension": self.dimension, "params": self._impl.to_params()}

    @classmethod
    def from_dict(cls, desc: Mapping) -> "MetricSpec":
        if not isinstance(desc, Mapping) or "family" not in desc:
            raise ConfigError("metric descriptor must be an object with a 'family' key")
        return cls(desc["family"], desc.get("dimension"), dict(desc.get("params", {})))


class _Custom:
    def __init__(self, params: Mapping, dimension: int | None):
        if dimension is None or not callable(params.get("energy")):
            raise ConfigError("custom metrics need a dimension and an 'energy' callable")
        self.dimension = dimension
        self.fn = params["energy"]
        self.is_nonsmooth = params.get("nonsmooth", lambda x, y: False)
        self.fin = params.get("finsler")

    def to_params(self):
        raise ConfigError("custom metrics are not JSON-serialisable")

    def check_chart(self, x):
        pass

    def energy(self, x, y):
        return self.fn(x, y)

    def finsler(self, x, y):
        return self.fin(x, y) if self.fin else jets.sqrt(self.fn(x, y))

    def nonsmooth(self, x, y):
        return bool(self.is_nonsmooth(x, y))


def as_spec(desc, kind: str | None = None) -> MetricSpec:
    spec = desc if isinstance(desc, MetricSpec) else MetricSpec.from_dict(desc)
    if kind is not None and spec.kind != kind:
        raise ConfigError(f"expected a {kind} metric, got {spec.family}")
    return spec


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def minkowski(dimension: int = 4) -> MetricSpec:
    return MetricSpec("lorentzian_quadratic", dimension, {"preset": "minkowski"})


def schwarzschild(m: float = 1.0) -> MetricSpec:
    return MetricSpec("lorentzian_quadratic", 4, {"preset": "schwarzschild", "m": m})


def lorentzian(matrix) -> MetricSpec:
    return MetricSpec("lorentzian_quadratic", None, {"matrix": matrix})


def euclidean(dimension: int = 2) -> MetricSpec:
    return MetricSpec("riemannian_base", dimension, {"preset": "euclidean"})


def round_sphere(radius: float = 1.0) -> MetricSpec:
    """Round 2-sphere in (theta, phi) coordinates."""
    return MetricSpec("riemannian_base", 2, {"preset": "sphere", "radius": radius})


def sphere_line(radius: float = 1.0) -> MetricSpec:
    """Product of a round 2-sphere (theta, phi) with a line (z)."""
    return MetricSpec("riemannian_base", 3, {"preset": "sphere_line", "radius": radius})


def riemannian(matrix) -> MetricSpec:
    return MetricSpec("riemannian_base", None, {"matrix": matrix})


def randers(alpha: MetricSpec, beta) -> MetricSpec:
    return MetricSpec("randers_base", None, {"alpha": alpha, "beta": OneForm.parse(beta)})


def stationary_splitting(base: MetricSpec, lapse=1.0, b=None) -> MetricSpec:
    if b is None:
        b = [0.0] * base.dimension
    return MetricSpec("stationary_splitting", None, {"base": base, "lapse": scalar_field(lapse), "b": _parse_b(b)})


def conformal_norm(norm: MetricSpec, scale=1.0):
    """Fibre function ``scale(x) * norm(x, y)`` for :func:`stationary_splitting`."""
    return _ConformalNorm(norm, scale)


def standard_static(base: MetricSpec) -> MetricSpec:
    return MetricSpec("standard_static_product", None, {"base": base})


def f_omega_static(base: MetricSpec, lapse=1.0, omega=None) -> MetricSpec:
    if omega is None:
        omega = [0.0] * base.dimension
    return MetricSpec(
        "f_omega_static", None, {"base": base, "lapse": scalar_field(lapse), "omega": OneForm.parse(omega)}
    )


def rutz_schwarzschild(m: float = 1.0, eps: float = 0.0) -> MetricSpec:
    return MetricSpec("rutz_schwarzschild", 4, {"m": m, "eps": eps})


def build_f_omega(lapse, omega, base: MetricSpec) -> MetricSpec:
    """Base metric ``F_w = w/Lam + sqrt(w^2/Lam^2 + F^2/Lam)``."""
    return MetricSpec(
        "f_omega", None, {"base": as_spec(base, "base"), "lapse": scalar_field(lapse), "omega": OneForm.parse(omega)}
    )


def g_plus_beta(base: MetricSpec, lapse=1.0, beta=None, warnings: tuple = ()) -> MetricSpec:
    if beta is None:
        beta = [0.0] * base.dimension
    return MetricSpec(
        "g_plus_beta",
        None,
        {"base": as_spec(base, "base"), "lapse": scalar_field(lapse), "beta": OneForm.parse(beta)},
        warnings=tuple(warnings),
    )


def conformal(base: MetricSpec, lapse) -> MetricSpec:
    """``F / sqrt(Lam)``, i.e. :func:`g_plus_beta` with ``beta = 0``."""
    return g_plus_beta(base, lapse, [Constant(0.0)] * base.dimension)
