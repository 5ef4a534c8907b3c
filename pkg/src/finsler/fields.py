"""Scalar fields, one-forms and vector fields on a coordinate chart.

Fields are evaluated on coordinate tuples whose entries may be floats,
numpy arrays or jets, so their derivatives come for free.  The JSON form is
either a number (constant) or ``{"poly": [[coef, [e0, e1, ...]], ...]}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, x):
        return self.value

    def to_json(self):
        return self.value


@dataclass(frozen=True)
class Poly:
    """Polynomial ``sum_k c_k prod_i x_i^{e_ki}`` in the chart coordinates."""

    terms: tuple  # ((coef, (e0, e1, ...)), ...)

    def __call__(self, x):
        total = 0.0
        for coef, exps in self.terms:
            term = coef
            for xi, e in zip(x, exps):
                if e:
                    term = term * xi**e
            total = total + term
        return total

    def to_json(self):
        return {"poly": [[c, list(e)] for c, e in self.terms]}


def poly(*terms) -> Poly:
    """``poly((0.2, (0, 2)), ...)`` builds ``0.2 * x1**2 + ...``."""
    return Poly(tuple((float(c), tuple(int(k) for k in e)) for c, e in terms))


def scalar_field(desc) -> Callable:
    """Parse a scalar-field descriptor; callables pass through (plugin hook)."""
    if isinstance(desc, (Constant, Poly)) or callable(desc):
        return desc
    if isinstance(desc, (int, float)):
        return Constant(float(desc))
    if isinstance(desc, dict) and "poly" in desc:
        try:
            return Poly(tuple((float(c), tuple(int(k) for k in e)) for c, e in desc["poly"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed polynomial {desc!r}") from exc
    raise ConfigError(f"cannot interpret scalar field {desc!r}")


def field_to_json(f):
    if hasattr(f, "to_json"):
        return f.to_json()
    raise ConfigError(f"field {f!r} is not JSON-serialisable")


@dataclass(frozen=True)
class OneForm:
    """Covector field ``omega_i(x) dx^i``."""

    components: tuple

    @classmethod
    def parse(cls, desc) -> "OneForm":
        if isinstance(desc, OneForm):
            return desc
        return cls(tuple(scalar_field(c) for c in desc))

    @property
    def dimension(self) -> int:
        return len(self.components)

    def covector(self, x) -> list:
        return [c(x) for c in self.components]

    def __call__(self, x, y):
        total = 0.0
        for c, yi in zip(self.components, y):
            w = c(x)
            if isinstance(w, (int, float)) and w == 0.0:
                continue
            total = total + w * yi
        return total

    def to_json(self):
        return [field_to_json(c) for c in self.components]


def zero_form(dimension: int) -> OneForm:
    return OneForm(tuple(Constant(0.0) for _ in range(dimension)))


@dataclass(frozen=True)
class VectorField:
    """Vector field ``K^h(x) d/dx^h``."""

    components: tuple
    name: str = ""

    @classmethod
    def parse(cls, desc) -> "VectorField":
        if isinstance(desc, VectorField):
            return desc
        if isinstance(desc, dict) and "builtin" in desc:
            kind = desc["builtin"]
            dim = int(desc["dimension"])
            if kind == "coordinate":
                return coordinate_field(int(desc["index"]), dim)
            if kind == "rotation":
                i, j = desc.get("plane", (0, 1))
                return rotation_field(int(i), int(j), dim)
            if kind == "dilation":
                axes = desc.get("axes")
                return dilation_field(dim, axes)
            raise ConfigError(f"unknown built-in vector field {kind!r}")
        if isinstance(desc, dict) and "components" in desc:
            desc = desc["components"]
        return cls(tuple(scalar_field(c) for c in desc))

    @property
    def dimension(self) -> int:
        return len(self.components)

    def __call__(self, x) -> list:
        return [c(x) for c in self.components]

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(_SumField(a, b) for a, b in zip(self.components, other.components)))

    def scaled(self, a: float) -> "VectorField":
        return VectorField(tuple(_ScaledField(c, a) for c in self.components))


@dataclass(frozen=True)
class _SumField:
    a: Callable
    b: Callable

    def __call__(self, x):
        return self.a(x) + self.b(x)


@dataclass(frozen=True)
class _ScaledField:
    f: Callable
    a: float

    def __call__(self, x):
        return self.a * self.f(x)


def _unit(dim: int, k: int) -> tuple:
    return tuple(1 if i == k else 0 for i in range(dim))


def coordinate_field(index: int, dimension: int) -> VectorField:
    comps = [Constant(1.0 if h == index else 0.0) for h in range(dimension)]
    return VectorField(tuple(comps), name=f"d/dx{index}")


def rotation_field(i: int, j: int, dimension: int) -> VectorField:
    """``-x^j d/dx^i + x^i d/dx^j``."""
    comps: list = [Constant(0.0)] * dimension
    comps[i] = poly((-1.0, _unit(dimension, j)))
    comps[j] = poly((1.0, _unit(dimension, i)))
    return VectorField(tuple(comps), name=f"rot{i}{j}")


def dilation_field(dimension: int, axes: Sequence[int] | None = None) -> VectorField:
    """``sum_{i in axes} x^i d/dx^i`` (all axes by default)."""
    axes = range(dimension) if axes is None else axes
    comps: list = [Constant(0.0)] * dimension
    for i in axes:
        comps[i] = poly((1.0, _unit(dimension, i)))
    return VectorField(tuple(comps), name="dilation")


def as_array(values) -> np.ndarray:
    return np.asarray(values, dtype=float)
