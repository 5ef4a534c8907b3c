"""Truncated multivariate Taylor jets.

A :class:`Jet` carries every partial derivative of a (possibly tensor-valued)
quantity with respect to ``nvars`` variables, up to a fixed total order.
Coefficients are stored as *true derivatives*: the entry for multi-index
``alpha`` is ``d^|alpha| f / dz^alpha``, not the Taylor coefficient
``f_alpha / alpha!``.  Leibniz weights are folded into the product tables.

Monomials are graded by total degree, so truncating to a lower order is a
prefix slice of the coefficient axis and differentiating is a pure gather.

Jets may carry leading array dimensions: ``coeffs`` has shape
``shape + (M,)`` where ``M`` is the number of multi-indices of total degree
``<= order``.  All arithmetic broadcasts over ``shape``.
"""

from __future__ import annotations

import functools
import itertools
import math
import string
from typing import Sequence

import numpy as np

from .errors import JetDomainError

__all__ = [
    "Jet",
    "Basis",
    "basis",
    "lift",
    "lift_all",
    "constant",
    "stack",
    "einsum",
    "sqrt",
    "sin",
    "cos",
    "exp",
    "log",
    "power",
    "value_of",
    "is_jet",
]


class Basis:
    """Index tables for jets in ``nvars`` variables truncated at ``order``."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1:
            raise ValueError("nvars must be >= 1")
        if order < 0:
            raise ValueError("order must be >= 0")
        self.nvars = nvars
        self.order = order

        exps = [np.zeros(nvars, dtype=np.int64)]
        self.count = [1]  # count[d] = number of monomials of degree <= d
        for d in range(1, order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), d):
                e = np.zeros(nvars, dtype=np.int64)
                for v in combo:
                    e[v] += 1
                exps.append(e)
            self.count.append(len(exps))
        self.exps = np.array(exps, dtype=np.int64)
        self.size = len(exps)
        self.degrees = self.exps.sum(axis=1)

        radix = order + 1
        self._weights = radix ** np.arange(nvars, dtype=np.int64)
        keys = self.exps @ self._weights
        self._sorter = np.argsort(keys)
        self._sorted_keys = keys[self._sorter]

    def index(self, exps) -> np.ndarray:
        """Positions of the given exponent rows (which must all be present)."""
        exps = np.asarray(exps, dtype=np.int64)
        keys = exps @ self._weights
        pos = np.searchsorted(self._sorted_keys, keys)
        return self._sorter[pos]

    def index_of(self, multi_index: Sequence[int]) -> int:
        e = np.asarray(multi_index, dtype=np.int64)
        if e.shape != (self.nvars,) or np.any(e < 0):
            raise ValueError(f"multi-index must be {self.nvars} non-negative integers")
        if e.sum() > self.order:
            raise JetDomainError(
                f"derivative of total order {int(e.sum())} exceeds truncation order {self.order}"
            )
        return int(self.index(e[None, :])[0])

    @functools.cached_property
    def shifts(self) -> np.ndarray:
        """``shifts[v][k]`` is the position of ``exps[k] + e_v``, for degree(k) < order."""
        m = self.count[self.order - 1] if self.order >= 1 else 0
        out = np.empty((self.nvars, m), dtype=np.int64)
        for v in range(self.nvars):
            e = self.exps[:m].copy()
            e[:, v] += 1
            out[v] = self.index(e)
        return out

    @functools.cached_property
    def product_table(self):
        """Pairs (i, j) with deg i + deg j <= order, grouped by target index.

        Returns ``(left, right, weight, starts)`` such that the product of two
        jets is ``add.reduceat(a[left] * b[right] * weight, starts)``.
        """
        lefts, rights, targets = [], [], []
        for i in range(self.size):
            m = self.count[self.order - self.degrees[i]]
            js = np.arange(m)
            lefts.append(np.full(m, i, dtype=np.int64))
            rights.append(js)
            targets.append(self.index(self.exps[js] + self.exps[i]))
        left = np.concatenate(lefts)
        right = np.concatenate(rights)
        target = np.concatenate(targets)
        order = np.argsort(target, kind="stable")
        left, right, target = left[order], right[order], target[order]
        # Leibniz weight: prod_v binom(gamma_v, alpha_v)
        gamma = self.exps[target]
        alpha = self.exps[left]
        weight = np.ones(len(target))
        for v in range(self.nvars):
            weight *= _binom_table(self.order)[gamma[:, v], alpha[:, v]]
        starts = np.searchsorted(target, np.arange(self.size))
        return left, right, weight, starts


@functools.lru_cache(maxsize=None)
def _binom_table(n: int) -> np.ndarray:
    t = np.zeros((n + 1, n + 1))
    for a in range(n + 1):
        for b in range(a + 1):
            t[a, b] = math.comb(a, b)
    return t


@functools.lru_cache(maxsize=None)
def basis(nvars: int, order: int) -> Basis:
    return Basis(nvars, order)


class Jet:
    """Jet of a scalar (or array of scalars) in ``nvars`` variables.

    Instances are treated as immutable; every operation returns a new jet.
    """

    __slots__ = ("coeffs", "nvars", "order")
    __array_priority__ = 1000

    def __init__(self, coeffs, nvars: int, order: int):
        coeffs = np.asarray(coeffs, dtype=float)
        size = basis(nvars, order).size
        if coeffs.shape[-1:] != (size,):
            raise ValueError(f"expected trailing axis of length {size}, got {coeffs.shape}")
        self.coeffs = coeffs
        self.nvars = nvars
        self.order = order

    # -- inspection -------------------------------------------------------
    @property
    def basis(self) -> Basis:
        return basis(self.nvars, self.order)

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def value(self) -> np.ndarray | float:
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v

    base_value = value

    def extract(self, multi_index: Sequence[int]):
        """Partial derivative for an exponent vector over all variables."""
        v = self.coeffs[..., self.basis.index_of(multi_index)]
        return float(v) if v.ndim == 0 else v

    def partial(self, *slots: int):
        """Partial derivative by listing variable slots, e.g. ``partial(0, 0, 5)``."""
        e = [0] * self.nvars
        for s in slots:
            if not 0 <= s < self.nvars:
                raise IndexError(f"variable slot {s} out of range")
            e[s] += 1
        return self.extract(e)

    def coefficients(self) -> dict:
        """Non-zero derivatives keyed by exponent tuple (scalar jets only)."""
        if self.shape:
            raise ValueError("coefficients() is defined for scalar jets")
        return {
            tuple(int(k) for k in e): float(c)
            for e, c in zip(self.basis.exps, self.coeffs)
            if c != 0.0
        }

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, nvars={self.nvars}, order={self.order}, value={self.value!r})"

    # -- structural -------------------------------------------------------
    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise JetDomainError("cannot raise the truncation order of a jet")
        m = basis(self.nvars, order).size
        return Jet(self.coeffs[..., :m], self.nvars, order)

    def diff(self, var: int) -> "Jet":
        """Derivative with respect to variable ``var``; order drops by one."""
        if self.order < 1:
            raise JetDomainError("cannot differentiate an order-0 jet")
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable slot {var} out of range")
        return Jet(self.coeffs[..., self.basis.shifts[var]], self.nvars, self.order - 1)

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.coeffs[idx + (slice(None),)], self.nvars, self.order)

    def transpose(self, *axes) -> "Jet":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Jet(self.coeffs.transpose(*axes, self.ndim), self.nvars, self.order)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def _nilpotent(self) -> "Jet":
        c = self.coeffs.copy()
        c[..., 0] = 0.0
        return Jet(c, self.nvars, self.order)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable sets")
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is not None:
            return Jet(a.coeffs + b.coeffs, a.nvars, a.order)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.shape, other.shape)
        c = np.array(np.broadcast_to(self.coeffs, shape + self.coeffs.shape[-1:]))
        c[..., 0] += other
        return Jet(c, self.nvars, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.nvars, self.order)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is not None:
            return Jet(_mul(a.coeffs, b.coeffs, a.basis), a.nvars, a.order)
        other = np.asarray(other, dtype=float)
        return Jet(self.coeffs * other[..., None], self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise JetDomainError("division by zero")
        return Jet(self.coeffs / other[..., None], self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        return power(self, p)

    def __rpow__(self, base):
        return exp(self * np.log(base))

    def reciprocal(self) -> "Jet":
        v = self.coeffs[..., 0]
        if np.any(v == 0):
            raise JetDomainError("reciprocal of a jet with zero base value")
        derivs = [(-1.0) ** k * math.factorial(k) * v ** (-k - 1) for k in range(self.order + 1)]
        return _compose(self, derivs)

    # comparisons act on base values so evaluators can branch on them
    def __lt__(self, other):
        return self.value < value_of(other)

    def __le__(self, other):
        return self.value <= value_of(other)

    def __gt__(self, other):
        return self.value > value_of(other)

    def __ge__(self, other):
        return self.value >= value_of(other)


def _mul(a: np.ndarray, b: np.ndarray, bas: Basis) -> np.ndarray:
    left, right, weight, starts = bas.product_table
    terms = a[..., left] * b[..., right]
    terms *= weight
    return np.add.reduceat(terms, starts, axis=-1)


def _compose(a: Jet, derivs) -> Jet:
    """Evaluate ``f(a)`` from ``derivs[k] = f^(k)(a.value)`` via Horner in ``a - a0``."""
    h = a._nilpotent()
    out = None
    for k in range(a.order, -1, -1):
        ck = np.asarray(derivs[k], dtype=float) / math.factorial(k)
        out = constant(ck, a.nvars, a.order) if out is None else h * out + ck
    return out


# -- construction ----------------------------------------------------------

def constant(value, nvars: int, order: int) -> Jet:
    value = np.asarray(value, dtype=float)
    c = np.zeros(value.shape + (basis(nvars, order).size,))
    c[..., 0] = value
    return Jet(c, nvars, order)


def lift(point, variable_index: int, order: int = 4) -> Jet:
    """Identity jet of coordinate ``variable_index`` at ``point``.

    ``point`` is the full coordinate vector (x-slots then y-slots).  A 2-D
    ``point`` of shape ``(batch, nvars)`` produces a batched jet.
    """
    point = np.asarray(point, dtype=float)
    nvars = point.shape[-1]
    if order < 1:
        raise ValueError("truncation order must be >= 1")
    if not 0 <= variable_index < nvars:
        raise IndexError(f"variable index {variable_index} out of range for {nvars} variables")
    c = np.zeros(point.shape[:-1] + (basis(nvars, order).size,))
    c[..., 0] = point[..., variable_index]
    c[..., 1 + variable_index] = 1.0  # degree-1 monomials follow the constant in slot order
    return Jet(c, nvars, order)


def lift_all(point, order: int = 4) -> list[Jet]:
    point = np.asarray(point, dtype=float)
    return [lift(point, i, order) for i in range(point.shape[-1])]


def stack(items: Sequence, axis: int = 0) -> Jet:
    jets = [j for j in items if isinstance(j, Jet)]
    if not jets:
        raise ValueError("stack needs at least one jet")
    nvars = jets[0].nvars
    k = min(j.order for j in jets)
    parts = []
    for j in items:
        if not isinstance(j, Jet):
            j = constant(j, nvars, k)
        parts.append(j.truncate(k).coeffs)
    if axis < 0:
        axis -= 1
    return Jet(np.stack(parts, axis=axis), nvars, k)


_SPARE = [c for c in string.ascii_letters]


def einsum(subscripts: str, *operands):
    """``numpy.einsum`` over the tensor axes of jets and plain arrays."""
    if "->" not in subscripts:
        raise ValueError("explicit output subscripts are required")
    inputs, output = subscripts.replace(" ", "").split("->")
    inputs = inputs.split(",")
    if len(inputs) != len(operands):
        raise ValueError("operand count does not match subscripts")
    used = set(subscripts)
    p = next(c for c in _SPARE if c not in used)

    acc, acc_sub = operands[0], inputs[0]
    if len(operands) == 1:
        if isinstance(acc, Jet):
            return Jet(np.einsum(f"{acc_sub}{p}->{output}{p}", acc.coeffs), acc.nvars, acc.order)
        return np.einsum(subscripts, acc)
    for k in range(1, len(operands)):
        last = k == len(operands) - 1
        nxt, nxt_sub = operands[k], inputs[k]
        if last:
            out_sub = output
        else:
            rest = "".join(inputs[k + 1:]) + output
            ell = "..." in acc_sub or "..." in nxt_sub
            letters = [c for c in dict.fromkeys((acc_sub + nxt_sub).replace(".", "")) if c in rest]
            out_sub = ("..." if ell else "") + "".join(letters)
        acc = _einsum2(acc_sub, acc, nxt_sub, nxt, out_sub, p)
        acc_sub = out_sub
    return acc


def _einsum2(sa, a, sb, b, so, p):
    ja, jb = isinstance(a, Jet), isinstance(b, Jet)
    if ja and jb:
        a, b = a._coerce(b)
        left, right, weight, starts = a.basis.product_table
        terms = np.einsum(f"{sa}{p},{sb}{p}->{so}{p}", a.coeffs[..., left], b.coeffs[..., right])
        terms *= weight
        return Jet(np.add.reduceat(terms, starts, axis=-1), a.nvars, a.order)
    if ja:
        return Jet(np.einsum(f"{sa}{p},{sb}->{so}{p}", a.coeffs, np.asarray(b, float)), a.nvars, a.order)
    if jb:
        return Jet(np.einsum(f"{sa},{sb}{p}->{so}{p}", np.asarray(a, float), b.coeffs), b.nvars, b.order)
    return np.einsum(f"{sa},{sb}->{so}", a, b)


# -- elementary functions (dispatch on jets, numbers and arrays) -----------

def is_jet(v) -> bool:
    return isinstance(v, Jet)


def value_of(v):
    """Base value of a jet, or the number itself."""
    if isinstance(v, Jet):
        return v.value
    if _is_symbolic(v):
        raise TypeError("symbolic expressions have no numeric value")
    return v


def _is_symbolic(v) -> bool:
    return type(v).__module__.startswith("sympy")


def sqrt(a):
    if isinstance(a, Jet):
        v = a.coeffs[..., 0]
        if np.any(v <= 0):
            raise JetDomainError("sqrt of a jet requires a positive base value")
        return power(a, 0.5)
    if _is_symbolic(a):
        import sympy

        return sympy.sqrt(a)
    return np.sqrt(a)


def sin(a):
    if isinstance(a, Jet):
        v = a.coeffs[..., 0]
        s, c = np.sin(v), np.cos(v)
        cycle = [s, c, -s, -c]
        return _compose(a, [cycle[k % 4] for k in range(a.order + 1)])
    if _is_symbolic(a):
        import sympy

        return sympy.sin(a)
    return np.sin(a)


def cos(a):
    if isinstance(a, Jet):
        v = a.coeffs[..., 0]
        s, c = np.sin(v), np.cos(v)
        cycle = [c, -s, -c, s]
        return _compose(a, [cycle[k % 4] for k in range(a.order + 1)])
    if _is_symbolic(a):
        import sympy

        return sympy.cos(a)
    return np.cos(a)


def exp(a):
    if isinstance(a, Jet):
        e = np.exp(a.coeffs[..., 0])
        return _compose(a, [e] * (a.order + 1))
    if _is_symbolic(a):
        import sympy

        return sympy.exp(a)
    return np.exp(a)


def log(a):
    if isinstance(a, Jet):
        v = a.coeffs[..., 0]
        if np.any(v <= 0):
            raise JetDomainError("log of a jet requires a positive base value")
        derivs = [np.log(v)] + [
            (-1.0) ** (k - 1) * math.factorial(k - 1) * v ** (-k) for k in range(1, a.order + 1)
        ]
        return _compose(a, derivs)
    if _is_symbolic(a):
        import sympy

        return sympy.log(a)
    return np.log(a)


def power(a, p):
    """``a ** p``; non-negative integer exponents use repeated products."""
    if not isinstance(a, Jet):
        return a**p
    if float(p).is_integer() and p >= 0:
        p = int(p)
        out = constant(np.ones(a.shape), a.nvars, a.order)
        base = a
        while p:  # square-and-multiply
            if p & 1:
                out = out * base
            p >>= 1
            if p:
                base = base * base
        return out
    v = a.coeffs[..., 0]
    if np.any(v <= 0):
        raise JetDomainError("non-integer power of a jet requires a positive base value")
    derivs = []
    coef = 1.0
    for k in range(a.order + 1):
        derivs.append(coef * v ** (p - k))
        coef *= p - k
    return _compose(a, derivs)
