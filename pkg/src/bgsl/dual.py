"""Forward-mode dual numbers over numpy arrays.

A :class:`Dual` pairs a value array of shape ``s`` with a tangent array of
shape ``s + (width,)``.  Arithmetic with plain numbers or arrays treats them as
constants.  The free functions (:func:`sqrt`, :func:`relu`, ...) accept either
plain arrays or duals so the same model code yields values or derivatives.
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit


class Dual:
    __slots__ = ("value", "tangent")
    # make numpy defer to the reflected dual operators
    __array_ufunc__ = None

    def __init__(self, value, tangent):
        self.value = np.asarray(value, dtype=float)
        self.tangent = np.asarray(tangent, dtype=float)
        if self.tangent.shape[:-1] != self.value.shape:
            raise ValueError(
                f"tangent shape {self.tangent.shape} does not extend value shape {self.value.shape}"
            )

    @classmethod
    def variable(cls, value, slot: int, width: int = 3) -> "Dual":
        """Seed a scalar input: unit tangent in ``slot``."""
        t = np.zeros(width)
        t[slot] = 1.0
        return cls(value, t)

    @classmethod
    def constant(cls, value, width: int = 3) -> "Dual":
        value = np.asarray(value, dtype=float)
        return cls(value, np.zeros(value.shape + (width,)))

    @property
    def width(self) -> int:
        return self.tangent.shape[-1]

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Dual(value={self.value!r}, tangent={self.tangent!r})"

    def __getitem__(self, idx):
        return Dual(self.value[idx], self.tangent[idx])

    def sum(self, axis=None):
        if axis is None:
            flat = self.tangent.reshape(-1, self.width)
            return Dual(self.value.sum(), flat.sum(axis=0))
        axis = axis % self.value.ndim
        return Dual(self.value.sum(axis=axis), self.tangent.sum(axis=axis))

    # broadcasting a plain value's shape into the tangent needs a trailing axis
    def _lift(self, other):
        if isinstance(other, Dual):
            return other
        return Dual.constant(other, self.width)

    def __add__(self, other):
        o = self._lift(other)
        return Dual(self.value + o.value, self.tangent + o.tangent)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Dual(self.value - o.value, self.tangent - o.tangent)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Dual(-self.value, -self.tangent)

    def __mul__(self, other):
        o = self._lift(other)
        return Dual(
            self.value * o.value,
            self.tangent * o.value[..., None] + o.tangent * self.value[..., None],
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        v = self.value / o.value
        return Dual(v, (self.tangent - o.tangent * v[..., None]) / o.value[..., None])

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k):
        if isinstance(k, Dual):
            raise TypeError("only constant exponents are supported")
        return Dual(self.value**k, (k * self.value ** (k - 1))[..., None] * self.tangent)


def _chain(x: Dual, value, deriv) -> Dual:
    return Dual(value, np.asarray(deriv)[..., None] * x.tangent)


def value_of(x):
    return x.value if isinstance(x, Dual) else np.asarray(x, dtype=float)


def sqrt(x):
    if isinstance(x, Dual):
        r = np.sqrt(x.value)
        return _chain(x, r, 0.5 / r)
    return np.sqrt(x)


def exp(x):
    if isinstance(x, Dual):
        v = np.exp(x.value)
        return _chain(x, v, v)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        return _chain(x, np.log(x.value), 1.0 / x.value)
    return np.log(x)


def relu(x):
    """``max(0, x)``; the tangent at exactly 0 is taken as 0."""
    if isinstance(x, Dual):
        on = x.value > 0
        return _chain(x, np.where(on, x.value, 0.0), on.astype(float))
    return np.maximum(0.0, x)


def sigmoid(x):
    if isinstance(x, Dual):
        s = expit(x.value)
        return _chain(x, s, s * (1 - s))
    return expit(x)


def softplus(x):
    """``log(1 + exp(x))`` without overflow."""
    if isinstance(x, Dual):
        return _chain(x, np.logaddexp(0.0, x.value), expit(x.value))
    return np.logaddexp(0.0, x)


def linear(f, x):
    """Apply a linear map ``f`` that acts on the last axis."""
    if isinstance(x, Dual):
        t = np.moveaxis(x.tangent, -1, 0)
        return Dual(f(x.value), np.moveaxis(f(t), 0, -1))
    return f(x)


def derivative(f, x0: float) -> float:
    """Derivative of a scalar function at ``x0`` by one dual evaluation."""
    return float(f(Dual.variable(x0, 0, width=1)).tangent[0])
