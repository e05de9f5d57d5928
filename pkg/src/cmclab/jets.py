"""Truncated bivariate Taylor jets.

A :class:`Jet` carries every partial derivative of a scalar function of the
two surface parameters ``(x, y)`` up to a fixed total order ``k`` at a base
point.  Coefficients are stored Taylor-normalised, ``c[i, j] = d^{i+j} f /
(dx^i dy^j) / (i! j!)``, in an array of shape ``(k + 1, k + 1, *batch)`` whose
entries with ``i + j > k`` are zero.  The trailing batch axes let one jet
describe a whole grid of base points at once.
"""

from __future__ import annotations

from math import factorial

import numpy as np


class JetDomainError(ValueError):
    """An elementary function was applied outside its natural domain."""


def n_coefficients(order: int) -> int:
    return (order + 1) * (order + 2) // 2


def total_degree_indices(order: int) -> list[tuple[int, int]]:
    """Multi-indices ``(i, j)`` with ``i + j <= order`` in total-degree order."""
    return [(d - j, j) for d in range(order + 1) for j in range(d + 1)]


def _mask(order: int) -> np.ndarray:
    i, j = np.indices((order + 1, order + 1))
    return (i + j) <= order


class Jet:
    __slots__ = ("c", "order")

    __array_priority__ = 1000  # keep numpy from broadcasting over a Jet

    def __init__(self, coeffs, order: int):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[:2] != (order + 1, order + 1):
            raise ValueError(f"coefficient block must start with ({order + 1}, {order + 1})")
        self.c = coeffs
        self.order = order

    @property
    def coeffs(self) -> np.ndarray:
        """Taylor coefficients, ``coeffs[i, j] = d^i_x d^j_y f / (i! j!)``."""
        return self.c

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, order: int) -> Jet:
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1, order + 1) + value.shape)
        c[0, 0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, axis: int, order: int) -> Jet:
        """The coordinate function ``x`` (axis 0) or ``y`` (axis 1) at ``value``."""
        jet = cls.constant(value, order)
        if order >= 1:
            if axis == 0:
                jet.c[1, 0] = 1.0
            else:
                jet.c[0, 1] = 1.0
        return jet

    @classmethod
    def from_derivatives(cls, derivs, order: int) -> Jet:
        """Build a jet from raw partials listed in total-degree order."""
        derivs = [np.asarray(d, dtype=float) for d in derivs]
        if len(derivs) != n_coefficients(order):
            raise ValueError("wrong number of derivatives for this order")
        batch = np.broadcast_shapes(*(d.shape for d in derivs))
        c = np.zeros((order + 1, order + 1) + batch)
        for (i, j), d in zip(total_degree_indices(order), derivs):
            c[i, j] = d / (factorial(i) * factorial(j))
        return cls(c, order)

    # -- access -------------------------------------------------------------

    @property
    def value(self) -> np.ndarray:
        return self.c[0, 0]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.c.shape[2:]

    def derivative(self, i: int, j: int) -> np.ndarray:
        """Raw partial derivative ``d^{i+j} f / dx^i dy^j`` at the base point."""
        if i + j > self.order:
            raise ValueError(f"derivative ({i}, {j}) exceeds jet order {self.order}")
        return self.c[i, j] * (factorial(i) * factorial(j))

    def derivatives(self) -> np.ndarray:
        """All raw partials, length ``(k+1)(k+2)/2``, in total-degree order."""
        return np.stack([self.derivative(i, j) for i, j in total_degree_indices(self.order)])

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        if order == self.order:
            return self
        c = self.c[: order + 1, : order + 1].copy()
        c *= _mask(order).reshape(_mask(order).shape + (1,) * len(self.batch_shape))
        return Jet(c, order)

    def diff(self, axis: int) -> Jet:
        """Partial derivative as a jet of one lower order."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        k = self.order - 1
        c = np.zeros((k + 1, k + 1) + self.batch_shape)
        for i in range(k + 1):
            for j in range(k + 1 - i):
                if axis == 0:
                    c[i, j] = (i + 1) * self.c[i + 1, j]
                else:
                    c[i, j] = (j + 1) * self.c[i, j + 1]
        return Jet(c, k)

    def integrate_x(self, const=0.0) -> Jet:
        """Antiderivative in ``x`` (same order, top coefficients dropped)."""
        c = np.zeros_like(self.c)
        for i in range(self.order):
            c[i + 1] = self.c[i] / (i + 1)
        c[0, 0] = const
        c *= _mask(self.order).reshape(_mask(self.order).shape + (1,) * len(self.batch_shape))
        return Jet(c, self.order)

    def compose(self, inner: Jet) -> Jet:
        """Treat ``self`` as a function of ``x`` alone and evaluate it at ``inner``.

        ``self`` must be expanded about ``inner.value``.
        """
        k = min(self.order, inner.order)
        inner = inner.truncate(k)
        return _series(inner, [self.c[n, 0] for n in range(k + 1)])

    def __repr__(self):
        return f"Jet(order={self.order}, value={self.value!r})"

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if not isinstance(other, Jet):
            other = Jet.constant(other, self.order)
        k = min(self.order, other.order)
        a, b = self.truncate(k), other.truncate(k)
        ca, cb = _align(a.c, b.c)
        return Jet(ca, k), Jet(cb, k)

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __pos__(self):
        return self

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.c + b.c, a.order)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.c - b.c, a.order)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(b.c - a.c, a.order)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            ca, cb = _align(self.c, _lead(other))
            return Jet(ca * cb, self.order)
        a, b = self._coerce(other)
        return Jet(_cauchy(a.c, b.c, a.order), a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise JetDomainError("division by zero")
            ca, cb = _align(self.c, _lead(other))
            return Jet(ca / cb, self.order)
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)):
            n = int(exponent)
            if n < 0:
                return reciprocal(self) ** (-n)
            result = Jet.constant(np.ones(self.batch_shape), self.order)
            base = self
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        return power(self, float(exponent))


def _align(ca, cb):
    """Pad batch ranks so trailing batch axes broadcast against each other."""
    na, nb = ca.ndim, cb.ndim
    if na < nb:
        ca = ca.reshape(ca.shape[:2] + (1,) * (nb - na) + ca.shape[2:])
    elif nb < na:
        cb = cb.reshape(cb.shape[:2] + (1,) * (na - nb) + cb.shape[2:])
    return ca, cb


def _lead(a):
    a = np.asarray(a, dtype=float)
    return a.reshape((1, 1) + a.shape)


def _cauchy(a, b, k):
    a, b = _align(a, b)
    shape = (k + 1, k + 1) + np.broadcast_shapes(a.shape[2:], b.shape[2:])
    out = np.zeros(shape)
    for p in range(k + 1):
        for q in range(k + 1 - p):
            out[p:, q:] += a[p, q] * b[: k + 1 - p, : k + 1 - q]
    out *= _mask(k).reshape(_mask(k).shape + (1,) * (out.ndim - 2))
    return out


def _series(g: Jet, coeffs) -> Jet:
    """Evaluate ``sum_n coeffs[n] * (g - g0)^n`` by Horner's rule."""
    k = g.order
    delta = Jet(g.c.copy(), k)
    delta.c[0, 0] = 0.0
    result = Jet.constant(coeffs[k], k)
    for n in range(k - 1, -1, -1):
        result = result * delta + coeffs[n]
    return result


# -- elementary functions -------------------------------------------------
#
# Each accepts a Jet, a float, or an ndarray.  For jets the univariate Taylor
# coefficients of the function at the base value are composed with the jet.


def _lift(fn_scalar, coeff_fn):
    def f(a):
        if not isinstance(a, Jet):
            return fn_scalar(np.asarray(a, dtype=float))
        return _series(a, coeff_fn(a.value, a.order))

    return f


def _exp_coeffs(x0, k):
    e = np.exp(x0)
    return [e / factorial(n) for n in range(k + 1)]


def _sin_coeffs(x0, k):
    s, c = np.sin(x0), np.cos(x0)
    cycle = [s, c, -s, -c]
    return [cycle[n % 4] / factorial(n) for n in range(k + 1)]


def _cos_coeffs(x0, k):
    s, c = np.sin(x0), np.cos(x0)
    cycle = [c, -s, -c, s]
    return [cycle[n % 4] / factorial(n) for n in range(k + 1)]


def _sinh_coeffs(x0, k):
    s, c = np.sinh(x0), np.cosh(x0)
    return [(s if n % 2 == 0 else c) / factorial(n) for n in range(k + 1)]


def _cosh_coeffs(x0, k):
    s, c = np.sinh(x0), np.cosh(x0)
    return [(c if n % 2 == 0 else s) / factorial(n) for n in range(k + 1)]


def _log_coeffs(x0, k):
    if np.any(x0 <= 0):
        raise JetDomainError("log of a non-positive value")
    out = [np.log(x0)]
    for n in range(1, k + 1):
        out.append((-1) ** (n + 1) / (n * x0**n))
    return out


def _binomial_coeffs(x0, k, e):
    # (x0 + s)^e = x0^e * sum_n binom(e, n) (s/x0)^n
    base = x0**e
    out, b = [], 1.0
    for n in range(k + 1):
        out.append(b * base / x0**n)
        b = b * (e - n) / (n + 1)
    return out


def _sqrt_coeffs(x0, k):
    if np.any(x0 <= 0):
        raise JetDomainError("sqrt of a non-positive value")
    return _binomial_coeffs(x0, k, 0.5)


def _recip_coeffs(x0, k):
    if np.any(x0 == 0):
        raise JetDomainError("division by zero")
    return [(-1) ** n / x0 ** (n + 1) for n in range(k + 1)]


def _atan_coeffs(x0, k):
    # atan' = 1 / (1 + x^2); expand 1 / (q0 + 2 x0 s + s^2) by recursion
    q0 = 1.0 + x0 * x0
    b = [1.0 / q0]
    for m in range(1, k):
        prev2 = b[m - 2] if m >= 2 else 0.0
        b.append(-(2.0 * x0 * b[m - 1] + prev2) / q0)
    return [np.arctan(x0)] + [b[n - 1] / n for n in range(1, k + 1)]


def _checked(fn, test, msg):
    def g(x):
        if np.any(test(x)):
            raise JetDomainError(msg)
        return fn(x)

    return g


exp = _lift(np.exp, _exp_coeffs)
sin = _lift(np.sin, _sin_coeffs)
cos = _lift(np.cos, _cos_coeffs)
sinh = _lift(np.sinh, _sinh_coeffs)
cosh = _lift(np.cosh, _cosh_coeffs)
atan = _lift(np.arctan, _atan_coeffs)
log = _lift(_checked(np.log, lambda x: x <= 0, "log of a non-positive value"), _log_coeffs)
sqrt = _lift(_checked(np.sqrt, lambda x: x <= 0, "sqrt of a non-positive value"), _sqrt_coeffs)


def reciprocal(a):
    if not isinstance(a, Jet):
        a = np.asarray(a, dtype=float)
        if np.any(a == 0):
            raise JetDomainError("division by zero")
        return 1.0 / a
    return _series(a, _recip_coeffs(a.value, a.order))


def tan(a):
    return sin(a) / cos(a)


def tanh(a):
    return sinh(a) / cosh(a)


def cot(a):
    return cos(a) / sin(a)


def coth(a):
    return cosh(a) / sinh(a)


def power(a, e: float):
    """``a ** e`` for real ``e``; requires a positive base."""
    if not isinstance(a, Jet):
        a = np.asarray(a, dtype=float)
        if np.any(a <= 0):
            raise JetDomainError("non-integer power of a non-positive value")
        return a**e
    if np.any(a.value <= 0):
        raise JetDomainError("non-integer power of a non-positive value")
    return _series(a, _binomial_coeffs(a.value, a.order, e))


def value_of(a):
    """Base value of a jet, or the argument itself for plain numbers."""
    return a.value if isinstance(a, Jet) else np.asarray(a, dtype=float)
