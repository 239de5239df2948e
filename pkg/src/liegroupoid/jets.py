"""Truncated multivariate Taylor arithmetic (forward-mode jets, order <= 3).

A :class:`Jet` carries one coefficient per multi-index ``alpha`` with
``|alpha| <= order`` over ``directions`` independent perturbations.  The
stored coefficient is the partial derivative ``d^alpha f`` at the base point,
i.e. ``alpha!`` times the Taylor coefficient, so reading derivatives off a jet
needs no rescaling.

Storage is dense over the whole multi-index simplex, graded by total degree.
The order-``k`` index list is a prefix of the order-``k+1`` list, which is what
makes truncation consistent bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DomainError, SpecMismatchError

MAX_ORDER = 3
_REAL = (int, float, np.integer, np.floating)


@dataclass(frozen=True)
class JetSpec:
    directions: int
    order: int

    def __post_init__(self) -> None:
        if not isinstance(self.directions, int) or self.directions < 1:
            raise ValueError(f"directions must be a positive integer, got {self.directions!r}")
        if not isinstance(self.order, int) or not 1 <= self.order <= MAX_ORDER:
            raise ValueError(f"order must be in 1..{MAX_ORDER}, got {self.order!r}")

    @property
    def size(self) -> int:
        return math.comb(self.directions + self.order, self.order)

    @property
    def multi_indices(self) -> tuple[tuple[int, ...], ...]:
        return _tables(self.directions, self.order).indices

    def index_of(self, alpha: tuple[int, ...]) -> int:
        return _tables(self.directions, self.order).position[alpha]


@dataclass(frozen=True)
class _Tables:
    indices: tuple[tuple[int, ...], ...]
    position: dict
    degree_start: tuple[int, ...]  # degree_start[q] = first index of degree q; last entry = size
    ia: np.ndarray
    ib: np.ndarray
    ic: np.ndarray
    weight: np.ndarray


@lru_cache(maxsize=None)
def _tables(d: int, k: int) -> _Tables:
    indices = []
    starts = []
    for deg in range(k + 1):
        starts.append(len(indices))
        for combo in combinations_with_replacement(range(d), deg):
            alpha = [0] * d
            for c in combo:
                alpha[c] += 1
            indices.append(tuple(alpha))
    starts.append(len(indices))
    position = {alpha: i for i, alpha in enumerate(indices)}
    degrees = [sum(a) for a in indices]

    ia, ib, ic, wt = [], [], [], []
    # Leibniz rule in derivative storage: d^g(fh) = sum_{a+b=g} binom(g, a) d^a f d^b h
    for i, a in enumerate(indices):
        for j, b in enumerate(indices):
            if degrees[i] + degrees[j] > k:
                break
            g = tuple(x + y for x, y in zip(a, b))
            w = 1
            for gt, at in zip(g, a):
                w *= math.comb(gt, at)
            ia.append(i)
            ib.append(j)
            ic.append(position[g])
            wt.append(float(w))
    return _Tables(
        tuple(indices),
        position,
        tuple(starts),
        np.asarray(ia, dtype=np.intp),
        np.asarray(ib, dtype=np.intp),
        np.asarray(ic, dtype=np.intp),
        np.asarray(wt, dtype=float),
    )


def _mul_raw(a: np.ndarray, b: np.ndarray, t: _Tables) -> np.ndarray:
    return np.bincount(t.ic, weights=t.weight * a[t.ia] * b[t.ib], minlength=len(t.indices))


class Jet:
    """Immutable truncated Taylor polynomial; coefficients are partial derivatives."""

    __slots__ = ("spec", "_c")
    # keep numpy scalars from hijacking mixed arithmetic
    __array_ufunc__ = None

    def __init__(self, spec: JetSpec, coefficients: Iterable[float]) -> None:
        c = np.array(coefficients, dtype=float)
        if c.shape != (spec.size,):
            raise ValueError(f"expected {spec.size} coefficients for {spec}, got shape {c.shape}")
        c.flags.writeable = False
        self.spec = spec
        self._c = c

    @classmethod
    def _wrap(cls, spec: JetSpec, arr: np.ndarray) -> "Jet":
        obj = object.__new__(cls)
        arr.flags.writeable = False
        obj.spec = spec
        obj._c = arr
        return obj

    @classmethod
    def constant(cls, spec: JetSpec, value: float) -> "Jet":
        arr = np.zeros(spec.size)
        arr[0] = value
        return cls._wrap(spec, arr)

    @property
    def value(self) -> float:
        return float(self._c[0])

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {alpha: float(x) for alpha, x in zip(self.spec.multi_indices, self._c)}

    def partial(self, alpha) -> float:
        return extract_partial(self, alpha)

    def __repr__(self) -> str:
        return f"Jet(d={self.spec.directions}, k={self.spec.order}, value={self.value!r})"

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "Jet | None":
        if isinstance(other, Jet):
            if other.spec != self.spec:
                raise SpecMismatchError(f"jet spec mismatch: {self.spec} vs {other.spec}")
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is not None:
            return Jet._wrap(self.spec, self._c + o._c)
        if isinstance(other, _REAL):
            arr = self._c.copy()
            arr[0] += other
            return Jet._wrap(self.spec, arr)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is not None:
            return Jet._wrap(self.spec, self._c - o._c)
        if isinstance(other, _REAL):
            arr = self._c.copy()
            arr[0] -= other
            return Jet._wrap(self.spec, arr)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _REAL):
            arr = -self._c
            arr[0] += other
            return Jet._wrap(self.spec, arr)
        return NotImplemented

    def __neg__(self):
        return Jet._wrap(self.spec, -self._c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is not None:
            t = _tables(self.spec.directions, self.spec.order)
            return Jet._wrap(self.spec, _mul_raw(self._c, o._c, t))
        if isinstance(other, _REAL):
            return Jet._wrap(self.spec, self._c * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is not None:
            return self * _reciprocal(o)
        if isinstance(other, _REAL):
            if other == 0:
                raise DomainError("div", 0.0, "division by zero")
            return Jet._wrap(self.spec, self._c / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _REAL):
            return _reciprocal(self) * other
        return NotImplemented

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or isinstance(exponent, bool) or exponent < 0:
            return NotImplemented
        return integer_power(self, exponent)


Scalar = Union[float, Jet]


def lift_variable(spec: JetSpec, base_value: float, direction_index: int) -> Jet:
    """Seed ``base_value`` as an independent variable along ``direction_index``."""
    if not 0 <= direction_index < spec.directions:
        raise IndexError(
            f"direction_index {direction_index} out of range for {spec.directions} directions"
        )
    arr = np.zeros(spec.size)
    arr[0] = base_value
    arr[1 + direction_index] = 1.0
    return Jet._wrap(spec, arr)


def seed_vector(spec: JetSpec, values: Sequence[float], offset: int) -> list[Jet]:
    """Lift each entry of ``values`` along consecutive directions starting at ``offset``."""
    return [lift_variable(spec, float(x), offset + i) for i, x in enumerate(values)]


def as_jet(x: Scalar, spec: JetSpec) -> Jet:
    if isinstance(x, Jet):
        if x.spec != spec:
            raise SpecMismatchError(f"jet spec mismatch: {x.spec} vs {spec}")
        return x
    return Jet.constant(spec, float(x))


def value_of(x: Scalar) -> float:
    return x.value if isinstance(x, Jet) else float(x)


def _normalize_alpha(alpha, d: int) -> tuple[int, ...]:
    if isinstance(alpha, Mapping):
        out = [0] * d
        for direction, power in alpha.items():
            if not 0 <= direction < d:
                raise IndexError(f"direction {direction} out of range for {d} directions")
            out[direction] += int(power)
        return tuple(out)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) == 0:
        return (0,) * d
    if len(alpha) != d:
        raise ValueError(f"multi-index {alpha} has length {len(alpha)}, expected {d}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index {alpha} has negative entries")
    return alpha


def extract_partial(a: Jet, alpha) -> float:
    """Partial derivative ``d^alpha`` at the base point.

    ``alpha`` is a length-``d`` exponent tuple, the empty tuple for the value,
    or a mapping ``{direction: power}``.
    """
    alpha = _normalize_alpha(alpha, a.spec.directions)
    if sum(alpha) > a.spec.order:
        raise ValueError(f"|alpha| = {sum(alpha)} exceeds jet order {a.spec.order}")
    return float(a._c[a.spec.index_of(alpha)])


def partial_of(x: Scalar, alpha, spec: JetSpec) -> float:
    """Like :func:`extract_partial` but treats plain numbers as constants."""
    if isinstance(x, Jet):
        return extract_partial(x, alpha)
    alpha = _normalize_alpha(alpha, spec.directions)
    if sum(alpha) > spec.order:
        raise ValueError(f"|alpha| = {sum(alpha)} exceeds jet order {spec.order}")
    return float(x) if sum(alpha) == 0 else 0.0


# named arithmetic --------------------------------------------------------------


def _check_pair(a: Jet, b: Jet) -> None:
    if a.spec != b.spec:
        raise SpecMismatchError(f"jet spec mismatch: {a.spec} vs {b.spec}")


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_pair(a, b)
    return a + b


def jet_sub(a: Jet, b: Jet) -> Jet:
    _check_pair(a, b)
    return a - b


def jet_mul(a: Jet, b: Jet) -> Jet:
    _check_pair(a, b)
    return a * b


def jet_div(a: Jet, b: Jet) -> Jet:
    _check_pair(a, b)
    return a / b


def jet_neg(a: Jet) -> Jet:
    return -a


def integer_power(x: Scalar, exponent: int) -> Scalar:
    """``x**exponent`` by repeated multiplication, the same path for floats and jets."""
    if exponent == 0:
        return Jet.constant(x.spec, 1.0) if isinstance(x, Jet) else 1.0
    out = x
    for _ in range(exponent - 1):
        out = out * x
    return out


# series composition ------------------------------------------------------------


def _compose(a: Jet, derivs: Sequence[float]) -> Jet:
    # f(c + h) = sum_q f^(q)(c)/q! h^q; h^q only touches degrees >= q
    spec = a.spec
    t = _tables(spec.directions, spec.order)
    h = a._c.copy()
    h[0] = 0.0
    out = np.zeros(spec.size)
    out[0] = derivs[0]
    s1 = t.degree_start[1]
    out[s1:] += derivs[1] * h[s1:]
    power = h
    for q in range(2, spec.order + 1):
        power = _mul_raw(power, h, t)
        sq = t.degree_start[q]
        out[sq:] += (derivs[q] / math.factorial(q)) * power[sq:]
    return Jet._wrap(spec, out)


def _reciprocal(b: Jet) -> Jet:
    c = b.value
    if c == 0.0:
        raise DomainError("div", c, "jet with zero constant term")
    r = 1.0 / c
    return _compose(b, (r, -r * r, 2.0 * r**3, -6.0 * r**4))


def _derivatives(name: str, c: float) -> tuple[float, float, float, float]:
    if name == "exp":
        e = math.exp(c)
        return (e, e, e, e)
    if name == "log":
        if c <= 0.0:
            raise DomainError("log", c, "requires a positive argument")
        r = 1.0 / c
        return (math.log(c), r, -r * r, 2.0 * r**3)
    if name == "sin":
        s, co = math.sin(c), math.cos(c)
        return (s, co, -s, -co)
    if name == "cos":
        s, co = math.sin(c), math.cos(c)
        return (co, -s, -co, s)
    if name == "sqrt":
        if c <= 0.0:
            raise DomainError("sqrt", c, "requires a positive argument for differentiation")
        r = math.sqrt(c)
        return (r, 0.5 / r, -0.25 / (r * c), 0.375 / (r * c * c))
    raise ValueError(f"unknown elementary function {name!r}")


ELEMENTARY_NAMES = ("exp", "log", "sin", "cos", "sqrt")


def jet_elementary(name: str, a: Jet) -> Jet:
    return _compose(a, _derivatives(name, a.value))


def _scalar_elementary(name: str, x: float) -> float:
    if name == "log" and x <= 0.0:
        raise DomainError("log", x, "requires a positive argument")
    if name == "sqrt" and x < 0.0:
        raise DomainError("sqrt", x, "requires a nonnegative argument")
    try:
        return getattr(math, name)(x)
    except OverflowError as exc:
        raise DomainError(name, x, "overflow") from exc


def elementary(name: str, x: Scalar) -> Scalar:
    """Apply ``exp``/``log``/``sin``/``cos``/``sqrt`` to a float or a jet."""
    if isinstance(x, Jet):
        return jet_elementary(name, x)
    return _scalar_elementary(name, float(x))


def exp(x: Scalar) -> Scalar:
    return elementary("exp", x)


def log(x: Scalar) -> Scalar:
    return elementary("log", x)


def sin(x: Scalar) -> Scalar:
    return elementary("sin", x)


def cos(x: Scalar) -> Scalar:
    return elementary("cos", x)


def sqrt(x: Scalar) -> Scalar:
    return elementary("sqrt", x)


def divide(a: Scalar, b: Scalar) -> Scalar:
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        if b == 0:
            raise DomainError("div", 0.0, "division by zero")
        return a / b
    return a / b
