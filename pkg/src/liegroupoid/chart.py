"""Lie groupoids presented in an adapted local chart.

A chart is described by two maps on small coordinate boxes:

* ``sigma(u, v) -> u'``: the source of the arrow with coordinates ``(u, v)``,
  where ``u`` (length ``n``) is its range unit and ``v`` (length ``m``) moves
  along the range fiber.  ``sigma(u, 0) = u``.
* ``prod(u, v, w) -> v'``: fiber coordinate of the product of ``(u, v)`` with
  the arrow ``(sigma(u, v), w)``; the product has range ``u`` again.

Here ``m`` is the fiber dimension ``dim G - dim G0`` (the rank of the Lie
algebroid).  Fiber coordinates are used directly as algebroid coordinates, so
the canonical basis ``f_1..f_m`` of R^m is the local frame ``e_1..e_m``.

Maps are plain Python callables over abstract scalars (floats or jets), taking
and returning sequences.  Charts defined by expression strings keep those
strings so they can be written back to a chart file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import exprdsl
from .errors import (
    ConvergenceError,
    OutOfDomainError,
    SingularJacobianError,
)
from .jets import Jet, JetSpec, Scalar, partial_of, seed_vector, value_of

SigmaMap = Callable[[Sequence[Scalar], Sequence[Scalar]], Sequence[Scalar]]
ProdMap = Callable[[Sequence[Scalar], Sequence[Scalar], Sequence[Scalar]], Sequence[Scalar]]


@dataclass(frozen=True)
class ChartSource:
    sigma: tuple[str, ...]
    p: tuple[str, ...]


@dataclass(frozen=True)
class LocalGroupoidChart:
    name: str
    n: int
    m: int
    sigma: SigmaMap
    prod: ProdMap
    radius_u: float = 1.0
    radius_v: float = 1.0
    source: Optional[ChartSource] = None

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 1:
            raise ValueError(f"need n >= 0 and m >= 1, got n={self.n}, m={self.m}")
        if not (self.radius_u > 0 and self.radius_v > 0):
            raise ValueError("radii must be positive")

    @classmethod
    def from_expressions(
        cls,
        name: str,
        n: int,
        m: int,
        sigma: Sequence[str],
        p: Sequence[str],
        radius_u: float = 1.0,
        radius_v: float = 1.0,
    ) -> "LocalGroupoidChart":
        """Build a chart from expression strings over ``u1..un, v1..vm[, w1..wm]``."""
        if len(sigma) != n:
            raise ValueError(f"sigma needs {n} expressions, got {len(sigma)}")
        if len(p) != m:
            raise ValueError(f"p needs {m} expressions, got {len(p)}")
        sigma_exprs = exprdsl.parse_all(sigma, exprdsl.VariableEnv.for_chart(n, m))
        p_exprs = exprdsl.parse_all(p, exprdsl.VariableEnv.for_chart(n, m, with_w=True))
        u_names = [f"u{i + 1}" for i in range(n)]
        v_names = [f"v{i + 1}" for i in range(m)]
        w_names = [f"w{i + 1}" for i in range(m)]

        def sigma_map(u, v):
            bindings = dict(zip(u_names, u))
            bindings.update(zip(v_names, v))
            return [exprdsl.evaluate(e, bindings) for e in sigma_exprs]

        def prod_map(u, v, w):
            bindings = dict(zip(u_names, u))
            bindings.update(zip(v_names, v))
            bindings.update(zip(w_names, w))
            return [exprdsl.evaluate(e, bindings) for e in p_exprs]

        return cls(
            name,
            n,
            m,
            sigma_map,
            prod_map,
            float(radius_u),
            float(radius_v),
            ChartSource(tuple(sigma), tuple(p)),
        )

    def to_dict(self) -> dict:
        if self.source is None:
            raise ValueError(f"chart {self.name!r} is native code and has no expression form")
        return {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "sigma": list(self.source.sigma),
            "p": list(self.source.p),
            "radius_u": self.radius_u,
            "radius_v": self.radius_v,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LocalGroupoidChart":
        missing = {"name", "n", "m", "sigma", "p"} - set(data)
        if missing:
            raise ValueError(f"chart document lacks fields: {sorted(missing)}")
        return cls.from_expressions(
            str(data["name"]),
            int(data["n"]),
            int(data["m"]),
            list(data["sigma"]),
            list(data["p"]),
            float(data.get("radius_u", 1.0)),
            float(data.get("radius_v", 1.0)),
        )


def write_chart_file(chart: LocalGroupoidChart, path) -> None:
    Path(path).write_text(json.dumps(chart.to_dict(), indent=2) + "\n")


def read_chart_file(path) -> LocalGroupoidChart:
    """Load a JSON chart document (fields: name, n, m, sigma, p, radius_u, radius_v)."""
    return LocalGroupoidChart.from_dict(json.loads(Path(path).read_text()))


# evaluation --------------------------------------------------------------------


def _inf_norm(x: Sequence[Scalar]) -> float:
    return max((abs(value_of(t)) for t in x), default=0.0)


def _prepare(x, size: int, what: str) -> list:
    items = list(x)
    if len(items) != size:
        raise ValueError(f"{what} has length {len(items)}, expected {size}")
    return [t if isinstance(t, Jet) else float(t) for t in items]


def _check_box(x, radius: float, what: str) -> None:
    if _inf_norm(x) >= radius:
        raise OutOfDomainError(f"{what} = {[value_of(t) for t in x]} outside |.| < {radius}")


def _finish(out, size: int, what: str):
    out = list(out)
    if len(out) != size:
        raise ValueError(f"{what} returned {len(out)} components, expected {size}")
    if any(isinstance(t, Jet) for t in out):
        return out
    return np.array([float(t) for t in out], dtype=float)


def eval_sigma(chart: LocalGroupoidChart, u, v, *, check_domain: bool = True):
    """Source map; returns an ndarray for float input, a list for jet input."""
    u = _prepare(u, chart.n, "u")
    v = _prepare(v, chart.m, "v")
    if check_domain:
        _check_box(u, chart.radius_u, "u")
        _check_box(v, chart.radius_v, "v")
    return _finish(chart.sigma(u, v), chart.n, "sigma")


def eval_prod(chart: LocalGroupoidChart, u, v, w, *, check_domain: bool = True):
    u = _prepare(u, chart.n, "u")
    v = _prepare(v, chart.m, "v")
    w = _prepare(w, chart.m, "w")
    if check_domain:
        _check_box(u, chart.radius_u, "u")
        _check_box(v, chart.radius_v, "v")
        _check_box(w, chart.radius_v, "w")
    return _finish(chart.prod(u, v, w), chart.m, "p")


def sigma_jacobian(chart: LocalGroupoidChart, u, v, *, check_domain: bool = True) -> np.ndarray:
    """The n x (n+m) Jacobian of sigma with respect to (u, v)."""
    n, m = chart.n, chart.m
    if n == 0:
        return np.zeros((0, m))
    spec = JetSpec(n + m, 1)
    uj = seed_vector(spec, u, 0)
    vj = seed_vector(spec, v, n)
    out = eval_sigma(chart, uj, vj, check_domain=check_domain)
    jac = np.empty((n, n + m))
    for r in range(n):
        for c in range(n + m):
            jac[r, c] = partial_of(out[r], {c: 1}, spec)
    return jac


def prod_jacobian_w(chart: LocalGroupoidChart, u, v, w, *, check_domain: bool = True) -> np.ndarray:
    """dp/dw at (u, v, w) as an m x m matrix, from order-1 jets."""
    m = chart.m
    spec = JetSpec(m, 1)
    wj = seed_vector(spec, w, 0)
    out = eval_prod(chart, [float(x) for x in u], [float(x) for x in v], wj, check_domain=check_domain)
    jac = np.empty((m, m))
    for k in range(m):
        for j in range(m):
            jac[k, j] = partial_of(out[k], {j: 1}, spec)
    return jac


@dataclass(frozen=True)
class InverseResult:
    w: np.ndarray
    iterations: int
    residual: float


def invert_at(
    chart: LocalGroupoidChart,
    u,
    v,
    tolerance: float = 1e-12,
    max_iterations: int = 50,
    *,
    full_output: bool = False,
    check_domain: bool = True,
):
    """Fiber coordinate ``w`` of the inverse arrow: solves ``p(u, v, w) = 0``.

    Newton's method from ``w0 = -v`` with the exact Jacobian dp/dw.  The
    inverse arrow itself is ``(sigma(u, v), w)``.  ``iterations`` counts
    residual evaluations, including the one that confirmed convergence.

    Raises
    ------
    SingularJacobianError
        If dp/dw cannot be solved at an iterate.
    ConvergenceError
        If ``max(|p|) > tolerance`` after ``max_iterations`` evaluations.
    """
    u = np.asarray([float(x) for x in u], dtype=float)
    v = np.asarray([float(x) for x in v], dtype=float)
    if check_domain:
        _check_box(u, chart.radius_u, "u")
        _check_box(v, chart.radius_v, "v")
    w = -v
    residual = np.inf
    for it in range(1, max_iterations + 1):
        f = eval_prod(chart, u, v, w, check_domain=False)
        residual = float(np.max(np.abs(f))) if f.size else 0.0
        if not np.isfinite(residual):
            break
        if residual <= tolerance:
            if full_output:
                return InverseResult(w, it, residual)
            return w
        jac = prod_jacobian_w(chart, u, v, w, check_domain=False)
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(f"dp/dw is singular at w={w.tolist()}") from exc
        w = w - step
    raise ConvergenceError(
        f"Newton inversion did not reach {tolerance:g} in {max_iterations} iterations "
        f"(last residual {residual:g})"
    )


# sampling ----------------------------------------------------------------------


@dataclass(frozen=True)
class SamplePlan:
    seed: int = 0
    count: int = 100
    shrink: float = 0.5

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")


def sample_quadruples(chart: LocalGroupoidChart, plan: SamplePlan):
    """Deterministic (u, v, w, z) points, uniform in the shrunken boxes.

    Each sample draws u, v, w, z in that order from one PCG64 stream, so the
    triples of :func:`sample_points` are the first three entries of these.
    """
    rng = np.random.Generator(np.random.PCG64(plan.seed))
    a_u = plan.shrink * chart.radius_u
    a_v = plan.shrink * chart.radius_v
    out = []
    for _ in range(plan.count):
        u = a_u * (2.0 * rng.random(chart.n) - 1.0)
        v, w, z = (a_v * (2.0 * rng.random(chart.m) - 1.0) for _ in range(3))
        out.append((u, v, w, z))
    return out


def sample_points(chart: LocalGroupoidChart, plan: SamplePlan):
    return [(u, v, w) for u, v, w, _ in sample_quadruples(chart, plan)]


__all__ = [
    "ChartSource",
    "InverseResult",
    "LocalGroupoidChart",
    "SamplePlan",
    "eval_prod",
    "eval_sigma",
    "invert_at",
    "prod_jacobian_w",
    "read_chart_file",
    "sample_points",
    "sample_quadruples",
    "sigma_jacobian",
    "write_chart_file",
]
