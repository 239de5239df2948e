"""Sampled numerical verification of the groupoid axioms in chart form.

With ``g = (u, v)``, ``h = (sigma(u, v), w)`` and ``k = (sigma(sigma(u,v), w), z)``:

* unit laws: ``p(u, 0, w) = w``, ``p(u, v, 0) = v``, ``sigma(u, 0) = u``
* source compatibility ``s(gh) = s(h)``: ``sigma(u, p(u,v,w)) = sigma(sigma(u,v), w)``
* associativity: ``p(u, p(u,v,w), z) = p(u, v, p(sigma(u,v), w, z))``
* inversion: with ``w* = inv(u, v)``, ``p(u, v, w*) = 0`` and ``p(sigma(u,v), w*, v) = 0``
* submersion: the Jacobian of sigma has full rank ``n``.

Residuals are infinity norms.  Sample points are drawn inside the chart's
shrunken boxes; composites built from them are evaluated without re-checking
the box, since products of half-radius arrows legitimately leave it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .chart import (
    LocalGroupoidChart,
    SamplePlan,
    eval_prod,
    eval_sigma,
    invert_at,
    sample_quadruples,
    sigma_jacobian,
)
from .errors import GroupoidError

DEFAULT_TOL = 1e-9
DEFAULT_RANK_TOL = 1e-8
NO_SAMPLES = "no samples"


def _num(x: float):
    if math.isfinite(x):
        return float(x)
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


@dataclass
class CheckResult:
    """Outcome of one named check.

    ``bound`` is ``"upper"`` for identities (pass iff residual <= tolerance)
    and ``"lower"`` for the rank check, whose residual is the smallest
    singular value seen (pass iff residual >= tolerance).
    """

    name: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool
    worst_point: Optional[dict] = None
    bound: str = "upper"
    note: str = ""
    errors: int = 0

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "max_residual": _num(self.max_residual),
            "tolerance": self.tolerance,
            "pass": self.passed,
            "worst_point": self.worst_point,
            "samples": self.samples,
        }
        if self.bound != "upper":
            out["bound"] = self.bound
        if self.note:
            out["note"] = self.note
        if self.errors:
            out["errors"] = self.errors
        return out


@dataclass
class CheckReport:
    chart: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"chart": self.chart, "checks": [c.to_dict() for c in self.checks]}


def point_dict(**vectors) -> dict:
    return {k: [_num(float(x)) for x in np.ravel(v)] for k, v in vectors.items()}


def run_check(
    name: str,
    points: Sequence[dict],
    residual_fn: Callable[..., float],
    tol: float,
    *,
    bound: str = "upper",
    note: str = "",
) -> CheckResult:
    """Fold ``residual_fn(**point)`` over ``points`` in index order.

    Evaluation errors count as a residual of +inf (upper bound) or 0 (lower
    bound) for that point and are tallied in ``errors``.
    """
    if not points:
        return CheckResult(name, 0, 0.0, tol, True, None, bound, note or NO_SAMPLES)
    worst = None
    worst_point = None
    errors = 0
    first_error = ""
    for pt in points:
        try:
            r = float(residual_fn(**pt))
            if math.isnan(r):
                raise FloatingPointError("residual is NaN")
        except (GroupoidError, ArithmeticError, ValueError) as exc:
            errors += 1
            first_error = first_error or f"{type(exc).__name__}: {exc}"
            r = math.inf if bound == "upper" else 0.0
        if worst is None or (r > worst if bound == "upper" else r < worst):
            worst = r
            worst_point = pt
    passed = worst <= tol if bound == "upper" else worst >= tol
    if errors:
        note = "; ".join(filter(None, [note, f"{errors} evaluation error(s), first: {first_error}"]))
    return CheckResult(
        name, len(points), worst, tol, passed, point_dict(**worst_point), bound, note, errors
    )


def _inf(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(x))) if x.size else 0.0


def _points(chart: LocalGroupoidChart, plan: SamplePlan, keys: str = "uvw"):
    return [
        {k: val for k, val in zip("uvwz", quad) if k in keys}
        for quad in sample_quadruples(chart, plan)
    ]


# individual checks -------------------------------------------------------------


def check_unit_laws(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckResult:
    zero = np.zeros(chart.m)

    def residual(u, v, w):
        r1 = _inf(eval_prod(chart, u, zero, w) - w)
        r2 = _inf(eval_prod(chart, u, v, zero) - v)
        r3 = _inf(eval_sigma(chart, u, zero) - u)
        return max(r1, r2, r3)

    return run_check("unit_laws", _points(chart, plan), residual, tol)


def check_source_compat(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckResult:
    def residual(u, v, w):
        pw = eval_prod(chart, u, v, w)
        s1 = eval_sigma(chart, u, pw, check_domain=False)
        s2 = eval_sigma(chart, eval_sigma(chart, u, v), w, check_domain=False)
        return _inf(s1 - s2)

    return run_check("source_compat", _points(chart, plan), residual, tol)


def check_associativity(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckResult:
    def residual(u, v, w, z):
        lhs = eval_prod(chart, u, eval_prod(chart, u, v, w), z, check_domain=False)
        u1 = eval_sigma(chart, u, v)
        rhs = eval_prod(chart, u, v, eval_prod(chart, u1, w, z, check_domain=False), check_domain=False)
        return _inf(lhs - rhs)

    return run_check("associativity", _points(chart, plan, "uvwz"), residual, tol)


def check_inversion(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckResult:
    def residual(u, v):
        w_star = invert_at(chart, u, v)
        right = _inf(eval_prod(chart, u, v, w_star, check_domain=False))
        u1 = eval_sigma(chart, u, v)
        left = _inf(eval_prod(chart, u1, w_star, v, check_domain=False))
        return max(right, left)

    return run_check("inversion", _points(chart, plan, "uv"), residual, tol)


def check_submersion_rank(
    chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_RANK_TOL
) -> CheckResult:
    """Smallest singular value of the sigma-Jacobian, worst case over samples."""
    if chart.n == 0:
        return CheckResult(
            "submersion_rank", 0, 0.0, tol, True, None, "lower", "n = 0: empty Jacobian"
        )

    def residual(u, v):
        jac = sigma_jacobian(chart, u, v)
        return float(np.linalg.svd(jac, compute_uv=False)[-1])

    return run_check("submersion_rank", _points(chart, plan, "uv"), residual, tol, bound="lower")


GROUPOID_CHECKS = ("unit_laws", "source_compat", "associativity", "inversion", "submersion_rank")


def run_groupoid_suite(
    chart: LocalGroupoidChart,
    plan: SamplePlan,
    tol: float = DEFAULT_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> CheckReport:
    return CheckReport(
        chart.name,
        [
            check_unit_laws(chart, plan, tol),
            check_source_compat(chart, plan, tol),
            check_associativity(chart, plan, tol),
            check_inversion(chart, plan, tol),
            check_submersion_rank(chart, plan, rank_tol),
        ],
    )
