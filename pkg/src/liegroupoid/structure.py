"""Lie algebroid data of a chart: anchor, bilinear term, structure functions.

Index layout, used throughout:

* ``anchor[i, j] = a_ij = d sigma_j / d v_i (u, 0)``, shape ``(m, n)``;
  the anchor sends ``e_i`` to ``sum_j a_ij d/du_j``.
* ``B[k, i, j] = B_k(u, f_i, f_j) = d^2 p_k / dv_i dw_j (u, 0, 0)``,
  the bilinear part of ``p(u, v, w) = v + w + B(u, v, w) + O(3)``.
* ``c[k, i, j] = c_ijk = B[k, i, j] - B[k, j, i]``, the ``e_k``-coefficient
  of the frame bracket ``[e_i, e_j]``.

The pure second-order blocks ``d^2p/dv^2`` and ``d^2p/dw^2`` vanish at
``(u, 0, 0)`` for any chart of a genuine groupoid (they follow from the unit
laws), so the mixed Hessian is the whole bilinear term.  The cross-check
verifies this along with the invariant-vector-field bracket.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import exprdsl
from .axioms import DEFAULT_TOL, CheckReport, CheckResult, _points, run_check
from .chart import (
    LocalGroupoidChart,
    SamplePlan,
    _check_box,
    eval_prod,
    eval_sigma,
    prod_jacobian_w,
)
from .jets import JetSpec, Scalar, partial_of, seed_vector, value_of


@dataclass(frozen=True)
class StructureData:
    u: np.ndarray
    anchor: np.ndarray
    B: np.ndarray
    c: np.ndarray

    def to_dict(self, full: bool = False) -> dict:
        out = {"u": self.u.tolist(), "anchor": self.anchor.tolist(), "c": self.c.tolist()}
        if full:
            out["B"] = self.B.tolist()
        return out


@dataclass(frozen=True)
class TangentFieldValue:
    base: np.ndarray
    fiber: np.ndarray


@dataclass(frozen=True)
class SectionSpec:
    """Section ``xi = sum_i xi_i(u) e_i`` given by its m coefficient functions.

    Each coefficient takes the base point as a list of scalars (floats or
    jets) and returns a scalar.
    """

    coefficients: tuple[Callable[[Sequence[Scalar]], Scalar], ...]
    label: str = ""

    @property
    def m(self) -> int:
        return len(self.coefficients)

    def evaluate(self, u: Sequence[Scalar]) -> list[Scalar]:
        return [f(u) for f in self.coefficients]

    @classmethod
    def constant(cls, values: Sequence[float], label: str = "") -> "SectionSpec":
        vals = [float(x) for x in values]
        return cls(tuple((lambda u, x=x: x) for x in vals), label or f"const{vals}")

    @classmethod
    def frame(cls, i: int, m: int) -> "SectionSpec":
        """The frame section e_{i+1} (0-based ``i``)."""
        if not 0 <= i < m:
            raise IndexError(f"frame index {i} out of range for rank {m}")
        return cls.constant([1.0 if k == i else 0.0 for k in range(m)], f"e{i + 1}")

    @classmethod
    def from_expressions(cls, exprs: Sequence[str], n: int, label: str = "") -> "SectionSpec":
        env = exprdsl.VariableEnv.for_base(n)
        trees = exprdsl.parse_all(exprs, env)
        names = env.names

        def make(tree):
            return lambda u: exprdsl.evaluate(tree, dict(zip(names, u)))

        return cls(tuple(make(t) for t in trees), label or "[" + ", ".join(exprs) + "]")

    def scaled(self, f: Callable[[Sequence[Scalar]], Scalar], label: str = "") -> "SectionSpec":
        """The section ``f * xi`` for a scalar function ``f`` on the base."""
        return SectionSpec(
            tuple((lambda u, g=g: f(u) * g(u)) for g in self.coefficients),
            label or f"f*{self.label}",
        )


def _mi(d: int, *dirs: int) -> tuple[int, ...]:
    alpha = [0] * d
    for t in dirs:
        alpha[t] += 1
    return tuple(alpha)


def _base_point(chart: LocalGroupoidChart, u) -> np.ndarray:
    u = np.asarray([float(x) for x in u], dtype=float)
    if u.shape != (chart.n,):
        raise ValueError(f"u has length {u.size}, expected {chart.n}")
    _check_box(u, chart.radius_u, "u")
    return u


# extraction --------------------------------------------------------------------


def anchor_at(chart: LocalGroupoidChart, u) -> np.ndarray:
    """Anchor matrix ``a[i, j] = d sigma_j / d v_i (u, 0)``, shape (m, n)."""
    u = _base_point(chart, u)
    n, m = chart.n, chart.m
    if n == 0:
        return np.zeros((m, 0))
    spec = JetSpec(m, 1)
    out = eval_sigma(chart, u, seed_vector(spec, np.zeros(m), 0))
    a = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            a[i, j] = partial_of(out[j], _mi(m, i), spec)
    return a


def second_order_blocks(chart: LocalGroupoidChart, u, order: int = 2):
    """Second derivatives of p at (u, 0, 0): ``(B, Hvv, Hww)``, each (m, m, m).

    ``B[k, i, j] = d2 p_k / dv_i dw_j``, ``Hvv[k, i, j] = d2 p_k / dv_i dv_j``,
    ``Hww[k, i, j] = d2 p_k / dw_i dw_j``.
    """
    if order not in (2, 3):
        raise ValueError("bilinear extraction needs jet order 2 or 3")
    u = _base_point(chart, u)
    m = chart.m
    d = 2 * m
    spec = JetSpec(d, order)
    zero = np.zeros(m)
    out = eval_prod(chart, u, seed_vector(spec, zero, 0), seed_vector(spec, zero, m))
    B = np.empty((m, m, m))
    Hvv = np.empty((m, m, m))
    Hww = np.empty((m, m, m))
    for k in range(m):
        for i in range(m):
            for j in range(m):
                B[k, i, j] = partial_of(out[k], _mi(d, i, m + j), spec)
                Hvv[k, i, j] = partial_of(out[k], _mi(d, i, j), spec)
                Hww[k, i, j] = partial_of(out[k], _mi(d, m + i, m + j), spec)
    return B, Hvv, Hww


def bilinear_at(chart: LocalGroupoidChart, u, order: int = 2) -> np.ndarray:
    """Bilinear term ``B[k, i, j] = B_k(u, f_i, f_j)`` as the mixed Hessian of p."""
    return second_order_blocks(chart, u, order)[0]


def antisymmetrize(B: np.ndarray) -> np.ndarray:
    return B - np.transpose(B, (0, 2, 1))


def structure_constants_at(chart: LocalGroupoidChart, u, order: int = 2) -> np.ndarray:
    return antisymmetrize(bilinear_at(chart, u, order))


def structure_data_at(chart: LocalGroupoidChart, u, order: int = 2) -> StructureData:
    u = _base_point(chart, u)
    B = bilinear_at(chart, u, order)
    return StructureData(u, anchor_at(chart, u), B, antisymmetrize(B))


def base_derivatives(chart: LocalGroupoidChart, u):
    """Anchor, bilinear term and their first u-derivatives from one order-3 pass.

    Returns ``(a, da, B, dB)`` with ``da[i, j, t] = d a_ij / du_t`` and
    ``dB[k, i, j, t] = d B[k, i, j] / du_t``.
    """
    u = _base_point(chart, u)
    n, m = chart.n, chart.m
    d = n + 2 * m
    spec = JetSpec(d, 3)
    uj = seed_vector(spec, u, 0)
    vj = seed_vector(spec, np.zeros(m), n)
    wj = seed_vector(spec, np.zeros(m), n + m)
    s_out = eval_sigma(chart, uj, vj)
    p_out = eval_prod(chart, uj, vj, wj)
    a = np.empty((m, n))
    da = np.empty((m, n, n))
    for i in range(m):
        for j in range(n):
            a[i, j] = partial_of(s_out[j], _mi(d, n + i), spec)
            for t in range(n):
                da[i, j, t] = partial_of(s_out[j], _mi(d, n + i, t), spec)
    B = np.empty((m, m, m))
    dB = np.empty((m, m, m, n))
    for k in range(m):
        for i in range(m):
            for j in range(m):
                B[k, i, j] = partial_of(p_out[k], _mi(d, n + i, n + m + j), spec)
                for t in range(n):
                    dB[k, i, j, t] = partial_of(p_out[k], _mi(d, n + i, n + m + j, t), spec)
    return a, da, B, dB


# brackets of sections ----------------------------------------------------------


def bracket_constant_sections(chart: LocalGroupoidChart, u, xi0, eta0) -> np.ndarray:
    """``B(u, xi0, eta0) - B(u, eta0, xi0)`` for sections with constant coefficients."""
    B = bilinear_at(chart, u)
    xi0 = np.asarray(xi0, dtype=float)
    eta0 = np.asarray(eta0, dtype=float)
    return np.einsum("kij,i,j->k", B, xi0, eta0) - np.einsum("kij,i,j->k", B, eta0, xi0)


def _section_jet(xi: SectionSpec, u: np.ndarray, n: int):
    """Values (m,) and u-gradients (m, n) of the section coefficients at u."""
    if n == 0:
        vals = xi.evaluate([])
        return np.array([value_of(x) for x in vals]), np.zeros((xi.m, 0))
    spec = JetSpec(n, 1)
    vals = xi.evaluate(seed_vector(spec, u, 0))
    val = np.array([partial_of(x, (), spec) for x in vals])
    grad = np.array([[partial_of(x, _mi(n, t), spec) for t in range(n)] for x in vals])
    return val, grad.reshape(xi.m, n)


def _bracket_full(a, c, xi: SectionSpec, eta: SectionSpec, u: np.ndarray, n: int) -> np.ndarray:
    xv, dx = _section_jet(xi, u, n)
    ev, de = _section_jet(eta, u, n)
    out = np.einsum("kij,i,j->k", c, xv, ev)
    # rho(xi)(eta_k) - rho(eta)(xi_k), rho(xi) = sum_i xi_i a_ij d/du_j
    out = out + de @ (xv @ a) - dx @ (ev @ a)
    return out


def bracket_sections_full(chart: LocalGroupoidChart, xi: SectionSpec, eta: SectionSpec, u) -> np.ndarray:
    """Bracket coefficients of two arbitrary sections at u, Leibniz terms included."""
    u = _base_point(chart, u)
    _check_rank(chart, xi, eta)
    return _bracket_full(anchor_at(chart, u), structure_constants_at(chart, u), xi, eta, u, chart.n)


def _check_rank(chart, *sections: SectionSpec) -> None:
    for s in sections:
        if s.m != chart.m:
            raise ValueError(f"section {s.label!r} has {s.m} coefficients, chart rank is {chart.m}")


# left-invariant vector fields --------------------------------------------------


def left_invariant_field_at(chart: LocalGroupoidChart, xi: SectionSpec, u, v) -> TangentFieldValue:
    """Chart form of the left-invariant field of ``xi`` at the arrow (u, v).

    Fiber component ``dp/dw(u, v, 0) . xi(sigma(u, v))``; base component 0.
    """
    _check_rank(chart, xi)
    u = _base_point(chart, u)
    v = np.asarray(v, dtype=float)
    P = prod_jacobian_w(chart, u, v, np.zeros(chart.m))
    x0 = np.array([value_of(x) for x in xi.evaluate(list(eval_sigma(chart, u, v)))])
    return TangentFieldValue(np.zeros(chart.n), P @ x0)


def _field_with_jacobian(chart: LocalGroupoidChart, xi: SectionSpec, u: np.ndarray, v: np.ndarray):
    """Fiber component of the invariant field at v and its v-Jacobian."""
    m = chart.m
    d = 2 * m
    spec = JetSpec(d, 2)
    vj = seed_vector(spec, v, 0)
    p_out = eval_prod(chart, u, vj, seed_vector(spec, np.zeros(m), m))
    P = np.empty((m, m))
    dP = np.empty((m, m, m))
    for k in range(m):
        for l in range(m):
            P[k, l] = partial_of(p_out[k], _mi(d, m + l), spec)
            for s in range(m):
                dP[k, l, s] = partial_of(p_out[k], _mi(d, m + l, s), spec)
    sig = list(eval_sigma(chart, u, vj))
    xs = xi.evaluate(sig)
    xval = np.array([partial_of(x, (), spec) for x in xs])
    dxi = np.array([[partial_of(x, _mi(d, s), spec) for s in range(m)] for x in xs])
    field = P @ xval
    jac = np.einsum("kls,l->ks", dP, xval) + P @ dxi
    return field, jac


def invariant_field_bracket(
    chart: LocalGroupoidChart, xi: SectionSpec, eta: SectionSpec, u, v=None
) -> np.ndarray:
    """Lie bracket of the invariant fields of ``xi`` and ``eta`` at the arrow (u, v).

    Both fields are tangent to the range fiber, so in the chart the bracket is
    ``sum_s a_s db/dv_s - b_s da/dv_s``; derivatives come from jets in v.
    """
    _check_rank(chart, xi, eta)
    u = _base_point(chart, u)
    v = np.zeros(chart.m) if v is None else np.asarray(v, dtype=float)
    a, da = _field_with_jacobian(chart, xi, u, v)
    b, db = _field_with_jacobian(chart, eta, u, v)
    return db @ a - da @ b


def bracket_invariant_fields_at(chart: LocalGroupoidChart, i: int, j: int, u) -> np.ndarray:
    """Field bracket ``[X_i, X_j]`` at the unit u; an independent route to ``c[:, i, j]``."""
    m = chart.m
    return invariant_field_bracket(chart, SectionSpec.frame(i, m), SectionSpec.frame(j, m), u)


# algebroid checks --------------------------------------------------------------


def _inf(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(x))) if x.size else 0.0


def _base_points(chart: LocalGroupoidChart, plan: SamplePlan):
    pts = _points(chart, plan, "u")
    if chart.n == 0:
        return pts[:1], "n = 0: single base point"
    return pts, ""


def check_antisymmetry(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckResult:
    pts, note = _base_points(chart, plan)

    def residual(u):
        c = structure_constants_at(chart, u)
        return _inf(c + np.transpose(c, (0, 2, 1)))

    return run_check("antisymmetry", pts, residual, tol, note=note)


def check_cross(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckResult:
    """Field-bracket oracle against c, plus vanishing of the pure Hessian blocks."""
    pts, note = _base_points(chart, plan)
    m = chart.m

    def residual(u):
        B, Hvv, Hww = second_order_blocks(chart, u)
        c = antisymmetrize(B)
        zero = np.zeros(m)
        fields = [
            _field_with_jacobian(chart, SectionSpec.frame(i, m), np.asarray(u, float), zero)
            for i in range(m)
        ]
        worst = max(_inf(Hvv), _inf(Hww))
        for i in range(m):
            a, da = fields[i]
            for j in range(m):
                b, db = fields[j]
                worst = max(worst, _inf(db @ a - da @ b - c[:, i, j]))
        return worst

    return run_check("cross_check", pts, residual, tol, note=note)


def check_anchor_morphism(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckResult:
    """``rho([e_i, e_j]) = [rho(e_i), rho(e_j)]`` componentwise."""
    pts, note = _base_points(chart, plan)

    def residual(u):
        a, da, B, _ = base_derivatives(chart, u)
        c = antisymmetrize(B)
        lhs = np.einsum("lij,ls->ijs", c, a)
        rhs = np.einsum("it,jst->ijs", a, da) - np.einsum("jt,ist->ijs", a, da)
        return _inf(lhs - rhs)

    return run_check("anchor_morphism", pts, residual, tol, note=note)


def jacobi_defect(a, B, dB) -> np.ndarray:
    """Cyclic sum over (i, j, k) of the e_m-component of ``[[e_i, e_j], e_k]``.

    ``[[e_i, e_j], e_k]_m = sum_l c_ijl c_lkm - sum_s a_ks dc_ijm/du_s``;
    the result has shape (m, m, m, m) indexed ``[i, j, k, m]``.
    """
    c = antisymmetrize(B)
    dc = dB - np.transpose(dB, (0, 2, 1, 3))
    term = np.einsum("lij,mlk->ijkm", c, c) - np.einsum("ks,mijs->ijkm", a, dc)
    return term + np.transpose(term, (1, 2, 0, 3)) + np.transpose(term, (2, 0, 1, 3))


def check_jacobi(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckResult:
    pts, note = _base_points(chart, plan)

    def residual(u):
        a, _, B, dB = base_derivatives(chart, u)
        return _inf(jacobi_defect(a, B, dB))

    return run_check("jacobi", pts, residual, tol, note=note)


def default_probes(n: int) -> list[str]:
    probes = ["2.5"]
    for j in range(1, n + 1):
        probes += [f"u{j}", f"u{j}^2"]
    return probes


def _scalar_jet(fn, u: np.ndarray, n: int):
    if n == 0:
        return value_of(fn([])), np.zeros(0)
    spec = JetSpec(n, 1)
    y = fn(seed_vector(spec, u, 0))
    return partial_of(y, (), spec), np.array([partial_of(y, _mi(n, t), spec) for t in range(n)])


def check_leibniz(
    chart: LocalGroupoidChart,
    plan: SamplePlan,
    tol: float = DEFAULT_TOL,
    probes: Optional[Sequence[str]] = None,
) -> CheckResult:
    """``[xi, f eta] = f [xi, eta] + rho(xi)(f) eta`` on frame sections.

    ``probes`` are expression strings in ``u1..un``; by default a constant,
    each coordinate and each squared coordinate.
    """
    n, m = chart.n, chart.m
    env = exprdsl.VariableEnv.for_base(n)
    trees = exprdsl.parse_all(probes if probes is not None else default_probes(n), env)
    funcs = [(lambda u, t=t: exprdsl.evaluate(t, dict(zip(env.names, u)))) for t in trees]
    frames = [SectionSpec.frame(i, m) for i in range(m)]
    pts, note = _base_points(chart, plan)

    def residual(u):
        u = np.asarray(u, dtype=float)
        a = anchor_at(chart, u)
        c = structure_constants_at(chart, u)
        worst = 0.0
        for f in funcs:
            fval, fgrad = _scalar_jet(f, u, n)
            for ia, xi in enumerate(frames):
                rho_f = float(a[ia] @ fgrad)
                for ib, eta in enumerate(frames):
                    lhs = _bracket_full(a, c, xi, eta.scaled(f), u, n)
                    rhs = fval * _bracket_full(a, c, xi, eta, u, n)
                    rhs[ib] += rho_f
                    worst = max(worst, _inf(lhs - rhs))
        return worst

    return run_check("leibniz", pts, residual, tol, note=note)


ALGEBROID_CHECKS = ("antisymmetry", "cross_check", "anchor_morphism", "jacobi", "leibniz")


def run_algebroid_suite(chart: LocalGroupoidChart, plan: SamplePlan, tol: float = DEFAULT_TOL) -> CheckReport:
    return CheckReport(
        chart.name,
        [
            check_antisymmetry(chart, plan, tol),
            check_cross(chart, plan, tol),
            check_anchor_morphism(chart, plan, tol),
            check_jacobi(chart, plan, tol),
            check_leibniz(chart, plan, tol),
        ],
    )
