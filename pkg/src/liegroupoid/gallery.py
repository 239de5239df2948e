"""Built-in example charts with their expected structure data.

Every chart here is given by expression strings, so it can be exported to a
chart file and read back unchanged.  Expected values were derived by hand:

pair(dim)
    M x M with sigma(u, v) = u + v, p = v + w.  Anchor = identity, c = 0.
heisenberg
    Upper unitriangular 3x3 matrices, fiber coordinates (x12, x23, x13).
    Multiplying gives p = v + w + (0, 0, v1 w2), so B_3(f1, f2) = 1 and
    [e1, e2] = e3.
su2_quaternion
    Unit quaternions charted by their vector part.  The vector part of
    (s_v, v)(s_w, w) is s_w v + s_v w + v x w with s = sqrt(1 - |.|^2), so
    B(v, w) = v x w and [e_i, e_j] = 2 eps_ijk e_k.
affine_action
    R x Aff(R): arrows (x, (a, b)) with source e^a x + b; composition
    (x, h)(h(x), h') = (x, h' o h) gives p = (a + a', e^{a'} b + b').
    Anchor rows (u, 1); B_2(f2, f1) = 1 so [e1, e2] = -e2.
heisenberg_bundle
    A bundle of Heisenberg groups over R whose cocycle scales with the base
    point: p_3 = v3 + w3 + (1 + u) v1 w2.  Zero anchor, c_123 = 1 + u.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chart import LocalGroupoidChart
from .structure import StructureData


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    chart: LocalGroupoidChart
    expected: Callable[[np.ndarray], StructureData]
    note: str
    params: dict = field(default_factory=dict)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "n": self.chart.n,
            "m": self.chart.m,
            "params": dict(self.params),
            "note": self.note,
        }


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k] = 1.0
        eps[j, i, k] = -1.0
    return eps


def _data(u, anchor, B) -> StructureData:
    B = np.asarray(B, dtype=float)
    return StructureData(
        np.asarray(u, dtype=float), np.asarray(anchor, dtype=float), B, B - np.transpose(B, (0, 2, 1))
    )


def _pair(dim: int = 1, d: Optional[int] = None) -> GalleryEntry:
    if d is not None:
        dim = d
    if not isinstance(dim, int) or not 1 <= dim <= 8:
        raise ValueError(f"pair dimension must be an integer in 1..8, got {dim!r}")
    sigma = [f"u{i} + v{i}" for i in range(1, dim + 1)]
    p = [f"v{i} + w{i}" for i in range(1, dim + 1)]
    chart = LocalGroupoidChart.from_expressions("pair", dim, dim, sigma, p, 1.0, 1.0)

    def expected(u):
        return _data(u, np.eye(dim), np.zeros((dim, dim, dim)))

    return GalleryEntry("pair", chart, expected, "pair groupoid M x M: anchor = I, c = 0", {"dim": dim})


def _heisenberg() -> GalleryEntry:
    chart = LocalGroupoidChart.from_expressions(
        "heisenberg", 0, 3, [], ["v1 + w1", "v2 + w2", "v3 + w3 + v1*w2"], 1.0, 1.0
    )

    def expected(u):
        B = np.zeros((3, 3, 3))
        B[2, 0, 1] = 1.0
        return _data(u, np.zeros((3, 0)), B)

    return GalleryEntry("heisenberg", chart, expected, "Heisenberg group: [e1, e2] = e3")


def _su2_quaternion() -> GalleryEntry:
    sv = "sqrt(1 - v1^2 - v2^2 - v3^2)"
    sw = "sqrt(1 - w1^2 - w2^2 - w3^2)"
    cross = ["v2*w3 - v3*w2", "v3*w1 - v1*w3", "v1*w2 - v2*w1"]
    p = [f"{sw}*v{k} + {sv}*w{k} + {cross[k - 1]}" for k in (1, 2, 3)]
    chart = LocalGroupoidChart.from_expressions("su2_quaternion", 0, 3, [], p, 1.0, 0.4)

    def expected(u):
        eps = _levi_civita()
        # B[k, i, j] = eps_ijk
        return _data(u, np.zeros((3, 0)), np.transpose(eps, (2, 0, 1)))

    return GalleryEntry("su2_quaternion", chart, expected, "SU(2), quaternion vector part: c = 2 eps")


def _affine_action() -> GalleryEntry:
    chart = LocalGroupoidChart.from_expressions(
        "affine_action", 1, 2, ["exp(v1)*u1 + v2"], ["v1 + w1", "exp(w1)*v2 + w2"], 4.0, 1.0
    )

    def expected(u):
        u = np.asarray(u, dtype=float)
        B = np.zeros((2, 2, 2))
        B[1, 1, 0] = 1.0
        return _data(u, [[u[0]], [1.0]], B)

    return GalleryEntry(
        "affine_action", chart, expected, "R x Aff(R) action groupoid: anchor (u, 1), [e1, e2] = -e2"
    )


def _heisenberg_bundle() -> GalleryEntry:
    chart = LocalGroupoidChart.from_expressions(
        "heisenberg_bundle", 1, 3, ["u1"], ["v1 + w1", "v2 + w2", "v3 + w3 + (1 + u1)*v1*w2"], 1.0, 1.0
    )

    def expected(u):
        u = np.asarray(u, dtype=float)
        B = np.zeros((3, 3, 3))
        B[2, 0, 1] = 1.0 + u[0]
        return _data(u, np.zeros((3, 1)), B)

    return GalleryEntry(
        "heisenberg_bundle", chart, expected, "Heisenberg bundle over R: c_123 = 1 + u, anchor 0"
    )


_BUILDERS = {
    "affine_action": _affine_action,
    "heisenberg": _heisenberg,
    "heisenberg_bundle": _heisenberg_bundle,
    "pair": _pair,
    "su2_quaternion": _su2_quaternion,
}


def list_entries() -> list[str]:
    return sorted(_BUILDERS)


def get_entry(name: str, **params) -> GalleryEntry:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown gallery entry {name!r}; choose from {list_entries()}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name!r}: {params}") from exc


def get_chart(name: str, **params) -> LocalGroupoidChart:
    return get_entry(name, **params).chart
