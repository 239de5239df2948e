import json

import numpy as np
import pytest

from liegroupoid import gallery
from liegroupoid.chart import SamplePlan, eval_prod, read_chart_file, sample_points, write_chart_file
from liegroupoid.structure import bilinear_at, structure_data_at

GALLERY = gallery.list_entries()


def bch_residual(c, u, v, w, t):
    B = bilinear_at(c, u)
    tv, tw = t * v, t * w
    approx = tv + tw + t * t * np.einsum("kij,i,j->k", B, v, w)
    return float(np.abs(eval_prod(c, u, tv, tw) - approx).max())


def test_list():
    assert GALLERY == ["affine_action", "heisenberg", "heisenberg_bundle", "pair", "su2_quaternion"]


def test_pair_parameter():
    assert gallery.get_chart("pair", d=2).n == 2
    assert gallery.get_chart("pair", dim=3).m == 3
    for bad in ({"dim": 0}, {"dim": 9}, {"dim": 1.5}, {"colour": 1}):
        with pytest.raises(ValueError):
            gallery.get_entry("pair", **bad)


def test_unknown_entry():
    with pytest.raises(KeyError):
        gallery.get_entry("klein_bottle")


def test_descriptors():
    for name in GALLERY:
        d = gallery.get_entry(name).describe()
        assert d["name"] == name and {"n", "m", "params", "note"} <= set(d)


def test_heisenberg_unique_base_point():
    sd = structure_data_at(gallery.get_chart("heisenberg"), [])
    assert sd.c[2, 0, 1] == 1.0


def test_affine_anchor_at_two():
    sd = structure_data_at(gallery.get_chart("affine_action"), [2.0])
    assert sd.anchor.tolist() == [[2.0], [1.0]]


@pytest.mark.parametrize("name", GALLERY)
def test_expected_matches_extracted(name):
    entry = gallery.get_entry(name)
    c = entry.chart
    pts = [np.zeros(0)] if c.n == 0 else [u for u, _, _ in sample_points(c, SamplePlan(6, 10))]
    for u in pts:
        got = structure_data_at(c, u)
        want = entry.expected(u)
        assert got.anchor.shape == want.anchor.shape
        assert np.abs(got.anchor - want.anchor).max(initial=0.0) <= 1e-10
        assert np.abs(got.B - want.B).max() <= 1e-10
        assert np.abs(got.c - want.c).max() <= 1e-10


@pytest.mark.parametrize("name", ["su2_quaternion", "affine_action"])
def test_bch_remainder_is_third_order(name):
    c = gallery.get_chart(name)
    rng = np.random.default_rng(12)
    checked = 0
    for _ in range(50):
        u = rng.uniform(-0.5, 0.5, c.n) * c.radius_u
        v, w = rng.uniform(-1, 1, (2, c.m))
        r = [bch_residual(c, u, v, w, t) for t in (0.1, 0.05, 0.025)]
        for a, b in zip(r, r[1:]):
            if a > 1e-13:
                assert b <= a / 6
                checked += 1
    assert checked > 50


@pytest.mark.parametrize("name", ["pair", "heisenberg"])
def test_bch_exact_for_quadratic_products(name):
    c = gallery.get_chart(name)
    rng = np.random.default_rng(13)
    for _ in range(50):
        u = rng.uniform(-0.5, 0.5, c.n)
        v, w = rng.uniform(-1, 1, (2, c.m))
        for t in (0.1, 0.05, 0.025):
            assert bch_residual(c, u, v, w, t) <= 1e-13


@pytest.mark.parametrize("name", GALLERY)
def test_export_import_round_trip(name, tmp_path):
    c = gallery.get_chart(name)
    path = tmp_path / f"{name}.chart"
    write_chart_file(c, path)
    back = read_chart_file(path)
    pts = [np.zeros(0)] if c.n == 0 else [u for u, _, _ in sample_points(c, SamplePlan(2, 5))]
    for u in pts:
        a = json.dumps(structure_data_at(c, u).to_dict(full=True))
        b = json.dumps(structure_data_at(back, u).to_dict(full=True))
        assert a == b
