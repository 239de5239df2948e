import json
import math

import numpy as np
import pytest

from liegroupoid import gallery
from liegroupoid.chart import (
    LocalGroupoidChart,
    SamplePlan,
    eval_prod,
    eval_sigma,
    invert_at,
    read_chart_file,
    sample_points,
    sample_quadruples,
    sigma_jacobian,
    write_chart_file,
)
from liegroupoid.errors import ConvergenceError, OutOfDomainError, ParseError
from liegroupoid.jets import JetSpec, seed_vector
from liegroupoid.structure import bilinear_at

from oracles import affine_compose, heisenberg_coords, unitriangular

GALLERY = gallery.list_entries()


def chart(name, **params):
    return gallery.get_chart(name, **params)


class TestEvaluation:
    def test_pair(self):
        pair = chart("pair")
        assert eval_sigma(pair, [0.3], [0.2]) == pytest.approx([0.5])
        assert eval_prod(pair, [0.0], [0.1], [0.2]) == pytest.approx([0.3])

    def test_lie_group_has_empty_base(self):
        out = eval_sigma(chart("heisenberg"), [], [0.1, 0.2, 0.3])
        assert out.shape == (0,)

    def test_affine_unit(self):
        assert eval_sigma(chart("affine_action"), [2.0], [0.0, 0.0]).tolist() == [2.0]

    def test_heisenberg_product_matches_matrices(self):
        h = chart("heisenberg")
        assert eval_prod(h, [], [1 - 1e-9, 0, 0], [0, 0.5, 0]).tolist() == pytest.approx([1, 0.5, 0.5])
        rng = np.random.default_rng(3)
        for _ in range(20):
            v, w = rng.uniform(-0.9, 0.9, (2, 3))
            want = heisenberg_coords(unitriangular(v) @ unitriangular(w))
            assert np.abs(eval_prod(h, [], v, w) - want).max() <= 1e-15

    def test_affine_product_is_composition(self):
        aff = chart("affine_action")
        # arrow (x, h) goes from h(x) to x; p composes h' after h
        for u, v, w in sample_points(aff, SamplePlan(1, 20)):
            assert eval_sigma(aff, u, v)[0] == pytest.approx(math.exp(v[0]) * u[0] + v[1])
            assert np.allclose(eval_prod(aff, u, v, w), affine_compose(v, w), rtol=0, atol=1e-15)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomainError):
            eval_sigma(chart("pair"), [1.0], [0.0])
        with pytest.raises(OutOfDomainError):
            eval_prod(chart("su2_quaternion"), [], [0.5, 0, 0], [0, 0, 0])
        with pytest.raises(ValueError):
            eval_prod(chart("pair"), [0.0], [0.1, 0.2], [0.0])

    def test_jet_and_plain_agree(self):
        c = chart("su2_quaternion")
        v, w = [0.1, -0.2, 0.15], [0.05, 0.2, -0.1]
        spec = JetSpec(6, 2)
        jet_out = eval_prod(c, [], seed_vector(spec, v, 0), seed_vector(spec, w, 3))
        assert [j.value for j in jet_out] == eval_prod(c, [], v, w).tolist()

    def test_sigma_jacobian(self):
        jac = sigma_jacobian(chart("affine_action"), [0.5], [0.1, -0.2])
        assert jac == pytest.approx(np.array([[math.exp(0.1), math.exp(0.1) * 0.5, 1.0]]))
        assert sigma_jacobian(chart("heisenberg"), [], [0, 0, 0]).shape == (0, 3)


class TestInversion:
    def test_pair_single_iteration(self):
        res = invert_at(chart("pair"), [0.0], [0.4], full_output=True)
        assert res.w.tolist() == [-0.4]
        assert res.iterations == 1

    def test_heisenberg_closed_form(self):
        w = invert_at(chart("heisenberg"), [], [0.1, 0.2, 0.3])
        assert w == pytest.approx([-0.1, -0.2, -0.28], abs=1e-15)
        rng = np.random.default_rng(11)
        for _ in range(50):
            v = rng.uniform(-0.5, 0.5, 3)
            want = np.array([-v[0], -v[1], -v[2] + v[0] * v[1]])
            assert np.abs(invert_at(chart("heisenberg"), [], v) - want).max() <= 1e-13

    def test_affine_closed_form(self):
        w = invert_at(chart("affine_action"), [1.0], [0.2, 0.3])
        assert w == pytest.approx([-0.2, -math.exp(-0.2) * 0.3], abs=1e-15)

    @pytest.mark.parametrize("name", GALLERY)
    def test_two_sided_inverse(self, name):
        c = chart(name)
        for u, v, _ in sample_points(c, SamplePlan(5, 30)):
            w = invert_at(c, u, v)
            assert np.abs(eval_prod(c, u, v, w, check_domain=False)).max() <= 1e-10
            u1 = eval_sigma(c, u, v)
            assert np.abs(eval_prod(c, u1, w, v, check_domain=False)).max() <= 1e-10

    def test_convergence_failure(self):
        c = LocalGroupoidChart.from_expressions("bad", 0, 1, [], ["v1 + w1 + 0.5"], 1.0, 1.0)
        with pytest.raises(ConvergenceError):
            invert_at(c, [], [0.1], max_iterations=1)

    def test_singular_jacobian(self):
        c = LocalGroupoidChart.from_expressions("flat", 0, 1, [], ["v1 + w1^2 + 0.1"], 1.0, 1.0)
        with pytest.raises(ConvergenceError):
            invert_at(c, [], [0.0])


def inverse_expansion_residual(c, u, v):
    w = invert_at(c, u, v)
    B = bilinear_at(c, u)
    return float(np.abs(w - (-v + np.einsum("kij,i,j->k", B, v, v))).max())


def test_inverse_expansion_is_third_order():
    c = chart("affine_action")
    rng = np.random.default_rng(2)
    for _ in range(50):
        u = rng.uniform(-1, 1, 1)
        d = rng.uniform(-1, 1, 2)
        d /= np.abs(d).max()
        r = [inverse_expansion_residual(c, u, t * d) for t in (0.1, 0.05, 0.025)]
        for a, b in zip(r, r[1:]):
            assert b <= a / 6 or a <= 1e-13


class TestSampling:
    def test_deterministic(self):
        c = chart("affine_action")
        a = sample_quadruples(c, SamplePlan(42, 10))
        b = sample_quadruples(c, SamplePlan(42, 10))
        assert all(np.array_equal(x, y) for qa, qb in zip(a, b) for x, y in zip(qa, qb))
        other = sample_quadruples(c, SamplePlan(43, 10))
        assert not np.array_equal(a[0][1], other[0][1])

    def test_bounds_and_count(self):
        c = chart("su2_quaternion")
        plan = SamplePlan(0, 200, 0.5)
        pts = sample_points(c, plan)
        assert len(pts) == 200
        for u, v, w in pts:
            assert u.shape == (0,)
            assert np.abs(v).max() < 0.5 * c.radius_v and np.abs(w).max() < 0.5 * c.radius_v

    def test_empty(self):
        assert sample_points(chart("pair"), SamplePlan(count=0)) == []

    @pytest.mark.parametrize("kwargs", [{"count": -1}, {"shrink": 0.0}, {"shrink": 1.0}])
    def test_invalid_plan(self, kwargs):
        with pytest.raises(ValueError):
            SamplePlan(**kwargs)


class TestChartFiles:
    def test_round_trip(self, tmp_path):
        c = chart("su2_quaternion")
        path = tmp_path / "su2.chart"
        write_chart_file(c, path)
        back = read_chart_file(path)
        assert back.to_dict() == c.to_dict()
        v, w = [0.1, 0.2, -0.1], [0.0, 0.3, 0.1]
        assert eval_prod(back, [], v, w).tobytes() == eval_prod(c, [], v, w).tobytes()

    def test_parse_error_surfaces(self, tmp_path):
        doc = chart("pair").to_dict()
        doc["p"] = ["v1 + q1"]
        path = tmp_path / "bad.chart"
        path.write_text(json.dumps(doc))
        with pytest.raises(ParseError) as info:
            read_chart_file(path)
        assert info.value.offset == 5

    def test_missing_fields(self):
        with pytest.raises(ValueError):
            LocalGroupoidChart.from_dict({"name": "x", "n": 1})

    def test_wrong_counts(self):
        with pytest.raises(ValueError):
            LocalGroupoidChart.from_expressions("x", 1, 1, [], ["v1 + w1"])

    def test_native_chart_has_no_document(self):
        c = LocalGroupoidChart("native", 0, 1, lambda u, v: [], lambda u, v, w: [v[0] + w[0]])
        with pytest.raises(ValueError):
            c.to_dict()
        assert eval_prod(c, [], [0.1], [0.2]) == pytest.approx([0.3])
