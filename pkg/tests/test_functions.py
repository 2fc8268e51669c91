import json

import numpy as np
import pytest

from carnot import errors
from carnot.functions import (
    Box,
    GraphFunction,
    graph_function_from_dict,
    load_graph_function,
    vector_field_from_dict,
)
from carnot.quadrature import QuadratureGrid, richardson_order

from conftest import unit_box


def test_expression_evaluation_and_partials():
    phi = GraphFunction.from_expression("sin(x2)*y + x2**2", unit_box(2), 2, 1)
    a = np.array([[0.3, -0.4], [0.0, 1.0]])
    vals = phi(a)
    assert vals[0] == pytest.approx(np.sin(0.3) * -0.4 + 0.09)
    grads = phi.partials(a)
    assert grads[0, 0] == pytest.approx(np.cos(0.3) * -0.4 + 0.6)
    assert grads[0, 1] == pytest.approx(np.sin(0.3))


def test_expression_y_alias():
    p1 = GraphFunction.from_expression("y", unit_box(2), 2, 1)
    p2 = GraphFunction.from_expression("y1", unit_box(2), 2, 1)
    a = np.array([[0.5, -0.25]])
    assert p1(a) == pytest.approx(p2(a))


def test_expression_rejects_unknown_symbols():
    with pytest.raises(errors.ValidationError):
        GraphFunction.from_expression("x2 + q", unit_box(2), 2, 1)
    with pytest.raises(errors.ValidationError):
        GraphFunction.from_expression("x2 +* 1", unit_box(2), 2, 1)


def test_constant_broadcasting():
    phi = GraphFunction.constant(2.5, unit_box(3))
    a = np.zeros((4, 5, 3))
    assert phi(a).shape == (4, 5)
    assert np.all(phi(a) == 2.5)


def test_grid_multilinear_interpolation():
    # multilinear interpolation is exact on multilinear data
    box = Box([0.0, 0.0], [1.0, 2.0])
    xs = np.linspace(0, 1, 9)
    ys = np.linspace(0, 2, 11)
    vals = 1.0 + 2.0 * xs[:, None] + 0.5 * ys[None, :] + 3.0 * xs[:, None] * ys[None, :]
    phi = GraphFunction.from_grid(vals, box)
    rng = np.random.default_rng(137)
    a = box.sample(200, rng)
    expected = 1.0 + 2.0 * a[:, 0] + 0.5 * a[:, 1] + 3.0 * a[:, 0] * a[:, 1]
    assert np.allclose(phi(a), expected, atol=1e-12)


def test_grid_clamped_extension():
    box = unit_box(2)
    vals = np.ones((5, 5))
    phi = GraphFunction.from_grid(vals, box)
    assert phi.eval_extended(np.array([3.0, -7.0])) == pytest.approx(1.0)
    with pytest.raises(errors.OutOfDomain):
        phi(np.array([3.0, -7.0]))


def test_grid_interpolation_error_order():
    # sup error of multilinear interpolation is O(h^2) on smooth data
    box = unit_box(2)
    f = lambda x, y: np.sin(2 * x) * np.cos(y)
    errs = []
    for k in (17, 33, 65):
        xs = np.linspace(-1, 1, k)
        phi = GraphFunction.from_grid(f(xs[:, None], xs[None, :]), box)
        rng = np.random.default_rng(1)
        a = box.sample(3000, rng)
        errs.append(np.max(np.abs(phi(a) - f(a[:, 0], a[:, 1]))))
    assert errs[0] / errs[1] >= 3.0
    assert errs[1] / errs[2] >= 3.0


def test_function_json_roundtrip(tmp_path, heis1):
    spec = {"kind": "expr", "domain": {"lo": [-1, -1], "hi": [1, 1]},
            "expr": "x2*y"}
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(spec))
    phi = load_graph_function(path, heis1)
    assert phi(np.array([[0.5, 0.5]]))[0] == pytest.approx(0.25)


def test_function_json_grid(tmp_path, heis1):
    values = np.linspace(0, 1, 12).reshape(3, 4)
    csv = tmp_path / "vals.csv"
    np.savetxt(csv, values.reshape(-1), delimiter=",")
    spec = {"kind": "grid", "domain": {"lo": [0, 0], "hi": [1, 1]},
            "grid": {"shape": [3, 4], "values": "vals.csv"}}
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(spec))
    phi = load_graph_function(path, heis1)
    assert phi(np.array([[0.0, 0.0]]))[0] == pytest.approx(values[0, 0])
    assert phi(np.array([[1.0, 1.0]]))[0] == pytest.approx(values[-1, -1])


def test_function_json_errors(heis1):
    with pytest.raises(errors.ValidationError):
        graph_function_from_dict({"kind": "expr",
                                  "domain": {"lo": [0], "hi": [1]}}, heis1)
    with pytest.raises(errors.ValidationError):
        graph_function_from_dict({"kind": "spline",
                                  "domain": {"lo": [0, 0], "hi": [1, 1]},
                                  "expr": "x2"}, heis1)


def test_vector_field_dict(heis1, free3):
    w = vector_field_from_dict(
        {"kind": "expr", "domain": {"lo": [-1, -1], "hi": [1, 1]}, "expr": "1"},
        heis1)
    assert len(w) == 1
    spec = {"components": [
        {"kind": "expr", "domain": {"lo": [-1] * 5, "hi": [1] * 5}, "expr": "x2"},
        {"kind": "expr", "domain": {"lo": [-1] * 5, "hi": [1] * 5}, "expr": "y2"},
    ]}
    w3 = vector_field_from_dict(spec, free3)
    assert len(w3) == 2
    with pytest.raises(errors.DimensionMismatch):
        vector_field_from_dict(
            {"kind": "expr", "domain": {"lo": [-1] * 5, "hi": [1] * 5},
             "expr": "x2"}, free3)


def test_quadrature_grid_basics():
    grid = QuadratureGrid([0.0, 0.0], [1.0, 2.0], (4, 8))
    assert grid.cell_volume == pytest.approx(0.0625)
    pts = grid.points()
    assert pts.shape == (32, 2)
    assert grid.integrate(np.ones(32)) == pytest.approx(2.0)
    fine = grid.refine()
    assert fine.shape == (8, 16)


def test_quadrature_midpoint_order():
    vals = []
    for k in (16, 32, 64):
        grid = QuadratureGrid([0.0], [1.0], (k,))
        vals.append(grid.integrate_function(lambda p: np.exp(p[:, 0])))
    order = richardson_order(*vals)
    assert order == pytest.approx(2.0, abs=0.1)


def test_quadrature_validation():
    with pytest.raises(errors.ValidationError):
        QuadratureGrid([0.0], [0.0], (4,))
