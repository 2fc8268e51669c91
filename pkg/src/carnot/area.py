"""Unit normal of the intrinsic subgraph and the graph area integral.

The subgraph E collects the points strictly below the graph in the graph
coordinate; its inward unit normal along the graph is
(-1, w) / sqrt(1 + |w|^2) with w the intrinsic gradient, and the surface
content of the graph over the base domain is int sqrt(1 + |w|^2).  The
group constants relating this integral to the perimeter and to spherical
Hausdorff measure are never computed; all outputs are normalized to the
area integral itself.
"""

from __future__ import annotations

import numpy as np

from .calculus import intrinsic_gradient
from .errors import OutOfDomain
from .quadrature import QuadratureGrid, default_points_per_axis, richardson_order
from .splitting import project_splitting


def unit_normal(w_at_a):
    """(-1, w) / sqrt(1 + |w|^2): unit Euclidean norm, negative first entry."""
    w = np.atleast_1d(np.asarray(w_at_a, dtype=float))
    denom = np.sqrt(1.0 + np.sum(w * w, axis=-1))
    first = -1.0 / denom
    rest = w / denom[..., None]
    return np.concatenate([first[..., None], rest], axis=-1)


def area_integrand(w_values):
    return np.sqrt(1.0 + np.sum(np.asarray(w_values, dtype=float) ** 2, axis=-1))


def area_integral(G, phi, w=None, grid=None, points_per_axis=None):
    """Quadrature of sqrt(1 + |w|^2) over the base domain.

    ``w`` may be a vector field; when omitted the intrinsic gradient of phi
    is evaluated on the grid (analytic partials or central differences).
    The value equals the graph perimeter up to an uncomputed group constant.
    """
    box = phi.domain
    if grid is None:
        k = points_per_axis or default_points_per_axis(box.dim)
        grid = QuadratureGrid(box.lo, box.hi, (k,) * box.dim)
    pts = grid.points()
    w_vals = w(pts) if w is not None else intrinsic_gradient(G, phi, pts)
    return grid.integrate(area_integrand(w_vals))


def area_report(G, phi, w=None, points_per_axis=None, refinements=2):
    """Area integral plus an observed convergence order from grid halving."""
    box = phi.domain
    k = points_per_axis or default_points_per_axis(box.dim)
    grids = [QuadratureGrid(box.lo, box.hi, (k * 2 ** i,) * box.dim)
             for i in range(refinements + 1)]
    values = [area_integral(G, phi, w=w, grid=g) for g in grids]
    order = richardson_order(*values[-3:]) if len(values) >= 3 else None
    if order is not None and not np.isfinite(order):
        order = None        # differences at rounding floor: order undefined
    return {
        "area_integral": values[-1],
        "values": values,
        "grids": [g.shape[0] for g in grids],
        "estimated_order": order,
    }


def subgraph_indicator(G, phi, p):
    """1 when the point lies strictly below the graph, else 0."""
    base, t = project_splitting(G, p)
    inside = phi.in_domain(base)
    if not np.all(inside):
        raise OutOfDomain("projected base point outside the graph domain")
    return (t < phi.eval_extended(base)).astype(float)


def subgraph_indicator_extended(G, phi, p):
    """Indicator with the graph function extended beyond its box (expressions
    evaluate directly, grids clamp); used by the mollification pipeline."""
    base, t = project_splitting(G, p)
    return (t < phi.eval_extended(base)).astype(float)
