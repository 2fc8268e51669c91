"""The codimension-1 splitting G = W * V, intrinsic graphs and cones.

V is the one-dimensional horizontal x1-axis and W the complementary normal
subgroup {x1 = 0}, identified with R^(m+n-1) through the inclusion
i(x2..xm, y1..yn) = (0, x2..xm, y1..yn).  This module provides the exact
projections, graph maps, intrinsic translations, the graph quasi-distance
and its coordinate form, and the sampled diagnostics (intrinsic Lipschitz
estimate, vertical Hoelder modulus) built from them.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import group as gp
from .errors import (
    DegenerateSample,
    DimensionMismatch,
    OutOfDomain,
    ValidationError,
)
from .functions import Box, GraphFunction

# Pairs whose quasi-distance falls below this are skipped in ratio estimates
# (the a = b limit), not reported as errors.
QUASIDISTANCE_FLOOR = 1e-14


def embed_base(G, a):
    """i(a): insert the zero graph coordinate, landing in W."""
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != G.base_dim:
        raise DimensionMismatch(
            f"expected base points of length {G.base_dim}, got {a.shape}")
    zero = np.zeros(a.shape[:-1] + (1,))
    return np.concatenate([zero, a], axis=-1)


def base_coordinates(G, p_w):
    """Inverse of :func:`embed_base` on points of W (drops the zero x1)."""
    p_w = np.asarray(p_w, dtype=float)
    return p_w[..., 1:]


def lift_graph_value(G, t):
    """(t, 0, ..., 0): the V-component with graph coordinate t."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (G.dim,))
    out[..., 0] = t
    return out


def project_splitting(G, p):
    """Split p = p_W * p_V; returns (base coordinates of p_W, graph coordinate).

    p_V = (x1, 0...) and p_W = (x - x1 e1, y - x1/2 <B x, e1>); the
    recomposition multiply(p_W, p_V) returns p exactly.
    """
    x, y = gp.split_layers(G, p)
    t = x[..., 0]
    x_w = x.copy()
    x_w[..., 0] = 0.0
    # s-vector <B^(s) x, e1> = (B^(s) x)_1
    corr = np.einsum("sj,...j->...s", G.B[:, 0, :], x)
    y_w = y - 0.5 * t[..., None] * corr
    return np.concatenate([x_w[..., 1:], y_w], axis=-1), t


def graph_map(G, phi, a, check_domain=True):
    """Graph point Phi(a) = i(a) * (phi(a), 0, ..., 0)."""
    a = np.asarray(a, dtype=float)
    values = phi(a) if check_domain else phi.eval_extended(a)
    return gp.multiply(G, embed_base(G, a), lift_graph_value(G, values))


def translate_graph_function(G, phi, q):
    """Evaluator for the translated function: q * graph(phi) = graph(phi_q).

    phi_q(a) = phi(P_W(q^-1 i(a))) - t(q^-1 i(a)) on the set where the
    projected base point lies in phi's domain.  The x-hat part of the
    translated domain is an exact box; the y-part is tracked by the exact
    membership predicate.
    """
    q = np.asarray(q, dtype=float)
    q_inv = gp.inverse(G, q)

    def pulled_base(a):
        g = gp.multiply(G, q_inv, embed_base(G, a))
        return project_splitting(G, g)

    def evaluate(a):
        b, t = pulled_base(a)
        return phi.eval_extended(b) - t

    def mask(a):
        b, _ = pulled_base(a)
        return phi.in_domain(b)

    # bounding box of the translated domain: the x-hat block shifts exactly
    # by q's first layer; the pulled-back vertical block is a_y plus an
    # affine function of a_xhat, so its extremes sit at the x-hat corners.
    shift_x = q[1:G.m]
    lo = phi.domain.lo.copy()
    hi = phi.domain.hi.copy()
    lo[:G.m - 1] += shift_x
    hi[:G.m - 1] += shift_x
    corners_01 = np.stack(np.meshgrid(*[[0.0, 1.0]] * (G.m - 1),
                                      indexing="ij"), axis=-1).reshape(-1, G.m - 1)
    corners = lo[:G.m - 1] + corners_01 * (hi[:G.m - 1] - lo[:G.m - 1])
    probe = np.concatenate([corners, np.zeros((len(corners), G.n))], axis=-1)
    g_corr, _ = pulled_base(probe)           # vertical part = affine correction
    g_y = g_corr[:, G.m - 1:]
    lo[G.m - 1:] -= np.max(g_y, axis=0)
    hi[G.m - 1:] -= np.min(g_y, axis=0)
    return GraphFunction.from_callable(evaluate, Box(lo, hi), mask=mask,
                                       label=f"translate({phi.label})")


@dataclass(frozen=True)
class Cone:
    """Intrinsic cone with vertex q and opening beta:
    {p : ||P_W(q^-1 p)|| <= beta ||P_V(q^-1 p)||}."""

    vertex: np.ndarray
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "vertex", np.asarray(self.vertex, dtype=float))
        if self.beta < 0:
            raise ValidationError("cone opening beta must be >= 0")


def cone_membership(G, cone, p):
    """Membership test; on the axis P_W = 0 every opening qualifies."""
    g = gp.multiply(G, gp.inverse(G, cone.vertex), p)
    b, t = project_splitting(G, g)
    w_norm = gp.homogeneous_norm(G, embed_base(G, b))
    return w_norm <= cone.beta * np.abs(t)


def graph_quasidistance(G, phi, a, b, check_domain=True):
    """|| phi(a)^-1 i(a)^-1 i(b) phi(a) || computed by group operations."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if check_domain:
        ok = phi.in_domain(a) & phi.in_domain(b)
        if not np.all(ok):
            raise OutOfDomain("quasi-distance arguments outside domain")
    v = lift_graph_value(G, phi.eval_extended(a))
    v_inv = gp.inverse(G, v)
    ia_inv = gp.inverse(G, embed_base(G, a))
    g = gp.multiply(G, gp.multiply(G, v_inv, ia_inv),
                    gp.multiply(G, embed_base(G, b), v))
    return gp.homogeneous_norm(G, g)


def sigma_form(G, phi, b, a):
    """Coordinate quasi-distance form sigma_phi(b, a): the sum over vertical
    components of |y_s - y'_s + phi(b) sum_l (x_l - x'_l) b^(s)_{1l}
    - 1/2 <B^(s) x', x>|^(1/2), with a = (x, y), b = (x', y') and first-layer
    vectors embedded with x1 = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    xa = embed_base(G, a)[..., :G.m]
    xb = embed_base(G, b)[..., :G.m]
    ya = a[..., G.m - 1:]
    yb = b[..., G.m - 1:]
    phib = phi.eval_extended(b)
    row1 = G.B[:, 0, :]                       # b^(s)_{1l}
    lin = np.einsum("sl,...l->...s", row1, xa - xb)
    cross = gp.bracket(G, xb, xa)             # <B^(s) x', x>
    inner = ya - yb + phib[..., None] * lin - 0.5 * cross
    return np.sum(np.sqrt(np.abs(inner)), axis=-1)


def _grid_points(box, per_axis):
    axes = [np.linspace(box.lo[i], box.hi[i], per_axis) for i in range(box.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def estimate_intrinsic_lipschitz(G, phi, pair_samples=10_000, seed=0):
    """Lower bound for the intrinsic Lipschitz constant:
    sup over sampled pairs of |phi(b) - phi(a)| / quasidistance(a, b).

    Pairs: all pairs of a uniform grid (capped at ``pair_samples``), then
    uniform random pairs up to the requested count; deterministic in ``seed``.
    Pairs with quasi-distance below the floor are skipped (a = b limit).
    """
    box = phi.domain
    # grid sized so the all-pairs count stays within the pair budget
    target_points = max(2, int((2.0 * pair_samples) ** 0.5))
    per_axis = max(2, int(target_points ** (1.0 / box.dim)))
    pts = _grid_points(box, per_axis)
    idx = np.array(list(combinations(range(len(pts)), 2)))
    if len(idx) > pair_samples:
        idx = idx[:pair_samples]
    a = pts[idx[:, 0]]
    b = pts[idx[:, 1]]
    extra = pair_samples - len(idx)
    if extra > 0:
        rng = np.random.default_rng(seed)
        a = np.concatenate([a, box.sample(extra, rng)])
        b = np.concatenate([b, box.sample(extra, rng)])
    qd = graph_quasidistance(G, phi, a, b, check_domain=False)
    dphi = np.abs(phi.eval_extended(b) - phi.eval_extended(a))
    keep = qd > QUASIDISTANCE_FLOOR
    if not np.any(keep):
        raise DegenerateSample("all sampled pairs coincide")
    return float(np.max(dphi[keep] / qd[keep]))


def vertical_holder_modulus(phi, r_list, grid_per_axis=None, n_vertical=1):
    """Per-radius vertical 1/2-Hoelder moduli.

    For each r: sup over same-x pairs with 0 < |y' - y| <= r of
    |phi(x, y') - phi(x, y)| / |y' - y|^(1/2), over a uniform grid in the
    domain box whose trailing ``n_vertical`` axes are the vertical block.
    The table is nondecreasing in r; "little" Hoelder behavior shows as
    modulus -> 0 with r.  Returns a list of (r, modulus), decreasing r.
    """
    box = phi.domain
    d = box.dim
    if grid_per_axis is None:
        grid_per_axis = max(4, int(round(10_000 ** (1.0 / d))))
    pts = _grid_points(box, grid_per_axis)
    shape = (grid_per_axis,) * d
    vals = phi.eval_extended(pts).reshape(shape)
    y_shape = shape[d - n_vertical:]
    y_axes = [np.linspace(box.lo[d - n_vertical + i], box.hi[d - n_vertical + i],
                          y_shape[i]) for i in range(n_vertical)]
    y_mesh = np.meshgrid(*y_axes, indexing="ij")
    y_pts = np.stack([m.reshape(-1) for m in y_mesh], axis=-1)
    vals = vals.reshape(-1, y_pts.shape[0])         # (x-slices, y-points)
    dy = np.linalg.norm(y_pts[:, None, :] - y_pts[None, :, :], axis=-1)
    dv = np.abs(vals[:, :, None] - vals[:, None, :])
    out = []
    for r in sorted(r_list, reverse=True):
        # relative slack so grid spacings equal to r are not lost to rounding
        sel = (dy > 0) & (dy <= r * (1.0 + 1e-9))
        if not np.any(sel):
            out.append((float(r), 0.0))
            continue
        ratio = dv[:, sel] / np.sqrt(dy[sel])[None, :]
        out.append((float(r), float(np.max(ratio))))
    return out
