"""Characteristic lines of the intrinsic derivative fields and the
Lipschitz-along-curve diagnostics with their explicit constants.

A characteristic of the j-th field moves the coordinate x_j at unit speed
while the vertical block follows

    dgamma_s/dt = b^(s)_{j1} phi(x_j(t), xhat_j, gamma(t))
                  + 1/2 sum_{l} b^(s)_{jl} x_l,

the drift term being constant along the line (b_{jj} = 0).  Trajectories are
integrated with fixed-step RK4; the right-hand side is merely continuous in
general (Peano setting), so a step-halved rerun is reported as the error
estimate instead of any uniqueness claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import LeftDomain, NonFiniteState, ValidationError
from .calculus import frozen_coefficients


@dataclass(frozen=True)
class CharacteristicCurve:
    """Numerically integrated characteristic line with phi sampled along it."""

    j: int
    t_grid: np.ndarray          # uniform times in [0, T] (or truncated)
    base_points: np.ndarray     # (steps+1, m+n-1): full base point per time
    phi_along: np.ndarray
    step: float
    error_estimate: float       # max state discrepancy vs step-halved rerun
    exit_time: float | None = None
    n_vertical: int = field(default=1)

    @property
    def gamma(self):
        """Vertical states along the curve, shape (steps+1, n)."""
        return self.base_points[:, -self.n_vertical:]

    @property
    def truncated(self):
        return self.exit_time is not None


def _rk4_path(G, phi, j, a0, T, steps):
    d = G.base_dim
    n = G.n
    out = np.empty((steps + 1, d))
    out[0] = a0
    h = T / steps
    inside_limit = steps
    for k in range(steps):
        a = out[k]

        def shift(dt, dy):
            b = a.copy()
            b[j - 2] += dt
            b[d - n:] += dy
            return b

        k1 = _vertical_velocity(G, phi, j, a)
        k2 = _vertical_velocity(G, phi, j, shift(0.5 * h, 0.5 * h * k1))
        k3 = _vertical_velocity(G, phi, j, shift(0.5 * h, 0.5 * h * k2))
        k4 = _vertical_velocity(G, phi, j, shift(h, h * k3))
        nxt = shift(h, h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0)
        if not np.all(np.isfinite(nxt)):
            raise NonFiniteState(f"characteristic state became non-finite at step {k}")
        if not phi.in_domain(nxt):
            inside_limit = k
            break
        out[k + 1] = nxt
    return out[:inside_limit + 1], h, inside_limit


def _vertical_velocity(G, phi, j, base):
    # identical to the frozen-direction coefficients of D_j
    return frozen_coefficients(G, phi, j, base)


def integrate_characteristic(G, phi, j, a0, T, steps=1000):
    """Fixed-step RK4 characteristic from base point a0 over [0, T].

    A rerun with halved step supplies ``error_estimate`` (max discrepancy at
    shared times).  If the trajectory leaves the domain box it is truncated
    and the exit time recorded rather than extrapolated; a start point
    outside the domain raises :class:`LeftDomain`.
    """
    if T <= 0:
        raise ValidationError("need T > 0")
    if steps < 8:
        raise ValidationError("need at least 8 RK4 steps")
    a0 = np.asarray(a0, dtype=float)
    if a0.shape != (G.base_dim,):
        raise ValidationError(
            f"start point must have length m+n-1 = {G.base_dim}, got {a0.shape}")
    if not phi.in_domain(a0):
        raise LeftDomain("characteristic start point lies outside the domain")
    path, h, used = _rk4_path(G, phi, j, a0, T, steps)
    if used == 0:
        raise LeftDomain("trajectory exits the domain box within the first step")
    fine, _, used_fine = _rk4_path(G, phi, j, a0, T, 2 * steps)
    shared = min(used, (used_fine // 2))
    err = float(np.max(np.abs(path[:shared + 1, G.m - 1:]
                              - fine[:2 * shared + 1:2, G.m - 1:]))) if shared else 0.0
    t_grid = h * np.arange(path.shape[0])
    exit_time = None if used == steps else float(t_grid[-1])
    return CharacteristicCurve(
        j=j, t_grid=t_grid, base_points=path,
        phi_along=np.asarray(phi.eval_extended(path)),
        step=h, error_estimate=err, exit_time=exit_time, n_vertical=G.n)


def flux_values(G, j, xhat, phi_values):
    """Conserved fluxes f_s(phi) = (b^(s)_{j1} phi^2 + phi sum_l b^(s)_{jl} x_l)/2."""
    xhat = np.asarray(xhat, dtype=float)
    phi_values = np.asarray(phi_values, dtype=float)
    col = G.B[:, j - 1, 0]
    drift = np.einsum("si,...i->...s", G.B[:, j - 1, 1:], xhat)
    return 0.5 * (col * phi_values[..., None] ** 2
                  + phi_values[..., None] * drift)


def broadstar_residual(curve, phi, w_j):
    """max_t | phi(gamma(t)) - phi(gamma(0)) - int_0^t w_j(gamma(r)) dr |,
    the integral by composite Simpson on the curve's uniform time grid."""
    vals = np.asarray(w_j(curve.base_points), dtype=float)
    integral = cumulative_simpson(vals, x=curve.t_grid, initial=0.0)
    lhs = curve.phi_along - curve.phi_along[0]
    return float(np.max(np.abs(lhs - integral)))


def _pairwise_sup_slope(t, v, decimate=10):
    """sup |v(t2) - v(t1)| / (t2 - t1): adjacent pairs plus a decimated
    all-pairs sweep (adjacent pairs dominate for smooth data)."""
    dt = np.diff(t)
    keep = dt > 0
    best = float(np.max(np.abs(np.diff(v))[keep] / dt[keep])) if np.any(keep) else 0.0
    ts = t[::decimate]
    vs = v[::decimate]
    if len(ts) > 1:
        dtm = ts[None, :] - ts[:, None]
        dvm = vs[None, :] - vs[:, None]
        sel = dtm > 0
        best = max(best, float(np.max(np.abs(dvm[sel]) / dtm[sel])))
    return best


def sup_w_estimate(G, phi, w_j, curve, per_axis=5, inflation=1.05):
    """||w_j||_inf over the curve's bounding box: sampled max over the curve
    points plus a coarse box grid, inflated by 5% (an essential sup cannot
    be computed exactly)."""
    pts = curve.base_points
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    axes = [np.linspace(lo[i], hi[i], per_axis) if hi[i] > lo[i]
            else np.array([lo[i]]) for i in range(pts.shape[1])]
    mesh = np.meshgrid(*axes, indexing="ij")
    box_pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    allpts = np.concatenate([pts, box_pts], axis=0)
    return inflation * float(np.max(np.abs(w_j(allpts))))


def _curve_holder_constant(G, phi, curve):
    """Vertical Hoelder modulus of phi over the curve's bounding box."""
    from .functions import Box, GraphFunction
    from .splitting import vertical_holder_modulus

    pts = curve.base_points
    lo = pts.min(axis=0) - 1e-9
    hi = pts.max(axis=0) + 1e-9
    view = GraphFunction.from_callable(phi.eval_extended, Box(lo, hi))
    r_max = float(np.linalg.norm(hi[G.m - 1:] - lo[G.m - 1:])) + 1e-9
    table = vertical_holder_modulus(view, [r_max], grid_per_axis=9,
                                    n_vertical=G.n)
    return max(mod for _, mod in table)


def lipschitz_along_curve(G, curve, phi, w_j=None, holder_constant=None):
    """Measured Lipschitz constant of phi along the curve and the explicit
    bound ||w_j||_inf + (1 + sqrt 2)/2 * C_h^2 * sum_s |b^(s)_{j1}|.

    ``w_j`` defaults to the j-th intrinsic derivative of phi and the
    Hoelder constant to the sampled vertical modulus over the curve's
    bounding box; both can be supplied when sharper values are known.  The
    bound is proved for two vertical directions; for general n the sum over
    all s is the direct extension and is flagged as extrapolated.
    """
    if w_j is None:
        from .calculus import intrinsic_derivative

        def w_j(pts):
            return intrinsic_derivative(G, phi, curve.j, pts, check_domain=False)

    if holder_constant is None:
        holder_constant = _curve_holder_constant(G, phi, curve)
    measured = _pairwise_sup_slope(curve.t_grid, curve.phi_along)
    w_inf = sup_w_estimate(G, phi, w_j, curve)
    col_sum = float(np.sum(np.abs(G.B[:, curve.j - 1, 0])))
    bound = w_inf + (1.0 + np.sqrt(2.0)) / 2.0 * holder_constant ** 2 * col_sum
    return {
        "measured": measured,
        "bound": bound,
        "w_inf": w_inf,
        "holder_constant": holder_constant,
        "bound_is_extrapolated": G.n > 2,
    }


def curve_graph_speed_bound(G, c1, C_L):
    """Constant chain bounding the graph quasi-distance along unit-speed
    characteristics: qd(gamma(t1), gamma(t)) <= C1 (t - t1) with

        M1 = c1 (m-1) (2 + C_L B_M n^2)
        C1 = M2 = 2 [M1 + 8 c1^2 n^2 (m-1) B_M C_L + sqrt(2 B_M) c1 n (m-1)].
    """
    m, n, bm = G.m, G.n, G.b_max
    M1 = c1 * (m - 1) * (2.0 + C_L * bm * n ** 2)
    return 2.0 * (M1 + 8.0 * c1 ** 2 * n ** 2 * (m - 1) * bm * C_L
                  + np.sqrt(2.0 * bm) * c1 * n * (m - 1))


def phi_along_curve_lipschitz_vs_intrinsic(G, curve, phi, C_L=None):
    """Check the quasi-distance growth bound along a characteristic and the
    induced Lipschitz bound |phi(gamma(t)) - phi(gamma(t1))| <= C_L C1 (t-t1).

    ``C_L`` defaults to the sampled intrinsic Lipschitz estimate of phi.
    Returns measured slopes and the bound C1 computed from the norm
    equivalence constant c1 = 1 + 1/eps (exact for the max-norm).
    """
    from .splitting import estimate_intrinsic_lipschitz, graph_quasidistance

    if C_L is None:
        C_L = estimate_intrinsic_lipschitz(G, phi)
    c1 = 1.0 + 1.0 / G.epsilon
    C1 = curve_graph_speed_bound(G, c1, C_L)
    t = curve.t_grid
    pts = curve.base_points
    stride = max(1, len(t) // 40)
    anchors = range(0, len(t) - 1, stride)
    qd_slope = 0.0
    for i in anchors:
        later = pts[i + 1::stride]
        dts = t[i + 1::stride] - t[i]
        qd = graph_quasidistance(G, phi, np.broadcast_to(pts[i], later.shape),
                                 later, check_domain=False)
        qd_slope = max(qd_slope, float(np.max(qd / dts)))
    phi_slope = _pairwise_sup_slope(t, curve.phi_along)
    return {
        "quasidistance_slope": qd_slope,
        "quasidistance_bound": C1,
        "phi_slope": phi_slope,
        "phi_bound": C_L * C1,
    }


def conservation_residual(G, curve, phi, w_j):
    """Max mismatch of d/dt f_s(phi(gamma(t))) against gamma_dot_s * w_j
    along the curve, centered differences at interior grid times."""
    f = flux_values(G, curve.j, _xhat_with_moving(G, curve), curve.phi_along)
    t = curve.t_grid
    dfdt = (f[2:] - f[:-2]) / (t[2:] - t[:-2])[:, None]
    vel = _vertical_velocity(G, phi, curve.j, curve.base_points[1:-1])
    w_vals = np.asarray(w_j(curve.base_points[1:-1]), dtype=float)
    return float(np.max(np.abs(dfdt - vel * w_vals[:, None])))


def _xhat_with_moving(G, curve):
    """Full x-block along the curve (the flux drift ignores the moving
    coordinate anyway because b_{jj} = 0)."""
    return curve.base_points[:, :G.m - 1]
