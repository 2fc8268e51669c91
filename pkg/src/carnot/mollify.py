"""Smooth approximation of intrinsic Lipschitz graphs by group convolution.

Pipeline: mollify the subgraph indicator with a symmetric smooth kernel
supported in the homogeneous ball of radius alpha,

    f_alpha(p) = int rho_alpha(u) chi_E(u^{-1} p) du,

extract the level set {f_alpha = c} as a graph over the base (the section
t -> f_alpha(i(a) * (t e1)) is monotone), and report the measured
convergence rate sup|phi_alpha - phi| / alpha together with the intrinsic
gradient bound of the approximants.

Numerical notes.  The kernel integral uses a fixed midpoint grid on the
kernel support; the indicator is replaced per node by a subcell volume
fraction (clipped linear ramp over one grid cell), the standard second-order
level-set treatment.  This keeps f_alpha continuous in p, so that the
level-set bisection and the frame-directional finite differences behave.
The kernel is normalized so the dilated family integrates to one; beyond
its box the graph function is evaluated by analytic/clamped extension so
lateral domain edges do not bias the convolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from . import group as gp
from .calculus import intrinsic_gradient
from .errors import (
    BracketFailure,
    DegenerateHorizontalGradient,
    QuadratureUnderflow,
    ValidationError,
)
from .splitting import embed_base, lift_graph_value

_MAX_BISECTION_ITERS = 200
_BATCH_OPS_LIMIT = 2 ** 21


def _bump(t):
    """exp(-1/(1-t)) on t < 1, extended by zero; smooth on the real line."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = t < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside]))
    return out


def _radial_mass(dim):
    """int_{R^dim} exp(-1/(1-|x|^2)) dx via the radial representation."""
    surface = 2.0 * np.pi ** (dim / 2.0) / gamma_fn(dim / 2.0)
    val, _ = quad(lambda r: _bump(r * r) * r ** (dim - 1), 0.0, 1.0, limit=200)
    return surface * val


@dataclass
class MollifierKernel:
    """Symmetric smooth kernel on the homogeneous ball of radius alpha.

    Unit-ball profile rho(x, y) = C exp(-1/(1-|x|^2)) exp(-1/(1-eps^4|y|^2)),
    dilated by (x, y) -> (x/a, y/a^2); rho(-p) = rho(p) because both factors
    are even, and the support is exactly {max(|x|, eps |y|^(1/2)) < a}.
    ``points_per_axis`` fixes the midpoint quadrature grid on the support
    box [-a, a]^m x [-a^2/eps^2, a^2/eps^2]^n.
    """

    G: object
    alpha: float
    points_per_axis: int = 16
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    raw_mass: float = field(init=False)
    normalizer: float = field(init=False)
    subcell_width: float = field(init=False)

    def __post_init__(self):
        G = self.G
        a = float(self.alpha)
        k = int(self.points_per_axis)
        if a <= 0:
            raise ValidationError("alpha must be positive")
        if k < 4:
            raise QuadratureUnderflow(
                f"kernel needs at least 4 points per axis, got {k}")
        y_half = a * a / G.epsilon ** 2
        half = np.array([a] * G.m + [y_half] * G.n)
        axes = [(-h + (np.arange(k) + 0.5) * (2.0 * h / k)) for h in half]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        cell = float(np.prod(2.0 * half / k))
        # continuum normalizer: the profile factorizes into two radial bumps
        z = _radial_mass(G.m) * _radial_mass(G.n) / G.epsilon ** (2 * G.n)
        rho = self._profile(nodes) / z / a ** G.homogeneous_dimension
        raw = rho * cell
        self.raw_mass = float(np.sum(raw))
        # normalized discrete weights: deep-inside convolutions evaluate to 1
        self.weights = raw / self.raw_mass
        self.nodes = nodes
        self.normalizer = 1.0 / z
        self.subcell_width = 2.0 * a / k

    def _profile(self, p):
        """Unnormalized profile of rho(delta_{1/alpha} p)."""
        G, a = self.G, self.alpha
        x = p[..., :G.m] / a
        y = p[..., G.m:] / a ** 2
        return _bump(np.sum(x * x, axis=-1)) * \
            _bump(G.epsilon ** 4 * np.sum(y * y, axis=-1))

    def mass(self, points_per_axis=48):
        """Integral of rho_alpha on an independent grid (should be ~1).

        The profile factorizes into horizontal and vertical bumps, so the
        two blocks are integrated on separate tensor grids.
        """
        G, a = self.G, self.alpha

        def block(dim, half, scale):
            axes = [(-half + (np.arange(points_per_axis) + 0.5)
                     * (2.0 * half / points_per_axis))] * dim
            mesh = np.meshgrid(*axes, indexing="ij")
            pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
            cell = (2.0 * half / points_per_axis) ** dim
            return float(np.sum(_bump(scale * np.sum(pts * pts, axis=-1))) * cell)

        ix = block(G.m, a, 1.0 / a ** 2)
        iy = block(G.n, a * a / G.epsilon ** 2, G.epsilon ** 4 / a ** 4)
        return ix * iy * self.normalizer / a ** G.homogeneous_dimension


def mollified_indicator(G, phi, kernel, p):
    """f_alpha at point(s) p: the group convolution of the subgraph
    indicator, in [0, 1], nonincreasing in the graph coordinate."""
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    P = np.atleast_2d(p)
    out = _f_alpha_batch(G, phi, kernel, P)
    return float(out[0]) if single else out


def _f_alpha_batch(G, phi, kernel, P):
    """Vectorized f_alpha over a (B, m+n) point array."""
    m, n = G.m, G.n
    B = P.shape[0]
    U = kernel.nodes
    W = kernel.weights
    delta = kernel.subcell_width
    out = np.zeros(B)
    chunk = max(1, _BATCH_OPS_LIMIT // max(B, 1))
    px, py = P[:, :m], P[:, m:]
    row1 = G.B[:, 0, :]
    for start in range(0, U.shape[0], chunk):
        u = U[start:start + chunk]
        w = W[start:start + chunk]
        ux, uy = u[:, :m], u[:, m:]
        # v = u^{-1} p : first layer p1 - u1, second p2 - u2 - <B u1, p1>/2
        vx = px[:, None, :] - ux[None, :, :]
        br = np.einsum("sij,kj,bi->bks", G.B, ux, px)
        vy = py[:, None, :] - uy[None, :, :] - 0.5 * br
        # split: graph coordinate and base point of v
        t = vx[..., 0]
        corr = np.einsum("sj,bkj->bks", row1, vx)
        base = np.concatenate([vx[..., 1:], vy - 0.5 * t[..., None] * corr],
                              axis=-1)
        g = phi.eval_extended(base) - t
        frac = np.clip(0.5 + g / delta, 0.0, 1.0)
        out += frac @ w
    return out


def horizontal_gradient_mollified(G, phi, kernel, p, fd_step=None):
    """(X_1 f_alpha, ..., X_m f_alpha) at p by frame-directional central
    differences: X_j f(p) ~ [f(p * (h e_j)) - f(p * (-h e_j))] / 2h."""
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    P = np.atleast_2d(p)
    h = fd_step if fd_step is not None else kernel.alpha / 64.0
    cols = []
    for j in range(G.m):
        step = np.zeros(G.dim)
        step[j] = h
        fwd = gp.multiply(G, P, step)
        bwd = gp.multiply(G, P, -step)
        cols.append((_f_alpha_batch(G, phi, kernel, fwd)
                     - _f_alpha_batch(G, phi, kernel, bwd)) / (2.0 * h))
    out = np.stack(cols, axis=-1)
    return out[0] if single else out


def _sup_abs_extended(G, phi, kernel, bracket_halfwidth):
    """sup |phi| padded by the kernel's base reach (two-pass estimate)."""
    a = kernel.alpha
    m0 = phi.sup_abs()
    x_max = float(np.max(np.abs(phi.domain.hi[:G.m - 1]))
                  + np.max(np.abs(phi.domain.lo[:G.m - 1]))) + a
    p1_max = np.hypot(bracket_halfwidth or (2 * m0 + 1), x_max)
    y_pad = a * a / G.epsilon ** 2 + 0.5 * G.b_max * a * p1_max
    pad = max(a, y_pad)
    return phi.sup_abs(padding=pad)


def level_set_phi_alpha(G, phi, kernel, c_level, a, f_tol=1e-3, t_tol=None):
    """phi_alpha(a): the unique root in t of f_alpha(i(a) * (t e1)) = c."""
    a = np.asarray(a, dtype=float)
    single = a.ndim == 1
    A = np.atleast_2d(a)
    t = _phi_alpha_batch(G, phi, kernel, c_level, A, f_tol=f_tol, t_tol=t_tol)
    return float(t[0]) if single else t


def _phi_alpha_batch(G, phi, kernel, c_level, A, f_tol=1e-3, t_tol=None,
                     sup_m=None):
    """Batched monotone bisection for the level-set graph function.

    Iterates until the bracket is below ``t_tol`` (default the documented
    1e-3 (4M+2)) and the residual |f - c| is below ``f_tol``; the latter
    pins the root error to the local slope scale, which is proportional to
    alpha, so measured convergence rates stay meaningful.
    """
    if not (0.0 < c_level < 1.0):
        raise ValidationError("level c must lie in (0, 1)")
    M = sup_m if sup_m is not None else _sup_abs_extended(G, phi, kernel, None)
    lo = np.full(A.shape[0], -2.0 * M - 1.0)
    hi = np.full(A.shape[0], 2.0 * M + 1.0)
    if t_tol is None:
        t_tol = 1e-3 * (4.0 * M + 2.0)

    def section(tvals):
        pts = gp.multiply(G, embed_base(G, A), lift_graph_value(G, tvals))
        return _f_alpha_batch(G, phi, kernel, pts)

    f_lo = section(lo)
    f_hi = section(hi)
    if np.any(f_lo <= c_level) or np.any(f_hi >= c_level):
        raise BracketFailure(
            "section does not straddle the level; quadrature too coarse "
            "or bracket too narrow")
    best_t = 0.5 * (lo + hi)
    best_r = np.full(A.shape[0], np.inf)
    for _ in range(_MAX_BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        f_mid = section(mid)
        resid = np.abs(f_mid - c_level)
        better = resid < best_r
        best_t[better] = mid[better]
        best_r[better] = resid[better]
        above = f_mid > c_level          # root lies above mid (f decreasing)
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= t_tol) and np.all(best_r <= f_tol):
            break
    else:
        raise BracketFailure(
            f"bisection did not reach |f - c| <= {f_tol}; quadrature too coarse")
    return best_t


def intrinsic_gradient_of_level_set(G, phi, kernel, A, phi_alpha_values,
                                    fd_step=None):
    """Gradient of the extracted graph via its defining function:
    -(X_2 f_alpha / X_1 f_alpha, ...) evaluated on the level set."""
    pts = gp.multiply(G, embed_base(G, A), lift_graph_value(G, phi_alpha_values))
    grad = horizontal_gradient_mollified(G, phi, kernel, pts, fd_step=fd_step)
    x1f = grad[..., 0]
    if np.any(np.abs(x1f) <= 1e-14):
        raise DegenerateHorizontalGradient(
            "X_1 f_alpha vanishes on the extracted level set")
    return -grad[..., 1:] / x1f[..., None]


def _base_grid(box, per_axis):
    axes = [box.lo[i] + (np.arange(per_axis) + 0.5)
            * (box.hi[i] - box.lo[i]) / per_axis for i in range(box.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def approximation_report(G, phi, alpha_list, c_level=0.5, grid_per_axis=32,
                         points_per_axis=16, gradient_samples=256,
                         rate_factor=2.0, gradient_allowance=1.10):
    """Convergence table of the smoothing pipeline.

    Per alpha: sup|phi_alpha - phi| on a base grid, the rate ratio
    sup/alpha, and sup|grad of the approximant| on a subsample of the grid.
    PASS requires the rate ratios to stay within ``rate_factor`` of each
    other (errors at the root-finder resolution qualify as flat) and the
    gradient sup not to exceed the measured sup of phi's intrinsic gradient
    by more than the stated allowance.
    """
    alphas = sorted(float(al) for al in alpha_list)
    A = _base_grid(phi.domain, grid_per_axis)
    phi_vals = phi.eval_extended(A)
    w_inf = float(np.max(np.linalg.norm(intrinsic_gradient(G, phi, A), axis=-1)))
    sub = A[:: max(1, len(A) // gradient_samples)]
    rows = []
    noise_floor = 0.0
    for alpha in alphas:
        kernel = MollifierKernel(G, alpha, points_per_axis=points_per_axis)
        sup_m = _sup_abs_extended(G, phi, kernel, None)
        t_tol = 1e-6 * alpha
        noise_floor = max(noise_floor, 50.0 * t_tol / alpha)
        pa = _phi_alpha_batch(G, phi, kernel, c_level, A,
                              f_tol=1e-3, t_tol=t_tol, sup_m=sup_m)
        sup_err = float(np.max(np.abs(pa - phi_vals)))
        pa_sub = pa[:: max(1, len(A) // gradient_samples)]
        grad = intrinsic_gradient_of_level_set(G, phi, kernel, sub, pa_sub)
        grad_sup = float(np.max(np.linalg.norm(grad, axis=-1)))
        rows.append({
            "alpha": alpha,
            "sup_error": sup_err,
            "rate_ratio": sup_err / alpha,
            "gradient_sup": grad_sup,
        })
    ratios = [r["rate_ratio"] for r in rows]
    at_noise_floor = max(ratios) <= noise_floor
    rate_ok = at_noise_floor or (max(ratios) <= rate_factor * min(ratios))
    grad_ok = all(r["gradient_sup"] <= gradient_allowance * max(w_inf, 1e-12)
                  for r in rows)
    return {
        "rows": rows,
        "w_inf_measured": w_inf,
        "c_level": c_level,
        "grid_per_axis": grid_per_axis,
        "rate_bounded": bool(rate_ok),
        "rate_at_noise_floor": bool(at_noise_floor),
        "gradient_bounded": bool(grad_ok),
        "passed": bool(rate_ok and grad_ok),
    }


def _base_slope_bounds(G, phi, A):
    """Measured sup of |d phi / d xhat| and |d phi / dy| on the grid."""
    if phi.has_partials:
        g = phi.partials(A)
    else:
        g = np.empty(A.shape)
        for i in range(A.shape[1]):
            e = np.zeros(A.shape[1])
            e[i] = 1e-5
            g[:, i] = (phi.eval_extended(A + e) - phi.eval_extended(A - e)) / 2e-5
    lx = float(np.max(np.linalg.norm(g[:, :G.m - 1], axis=-1)))
    ly = float(np.max(np.linalg.norm(g[:, G.m - 1:], axis=-1)))
    return lx, ly


def horizontal_gradient_mass(G, phi, kernel, base_per_axis=12, t_points=48,
                             window_factor=3.0):
    """int over the slab {base in O, |t| < 2M} of |grad_G f_alpha|.

    The integrand vanishes exactly where the kernel ball misses the graph,
    so the t-integration is restricted per base column to a window around
    phi(a) sized by the kernel reach through the measured slopes of phi.
    """
    A = _base_grid(phi.domain, base_per_axis)
    phi_vals = phi.eval_extended(A)
    a = kernel.alpha
    lx, ly = _base_slope_bounds(G, phi, A)
    p1_max = np.hypot(float(np.max(np.abs(phi_vals))) + a,
                      float(np.max(np.abs(A[:, :G.m - 1]))) + a)
    reach = a * (1.0 + lx) + ly * (a * a / G.epsilon ** 2
                                   + 0.5 * G.b_max * a * p1_max)
    half = window_factor * reach + 6.0 * kernel.subcell_width
    cell_base = float(np.prod((phi.domain.hi - phi.domain.lo) / base_per_axis))
    dt = 2.0 * half / t_points
    total = 0.0
    edge_max = 0.0
    for k in range(t_points):
        t = phi_vals - half + (k + 0.5) * dt
        pts = gp.multiply(G, embed_base(G, A), lift_graph_value(G, t))
        grad = horizontal_gradient_mollified(G, phi, kernel, pts)
        mags = np.linalg.norm(grad, axis=-1)
        if k == 0 or k == t_points - 1:
            edge_max = max(edge_max, float(np.max(mags)))
        total += float(np.sum(mags)) * dt * cell_base
    return {"mass": total, "window_halfwidth": half, "edge_gradient_max": edge_max}
