"""Scalar functions on a box in R^(m+n-1): the graph data.

A ``GraphFunction`` is either a closed-form expression (parsed with sympy,
evaluated through lambdify, with analytic partials), a sampled grid with
multilinear interpolation, or an opaque callable (used for translated and
level-set-extracted functions).  Coordinates on the base are named
x2..xm, y1..yn; when n == 1 the alias ``y`` is accepted.

Vector fields w = (w_2, ..., w_m) on the base reuse the same machinery
componentwise.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import sympy as sp
from scipy.interpolate import RegularGridInterpolator

from .errors import DimensionMismatch, OutOfDomain, ValidationError


def base_coordinate_names(m, n):
    return [f"x{j}" for j in range(2, m + 1)] + [f"y{s}" for s in range(1, n + 1)]


_ALLOWED_FUNCS = {
    "sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "sqrt": sp.sqrt,
    "abs": sp.Abs, "Abs": sp.Abs, "pi": sp.pi, "tanh": sp.tanh,
}


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValidationError("invalid box: need lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    def contains(self, a, margin=0.0):
        a = np.asarray(a, dtype=float)
        return np.all((a >= self.lo - margin) & (a <= self.hi + margin), axis=-1)

    def clamp(self, a):
        return np.clip(np.asarray(a, dtype=float), self.lo, self.hi)

    def center(self):
        return 0.5 * (self.lo + self.hi)

    def sample(self, count, rng):
        return rng.uniform(self.lo, self.hi, size=(count, self.dim))


class GraphFunction:
    """Scalar function on a box, with optional analytic partials.

    ``kind`` is "expr", "grid" or "callable".  Calling the object evaluates
    with a domain check (raises :class:`OutOfDomain`); ``eval_extended``
    evaluates everywhere (expressions/callables directly, grids by clamped
    interpolation), which the mollification pipeline relies on.
    """

    def __init__(self, domain, fn, kind, partials=None, mask=None, label=""):
        self.domain = domain if isinstance(domain, Box) else Box(*domain)
        self._fn = fn
        self.kind = kind
        self._partials = partials
        self._mask = mask
        self.label = label

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_expression(cls, expr, domain, m, n):
        names = base_coordinate_names(m, n)
        syms = sp.symbols(names)
        local = dict(zip(names, syms))
        if n == 1:
            local["y"] = local["y1"]
        local.update(_ALLOWED_FUNCS)
        try:
            tree = sp.sympify(expr, locals=local)
        except (sp.SympifyError, SyntaxError, TypeError) as exc:
            raise ValidationError(f"cannot parse expression {expr!r}: {exc}") from exc
        extra = tree.free_symbols - set(syms)
        if extra:
            raise ValidationError(
                f"expression {expr!r} uses unknown symbols {sorted(map(str, extra))}")
        f = sp.lambdify(syms, tree, modules="numpy")
        try:
            grads = [sp.lambdify(syms, sp.diff(tree, s), modules="numpy")
                     for s in syms]
        except Exception:
            grads = None            # non-smooth expression: fall back to FD

        def evaluate(a):
            a = np.asarray(a, dtype=float)
            cols = [a[..., i] for i in range(a.shape[-1])]
            return np.broadcast_to(np.asarray(f(*cols), dtype=float),
                                   a.shape[:-1]).copy()

        partials = None
        if grads is not None:
            def partials(a):
                a = np.asarray(a, dtype=float)
                cols = [a[..., i] for i in range(a.shape[-1])]
                outs = [np.broadcast_to(np.asarray(g(*cols), dtype=float),
                                        a.shape[:-1]) for g in grads]
                return np.stack(outs, axis=-1)

        obj = cls(domain, evaluate, "expr", partials=partials, label=str(expr))
        d = obj.domain.dim
        if d != m + n - 1:
            raise DimensionMismatch(
                f"domain has dimension {d}, expected m+n-1 = {m + n - 1}")
        return obj

    @classmethod
    def from_grid(cls, values, domain, label="grid"):
        domain = domain if isinstance(domain, Box) else Box(*domain)
        values = np.asarray(values, dtype=float)
        if values.ndim != domain.dim:
            raise DimensionMismatch(
                f"grid has {values.ndim} axes but domain is {domain.dim}-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValidationError("grid values must be finite")
        axes = [np.linspace(domain.lo[i], domain.hi[i], values.shape[i])
                for i in range(domain.dim)]
        interp = RegularGridInterpolator(axes, values, method="linear",
                                         bounds_error=False, fill_value=None)

        def evaluate(a):
            a = np.asarray(a, dtype=float)
            # clamp: multilinear extension is constant along the clipped axes
            return interp(domain.clamp(a).reshape(-1, domain.dim)).reshape(a.shape[:-1])

        return cls(domain, evaluate, "grid", label=label)

    @classmethod
    def from_callable(cls, fn, domain, partials=None, mask=None, label="callable"):
        return cls(domain, fn, "callable", partials=partials, mask=mask, label=label)

    @classmethod
    def constant(cls, value, domain):
        value = float(value)

        def evaluate(a):
            return np.full(np.asarray(a).shape[:-1], value)

        def partials(a):
            a = np.asarray(a, dtype=float)
            return np.zeros(a.shape)

        return cls(domain, evaluate, "callable", partials=partials,
                   label=f"const({value:g})")

    # -- evaluation -------------------------------------------------------------

    def _check_dim(self, a):
        a = np.asarray(a, dtype=float)
        if a.shape[-1] != self.domain.dim:
            raise DimensionMismatch(
                f"expected base points of length {self.domain.dim}, got {a.shape}")
        return a

    def in_domain(self, a):
        a = self._check_dim(a)
        ok = self.domain.contains(a)
        if self._mask is not None:
            ok = ok & self._mask(a)
        return ok

    def __call__(self, a):
        a = self._check_dim(a)
        ok = self.in_domain(a)
        if not np.all(ok):
            flat = a.reshape(-1, a.shape[-1])
            bad = flat[~np.atleast_1d(ok).reshape(-1)][0]
            raise OutOfDomain(f"point outside domain: {bad}")
        return self._fn(a)

    def eval_extended(self, a):
        """Evaluate without the domain check (grids are clamped)."""
        return self._fn(self._check_dim(a))

    @property
    def has_partials(self):
        return self._partials is not None

    def partials(self, a):
        if self._partials is None:
            raise ValidationError(f"{self.kind} graph function has no analytic partials")
        return self._partials(self._check_dim(a))

    def sup_abs(self, per_axis=None, padding=0.0):
        """Sampled sup |phi| on the (optionally padded) domain box."""
        if per_axis is None:
            # keep the full tensor grid around 2e5 points in any dimension
            per_axis = max(4, int(round(2e5 ** (1.0 / self.domain.dim))))
        lo = self.domain.lo - padding
        hi = self.domain.hi + padding
        axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(self.domain.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        return float(np.max(np.abs(self.eval_extended(pts))))

    def __repr__(self):
        return f"GraphFunction({self.kind}: {self.label})"


class VectorField:
    """w = (w_2, ..., w_m): componentwise graph functions on a shared box."""

    def __init__(self, components):
        comps = list(components)
        if not comps:
            raise ValidationError("vector field needs at least one component")
        self.components = comps
        self.domain = comps[0].domain

    @classmethod
    def from_expressions(cls, exprs, domain, m, n):
        if len(exprs) != m - 1:
            raise DimensionMismatch(
                f"need m-1 = {m - 1} components, got {len(exprs)}")
        return cls([GraphFunction.from_expression(e, domain, m, n) for e in exprs])

    @classmethod
    def constant(cls, values, domain):
        return cls([GraphFunction.constant(v, domain) for v in np.atleast_1d(values)])

    def __call__(self, a):
        return np.stack([c.eval_extended(a) for c in self.components], axis=-1)

    def __len__(self):
        return len(self.components)


# -- JSON interface --------------------------------------------------------------

def _domain_from_dict(data):
    try:
        return Box(np.asarray(data["lo"], dtype=float),
                   np.asarray(data["hi"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"function spec missing domain field: {exc}") from exc


def graph_function_from_dict(data, G, base_dir="."):
    """Build phi from {"kind":"expr"|"grid", "domain":{...}, "expr"|"grid":...}."""
    kind = data.get("kind")
    domain = _domain_from_dict(data.get("domain", {}))
    if domain.dim != G.base_dim:
        raise DimensionMismatch(
            f"domain dimension {domain.dim} != m+n-1 = {G.base_dim}")
    if kind == "expr":
        if "expr" not in data:
            raise ValidationError("expression spec missing 'expr' field")
        return GraphFunction.from_expression(data["expr"], domain, G.m, G.n)
    if kind == "grid":
        spec = data.get("grid")
        if not spec or "shape" not in spec or "values" not in spec:
            raise ValidationError("grid spec needs 'shape' and 'values' fields")
        path = spec["values"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        values = np.loadtxt(path, delimiter=",").reshape(spec["shape"])
        return GraphFunction.from_grid(values, domain)
    raise ValidationError(f"unknown function kind {kind!r}")


def load_graph_function(path, G):
    with open(path) as fh:
        data = json.load(fh)
    return graph_function_from_dict(data, G, base_dir=os.path.dirname(path) or ".")


def vector_field_from_dict(data, G, base_dir="."):
    """Accept a single scalar spec (m == 2) or {"components": [spec, ...]}."""
    if "components" in data:
        comps = [graph_function_from_dict(c, G, base_dir) for c in data["components"]]
        if len(comps) != G.m - 1:
            raise DimensionMismatch(
                f"need m-1 = {G.m - 1} components, got {len(comps)}")
        return VectorField(comps)
    if G.m != 2:
        raise DimensionMismatch("scalar w spec is only valid when m == 2")
    return VectorField([graph_function_from_dict(data, G, base_dir)])


def load_vector_field(path, G):
    with open(path) as fh:
        data = json.load(fh)
    return vector_field_from_dict(data, G, base_dir=os.path.dirname(path) or ".")
