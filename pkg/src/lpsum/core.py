"""Grid-backed extended-real functions, power means, and Lp coefficient algebra.

Functions on R^n (n in {1, 2, 3}) are carried as samples on a uniform box
grid. +infinity is IEEE infinity inside plain float64 arrays, never a large
sentinel. Two kinds of grids are distinguished: 'density' grids hold finite
nonnegative samples and are extended by 0 outside the box; 'base' grids hold
convex potentials, may contain +inf, and are extended by +inf outside the box.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

INF = float("inf")

# |s| below this threshold routes s-power formulas through their log-domain
# limit forms; direct (...)^(1/s) expressions are ill-conditioned there.
S_ZERO_THRESHOLD = 1e-6

# Node-snapping tolerance for interpolation, in fractional-index units.
SNAP_TOL = 1e-9

# Default sampling boxes per dimension: (low, high, points per axis).
DEFAULT_GRIDS = {1: (-8.0, 8.0, 1025), 2: (-4.0, 4.0, 257), 3: (-3.0, 3.0, 65)}

_INVGOLD = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# scalar parameter bundles and power means
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class MeanParams:
    """Parameters (s, alpha, beta) of the two-point power mean."""

    s: float
    alpha: float
    beta: float

    def __post_init__(self):
        if math.isnan(self.s):
            raise ValueError("s must not be NaN")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("weights must be nonnegative")
        if self.alpha + self.beta <= 0:
            raise ValueError("weights must not both vanish")


def ms_mean(params, a, b):
    """Two-point power mean with exponent s and weights (alpha, beta).

    Returns (alpha a^s + beta b^s)^(1/s) for finite nonzero s, the weighted
    geometric mean a^alpha b^beta at s=0, max(a, b) at s=+inf and min(a, b)
    at s=-inf. The value is 0 whenever a b = 0, at every s. Accepts scalars
    or broadcastable arrays; all inputs must be nonnegative and finite.
    """
    s, al, be = params.s, params.alpha, params.beta
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    scalar = a_arr.ndim == 0 and b_arr.ndim == 0
    a_arr, b_arr = np.broadcast_arrays(np.atleast_1d(a_arr), np.atleast_1d(b_arr))
    if np.any(a_arr < 0) or np.any(b_arr < 0):
        raise ValueError("mean arguments must be nonnegative")
    if not (np.all(np.isfinite(a_arr)) and np.all(np.isfinite(b_arr))):
        raise ValueError("mean arguments must be finite")

    out = np.zeros(a_arr.shape)
    pos = (a_arr > 0) & (b_arr > 0)
    if np.any(pos):
        ap, bp = a_arr[pos], b_arr[pos]
        if s == INF:
            out[pos] = np.maximum(ap, bp)
        elif s == -INF:
            out[pos] = np.minimum(ap, bp)
        elif abs(s) < S_ZERO_THRESHOLD:
            out[pos] = np.exp(al * np.log(ap) + be * np.log(bp))
        else:
            la = math.log(al) if al > 0 else -INF
            lb = math.log(be) if be > 0 else -INF
            ta = la + s * np.log(ap)
            tb = lb + s * np.log(bp)
            out[pos] = np.exp(np.logaddexp(ta, tb) / s)
    if scalar:
        return float(out[0])
    return out


def q_conjugate(p):
    """Exponent q with 1/p + 1/q = 1; +inf at p=1, negative for 0<p<1."""
    if p == 0:
        raise ValueError("p must be nonzero")
    if p == 1:
        return INF
    return p / (p - 1.0)


@dataclasses.dataclass(frozen=True)
class LpCoeffs:
    """Coefficient pair C = (1-t)^(1/p) (1-lam)^(1/q), D = t^(1/p) lam^(1/q)."""

    p: float
    t: float
    lam: float
    q: float = dataclasses.field(init=False)
    C: float = dataclasses.field(init=False)
    D: float = dataclasses.field(init=False)

    def __post_init__(self):
        C, D = lp_coeffs(self.p, self.t, self.lam)
        object.__setattr__(self, "q", q_conjugate(self.p))
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)


def lp_coeffs(p, t, lam):
    """Coefficient pair (C, D) of the lambda-decomposed p-mean.

    C = (1-t)^(1/p) (1-lam)^(1/q) and D = t^(1/p) lam^(1/q) with
    1/p + 1/q = 1. Requires p > 0 and t, lam in [0, 1]; for 0 < p < 1 the
    conjugate exponent q is negative, so lam must lie strictly inside (0, 1).
    """
    if not p > 0:
        raise ValueError("p must be positive")
    if not (0.0 <= t <= 1.0) or not (0.0 <= lam <= 1.0):
        raise ValueError("t and lam must lie in [0, 1]")
    if p < 1 and (lam == 0.0 or lam == 1.0):
        raise ValueError("lam in {0, 1} is singular for 0 < p < 1 (q < 0)")
    if p == 1:
        return 1.0 - t, t
    qinv = 1.0 - 1.0 / p
    C = (1.0 - t) ** (1.0 / p) * (1.0 - lam) ** qinv
    D = t ** (1.0 / p) * lam ** qinv
    return float(C), float(D)


def lp_coeff_arrays(p, t, lams):
    """Vectorized lp_coeffs over an array of lambda values in (0, 1)."""
    lams = np.asarray(lams, dtype=float)
    if not p > 0:
        raise ValueError("p must be positive")
    if p < 1 and np.any((lams <= 0.0) | (lams >= 1.0)):
        raise ValueError("lam must lie strictly inside (0, 1) for 0 < p < 1")
    if p == 1:
        return np.full_like(lams, 1.0 - t), np.full_like(lams, float(t))
    qinv = 1.0 - 1.0 / p
    C = (1.0 - t) ** (1.0 / p) * (1.0 - lams) ** qinv
    D = t ** (1.0 / p) * lams ** qinv
    return C, D


def golden_section(fun, lo, hi, iters=90):
    """Minimize a unimodal function on [lo, hi]; returns (argmin, min)."""
    x1 = hi - _INVGOLD * (hi - lo)
    x2 = lo + _INVGOLD * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVGOLD * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVGOLD * (hi - lo)
            f2 = fun(x2)
    xm = 0.5 * (lo + hi)
    return xm, fun(xm)


def extremal_coeff_combination(p, t, a, b, mode):
    """Stationary extremal value over lam in [0,1] of C(lam) a + D(lam) b.

    The combination F(lam) = C a + D b is unimodal in lam: concave for
    p >= 1 and convex for p < 0 and 0 < p < 1. Its stationary extremal value
    equals the p-th power mean ((1-t) a^p + t b^p)^(1/p) in every regime,
    and that is what this function computes, by a 129-point scan plus
    golden-section refinement. mode must be 'sup' for p >= 1 or p < 0 and
    'inf' for 0 < p < 1; it is validated but the search direction follows
    the curvature of F.
    """
    a = float(a)
    b = float(b)
    if a < 0 or b < 0 or not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("a and b must be finite and nonnegative")
    if not (0.0 <= t <= 1.0):
        raise ValueError("t must lie in [0, 1]")
    if p == 0:
        raise ValueError("p must be nonzero")
    if mode == "sup":
        if not (p >= 1 or p < 0):
            raise ValueError("mode 'sup' requires p >= 1 or p < 0")
    elif mode == "inf":
        if not (0 < p < 1):
            raise ValueError("mode 'inf' requires 0 < p < 1")
    else:
        raise ValueError("mode must be 'sup' or 'inf'")

    if p < 0 and (t == 0.0 or t == 1.0):
        raise ValueError("t in {0, 1} is singular for p < 0")
    if t == 0.0:
        return a
    if t == 1.0:
        return b

    w1 = (1.0 - t) ** (1.0 / p)
    w2 = t ** (1.0 / p)
    qinv = 1.0 - 1.0 / p

    # Singular degenerate cases where the extremum sits at a lambda endpoint
    # that the finite formulas cannot reach.
    if p < 0 and (a == 0.0 or b == 0.0):
        return 0.0
    if 0 < p < 1:
        if a == 0.0:
            return w2 * b
        if b == 0.0:
            return w1 * a

    def F(lam):
        return w1 * (1.0 - lam) ** qinv * a + w2 * lam ** qinv * b

    if p >= 1 or p < 0:
        grid = np.linspace(0.0, 1.0, 129)
        lo_edge, hi_edge = 0.0, 1.0
    else:
        grid = np.linspace(0.0, 1.0, 131)[1:-1]
        lo_edge, hi_edge = 1e-14, 1.0 - 1e-14

    sign = -1.0 if p >= 1 else 1.0  # golden_section minimizes
    vals = sign * F(grid)
    i = int(np.argmin(vals))
    lo = grid[i - 1] if i > 0 else lo_edge
    hi = grid[i + 1] if i < len(grid) - 1 else hi_edge
    _, fm = golden_section(lambda x: sign * F(x), lo, hi)
    best = min(fm, vals[i])
    return float(sign * best)


# ---------------------------------------------------------------------------
# grid functions
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class GridFn:
    """Samples of an extended-real function on a uniform box grid.

    values is a dim-dimensional float64 array (row-major); origin and
    spacing give the coordinates of values[0, ..., 0] and the node pitch
    per axis. kind 'density' requires finite nonnegative samples; kind
    'base' admits +inf (but not -inf or NaN). meta carries optional tags,
    in particular meta['s'] for s-concave carriers.
    """

    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray
    kind: str = "density"
    meta: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.origin = np.atleast_1d(np.asarray(self.origin, dtype=float)).copy()
        self.spacing = np.atleast_1d(np.asarray(self.spacing, dtype=float)).copy()
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in ("density", "base"):
            raise ValueError("kind must be 'density' or 'base'")
        dim = self.values.ndim
        if dim not in (1, 2, 3):
            raise ValueError("grid dimension must be 1, 2, or 3")
        if self.origin.shape != (dim,) or self.spacing.shape != (dim,):
            raise ValueError("origin and spacing must have one entry per axis")
        if np.any(self.spacing <= 0):
            raise ValueError("spacing must be positive")
        if any(n < 2 for n in self.values.shape):
            raise ValueError("each axis needs at least 2 nodes")
        if np.any(np.isnan(self.values)):
            raise ValueError("values must not contain NaN")
        if np.any(np.isneginf(self.values)):
            raise ValueError("values must not contain -inf")
        if not np.any(np.isfinite(self.values)):
            raise ValueError("at least one value must be finite")
        if self.kind == "density":
            if not np.all(np.isfinite(self.values)):
                raise ValueError("density values must be finite")
            if np.any(self.values < 0):
                raise ValueError("density values must be nonnegative")

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        """Node coordinates per axis, as a list of 1-D arrays."""
        return [self.origin[d] + self.spacing[d] * np.arange(self.shape[d])
                for d in range(self.dim)]

    def box(self):
        """(low corner, high corner) of the sampled box."""
        high = self.origin + self.spacing * (np.array(self.shape) - 1)
        return self.origin.copy(), high

    def copy(self):
        return GridFn(self.origin.copy(), self.spacing.copy(),
                      self.values.copy(), self.kind, dict(self.meta))

    def with_values(self, values, kind=None):
        """Same lattice, new samples (and optionally a new kind)."""
        return GridFn(self.origin.copy(), self.spacing.copy(), values,
                      self.kind if kind is None else kind, dict(self.meta))

    def __call__(self, x):
        return grid_eval(self, x)


def grid_from_callable(fn, origin, spacing, shape, kind="density", meta=None):
    """Sample a vectorized callable fn(x1, ..., xd) on the given lattice."""
    origin = np.atleast_1d(np.asarray(origin, dtype=float))
    spacing = np.atleast_1d(np.asarray(spacing, dtype=float))
    shape = tuple(int(n) for n in np.atleast_1d(shape))
    axes = [origin[d] + spacing[d] * np.arange(shape[d])
            for d in range(len(shape))]
    mesh = np.meshgrid(*axes, indexing="ij")
    values = np.asarray(fn(*mesh), dtype=float)
    return GridFn(origin, spacing, values, kind, {} if meta is None else dict(meta))


def default_box(dim, n=None):
    """Default (origin, spacing, shape) for the given dimension."""
    lo, hi, npts = DEFAULT_GRIDS[dim]
    if n is not None:
        npts = int(n)
    origin = np.full(dim, lo)
    spacing = np.full(dim, (hi - lo) / (npts - 1))
    shape = (npts,) * dim
    return origin, spacing, shape


def grid_points(f):
    """All node coordinates of f as an (m, dim) array, row-major order."""
    mesh = np.meshgrid(*f.axes(), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def origin_index(f):
    """Index tuple of the grid node nearest the coordinate origin."""
    return tuple(int(np.clip(np.rint(-f.origin[d] / f.spacing[d]), 0,
                             f.shape[d] - 1)) for d in range(f.dim))


def _eval_points(f, pts):
    """Multilinear interpolation of f at an (m, dim) array of points."""
    shape = np.array(f.shape)
    tf = (pts - f.origin) / f.spacing
    snap = np.rint(tf)
    tf = np.where(np.abs(tf - snap) <= SNAP_TOL, snap, tf)
    inside = np.all((tf >= 0.0) & (tf <= shape - 1), axis=1)
    fill = 0.0 if f.kind == "density" else INF
    out = np.full(len(pts), fill)
    if not np.any(inside):
        return out

    ti = tf[inside]
    i0 = np.minimum(np.floor(ti).astype(int), shape - 2)
    i0 = np.maximum(i0, 0)
    frac = ti - i0
    acc = np.zeros(len(ti))
    hit_inf = np.zeros(len(ti), dtype=bool)
    for corner in np.ndindex(*(2,) * f.dim):
        w = np.ones(len(ti))
        for d in range(f.dim):
            w = w * (frac[:, d] if corner[d] else 1.0 - frac[:, d])
        idx = tuple(i0[:, d] + corner[d] for d in range(f.dim))
        cv = f.values[idx]
        inf_c = np.isinf(cv)
        hit_inf |= inf_c & (w > 1e-12)
        acc += w * np.where(inf_c, 0.0, cv)
    acc[hit_inf] = INF
    out[inside] = acc
    return out


def grid_eval(f, x):
    """Evaluate f at x (a point or an (m, dim) batch of points).

    Multilinear interpolation inside the box, exact at nodes; any +inf
    corner of the interpolation cell with nonzero weight makes the result
    +inf. Outside the box, densities evaluate to 0 and bases to +inf.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != f.dim:
        raise ValueError("point dimension does not match the grid")
    vals = _eval_points(f, pts)
    if single:
        return float(vals[0])
    return vals


def resample(f, origin, spacing, shape):
    """Resample f on a new lattice by evaluating grid_eval at its nodes."""
    origin = np.atleast_1d(np.asarray(origin, dtype=float))
    spacing = np.atleast_1d(np.asarray(spacing, dtype=float))
    shape = tuple(int(n) for n in np.atleast_1d(shape))
    axes = [origin[d] + spacing[d] * np.arange(shape[d])
            for d in range(len(shape))]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = _eval_points(f, pts).reshape(shape)
    return GridFn(origin, spacing, vals, f.kind, dict(f.meta))


def total_mass(f):
    """Trapezoid-rule approximation of the integral of a density grid."""
    if f.kind != "density":
        raise ValueError("total_mass expects a density grid")
    vals = f.values
    for axis in reversed(range(f.dim)):
        vals = np.trapezoid(vals, dx=f.spacing[axis], axis=axis)
    return float(vals)


# ---------------------------------------------------------------------------
# text serialization
# ---------------------------------------------------------------------------

def grid_fn_to_text(f):
    """Serialize a grid function to the plain-text interchange format."""
    lines = ["dim %d" % f.dim,
             "origin " + " ".join(repr(float(v)) for v in f.origin),
             "spacing " + " ".join(repr(float(v)) for v in f.spacing),
             "shape " + " ".join(str(int(n)) for n in f.shape),
             "kind " + f.kind]
    if "s" in f.meta:
        s = float(f.meta["s"])
        lines.append("meta.s " + ("inf" if s == INF else
                                  "-inf" if s == -INF else repr(s)))
    lines.append("values")
    flat = f.values.ravel()
    row = f.shape[-1]
    for start in range(0, len(flat), row):
        chunk = flat[start:start + row]
        lines.append(" ".join("inf" if np.isinf(v) else repr(float(v))
                              for v in chunk))
    return "\n".join(lines) + "\n"


def grid_fn_from_text(text):
    """Parse the plain-text interchange format back into a GridFn."""
    header = {}
    lines = text.splitlines()
    k = 0
    while k < len(lines):
        line = lines[k].strip()
        k += 1
        if not line:
            continue
        if line == "values":
            break
        key, _, rest = line.partition(" ")
        header[key] = rest.strip()
    else:
        raise ValueError("missing values section")

    for field in ("dim", "origin", "spacing", "shape", "kind"):
        if field not in header:
            raise ValueError("missing header field: " + field)
    dim = int(header["dim"])
    origin = np.array([float(v) for v in header["origin"].split()])
    spacing = np.array([float(v) for v in header["spacing"].split()])
    shape = tuple(int(v) for v in header["shape"].split())
    if len(origin) != dim or len(spacing) != dim or len(shape) != dim:
        raise ValueError("header lengths disagree with dim")
    meta = {}
    if "meta.s" in header:
        meta["s"] = float(header["meta.s"])

    tokens = " ".join(lines[k:]).split()
    expected = int(np.prod(shape))
    if len(tokens) != expected:
        raise ValueError("value count %d does not match shape %s"
                         % (len(tokens), shape))
    values = np.array([float(v) for v in tokens]).reshape(shape)
    return GridFn(origin, spacing, values, header["kind"], meta)


def write_grid_fn(f, path):
    """Write a grid function to a text file."""
    with open(path, "w") as fh:
        fh.write(grid_fn_to_text(f))


def read_grid_fn(path):
    """Read a grid function from a text file."""
    with open(path) as fh:
        return grid_fn_from_text(fh.read())
