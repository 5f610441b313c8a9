"""Discrete Legendre transforms, infimal convolution, and Lp sums of convex bases.

The one-dimensional conjugate is computed exactly with respect to the sampled
nodes: the lower convex hull of the finite sample points is built in linear
time and the conjugate max_i (x_i y - u_i) is read off the hull slopes.
Multi-dimensional transforms iterate the 1-D pass per axis (the sup over a
product box factors), with a sign flip between passes.
"""

from __future__ import annotations

import itertools
import warnings

import numpy as np

from lpsum.core import INF, GridFn, grid_points, origin_index

# Conjugates are clamped to 0 when they dip below by at most this much;
# anything more negative violates the vanishing-at-origin contract.
NEG_CONJ_TOL = 1e-9

# Slack added to support-function masks so boundary nodes stay finite.
MASK_TOL = 1e-7


# ---------------------------------------------------------------------------
# 1-D conjugate on sorted nodes
# ---------------------------------------------------------------------------

def _lower_hull(xs, vs):
    """Lower convex hull of points sorted by x; returns vertex arrays."""
    hx, hv = [], []
    for x, v in zip(xs.tolist(), vs.tolist()):
        while len(hx) >= 2 and ((hv[-1] - hv[-2]) * (x - hx[-1])
                                >= (v - hv[-1]) * (hx[-1] - hx[-2])):
            hx.pop()
            hv.pop()
        hx.append(x)
        hv.append(v)
    return np.array(hx), np.array(hv)


def _conjugate_line(xs, vals, ys):
    """max_i (x_i y - vals_i) over finite samples, for ascending query ys."""
    fin = np.isfinite(vals)
    if not fin.any():
        return np.full(len(ys), -INF)
    hx, hv = _lower_hull(xs[fin], vals[fin])
    if len(hx) == 1:
        return hx[0] * ys - hv[0]
    slopes = np.diff(hv) / np.diff(hx)
    j = np.searchsorted(slopes, ys, side="right")
    return hx[j] * ys - hv[j]


def _conj_axis(A, axis, xs, ys):
    """Apply the 1-D conjugate along one axis of a dense array."""
    B = np.moveaxis(A, axis, -1)
    lead = B.shape[:-1]
    B2 = B.reshape(-1, B.shape[-1])
    out = np.empty((B2.shape[0], len(ys)))
    for r in range(B2.shape[0]):
        out[r] = _conjugate_line(xs, B2[r], ys)
    out = out.reshape(lead + (len(ys),))
    return np.moveaxis(out, -1, axis)


def _conj_line_convex(xs, vals, ys):
    """Conjugate of one line whose finite window is already convex.

    Skips the hull construction: slopes of samples of a convex function are
    nondecreasing, so the maximizer index is a slope search. Tiny round-off
    wiggles are absorbed by a running maximum on the slopes.
    """
    fin = np.isfinite(vals)
    if not fin.any():
        return np.full(len(ys), -INF)
    i0 = int(np.argmax(fin))
    i1 = len(vals) - int(np.argmax(fin[::-1]))
    xw = xs[i0:i1]
    vw = vals[i0:i1]
    if len(xw) == 1:
        return xw[0] * ys - vw[0]
    slopes = np.maximum.accumulate(np.diff(vw) / np.diff(xw))
    j = np.searchsorted(slopes, ys, side="right")
    return xw[j] * ys - vw[j]


def _conj_axis_convex(A, axis, xs, ys):
    B = np.moveaxis(A, axis, -1)
    lead = B.shape[:-1]
    B2 = B.reshape(-1, B.shape[-1])
    out = np.empty((B2.shape[0], len(ys)))
    for r in range(B2.shape[0]):
        out[r] = _conj_line_convex(xs, B2[r], ys)
    out = out.reshape(lead + (len(ys),))
    return np.moveaxis(out, -1, axis)


# ---------------------------------------------------------------------------
# dual lattices
# ---------------------------------------------------------------------------

def gradient_range(u):
    """Per-axis (min, max) of adjacent finite-node slopes; None if no pair."""
    out = []
    for axis in range(u.dim):
        V = np.moveaxis(u.values, axis, -1)
        with np.errstate(invalid="ignore"):
            d = np.diff(V, axis=-1) / u.spacing[axis]
        d = d[np.isfinite(d)]
        out.append((float(d.min()), float(d.max())) if d.size else None)
    return out


def _pad_range(lo, hi):
    w = hi - lo
    if w <= 1e-12:
        c = 0.5 * (lo + hi)
        return c - 1.0, c + 1.0
    return lo - 0.1 * w, hi + 0.1 * w


def _snap_axis(lo, h, m):
    """Shift the lattice start onto a multiple of h so 0 is hit exactly.

    Conjugates of origin-anchored bases vanish at the slope 0; keeping it
    on the lattice makes normalized maxima exact. One node is appended
    when the shift would otherwise lose coverage at the top.
    """
    lo2 = h * np.floor(lo / h + 1e-9)
    return lo2, m + (1 if lo2 < lo - 1e-12 else 0)


def default_dual(u, n=None):
    """Default slope lattice: padded gradient range, denser than the primal."""
    origin, spacing, shape = [], [], []
    for axis, gr in enumerate(gradient_range(u)):
        lo, hi = _pad_range(*gr) if gr else (-1.0, 1.0)
        m = int(n) if n is not None else 2 * u.shape[axis] - 1
        h = (hi - lo) / (m - 1)
        lo, m = _snap_axis(lo, h, m)
        origin.append(lo)
        spacing.append(h)
        shape.append(m)
    return np.array(origin), np.array(spacing), tuple(shape)


def _resolve_lattice(spec):
    if isinstance(spec, GridFn):
        return spec.origin.copy(), spec.spacing.copy(), spec.shape
    origin, spacing, shape = spec
    return (np.atleast_1d(np.asarray(origin, dtype=float)),
            np.atleast_1d(np.asarray(spacing, dtype=float)),
            tuple(int(m) for m in np.atleast_1d(shape)))


def _check_slope_cover(u, origin, spacing, shape, what):
    for axis, gr in enumerate(gradient_range(u)):
        if gr is None:
            continue
        lo = origin[axis]
        hi = origin[axis] + spacing[axis] * (shape[axis] - 1)
        tol = spacing[axis]
        if gr[0] < lo - tol or gr[1] > hi + tol:
            warnings.warn("slope range %s exceeds the dual box on axis %d; "
                          "%s saturates at the boundary" % (gr, axis, what),
                          RuntimeWarning)
            return


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def legendre_transform(u, dual=None):
    """Discrete conjugate u*(y) = max_x [<x, y> - u(x)] over the grid nodes.

    dual selects the slope lattice: None for the default padded-gradient
    box, a GridFn whose lattice is reused, or an (origin, spacing, shape)
    triple. The result is exact for the sampled nodes and convex as a
    discrete object.
    """
    if dual is None:
        origin, spacing, shape = default_dual(u)
    else:
        origin, spacing, shape = _resolve_lattice(dual)
        _check_slope_cover(u, origin, spacing, shape, "the transform")
    if len(shape) != u.dim:
        raise ValueError("dual lattice dimension mismatch")

    primal_axes = u.axes()
    dual_axes = [origin[d] + spacing[d] * np.arange(shape[d])
                 for d in range(u.dim)]
    A = u.values
    for k, axis in enumerate(range(u.dim - 1, -1, -1)):
        A = _conj_axis(A, axis, primal_axes[axis], dual_axes[axis])
        if k < u.dim - 1:
            A = -A
    high = origin + spacing * (np.array(shape) - 1)
    meta = {"dual_box": (tuple(origin), tuple(high))}
    return GridFn(origin, spacing, A, "base", meta)


def fast_conjugate(u, dual):
    """Conjugate of a jointly convex sampled function on a given lattice.

    Same contract as legendre_transform with an explicit dual, but each
    axis pass assumes convex lines and skips the hull step. Joint convexity
    of the input guarantees this for every pass: partial minimization keeps
    the intermediate arrays convex along the remaining axes.
    """
    origin, spacing, shape = _resolve_lattice(dual)
    if len(shape) != u.dim:
        raise ValueError("dual lattice dimension mismatch")
    primal_axes = u.axes()
    dual_axes = [origin[d] + spacing[d] * np.arange(shape[d])
                 for d in range(u.dim)]
    A = u.values
    for k, axis in enumerate(range(u.dim - 1, -1, -1)):
        A = _conj_axis_convex(A, axis, primal_axes[axis], dual_axes[axis])
        if k < u.dim - 1:
            A = -A
    high = origin + spacing * (np.array(shape) - 1)
    meta = {"dual_box": (tuple(origin), tuple(high))}
    return GridFn(origin, spacing, A, "base", meta)


def _domain_vertices(u):
    """Vertices of the convex hull of the finite nodes of u."""
    fin = np.isfinite(u.values).ravel()
    pts = grid_points(u)[fin]
    if u.dim == 1:
        return np.array([[pts[:, 0].min()], [pts[:, 0].max()]])
    if len(pts) <= u.dim + 1:
        return pts
    try:
        from scipy.spatial import ConvexHull
        hull = ConvexHull(pts)
        return pts[hull.vertices]
    except Exception:
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        corners = list(itertools.product(*zip(lo, hi)))
        return np.array(corners)


def direction_set(dim, seed=12345):
    """Unit directions for support-function work: signs, a fan, or random."""
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        theta = 2 * np.pi * np.arange(720) / 720
        return np.column_stack([np.cos(theta), np.sin(theta)])
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((720, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    axes = np.vstack([np.eye(3), -np.eye(3)])
    return np.vstack([axes, dirs])


def domain_support(u, dirs):
    """Support values of the convex hull of the finite nodes, per direction."""
    verts = _domain_vertices(u)
    return (dirs @ verts.T).max(axis=1)


def _mask_outside_support(values, origin, spacing, dirs, h):
    """Set nodes with <z, d> > h(d) + tol to +inf; returns masked copy."""
    shape = values.shape
    axes = [origin[d] + spacing[d] * np.arange(shape[d])
            for d in range(len(shape))]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    excess = np.full(len(pts), -INF)
    for start in range(0, len(dirs), 64):
        block = dirs[start:start + 64]
        e = pts @ block.T - h[start:start + 64]
        excess = np.maximum(excess, e.max(axis=1))
    out = values.copy()
    out.ravel()[excess > MASK_TOL] = INF
    return out


def biconjugate(u, dual=None):
    """(u*)*: the convex lower envelope of u, on u's own lattice.

    Nodes outside the convex hull of the finite nodes of u are restored to
    +inf (the transform pair alone would extend the envelope linearly).
    """
    cu = legendre_transform(u, dual)
    cc = legendre_transform(cu, dual=(u.origin, u.spacing, u.shape))
    vals = cc.values
    if np.any(np.isinf(u.values)):
        dirs = direction_set(u.dim)
        h = domain_support(u, dirs)
        vals = _mask_outside_support(vals, u.origin, u.spacing, dirs, h)
    return GridFn(u.origin, u.spacing, vals, "base", dict(u.meta))


def _same_family(u, v):
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    if not np.allclose(u.spacing, v.spacing, rtol=1e-9, atol=0):
        raise ValueError("matching spacings required; resample first")


def _combined_dual(u, v, n=None):
    """Slope lattice covering the gradient ranges of both inputs."""
    origin, spacing, shape = [], [], []
    gru, grv = gradient_range(u), gradient_range(v)
    for axis in range(u.dim):
        pieces = [g for g in (gru[axis], grv[axis]) if g is not None]
        if pieces:
            lo = min(g[0] for g in pieces)
            hi = max(g[1] for g in pieces)
            lo, hi = _pad_range(lo, hi)
        else:
            lo, hi = -1.0, 1.0
        if n is not None:
            m = int(n)
        elif u.dim == 1:
            m = 4 * max(u.shape[axis], v.shape[axis]) - 3
        else:
            m = 2 * max(u.shape[axis], v.shape[axis]) - 1
        h = (hi - lo) / (m - 1)
        lo, m = _snap_axis(lo, h, m)
        origin.append(lo)
        spacing.append(h)
        shape.append(m)
    return np.array(origin), np.array(spacing), tuple(shape)


def _sum_lattice(u, v):
    origin = u.origin + v.origin
    shape = tuple(nu + nv - 1 for nu, nv in zip(u.shape, v.shape))
    return origin, u.spacing.copy(), shape


def inf_convolution(u, v, out_grid=None, dual=None):
    """Infimal convolution through the transform identity (u* + v*)*.

    For convex inputs this equals inf_y [u(z - y) + v(y)]. The result lives
    on the Minkowski-sum lattice by default; nodes outside the sum of the
    two domain hulls are +inf whenever either input carries +inf nodes.
    """
    _same_family(u, v)
    if dual is None:
        lattice = _combined_dual(u, v)
    else:
        lattice = _resolve_lattice(dual)
        _check_slope_cover(u, *lattice, "inf-convolution")
        _check_slope_cover(v, *lattice, "inf-convolution")
    cu = legendre_transform(u, dual=lattice)
    cv = legendre_transform(v, dual=lattice)
    M = GridFn(lattice[0], lattice[1], cu.values + cv.values, "base")

    out = _sum_lattice(u, v) if out_grid is None else _resolve_lattice(out_grid)
    res = legendre_transform(M, dual=out)
    vals = res.values
    if np.any(np.isinf(u.values)) or np.any(np.isinf(v.values)):
        dirs = direction_set(u.dim)
        h = domain_support(u, dirs) + domain_support(v, dirs)
        vals = _mask_outside_support(vals, out[0], out[1], dirs, h)
    return GridFn(out[0], out[1], vals, "base")


def lp_base_sum(alpha, u, beta, v, p, out_grid=None, dual=None):
    """Weighted p-power combination of convex bases through their conjugates.

    Returns {(alpha (u*)^p + beta (v*)^p)^(1/p)}* for p >= 1 and weights
    alpha, beta >= 0. Both conjugates must be nonnegative on the slope
    lattice (bases vanishing at the origin guarantee this); values below
    -1e-9 raise, smaller dips are clamped to 0. Reduces to inf_convolution
    at p = 1, alpha = beta = 1.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if alpha < 0 or beta < 0 or alpha + beta == 0:
        raise ValueError("weights must be nonnegative, not both zero")
    _same_family(u, v)
    if dual is None:
        lattice = _combined_dual(u, v)
    else:
        lattice = _resolve_lattice(dual)
        _check_slope_cover(u, *lattice, "the base sum")
        _check_slope_cover(v, *lattice, "the base sum")
    cu = legendre_transform(u, dual=lattice).values
    cv = legendre_transform(v, dual=lattice).values
    low = min(cu.min(), cv.min())
    if low < -NEG_CONJ_TOL:
        raise ValueError("conjugate dips to %g; bases must vanish at the "
                         "origin so their conjugates are nonnegative" % low)
    cu = np.maximum(cu, 0.0)
    cv = np.maximum(cv, 0.0)
    M = (alpha * cu ** p + beta * cv ** p) ** (1.0 / p)
    Mg = GridFn(lattice[0], lattice[1], M, "base")

    asc, bsc = alpha ** (1.0 / p), beta ** (1.0 / p)
    if out_grid is None:
        lo_u, hi_u = u.box()
        lo_v, hi_v = v.box()
        origin = asc * lo_u + bsc * lo_v
        high = asc * hi_u + bsc * hi_v
        spacing = u.spacing.copy()
        shape = tuple(max(2, int(np.ceil((hi - lo) / h - 1e-9)) + 1)
                      for lo, hi, h in zip(origin, high, spacing))
        out = (origin, spacing, shape)
    else:
        out = _resolve_lattice(out_grid)
    res = legendre_transform(Mg, dual=out)
    vals = res.values
    mask_u = alpha > 0 and np.any(np.isinf(u.values))
    mask_v = beta > 0 and np.any(np.isinf(v.values))
    if mask_u or mask_v:
        dirs = direction_set(u.dim)
        hu = np.maximum(domain_support(u, dirs), 0.0)
        hv = np.maximum(domain_support(v, dirs), 0.0)
        h = (alpha * hu ** p + beta * hv ** p) ** (1.0 / p)
        vals = _mask_outside_support(vals, out[0], out[1], dirs, h)
    return GridFn(out[0], out[1], vals, "base")


def support_fn(f, dual=None):
    """Conjugate of the base of an s-concave function (its support function)."""
    base = getattr(f, "base", f)
    return legendre_transform(base, dual)


def s_aleksandrov(w, s, dual=None):
    """The s-concave function whose base is w*: (1 - s w*)_+^(1/s).

    w must be nonnegative with w = 0 at the node nearest the origin. At
    s = 0 the density is e^(-w*).
    """
    fin = w.values[np.isfinite(w.values)]
    if fin.min() < -NEG_CONJ_TOL:
        raise ValueError("w must be nonnegative")
    idx = origin_index(w)
    # The node nearest the origin sits up to half a cell away from 0, so the
    # sampled value may be off by a local-slope times cell-size amount.
    slope = 0.0
    for d in range(w.dim):
        for nb in (-1, 1):
            j = list(idx)
            j[d] += nb
            if 0 <= j[d] < w.shape[d]:
                diff = w.values[tuple(j)] - w.values[idx]
                if np.isfinite(diff):
                    slope = max(slope, abs(diff) / w.spacing[d])
    tol = max(1e-6, slope * float(np.linalg.norm(w.spacing)))
    if not abs(w.values[idx]) <= tol:
        raise ValueError("w must vanish at the node nearest the origin")
    phi = legendre_transform(w, dual)
    from lpsum.asplund import SConcaveFn
    return SConcaveFn(s, phi)
