"""Weighted power-mean sup convolutions over a coefficient sweep.

The central objects are the two-parameter convolutions

    sup  over lam of  sup { M_s^(C,D)(f(x), g(y)) : z = C x + D y },
    C = alpha^(1/p) (1-lam)^(1/q),  D = beta^(1/p) lam^(1/q),  1/p + 1/q = 1,

with the outer sup for p >= 1 and an outer inf for 0 < p < 1. The sup
runs over the closed interval lam in [0, 1] (the endpoint slices collapse
to scaled copies of a single summand and can dominate for s < 0); the inf
runs over an open grid because lam**(1/q) blows up at the endpoints when
q < 0. Three evaluation routes are used: exact mask sweeps for indicator
inputs, a conjugate-transform route for functions held as convex bases,
and an honest scatter/grid composition for everything else at desk scale.
"""

import dataclasses

import numpy as np
from scipy.signal import fftconvolve

from lpsum import legendre
from lpsum.asplund import SConcaveFn, _common_bases
from lpsum.core import (GridFn, INF, MeanParams, S_ZERO_THRESHOLD, grid_eval,
                        grid_points, ms_mean, origin_index, resample)

LAMBDA_EDGE = 1.0 / 128.0
PAIR_CAP = int(2e7)
SCATTER_CAP = int(4e6)
BRUTE_CAP = {1: 129, 2: 33}


@dataclasses.dataclass
class ConvolveParams:
    """Exponents and weights for one convolution sweep.

    Give either t (weights become (1-t, t)) or alpha and beta explicitly.
    lambda_samples controls the coefficient grid on [1/128, 1 - 1/128];
    sup sweeps at p > 1 add the endpoint slices at lam = 0 and lam = 1,
    and refine_rounds adds midpoint passes around the per-node extremizers.
    """

    p: float
    s: float
    t: float = None
    alpha: float = None
    beta: float = None
    lambda_samples: int = 65
    refine_rounds: int = 2

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p > 0):
            raise ValueError("p must be a positive finite number")
        if np.isnan(self.s):
            raise ValueError("s must not be NaN")
        if self.t is not None:
            if self.alpha is not None or self.beta is not None:
                raise ValueError("give either t or explicit weights, not both")
            if not 0 <= self.t <= 1:
                raise ValueError("t must lie in [0, 1]")
            self.alpha = 1.0 - self.t
            self.beta = float(self.t)
        if self.alpha is None or self.beta is None:
            raise ValueError("weights required: pass t or alpha and beta")
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta == 0:
            raise ValueError("weights must be nonnegative, not both zero")
        if self.lambda_samples < 2:
            raise ValueError("lambda_samples must be at least 2")


def _cd(p, alpha, beta, lam):
    qinv = 1.0 - 1.0 / p
    return (alpha ** (1.0 / p) * (1.0 - lam) ** qinv,
            beta ** (1.0 / p) * lam ** qinv)


def _lambda_grid(n):
    return np.linspace(LAMBDA_EDGE, 1.0 - LAMBDA_EDGE, n)


def _lambda_values(params, minimize):
    """Coefficient grid: open for the inf sweep, closed for the sup sweep."""
    lams = _lambda_grid(params.lambda_samples)
    if not minimize and params.p > 1:
        return np.concatenate([[0.0], lams, [1.0]])
    return lams


# ---------------------------------------------------------------------------
# single-parameter scaling and the plain sup convolution
# ---------------------------------------------------------------------------

def scale_s(alpha, f, s):
    """Scaling alpha x f: alpha^(1/s) f(x/alpha), a power for s = 0.

    At s = +-inf the function is returned unchanged, following the
    convention that makes indicator functions fixed points. The result is
    resampled onto f's own lattice.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if f.kind != "density":
        raise ValueError("scale_s expects a density grid")
    if alpha == 1.0 or np.isinf(s):
        return f.copy()
    if abs(s) < S_ZERO_THRESHOLD:
        return f.with_values(f.values ** alpha)
    pts = grid_points(f) / alpha
    vals = alpha ** (1.0 / s) * grid_eval(f, pts).reshape(f.shape)
    return f.with_values(vals)


def scale_ps(alpha, f, p, s, s0_semantics="base"):
    """Two-parameter scaling: alpha^(s/p) f(x / alpha^(1/p)), alpha >= 0.

    alpha = 0 collapses to the single-node spike at the origin. At s = 0
    the amplitude factor degenerates; the default routes through the base
    representation, giving f(x/alpha^(1/p)) raised to alpha^(1/p), while
    s0_semantics='literal' keeps the amplitude-free closed form. At
    s = +-inf the function is returned unchanged. p = 1 reduces to
    scale_s(alpha, f, s).
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if f.kind != "density":
        raise ValueError("scale_ps expects a density grid")
    if alpha == 0:
        vals = np.zeros(f.shape)
        vals[origin_index(f)] = 1.0
        return f.with_values(vals)
    if np.isinf(s):
        return f.copy()
    root = alpha ** (1.0 / p)
    if alpha == 1.0:
        return f.copy()
    pts = grid_points(f) / root
    base = grid_eval(f, pts).reshape(f.shape)
    if abs(s) < S_ZERO_THRESHOLD:
        if s0_semantics == "base":
            return f.with_values(base ** root)
        if s0_semantics == "literal":
            return f.with_values(base)
        raise ValueError("s0_semantics must be 'base' or 'literal'")
    return f.with_values(alpha ** (s / p) * base)


def _envelope_smooth(vals):
    """One upper-envelope pass: lift each node to its neighbor midpoints."""
    out = vals.copy()
    for axis in range(out.ndim):
        v = np.moveaxis(out, axis, 0)
        mid = 0.5 * (v[:-2] + v[2:])
        np.maximum(v[1:-1], mid, out=v[1:-1])
    return out


def sup_convolution_s(f, g, s):
    """Plain sup convolution sup { M_s^(1,1)(f(x), g(y)) : z = x + y }.

    Works on the Minkowski-sum lattice of the two (same-spacing) grids,
    taking the sup over grid-commensurate decompositions, then applies one
    upper-envelope smoothing pass.
    """
    if f.kind != "density" or g.kind != "density":
        raise ValueError("sup_convolution_s expects density grids")
    if f.dim != g.dim or not np.allclose(f.spacing, g.spacing, rtol=1e-9,
                                         atol=0):
        raise ValueError("matching spacings required; resample first")
    pairs = int(np.prod(f.shape)) * int(np.prod(g.shape))
    if pairs > PAIR_CAP:
        raise ValueError("grids too large for the direct decomposition sup")
    origin = f.origin + g.origin
    shape = tuple(a + b - 1 for a, b in zip(f.shape, g.shape))
    vals = np.zeros(shape)
    mp = MeanParams(s, 1.0, 1.0)
    gv = g.values.ravel()
    for k in np.flatnonzero(gv > 0):
        j = np.unravel_index(k, g.shape)
        cand = ms_mean(mp, f.values, gv[k])
        region = tuple(slice(jd, jd + nd) for jd, nd in zip(j, f.shape))
        np.maximum(vals[region], cand, out=vals[region])
    vals = _envelope_smooth(vals)
    return GridFn(origin, f.spacing.copy(), vals, "density", {"s": s})


# ---------------------------------------------------------------------------
# lattice bookkeeping for the sweeps
# ---------------------------------------------------------------------------

def _lattice_points(origin, spacing, shape):
    axes = [origin[d] + spacing[d] * np.arange(shape[d])
            for d in range(len(shape))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _sweep_box(box_f, box_g, params, intersect):
    """Axis box covering (or cut down to) the coefficient-sweep supports."""
    lams = _lambda_values(params, minimize=intersect)
    lo_f, hi_f = box_f
    lo_g, hi_g = box_g
    los, his = [], []
    for lam in lams:
        C, D = _cd(params.p, params.alpha, params.beta, lam)
        los.append(C * lo_f + D * lo_g)
        his.append(C * hi_f + D * hi_g)
    los, his = np.array(los), np.array(his)
    if intersect:
        return los.max(axis=0), his.min(axis=0)
    return los.min(axis=0), his.max(axis=0)


def _build_lattice(lo, hi, spacing, snap=False):
    spacing = np.asarray(spacing, dtype=float)
    lo = lo - spacing
    hi = hi + spacing
    if snap:
        lo = np.floor(lo / spacing) * spacing
    shape = tuple(max(2, int(np.ceil((h - l) / sp - 1e-9)) + 1)
                  for l, h, sp in zip(lo, hi, spacing))
    return lo, spacing, shape


def _resolve_out(out_grid):
    if isinstance(out_grid, GridFn):
        return out_grid.origin.copy(), out_grid.spacing.copy(), out_grid.shape
    origin, spacing, shape = out_grid
    return (np.atleast_1d(np.asarray(origin, dtype=float)),
            np.atleast_1d(np.asarray(spacing, dtype=float)),
            tuple(int(n) for n in np.atleast_1d(shape)))


# ---------------------------------------------------------------------------
# the coefficient sweep
# ---------------------------------------------------------------------------

def _lambda_sweep(slice_fn, params, minimize):
    """Extremize slice_fn over the coefficient grid with midpoint refinement."""
    if params.p == 1:
        # q = inf makes the coefficients independent of lam.
        return slice_fn(0.5)
    known = []
    best = None
    arg = None

    def absorb(lams):
        nonlocal best, arg
        for lam in lams:
            if lam in known:
                continue
            known.append(lam)
            v = slice_fn(lam)
            if best is None:
                best = v.copy()
                arg = np.full(v.shape, lam)
            else:
                better = v < best if minimize else v > best
                np.copyto(best, v, where=better)
                np.copyto(arg, lam, where=better)

    absorb(list(_lambda_values(params, minimize)))
    for _ in range(params.refine_rounds):
        lam_sorted = np.array(sorted(known))
        new = set()
        for lam in np.unique(arg):
            i = int(np.searchsorted(lam_sorted, lam))
            if i > 0:
                new.add(0.5 * (lam + lam_sorted[i - 1]))
            if i + 1 < len(lam_sorted):
                new.add(0.5 * (lam + lam_sorted[i + 1]))
        absorb(sorted(new))
    return best


# ---------------------------------------------------------------------------
# route A: indicator inputs via mask sweeps
# ---------------------------------------------------------------------------

def _is_indicator(f):
    return (isinstance(f, GridFn) and f.kind == "density"
            and f.values.max() == 1.0
            and bool(np.all((f.values == 0.0) | (f.values == 1.0))))


def _mask_value(s, cd_sum):
    if np.isinf(s) or abs(s) < S_ZERO_THRESHOLD:
        return 1.0
    return cd_sum ** (1.0 / s)


def _on_box(f):
    """Bounding box of a mask's ON nodes."""
    idx = np.argwhere(f.values > 0.5)
    lo = f.origin + f.spacing * idx.min(axis=0)
    hi = f.origin + f.spacing * idx.max(axis=0)
    return lo, hi


def _aligned_mask(F, w, spacing, lo, hi):
    """Mask of the dilate w * supp(F) on an aligned lattice covering [lo, hi].

    Returns the lattice origin in node units together with the samples, so
    convolved index arithmetic stays exact.
    """
    base = np.floor(lo / spacing + 1e-9) - 1.0
    origin = base * spacing
    shape = tuple(int(np.ceil((h - o) / sp + 1e-9)) + 2
                  for o, h, sp in zip(origin, hi, spacing))
    pts = _lattice_points(origin, spacing, shape)
    mask = (grid_eval(F, pts / w).reshape(shape) > 0.5).astype(float)
    return base, mask


def _mask_minkowski(f, g, C, D, origin, spacing, shape):
    """Indicator of C*supp(f) + D*supp(g) on the output lattice.

    Each factor is sampled on its own aligned lattice, restricted to the
    region that can still reach the output window, so supports far from
    the origin contribute exactly rather than being clipped.
    """
    whi = origin + spacing * (np.array(shape) - 1.0)
    alo, ahi = _on_box(f)
    blo, bhi = _on_box(g)
    alo, ahi = np.minimum(C * alo, C * ahi), np.maximum(C * alo, C * ahi)
    blo, bhi = np.minimum(D * blo, D * bhi), np.maximum(D * blo, D * bhi)
    ra = np.maximum(alo, origin - bhi), np.minimum(ahi, whi - blo)
    rb = np.maximum(blo, origin - ahi), np.minimum(bhi, whi - alo)
    if np.any(ra[0] > ra[1]) or np.any(rb[0] > rb[1]):
        return np.zeros(shape, dtype=bool)
    ka, ma = _aligned_mask(f, C, spacing, *ra)
    kb, mb = _aligned_mask(g, D, spacing, *rb)
    out = np.zeros(shape, dtype=bool)
    if not ma.any() or not mb.any():
        return out
    full = fftconvolve(ma, mb)
    koff = np.rint(ka + kb - origin / spacing).astype(int)
    src, dst = [], []
    for d in range(len(shape)):
        s0 = max(-koff[d], 0)
        s1 = min(shape[d] - koff[d], full.shape[d])
        if s1 <= s0:
            return out
        src.append(slice(s0, s1))
        dst.append(slice(s0 + koff[d], s1 + koff[d]))
    out[tuple(dst)] = full[tuple(src)] > 0.5
    return out


def _indicator_sweep(f, g, params, out, minimize):
    origin, spacing, shape = out
    pts = _lattice_points(origin, spacing, shape)

    def slice_fn(lam):
        C, D = _cd(params.p, params.alpha, params.beta, lam)
        if C == 0.0 or D == 0.0:
            # Endpoint slice: one summand collapses to the origin, the
            # decomposition reduces to a dilation of the other support.
            keep, w = (g, D) if C == 0.0 else (f, C)
            mask = grid_eval(keep, pts / w).reshape(shape) > 0.5
            return _mask_value(params.s, C + D) * mask
        mask = _mask_minkowski(f, g, C, D, origin, spacing, shape)
        return _mask_value(params.s, C + D) * mask

    return _lambda_sweep(slice_fn, params, minimize)


# ---------------------------------------------------------------------------
# route B: convex-base inputs via conjugates
# ---------------------------------------------------------------------------

def _clip_base(u, s):
    """Nodes where the density would vanish are pushed to +inf."""
    if s < S_ZERO_THRESHOLD:
        return u
    with np.errstate(invalid="ignore"):
        vals = np.where(s * u.values < 1.0 - 1e-12, u.values, INF)
    return GridFn(u.origin, u.spacing, vals, "base", dict(u.meta))


def _slice_values(s, w, cd_sum):
    with np.errstate(invalid="ignore", over="ignore"):
        if abs(s) < S_ZERO_THRESHOLD:
            vals = np.exp(-w)
        elif s > 0:
            vals = np.maximum(cd_sum - s * w, 0.0) ** (1.0 / s)
        else:
            vals = (cd_sum - s * w) ** (1.0 / s)
        return np.where(np.isnan(vals), 0.0, vals)


def _axis_interval(comp):
    xs = comp.axes()[0][np.isfinite(comp.values)]
    return float(xs.min()), float(xs.max())


def _separable_sweep(comps_f, comps_g, s, params, out, minimize):
    """Per-axis conjugate sweep for bases that split as sums over axes."""
    origin, spacing, shape = out
    dim = len(shape)
    duals, conj_f, conj_g, ivals_f, ivals_g, axes = [], [], [], [], [], []
    masked = [np.any(np.isinf(cf.values)) or np.any(np.isinf(cg.values))
              for cf, cg in zip(comps_f, comps_g)]
    for d in range(dim):
        lat = legendre._combined_dual(comps_f[d], comps_g[d])
        duals.append(lat)
        conj_f.append(legendre.legendre_transform(comps_f[d], dual=lat).values)
        conj_g.append(legendre.legendre_transform(comps_g[d], dual=lat).values)
        ivals_f.append(_axis_interval(comps_f[d]))
        ivals_g.append(_axis_interval(comps_g[d]))
        axes.append(origin[d] + spacing[d] * np.arange(shape[d]))

    def slice_fn(lam):
        C, D = _cd(params.p, params.alpha, params.beta, lam)
        parts = []
        for d in range(dim):
            lat = duals[d]
            # A vanishing coefficient drops its term (0 * inf otherwise).
            if C == 0.0:
                mv = D * conj_g[d]
            elif D == 0.0:
                mv = C * conj_f[d]
            else:
                mv = C * conj_f[d] + D * conj_g[d]
            M = GridFn(lat[0], lat[1], mv, "base")
            w = legendre.fast_conjugate(
                M, (origin[d:d + 1], spacing[d:d + 1], (shape[d],))).values
            if masked[d]:
                lo = C * ivals_f[d][0] + D * ivals_g[d][0] - 0.5 * spacing[d]
                hi = C * ivals_f[d][1] + D * ivals_g[d][1] + 0.5 * spacing[d]
                w = np.where((axes[d] < lo) | (axes[d] > hi), INF, w)
            parts.append(w)
        w = parts[0]
        for d in range(1, dim):
            w = w[..., None] + parts[d]
        return _slice_values(s, w, C + D)

    return _lambda_sweep(slice_fn, params, minimize)


def _sconcave_sweep(f, g, params, out, minimize):
    s = params.s
    u, v = _common_bases(f, g)
    uc, vc = _clip_base(u, s), _clip_base(v, s)

    comps_f = f.base.meta.get("components")
    comps_g = g.base.meta.get("components")
    if comps_f is not None and comps_g is not None and u.dim > 1:
        clip_active = False
        if s >= S_ZERO_THRESHOLD:
            for w in (u, v):
                fin = w.values[np.isfinite(w.values)]
                if fin.size and s * fin.max() >= 1.0 - 1e-12:
                    clip_active = True
        if not clip_active:
            return _separable_sweep(comps_f, comps_g, s, params, out,
                                    minimize)

    lat = legendre._combined_dual(uc, vc)
    cu = legendre.legendre_transform(uc, dual=lat).values
    cv = legendre.legendre_transform(vc, dual=lat).values
    # Spurious positive values beyond the true support come from density
    # jumps at a domain wall, which only a base with infinite nodes can
    # produce; the level-set clip keeps the density continuous, so clip
    # infinities alone need no mask (and the node-hull polygon would
    # shave genuine boundary mass).
    need_mask = np.any(np.isinf(u.values)) or np.any(np.isinf(v.values))
    if need_mask:
        dirs = legendre.direction_set(u.dim)
        hu = legendre.domain_support(uc, dirs)
        hv = legendre.domain_support(vc, dirs)
    origin, spacing, shape = out

    def slice_fn(lam):
        C, D = _cd(params.p, params.alpha, params.beta, lam)
        if C == 0.0:
            mv = D * cv
        elif D == 0.0:
            mv = C * cu
        else:
            mv = C * cu + D * cv
        M = GridFn(lat[0], lat[1], mv, "base")
        w = legendre.fast_conjugate(M, out).values
        if need_mask:
            w = legendre._mask_outside_support(w, origin, spacing, dirs,
                                               C * hu + D * hv)
        return _slice_values(s, w, C + D)

    return _lambda_sweep(slice_fn, params, minimize)


# ---------------------------------------------------------------------------
# route C: honest desk-scale composition
# ---------------------------------------------------------------------------

def _scatter_support(f):
    pts = grid_points(f)
    keep = f.values.ravel() > 0
    return pts[keep], f.values.ravel()[keep]


def _scatter_slice(Xp, fv, Yp, gv, s, C, D, out):
    origin, spacing, shape = out
    vals = np.zeros(int(np.prod(shape)))
    mean = ms_mean(MeanParams(s, C, D), fv[:, None], gv[None, :]).ravel()
    Z = (C * Xp[:, None, :] + D * Yp[None, :, :]).reshape(-1, len(shape))
    idx = np.rint((Z - origin) / spacing).astype(int)
    inside = np.all((idx >= 0) & (idx < np.array(shape)), axis=1)
    if inside.any():
        flat = np.ravel_multi_index(idx[inside].T, shape)
        np.maximum.at(vals, flat, mean[inside])
    return _envelope_smooth(vals.reshape(shape))


def _generic_sweep(f, g, params, out, minimize):
    pairs = int(np.prod(f.shape)) * int(np.prod(g.shape))
    if pairs > PAIR_CAP:
        raise ValueError("grids too large for the generic decomposition "
                         "route; use indicator or convex-base inputs")
    s = params.s
    origin, spacing, shape = out
    if np.isinf(s) or abs(s) < S_ZERO_THRESHOLD:
        Xp, fv = _scatter_support(f)
        Yp, gv = _scatter_support(g)
        if len(fv) * len(gv) > SCATTER_CAP:
            raise ValueError("supports too large for the scatter route")

        def slice_fn(lam):
            C, D = _cd(params.p, params.alpha, params.beta, lam)
            return _scatter_slice(Xp, fv, Yp, gv, s, C, D, out)
    else:
        if not np.allclose(f.spacing, g.spacing, rtol=1e-9, atol=0):
            g = resample(g, g.origin, f.spacing,
                         tuple(max(2, int(np.ceil((hi - lo) / sp)) + 1)
                               for lo, hi, sp in zip(g.box()[0], g.box()[1],
                                                     f.spacing)))
        pts = _lattice_points(origin, spacing, shape)

        def slice_fn(lam):
            C, D = _cd(params.p, params.alpha, params.beta, lam)
            if C == 0.0 or D == 0.0:
                keep, w = (g, D) if C == 0.0 else (f, C)
                other = f if C == 0.0 else g
                if other.values.max() <= 0.0:
                    return np.zeros(shape)
                vals = grid_eval(keep, pts / w).reshape(shape)
                return w ** (1.0 / s) * vals
            h = sup_convolution_s(scale_s(C, f, s), scale_s(D, g, s), s)
            return grid_eval(h, pts).reshape(shape)

    return _lambda_sweep(slice_fn, params, minimize)


# ---------------------------------------------------------------------------
# the two-parameter convolutions
# ---------------------------------------------------------------------------

def _as_density(f):
    return f.density() if isinstance(f, SConcaveFn) else f


def _base_route_ok(f, g, params):
    if not (isinstance(f, SConcaveFn) and isinstance(g, SConcaveFn)):
        return False
    if not np.isfinite(params.s):
        return False
    if abs(f.s - params.s) > 1e-12 or abs(g.s - params.s) > 1e-12:
        raise ValueError("s must match the convex-base inputs")
    if abs(f.amplitude - 1.0) > 1e-12 or abs(g.amplitude - 1.0) > 1e-12:
        return False
    return True


def _boxes(f):
    if isinstance(f, SConcaveFn):
        return f.base.box()
    return f.box()


def _spacing_of(f):
    return f.base.spacing if isinstance(f, SConcaveFn) else f.spacing


def _check_origin_interior(f, what):
    d = _as_density(f)
    idx = origin_index(d)
    ok = d.values[idx] > 0
    for axis in range(d.dim):
        for nb in (-1, 1):
            j = list(idx)
            j[axis] += nb
            ok = ok and 0 <= j[axis] < d.shape[axis] and d.values[tuple(j)] > 0
    if not ok:
        raise ValueError("%s must be positive in a grid neighborhood of "
                         "the origin" % what)


def _run_sweep(f, g, params, out_grid, minimize):
    spacing = np.minimum(_spacing_of(f), _spacing_of(g))
    if out_grid is not None:
        out = _resolve_out(out_grid)
    else:
        lo, hi = _sweep_box(_boxes(f), _boxes(g), params, intersect=minimize)
        out = _build_lattice(lo, np.maximum(hi, lo), spacing, snap=True)
    if _base_route_ok(f, g, params):
        vals = _sconcave_sweep(f, g, params, out, minimize)
    else:
        df, dg = _as_density(f), _as_density(g)
        if _is_indicator(df) and _is_indicator(dg):
            r = out[0] / out[1]
            if np.max(np.abs(r - np.rint(r))) > 1e-6:
                # the mask-sweep crop needs the origin on the lattice
                hi = out[0] + out[1] * (np.array(out[2]) - 1)
                inner = _build_lattice(out[0], hi, out[1], snap=True)
                tmp = GridFn(inner[0], inner[1],
                             _indicator_sweep(df, dg, params, inner,
                                              minimize), "density")
                vals = resample(tmp, *out).values
            else:
                vals = _indicator_sweep(df, dg, params, out, minimize)
        else:
            vals = _generic_sweep(df, dg, params, out, minimize)
    meta = {"s": params.s, "p": params.p,
            "alpha": params.alpha, "beta": params.beta}
    return GridFn(out[0], out[1], vals, "density", meta)


def lps_sup_convolution(f, g, params, out_grid=None):
    """Two-parameter sup convolution for p >= 1.

    f and g may be density grids or convex-base functions; convex-base
    pairs run through conjugate transforms, exact 0/1 indicator grids
    through mask sweeps, and anything else through the desk-scale
    decomposition sup. A zero weight collapses its summand to the origin
    spike, which is then combined with the scaled other summand under
    unit weights.
    """
    if params.p < 1:
        raise ValueError("p must be at least 1 here; use "
                         "lps_infsup_convolution for 0 < p < 1")
    if params.beta == 0 or params.alpha == 0:
        f2 = scale_ps(params.alpha, _as_density(f), params.p, params.s)
        g2 = scale_ps(params.beta, _as_density(g), params.p, params.s)
        unit = dataclasses.replace(params, t=None, alpha=1.0, beta=1.0)
        return _run_sweep(f2, g2, unit, out_grid, minimize=False)
    return _run_sweep(f, g, params, out_grid, minimize=False)


def lps_infsup_convolution(f, g, params, out_grid=None):
    """Two-parameter inf-sup convolution for 0 < p < 1.

    The inner decomposition sup is unchanged; the outer extremum over the
    open coefficient grid is an infimum. Both inputs must be positive in a
    grid neighborhood of the origin, and both weights must be positive.
    """
    if not 0 < params.p < 1:
        raise ValueError("p must lie in (0, 1)")
    if params.alpha <= 0 or params.beta <= 0:
        raise ValueError("weights must be positive for 0 < p < 1")
    _check_origin_interior(f, "f")
    _check_origin_interior(g, "g")
    return _run_sweep(f, g, params, out_grid, minimize=True)


def brute_force_lps(f, g, params, mode=None, out_grid=None):
    """Direct triple loop over (lambda, x, y): the small-scale reference.

    Every node pair is scattered to the nearest output node with the
    weighted mean as its value; no transforms, no scaling shortcuts, no
    refinement. Grids above 129 nodes per axis (1-D) or 33 per axis (2-D)
    are refused.
    """
    df, dg = _as_density(f), _as_density(g)
    if df.dim > 2:
        raise ValueError("the reference path covers dimensions 1 and 2")
    cap = BRUTE_CAP[df.dim]
    if max(max(df.shape), max(dg.shape)) > cap:
        raise ValueError("grids above %d nodes per axis are refused; "
                         "this path is for small references" % cap)
    if mode is None:
        mode = "sup" if params.p >= 1 else "infsup"
    if mode not in ("sup", "infsup"):
        raise ValueError("mode must be 'sup' or 'infsup'")
    minimize = mode == "infsup"
    if out_grid is not None:
        out = _resolve_out(out_grid)
    else:
        lo, hi = _sweep_box(_boxes(df), _boxes(dg), params,
                            intersect=minimize)
        out = _build_lattice(lo, np.maximum(hi, lo),
                             np.minimum(df.spacing, dg.spacing), snap=True)
    Xp, fv = _scatter_support(df)
    Yp, gv = _scatter_support(dg)

    def slice_fn(lam):
        C, D = _cd(params.p, params.alpha, params.beta, lam)
        return _scatter_slice(Xp, fv, Yp, gv, params.s, C, D, out)

    best = None
    for lam in _lambda_values(params, minimize):
        v = slice_fn(lam)
        if best is None:
            best = v
        elif minimize:
            best = np.minimum(best, v)
        else:
            best = np.maximum(best, v)
    meta = {"s": params.s, "p": params.p,
            "alpha": params.alpha, "beta": params.beta}
    return GridFn(out[0], out[1], best, "density", meta)
