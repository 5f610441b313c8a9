"""L_p Minkowski combinations of sets, support functions, Wulff shapes.

Sets travel as indicator grids (GridFn densities with values exactly 0
and 1); convex bodies can also travel as support functions sampled on a
fixed set of unit directions. Two summation routes are implemented side
by side: the union of coefficient slices C*A + D*B over the unit
interval for p >= 1, and the intersection of those slices over the open
interval for 0 < p < 1. On convex bodies with the origin interior the
intersection route coincides with the Wulff shape of the directionwise
p-mean of the support functions; check_coincide packages that
comparison as a verification report.
"""

import dataclasses
import io

import numpy as np
from scipy.ndimage import distance_transform_edt
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .convolve import LAMBDA_EDGE, _cd
from .core import GridFn, grid_eval

DIRS_2D = 720
DIRS_3D = 1024
MASK_NODES = {1: 1025, 2: 257, 3: 65}
DIRECTION_SEED = 94111


# ---------------------------------------------------------------------------
# direction sets and support functions
# ---------------------------------------------------------------------------

def circle_directions(count=DIRS_2D):
    """Uniform angular grid of unit vectors on the circle."""
    ang = np.linspace(0.0, 2.0 * np.pi, int(count), endpoint=False)
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def sphere_directions(count=DIRS_3D, seed=DIRECTION_SEED):
    """Reproducible uniform random unit vectors on the sphere."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((int(count), 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def default_directions(dim):
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        return circle_directions()
    if dim == 3:
        return sphere_directions()
    raise ValueError("directions are provided for dimensions 1, 2, 3")


@dataclasses.dataclass
class SupportFn:
    """Support values h(u) > 0 of a convex body on unit directions.

    Positivity pins the origin strictly inside the body. The body itself
    is the intersection of the half-spaces <x, u> <= h(u); wulff_shape
    rasterizes it and body_vertices enumerates its corners.
    """

    dirs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.dirs = np.atleast_2d(np.asarray(self.dirs, dtype=float))
        self.values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if self.dirs.ndim != 2 or self.dirs.shape[1] not in (1, 2, 3):
            raise ValueError("dirs must be a (count, dim) array with dim 1..3")
        if self.values.shape != (self.dirs.shape[0],):
            raise ValueError("values must give one entry per direction")
        norms = np.linalg.norm(self.dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("directions must be unit vectors")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("support values must be finite")
        if np.any(self.values <= 0):
            raise ValueError("support values must be positive "
                             "(origin must be interior)")

    @property
    def dim(self):
        return self.dirs.shape[1]

    def scaled(self, c):
        """Support function of the dilate c * body, c > 0."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return SupportFn(self.dirs, c * self.values)

    def translated(self, w):
        """Support function of body + w; the origin must stay interior."""
        w = np.asarray(w, dtype=float)
        return SupportFn(self.dirs, self.values + self.dirs @ w)

    def body_vertices(self):
        """Corners of the intersection of the sampled half-spaces."""
        if self.dim == 1:
            d = self.dirs[:, 0]
            if not (np.any(d > 0) and np.any(d < 0)):
                raise ValueError("1-D support needs directions on both sides")
            return np.array([[-self.values[d < 0].min()],
                             [self.values[d > 0].min()]])
        halfspaces = np.column_stack([self.dirs, -self.values])
        hs = HalfspaceIntersection(halfspaces, np.zeros(self.dim))
        return hs.intersections

    def induced_values(self):
        """Support values of the body the half-spaces actually cut out."""
        verts = self.body_vertices()
        return (self.dirs @ verts.T).max(axis=1)

    def sublinearity_gap(self):
        """Largest slack of h above its induced support, relative to max h.

        Zero (up to rounding) exactly when h restricted to the direction
        set is the support function of the body it cuts out.
        """
        gap = self.values - self.induced_values()
        return float(gap.max() / self.values.max())

    def to_table(self):
        """Two-column text table: angle in 2-D, unit vector otherwise."""
        if self.dim == 2:
            ang = np.arctan2(self.dirs[:, 1], self.dirs[:, 0])
            data = np.column_stack([ang, self.values])
        else:
            data = np.column_stack([self.dirs, self.values])
        buf = io.StringIO()
        buf.write("# support dim %d\n" % self.dim)
        np.savetxt(buf, data, fmt="%.17g")
        return buf.getvalue()

    @classmethod
    def from_table(cls, text):
        dim = None
        for line in text.splitlines():
            if line.startswith("# support dim"):
                dim = int(line.split()[-1])
                break
        data = np.atleast_2d(np.loadtxt(io.StringIO(text)))
        if dim is None:
            dim = 2 if data.shape[1] == 2 else data.shape[1] - 1
        if dim == 2 and data.shape[1] == 2:
            ang = data[:, 0]
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
            return cls(dirs, data[:, 1])
        return cls(data[:, :-1], data[:, -1])


def write_support_fn(h, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(h.to_table())


def read_support_fn(path):
    with open(path, "r", encoding="utf-8") as fh:
        return SupportFn.from_table(fh.read())


def support_of_polytope(vertices, dirs=None):
    """Support values max <u, v_i> of the convex hull of the vertices.

    The vertices must span the ambient dimension (at least three
    non-collinear points in the plane) and their hull must contain the
    origin strictly inside.
    """
    verts = np.atleast_2d(np.asarray(vertices, dtype=float))
    if verts.ndim != 2 or verts.shape[1] not in (1, 2, 3):
        raise ValueError("vertices must be a (count, dim) array with dim 1..3")
    dim = verts.shape[1]
    centered = verts - verts.mean(axis=0)
    if np.linalg.matrix_rank(centered) < dim:
        raise ValueError("degenerate hull: vertices do not span the space")
    if dirs is None:
        dirs = default_directions(dim)
    dirs = np.asarray(dirs, dtype=float)
    vals = (dirs @ verts.T).max(axis=1)
    return SupportFn(dirs, vals)


def support_of_mask(f, dirs=None):
    """Support values of a mask's ON nodes, max over <u, x>."""
    _check_mask(f, "mask")
    on = np.argwhere(f.values > 0.5)
    if on.size == 0:
        raise ValueError("mask must be nonempty")
    pts = f.origin + f.spacing * on
    if dirs is None:
        dirs = default_directions(f.dim)
    dirs = np.asarray(dirs, dtype=float)
    vals = np.empty(dirs.shape[0])
    step = max(1, int(4e6) // max(1, pts.shape[0]))
    for k in range(0, dirs.shape[0], step):
        vals[k:k + step] = (pts @ dirs[k:k + step].T).max(axis=0)
    return SupportFn(dirs, vals)


# ---------------------------------------------------------------------------
# lattices and rasterization
# ---------------------------------------------------------------------------

def symmetric_grid(radius, n=None, dim=2):
    """Cube lattice on [-radius, radius]^dim with a node exactly at 0."""
    if n is None:
        n = MASK_NODES[dim]
    n = int(n)
    if n % 2 == 0:
        n += 1
    radius = float(radius)
    spacing = np.full(dim, 2.0 * radius / (n - 1))
    origin = np.full(dim, -radius)
    return origin, spacing, (n,) * dim


def _resolve_grid(grid):
    if isinstance(grid, GridFn):
        return grid.origin.copy(), grid.spacing.copy(), grid.shape
    origin, spacing, shape = grid
    return (np.atleast_1d(np.asarray(origin, dtype=float)),
            np.atleast_1d(np.asarray(spacing, dtype=float)),
            tuple(int(n) for n in np.atleast_1d(shape)))


def _points(origin, spacing, shape):
    axes = [origin[d] + spacing[d] * np.arange(shape[d])
            for d in range(len(shape))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _check_mask(f, name):
    if not isinstance(f, GridFn) or f.kind != "density":
        raise ValueError(name + " must be a density grid")
    v = f.values
    if not bool(np.all((v == 0.0) | (v == 1.0))):
        raise ValueError(name + " must be an indicator grid (values 0 or 1)")


def polytope_mask(vertices, grid):
    """Exact indicator of the convex hull of the vertices on a lattice."""
    verts = np.atleast_2d(np.asarray(vertices, dtype=float))
    origin, spacing, shape = _resolve_grid(grid)
    pts = _points(origin, spacing, shape)
    if verts.shape[1] == 1:
        lo, hi = verts.min(), verts.max()
        inside = (pts[:, 0] >= lo - 1e-12) & (pts[:, 0] <= hi + 1e-12)
    else:
        try:
            hull = ConvexHull(verts)
        except QhullError as exc:
            raise ValueError("degenerate hull: %s" % exc) from None
        A = hull.equations[:, :-1]
        b = hull.equations[:, -1]
        tol = 1e-9 * (np.abs(b).max() + 1.0)
        inside = np.all(pts @ A.T + b <= tol, axis=1)
    return GridFn(origin, spacing, inside.astype(float).reshape(shape))


def wulff_shape(h, grid=None):
    """Indicator of the intersection of the half-spaces <x, u> <= h(u)."""
    if not isinstance(h, SupportFn):
        raise ValueError("wulff_shape expects a SupportFn")
    if grid is None:
        grid = symmetric_grid(1.05 * float(h.values.max()), dim=h.dim)
    origin, spacing, shape = _resolve_grid(grid)
    pts = _points(origin, spacing, shape)
    tol = 1e-9 * float(h.values.max())
    inside = np.ones(pts.shape[0], dtype=bool)
    step = max(1, int(4e6) // max(1, pts.shape[0]))
    for k in range(0, h.dirs.shape[0], step):
        proj = pts @ h.dirs[k:k + step].T
        inside &= np.all(proj <= h.values[k:k + step] + tol, axis=1)
    return GridFn(origin, spacing, inside.astype(float).reshape(shape))


# ---------------------------------------------------------------------------
# coefficient slices C*A + D*B on a lattice
# ---------------------------------------------------------------------------

def _mask_box(f):
    on = np.argwhere(f.values > 0.5)
    if on.size == 0:
        raise ValueError("mask must be nonempty")
    lo = f.origin + f.spacing * on.min(axis=0)
    hi = f.origin + f.spacing * on.max(axis=0)
    return lo, hi


def _count_convolve(a, b):
    """Linear convolution of two small nonnegative arrays via the FFT."""
    shape = [sa + sb - 1 for sa, sb in zip(a.shape, b.shape)]
    fshape = [1 << int(np.ceil(np.log2(n))) for n in shape]
    fa = np.fft.rfftn(a, fshape)
    fb = np.fft.rfftn(b, fshape)
    full = np.fft.irfftn(fa * fb, fshape)
    return full[tuple(slice(0, n) for n in shape)]


def _scaled_samples(F, w, spacing, lo, hi):
    """Mask of w * supp(F) on an aligned lattice covering [lo, hi]."""
    base = np.floor(lo / spacing + 1e-9) - 1.0
    origin = base * spacing
    shape = tuple(int(np.ceil((h - o) / sp + 1e-9)) + 2
                  for o, h, sp in zip(origin, hi, spacing))
    pts = _points(origin, spacing, shape)
    mask = grid_eval(F, pts / w).reshape(shape) > 0.5
    return base, mask


def _sum_slice(A, B, C, D, origin, spacing, shape, pts):
    """Mask of C*A + D*B restricted to the output window.

    Each summand is sampled on its own aligned lattice, cut down to the
    region that can still reach the window, so nothing is clipped even
    when a coefficient is large or a support sits far from the origin.
    """
    if C == 0.0 or D == 0.0:
        keep, w = (B, D) if C == 0.0 else (A, C)
        return grid_eval(keep, pts / w).reshape(shape) > 0.5
    whi = origin + spacing * (np.array(shape) - 1.0)
    alo, ahi = _mask_box(A)
    blo, bhi = _mask_box(B)
    alo, ahi = C * alo, C * ahi
    blo, bhi = D * blo, D * bhi
    ra = np.maximum(alo, origin - bhi), np.minimum(ahi, whi - blo)
    rb = np.maximum(blo, origin - ahi), np.minimum(bhi, whi - alo)
    out = np.zeros(shape, dtype=bool)
    if np.any(ra[0] > ra[1]) or np.any(rb[0] > rb[1]):
        return out
    ka, ma = _scaled_samples(A, C, spacing, *ra)
    kb, mb = _scaled_samples(B, D, spacing, *rb)
    if not ma.any() or not mb.any():
        return out
    counts = _count_convolve(ma.astype(float), mb.astype(float))
    koff = np.rint(ka + kb - origin / spacing).astype(int)
    src, dst = [], []
    for d in range(len(shape)):
        s0 = max(-koff[d], 0)
        s1 = min(shape[d] - koff[d], counts.shape[d])
        if s1 <= s0:
            return out
        src.append(slice(s0, s1))
        dst.append(slice(s0 + koff[d], s1 + koff[d]))
    out[tuple(dst)] = counts[tuple(src)] > 0.5
    return out


def _slice_lambdas(p, lambda_samples, closed):
    lams = np.linspace(LAMBDA_EDGE, 1.0 - LAMBDA_EDGE, int(lambda_samples))
    if closed and p > 1:
        return np.concatenate([[0.0], lams, [1.0]])
    return lams


def _combined_lattice(A, B, p, alpha, beta, lams, intersect):
    lo_a, hi_a = _mask_box(A)
    lo_b, hi_b = _mask_box(B)
    los, his = [], []
    for lam in lams:
        C, D = _cd(p, alpha, beta, lam)
        los.append(C * lo_a + D * lo_b)
        his.append(C * hi_a + D * hi_b)
    los, his = np.array(los), np.array(his)
    if intersect:
        lo, hi = los.max(axis=0), his.min(axis=0)
        lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    else:
        lo, hi = los.min(axis=0), his.max(axis=0)
    spacing = np.minimum(A.spacing, B.spacing)
    # Cap the default window at the standard node budget; combined boxes
    # can be several times larger than the inputs.
    cap = (hi - lo) / (MASK_NODES[A.dim] - 1)
    spacing = np.maximum(spacing, cap)
    lo = (np.floor(lo / spacing) - 1.0) * spacing
    hi = hi + spacing
    shape = tuple(max(2, int(np.ceil((h - l) / sp - 1e-9)) + 1)
                  for l, h, sp in zip(lo, hi, spacing))
    return lo, spacing, shape


def _check_weights(alpha, beta):
    if alpha < 0 or beta < 0 or alpha + beta == 0:
        raise ValueError("weights must be nonnegative, not both zero")


def lp_minkowski_sets(A, B, p, alpha=1.0, beta=1.0, lambda_samples=33,
                      grid=None):
    """Union of the slices C*A + D*B over the closed coefficient interval.

    C = alpha^(1/p) (1-lam)^(1/q) and D = beta^(1/p) lam^(1/q) with q the
    conjugate exponent of p >= 1. p = 1 makes the coefficients constant
    and the result is the single Minkowski sum alpha*A + beta*B.
    """
    if not (np.isfinite(p) and p >= 1):
        raise ValueError("the union form needs a finite p >= 1")
    _check_weights(alpha, beta)
    _check_mask(A, "A")
    _check_mask(B, "B")
    if A.dim != B.dim:
        raise ValueError("masks must share a dimension")
    lams = [0.5] if p == 1 else _slice_lambdas(p, lambda_samples, closed=True)
    if grid is None:
        grid = _combined_lattice(A, B, p, alpha, beta, lams, intersect=False)
    origin, spacing, shape = _resolve_grid(grid)
    pts = _points(origin, spacing, shape)
    union = np.zeros(shape, dtype=bool)
    for lam in lams:
        C, D = _cd(p, alpha, beta, lam)
        union |= _sum_slice(A, B, C, D, origin, spacing, shape, pts)
    return GridFn(origin, spacing, union.astype(float))


def lp_minkowski_sets_sub1(A, B, p, alpha=1.0, beta=1.0, lambda_samples=33,
                           grid=None):
    """Intersection of the slices C*A + D*B over the open interval.

    The conjugate exponent is negative for 0 < p < 1, so the coefficient
    sum C + D blows up toward the interval ends; there the slice of an
    origin-interior mask swallows any bounded window, which keeps the
    open-grid intersection stable. Both masks must contain the origin
    node and its axis neighbors.
    """
    if not 0 < p < 1:
        raise ValueError("the intersection form needs 0 < p < 1")
    _check_weights(alpha, beta)
    _check_mask(A, "A")
    _check_mask(B, "B")
    if A.dim != B.dim:
        raise ValueError("masks must share a dimension")
    for f, name in ((A, "A"), (B, "B")):
        _check_origin_inside(f, name)
    lams = _slice_lambdas(p, lambda_samples, closed=False)
    if grid is None:
        grid = _combined_lattice(A, B, p, alpha, beta, lams, intersect=True)
    origin, spacing, shape = _resolve_grid(grid)
    pts = _points(origin, spacing, shape)
    inter = np.ones(shape, dtype=bool)
    for lam in lams:
        C, D = _cd(p, alpha, beta, lam)
        inter &= _sum_slice(A, B, C, D, origin, spacing, shape, pts)
        if not inter.any():
            break
    return GridFn(origin, spacing, inter.astype(float))


def _check_origin_inside(f, name):
    idx = np.rint(-f.origin / f.spacing).astype(int)
    if np.any(idx <= 0) or np.any(idx >= np.array(f.shape) - 1):
        raise ValueError(name + ": origin is not interior to the lattice")
    if f.values[tuple(idx)] <= 0.5:
        raise ValueError(name + ": origin is not interior to the mask")
    for d in range(f.dim):
        for step in (-1, 1):
            nb = list(idx)
            nb[d] += step
            if f.values[tuple(nb)] <= 0.5:
                raise ValueError(name + ": origin is not interior to the mask")


# ---------------------------------------------------------------------------
# support-function route and the coincidence check
# ---------------------------------------------------------------------------

def firey_sum_bodies(K, L, p, alpha=1.0, beta=1.0):
    """Directionwise p-mean (alpha h_K^p + beta h_L^p)^(1/p)."""
    if not (isinstance(K, SupportFn) and isinstance(L, SupportFn)):
        raise ValueError("firey_sum_bodies expects SupportFn inputs")
    if not (np.isfinite(p) and p > 0):
        raise ValueError("p must be a positive finite number")
    _check_weights(alpha, beta)
    if K.dirs.shape != L.dirs.shape or not np.allclose(K.dirs, L.dirs,
                                                       atol=1e-12):
        raise ValueError("support functions must share the direction set")
    vals = (alpha * K.values ** p + beta * L.values ** p) ** (1.0 / p)
    return SupportFn(K.dirs, vals)


def hausdorff_distance(A, B):
    """Hausdorff distance between two masks on a shared lattice.

    Computed as the larger of the two directed scans: the maximum over
    one mask's cells of the distance to the nearest cell of the other.
    """
    _check_mask(A, "A")
    _check_mask(B, "B")
    if (A.shape != B.shape or not np.allclose(A.origin, B.origin)
            or not np.allclose(A.spacing, B.spacing)):
        raise ValueError("masks must share a lattice")
    a = A.values > 0.5
    b = B.values > 0.5
    if not a.any() and not b.any():
        return 0.0
    if not a.any() or not b.any():
        return float("inf")
    to_b = distance_transform_edt(~b, sampling=A.spacing)
    to_a = distance_transform_edt(~a, sampling=A.spacing)
    return float(max(to_b[a].max(), to_a[b].max()))


def check_coincide(K, L, p, alpha=1.0, beta=1.0, lambda_samples=33,
                   grid_nodes=None):
    """Compare the two 0 < p < 1 summation routes on convex bodies.

    K and L may be support functions or origin-interior convex masks.
    The Wulff shape of the directionwise p-mean is rasterized next to
    the open-interval intersection sweep on a shared lattice, and the
    Hausdorff distance between the two masks is checked against twice
    the cell diagonal. Returns a VerificationReport with one record.
    """
    if not 0 < p < 1:
        raise ValueError("the coincidence check needs 0 < p < 1")
    hK = K if isinstance(K, SupportFn) else support_of_mask(K)
    hL = L if isinstance(L, SupportFn) else support_of_mask(L)
    hF = firey_sum_bodies(hK, hL, p, alpha, beta)
    radius = 1.05 * max(hF.values.max(), hK.values.max(), hL.values.max())
    dim = hK.dim
    grid = symmetric_grid(radius, grid_nodes, dim)
    wulff = wulff_shape(hF, grid)
    mask_k = K if isinstance(K, GridFn) else wulff_shape(hK, grid)
    mask_l = L if isinstance(L, GridFn) else wulff_shape(hL, grid)
    inter = lp_minkowski_sets_sub1(mask_k, mask_l, p, alpha, beta,
                                   lambda_samples, grid=grid)
    dist = hausdorff_distance(wulff, inter)
    bound = 2.0 * float(np.linalg.norm(grid[1]))
    from .verify import TrialRecord, VerificationReport
    label = "hausdorff p=%.3g alpha=%.3g beta=%.3g" % (p, alpha, beta)
    rec = TrialRecord(label, dist, bound, bound - dist, dist <= bound)
    return VerificationReport("sets-coincide", [rec])
