"""Randomized verification suites for convolution and concavity inequalities.

Every suite draws instances from generators that guarantee class membership
by construction (convex bases, concave caps, convex polytopes), runs them
through the production pipelines, and compares the two sides of the claimed
inequality. Where possible the left side is computed so that discretization
can only lower it: coefficient grids are subsets of the continuum the claims
quantify over, so a reported pass never rests on numerical inflation.

Results are VerificationReport objects holding one TrialRecord per trial;
reports serialize to a deterministic comma-separated table. Trials derive
independent generator streams from (suite seed, trial index), so serial and
threaded runs produce identical records.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent import futures

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import convolve, core
from .asplund import SConcaveFn
from .convolve import ConvolveParams
from .core import (INF, S_ZERO_THRESHOLD, GridFn, MeanParams,
                   extremal_coeff_combination, grid_eval, grid_from_callable,
                   ms_mean, total_mass)

# Default relative tolerances by suite family: analytic 1-D pipelines,
# grid-bound 2-D pipelines, and Monte Carlo set-functional pipelines.
TOL_1D = 1e-6
TOL_2D = 1e-3
TOL_MC = 5e-2
# Absolute floor for the sampled-condition concavity checks, where both
# sides are evaluated in closed form.
TOL_EXACT = 1e-9

DEFAULT_LAMBDA_SAMPLES = 17

# Default angle count for width-based quermass evaluation of planar masks.
WIDTH_ANGLES = 512


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class TrialRecord:
    """One checked inequality: value is the left side, bound the right."""

    label: str
    value: float
    bound: float
    slack: float
    passed: bool
    seed: int = None
    params: str = ""


@dataclasses.dataclass
class VerificationReport:
    """Named collection of trial records with an aggregate verdict."""

    suite: str
    records: list
    tolerance: float = None
    mode: str = "serial"

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    @property
    def min_slack(self):
        if not self.records:
            return INF
        return min(r.slack for r in self.records)

    def failures(self):
        return [r for r in self.records if not r.passed]

    def summary(self):
        return "%s: %d trials, %d failures, min slack %.6g -> %s" % (
            self.suite, len(self.records), len(self.failures()),
            self.min_slack, "pass" if self.passed else "FAIL")

    def to_csv(self):
        """Deterministic table: one row per trial plus a summary footer."""
        lines = ["seed,params,lhs,rhs,slack,pass"]
        for r in self.records:
            tag = r.label if not r.params else r.label + "; " + r.params
            tag = tag.replace(",", ";")
            lines.append("%s,%s,%.17g,%.17g,%.17g,%d" % (
                "" if r.seed is None else str(r.seed), tag,
                r.value, r.bound, r.slack, int(r.passed)))
        tol = "none" if self.tolerance is None else "%.17g" % self.tolerance
        lines.append("# suite=%s trials=%d failures=%d min_slack=%.17g "
                     "tolerance=%s passed=%d" % (
                         self.suite.replace(",", ";"), len(self.records),
                         len(self.failures()), self.min_slack, tol,
                         int(self.passed)))
        return "\n".join(lines) + "\n"


def write_report(report, path):
    with open(path, "w") as fh:
        fh.write(report.to_csv())


def trial_rng(seed, index):
    """Generator for one trial, independent of every other trial."""
    return np.random.default_rng(np.random.SeedSequence((int(seed),
                                                         int(index))))


def _map_trials(worker, trials, threads=None):
    """Run worker(0..trials-1), serially unless threads > 1, fixed order."""
    if threads is not None and threads > 1:
        with futures.ThreadPoolExecutor(max_workers=int(threads)) as pool:
            return list(pool.map(worker, range(trials)))
    return [worker(i) for i in range(trials)]


def _rel_pass(lhs, rhs, tol):
    slack = lhs - rhs
    return slack, slack >= -tol * max(abs(rhs), 1e-12)


# ---------------------------------------------------------------------------
# super-level machinery and set functionals
# ---------------------------------------------------------------------------

def superlevel_set(f, r):
    """0/1 mask of the nodes where the density reaches level r > 0."""
    if f.kind != "density":
        raise ValueError("superlevel_set expects a density grid")
    if not r > 0:
        raise ValueError("the level must be positive")
    return f.with_values((f.values >= r).astype(float))


@dataclasses.dataclass(frozen=True)
class SetFunctional:
    """Set function on 0/1 masks with a certified concavity exponent.

    evaluate maps a mask grid to a nonnegative number; alpha is the power
    to which the functional is concave under Minkowski combinations of
    convex arguments, used by the level-set inequality suites.
    """

    tag: str
    alpha: float
    evaluate: object

    def __call__(self, mask):
        return float(self.evaluate(mask))


def volume_functional(dim):
    """Counting-measure volume: cell volume times the number of set nodes."""
    def ev(mask):
        return float(mask.values.sum() * np.prod(mask.spacing))
    return SetFunctional("volume", 1.0 / dim, ev)


def _mask_points(mask):
    idx = np.argwhere(mask.values > 0.5)
    return mask.origin + idx * mask.spacing


def quermass_functional(dim, j, angles=WIDTH_ANGLES):
    """Width-quadrature quermass functional for planar masks.

    j=0 falls back to the volume; j=1 in the plane averages directional
    widths of the node set (plus the per-cell width of the node boxes)
    over a uniform angle grid and scales by pi/2, which for convex bodies
    is half the boundary length.
    """
    if j == 0:
        return volume_functional(dim)
    if dim != 2 or j != 1:
        raise ValueError("width quadrature covers j=1 in dimension 2")
    theta = (np.arange(angles) + 0.5) * np.pi / angles
    e = np.stack([np.cos(theta), np.sin(theta)], axis=1)

    def ev(mask):
        pts = _mask_points(mask)
        if len(pts) == 0:
            return 0.0
        if len(pts) > 4:
            try:
                pts = pts[ConvexHull(pts).vertices]
            except QhullError:
                pass
        proj = pts @ e.T
        widths = proj.max(axis=0) - proj.min(axis=0)
        h1, h2 = mask.spacing
        widths = widths + h1 * np.abs(e[:, 0]) + h2 * np.abs(e[:, 1])
        return float(0.5 * np.pi * widths.mean())

    return SetFunctional("quermass_1", 1.0, ev)


def weighted_mass_functional(density, alpha):
    """Mass of a fixed density over the set nodes, certified at alpha."""
    def ev(mask):
        pts = _mask_points(mask)
        if len(pts) == 0:
            return 0.0
        w = grid_eval(density, pts if mask.dim > 1 else pts)
        return float(np.sum(w) * np.prod(mask.spacing))
    return SetFunctional("weighted_mass", float(alpha), ev)


def omega_tilde(Omega, f, levels=64):
    """Level integral of a set functional over the super-level sets of f.

    Trapezoid rule on a uniform level grid from 0 to max f; the bottom
    level uses the strict support mask so the layer-cake identity holds
    without an artificial full-box term at level zero.
    """
    fmax = float(f.values.max())
    if fmax <= 0:
        return 0.0
    rs = np.linspace(0.0, fmax, int(levels) + 1)
    vals = np.empty(len(rs))
    vals[0] = Omega(f.with_values((f.values > 0).astype(float)))
    for k in range(1, len(rs)):
        vals[k] = Omega(superlevel_set(f, rs[k]))
    return float(np.trapezoid(vals, rs))


# ---------------------------------------------------------------------------
# instance generators
# ---------------------------------------------------------------------------

def random_convex_base(rng, dim, hinges=4, quad=(0.2, 1.0), radius=None):
    """Random nonnegative convex potential vanishing at the origin.

    A centered quadratic plus hinge terms max(<v, x> - b, 0) with b >= 0,
    so convexity, nonnegativity, and the zero at the origin all hold by
    construction. radius, when given, restricts the domain to the centered
    box of that half-width (+inf outside). Returns a callable on meshgrid
    coordinate arrays, suitable for grid_from_callable.
    """
    a = float(rng.uniform(*quad))
    dirs = rng.normal(size=(hinges, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    w = rng.uniform(0.2, 1.5, hinges)
    b = rng.uniform(0.0, 1.5, hinges)

    def u(*coords):
        val = a * sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        for i in range(hinges):
            lin = sum(dirs[i, d] * coords[d] for d in range(dim))
            val = val + w[i] * np.maximum(lin - b[i], 0.0)
        if radius is not None:
            inside = np.ones(np.shape(val), dtype=bool)
            for c in coords:
                inside &= np.abs(c) <= radius
            val = np.where(inside, val, INF)
        return val

    return u


def random_smooth_base(rng, dim, quad=(0.7, 1.6), quart=(0.02, 0.25)):
    """Random smooth strictly convex potential vanishing at the origin.

    A rotated positive-definite quadratic plus a convex quartic term.  The
    quadratic eigenvalues are drawn above a floor so that log-concave
    densities built on the potential decay to negligible size inside the
    working box.  Smoothness (no hinge ridges) keeps the interpolated
    instance close to its continuum counterpart, which the tight
    tolerances of the integral suites rely on.
    """
    R = np.linalg.qr(rng.normal(size=(dim, dim)))[0]
    Q = R @ np.diag(rng.uniform(*quad, dim)) @ R.T
    B = np.diag(rng.uniform(*quart, dim))
    c = float(rng.uniform(0.05, 0.6))

    def u(*coords):
        pts = np.stack([np.asarray(ci, dtype=float) for ci in coords],
                       axis=-1)
        q = np.einsum("...i,ij,...j->...", pts, Q, pts)
        r = np.einsum("...i,ij,...j->...", pts, B, pts)
        return q + c * r * r

    return u


def _instance_lattice(dim):
    """Working lattice per dimension for the randomized integral suites."""
    if dim == 1:
        return np.array([-8.0]), np.array([16.0 / 1024]), (1025,)
    if dim == 2:
        return np.array([-4.0, -4.0]), np.array([0.125, 0.125]), (65, 65)
    return core.default_box(dim)


def _refine_lattice(grid, factor=8):
    """The same box at factor times the node density."""
    origin, spacing, shape = grid
    shape = tuple((n - 1) * factor + 1 for n in shape)
    return origin, np.asarray(spacing, dtype=float) / factor, shape


def random_sconcave(rng, dim, s, grid=None, radius=None, hinges=4,
                    smooth=False):
    """Unit-amplitude s-concave instance with a random convex base."""
    if grid is None:
        grid = _instance_lattice(dim)
    if smooth:
        u = random_smooth_base(rng, dim)
    else:
        u = random_convex_base(rng, dim, hinges=hinges, radius=radius)
    base = grid_from_callable(u, *grid, kind="base")
    return SConcaveFn(float(s), base)


def random_polygon(rng, sides=(5, 9), rad=(0.8, 2.4)):
    """Vertices of a random convex polygon with the origin interior."""
    m = int(rng.integers(*sides))
    ang = 2.0 * np.pi * (np.arange(m) + rng.uniform(0.15, 0.85, m)) / m
    r = rng.uniform(*rad, m)
    pts = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    return pts[ConvexHull(pts).vertices]


def random_interval(rng, rad=(0.8, 2.4)):
    """Endpoints (-a, b) of a random interval around the origin."""
    return -float(rng.uniform(*rad)), float(rng.uniform(*rad))


def random_concave_cap(rng, spacing=1.0 / 32, radius=(2.0, 3.5),
                       amp=(1.5, 2.5), extra=2):
    """Piecewise-linear concave cap, positive at the origin.

    The cap is the positive part of a minimum of affine pieces, every one
    of which is at least the drawn amplitude at the origin; node samples of
    such a function are concave at every interior kink, so the linear
    interpolant of the returned grid is itself a concave function whose
    origin value equals the amplitude.
    """
    A = float(rng.uniform(*radius))
    B = float(rng.uniform(*radius))
    peak = float(rng.uniform(*amp))
    slope_l = peak * rng.uniform(1.0, 2.0) / A
    slope_r = peak * rng.uniform(1.0, 2.0) / B
    k0 = int(math.ceil(A / spacing)) + 1
    k1 = int(math.ceil(B / spacing)) + 1
    xs = (np.arange(k0 + k1 + 1) - k0) * spacing
    vals = np.minimum(peak, np.minimum(slope_l * (xs + A),
                                       slope_r * (B - xs)))
    for _ in range(extra):
        c = peak * rng.uniform(1.0, 1.6)
        mslope = rng.uniform(-1.0, 1.0)
        vals = np.minimum(vals, c + mslope * xs)
    vals = np.maximum(vals, 0.0)
    return GridFn(np.array([xs[0]]), np.array([spacing]), vals, "density")


def random_positive_cap(rng, spacing=1.0 / 64, lo=(0.2, 1.0),
                        span=(0.8, 2.5), amp=(0.5, 2.0)):
    """Piecewise-linear concave bump supported inside (0, +inf)."""
    a = float(rng.uniform(*lo))
    b = a + float(rng.uniform(*span))
    peak_x = rng.uniform(a + 0.2 * (b - a), b - 0.2 * (b - a))
    height = float(rng.uniform(*amp))
    k0 = int(math.floor(a / spacing))
    k1 = int(math.ceil(b / spacing)) + 1
    xs = np.arange(k0, k1 + 1) * spacing
    vals = height * np.minimum((xs - a) / (peak_x - a),
                               (b - xs) / (b - peak_x))
    vals = np.maximum(vals, 0.0)
    return GridFn(np.array([xs[0]]), np.array([spacing]), vals, "density")


# ---------------------------------------------------------------------------
# exact piecewise-linear convolution
# ---------------------------------------------------------------------------

def _b3(t):
    """Cubic B-spline: the convolution of two unit hat functions."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.where(t < 2.0, (2.0 - np.minimum(t, 2.0)) ** 3 / 6.0, 0.0)
    out = out - np.where(t < 1.0,
                         4.0 * (1.0 - np.minimum(t, 1.0)) ** 3 / 6.0, 0.0)
    return out


class PLConvolution:
    """Exact convolution of two 1-D piecewise-linear density grids.

    Node samples on a common spacing h are read as hat-function expansions;
    their convolution is h times a cubic B-spline series whose coefficients
    are the discrete convolution of the node values. Evaluation anywhere is
    exact for the piecewise-linear interpolants the grids define.
    """

    def __init__(self, f, g):
        if f.dim != 1 or g.dim != 1:
            raise ValueError("both inputs must be 1-D grids")
        if abs(f.spacing[0] - g.spacing[0]) > 1e-12:
            raise ValueError("the grids must share their spacing")
        self.h = float(f.spacing[0])
        self.base = float(f.origin[0] + g.origin[0])
        self.coef = np.convolve(f.values, g.values)

    def box(self):
        hi = self.base + self.h * (len(self.coef) - 1)
        return np.array([self.base]), np.array([hi])

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        scalar = w.ndim == 0
        tau = (np.atleast_1d(w) - self.base) / self.h
        out = np.zeros(tau.shape)
        k0 = np.floor(tau).astype(int)
        for off in (-1, 0, 1, 2):
            k = k0 + off
            ok = (k >= 0) & (k < len(self.coef))
            if np.any(ok):
                out[ok] += self.coef[k[ok]] * _b3(tau[ok] - k[ok])
        out *= self.h
        if scalar:
            return float(out[0])
        return out

    def grid(self):
        """Node values of the convolution on its natural lattice."""
        c = np.concatenate([[0.0], self.coef, [0.0]])
        vals = self.h * (c[:-2] + 4.0 * c[1:-1] + c[2:]) / 6.0
        return GridFn(np.array([self.base]), np.array([self.h]),
                      np.maximum(vals, 0.0), "density")


def pl_convolution(f, g):
    """Exact evaluator for the convolution of two 1-D PL density grids."""
    return PLConvolution(f, g)


# ---------------------------------------------------------------------------
# weighted two-point means with coefficient arrays
# ---------------------------------------------------------------------------

def _cd_arrays(p, t, lam):
    """Coefficient pair arrays for per-sample weights t and lam."""
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if p == 1:
        one = np.ones_like(lam)
        return (1.0 - t) * one, t * one
    qinv = 1.0 - 1.0 / p
    return ((1.0 - t) ** (1.0 / p) * (1.0 - lam) ** qinv,
            t ** (1.0 / p) * lam ** qinv)


def _ms_mean_arrays(s, wa, wb, a, b):
    """Power mean with exponent s and per-entry weight arrays (wa, wb).

    Matches the scalar-weight mean of module core: the value is 0 whenever
    a*b = 0, the s=0 form is the weighted geometric mean, and s = +-inf
    give max and min.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    wa, wb, a, b = np.broadcast_arrays(np.asarray(wa, dtype=float),
                                       np.asarray(wb, dtype=float), a, b)
    out = np.zeros(a.shape)
    pos = (a > 0) & (b > 0)
    if not np.any(pos):
        return out
    ap, bp = a[pos], b[pos]
    if s == INF:
        out[pos] = np.maximum(ap, bp)
    elif s == -INF:
        out[pos] = np.minimum(ap, bp)
    elif abs(s) < S_ZERO_THRESHOLD:
        out[pos] = np.exp(wa[pos] * np.log(ap) + wb[pos] * np.log(bp))
    else:
        with np.errstate(divide="ignore"):
            ta = np.log(wa[pos]) + s * np.log(ap)
            tb = np.log(wb[pos]) + s * np.log(bp)
        out[pos] = np.exp(np.logaddexp(ta, tb) / s)
    return out


# ---------------------------------------------------------------------------
# integral inequality suites
# ---------------------------------------------------------------------------

def _shoelace(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) -
                           np.dot(y, np.roll(x, -1))))


def _lp_sum_volume(K, L, p, t, samples=257):
    """Largest single-coefficient volume of the scaled polytope sum.

    For interval or polygon arguments this is an exact lower bound for the
    volume reached by the full coefficient family, computed with exact
    endpoint or hull arithmetic at every sampled coefficient pair.
    """
    if isinstance(K, tuple):
        lf = K[1] - K[0]
        lg = L[1] - L[0]
        return extremal_coeff_combination(p, t, lf, lg, "sup"), lf, lg
    best = 0.0
    for lam in np.linspace(0.0, 1.0, samples):
        C, D = core.lp_coeffs(p, t, lam)
        pts = (C * K[:, None, :] + D * L[None, :, :]).reshape(-1, 2)
        if C == 0.0 and D == 0.0:
            continue
        try:
            area = ConvexHull(pts).volume
        except QhullError:
            area = 0.0
        best = max(best, float(area))
    return best, _shoelace(K), _shoelace(L)


def lp_bbl_sides(f, g, p, s, t, lambda_samples=DEFAULT_LAMBDA_SAMPLES,
                 refine_rounds=1, out_grid=None, mass_refine=1):
    """Left and right side of the weighted supremal-convolution inequality.

    f and g are unit-amplitude convex-base instances; the left side is the
    total mass of their weighted convolution (computed on the common input
    lattice so that matched instances cancel discretization exactly), the
    right side the p*gamma power mean of the input masses with gamma read
    off the dimension branch.

    mass_refine > 1 integrates the input densities on a refined lattice
    over the same box.  The convolution values live over the interpolated
    bases, whose mass sits measurably below the node-sampled trapezoid
    value once boundary cells clip; the refined integrals converge to the
    interpolated-world masses, keeping both sides of the comparison in
    the same world.
    """
    dim = f.dim
    if out_grid is None:
        out_grid = (f.base.origin, f.base.spacing, f.base.shape)
    params = ConvolveParams(p, s, t=t, lambda_samples=lambda_samples,
                            refine_rounds=refine_rounds)
    h = convolve.lps_sup_convolution(f, g, params, out_grid=out_grid)
    lhs = total_mass(h)
    mass_grid = out_grid
    if mass_refine > 1:
        mass_grid = _refine_lattice(convolve._resolve_out(out_grid),
                                    mass_refine)
    If = total_mass(f.density(mass_grid))
    Ig = total_mass(g.density(mass_grid))
    if s == INF:
        expo = p / dim
    else:
        scale = 1.0 + dim * s
        if abs(scale) < 1e-12:
            expo = -INF
        else:
            expo = p * s / scale
    rhs = ms_mean(MeanParams(expo, 1.0 - t, t), If, Ig)
    return lhs, rhs, {"If": If, "Ig": Ig, "mass_h": lhs, "exponent": expo}


def _quasi_bound(p, t, s, dim, If, Ig, lam_samples=129):
    """Binding coefficient bound of the min-form conclusion.

    Checks the for-all reading: the bound must hold at every coefficient
    pair, so the reported right side is the largest bound over a closed
    coefficient grid; the smallest is returned as well for the record.
    """
    ginv = dim + 1.0 / s
    lams = np.linspace(0.0, 1.0, lam_samples)
    C, D = _cd_arrays(p, np.full_like(lams, t), lams)
    with np.errstate(divide="ignore"):
        bounds = np.minimum(np.where(C > 0, C ** ginv, 0.0) * If,
                            np.where(D > 0, D ** ginv, 0.0) * Ig)
    return float(bounds.max()), float(bounds.min())


def verify_lp_bbl(trials, p, s, t, dim, seed=0,
                  lambda_samples=DEFAULT_LAMBDA_SAMPLES, threads=None):
    """Integral inequality for the weighted supremal convolution.

    Finite s draws unit-amplitude convex-base pairs and runs the production
    convolution; s = +inf draws intervals or polygons and uses exact
    endpoint or hull arithmetic, whose single-coefficient volume is a lower
    bound for the left side. The s >= -1/dim branch checks the power-mean
    conclusion; below it, the min-form conclusion is checked at its binding
    coefficient (the for-all reading over a closed coefficient grid).

    Planar instances with s >= 0 are smooth-based and integrated against
    refined input masses (see lp_bbl_sides); negative s keeps truncated
    hinge bases, whose conclusions hold with slack far above the
    discretization scale.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    tol = TOL_1D if dim == 1 else TOL_2D
    quasi = np.isfinite(s) and s < -1.0 / dim - 1e-12

    def one(i):
        rng = trial_rng(seed, i)
        if s == INF:
            if dim == 1:
                K = random_interval(rng)
                L = random_interval(rng)
            else:
                K = random_polygon(rng)
                L = random_polygon(rng)
            lhs, If, Ig = _lp_sum_volume(K, L, p, t)
            rhs = ms_mean(MeanParams(p / dim, 1.0 - t, t), If, Ig)
            slack, ok = _rel_pass(lhs, rhs, tol)
            return TrialRecord("indicator volume bound", lhs, rhs, slack,
                               ok, seed=i,
                               params="If=%.6g Ig=%.6g" % (If, Ig))
        smooth = dim >= 2 and s > -1e-12
        radius = None
        if not smooth and s <= S_ZERO_THRESHOLD:
            radius = (rng.uniform(3.0, 5.0) if dim == 1
                      else rng.uniform(1.8, 2.6))
        f = random_sconcave(rng, dim, s, radius=radius, smooth=smooth)
        g = random_sconcave(rng, dim, s, radius=radius, smooth=smooth)
        if not quasi:
            lhs, rhs, info = lp_bbl_sides(f, g, p, s, t,
                                          lambda_samples=lambda_samples,
                                          refine_rounds=2,
                                          mass_refine=8 if smooth else 1)
            slack, ok = _rel_pass(lhs, rhs, tol)
            return TrialRecord("mass mean bound", lhs, rhs, slack, ok,
                               seed=i, params="If=%.6g Ig=%.6g"
                               % (info["If"], info["Ig"]))
        grid = (f.base.origin, f.base.spacing, f.base.shape)
        params = ConvolveParams(p, s, t=t, lambda_samples=lambda_samples,
                                refine_rounds=1)
        h = convolve.lps_sup_convolution(f, g, params, out_grid=grid)
        lhs = total_mass(h)
        If = total_mass(f.density(grid))
        Ig = total_mass(g.density(grid))
        rhs, weakest = _quasi_bound(p, t, s, dim, If, Ig)
        slack, ok = _rel_pass(lhs, rhs, tol)
        return TrialRecord("min-form bound (binding coefficient)", lhs,
                           rhs, slack, ok, seed=i,
                           params="weakest=%.6g If=%.6g Ig=%.6g"
                           % (weakest, If, Ig))

    records = _map_trials(one, trials, threads)
    mode = "serial" if not threads or threads <= 1 else "threads-%d" % threads
    return VerificationReport(
        "lp-bbl p=%g s=%s t=%g dim=%d" % (p, "inf" if s == INF else
                                          "%g" % s, t, dim),
        records, tolerance=tol, mode=mode)


def verify_classic_bbl(trials, s, t, dim, seed=0, threads=None):
    """Single-coefficient mass inequality (the p = 1 specialization)."""
    if np.isfinite(s) and s < -1.0 / dim - 1e-12:
        raise ValueError("s must be at least -1/dim here")
    if s == INF:
        report = verify_lp_bbl(trials, 1.0, s, t, dim, seed=seed,
                               threads=threads)
        return VerificationReport("classic-bbl s=inf t=%g dim=%d" % (t, dim),
                                  report.records,
                                  tolerance=report.tolerance,
                                  mode=report.mode)
    tol = TOL_1D if dim == 1 else TOL_2D

    def one(i):
        rng = trial_rng(seed, i)
        smooth = dim >= 2 and s > -1e-12
        radius = None
        if not smooth and np.isfinite(s) and s <= S_ZERO_THRESHOLD:
            radius = (rng.uniform(3.0, 5.0) if dim == 1
                      else rng.uniform(1.8, 2.6))
        f = random_sconcave(rng, dim, s, radius=radius, smooth=smooth)
        g = random_sconcave(rng, dim, s, radius=radius, smooth=smooth)
        lhs, rhs, info = lp_bbl_sides(f, g, 1.0, s, t, lambda_samples=3,
                                      refine_rounds=0,
                                      mass_refine=8 if smooth else 1)
        slack, ok = _rel_pass(lhs, rhs, tol)
        return TrialRecord("mass mean bound", lhs, rhs, slack, ok, seed=i,
                           params="If=%.6g Ig=%.6g" % (info["If"],
                                                       info["Ig"]))

    records = _map_trials(one, trials, threads)
    return VerificationReport("classic-bbl s=%g t=%g dim=%d" % (s, t, dim),
                              records, tolerance=tol)


def verify_omega_bbl(trials, Omega, p, alpha, gamma, t, seed=0, dim=2,
                     levels=64, lambda_samples=9, threads=None):
    """Level-integral inequality for a concave set functional.

    Builds the minimal admissible combination of two alpha-concave
    instances through the production convolution and checks the level
    integral of the set functional against the beta power mean of the
    input level integrals, beta = p*alpha*gamma/(alpha+gamma).
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if alpha < -1:
        raise ValueError("alpha must be at least -1")
    if alpha + gamma <= 0:
        raise ValueError("gamma must exceed -alpha")
    if alpha > Omega.alpha + 1e-12:
        raise ValueError("the functional is certified only up to "
                         "exponent %g" % Omega.alpha)
    beta = p * alpha * gamma / (alpha + gamma)
    tol = TOL_MC

    def one(i):
        rng = trial_rng(seed, i)
        f = random_sconcave(rng, dim, alpha)
        g = random_sconcave(rng, dim, alpha)
        grid = (f.base.origin, f.base.spacing, f.base.shape)
        params = ConvolveParams(p, alpha, t=t,
                                lambda_samples=lambda_samples,
                                refine_rounds=1)
        h = convolve.lps_sup_convolution(f, g, params, out_grid=grid)
        Oh = omega_tilde(Omega, h, levels)
        Of = omega_tilde(Omega, f.density(grid), levels)
        Og = omega_tilde(Omega, g.density(grid), levels)
        rhs = ms_mean(MeanParams(beta, 1.0 - t, t), Of, Og)
        slack, ok = _rel_pass(Oh, rhs, tol)
        return TrialRecord("level integral bound", Oh, rhs, slack, ok,
                           seed=i, params="Of=%.6g Og=%.6g beta=%.6g"
                           % (Of, Og, beta))

    records = _map_trials(one, trials, threads)
    return VerificationReport(
        "omega-bbl %s p=%g alpha=%g gamma=%g t=%g" % (Omega.tag, p, alpha,
                                                      gamma, t),
        records, tolerance=tol)


def _gamma_combine(x, y, C, D, gamma):
    """Sub-probability gamma-mean of positive arguments."""
    if abs(gamma) < S_ZERO_THRESHOLD:
        return x ** C * y ** D
    return (C * x ** gamma + D * y ** gamma) ** (1.0 / gamma)


def verify_1d_lpgamma_bbl(trials, p, alpha, gamma, seed=0, z_nodes=1025,
                          lambda_samples=DEFAULT_LAMBDA_SAMPLES,
                          threads=None):
    """Mass inequality on the half line with a gamma-mean argument law.

    Per trial, two piecewise-linear bumps supported inside (0, inf) are
    drawn, the minimal admissible left side is assembled per output node by
    solving the argument law exactly for the second decomposition point,
    and the trapezoid mass is compared against the beta power mean of the
    exact input masses, beta = p*alpha*gamma/(alpha+gamma).
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if alpha < -1:
        raise ValueError("alpha must be at least -1")
    if alpha + gamma < 0:
        raise ValueError("gamma must be at least -alpha")
    tol = TOL_1D
    if alpha + gamma == 0:
        beta = -INF
    else:
        beta = p * alpha * gamma / (alpha + gamma)

    log_law = abs(gamma) < S_ZERO_THRESHOLD

    def combine(xa, ya, C, D):
        if log_law:
            return xa ** C * ya ** D
        return (C * xa ** gamma + D * ya ** gamma) ** (1.0 / gamma)

    def one(i):
        rng = trial_rng(seed, i)
        f = random_positive_cap(rng)
        g = random_positive_cap(rng)
        t = float(rng.uniform(0.25, 0.75))
        If = total_mass(f)
        Ig = total_mass(g)
        xf = f.axes()[0]
        fx = f.values
        flo, fhi = f.box()[0][0], f.box()[1][0]
        glo, ghi = g.box()[0][0], g.box()[1][0]

        # Per coefficient pair the argument law is monotone in each input,
        # so support corners bound the reachable output points; endpoint
        # slices scale one input alone.
        pairs = []
        seen = set()
        for lam in np.linspace(0.0, 1.0, lambda_samples):
            C, D = core.lp_coeffs(p, t, lam)
            key = (round(C, 15), round(D, 15))
            if key not in seen:
                seen.add(key)
                pairs.append((C, D))
        zlo, zhi = INF, 0.0
        for C, D in pairs:
            for cf in (flo, fhi):
                for cg in (glo, ghi):
                    if D <= 1e-14:
                        z = cf ** C if log_law \
                            else C ** (1.0 / gamma) * cf
                    elif C <= 1e-14:
                        z = cg ** D if log_law \
                            else D ** (1.0 / gamma) * cg
                    else:
                        z = combine(cf, cg, C, D)
                    zlo, zhi = min(zlo, float(z)), max(zhi, float(z))
        zs = np.linspace(max(1e-3, 0.95 * zlo), 1.02 * zhi, z_nodes)
        h = np.zeros(z_nodes)

        for C, D in pairs:
            if D <= 1e-14 or C <= 1e-14:
                # Endpoint slice: solve the one-input law exactly at every
                # output node and evaluate that input there.
                w = C if D <= 1e-14 else D
                grid = f if D <= 1e-14 else g
                if log_law:
                    pts = zs ** (1.0 / w)
                else:
                    pts = zs * w ** (-1.0 / gamma)
                vals = grid_eval(grid, pts.reshape(-1, 1))
                if alpha != 0.0:
                    contrib = w ** (1.0 / alpha) * vals
                else:
                    contrib = np.where(vals > 0, vals ** w, 0.0)
                h = np.maximum(h, np.where(vals > 0, contrib, 0.0))
                continue
            # Interior pair: sweep x over the first input's nodes plus the
            # diagonal candidate and solve the law exactly for y.
            if log_law:
                with np.errstate(divide="ignore", over="ignore"):
                    Y = (zs[:, None] / xf[None, :] ** C) ** (1.0 / D)
                diag = zs ** (1.0 / (C + D))
            else:
                with np.errstate(invalid="ignore", over="ignore"):
                    arg = (zs[:, None] ** gamma
                           - C * xf[None, :] ** gamma) / D
                    Y = np.where(arg > 0, arg, np.nan) ** (1.0 / gamma)
                diag = zs * (C + D) ** (-1.0 / gamma)
            fxv = np.broadcast_to(fx, Y.shape)
            fdiag = grid_eval(f, diag.reshape(-1, 1))
            X_f = np.concatenate([fxv, fdiag[:, None]], axis=1)
            Y = np.concatenate([Y, diag[:, None]], axis=1)
            ok = np.isfinite(Y) & (Y >= glo) & (Y <= ghi)
            gy = np.zeros(Y.shape)
            if np.any(ok):
                gy[ok] = grid_eval(g, Y[ok].reshape(-1, 1))
            vals = _ms_mean_arrays(alpha, C, D, X_f, gy)
            h = np.maximum(h, vals.max(axis=1))

        lhs = float(np.trapezoid(h, zs))
        rhs = ms_mean(MeanParams(beta, 1.0 - t, t), If, Ig)
        slack, ok = _rel_pass(lhs, rhs, tol)
        return TrialRecord("half-line mass bound", lhs, rhs, slack, ok,
                           seed=i, params="t=%.4g If=%.6g Ig=%.6g"
                           % (t, If, Ig))

    records = _map_trials(one, trials, threads)
    return VerificationReport(
        "lpgamma-bbl-1d p=%g alpha=%g gamma=%g" % (p, alpha, gamma),
        records, tolerance=tol)


# ---------------------------------------------------------------------------
# sampled-condition concavity checks
# ---------------------------------------------------------------------------

def _sample_eval(f, box):
    """Evaluation closure, dimension, and sampling box for f."""
    if isinstance(f, GridFn):
        dim = f.dim
        if box is None:
            pos = np.argwhere(f.values > 0)
            if len(pos) == 0:
                lo, hi = f.box()
            else:
                lo = f.origin + (pos.min(axis=0) - 1) * f.spacing
                hi = f.origin + (pos.max(axis=0) + 1) * f.spacing
            box = (lo, hi)

        def ev(pts):
            return grid_eval(f, pts)
        return ev, dim, box
    if box is None:
        if hasattr(f, "box"):
            box = f.box()
        else:
            raise ValueError("a sampling box is required for callables")
    lo = np.atleast_1d(np.asarray(box[0], dtype=float))
    dim = len(lo)

    def ev(pts):
        if dim == 1:
            return np.asarray(f(pts[:, 0]), dtype=float)
        return np.asarray(f(pts), dtype=float)
    return ev, dim, (lo, np.atleast_1d(np.asarray(box[1], dtype=float)))


def _condition_rhs(variant, s, C, D, fx, fy):
    if variant == "concave":
        return _ms_mean_arrays(s, C, D, fx, fy)
    if variant == "quasi":
        return np.where((fx > 0) & (fy > 0), np.minimum(fx, fy), 0.0)
    if variant == "lps_quasi":
        with np.errstate(divide="ignore"):
            ca = np.where(C > 0, C ** s, INF if s < 0 else 0.0)
            da = np.where(D > 0, D ** s, INF if s < 0 else 0.0)
        return np.where((fx > 0) & (fy > 0),
                        np.minimum(ca * fx, da * fy), 0.0)
    raise ValueError("variant must be concave, quasi, or lps_quasi")


def is_lps_concave(f, p, s, sample_count, seed=0, variant="auto", box=None,
                   tol=TOL_EXACT):
    """Sampled check of the coefficient-pair concavity condition.

    Draws (x, y, lam, t) tuples, keeps the pairs where both values are
    positive (the others hold trivially under the vanishing-mean
    convention), and checks f(Cx + Dy) against the variant's right side.
    f is a grid function or a callable with a sampling box. Failures are
    recorded individually with their witness tuples.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if variant == "auto":
        variant = "quasi" if s == -INF else "concave"
    ev, dim, (lo, hi) = _sample_eval(f, box)
    rng = trial_rng(seed, 0)
    m = int(sample_count)
    x = rng.uniform(lo, hi, (m, dim))
    y = rng.uniform(lo, hi, (m, dim))
    lam = rng.uniform(0.0, 1.0, m)
    t = rng.uniform(0.0, 1.0, m)
    C, D = _cd_arrays(p, t, lam)
    fx = ev(x)
    fy = ev(y)
    z = C[:, None] * x + D[:, None] * y
    lhs = ev(z)
    rhs = _condition_rhs(variant, s, C, D, fx, fy)
    slack = lhs - rhs
    margin = tol * np.maximum(1.0, np.abs(rhs))
    bad = slack < -margin
    nontrivial = int(np.count_nonzero((fx > 0) & (fy > 0)))

    records = []
    worst = int(np.argmin(slack - margin))
    for idx in list(np.flatnonzero(bad)[:32]):
        records.append(TrialRecord(
            "violation at x=%s y=%s lam=%.6g t=%.6g" % (
                np.array2string(x[idx], precision=6),
                np.array2string(y[idx], precision=6), lam[idx], t[idx]),
            float(lhs[idx]), float(rhs[idx]), float(slack[idx]), False,
            seed=seed, params="variant=%s" % variant))
    records.append(TrialRecord(
        "min slack over %d samples (%d nontrivial); worst at "
        "lam=%.6g t=%.6g" % (m, nontrivial, lam[worst], t[worst]),
        float(lhs[worst]), float(rhs[worst]), float(slack[worst]),
        not np.any(bad), seed=seed, params="variant=%s" % variant))
    return VerificationReport(
        "lps-concavity p=%g s=%s variant=%s" % (
            p, "inf" if s == INF else "-inf" if s == -INF else "%g" % s,
            variant),
        records, tolerance=tol)


def is_lpsgamma_concave_1d(f, p, s, gamma, samples, seed=0, variant="auto",
                           box=None, tol=TOL_EXACT):
    """Sampled concavity condition with a gamma-mean argument law.

    Works on (0, inf): the combined point is the sub-probability gamma
    mean of x and y (their C, D power product at gamma = 0).
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if variant == "auto":
        variant = "quasi" if s == -INF else "concave"
    ev, dim, (lo, hi) = _sample_eval(f, box)
    if dim != 1:
        raise ValueError("the gamma-argument condition is one-dimensional")
    if not lo[0] > 0:
        raise ValueError("the sampling box must lie inside (0, inf)")
    rng = trial_rng(seed, 1)
    m = int(samples)
    x = rng.uniform(lo[0], hi[0], m)
    y = rng.uniform(lo[0], hi[0], m)
    lam = rng.uniform(0.0, 1.0, m)
    t = rng.uniform(0.0, 1.0, m)
    C, D = _cd_arrays(p, t, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = _gamma_combine(x, y, C, D, gamma)
    usable = np.isfinite(z) & (z > 0)
    x, y, z, C, D, lam, t = (a[usable] for a in (x, y, z, C, D, lam, t))
    fx = ev(x)
    fy = ev(y)
    lhs = ev(z)
    rhs = _condition_rhs(variant, s, C, D, fx, fy)
    slack = lhs - rhs
    margin = tol * np.maximum(1.0, np.abs(rhs))
    bad = slack < -margin
    records = []
    if len(slack):
        worst = int(np.argmin(slack - margin))
        for idx in list(np.flatnonzero(bad)[:32]):
            records.append(TrialRecord(
                "violation at x=%.6g y=%.6g lam=%.6g t=%.6g" % (
                    x[idx], y[idx], lam[idx], t[idx]),
                float(lhs[idx]), float(rhs[idx]), float(slack[idx]),
                False, seed=seed, params="variant=%s" % variant))
        records.append(TrialRecord(
            "min slack over %d usable samples" % len(slack),
            float(lhs[worst]), float(rhs[worst]), float(slack[worst]),
            not np.any(bad), seed=seed, params="variant=%s" % variant))
    else:
        records.append(TrialRecord("no usable samples", 0.0, 0.0, 0.0,
                                   True, seed=seed))
    return VerificationReport(
        "lpsgamma-concavity p=%g s=%g gamma=%g variant=%s" % (p, s, gamma,
                                                              variant),
        records, tolerance=tol)


def _inv_exponent(v):
    if v == INF:
        return 0.0
    if v == 0.0:
        return INF
    return 1.0 / v


def verify_convolution_concavity(trials, p, s, beta_exp, seed=0,
                                 samples=512, threads=None):
    """Concavity class of the integral convolution of two instances.

    Supported exponent pairs keep both factors exactly evaluable: both
    +inf (interval indicators, closed-form overlap), or both in {0, 1}
    (piecewise-linear concave caps, exact B-spline convolution). The
    conclusion exponent is the harmonic combination with the dimension
    term; below the quasi threshold the min-form variant is checked.
    """
    if s + beta_exp < 0:
        raise ValueError("the exponents must not sum below zero")
    both_inf = s == INF and beta_exp == INF
    if not both_inf and not (s in (0.0, 1.0) and beta_exp in (0.0, 1.0)):
        raise ValueError("supported exponent pairs: both +inf, or both "
                         "in {0, 1}")
    inv = _inv_exponent(s) + _inv_exponent(beta_exp)
    gamma = INF if inv == 0.0 else (0.0 if inv == INF else 1.0 / inv)
    if gamma >= -1.0:
        g0 = 0.0 if inv == INF else 1.0 / (inv + 1.0)
        variant = "concave"
    else:
        g0 = inv + 1.0
        variant = "lps_quasi"

    def one(i):
        rng = trial_rng(seed, i)
        if both_inf:
            ka, kb = random_interval(rng)
            la, lb = random_interval(rng)

            def H(w):
                lo = np.maximum(ka, np.asarray(w) - lb)
                hi = np.minimum(kb, np.asarray(w) - la)
                return np.maximum(hi - lo, 0.0)
            box = (np.array([ka + la]), np.array([kb + lb]))
            rep = is_lps_concave(H, p, g0, samples, seed=seed * 7919 + i,
                                 variant=variant, box=box)
        else:
            fcap = random_concave_cap(rng)
            gcap = random_concave_cap(rng)
            conv = PLConvolution(fcap, gcap)
            if (s == 0.0 or beta_exp == 0.0) and conv(0.0) < 1.0:
                raise AssertionError("generator invariant H(0) >= 1 broke")
            rep = is_lps_concave(conv, p, g0, samples,
                                 seed=seed * 7919 + i, variant=variant)
        recs = []
        for r in rep.records:
            recs.append(dataclasses.replace(r, label="trial %d: %s"
                                            % (i, r.label), seed=i))
        return recs

    nested = _map_trials(one, trials, threads)
    records = [r for sub in nested for r in sub]
    return VerificationReport(
        "convolution-concavity p=%g s=%s beta=%s" % (
            p, "inf" if s == INF else "%g" % s,
            "inf" if beta_exp == INF else "%g" % beta_exp),
        records, tolerance=TOL_EXACT)


def _clip_line_to_polygon(K, point, direction):
    """Parameter interval of {point + t*direction} inside a convex polygon."""
    t0, t1 = -INF, INF
    m = len(K)
    for a in range(m):
        pa, pb = K[a], K[(a + 1) % m]
        edge = pb - pa
        nrm = np.array([edge[1], -edge[0]])
        interior = K.mean(axis=0) - pa
        if np.dot(nrm, interior) > 0:
            nrm = -nrm
        num = np.dot(nrm, pa - point)
        den = np.dot(nrm, direction)
        if abs(den) < 1e-15:
            if np.dot(nrm, point - pa) > 1e-12:
                return 0.0, 0.0
            continue
        tc = num / den
        if den > 0:
            t1 = min(t1, tc)
        else:
            t0 = max(t0, tc)
    if t0 >= t1:
        return 0.0, 0.0
    return t0, t1


def verify_section_concavity(K, density, H, p, s, j, samples=512, seed=0,
                             offsets=129, quad_nodes=257, tol=None):
    """Concavity class of the slice masses of a convex body.

    K is a convex polygon (vertex array); H a line frame (2-vector or an
    object with a frame attribute); density a callable on (m, 2) point
    arrays or None for Lebesgue measure. The slice mass as a function of
    the offset along the orthogonal direction is assembled by exact
    segment clipping and checked at the branch exponent.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[1] != 2:
        raise ValueError("K must be a planar vertex array")
    frame = getattr(H, "frame", H)
    e = np.asarray(frame, dtype=float).reshape(-1)
    if e.shape != (2,):
        raise ValueError("H must describe a line in the plane")
    e = e / np.linalg.norm(e)
    k = 2 - j
    if k != 1:
        raise ValueError("slice masses are checked for j = 1 in the plane")
    perp = np.array([-e[1], e[0]])

    offs_all = K @ perp
    olo, ohi = float(offs_all.min()), float(offs_all.max())
    pad = 1e-9 * max(1.0, ohi - olo)
    grid = np.linspace(olo + pad, ohi - pad, offsets)
    vals = np.zeros(offsets)
    for idx, o in enumerate(grid):
        t0, t1 = _clip_line_to_polygon(K, o * perp, e)
        if t1 <= t0:
            continue
        if density is None:
            vals[idx] = t1 - t0
        else:
            ts = np.linspace(t0, t1, quad_nodes)
            pts = o * perp[None, :] + ts[:, None] * e[None, :]
            vals[idx] = np.trapezoid(np.asarray(density(pts)), ts)
    section = GridFn(np.array([grid[0]]),
                     np.array([grid[1] - grid[0]]), vals, "density")

    if s == INF:
        expo = 1.0
        variant = "concave"
    elif s >= -1.0 / k + 1e-12 or s == 0.0:
        expo = s / (1.0 + k * s)
        variant = "concave"
    else:
        expo = k + 1.0 / s
        variant = "lps_quasi"
    if tol is None:
        tol = TOL_EXACT if density is None else TOL_1D
    rep = is_lps_concave(section, p, expo, samples, seed=seed,
                         variant=variant, tol=tol)
    return VerificationReport(
        "section-concavity p=%g s=%s j=%d" % (
            p, "inf" if s == INF else "%g" % s, j),
        rep.records, tolerance=tol)


def verify_quermass_bbl(trials, p, alpha, gamma, t, j, seed=0,
                        subspace_count=48, lambda_samples=9, threads=None):
    """Projection-average inequality for the weighted convolution.

    Planar instances; the j-th projection average of the convolution is
    checked against the beta power mean of the input averages at the
    Monte Carlo tolerance max(5 percent, three standard errors).
    """
    from . import quermass as qm
    if p < 1:
        raise ValueError("p must be at least 1")
    n = 2
    if not 0 <= j <= n - 1:
        raise ValueError("j must lie in {0, ..., n-1}")
    if alpha + gamma <= 0:
        raise ValueError("gamma must exceed -alpha")
    if alpha < -1 or alpha > 1.0 / (n - j):
        raise ValueError("alpha must lie in [-1, 1/(n-j)]")
    beta = p * alpha * gamma / (alpha + gamma)

    def one(i):
        rng = trial_rng(seed, i)
        f = random_sconcave(rng, n, alpha)
        g = random_sconcave(rng, n, alpha)
        grid = (f.base.origin, f.base.spacing, f.base.shape)
        params = ConvolveParams(p, alpha, t=t,
                                lambda_samples=lambda_samples,
                                refine_rounds=1)
        h = convolve.lps_sup_convolution(f, g, params, out_grid=grid)
        subs = qm.sample_grassmannian(n, n - j, subspace_count,
                                      seed=int(seed) * 100003 + i)
        Wh, sh = qm.quermass_fn(h, j, subspaces=subs, return_stats=True)
        Wf, sf = qm.quermass_fn(f.density(grid), j, subspaces=subs,
                                return_stats=True)
        Wg, sg = qm.quermass_fn(g.density(grid), j, subspaces=subs,
                                return_stats=True)
        rhs = ms_mean(MeanParams(beta, 1.0 - t, t), Wf, Wg)
        band = max(TOL_MC * max(abs(rhs), 1e-12), 3.0 * (sh + sf + sg))
        slack = Wh - rhs
        return TrialRecord("projection average bound", Wh, rhs, slack,
                           slack >= -band, seed=i,
                           params="Wf=%.6g Wg=%.6g band=%.3g" % (Wf, Wg,
                                                                 band))

    records = _map_trials(one, trials, threads)
    return VerificationReport(
        "quermass-bbl p=%g alpha=%g gamma=%g t=%g j=%d" % (p, alpha, gamma,
                                                           t, j),
        records, tolerance=TOL_MC)
