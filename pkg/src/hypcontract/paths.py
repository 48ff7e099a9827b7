"""Lengths and distances for conformal metric densities, and the pointwise
Lipschitz modulus that bounds how a function pushes one density onto another.

The variational distance estimator works in two stages. A shortest path on
a 16-neighbour lattice over the search region gives the topology of a
near-optimal curve; that path is resampled to a polyline and its vertices are
then moved to minimise the density length directly, which removes the
direction bias of the lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize, sparse
from scipy.sparse import csgraph

from . import quadrature
from .core import Domain, DomainPoint, MetricDensity, contains
from .errors import DomainError, QuadratureError
from .report import FAIL, PASS, VerificationReport

REGION_MARGIN = 1e-3
INITIAL_LATTICE = 64
MAX_LATTICE = 512
LATTICE_RTOL = 1e-3
SMOOTHING_RTOL = 1e-6
SMOOTHING_VERTICES = (32, 64, 128)
_GL_NODES, _GL_WEIGHTS = quadrature.fixed_gauss_legendre(8)

# 16-neighbourhood offsets, one of each +/- pair
_OFFSETS = np.array([(1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)])


def _raw(p):
    return p.value if isinstance(p, DomainPoint) else p


@dataclass(frozen=True)
class Curve:
    """Polyline through ``vertices`` in a domain, oriented first to last."""

    vertices: np.ndarray
    domain: Domain

    def __post_init__(self):
        v = np.array([_raw(p) for p in self.vertices])
        v = v.astype(complex) if self.domain.is_planar else np.real(v).astype(float)
        if v.ndim != 1 or len(v) < 2:
            raise DomainError("a curve needs at least two vertices")
        if np.any(v[1:] == v[:-1]):
            raise DomainError("consecutive curve vertices must be distinct")
        if not np.all(contains(self.domain, v)):
            raise DomainError(f"curve leaves the open {self.domain.value}")
        object.__setattr__(self, "vertices", v)

    def reversed(self) -> "Curve":
        return Curve(self.vertices[::-1], self.domain)

    def __add__(self, other: "Curve") -> "Curve":
        if self.vertices[-1] != other.vertices[0]:
            raise DomainError("curves must share the junction vertex")
        return Curve(np.concatenate([self.vertices, other.vertices[1:]]), self.domain)

    def refined(self, factor: int = 2) -> "Curve":
        """Same polyline with each segment split into ``factor`` pieces."""
        s = np.arange(factor) / factor
        v = self.vertices
        pts = (v[:-1, None] + s[None, :] * (v[1:] - v[:-1])[:, None]).ravel()
        return Curve(np.append(pts, v[-1]), self.domain)


def _check_density(density: MetricDensity, pts):
    vals = np.asarray(density(pts), dtype=float)
    if not np.all(np.isfinite(vals) & (vals > 0.0)):
        bad = np.ravel(pts)[~np.ravel(np.isfinite(vals) & (vals > 0.0))][0]
        raise DomainError(f"density {density.name!r} is not positive at {bad!r}")
    return vals


def rho_length(curve: Curve, density: MetricDensity, tol: float = quadrature.DEFAULT_TOL) -> float:
    """Density length of a polyline, integrated segment by segment."""
    if curve.domain is not density.domain:
        raise DomainError(f"curve lives in {curve.domain.value}, density in {density.domain.value}")
    v = curve.vertices
    start, delta = v[:-1], v[1:] - v[:-1]
    seglen = np.abs(delta)
    if np.all(seglen == 0.0):
        return 0.0

    def integrand(s):
        pts = start[None, :] + s[:, None] * delta[None, :]
        return _check_density(density, pts) * seglen[None, :]

    val, _ = quadrature.gauss_kronrod(integrand, 0.0, 1.0, tol=tol / len(seglen))
    return float(np.sum(val))


# --------------------------------------------------------------------------
# variational distance


@dataclass(frozen=True)
class Region:
    """Axis-aligned box, optionally intersected with the disc ``|z| <= radius``."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    radius: Optional[float] = None

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise DomainError(f"degenerate region {self}")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        ok = (np.real(z) >= self.xmin) & (np.real(z) <= self.xmax)
        ok &= (np.imag(z) >= self.ymin) & (np.imag(z) <= self.ymax)
        if self.radius is not None:
            ok &= np.abs(z) <= self.radius
        return ok

    def corners(self):
        return np.array([complex(x, y) for x in (self.xmin, self.xmax) for y in (self.ymin, self.ymax)])


def search_region(z: complex, w: complex, domain: Domain) -> Region:
    """Bounding box of ``{z, w}`` inflated by half its diagonal, clipped to the domain."""
    xs, ys = (z.real, w.real), (z.imag, w.imag)
    pad = 0.5 * math.hypot(max(xs) - min(xs), max(ys) - min(ys))
    box = [min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad]
    if domain is Domain.HALFPLANE:
        box[2] = max(box[2], REGION_MARGIN)
        return Region(*box)
    if domain is Domain.DISC:
        r = 1.0 - REGION_MARGIN
        box = [max(box[0], -r), min(box[1], r), max(box[2], -r), min(box[3], r)]
        return Region(*box, radius=r)
    raise DomainError("variational search needs a planar domain")


@dataclass
class GeodesicEstimate:
    value: float
    curve: Curve
    lattice_value: float
    lattice_size: int
    vertices: int


def _axis(p, q, lo, hi, n):
    """About ``n`` equally spaced nodes covering ``[lo, hi]`` with ``p`` and ``q`` among them."""
    if p == q:
        h = (hi - lo) / (n - 1)
    else:
        k = max(1, round((n - 1) * abs(q - p) / (hi - lo)))
        h = abs(q - p) / k
    first = min(p, q)
    return first + h * np.arange(-math.floor((first - lo) / h), math.floor((hi - first) / h) + 1)


def _lattice_path(z, w, density: MetricDensity, region: Region, n: int):
    xs = _axis(z.real, w.real, region.xmin, region.xmax, n)
    ys = _axis(z.imag, w.imag, region.ymin, region.ymax, n)
    grid = xs[None, :] + 1j * ys[:, None]
    ny, nx = grid.shape
    valid = region.contains(grid) & contains(density.domain, grid)
    idx = np.arange(nx * ny).reshape(ny, nx)
    rows, cols, wts = [], [], []
    for dx, dy in _OFFSETS:
        # (row j, col i) -> (row j + dy, col i + dx)
        j0, j1 = max(0, -dy), ny - max(0, dy)
        i0, i1 = max(0, -dx), nx - max(0, dx)
        a = grid[j0:j1, i0:i1]
        b = grid[j0 + dy:j1 + dy, i0 + dx:i1 + dx]
        ok = valid[j0:j1, i0:i1] & valid[j0 + dy:j1 + dy, i0 + dx:i1 + dx]
        mid = 0.5 * (a + b)
        ok &= contains(density.domain, mid)
        wt = np.abs(b - a)[ok] * _check_density(density, mid[ok])
        rows.append(idx[j0:j1, i0:i1][ok])
        cols.append(idx[j0 + dy:j1 + dy, i0 + dx:i1 + dx][ok])
        wts.append(wt)
    rows, cols, wts = np.concatenate(rows), np.concatenate(cols), np.concatenate(wts)
    graph = sparse.coo_matrix((wts, (rows, cols)), shape=(nx * ny, nx * ny)).tocsr()

    flat, vflat = grid.ravel(), valid.ravel()
    cand = np.flatnonzero(vflat)
    src = cand[np.argmin(np.abs(flat[cand] - z))]
    dst = cand[np.argmin(np.abs(flat[cand] - w))]
    dist, pred = csgraph.dijkstra(graph, directed=False, indices=src, return_predecessors=True)
    if not np.isfinite(dist[dst]):
        raise DomainError("search lattice does not connect the two points; supply a region")
    path = [dst]
    while path[-1] != src:
        path.append(pred[path[-1]])
    nodes = flat[np.array(path[::-1])]
    pts = np.concatenate([[z], nodes, [w]])
    keep = np.concatenate([[True], pts[1:] != pts[:-1]])
    pts = pts[keep]
    seg = pts[1:] - pts[:-1]
    value = float(np.sum(np.abs(seg) * density(0.5 * (pts[1:] + pts[:-1]))))
    return pts, value


def _density_gradient(density: MetricDensity):
    if density.gradient is not None:
        return density.gradient

    def grad(p):
        h = 1e-6 * np.maximum(np.abs(p), 1.0)
        gx = (density(p + h) - density(p - h)) / (2 * h)
        gy = (density(p + 1j * h) - density(p - 1j * h)) / (2 * h)
        return gx + 1j * gy

    return grad


def _to_free(v, domain):
    """Coordinates in which every real pair is a point of the domain."""
    if domain is Domain.HALFPLANE:
        return np.real(v), np.log(np.imag(v))
    if domain is Domain.DISC:
        zeta = v / np.sqrt((1.0 - np.abs(v)) * (1.0 + np.abs(v)))
        return np.real(zeta), np.imag(zeta)
    raise DomainError("smoothing needs a planar domain")


def _from_free(a, b, domain):
    """Inverse of :func:`_to_free` plus the Jacobian entries (dx/da, dx/db, dy/da, dy/db)."""
    if domain is Domain.HALFPLANE:
        e = np.exp(b)
        return a + 1j * e, (np.ones_like(a), np.zeros_like(a), np.zeros_like(a), e)
    s = np.sqrt(1.0 + a * a + b * b)
    s3 = s ** 3
    return (a + 1j * b) / s, (1.0 / s - a * a / s3, -a * b / s3, -a * b / s3, 1.0 / s - b * b / s3)


def _smooth(pts, density: MetricDensity):
    """Minimise the polyline length over normal offsets of its interior vertices.

    Offsets are taken in free coordinates, so every trial polyline stays in
    the domain; one degree of freedom per vertex removes the near-null
    directions that sliding vertices along the curve would introduce.
    """
    z, w = pts[0], pts[-1]
    domain = density.domain
    grad_rho = _density_gradient(density)
    s, wq = _GL_NODES, _GL_WEIGHTS
    a, b = _to_free(pts, domain)
    base = a + 1j * b
    tangent = base[2:] - base[:-2]
    normal = 1j * tangent / np.abs(tangent)
    base = base[1:-1]

    def polyline(t):
        f = base + t * normal
        inner, jac = _from_free(np.real(f), np.imag(f), domain)
        return np.concatenate([[z], inner, [w]]), jac

    def objective(t):
        v, (xa, xb, ya, yb) = polyline(t)
        d = v[1:] - v[:-1]
        q = v[:-1, None] + s[None, :] * d[:, None]
        rho = density(q)
        L = np.abs(d)
        total = float(np.sum(L[:, None] * wq[None, :] * rho))
        u = d / np.where(L > 0, L, 1.0)
        g = grad_rho(q)
        # gradients w.r.t. the segment end points, packed as gx + i gy
        along = np.sum(wq[None, :] * rho, axis=1) * u
        gi = -along + L * np.sum(wq[None, :] * (1 - s)[None, :] * g, axis=1)
        gj = along + L * np.sum(wq[None, :] * s[None, :] * g, axis=1)
        gv = gi[1:] + gj[:-1]
        ga = np.real(gv) * xa + np.imag(gv) * ya
        gb = np.real(gv) * xb + np.imag(gv) * yb
        return total, ga * np.real(normal) + gb * np.imag(normal)

    res = optimize.minimize(objective, np.zeros(len(base)), jac=True, method="L-BFGS-B",
                            options={"ftol": 1e-15, "gtol": 1e-13, "maxiter": 5000, "maxcor": 30})
    return polyline(res.x)[0], float(res.fun)


def _smooth_until_stable(pts, density: MetricDensity, rounds: int = 4):
    """Repeat :func:`_smooth`, rebuilding the normals from the previous optimum."""
    best, best_len = _smooth(pts, density)
    for _ in range(rounds - 1):
        poly, approx = _smooth(best, density)
        gain = (best_len - approx) / approx
        if approx < best_len:
            best, best_len = poly, approx
        if gain < SMOOTHING_RTOL:
            break
    return best, best_len


def _resample_by_density(pts, density, m):
    """Resample a polyline to ``m`` vertices evenly spaced in approximate density length."""
    pts = pts[np.concatenate([[True], pts[1:] != pts[:-1]])]
    seg = np.abs(np.diff(pts)) * density(0.5 * (pts[1:] + pts[:-1]))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.linspace(0.0, s[-1], m)
    out = np.interp(target, s, np.real(pts)) + 1j * np.interp(target, s, np.imag(pts))
    out[0], out[-1] = pts[0], pts[-1]
    return out


def variational_distance(z, w, density: MetricDensity, region: Optional[Region] = None) -> GeodesicEstimate:
    """Estimate the density distance between two planar points from above."""
    z, w = complex(_raw(z)), complex(_raw(w))
    if not (contains(density.domain, z) and contains(density.domain, w)):
        raise DomainError(f"endpoints must lie in the open {density.domain.value}")
    if z == w:
        return GeodesicEstimate(0.0, None, 0.0, 0, 0)
    if region is None:
        region = search_region(z, w, density.domain)
    if not (region.contains(z) and region.contains(w)):
        raise DomainError("search region must contain both endpoints")

    n = INITIAL_LATTICE
    pts, value = _lattice_path(z, w, density, region, n)
    while n < MAX_LATTICE:
        pts2, value2 = _lattice_path(z, w, density, region, 2 * n)
        n *= 2
        change = abs(value2 - value) / value2
        pts, value = pts2, value2
        if change < LATTICE_RTOL:
            break

    # the lattice path fixes the topology, the straight segment in free
    # coordinates is a smooth seed for short or nearly straight geodesics
    a, b = _to_free(np.array([z, w]), density.domain)
    seg = np.linspace(a[0] + 1j * b[0], a[1] + 1j * b[1], SMOOTHING_VERTICES[0])
    straight = _from_free(np.real(seg), np.imag(seg), density.domain)[0]
    straight[0], straight[-1] = z, w
    seeds = [_resample_by_density(pts, density, SMOOTHING_VERTICES[0]), straight]
    best, best_len = min((_smooth_until_stable(p, density) for p in seeds), key=lambda r: r[1])
    for m in SMOOTHING_VERTICES[1:]:
        poly, approx = _smooth_until_stable(_resample_by_density(best, density, m), density)
        improvement = (best_len - approx) / approx
        if approx < best_len:
            best, best_len = poly, approx
        if improvement < SMOOTHING_RTOL:
            break
    curve = Curve(best[np.concatenate([[True], best[1:] != best[:-1]])], density.domain)
    return GeodesicEstimate(rho_length(curve, density), curve, value, n, len(best))


def rho_distance(z, w, density: MetricDensity, region: Optional[Region] = None,
                 variational: bool = False) -> float:
    """Density distance between ``z`` and ``w``.

    Uses the density's closed form when it has one (unless ``variational``
    is set). On the ray and the interval the distance is the length of the
    segment; in planar domains the lattice-plus-smoothing estimator is run.
    """
    z, w = _raw(z), _raw(w)
    if density.closed_form_distance is not None and not variational:
        return float(density.closed_form_distance(z, w))
    if not density.domain.is_planar:
        if z == w:
            return 0.0
        return rho_length(Curve([z, w], density.domain), density)
    return variational_distance(z, w, density, region).value


# --------------------------------------------------------------------------
# Lipschitz modulus and the pushforward inequality


@dataclass(frozen=True)
class SmoothTestFunction:
    """A C^1 real function given by vectorised value and gradient callables."""

    value_fn: Callable
    gradient_fn: Callable
    domain: Domain = Domain.HALFPLANE
    name: str = "smooth"

    def value(self, z):
        return self.value_fn(np.asarray(z, dtype=complex))

    def gradient(self, z):
        return self.gradient_fn(np.asarray(z, dtype=complex))


def wavy_test_function(amplitude: float = 0.1) -> SmoothTestFunction:
    """``u(z) = Im z (1 + a sin(Re z) exp(-Im z))``: positive, smooth, not harmonic."""

    def value(z):
        x, y = np.real(z), np.imag(z)
        return y * (1.0 + amplitude * np.sin(x) * np.exp(-y))

    def grad(z):
        x, y = np.real(z), np.imag(z)
        e = np.exp(-y)
        return np.stack([amplitude * y * np.cos(x) * e,
                         1.0 + amplitude * np.sin(x) * e * (1.0 - y)], axis=-1)

    return SmoothTestFunction(value, grad, Domain.HALFPLANE, f"wavy(a={amplitude!r})")


@dataclass
class ModulusReport:
    """Largest sampled value of ``rho_tilde(u) |grad u| / rho``; a lower bound of the true sup."""

    sup_estimate: float
    witness: complex
    sample_count: int
    seed: Optional[int] = None


def stratified_samples(region: Region, n: int, rng: np.random.Generator) -> np.ndarray:
    """One jittered sample per cell of a ``ceil(sqrt n)``-square stratification.

    For a disc region the cells are taken in ``(r^2, angle)`` so they have
    equal area.
    """
    m = max(1, math.ceil(math.sqrt(n)))
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    u = (i.ravel() + rng.random(m * m)) / m
    v = (j.ravel() + rng.random(m * m)) / m
    order = rng.permutation(m * m)[:n]
    u, v = u[order], v[order]
    if region.radius is not None and (region.xmin <= -region.radius and region.xmax >= region.radius
                                      and region.ymin <= -region.radius and region.ymax >= region.radius):
        return region.radius * np.sqrt(u) * np.exp(2j * math.pi * v)
    pts = region.xmin + u * (region.xmax - region.xmin) + 1j * (region.ymin + v * (region.ymax - region.ymin))
    if region.radius is not None:
        pts = pts[np.abs(pts) <= region.radius]
    return pts


def _modulus_values(u, rho: MetricDensity, rho_tilde: MetricDensity, pts):
    vals = np.asarray(u.value(pts), dtype=float)
    inside = contains(rho_tilde.domain, vals)
    if not np.all(inside):
        bad = np.ravel(pts)[~np.ravel(inside)][0]
        raise DomainError(f"u leaves the {rho_tilde.domain.value} at {complex(bad)!r}")
    grad = np.linalg.norm(u.gradient(pts), axis=-1)
    return rho_tilde(vals) * grad / rho(pts)


def lipschitz_modulus(u, rho: MetricDensity, rho_tilde: MetricDensity, region: Region,
                      n: int = 4096, seed: int = 0, refine: bool = True) -> ModulusReport:
    """Estimate ``sup rho_tilde(u(z)) |grad u(z)| / rho(z)`` over ``region``.

    Stratified samples are evaluated first; with ``refine`` the best few are
    then polished by a bounded local maximiser. The estimate is the maximum
    over every point actually evaluated.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    pts = stratified_samples(region, n, rng)
    vals = _modulus_values(u, rho, rho_tilde, pts)
    best = int(np.argmax(vals))
    sup, witness, count = float(vals[best]), complex(pts[best]), len(pts)
    if refine:
        bounds = [(region.xmin, region.xmax), (region.ymin, region.ymax)]
        for start in pts[np.argsort(vals)[-4:]]:
            seen = []

            def neg(x):
                p = complex(x[0], x[1])
                if region.radius is not None and abs(p) > region.radius:
                    return 0.0
                val = float(_modulus_values(u, rho, rho_tilde, np.array([p]))[0])
                seen.append((val, p))
                return -val

            optimize.minimize(neg, [start.real, start.imag], method="L-BFGS-B", bounds=bounds,
                              options={"maxiter": 200})
            count += len(seen)
            val, p = max(seen, key=lambda t: t[0])
            if val > sup:
                sup, witness = val, p
    return ModulusReport(sup, witness, count, seed)


def pushforward_distance_check(u, rho: MetricDensity, rho_tilde: MetricDensity, pairs,
                               modulus: float, tol: float = 1e-6, model: str = "u",
                               seed: Optional[int] = None,
                               degenerate: float = 1e-9) -> VerificationReport:
    """Check ``d_rho_tilde(u(z), u(w)) <= L d_rho(z, w)`` on the given pairs.

    The verdict uses the ratio form ``d_rho_tilde / d_rho <= L + tol``;
    pairs with ``d_rho < degenerate`` are instead required to have
    ``d_rho_tilde <= tol``.
    """
    pairs = np.asarray(pairs, dtype=complex)
    z, w = pairs[:, 0], pairs[:, 1]
    uz, uw = np.asarray(u.value(z)), np.asarray(u.value(w))
    for vals, pts in ((uz, z), (uw, w)):
        inside = contains(rho_tilde.domain, vals)
        if not np.all(inside):
            raise DomainError(f"u leaves the {rho_tilde.domain.value} at {complex(pts[~inside][0])!r}")
    lhs = np.array([rho_distance(a, b, rho_tilde) for a, b in zip(uz, uw)])
    if rho.closed_form_distance is not None:
        rhs = np.asarray(rho.closed_form_distance(z, w), dtype=float)
    else:
        rhs = np.array([rho_distance(a, b, rho) for a, b in zip(z, w)])
    return ratio_report("pushforward", model, lhs, rhs, z, w, tol, seed, bound=modulus,
                        degenerate=degenerate)


def ratio_report(check, model, lhs, rhs, z, w, tol, seed=None, bound=1.0, degenerate=1e-9,
                 details=None) -> VerificationReport:
    """Fold per-pair sides of ``lhs <= bound * rhs`` into a report.

    Ratios are ``lhs / rhs`` (not divided by ``bound``); the verdict is
    ``ratio <= bound + tol``. Pairs with ``rhs < degenerate`` are excluded
    from the ratio and must satisfy ``lhs <= tol``.
    """
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        raise QuadratureError(f"{check}: non-finite distance for model {model}")
    good = rhs >= degenerate
    ratios = np.where(good, lhs / np.where(good, rhs, 1.0), -np.inf)
    ok = np.where(good, ratios <= bound + tol, lhs <= tol)
    if good.any():
        k = int(np.argmax(ratios))
        max_ratio, min_ratio = float(ratios[k]), float(ratios[good].min())
    else:
        k = int(np.argmax(lhs)) if len(lhs) else 0
        max_ratio = min_ratio = float("nan")
    if not ok.all():
        k = int(np.flatnonzero(~ok)[np.argmax(np.where(good, ratios, lhs)[~ok])])
    info = {"degenerate_pairs": int((~good).sum())}
    info.update(details or {})
    return VerificationReport(
        check=check, model=model, n=len(lhs), max_ratio=max_ratio,
        witness_z=complex(z[k]) if len(lhs) else None, witness_w=complex(w[k]) if len(lhs) else None,
        tolerance=tol, verdict=PASS if ok.all() else FAIL, seed=seed,
        min_ratio=min_ratio, bound=bound, details=info,
    )
