"""Numerical checks of the hyperbolic contraction inequalities and certification
of their equality cases.

Every check returns a :class:`~hypcontract.report.VerificationReport`. Ratio
checks compare the two sides pairwise; pairs whose right-hand side is below
``DEGENERATE`` are excluded from the ratio and instead must have a left-hand
side no larger than the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy import optimize

from . import quadrature
from .core import (Domain, MobiusD, MobiusH, dist_disc, dist_halfplane, dist_interval, dist_ray,
                   one_minus_abs2)
from .errors import DomainError, HypContractError, QuadratureError
from .harmonic import fd_gradient
from .paths import Region, ratio_report
from .report import FAIL, PASS, VerificationReport

DEGENERATE = 1e-9
EXACT_TOL = 1e-12
NUMERIC_TOL = 1e-6
FIT_RESIDUAL = 1e-8
TIE_BREAK = 1e-10
KV_CONSTANT = 4.0 / math.pi

HALFPLANE_BOX = Region(-5.0, 5.0, 0.05, 5.0)
DISC_RADIUS = 0.9


class CorpusError(DomainError):
    """A corpus member violated its own mapping property (not an inequality failure)."""


# --------------------------------------------------------------------------
# sampling


def make_rng(seed: int, algorithm: str = "PCG64") -> np.random.Generator:
    """Seeded generator for a named numpy bit generator (``PCG64``, ``Philox``, ...)."""
    try:
        bitgen = getattr(np.random, algorithm)
    except AttributeError:
        raise ValueError(f"unknown RNG algorithm {algorithm!r}") from None
    return np.random.Generator(bitgen(seed))


def sample_halfplane(n: int, rng: np.random.Generator, box: Region = HALFPLANE_BOX):
    x = rng.uniform(box.xmin, box.xmax, n)
    y = rng.uniform(box.ymin, box.ymax, n)
    return x + 1j * y


def sample_disc(n: int, rng: np.random.Generator, radius: float = DISC_RADIUS):
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * math.pi * rng.random(n))


def sample_pairs(domain: Domain, n: int, rng: np.random.Generator, box: Region = HALFPLANE_BOX,
                 radius: float = DISC_RADIUS):
    """``n`` independent uniform pairs, as an ``(n, 2)`` complex array."""
    draw = (lambda m: sample_halfplane(m, rng, box)) if domain is Domain.HALFPLANE else \
        (lambda m: sample_disc(m, rng, radius))
    z = draw(n)
    w = draw(n)
    return np.stack([z, w], axis=1)


def halfplane_grid(n: int, box: Region = HALFPLANE_BOX):
    xs = np.linspace(box.xmin, box.xmax, n)
    ys = np.linspace(box.ymin, box.ymax, n)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def disc_grid(n: int, radius: float = DISC_RADIUS):
    """Polar grid with ``n`` radii in ``(0, radius]`` and ``n`` angles, plus the origin."""
    r = radius * np.arange(1, n + 1) / n
    th = 2.0 * math.pi * np.arange(n) / n
    return np.concatenate([[0j], (r[:, None] * np.exp(1j * th[None, :])).ravel()])


def equality_pairs(f: MobiusH, n: int, rng: np.random.Generator):
    """Pairs on which a Möbius completion keeps the real part fixed.

    Points ``s + i a`` and ``s + i b`` on one vertical line are pulled back by
    ``f``; for ``u = Im f`` both sides of the contraction inequality then
    equal ``|log(b/a)|``.
    """
    s = rng.uniform(-2.0, 2.0, n)
    a = np.exp(rng.uniform(math.log(0.2), math.log(5.0), n))
    b = np.exp(rng.uniform(math.log(0.2), math.log(5.0), n))
    z = f.inverse_apply(s + 1j * a)
    w = f.inverse_apply(s + 1j * b)
    return np.stack([z, w], axis=1)


# --------------------------------------------------------------------------
# inequality checks


def _pairs(pairs):
    pairs = np.asarray(pairs, dtype=complex)
    return pairs[:, 0], pairs[:, 1]


def _values_in(u, z, domain: Domain, model: str):
    vals = np.asarray(u.value(z), dtype=float)
    if domain is Domain.RAY:
        bad = ~(vals > 0.0)
    else:
        bad = ~(np.abs(vals) < 1.0)
    if np.any(bad):
        raise CorpusError(f"model {model} leaves the {domain.value} at {complex(np.ravel(z)[np.argmax(bad)])!r}")
    return vals


def check_schwarz_pick_halfplane(f, pairs, tol: float = 1e-9, model: str = "f",
                                 seed: Optional[int] = None) -> VerificationReport:
    """``|(f(z)-f(w))/(conj f(z) - f(w))| <= |(z-w)/(conj z - w)|`` for an analytic self-map of H."""
    z, w = _pairs(pairs)
    fz, fw = np.asarray(f(z)), np.asarray(f(w))
    for vals, pts in ((fz, z), (fw, w)):
        if not np.all(np.imag(vals) > 0.0):
            raise CorpusError(f"{model} maps {complex(pts[np.argmin(np.imag(vals))])!r} out of the half-plane")
    lhs = np.abs((fz - fw) / (np.conj(fz) - fw))
    rhs = np.abs((z - w) / (np.conj(z) - w))
    return ratio_report("schwarz_pick", model, lhs, rhs, z, w, tol, seed, degenerate=DEGENERATE)


def _pointwise_report(check, model, ratios, z, tol, seed, details=None) -> VerificationReport:
    ratios = np.asarray(ratios, dtype=float)
    if not np.all(np.isfinite(ratios)):
        raise QuadratureError(f"{check}: non-finite ratio for model {model}",
                              complex(z[np.argmax(~np.isfinite(ratios))]))
    k = int(np.argmax(ratios))
    return VerificationReport(
        check=check, model=model, n=len(ratios), max_ratio=float(ratios[k]),
        witness_z=complex(z[k]), witness_w=None, tolerance=tol,
        verdict=PASS if ratios[k] <= 1.0 + tol else FAIL, seed=seed,
        min_ratio=float(ratios.min()), details=dict(details or {}),
    )


def gradient_ratio_halfplane(u, z, finite_differences: bool = False):
    """``|grad u(z)| Im z / u(z)``, which is at most 1 for positive harmonic ``u``."""
    z = np.asarray(z, dtype=complex)
    vals = np.asarray(u.value(z), dtype=float)
    grad = fd_gradient(u.value, z, Domain.HALFPLANE) if finite_differences else u.gradient(z)
    return np.linalg.norm(grad, axis=-1) * np.imag(z) / vals


def check_gradient_bound_halfplane(u, grid, tol: float = 1e-9, model: str = "u",
                                   seed: Optional[int] = None,
                                   finite_differences: bool = False) -> VerificationReport:
    """Pointwise bound ``|grad u| Im z / u <= 1`` on a grid."""
    grid = np.asarray(grid, dtype=complex)
    _values_in(u, grid, Domain.RAY, model)
    ratios = gradient_ratio_halfplane(u, grid, finite_differences)
    return _pointwise_report("gradient_bound", model, ratios, grid, tol, seed,
                             {"gap": float(1.0 - ratios.max())})


def check_contraction(u, pairs, tol: float = 1e-9, model: str = "u",
                      seed: Optional[int] = None) -> VerificationReport:
    """``d_ray(u(z), u(w)) <= d_H(z, w)`` for a positive harmonic ``u``."""
    z, w = _pairs(pairs)
    uz = _values_in(u, z, Domain.RAY, model)
    uw = _values_in(u, w, Domain.RAY, model)
    return ratio_report("contraction", model, dist_ray(uz, uw), dist_halfplane(z, w), z, w, tol, seed,
                        degenerate=DEGENERATE)


def kv_gradient_ratio(u, z):
    z = np.asarray(z, dtype=complex)
    vals = np.asarray(u.value(z), dtype=float)
    grad = np.linalg.norm(u.gradient(z), axis=-1)
    return grad * (1.0 - np.abs(z)) * (1.0 + np.abs(z)) / (KV_CONSTANT * (1.0 - vals) * (1.0 + vals))


def kv_sharp_ratio(u, z):
    """``|grad u| (1 - |z|^2) / ((4/pi) cos(pi u / 2))``.

    This is at most 1 for harmonic ``u`` from the disc into ``(-1, 1)`` and
    identically 1 on the extremal family, whereas the ``1 - u^2`` form
    reaches 1 only where ``u`` vanishes.
    """
    z = np.asarray(z, dtype=complex)
    vals = np.asarray(u.value(z), dtype=float)
    grad = np.linalg.norm(u.gradient(z), axis=-1)
    return grad * one_minus_abs2(z) / (KV_CONSTANT * np.cos(0.5 * math.pi * vals))


def check_kv_gradient(u, grid, tol: float = 1e-9, model: str = "u",
                      seed: Optional[int] = None) -> VerificationReport:
    """``|grad u| <= (4/pi)(1 - u^2)/(1 - |z|^2)`` for harmonic ``u`` from the disc into (-1, 1)."""
    grid = np.asarray(grid, dtype=complex)
    _values_in(u, grid, Domain.INTERVAL, model)
    ratios = kv_gradient_ratio(u, grid)
    return _pointwise_report("kv_gradient", model, ratios, grid, tol, seed,
                             {"gap": float(1.0 - ratios.max())})


def check_kv_lipschitz(u, pairs, tol: float = 1e-9, model: str = "u",
                       seed: Optional[int] = None) -> VerificationReport:
    """``d_(-1,1)(u(z), u(w)) <= (4/pi) d_U(z, w)``; ratios are reported divided by 4/pi."""
    z, w = _pairs(pairs)
    uz = _values_in(u, z, Domain.INTERVAL, model)
    uw = _values_in(u, w, Domain.INTERVAL, model)
    lhs = np.asarray(dist_interval(uz, uw)) / KV_CONSTANT
    return ratio_report("kv_lipschitz", model, lhs, dist_disc(z, w), z, w, tol, seed,
                        degenerate=DEGENERATE)


# --------------------------------------------------------------------------
# extremal certification


@dataclass
class ExtremalVerdict:
    """Classification of a function against the equality cases.

    ``residual`` is the sup over the certification grid of the fit mismatch,
    relative to ``u`` for half-plane forms and absolute for the disc form.
    ``gap`` is ``1 - sup`` of the pointwise ratio for non-extremal input.
    """

    classification: str
    params: Dict[str, object] = field(default_factory=dict)
    residual: float = float("nan")
    gap: Optional[float] = None

    @property
    def extremal(self) -> bool:
        return self.classification != "NotExtremal"

    def __str__(self):
        if not self.extremal:
            return f"NotExtremal gap={self.gap:.6g}"
        parts = [self.classification]
        for key, val in self.params.items():
            if isinstance(val, MobiusH):
                parts.append(f"{key}=({val.a:.10g},{val.b:.10g},{val.c:.10g},{val.d:.10g})")
            elif isinstance(val, MobiusD):
                parts.append(f"{key}=(rotation={_fmt_c(val.rotation)},center={_fmt_c(val.center)})")
            else:
                parts.append(f"{key}={val:.10g}")
        parts.append(f"residual={self.residual:.3g}")
        return " ".join(parts)


def _fmt_c(z):
    return f"{z.real:.10g}{z.imag:+.10g}i"


def _relative_residual(u_vals, fit_vals):
    return float(np.max(np.abs(u_vals - fit_vals) / np.abs(u_vals)))


def _fit_poisson_atom(u, box: Region):
    """Locate the peak of ``x -> u(x + i)``; for ``k P(z, t)`` it sits at ``x = t``."""
    span = box.xmax - box.xmin
    xs = np.linspace(box.xmin - 10 * span, box.xmax + 10 * span, 4001)
    vals = np.asarray(u.value(xs + 1j))
    j = int(np.argmax(vals))
    if j in (0, len(xs) - 1):
        raise QuadratureError("no interior maximum of u along Im z = 1")
    lo, hi = xs[j - 1], xs[j + 1]
    res = optimize.minimize_scalar(lambda x: -float(u.value(complex(x, 1.0))), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-12})
    t = float(res.x)
    # polish on the zero of d/dx u(x + i), which is better conditioned than the peak value
    dudx = lambda x: float(u.gradient(complex(x, 1.0))[0])
    a, b = lo, hi
    if dudx(a) > 0.0 > dudx(b):
        t = optimize.brentq(dudx, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    k = math.pi * float(u.value(complex(t, 1.0)))
    return k, t


def _reconstruct_completion(u, points, base=1j):
    """``f`` with ``Im f = u`` at ``points``, gauge ``Re f(base) = 0``, from ``f' = u_y + i u_x``."""
    out = []
    for p in points:
        d = p - base

        def integrand(s):
            g = u.gradient(base + s * d)
            return (g[..., 1] + 1j * g[..., 0]) * d

        val, _ = quadrature.gauss_kronrod(lambda s: np.stack([np.real(integrand(s)), np.imag(integrand(s))], -1),
                                          0.0, 1.0, tol=1e-13, where=p)
        out.append(1j * float(u.value(base)) + complex(val[0], val[1]))
    return np.array(out)


def _mobius_through(zs, ws):
    """Complex 2x2 matrix of the Möbius map sending ``zs[j]`` to ``ws[j]``."""
    def to_01inf(p):
        p1, p2, p3 = p
        return np.array([[p2 - p3, -p1 * (p2 - p3)], [p2 - p1, -p3 * (p2 - p1)]])

    return np.linalg.inv(to_01inf(ws)) @ to_01inf(zs)


def _fit_im_mobius(u):
    zs = np.array([1j, 1.0 + 2j, -1.0 + 0.5j])
    fs = _reconstruct_completion(u, zs)
    m = _mobius_through(zs, fs)
    m = m / np.sqrt(np.linalg.det(m))
    if np.abs(np.imag(m)).max() > 1e-6 * np.abs(m).max():
        m = m * 1j
    if np.abs(np.imag(m)).max() > 1e-6 * np.abs(m).max():
        raise DomainError("reconstructed completion is not a real Möbius map")
    a, b, c, d = np.real(m).ravel()
    if a * d - b * c <= 0:
        raise DomainError("reconstructed Möbius map does not preserve the half-plane")
    return MobiusH(a, b, c, d)


def certify_extremal_halfplane(u, grid=None, box: Region = HALFPLANE_BOX,
                               resolution: int = 32) -> ExtremalVerdict:
    """Decide whether ``u`` attains equality in the gradient bound and, if so, recover its form.

    ``u`` needs vectorised ``value`` and ``gradient``. Candidate forms are
    tried as ``k Im z``, ``k P(z, t)`` and ``k Im m(z)``; the accepted one
    must reproduce ``u`` on the grid to ``FIT_RESIDUAL``, and residuals within
    ``TIE_BREAK`` of each other go to the simpler form.
    """
    grid = halfplane_grid(resolution, box) if grid is None else np.asarray(grid, dtype=complex)
    uvals = np.asarray(u.value(grid), dtype=float)
    s = gradient_ratio_halfplane(u, grid)
    if np.max(np.abs(s - 1.0)) > NUMERIC_TOL:
        return ExtremalVerdict("NotExtremal", residual=float(np.max(np.abs(s - 1.0))),
                               gap=float(1.0 - s.max()))

    y = np.imag(grid)
    candidates = []
    k = float(u.value(1j))
    candidates.append(("LinearImForm", {"k": k}, _relative_residual(uvals, k * y)))
    try:
        k, t = _fit_poisson_atom(u, box)
        fit = k * y / (math.pi * ((np.real(grid) - t) ** 2 + y * y))
        candidates.append(("PoissonAtomForm", {"k": k, "t": t}, _relative_residual(uvals, fit)))
    except HypContractError:
        pass
    try:
        m = _fit_im_mobius(u)
        candidates.append(("ImMobiusForm", {"m": m, "k": 1.0},
                           _relative_residual(uvals, np.imag(m(grid)))))
    except (HypContractError, np.linalg.LinAlgError):
        pass

    best = min(c[2] for c in candidates)
    for name, params, residual in candidates:  # ordered simplest first
        if residual <= FIT_RESIDUAL and residual <= best + TIE_BREAK:
            return ExtremalVerdict(name, params, residual)
    return ExtremalVerdict("NotExtremal", residual=best, gap=float(1.0 - s.max()))


def disc_extremal_value(b: MobiusD, z):
    w = np.asarray(b(z))
    return -2.0 / math.pi * np.arctan2(2.0 * np.imag(w), (1.0 - np.abs(w)) * (1.0 + np.abs(w)))


def certify_extremal_disc(u, grid=None, radius: float = DISC_RADIUS,
                          resolution: int = 32) -> ExtremalVerdict:
    """Equality test for the sharp disc gradient bound and recovery of the disc automorphism ``b``.

    ``b`` is determined by ``u`` only up to hyperbolic translations along the
    real diameter applied after it; the representative returned has
    ``Re b(0) = 0``.
    """
    grid = disc_grid(resolution, radius) if grid is None else np.asarray(grid, dtype=complex)
    s = kv_sharp_ratio(u, grid)
    if np.max(np.abs(s - 1.0)) > NUMERIC_TOL:
        return ExtremalVerdict("NotExtremal", residual=float(np.max(np.abs(s - 1.0))), gap=float(1.0 - s.max()))

    u0 = float(u.value(0j))
    gx, gy = np.asarray(u.gradient(0j), dtype=float)
    # g = u + i v analytic with v(0) = 0; log((1+b)/(1-b)) = -i pi g / 2
    e0 = np.exp(-1j * math.pi * u0 / 2.0)
    b0 = (e0 - 1.0) / (e0 + 1.0)
    bp0 = (-1j * math.pi / 2.0) * complex(gx, -gy) * (1.0 - b0 * b0) / 2.0
    lam = bp0 / (1.0 - abs(b0) ** 2)
    if abs(abs(lam) - 1.0) > NUMERIC_TOL:
        return ExtremalVerdict("NotExtremal", residual=abs(abs(lam) - 1.0), gap=float(1.0 - s.max()))
    lam = lam / abs(lam)
    b = MobiusD(lam, -b0 / lam)
    residual = float(np.max(np.abs(np.asarray(u.value(grid)) - disc_extremal_value(b, grid))))
    if residual > FIT_RESIDUAL:
        return ExtremalVerdict("NotExtremal", residual=residual, gap=float(1.0 - s.max()))
    return ExtremalVerdict("DiscLogForm", {"b": b}, residual)
