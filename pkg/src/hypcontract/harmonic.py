"""Positive harmonic functions on the upper half-plane and bounded ones on the disc.

Every model is an immutable dataclass with vectorised ``value``,
``gradient`` and (where it exists) ``completion`` methods. The completion is
an analytic ``f`` with ``Im f = u``, so ``|f'| = |grad u|`` and
``grad u = (Im f', Re f')``.

Half-plane models are built from three pieces: a linear term ``c Im z``,
Poisson atoms ``k P(z, t)`` and an absolutely continuous part with
piecewise-polynomial density. The last has an exact Cauchy transform, which
is what ``value`` uses; :func:`poisson_integral` computes the same integral
by quadrature and serves as the independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from . import quadrature
from .core import Domain, MobiusD, MobiusH, _values
from .errors import DomainError, UnsupportedModelError

FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


def poisson_kernel(z, t):
    """Half-plane Poisson kernel ``y / (pi ((x - t)^2 + y^2))``."""
    z = _values(z, Domain.HALFPLANE)
    x, y = np.real(z), np.imag(z)
    out = y / (math.pi * ((x - t) ** 2 + y * y))
    return float(out) if np.ndim(out) == 0 else out


def disc_poisson_kernel(z, theta):
    """Disc Poisson kernel ``(1 - |z|^2) / (2 pi |e^{i theta} - z|^2)``."""
    z = np.asarray(z, dtype=complex)
    return (1.0 - np.abs(z) ** 2) / (2.0 * math.pi * np.abs(np.exp(1j * np.asarray(theta)) - z) ** 2)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _grad_from_derivative(fp):
    """``grad Im f`` from ``f'``; the last axis holds ``(d/dx, d/dy)``."""
    fp = np.asarray(fp)
    return np.stack([np.imag(fp), np.real(fp)], axis=-1)


@dataclass(frozen=True)
class AnalyticFunction:
    """An analytic map given by closed-form value and derivative callables."""

    func: Callable
    deriv: Callable
    label: str = "f"

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def derivative(self, z):
        return self.deriv(np.asarray(z, dtype=complex))


# --------------------------------------------------------------------------
# boundary data


@dataclass(frozen=True)
class Piece:
    """Polynomial ``sum coeffs[n] t^n`` on ``[a, b]``; infinite ends allow constants only."""

    a: float
    b: float
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs) or (0.0,))
        if not self.a < self.b:
            raise DomainError(f"piece needs a < b, got [{self.a}, {self.b}]")
        if not (math.isfinite(self.a) and math.isfinite(self.b)) and self.degree > 0:
            raise DomainError("unbounded pieces must be constant")

    @property
    def degree(self):
        return len(P.polytrim(np.array(self.coeffs), 0.0)) - 1

    @property
    def bounded(self):
        return math.isfinite(self.a) and math.isfinite(self.b)

    def __call__(self, t):
        return P.polyval(t, self.coeffs)

    def extrema(self):
        """Minimum and maximum of the polynomial on the closed piece."""
        if self.degree <= 0:
            return self.coeffs[0], self.coeffs[0]
        crit = P.polyroots(P.polyder(self.coeffs)) if self.degree > 1 else np.array([])
        crit = np.real(crit[np.abs(np.imag(crit)) < 1e-12])
        pts = np.concatenate([[self.a, self.b], crit[(crit > self.a) & (crit < self.b)]])
        vals = self(pts)
        return float(vals.min()), float(vals.max())


@dataclass(frozen=True)
class BoundaryData:
    """Piecewise-polynomial boundary density on the real line or the circle.

    On the circle, ``t`` is the angle and pieces must lie in ``[0, 2 pi]``.
    """

    pieces: Tuple[Piece, ...]
    circle: bool = False
    delta: float = 0.0

    def __post_init__(self):
        pieces = tuple(p if isinstance(p, Piece) else Piece(*p) for p in self.pieces)
        object.__setattr__(self, "pieces", tuple(sorted(pieces, key=lambda p: p.a)))
        for p, q in zip(self.pieces, self.pieces[1:]):
            if q.a < p.b:
                raise DomainError(f"pieces [{p.a}, {p.b}] and [{q.a}, {q.b}] overlap")
        if self.circle:
            if self.pieces and (self.pieces[0].a < 0.0 or self.pieces[-1].b > 2.0 * math.pi + 1e-12):
                raise DomainError("circle pieces must lie in [0, 2 pi]")
            if not 0.0 < self.delta < 1.0:
                raise DomainError("circle data needs a margin 0 < delta < 1")
            lo, hi = self.range()
            if lo < -1.0 + self.delta or hi > 1.0 - self.delta:
                raise DomainError(f"circle data must lie in [{-1 + self.delta}, {1 - self.delta}]")
        else:
            lo, _ = self.range()
            if lo < 0.0:
                raise DomainError("half-plane boundary data must be nonnegative")

    def range(self):
        if not self.pieces:
            return 0.0, 0.0
        ext = [p.extrema() for p in self.pieces]
        lo = min(e[0] for e in ext)
        hi = max(e[1] for e in ext)
        if self.circle and sum(p.b - p.a for p in self.pieces) < 2.0 * math.pi - 1e-12:
            lo, hi = min(lo, 0.0), max(hi, 0.0)
        return lo, hi

    @property
    def compact(self):
        return all(p.bounded for p in self.pieces)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for p in self.pieces:
            mask = (t >= p.a) & (t < p.b)
            out[mask] = p(t[mask])
        return out

    def shifted(self, s: float) -> "BoundaryData":
        """Data translated by ``s``: ``phi(t - s)``."""
        if self.circle:
            raise UnsupportedModelError("translation is defined for line data only")
        pieces = []
        for p in self.pieces:
            # p(t - s) re-expanded in powers of t
            c = np.zeros(1)
            shift = np.array([-s, 1.0])
            term = np.array([1.0])
            for coef in p.coeffs:
                c = P.polyadd(c, coef * term)
                term = P.polymul(term, shift)
            pieces.append(Piece(p.a + s, p.b + s, tuple(c)))
        return BoundaryData(tuple(pieces))

    def scaled(self, alpha: float) -> "BoundaryData":
        return BoundaryData(
            tuple(Piece(p.a, p.b, tuple(alpha * c for c in p.coeffs)) for p in self.pieces),
            self.circle,
            self.delta if not self.circle else 1.0 - abs(alpha) * (1.0 - self.delta),
        )

    def to_dict(self):
        return {
            "pieces": [[p.a, p.b, list(p.coeffs)] for p in self.pieces],
            "circle": self.circle,
            "delta": self.delta,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(Piece(a, b, tuple(c)) for a, b, c in d["pieces"]),
                   bool(d.get("circle", False)), float(d.get("delta", 0.0)))


def _cauchy_piece(piece: Piece, z):
    """Exact ``int_a^b p(t)/(t - z) dt`` for ``z`` in the upper half-plane."""
    coeffs = np.array(piece.coeffs)
    a, b = piece.a, piece.b
    # Taylor coefficients of p about z
    terms = []
    c = coeffs
    fact = 1.0
    for n in range(len(coeffs)):
        terms.append(P.polyval(z, c) / fact)
        c = P.polyder(c)
        fact *= n + 1
    out = terms[0] * np.log((b - z) / (a - z))
    for n in range(1, len(terms)):
        out = out + terms[n] * ((b - z) ** n - (a - z) ** n) / n
    return out


def _cauchy_piece_derivative(piece: Piece, z):
    deriv = Piece(piece.a, piece.b, tuple(P.polyder(np.array(piece.coeffs))) or (0.0,))
    return (piece(piece.a) / (piece.a - z) - piece(piece.b) / (piece.b - z)
            + _cauchy_piece(deriv, z))


def cauchy_transform(data: BoundaryData, z):
    """``(1/pi) int phi(t)/(t - z) dt``; its imaginary part is the Poisson integral."""
    if not data.compact or data.circle:
        raise UnsupportedModelError("closed-form Cauchy transform needs compact line data")
    z = np.asarray(z, dtype=complex)
    return sum((_cauchy_piece(p, z) for p in data.pieces), np.zeros_like(z)) / math.pi


def cauchy_transform_derivative(data: BoundaryData, z):
    z = np.asarray(z, dtype=complex)
    return sum((_cauchy_piece_derivative(p, z) for p in data.pieces), np.zeros_like(z)) / math.pi


def _integrate_batch(integrand, a, b, points, tol, chunk=512):
    out = []
    for start in range(0, len(points), chunk):
        pts = points[start:start + chunk]
        val, _ = quadrature.gauss_kronrod(
            lambda s: integrand(s, pts), a, b, tol=tol, where=complex(pts[0]) if len(pts) == 1 else pts,
        )
        out.append(np.atleast_1d(val))
    return np.concatenate(out, axis=0)


def poisson_integral(data: BoundaryData, z, tol: float = quadrature.DEFAULT_TOL):
    """Poisson integral of ``data`` at ``z`` by adaptive quadrature.

    Line data are integrated after ``t = x + y tan(theta)``, under which the
    kernel becomes ``d theta / pi`` on ``(-pi/2, pi/2)``; circle data are
    integrated against the disc kernel piece by piece.
    """
    if data.circle:
        zz = np.atleast_1d(_values(z, Domain.DISC)).astype(complex)
        total = np.zeros(zz.shape)
        for p in data.pieces:
            total += _integrate_batch(
                lambda th, pts: (disc_poisson_kernel(pts[None, :], th[:, None]) * p(th)[:, None]),
                p.a, p.b, zz, tol / max(len(data.pieces), 1),
            )
        return _out(total if np.ndim(z) else total[0])

    zz = np.atleast_1d(_values(z, Domain.HALFPLANE)).astype(complex)
    total = np.zeros(zz.shape)
    x, y = np.real(zz), np.imag(zz)
    for p in data.pieces:
        # theta limits differ per point, so integrate over the unit interval
        lo = np.arctan((p.a - x) / y) if math.isfinite(p.a) else np.full_like(x, -math.pi / 2)
        hi = np.arctan((p.b - x) / y) if math.isfinite(p.b) else np.full_like(x, math.pi / 2)

        def integrand(s, idx, lo=lo, hi=hi, p=p):
            th = lo[idx][None, :] + s[:, None] * (hi - lo)[idx][None, :]
            return p(x[idx][None, :] + y[idx][None, :] * np.tan(th)) * (hi - lo)[idx][None, :]

        idx = np.arange(len(zz))
        total += _integrate_batch(integrand, 0.0, 1.0, idx, math.pi * tol / max(len(data.pieces), 1)) / math.pi
    return _out(total if np.ndim(z) else total[0])


# --------------------------------------------------------------------------
# half-plane models


def _positive(name, v):
    v = float(v)
    if not (v > 0.0 and math.isfinite(v)):
        raise DomainError(f"{name} must be a positive real, got {v!r}")
    return v


class _HalfPlaneModel:
    domain = Domain.HALFPLANE

    def gradient(self, z):
        z = _values(z, Domain.HALFPLANE)
        return _grad_from_derivative(self.completion().derivative(z))

    def precomposed(self, m: MobiusH) -> "Precomposed":
        return Precomposed(self, m)


@dataclass(frozen=True)
class LinearIm(_HalfPlaneModel):
    """``u(z) = k Im z``."""

    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "k", _positive("k", self.k))

    def value(self, z):
        return _out(self.k * np.imag(_values(z, Domain.HALFPLANE)))

    def gradient(self, z):
        z = _values(z, Domain.HALFPLANE)
        g = np.zeros(np.shape(z) + (2,))
        g[..., 1] = self.k
        return g

    def completion(self):
        return MobiusH(self.k, 0.0, 0.0, 1.0)

    def scaled(self, alpha):
        return LinearIm(self.k * alpha)


@dataclass(frozen=True)
class PoissonAtom(_HalfPlaneModel):
    """``u(z) = k P(z, t)``."""

    k: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k", _positive("k", self.k))
        t = float(self.t)
        if not math.isfinite(t):
            raise DomainError(f"t must be a finite real, got {t!r}")
        object.__setattr__(self, "t", t)

    def value(self, z):
        return _out(self.k * poisson_kernel(z, self.t))

    def completion(self):
        # k / (pi (t - z)) = (0 z + k/pi) / (-z + t)
        return MobiusH(0.0, self.k / math.pi, -1.0, self.t)

    def scaled(self, alpha):
        return PoissonAtom(self.k * alpha, self.t)


@dataclass(frozen=True)
class ImMobius(_HalfPlaneModel):
    """``u(z) = k Im m(z)`` for a half-plane automorphism ``m``."""

    m: MobiusH = field(default_factory=MobiusH.identity)
    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "k", _positive("k", self.k))
        if not isinstance(self.m, MobiusH):
            object.__setattr__(self, "m", MobiusH(*self.m))

    def value(self, z):
        z = _values(z, Domain.HALFPLANE)
        # det m = 1
        return _out(self.k * np.imag(z) / np.abs(self.m.c * z + self.m.d) ** 2)

    def completion(self):
        m = self.m
        return MobiusH(self.k * m.a, self.k * m.b, m.c, m.d)

    def scaled(self, alpha):
        return ImMobius(self.m, self.k * alpha)


@dataclass(frozen=True)
class HerglotzMix(_HalfPlaneModel):
    """``u(z) = c Im z + sum k_j P(z, t_j) + int P(z, t) phi(t) dt``."""

    c: float = 0.0
    atoms: Tuple[Tuple[float, float], ...] = ()
    ac_part: Optional[BoundaryData] = None

    def __post_init__(self):
        c = float(self.c)
        if not (c >= 0.0 and math.isfinite(c)):
            raise DomainError(f"linear coefficient must be nonnegative, got {c!r}")
        object.__setattr__(self, "c", c)
        atoms = tuple((_positive("atom weight", k), float(t)) for k, t in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if self.ac_part is not None:
            if self.ac_part.circle or not self.ac_part.compact:
                raise DomainError("absolutely continuous part needs compact line data")
            if not any(p.extrema()[1] > 0.0 for p in self.ac_part.pieces):
                object.__setattr__(self, "ac_part", None)
        if c == 0.0 and not atoms and self.ac_part is None:
            raise DomainError("mixture is identically zero, hence not positive")

    def value(self, z):
        z = _values(z, Domain.HALFPLANE)
        out = self.c * np.imag(z)
        for k, t in self.atoms:
            out = out + k * poisson_kernel(z, t)
        if self.ac_part is not None:
            out = out + np.imag(cauchy_transform(self.ac_part, z))
        return _out(out)

    def completion(self):
        c, atoms, ac = self.c, self.atoms, self.ac_part

        def f(z):
            out = c * z
            for k, t in atoms:
                out = out + k / (math.pi * (t - z))
            if ac is not None:
                out = out + cauchy_transform(ac, z)
            return out

        def fp(z):
            out = np.full(np.shape(z), c, dtype=complex)
            for k, t in atoms:
                out = out + k / (math.pi * (t - z) ** 2)
            if ac is not None:
                out = out + cauchy_transform_derivative(ac, z)
            return out

        return AnalyticFunction(f, fp, "nevanlinna")

    def scaled(self, alpha):
        return HerglotzMix(self.c * alpha, tuple((k * alpha, t) for k, t in self.atoms),
                           None if self.ac_part is None else self.ac_part.scaled(alpha))


@dataclass(frozen=True)
class Precomposed(_HalfPlaneModel):
    """``u o m`` for a half-plane model ``u`` and automorphism ``m``."""

    base: _HalfPlaneModel
    m: MobiusH

    def value(self, z):
        return self.base.value(self.m(_values(z, Domain.HALFPLANE)))

    def completion(self):
        f, m = self.base.completion(), self.m
        return AnalyticFunction(lambda z: f(m(z)), lambda z: f.derivative(m(z)) * m.derivative(z),
                                "precomposed")

    def scaled(self, alpha):
        return Precomposed(self.base.scaled(alpha), self.m)


# --------------------------------------------------------------------------
# disc models


@dataclass(frozen=True)
class DiscLogExtremal:
    """``u(z) = scale * Re{(2i/pi) log((1 + b(z))/(1 - b(z)))}`` on the disc.

    With ``scale = 1`` this is the extremal function of the sharp gradient
    bound for harmonic maps of the disc into ``(-1, 1)``.
    """

    b: MobiusD = field(default_factory=MobiusD.identity)
    scale: float = 1.0

    domain = Domain.DISC

    def __post_init__(self):
        s = float(self.scale)
        if not 0.0 < abs(s) <= 1.0:
            raise DomainError(f"scale must satisfy 0 < |scale| <= 1, got {s!r}")
        object.__setattr__(self, "scale", s)

    def value(self, z):
        w = np.asarray(self.b(_values(z, Domain.DISC)))
        # arg((1+w)/(1-w)) = atan2(2 Im w, 1 - |w|^2); principal branch
        arg = np.arctan2(2.0 * np.imag(w), (1.0 - np.abs(w)) * (1.0 + np.abs(w)))
        return _out(-2.0 / math.pi * self.scale * arg)

    def completion(self):
        b, s = self.b, self.scale
        return AnalyticFunction(
            lambda z: -2.0 * s / math.pi * np.log((1.0 + b(z)) / (1.0 - b(z))),
            lambda z: -4.0 * s / math.pi * b.derivative(z) / (1.0 - b(z) ** 2),
            "disc-log",
        )

    def gradient(self, z):
        z = _values(z, Domain.DISC)
        return _grad_from_derivative(self.completion().derivative(z))

    def scaled(self, alpha):
        return DiscLogExtremal(self.b, self.scale * alpha)


@dataclass(frozen=True)
class DiscPoissonData:
    """Poisson extension of circle data with values in ``(-1, 1)``."""

    boundary: BoundaryData
    tol: float = quadrature.DEFAULT_TOL

    domain = Domain.DISC

    def __post_init__(self):
        if not self.boundary.circle:
            raise DomainError("DiscPoissonData needs circle boundary data")

    def _integrals(self, z):
        zz = np.atleast_1d(_values(z, Domain.DISC)).astype(complex)
        total = np.zeros(zz.shape + (3,))
        n = max(len(self.boundary.pieces), 1)
        for p in self.boundary.pieces:
            def integrand(th, pts, p=p):
                e = np.exp(1j * th)[:, None]
                diff = e - pts[None, :]
                h = (1.0 - np.abs(pts[None, :]) ** 2) / np.abs(diff) ** 2
                hp = 2.0 * e / diff ** 2
                w = p(th)[:, None] / (2.0 * math.pi)
                return np.stack([h * w, np.real(hp) * w, -np.imag(hp) * w], axis=-1)

            total += _integrate_batch(integrand, p.a, p.b, zz, self.tol / n)
        return total

    def value(self, z):
        out = self._integrals(z)[..., 0]
        return _out(out if np.ndim(z) else out[0])

    def gradient(self, z):
        out = self._integrals(z)[..., 1:]
        return out if np.ndim(z) else out[0]

    def completion(self):
        raise UnsupportedModelError("DiscPoissonData has no closed-form analytic completion")

    def scaled(self, alpha):
        return DiscPoissonData(self.boundary.scaled(alpha), self.tol)


HALFPLANE_MODELS = (LinearIm, PoissonAtom, ImMobius, HerglotzMix, Precomposed)
DISC_MODELS = (DiscLogExtremal, DiscPoissonData)


# --------------------------------------------------------------------------
# functional interface


def evaluate(u, z):
    """Value of model ``u`` at ``z``."""
    return u.value(z)


def gradient(u, z):
    """Gradient ``(u_x, u_y)`` of model ``u`` at ``z``; last axis has length 2."""
    return u.gradient(z)


def analytic_completion(u):
    """Analytic ``f`` with ``Im f = u``."""
    if not hasattr(u, "completion"):
        raise UnsupportedModelError(f"{type(u).__name__} has no analytic completion")
    return u.completion()


def fd_step(domain: Domain, z):
    """Central-difference step: cube root of machine epsilon times a local length."""
    z = np.asarray(z, dtype=complex)
    if domain is Domain.HALFPLANE:
        return FD_STEP * np.maximum(np.imag(z), 1.0)
    return FD_STEP * (1.0 - np.abs(z))


def fd_gradient(func, z, domain: Domain, h=None):
    """Central finite-difference gradient of a vectorised real function."""
    z = np.asarray(z, dtype=complex)
    if h is None:
        h = fd_step(domain, z)
        if domain is Domain.HALFPLANE:
            h = np.minimum(h, 0.5 * np.imag(z))
    gx = (func(z + h) - func(z - h)) / (2.0 * h)
    gy = (func(z + 1j * h) - func(z - 1j * h)) / (2.0 * h)
    return np.stack([gx, gy], axis=-1)


def discrete_laplacian(func, z, h):
    """Five-point Laplacian with step ``h``."""
    z = np.asarray(z, dtype=complex)
    return (func(z + h) + func(z - h) + func(z + 1j * h) + func(z - 1j * h) - 4.0 * func(z)) / h ** 2
