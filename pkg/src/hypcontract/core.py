"""Hyperbolic distances, densities and Möbius actions on the canonical domains.

Conventions: distances on the disc and the upper half-plane are
``2 atanh`` of the pseudo-hyperbolic distance, distance on the positive
ray is ``|log(y/x)|`` and the interval ``(-1, 1)`` carries the disc metric
restricted to the real diameter. The matching densities are
``2/(1-|z|^2)``, ``1/Im z``, ``1/x`` and ``2/(1-x^2)``.

Every function accepts plain Python numbers, numpy arrays or
:class:`DomainPoint` instances; scalar inputs give scalar outputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BoundaryProximityError, DomainError

# Distances are refused once the pseudo-hyperbolic distance exceeds this.
R_MAX = 1.0 - 1e-15
POINT_RTOL = 1e-12


class Domain(enum.Enum):
    DISC = "disc"
    HALFPLANE = "halfplane"
    RAY = "ray"
    INTERVAL = "interval"

    @property
    def is_planar(self):
        return self in (Domain.DISC, Domain.HALFPLANE)


def _contains(domain, v):
    if domain is Domain.DISC:
        return np.abs(v) < 1.0
    if domain is Domain.HALFPLANE:
        return np.imag(v) > 0.0
    if domain is Domain.RAY:
        return np.real(v) > 0.0
    return np.abs(np.real(v)) < 1.0


def contains(domain: Domain, value) -> np.ndarray:
    """Elementwise membership test for the open domain."""
    v = np.asarray(value)
    if not domain.is_planar and np.iscomplexobj(v):
        return _contains(domain, v) & (np.imag(v) == 0.0)
    return _contains(domain, v) & np.isfinite(v)


@dataclass(frozen=True)
class DomainPoint:
    """A point tagged with the domain it lives in; membership is checked here."""

    domain: Domain
    value: complex

    def __post_init__(self):
        domain = Domain(self.domain)
        object.__setattr__(self, "domain", domain)
        v = complex(self.value) if domain.is_planar else self.value
        if not domain.is_planar:
            if isinstance(v, complex):
                if v.imag != 0.0:
                    raise DomainError(f"{domain.value} points are real, got {v!r}")
                v = v.real
            v = float(v)
        object.__setattr__(self, "value", v)
        if not bool(contains(domain, v)):
            raise DomainError(f"{v!r} is not in the open {domain.value}")

    @classmethod
    def disc(cls, z):
        return cls(Domain.DISC, z)

    @classmethod
    def halfplane(cls, z):
        return cls(Domain.HALFPLANE, z)

    @classmethod
    def ray(cls, x):
        return cls(Domain.RAY, x)

    @classmethod
    def interval(cls, x):
        return cls(Domain.INTERVAL, x)

    def close_to(self, other: "DomainPoint", rtol: float = POINT_RTOL) -> bool:
        return self.domain is other.domain and same_point(self.value, other.value, rtol)


def same_point(z, w, rtol: float = POINT_RTOL) -> bool:
    """Relative-tolerance point equality used across all suites."""
    scale = max(abs(z), abs(w))
    return abs(z - w) <= rtol * scale if scale > 0 else True


def _values(p, domain: Domain):
    if isinstance(p, DomainPoint):
        if p.domain is not domain:
            raise DomainError(f"expected a {domain.value} point, got a {p.domain.value} point")
        return p.value
    v = np.asarray(p)
    if domain.is_planar:
        v = v.astype(complex)
    else:
        if np.iscomplexobj(v):
            if np.any(np.imag(v) != 0.0):
                raise DomainError(f"{domain.value} points must be real")
            v = np.real(v)
        v = v.astype(float)
    if not np.all(contains(domain, v)):
        bad = v[~contains(domain, v)] if v.ndim else v
        raise DomainError(f"{np.ravel(bad)[0]!r} is not in the open {domain.value}")
    return v if v.ndim else v[()]


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _log_ratio(r, one_minus_r2):
    """``log((1+r)/(1-r))`` given ``r`` and an accurately computed ``1 - r^2``."""
    one_minus_r = one_minus_r2 / (1.0 + r)
    if np.any(r > R_MAX) or np.any(one_minus_r < 1.0 - R_MAX):
        raise BoundaryProximityError(
            "pseudo-hyperbolic distance within 1e-15 of 1; points too close to the boundary"
        )
    return np.log1p(2.0 * r / one_minus_r)


def _two_square(x):
    """``x*x`` as an unevaluated sum ``hi + lo`` (Dekker's splitting)."""
    hi = x * x
    c = 134217729.0 * x  # 2**27 + 1
    xh = c - (c - x)
    xl = x - xh
    lo = ((xh * xh - hi) + 2.0 * xh * xl) + xl * xl
    return hi, lo


def one_minus_abs2(z):
    """``1 - |z|^2`` without the cancellation of the naive formula near the unit circle."""
    z = np.asarray(z, dtype=complex)
    xh, xl = _two_square(z.real)
    yh, yl = _two_square(z.imag)
    # Sterbenz: 1 - xh is exact when xh >= 1/2; otherwise cancellation is harmless
    return ((1.0 - xh) - yh) - (xl + yl)


def dist_disc(z, w):
    """Hyperbolic distance ``2 atanh |(z-w)/(1 - conj(z) w)|`` on the unit disc."""
    z = _values(z, Domain.DISC)
    w = _values(w, Domain.DISC)
    num = np.abs(z - w) ** 2
    den = np.abs(1.0 - np.conj(z) * w) ** 2
    # |1 - z̄w|^2 - |z-w|^2 = (1-|z|^2)(1-|w|^2), computed without cancellation
    comp = one_minus_abs2(z) * one_minus_abs2(w) / den
    return _scalar(_log_ratio(np.sqrt(num / den), comp))


def dist_halfplane(z, w):
    """Hyperbolic distance ``2 atanh |(z-w)/(conj(z) - w)|`` on the upper half-plane."""
    z = _values(z, Domain.HALFPLANE)
    w = _values(w, Domain.HALFPLANE)
    num = np.abs(z - w) ** 2
    den = np.abs(np.conj(z) - w) ** 2
    comp = 4.0 * np.imag(z) * np.imag(w) / den
    return _scalar(_log_ratio(np.sqrt(num / den), comp))


def dist_ray(x, y):
    """``|log(y/x)|`` on the positive ray."""
    x = _values(x, Domain.RAY)
    y = _values(y, Domain.RAY)
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    return _scalar(np.log1p((hi - lo) / lo))


def dist_interval(a, b):
    """Disc distance restricted to the real diameter ``(-1, 1)``."""
    a = _values(a, Domain.INTERVAL)
    b = _values(b, Domain.INTERVAL)
    r = np.abs(b - a) / (1.0 - a * b)
    comp = (1.0 - a * a) * (1.0 - b * b) / (1.0 - a * b) ** 2
    return _scalar(_log_ratio(r, comp))


DISTANCES = {
    Domain.DISC: dist_disc,
    Domain.HALFPLANE: dist_halfplane,
    Domain.RAY: dist_ray,
    Domain.INTERVAL: dist_interval,
}


def cayley(z):
    """Map the upper half-plane onto the disc, ``z -> (z - i)/(z + i)``."""
    z = _values(z, Domain.HALFPLANE)
    w = (z - 1j) / (z + 1j)
    return complex(w) if np.ndim(w) == 0 else w


def cayley_inverse(w):
    """Map the disc onto the upper half-plane, ``w -> i (1 + w)/(1 - w)``."""
    w = _values(w, Domain.DISC)
    z = 1j * (1.0 + w) / (1.0 - w)
    return complex(z) if np.ndim(z) == 0 else z


@dataclass(frozen=True)
class MobiusH:
    """``z -> (az + b)/(cz + d)`` with real coefficients, stored with ``ad - bc = 1``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        coeffs = [float(x) for x in (self.a, self.b, self.c, self.d)]
        if not all(math.isfinite(x) for x in coeffs):
            raise DomainError("Möbius coefficients must be finite reals")
        a, b, c, d = coeffs
        det = a * d - b * c
        if not det > 0.0:
            raise DomainError(f"ad - bc must be positive, got {det!r}")
        s = math.sqrt(det)
        for name, x in zip("abcd", coeffs):
            object.__setattr__(self, name, x / s)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __call__(self, z):
        z = _values(z, Domain.HALFPLANE)
        out = (self.a * z + self.b) / (self.c * z + self.d)
        return complex(out) if np.ndim(out) == 0 else out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        out = 1.0 / (self.c * z + self.d) ** 2
        return complex(out) if np.ndim(out) == 0 else out

    def compose(self, other: "MobiusH") -> "MobiusH":
        """The map ``z -> self(other(z))``."""
        m = self.matrix @ other.matrix
        return MobiusH(*m.ravel())

    __matmul__ = compose

    def inverse(self) -> "MobiusH":
        return MobiusH(self.d, -self.b, -self.c, self.a)

    def inverse_apply(self, w):
        w = np.asarray(w, dtype=complex)
        out = (self.d * w - self.b) / (-self.c * w + self.a)
        return complex(out) if np.ndim(out) == 0 else out

    def close_to(self, other: "MobiusH", tol: float = POINT_RTOL) -> bool:
        # ±1 scaling gives the same map
        p, q = self.matrix, other.matrix
        return bool(min(np.abs(p - q).max(), np.abs(p + q).max()) <= tol * max(np.abs(p).max(), 1.0))


@dataclass(frozen=True)
class MobiusD:
    """Disc automorphism ``z -> rotation (z - center)/(1 - conj(center) z)``."""

    rotation: complex = 1.0 + 0.0j
    center: complex = 0.0j

    def __post_init__(self):
        rot = complex(self.rotation)
        center = complex(self.center)
        if not abs(abs(rot) - 1.0) <= 1e-12:
            raise DomainError(f"rotation must have unit modulus, got |{rot!r}| = {abs(rot)!r}")
        if not abs(center) < 1.0:
            raise DomainError(f"center {center!r} is not in the open disc")
        object.__setattr__(self, "rotation", rot / abs(rot))
        object.__setattr__(self, "center", center)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def rotation_by(cls, angle: float):
        return cls(complex(math.cos(angle), math.sin(angle)), 0j)

    @property
    def matrix(self) -> np.ndarray:
        lam, a = self.rotation, self.center
        return np.array([[lam, -lam * a], [-np.conj(a), 1.0]], dtype=complex)

    def __call__(self, z):
        z = _values(z, Domain.DISC)
        out = self.rotation * (z - self.center) / (1.0 - np.conj(self.center) * z)
        return complex(out) if np.ndim(out) == 0 else out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        a = self.center
        out = self.rotation * (1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2
        return complex(out) if np.ndim(out) == 0 else out

    def compose(self, other: "MobiusD") -> "MobiusD":
        """The map ``z -> self(other(z))``."""
        (p, q), (_, s) = self.matrix @ other.matrix
        return MobiusD(p / s, -q / p)

    __matmul__ = compose

    def inverse(self) -> "MobiusD":
        return MobiusD(np.conj(self.rotation), -self.rotation * self.center)


@dataclass(frozen=True)
class MetricDensity:
    """A positive continuous weight on a domain.

    ``evaluator`` must be vectorised over numpy arrays. When
    ``closed_form_distance`` is given, distance queries use it directly.
    """

    domain: Domain
    evaluator: Callable
    closed_form_distance: Optional[Callable] = None
    name: str = "custom"
    gradient: Optional[Callable] = field(default=None, compare=False)

    def __call__(self, z):
        return self.evaluator(z)


def _disc_density(z):
    z = np.asarray(z)
    return 2.0 / ((1.0 - np.abs(z)) * (1.0 + np.abs(z)))


def _disc_density_grad(z):
    z = np.asarray(z, dtype=complex)
    # d/dx, d/dy of 2/(1-x^2-y^2) packed as a complex number
    return 4.0 * z / (1.0 - np.abs(z) ** 2) ** 2


def _halfplane_density(z):
    return 1.0 / np.imag(z)


def _halfplane_density_grad(z):
    return -1j / np.imag(z) ** 2


def _ray_density(x):
    return 1.0 / np.real(x)


def _interval_density(x):
    x = np.real(x)
    return 2.0 / ((1.0 - x) * (1.0 + x))


DISC_DENSITY = MetricDensity(Domain.DISC, _disc_density, dist_disc, "hyperbolic", _disc_density_grad)
HALFPLANE_DENSITY = MetricDensity(
    Domain.HALFPLANE, _halfplane_density, dist_halfplane, "hyperbolic", _halfplane_density_grad
)
RAY_DENSITY = MetricDensity(Domain.RAY, _ray_density, dist_ray, "hyperbolic")
INTERVAL_DENSITY = MetricDensity(Domain.INTERVAL, _interval_density, dist_interval, "hyperbolic")

HYPERBOLIC_DENSITIES = {
    Domain.DISC: DISC_DENSITY,
    Domain.HALFPLANE: HALFPLANE_DENSITY,
    Domain.RAY: RAY_DENSITY,
    Domain.INTERVAL: INTERVAL_DENSITY,
}


def halfplane_geodesic_bbox(z: complex, w: complex):
    """Axis-aligned bounding box ``(xmin, xmax, ymin, ymax)`` of the geodesic from z to w."""
    z, w = complex(z), complex(w)
    xs, ys = [z.real, w.real], [z.imag, w.imag]
    if z.real != w.real:
        # geodesic is an arc of a circle centred on the real axis
        c = (abs(w) ** 2 - abs(z) ** 2) / (2.0 * (w.real - z.real))
        radius = abs(z - c)
        if min(z.real, w.real) <= c <= max(z.real, w.real):
            ys.append(radius)
    return min(xs), max(xs), min(ys), max(ys)
