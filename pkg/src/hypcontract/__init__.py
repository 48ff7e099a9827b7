"""Numerical verification of hyperbolic contraction inequalities for positive harmonic functions.

The package provides closed-form hyperbolic geometry on the disc, the upper
half-plane, the positive ray and the interval; models of positive harmonic
functions with exact gradients and analytic completions; a variational
geodesic estimator for arbitrary conformal densities; and seeded checks that
certify the Schwarz-Pick, gradient, contraction and disc gradient
inequalities along with their equality cases.
"""

from .core import (DISC_DENSITY, HALFPLANE_DENSITY, HYPERBOLIC_DENSITIES, INTERVAL_DENSITY, RAY_DENSITY,
                   Domain, DomainPoint, MetricDensity, MobiusD, MobiusH, cayley, cayley_inverse, dist_disc,
                   dist_halfplane, dist_interval, dist_ray)
from .errors import (BoundaryProximityError, DomainError, HypContractError, QuadratureError,
                     UnsupportedModelError)
from .harmonic import (BoundaryData, DiscLogExtremal, DiscPoissonData, HerglotzMix, ImMobius, LinearIm,
                       Piece, PoissonAtom, Precomposed, analytic_completion, evaluate, gradient,
                       poisson_integral, poisson_kernel)
from .paths import Curve, Region, lipschitz_modulus, rho_distance, rho_length
from .report import VerificationReport
from .verify import ExtremalVerdict, certify_extremal_disc, certify_extremal_halfplane

__version__ = "0.1.0"
