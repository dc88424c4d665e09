"""Desk-scale tools for order functionals along trajectories of polynomial
vector fields, Philippon-type criteria and small-disk covers."""
from .config import get_precision, precision, set_precision
from .magnitude import BigMagnitude
from .polycore import (HomogeneousPolynomial, IntPolynomial, ProjectivePoint, a_omega,
                       bombieri_norm, c_d, c_d_prime, dehomogenize, h1, homogenize,
                       nonvanishing_radius, norm_at, proj_dist, t_of)

__version__ = "0.1.0"
