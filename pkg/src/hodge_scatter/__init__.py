"""Low-energy scattering for the Hodge Laplacian on p-forms outside compact obstacles.

Submodules
----------
logcx           points on the logarithmic cover of C \\ {0}
specfun         Bessel/Hankel radial functions on the log cover
hahn            Hahn-series (lam^alpha (-log lam)^-beta) algebra and fitting
harmonics       vector-valued spherical harmonics, synthesis, multipoles
ball_scatter    exact ball/disc scattering blocks, channels, eigenfunctions
harmonic_forms  L^2 harmonic forms, P^(l) operators, d=2 resonance data
lowenergy       predicted low-energy expansions and their verification
bem2d           2D Nystrom solver and logarithmic capacity
sshift          spectral shift function
cli             ``scatter`` command-line driver
"""
from . import ball_scatter, bem2d, errors, hahn, harmonic_forms, harmonics, logcx, lowenergy, specfun, sshift
from .ball_scatter import Ball, ScatteringBlock, scattering_block
from .hahn import HahnExponent, HahnSeries
from .harmonics import Mode, ModeSet
from .logcx import LogComplex

__version__ = "0.1.0"

__all__ = [
    "ball_scatter", "bem2d", "errors", "hahn", "harmonic_forms", "harmonics", "logcx", "lowenergy",
    "specfun", "sshift", "Ball", "ScatteringBlock", "scattering_block", "HahnExponent", "HahnSeries",
    "Mode", "ModeSet", "LogComplex", "__version__",
]
