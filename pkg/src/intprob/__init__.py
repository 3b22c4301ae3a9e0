"""Exact and Monte Carlo tools for lozenge tilings, interlacing-array dynamics,
contour-integral observables and the semi-discrete Brownian polymer."""

from .rng import derive_seed, make_rng

__version__ = "0.1.0"
__all__ = ["derive_seed", "make_rng", "__version__"]
