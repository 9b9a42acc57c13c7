"""speclab: random-matrix spectral measure laboratory.

Samplers for the classical compact groups and related ensembles, exact 1-D
Wasserstein distances between spectral measures and reference laws, and
reproducible Monte-Carlo rate/concentration experiments.
"""

__version__ = "0.1.0"

from .ensembles import EnsembleTag  # noqa: F401
from .rng import StreamKey  # noqa: F401
