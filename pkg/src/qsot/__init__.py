"""States over time for channels between multi-matrix algebras."""

from ._tol import DEFAULT_TOL, default_tol, resolve_tol
from .algebra import (
    SCALARS,
    AlgebraElement,
    AlgebraShape,
    ShapeMismatchError,
    identity,
    tensor,
)
from .linmap import LinearMap, compose, density_of, functional_of, hs_adjoint, identity_map
from .cj import bloom, channel_density, channel_state, cj_inverse, swapped_bloom
from .sot import StateOverTime, star, star_channel, star_density, star_functional
from .classical import ClassicalModel, NotClassicalError, find_classical_model

__version__ = "0.1.0"
