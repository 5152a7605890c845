"""Bandlimited Parseval wavelet frames on the 3-dimensional Heisenberg group.

Subpackages mirror the layers of the construction:

* :mod:`.group` -- group law, matrix embedding, lattices, dilations
* :mod:`.linefn` -- exact piecewise-exponential functions on the line
* :mod:`.schrodinger` -- Schroedinger representations and rank-one operators
* :mod:`.gabor` -- Gabor systems and Parseval criteria
* :mod:`.spectral` -- interval unions and spectral-set congruences
* :mod:`.plancherel` -- rank-one Plancherel fields and the Shannon example
* :mod:`.frames` -- truncated analysis/synthesis of the full wavelet system
"""

from .group import (
    DilationAutomorphism,
    GroupElement,
    LambdaPair,
    LatticePoint,
    conjugate,
    enumerate_lambda,
    inverse,
    multiply,
    to_matrix,
)
from .linefn import PiecewiseExpFunction, SampledFunction, indicator, inner_product
from .spectral import IntervalUnion, SHANNON_BAND, parse_set
from .plancherel import RankOneField, QuadratureGrid, shannon_field, field_norm_sq, inverse_transform
from .frames import FrameConfig, parseval_sum

__all__ = [
    "DilationAutomorphism",
    "GroupElement",
    "LambdaPair",
    "LatticePoint",
    "conjugate",
    "enumerate_lambda",
    "inverse",
    "multiply",
    "to_matrix",
    "PiecewiseExpFunction",
    "SampledFunction",
    "indicator",
    "inner_product",
    "IntervalUnion",
    "SHANNON_BAND",
    "parse_set",
    "RankOneField",
    "QuadratureGrid",
    "shannon_field",
    "field_norm_sq",
    "inverse_transform",
    "FrameConfig",
    "parseval_sum",
]

__version__ = "0.1.0"
