from kamlab.series.basis import MonomialBasis, monomial_basis
from kamlab.series.ftseries import CenteredSeries, FourierTaylorSeries, NormWeights, vector_norm
from kamlab.series.compose import (
    compose_shift,
    compose_vector,
    invert_near_identity,
    inversion_residual,
    substitute_actions,
)

__all__ = [
    "MonomialBasis",
    "monomial_basis",
    "CenteredSeries",
    "FourierTaylorSeries",
    "NormWeights",
    "vector_norm",
    "compose_shift",
    "compose_vector",
    "invert_near_identity",
    "inversion_residual",
    "substitute_actions",
]
