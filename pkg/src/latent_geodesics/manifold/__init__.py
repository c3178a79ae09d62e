"""
Décodeurs, difféomorphismes et métrique tirée en arrière.
"""

from .decoders import (
    Decoder,
    LinearDecoder,
    MLPDecoder,
    ParaboloidDecoder,
    ReparametrizedDecoder,
    SphereChartDecoder,
    decode,
    decoder_jacobian,
    reparametrize,
)
from .diffeomorphisms import (
    AffineDiffeomorphism,
    CompositionDiffeomorphism,
    CouplingDiffeomorphism,
    Diffeomorphism,
    diffeo_apply,
    diffeo_invert,
)
from .loader import build_decoder, build_diffeomorphism, load_decoder, load_decoder_file
from .metric import (
    MetricTensor,
    gaussian_curvature_2d,
    pullback_metric,
    tangent_angle,
    tangent_norm,
    tangent_volume,
)
from .networks import ACTIVATIONS, DenseLayer, MLPNetwork

__all__ = [
    "ACTIVATIONS",
    "AffineDiffeomorphism",
    "CompositionDiffeomorphism",
    "CouplingDiffeomorphism",
    "Decoder",
    "DenseLayer",
    "Diffeomorphism",
    "LinearDecoder",
    "MLPDecoder",
    "MLPNetwork",
    "MetricTensor",
    "ParaboloidDecoder",
    "ReparametrizedDecoder",
    "SphereChartDecoder",
    "build_decoder",
    "build_diffeomorphism",
    "decode",
    "decoder_jacobian",
    "diffeo_apply",
    "diffeo_invert",
    "gaussian_curvature_2d",
    "load_decoder",
    "load_decoder_file",
    "pullback_metric",
    "reparametrize",
    "tangent_angle",
    "tangent_norm",
    "tangent_volume",
]
