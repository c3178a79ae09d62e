"""
Chargement des documents JSON de décodeurs et de difféomorphismes.
"""

import json
import logging
from typing import Any, Dict, Union

from pydantic import TypeAdapter, ValidationError

from ..errors import ConfigError, GeodesicError
from ..models import (
    AffineSpec,
    CompositionSpec,
    CouplingSpec,
    DecoderSpec,
    LinearDecoderSpec,
    MLPDecoderSpec,
    ParaboloidDecoderSpec,
    ReparametrizedDecoderSpec,
    SphereDecoderSpec,
    format_validation_error,
)
from .decoders import (
    Decoder,
    LinearDecoder,
    MLPDecoder,
    ParaboloidDecoder,
    ReparametrizedDecoder,
    SphereChartDecoder,
)
from .diffeomorphisms import (
    AffineDiffeomorphism,
    CompositionDiffeomorphism,
    CouplingDiffeomorphism,
    Diffeomorphism,
)
from .networks import DenseLayer, MLPNetwork

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

DECODER_SPEC_ADAPTER = TypeAdapter(DecoderSpec)


def _network(layers, path: str) -> MLPNetwork:
    try:
        return MLPNetwork([
            DenseLayer(layer.weights, layer.bias, layer.activation) for layer in layers
        ])
    except GeodesicError as e:
        raise ConfigError(f"Réseau invalide en '{path}': {e}", path=path) from e


def build_diffeomorphism(spec: Union[AffineSpec, CouplingSpec, CompositionSpec],
                         path: str = "diffeo") -> Diffeomorphism:
    """
    Construit un difféomorphisme à partir de sa spécification validée.

    Raises:
        ConfigError: Si les formes sont incohérentes, avec le chemin du champ fautif.
    """
    try:
        if isinstance(spec, AffineSpec):
            return AffineDiffeomorphism(spec.matrix, spec.offset)
        if isinstance(spec, CouplingSpec):
            if spec.layers is None:
                return CouplingDiffeomorphism.random(spec.dim, split=spec.split, hidden=spec.hidden,
                                                     seed=spec.seed, scale=spec.scale)
            coupling = CouplingDiffeomorphism(spec.split, _network(spec.layers, f"{path}.layers"))
            if coupling.dim != spec.dim:
                raise ConfigError(
                    f"Le réseau de décalage définit un couplage de dimension {coupling.dim}, "
                    f"attendu {spec.dim}", path=f"{path}.dim"
                )
            return coupling
        return CompositionDiffeomorphism([
            build_diffeomorphism(part, f"{path}.parts.{i}") for i, part in enumerate(spec.parts)
        ])
    except ConfigError:
        raise
    except GeodesicError as e:
        raise ConfigError(f"Difféomorphisme invalide en '{path}': {e}", path=path) from e


def build_decoder(spec: Any, path: str = "") -> Decoder:
    """
    Construit un décodeur à partir de sa spécification validée.

    Les dimensions déclarées sont comparées à celles du décodeur construit.

    Raises:
        ConfigError: En cas d'incohérence de forme, avec le chemin du champ fautif.
    """
    here = path or spec.kind
    try:
        if isinstance(spec, LinearDecoderSpec):
            decoder: Decoder = LinearDecoder(spec.weights, spec.bias, spec.box)
        elif isinstance(spec, SphereDecoderSpec):
            decoder = SphereChartDecoder(spec.radius, spec.box)
        elif isinstance(spec, ParaboloidDecoderSpec):
            decoder = ParaboloidDecoder(spec.coeffs, spec.box)
        elif isinstance(spec, MLPDecoderSpec):
            decoder = MLPDecoder(_network(spec.layers, f"{here}.layers"), spec.box)
        elif isinstance(spec, ReparametrizedDecoderSpec):
            if spec.box is not None:
                logger.warning(f"'{here}.box' ignoré: la boîte d'un décodeur reparamétré est déduite de sa base")
            base = build_decoder(spec.base, f"{here}.base")
            decoder = ReparametrizedDecoder(base, build_diffeomorphism(spec.diffeo, f"{here}.diffeo"))
        else:
            raise ConfigError(f"Type de décodeur inconnu: {type(spec).__name__}", path=here)
    except ConfigError:
        raise
    except GeodesicError as e:
        raise ConfigError(f"Décodeur invalide en '{here}': {e}", path=here) from e

    for field in ("latent_dim", "ambient_dim"):
        declared, actual = getattr(spec, field), getattr(decoder, field)
        if declared != actual:
            raise ConfigError(
                f"'{here}.{field}' vaut {declared} mais le décodeur construit a {actual}",
                path=f"{here}.{field}",
            )
    return decoder


def parse_decoder_spec(document: Union[str, bytes, Dict[str, Any]]):
    """Valide un document de décodeur (texte JSON ou dictionnaire) sans le construire."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Document JSON invalide: {e}") from e
    try:
        return DECODER_SPEC_ADAPTER.validate_python(document)
    except ValidationError as e:
        raise format_validation_error(e) from e


def load_decoder(document: Union[str, bytes, Dict[str, Any]]) -> Decoder:
    """
    Charge un décodeur depuis un document JSON.

    Args:
        document: Texte JSON (UTF-8) ou dictionnaire déjà décodé

    Returns:
        Décodeur entièrement construit

    Raises:
        ConfigError: Si le document viole le schéma (chemin du champ dans `path`).
    """
    spec = parse_decoder_spec(document)
    decoder = build_decoder(spec)
    logger.debug(f"Décodeur chargé: {decoder.kind} ({decoder.latent_dim} → {decoder.ambient_dim})")
    return decoder


def load_decoder_file(path: str) -> Decoder:
    """Charge un décodeur depuis un fichier JSON."""
    with open(path, "r", encoding="utf-8") as handle:
        return load_decoder(handle.read())


__all__ = [
    "build_decoder",
    "build_diffeomorphism",
    "load_decoder",
    "load_decoder_file",
    "parse_decoder_spec",
]
