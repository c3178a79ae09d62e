"""
Tests du chargement des documents de décodeurs.
"""

import json

import numpy as np
import pytest

from latent_geodesics.errors import ConfigError
from latent_geodesics.manifold import (
    LinearDecoder,
    MLPDecoder,
    ReparametrizedDecoder,
    SphereChartDecoder,
    load_decoder,
    load_decoder_file,
)


def test_load_linear_decoder(linear_document):
    """Vérifie le chargement d'un décodeur linéaire depuis un dictionnaire."""
    decoder = load_decoder(linear_document)
    assert isinstance(decoder, LinearDecoder)
    assert (decoder.latent_dim, decoder.ambient_dim) == (2, 3)
    assert np.allclose(decoder.decode([1.0, 1.0]), [2.0, 1.0, 2.0])


def test_load_from_json_text(sphere_document):
    """Vérifie le chargement depuis un texte JSON."""
    decoder = load_decoder(json.dumps(sphere_document))
    assert isinstance(decoder, SphereChartDecoder)


def test_load_mlp_decoder(mlp_document):
    """Vérifie le chargement d'un décodeur MLP à deux couches."""
    decoder = load_decoder(mlp_document)
    assert isinstance(decoder, MLPDecoder)
    assert len(decoder.layers) == 2
    assert decoder.layers[0].activation == "tanh"


def test_load_reparametrized_decoder(linear_document):
    """Vérifie le chargement d'un décodeur reparamétré par une composition."""
    document = {
        "kind": "reparametrized",
        "latent_dim": 2,
        "ambient_dim": 3,
        "base": linear_document,
        "diffeo": {
            "kind": "composition",
            "parts": [
                {"kind": "affine", "matrix": [[1.0, 0.5], [0.0, 2.0]], "offset": [0.1, 0.0]},
                {"kind": "coupling", "dim": 2, "seed": 3},
            ],
        },
    }
    decoder = load_decoder(document)
    assert isinstance(decoder, ReparametrizedDecoder)
    z = np.array([0.2, -0.3])
    assert np.allclose(decoder.decode(decoder.diffeo.forward(z)), decoder.base.decode(z))


def test_invalid_activation_reports_path(mlp_document):
    """Vérifie que le chemin du champ fautif est signalé."""
    mlp_document["layers"][0]["activation"] = "relu6"
    with pytest.raises(ConfigError) as excinfo:
        load_decoder(mlp_document)
    assert excinfo.value.path == "mlp.layers.0.activation"


def test_unknown_key_is_rejected(linear_document):
    """Vérifie que les clés inconnues sont listées."""
    linear_document["colour"] = "blue"
    with pytest.raises(ConfigError) as excinfo:
        load_decoder(linear_document)
    assert excinfo.value.unknown_keys == ["linear.colour"]


def test_declared_dimension_mismatch(linear_document):
    """Vérifie le contrôle des dimensions déclarées."""
    linear_document["ambient_dim"] = 4
    with pytest.raises(ConfigError) as excinfo:
        load_decoder(linear_document)
    assert excinfo.value.path == "linear.ambient_dim"


def test_layer_shape_mismatch(mlp_document):
    """Vérifie le rejet de couches de formes incompatibles."""
    mlp_document["layers"][1]["weights"] = [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]
    with pytest.raises(ConfigError) as excinfo:
        load_decoder(mlp_document)
    assert excinfo.value.path == "mlp.layers"


def test_rank_deficient_weights(linear_document):
    """Vérifie qu'un décodeur linéaire non injectif est refusé au chargement."""
    linear_document["weights"] = [[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]
    with pytest.raises(ConfigError) as excinfo:
        load_decoder(linear_document)
    assert excinfo.value.path == "linear"


def test_invalid_json_text():
    """Vérifie le rejet d'un texte JSON mal formé."""
    with pytest.raises(ConfigError):
        load_decoder("{kind: linear")


def test_load_decoder_file(tmp_path, linear_document):
    """Vérifie le chargement depuis un fichier."""
    path = tmp_path / "decoder.json"
    path.write_text(json.dumps(linear_document), encoding="utf-8")
    assert isinstance(load_decoder_file(str(path)), LinearDecoder)
