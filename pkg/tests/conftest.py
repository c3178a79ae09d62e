"""
Configuration pour les tests pytest.

Ce fichier contient les fixtures et configurations communes pour tous les tests.
"""

import json

import numpy as np
import pytest

from latent_geodesics.manifold import (
    DenseLayer,
    LinearDecoder,
    MLPDecoder,
    MLPNetwork,
    ParaboloidDecoder,
    SphereChartDecoder,
)
from latent_geodesics.models import SolverConfig

LINEAR_WEIGHTS = [[2.0, 0.0], [0.0, 1.0], [1.0, 1.0]]

# Solveur réduit: grille plus courte, arrêt anticipé serré
FAST_SOLVER = {
    "n_segments": 6,
    "n_t": 48,
    "length_n_t": 96,
    "max_steps": 3000,
    "learning_rate": 0.02,
    "patience_steps": 30,
    "early_stop_delta": 1e-7,
}


@pytest.fixture
def fast_solver():
    """Configuration de solveur rapide pour les tests."""
    return SolverConfig(**FAST_SOLVER)


@pytest.fixture
def linear_decoder():
    """Décodeur linéaire 2 → 3 de rang plein."""
    return LinearDecoder(LINEAR_WEIGHTS)


@pytest.fixture
def sphere_decoder():
    """Carte sphérique de rayon 1 sur sa boîte par défaut."""
    return SphereChartDecoder()


@pytest.fixture
def paraboloid_decoder():
    """Paraboloïde z ↦ (z, 0.5 z₁² + 0.5 z₂²)."""
    return ParaboloidDecoder([0.5, 0.5])


@pytest.fixture
def mlp_decoder():
    """Petit décodeur MLP 2 → 3 à poids tirés avec une graine fixe."""
    return MLPDecoder.random(2, 3, hidden=(8,), seed=3)


@pytest.fixture
def degenerate_decoder():
    """Décodeur MLP dont la jacobienne est nulle partout."""
    network = MLPNetwork([DenseLayer(np.zeros((3, 2)), np.zeros(3))])
    return MLPDecoder(network)


@pytest.fixture
def linear_document():
    """Document JSON d'un décodeur linéaire."""
    return {
        "kind": "linear",
        "latent_dim": 2,
        "ambient_dim": 3,
        "weights": LINEAR_WEIGHTS,
    }


@pytest.fixture
def sphere_document():
    """Document JSON d'une carte sphérique."""
    return {"kind": "sphere", "latent_dim": 2, "ambient_dim": 3, "radius": 1.0}


@pytest.fixture
def mlp_document():
    """Document JSON d'un décodeur MLP à une couche cachée."""
    return {
        "kind": "mlp",
        "latent_dim": 2,
        "ambient_dim": 3,
        "layers": [
            {
                "weights": [[0.8, -0.3], [0.2, 0.9], [-0.5, 0.4], [0.1, 0.1]],
                "bias": [0.0, 0.1, -0.1, 0.05],
                "activation": "tanh",
            },
            {
                "weights": [[1.0, 0.0, 0.5, 0.2], [0.0, 1.0, -0.3, 0.4], [0.3, 0.3, 1.0, -0.2]],
                "bias": [0.0, 0.0, 0.0],
                "activation": "linear",
            },
        ],
    }


@pytest.fixture
def experiment_config(linear_document):
    """Fabrique de documents de configuration d'expérience."""
    def make(kind="oracle", decoder=None, **fields):
        config = {
            "kind": kind,
            "decoder": decoder if decoder is not None else linear_document,
            "solver": dict(FAST_SOLVER),
            "n_pairs": 4,
            "n_models": 3,
            "seed": 7,
        }
        config.update(fields)
        return config
    return make


@pytest.fixture
def write_config(tmp_path):
    """Écrit un document de configuration dans un fichier temporaire."""
    def write(config, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(config), encoding="utf-8")
        return str(path)
    return write


def finite_difference_jacobian(fn, z, h=1e-6):
    """Jacobienne par différences centrées d'une fonction (d,) → (D,)."""
    z = np.asarray(z, dtype=float)
    columns = []
    for i in range(z.size):
        step = np.zeros_like(z)
        step[i] = h
        columns.append((fn(z + step) - fn(z - step)) / (2 * h))
    return np.stack(columns, axis=-1)


@pytest.fixture
def fd_jacobian():
    """Expose finite_difference_jacobian aux tests."""
    return finite_difference_jacobian
