"""
Tests des décodeurs et de leurs jacobiennes analytiques.
"""

from unittest.mock import patch

import numpy as np
import pytest

from latent_geodesics.errors import ArgumentError
from latent_geodesics.manifold import (
    AffineDiffeomorphism,
    CompositionDiffeomorphism,
    CouplingDiffeomorphism,
    LinearDecoder,
    SphereChartDecoder,
    decode,
    decoder_jacobian,
    reparametrize,
)


@pytest.fixture
def all_decoders(linear_decoder, sphere_decoder, paraboloid_decoder, mlp_decoder):
    composed = CompositionDiffeomorphism([
        AffineDiffeomorphism([[1.2, 0.3], [-0.1, 0.9]], [0.1, -0.2]),
        CouplingDiffeomorphism.random(2, seed=5, scale=0.4),
    ])
    return {
        "linear": linear_decoder,
        "sphere": sphere_decoder,
        "paraboloid": paraboloid_decoder,
        "mlp": mlp_decoder,
        "reparametrized": reparametrize(mlp_decoder, composed),
    }


@pytest.mark.parametrize("name", ["linear", "sphere", "paraboloid", "mlp", "reparametrized"])
def test_jacobian_matches_finite_differences(all_decoders, fd_jacobian, name):
    """Vérifie la jacobienne analytique contre des différences centrées."""
    decoder = all_decoders[name]
    z = decoder.box.mean(axis=1) + 0.1
    expected = fd_jacobian(decoder.decode, z)
    assert decoder.jacobian(z).shape == (decoder.ambient_dim, decoder.latent_dim)
    assert np.allclose(decoder.jacobian(z), expected, atol=1e-6), f"Jacobienne incorrecte pour {name}"


@pytest.mark.parametrize("name", ["linear", "sphere", "paraboloid", "mlp", "reparametrized"])
def test_batch_matches_single_evaluation(all_decoders, name):
    """Vérifie que l'évaluation par lot coïncide avec l'évaluation point par point."""
    decoder = all_decoders[name]
    rng = np.random.default_rng(0)
    batch = rng.uniform(decoder.box[:, 0], decoder.box[:, 1], size=(5, decoder.latent_dim))
    values, jac = decoder.evaluate(batch)
    assert values.shape == (5, decoder.ambient_dim)
    assert jac.shape == (5, decoder.ambient_dim, decoder.latent_dim)
    for i, z in enumerate(batch):
        assert np.allclose(values[i], decode(decoder, z))
        assert np.allclose(jac[i], decoder_jacobian(decoder, z))


def test_linear_decoder_requires_full_rank():
    """Vérifie le rejet d'une matrice W de rang insuffisant."""
    with pytest.raises(ArgumentError):
        LinearDecoder([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])


def test_decoder_rejects_wrong_dimension(linear_decoder):
    """Vérifie le rejet d'un point latent de mauvaise dimension."""
    with pytest.raises(ArgumentError):
        linear_decoder.decode(np.zeros(3))


def test_sphere_box_must_stay_in_injective_domain():
    """Vérifie que la boîte de la carte sphérique exclut les pôles."""
    with pytest.raises(ArgumentError):
        SphereChartDecoder(box=[[0.0, 1.0], [-1.0, 1.0]])
    with pytest.raises(ArgumentError):
        SphereChartDecoder(radius=-1.0)


def test_sphere_great_circle_distance(sphere_decoder):
    """Vérifie la distance de grand cercle le long d'un méridien."""
    z1 = np.array([np.pi / 4, 0.0])
    z2 = np.array([np.pi / 2, 0.0])
    assert sphere_decoder.great_circle_distance(z1, z2) == pytest.approx(np.pi / 4)


def test_injectivity_flags(linear_decoder, mlp_decoder):
    """Vérifie que seuls les décodeurs MLP sont marqués non certifiés."""
    assert linear_decoder.injectivity_certified
    assert not mlp_decoder.injectivity_certified
    assert not reparametrize(mlp_decoder, AffineDiffeomorphism.identity(2)).injectivity_certified


def test_reparametrized_decoder_has_same_image(mlp_decoder):
    """Vérifie f_b(A(z)) = f(z)."""
    diffeo = CouplingDiffeomorphism.random(2, seed=1)
    reparametrized = reparametrize(mlp_decoder, diffeo)
    z = np.array([[0.2, -0.4], [0.7, 0.1]])
    assert np.allclose(reparametrized.decode(diffeo.forward(z)), mlp_decoder.decode(z))


def test_reparametrized_box_contains_mapped_base_box(linear_decoder):
    """Vérifie que la boîte reparamétrée contient l'image des coins de la boîte de base."""
    diffeo = AffineDiffeomorphism([[2.0, 0.5], [0.0, 1.0]], [1.0, -1.0])
    box = reparametrize(linear_decoder, diffeo).box
    corners = np.array([[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]])
    mapped = diffeo.forward(corners)
    assert np.all(mapped >= box[:, 0] - 1e-12)
    assert np.all(mapped <= box[:, 1] + 1e-12)


def test_reparametrized_box_is_fixed_at_construction(linear_decoder):
    """Vérifie que la boîte reparamétrée est calculée à la construction et non modifiable."""
    decoder = reparametrize(linear_decoder, AffineDiffeomorphism([[2.0, 0.5], [0.0, 1.0]]))
    with patch.object(decoder.diffeo, "forward", side_effect=AssertionError("recalcul de la boîte")):
        box = decoder.box
    assert box is decoder.box
    assert not box.flags.writeable
    assert np.allclose(box, [[-2.5, 2.5], [-1.0, 1.0]])


def test_reparametrized_dimension_mismatch(linear_decoder):
    """Vérifie le rejet d'un difféomorphisme de dimension incompatible."""
    with pytest.raises(ArgumentError):
        reparametrize(linear_decoder, AffineDiffeomorphism.identity(3))


def test_mlp_perturbation_is_reproducible(mlp_decoder):
    """Vérifie que la perturbation des poids dépend uniquement de la graine."""
    z = np.array([0.1, 0.2])
    first = mlp_decoder.perturbed(0.05, np.random.default_rng(4)).decode(z)
    second = mlp_decoder.perturbed(0.05, np.random.default_rng(4)).decode(z)
    assert np.array_equal(first, second)
    assert not np.allclose(first, mlp_decoder.decode(z))
