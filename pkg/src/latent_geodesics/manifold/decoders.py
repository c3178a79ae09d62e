"""
Décodeurs f: Z → D à jacobienne analytique.

Chaque décodeur s'évalue sur un point (d,) ou sur un lot (n, d) et
déclare une boîte de domaine compacte utilisée pour l'échantillonnage
des paires et les vérifications de sortie de domaine.
"""

import logging
from abc import ABC, abstractmethod
from itertools import product
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import ArgumentError, NumericError
from .diffeomorphisms import Diffeomorphism
from .networks import MLPNetwork

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

SPHERE_EPS = 1e-3


def _as_box(box: Optional[Sequence[Sequence[float]]], dim: int) -> Optional[np.ndarray]:
    if box is None:
        return None
    box = np.array(box, dtype=float)
    if box.shape != (dim, 2) or np.any(box[:, 0] >= box[:, 1]):
        raise ArgumentError(f"Boîte invalide: forme {(dim, 2)} avec bornes croissantes attendue")
    box.flags.writeable = False
    return box


class Decoder(ABC):
    """Base commune des décodeurs."""

    kind: str = "decoder"
    injectivity_certified: bool = True

    def __init__(self, latent_dim: int, ambient_dim: int,
                 box: Optional[Sequence[Sequence[float]]] = None):
        if ambient_dim < latent_dim:
            raise ArgumentError(
                f"Dimension ambiante {ambient_dim} < dimension latente {latent_dim}"
            )
        self.latent_dim = latent_dim
        self.ambient_dim = ambient_dim
        self._box = _as_box(box, latent_dim)

    @property
    def box(self) -> Optional[np.ndarray]:
        """Boîte (d, 2) du domaine compact déclaré."""
        return self._box

    @abstractmethod
    def _decode_batch(self, z: np.ndarray) -> np.ndarray:
        """Évalue f sur un lot (n, d)."""

    @abstractmethod
    def _jacobian_batch(self, z: np.ndarray) -> np.ndarray:
        """Jacobienne (n, D, d) sur un lot (n, d)."""

    def _evaluate_batch(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self._decode_batch(z), self._jacobian_batch(z)

    def _as_batch(self, z: np.ndarray) -> Tuple[np.ndarray, bool]:
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        batch = np.atleast_2d(z)
        if batch.ndim != 2 or batch.shape[1] != self.latent_dim:
            raise ArgumentError(
                f"Point latent de dimension {z.shape[-1] if z.ndim else 0}, "
                f"le décodeur attend {self.latent_dim}"
            )
        return batch, single

    def decode(self, z: np.ndarray) -> np.ndarray:
        batch, single = self._as_batch(z)
        out = self._decode_batch(batch)
        return out[0] if single else out

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        batch, single = self._as_batch(z)
        jac = self._jacobian_batch(batch)
        if not np.all(np.isfinite(jac)):
            raise NumericError("Jacobienne non finie")
        return jac[0] if single else jac

    def evaluate(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Valeurs et jacobiennes en un seul appel."""
        batch, single = self._as_batch(z)
        values, jac = self._evaluate_batch(batch)
        return (values[0], jac[0]) if single else (values, jac)


class LinearDecoder(Decoder):
    """f(z) = W z + b avec W de rang d."""

    kind = "linear"

    def __init__(self, weights: np.ndarray, bias: Optional[np.ndarray] = None,
                 box: Optional[Sequence[Sequence[float]]] = None):
        weights = np.array(weights, dtype=float)
        if weights.ndim != 2:
            raise ArgumentError("W doit être une matrice D × d")
        ambient_dim, latent_dim = weights.shape
        if box is None:
            box = [[-1.0, 1.0]] * latent_dim
        super().__init__(latent_dim, ambient_dim, box)
        if np.linalg.matrix_rank(weights) < latent_dim:
            raise ArgumentError("W doit être de rang colonne plein (injectivité)")
        bias = np.zeros(ambient_dim) if bias is None else np.array(bias, dtype=float).ravel()
        if bias.shape != (ambient_dim,):
            raise ArgumentError(f"Biais de taille {bias.size}, attendu {ambient_dim}")
        weights.flags.writeable = False
        bias.flags.writeable = False
        self.weights = weights
        self.bias = bias

    def _decode_batch(self, z):
        return z @ self.weights.T + self.bias

    def _jacobian_batch(self, z):
        return np.broadcast_to(self.weights, (z.shape[0],) + self.weights.shape)


class SphereChartDecoder(Decoder):
    """Carte sphérique (θ, φ) ↦ (r sinθ cosφ, r sinθ sinφ, r cosθ)."""

    kind = "sphere"

    def __init__(self, radius: float = 1.0, box: Optional[Sequence[Sequence[float]]] = None):
        if radius <= 0:
            raise ArgumentError(f"Le rayon doit être > 0 (reçu {radius})")
        if box is None:
            box = [[np.pi / 4, 3 * np.pi / 4], [-np.pi / 3, np.pi / 3]]
        super().__init__(2, 3, box)
        domain = np.array([[SPHERE_EPS, np.pi - SPHERE_EPS], [-np.pi + SPHERE_EPS, np.pi - SPHERE_EPS]])
        if np.any(self.box[:, 0] < domain[:, 0]) or np.any(self.box[:, 1] > domain[:, 1]):
            raise ArgumentError("La boîte doit rester dans le domaine injectif de la carte")
        self.radius = float(radius)

    def _decode_batch(self, z):
        theta, phi = z[:, 0], z[:, 1]
        return self.radius * np.stack([
            np.sin(theta) * np.cos(phi),
            np.sin(theta) * np.sin(phi),
            np.cos(theta),
        ], axis=-1)

    def _jacobian_batch(self, z):
        theta, phi = z[:, 0], z[:, 1]
        jac = np.empty((z.shape[0], 3, 2))
        jac[:, 0, 0] = np.cos(theta) * np.cos(phi)
        jac[:, 0, 1] = -np.sin(theta) * np.sin(phi)
        jac[:, 1, 0] = np.cos(theta) * np.sin(phi)
        jac[:, 1, 1] = np.sin(theta) * np.cos(phi)
        jac[:, 2, 0] = -np.sin(theta)
        jac[:, 2, 1] = 0.0
        return self.radius * jac

    def great_circle_distance(self, z1: np.ndarray, z2: np.ndarray) -> float:
        """Distance r·arccos(x₁·x₂ / r²) entre deux points de la carte."""
        x1, x2 = self.decode(z1), self.decode(z2)
        cosine = float(np.dot(x1, x2)) / self.radius ** 2
        return self.radius * float(np.arccos(np.clip(cosine, -1.0, 1.0)))


class ParaboloidDecoder(Decoder):
    """Graphe f(z) = (z, Σ c_i z_i²)."""

    kind = "paraboloid"

    def __init__(self, coeffs: Sequence[float], box: Optional[Sequence[Sequence[float]]] = None):
        coeffs = np.array(coeffs, dtype=float).ravel()
        if coeffs.size < 1:
            raise ArgumentError("Au moins un coefficient est requis")
        if box is None:
            box = [[-1.0, 1.0]] * coeffs.size
        super().__init__(coeffs.size, coeffs.size + 1, box)
        coeffs.flags.writeable = False
        self.coeffs = coeffs

    def _decode_batch(self, z):
        return np.concatenate([z, (z ** 2 @ self.coeffs)[:, None]], axis=1)

    def _jacobian_batch(self, z):
        n, d = z.shape
        jac = np.zeros((n, d + 1, d))
        jac[:, np.arange(d), np.arange(d)] = 1.0
        jac[:, d, :] = 2.0 * self.coeffs[None, :] * z
        return jac


class MLPDecoder(Decoder):
    """Décodeur perceptron multicouche; l'injectivité n'est pas certifiée."""

    kind = "mlp"
    injectivity_certified = False

    def __init__(self, network: MLPNetwork, box: Optional[Sequence[Sequence[float]]] = None):
        if box is None:
            box = [[-1.0, 1.0]] * network.in_features
        super().__init__(network.in_features, network.out_features, box)
        self.network = network

    @classmethod
    def random(cls, latent_dim: int, ambient_dim: int, hidden: Sequence[int] = (16,),
               seed: int = 0, activation: str = "tanh") -> "MLPDecoder":
        sizes = [latent_dim, *hidden, ambient_dim]
        return cls(MLPNetwork.random(sizes, seed=seed, activation=activation))

    @property
    def layers(self):
        return self.network.layers

    def _decode_batch(self, z):
        return self.network.forward(z)

    def _jacobian_batch(self, z):
        return self.network.forward_with_jacobian(z)[1]

    def _evaluate_batch(self, z):
        return self.network.forward_with_jacobian(z)

    def perturbed(self, scale: float, rng: np.random.Generator) -> "MLPDecoder":
        """Copie aux poids légèrement perturbés (substitut d'un réentraînement)."""
        return MLPDecoder(self.network.perturbed(scale, rng), box=self.box)


def _mapped_box(box: Optional[np.ndarray], diffeo: Diffeomorphism) -> Optional[np.ndarray]:
    """Boîte englobante de l'image par A d'une grille régulière de la boîte."""
    if box is None:
        return None
    per_axis = min(11, max(2, int(1e4 ** (1.0 / len(box)))))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    mapped = diffeo.forward(np.array(list(product(*axes))))
    return np.stack([mapped.min(axis=0), mapped.max(axis=0)], axis=1)


class ReparametrizedDecoder(Decoder):
    """f ∘ A⁻¹: même image que f, coordonnées latentes transformées par A."""

    kind = "reparametrized"

    def __init__(self, base: Decoder, diffeo: Diffeomorphism):
        if diffeo.dim != base.latent_dim:
            raise ArgumentError(
                f"Difféomorphisme de dimension {diffeo.dim} pour un décodeur "
                f"de dimension latente {base.latent_dim}"
            )
        super().__init__(base.latent_dim, base.ambient_dim, _mapped_box(base.box, diffeo))
        self.base = base
        self.diffeo = diffeo
        self.injectivity_certified = base.injectivity_certified

    def _decode_batch(self, z):
        return self.base._decode_batch(self.diffeo.inverse(z))

    def _jacobian_batch(self, z):
        return self._evaluate_batch(z)[1]

    def _evaluate_batch(self, z):
        inner = self.diffeo.inverse(z)
        values, base_jac = self.base._evaluate_batch(inner)
        return values, np.einsum("nij,njk->nik", base_jac, self.diffeo.inverse_jacobian(z))


def decode(f: Decoder, z: np.ndarray) -> np.ndarray:
    """Évalue le décodeur f au point (ou lot) z."""
    return f.decode(z)


def decoder_jacobian(f: Decoder, z: np.ndarray) -> np.ndarray:
    """Différentielle df_z, matrice D × d (ou lot n × D × d)."""
    return f.jacobian(z)


def reparametrize(f: Decoder, diffeo: Diffeomorphism) -> ReparametrizedDecoder:
    """Construit f_b = f ∘ A⁻¹, de sorte que A soit la transformation de générateur."""
    return ReparametrizedDecoder(f, diffeo)
