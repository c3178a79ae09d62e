"""
Petits réseaux denses à jacobienne analytique.

Ils servent de décodeurs MLP et de réseaux de décalage pour les
difféomorphismes de couplage.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ArgumentError


def _elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def _elu_derivative(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


ACTIVATIONS: Dict[str, Tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]] = {
    "linear": (lambda x: x, np.ones_like),
    "tanh": (np.tanh, lambda x: 1.0 - np.tanh(x) ** 2),
    "elu": (_elu, _elu_derivative),
}


@dataclass(frozen=True)
class DenseLayer:
    """Couche dense: activation(W x + b), W de forme (sortie, entrée)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "linear"

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        bias = np.array(self.bias, dtype=float).ravel()
        if weights.ndim != 2:
            raise ArgumentError(f"Les poids doivent être une matrice (reçu ndim={weights.ndim})")
        if bias.shape != (weights.shape[0],):
            raise ArgumentError(
                f"Biais de taille {bias.shape[0]} pour {weights.shape[0]} sorties"
            )
        if self.activation not in ACTIVATIONS:
            raise ArgumentError(
                f"Activation inconnue: {self.activation} (valeurs possibles: {sorted(ACTIVATIONS)})"
            )
        weights.flags.writeable = False
        bias.flags.writeable = False
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @property
    def in_features(self) -> int:
        return self.weights.shape[1]

    @property
    def out_features(self) -> int:
        return self.weights.shape[0]


class MLPNetwork:
    """Enchaînement de couches denses évalué par lots (n, entrée)."""

    def __init__(self, layers: Sequence[DenseLayer]):
        if not layers:
            raise ArgumentError("Un réseau doit contenir au moins une couche")
        for i, (prev, nxt) in enumerate(zip(layers[:-1], layers[1:])):
            if prev.out_features != nxt.in_features:
                raise ArgumentError(
                    f"Couche {i + 1}: {nxt.in_features} entrées attendues, "
                    f"la couche précédente produit {prev.out_features} sorties"
                )
        self.layers: Tuple[DenseLayer, ...] = tuple(layers)

    @classmethod
    def random(cls, sizes: Sequence[int], seed: int = 0, activation: str = "tanh",
               scale: float = 1.0, output_activation: str = "linear") -> "MLPNetwork":
        """Réseau à poids gaussiens initialisés avec une graine fixe."""
        rng = np.random.default_rng(seed)
        layers: List[DenseLayer] = []
        for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            last = i == len(sizes) - 2
            layers.append(DenseLayer(
                weights=scale * rng.standard_normal((n_out, n_in)) / np.sqrt(n_in),
                bias=scale * 0.1 * rng.standard_normal(n_out),
                activation=output_activation if last else activation,
            ))
        return cls(layers)

    @property
    def in_features(self) -> int:
        return self.layers[0].in_features

    @property
    def out_features(self) -> int:
        return self.layers[-1].out_features

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = x
        for layer in self.layers:
            h = ACTIVATIONS[layer.activation][0](h @ layer.weights.T + layer.bias)
        return h

    def forward_with_jacobian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Sorties (n, sortie) et jacobiennes (n, sortie, entrée) en une passe."""
        h = x
        jac = np.broadcast_to(np.eye(x.shape[-1]), (x.shape[0], x.shape[-1], x.shape[-1]))
        for layer in self.layers:
            act, act_derivative = ACTIVATIONS[layer.activation]
            pre = h @ layer.weights.T + layer.bias
            jac = act_derivative(pre)[:, :, None] * np.einsum("oi,nij->noj", layer.weights, jac)
            h = act(pre)
        return h, jac

    def perturbed(self, scale: float, rng: np.random.Generator) -> "MLPNetwork":
        """Copie dont chaque poids et biais reçoit un bruit gaussien relatif."""
        layers = []
        for layer in self.layers:
            w_scale = scale * float(np.mean(np.abs(layer.weights)) or 1.0)
            b_scale = scale * float(np.mean(np.abs(layer.bias)) or 1.0)
            layers.append(DenseLayer(
                weights=layer.weights + w_scale * rng.standard_normal(layer.weights.shape),
                bias=layer.bias + b_scale * rng.standard_normal(layer.bias.shape),
                activation=layer.activation,
            ))
        return MLPNetwork(layers)
