"""
Difféomorphismes de l'espace latent.

Ils jouent le rôle des transformations d'indétermination A entre deux
paramétrisations f_a et f_b = f_a ∘ A⁻¹ d'une même variété. Chaque variante
possède un inverse analytique exact.
"""

import logging
from abc import ABC, abstractmethod
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import ArgumentError
from .networks import MLPNetwork

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

DEFAULT_MAX_CONDITION = 1e12


class Diffeomorphism(ABC):
    """Base commune: évaluation par point (d,) ou par lot (n, d)."""

    kind: str = "diffeomorphism"

    def __init__(self, dim: int):
        if dim < 1:
            raise ArgumentError(f"Dimension invalide: {dim}")
        self.dim = dim

    def _as_batch(self, z: np.ndarray) -> Tuple[np.ndarray, bool]:
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        batch = np.atleast_2d(z)
        if batch.shape[-1] != self.dim:
            raise ArgumentError(f"Point de dimension {batch.shape[-1]}, attendu {self.dim}")
        return batch, single

    @abstractmethod
    def _forward(self, z: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _inverse(self, z: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _jacobian(self, z: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _inverse_jacobian(self, z: np.ndarray) -> np.ndarray: ...

    def forward(self, z: np.ndarray) -> np.ndarray:
        batch, single = self._as_batch(z)
        out = self._forward(batch)
        return out[0] if single else out

    def inverse(self, z: np.ndarray) -> np.ndarray:
        batch, single = self._as_batch(z)
        out = self._inverse(batch)
        return out[0] if single else out

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        """Jacobienne de A en z."""
        batch, single = self._as_batch(z)
        out = self._jacobian(batch)
        return out[0] if single else out

    def inverse_jacobian(self, z: np.ndarray) -> np.ndarray:
        """Jacobienne de A⁻¹ en z (z dans les coordonnées d'arrivée)."""
        batch, single = self._as_batch(z)
        out = self._inverse_jacobian(batch)
        return out[0] if single else out


class AffineDiffeomorphism(Diffeomorphism):
    """A(z) = M z + c."""

    kind = "affine"

    def __init__(self, matrix: np.ndarray, offset: Optional[np.ndarray] = None,
                 max_condition: float = DEFAULT_MAX_CONDITION):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ArgumentError(f"M doit être carrée (reçu {matrix.shape})")
        super().__init__(matrix.shape[0])
        condition = np.linalg.cond(matrix)
        if not np.isfinite(condition) or condition > max_condition:
            raise ArgumentError(f"Matrice affine singulière (conditionnement {condition:.3e})")
        offset = np.zeros(self.dim) if offset is None else np.array(offset, dtype=float).ravel()
        if offset.shape != (self.dim,):
            raise ArgumentError(f"Décalage de taille {offset.size}, attendu {self.dim}")
        self.matrix = matrix
        self.offset = offset
        self.inverse_matrix = np.linalg.inv(matrix)
        for array in (self.matrix, self.offset, self.inverse_matrix):
            array.flags.writeable = False

    @classmethod
    def identity(cls, dim: int) -> "AffineDiffeomorphism":
        return cls(np.eye(dim))

    def _forward(self, z):
        return z @ self.matrix.T + self.offset

    def _inverse(self, z):
        return np.linalg.solve(self.matrix, (z - self.offset).T).T

    def _jacobian(self, z):
        return np.broadcast_to(self.matrix, (z.shape[0], self.dim, self.dim))

    def _inverse_jacobian(self, z):
        return np.broadcast_to(self.inverse_matrix, (z.shape[0], self.dim, self.dim))


class CouplingDiffeomorphism(Diffeomorphism):
    """
    Couplage additif (z_a, z_b) ↦ (z_a, z_b + m(z_a)).

    z_a regroupe les `split` premières coordonnées; m est un petit réseau
    dense de z_a vers z_b. L'inverse soustrait m(z_a).
    """

    kind = "coupling"

    def __init__(self, split: int, shift: MLPNetwork):
        if shift.in_features < 1:
            raise ArgumentError("Le réseau de décalage doit avoir au moins une entrée")
        dim = shift.in_features + shift.out_features
        super().__init__(dim)
        if split != shift.in_features:
            raise ArgumentError(
                f"Indice de coupure {split} incompatible avec un réseau à {shift.in_features} entrées"
            )
        self.split = split
        self.shift = shift

    @classmethod
    def random(cls, dim: int, split: int = 1, hidden: int = 8, seed: int = 0,
               scale: float = 0.5) -> "CouplingDiffeomorphism":
        """Réseau de décalage tanh à deux couches, poids tirés avec une graine fixe."""
        if not 0 < split < dim:
            raise ArgumentError(f"Indice de coupure {split} hors de ]0, {dim}[")
        shift = MLPNetwork.random([split, hidden, dim - split], seed=seed,
                                  activation="tanh", scale=scale)
        return cls(split, shift)

    def _forward(self, z):
        out = z.copy()
        out[:, self.split:] += self.shift.forward(z[:, :self.split])
        return out

    def _inverse(self, z):
        out = z.copy()
        out[:, self.split:] -= self.shift.forward(z[:, :self.split])
        return out

    def _block_jacobian(self, z: np.ndarray, sign: float) -> np.ndarray:
        _, shift_jac = self.shift.forward_with_jacobian(z[:, :self.split])
        jac = np.broadcast_to(np.eye(self.dim), (z.shape[0], self.dim, self.dim)).copy()
        jac[:, self.split:, :self.split] = sign * shift_jac
        return jac

    def _jacobian(self, z):
        return self._block_jacobian(z, 1.0)

    def _inverse_jacobian(self, z):
        # z_a est inchangé par A, donc J_{A⁻¹}(z') = [[I, 0], [-J_m(z'_a), I]]
        return self._block_jacobian(z, -1.0)


class CompositionDiffeomorphism(Diffeomorphism):
    """Composition A_k ∘ ... ∘ A_1 (les parties sont appliquées dans l'ordre)."""

    kind = "composition"

    def __init__(self, parts: Sequence[Diffeomorphism]):
        if not parts:
            raise ArgumentError("Une composition doit contenir au moins un difféomorphisme")
        dims = {part.dim for part in parts}
        if len(dims) != 1:
            raise ArgumentError(f"Dimensions incompatibles dans la composition: {sorted(dims)}")
        super().__init__(dims.pop())
        self.parts: Tuple[Diffeomorphism, ...] = tuple(parts)

    def _forward(self, z):
        for part in self.parts:
            z = part._forward(z)
        return z

    def _inverse(self, z):
        for part in reversed(self.parts):
            z = part._inverse(z)
        return z

    def _jacobian(self, z):
        jac = np.broadcast_to(np.eye(self.dim), (z.shape[0], self.dim, self.dim))
        for part in self.parts:
            jac = np.einsum("nij,njk->nik", part._jacobian(z), jac)
            z = part._forward(z)
        return jac

    def _inverse_jacobian(self, z):
        jac = np.broadcast_to(np.eye(self.dim), (z.shape[0], self.dim, self.dim))
        for part in reversed(self.parts):
            jac = np.einsum("nij,njk->nik", part._inverse_jacobian(z), jac)
            z = part._inverse(z)
        return jac


def diffeo_apply(diffeo: Diffeomorphism, z: np.ndarray) -> np.ndarray:
    """z' = A(z)."""
    return diffeo.forward(z)


def diffeo_invert(diffeo: Diffeomorphism, z: np.ndarray) -> np.ndarray:
    """z = A⁻¹(z')."""
    return diffeo.inverse(z)
