"""
Courbes splines cubiques contraintes entre deux points latents.

Ce module assemble le système de contraintes de régularité d'une spline
cubique par morceaux, en extrait le noyau par SVD, puis évalue les courbes
γ(t) = l(t) + S(t), leurs vitesses et leur sensibilité aux paramètres libres ω.

Les polynômes de chaque segment sont évalués dans le paramètre global t:
S_i(t) = a_i + b_i t + c_i t² + d_i t³.
"""

import logging
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .errors import ArgumentError, NullSpaceError

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

DEFAULT_SV_TOL = 1e-10

# Nullité observée par forme de matrice (lignes, colonnes)
_nullity_by_shape: Dict[Tuple[Tuple[int, int], float], int] = {}
_nullity_lock = threading.Lock()


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class KnotVector:
    """Noeuds h_0 = 0 < h_1 < ... < h_n = 1."""

    values: np.ndarray

    def __post_init__(self):
        values = _frozen(np.ravel(self.values))
        if values.size < 2:
            raise ArgumentError("Un vecteur de noeuds doit contenir au moins deux valeurs")
        if values[0] != 0.0 or values[-1] != 1.0:
            raise ArgumentError(
                f"Les noeuds doivent commencer à 0 et finir à 1 (reçu {values[0]}, {values[-1]})"
            )
        if np.any(np.diff(values) <= 0):
            raise ArgumentError("Les noeuds doivent être strictement croissants")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, n_segments: int) -> "KnotVector":
        """Noeuds uniformes h_i = i/n."""
        if n_segments < 1:
            raise ArgumentError(f"n_segments doit être >= 1 (reçu {n_segments})")
        return cls(np.arange(n_segments + 1, dtype=float) / n_segments)

    @property
    def n_segments(self) -> int:
        return self.values.size - 1

    def segment_of(self, t: np.ndarray) -> np.ndarray:
        """Indice (base 0) du segment contenant chaque t; t = 1 appartient au dernier."""
        index = np.searchsorted(self.values, t, side="right") - 1
        return np.clip(index, 0, self.n_segments - 1)


@dataclass(frozen=True)
class ConstraintMatrix:
    """
    Matrice A = [B; C⁰; C¹; C²] du système Aξ = 0.

    B contient les deux contraintes de bord S_1(0) = 0 et S_n(1) = 0,
    chaque bloc Cᵏ contient une ligne par noeud intérieur.
    """

    matrix: np.ndarray
    knots: KnotVector

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def n_segments(self) -> int:
        return self.knots.n_segments

    def block(self, name: str) -> np.ndarray:
        """Retourne le bloc "B", "C0", "C1" ou "C2"."""
        m = self.n_segments - 1
        offsets = {"B": (0, 2), "C0": (2, 2 + m), "C1": (2 + m, 2 + 2 * m),
                   "C2": (2 + 2 * m, 2 + 3 * m)}
        if name not in offsets:
            raise ArgumentError(f"Bloc inconnu: {name}")
        start, stop = offsets[name]
        return self.matrix[start:stop]


@dataclass(frozen=True)
class NullSpaceBasis:
    """Base orthonormale N du noyau de A, avec les noeuds qui l'ont produite."""

    basis: np.ndarray
    knots: KnotVector
    rank: int
    singular_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "basis", _frozen(self.basis))
        object.__setattr__(self, "singular_values", _frozen(self.singular_values))

    @property
    def nullity(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class GeodesicCurve:
    """Courbe γ(t) = l(t) + S(t) avec ξ_d = N ω_d pour chaque dimension d."""

    a: np.ndarray
    b: np.ndarray
    basis: NullSpaceBasis
    omega: np.ndarray

    def __post_init__(self):
        a = _frozen(np.ravel(self.a))
        b = _frozen(np.ravel(self.b))
        if a.shape != b.shape:
            raise ArgumentError(f"Extrémités de dimensions différentes: {a.shape} vs {b.shape}")
        omega = _frozen(np.atleast_2d(self.omega))
        if omega.shape != (a.size, self.basis.nullity):
            raise ArgumentError(
                f"omega doit avoir la forme {(a.size, self.basis.nullity)}, reçu {omega.shape}"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "omega", omega)

    @classmethod
    def straight(cls, a: Sequence[float], b: Sequence[float], basis: NullSpaceBasis) -> "GeodesicCurve":
        """Courbe initiale ω = 0 (ligne droite)."""
        a = np.ravel(np.asarray(a, dtype=float))
        return cls(a, b, basis, np.zeros((a.size, basis.nullity)))

    @property
    def dim(self) -> int:
        return self.a.size

    def with_omega(self, omega: np.ndarray) -> "GeodesicCurve":
        return GeodesicCurve(self.a, self.b, self.basis, omega)


def build_constraint_matrix(n_segments: int, knots: Optional[KnotVector] = None) -> ConstraintMatrix:
    """
    Assemble la matrice de contraintes A d'une spline cubique à n_segments morceaux.

    Args:
        n_segments: Nombre de polynômes cubiques
        knots: Noeuds (uniformes si None)

    Returns:
        ConstraintMatrix de forme (3n - 1) × 4n

    Raises:
        ArgumentError: Si le nombre de noeuds ne correspond pas à n_segments.
    """
    if n_segments < 1:
        raise ArgumentError(f"n_segments doit être >= 1 (reçu {n_segments})")
    if knots is None:
        knots = KnotVector.uniform(n_segments)
    if knots.n_segments != n_segments:
        raise ArgumentError(
            f"{knots.values.size} noeuds fournis pour {n_segments} segments "
            f"(attendu {n_segments + 1})"
        )

    n = n_segments
    boundary = np.zeros((2, 4 * n))
    boundary[0, 0] = 1.0
    boundary[1, 4 * (n - 1):] = 1.0

    c0 = np.zeros((n - 1, 4 * n))
    c1 = np.zeros((n - 1, 4 * n))
    c2 = np.zeros((n - 1, 4 * n))
    for i in range(1, n):
        h = knots.values[i]
        offset = 4 * (i - 1)
        c0[i - 1, offset:offset + 8] = [1, h, h ** 2, h ** 3, -1, -h, -h ** 2, -h ** 3]
        c1[i - 1, offset:offset + 8] = [0, 1, 2 * h, 3 * h ** 2, 0, -1, -2 * h, -3 * h ** 2]
        c2[i - 1, offset:offset + 8] = [0, 0, 2, 6 * h, 0, 0, -2, -6 * h]

    return ConstraintMatrix(np.vstack([boundary, c0, c1, c2]), knots)


def null_space_basis(constraints: ConstraintMatrix, sv_tol: float = DEFAULT_SV_TOL) -> NullSpaceBasis:
    """
    Calcule une base orthonormale du noyau de A par SVD.

    Les colonnes retenues sont les vecteurs singuliers à droite dont la valeur
    singulière est inférieure à sv_tol × σ_max.

    Raises:
        ArgumentError: Si la matrice est vide ou sv_tol <= 0.
        NullSpaceError: Si la nullité diffère d'un calcul précédent de même forme,
            ou si le résidu ‖A·N‖ est trop grand.
    """
    matrix = constraints.matrix
    if matrix.size == 0:
        raise ArgumentError("Matrice de contraintes vide")
    if sv_tol <= 0:
        raise ArgumentError(f"sv_tol doit être > 0 (reçu {sv_tol})")

    _, singular_values, vh = linalg.svd(matrix, full_matrices=True)
    rank = int(np.sum(singular_values >= sv_tol * singular_values[0]))
    basis = vh[rank:].T
    nullity = basis.shape[1]

    residual = np.max(np.abs(matrix @ basis)) if nullity else 0.0
    if residual > 1e-10 * np.max(np.abs(matrix)):
        raise NullSpaceError(f"Résidu ‖A·N‖ trop grand: {residual:.3e}")

    # Seules les bases valides sont mémorisées
    with _nullity_lock:
        expected = _nullity_by_shape.setdefault((matrix.shape, sv_tol), nullity)
    if expected != nullity:
        raise NullSpaceError(
            f"Nullité incohérente pour la forme {matrix.shape}: {nullity} au lieu de {expected}"
        )

    logger.debug(f"Noyau calculé: forme {matrix.shape}, rang {rank}, nullité {nullity}")
    return NullSpaceBasis(basis, constraints.knots, rank, singular_values)


@lru_cache(maxsize=32)
def uniform_spline_basis(n_segments: int, sv_tol: float = DEFAULT_SV_TOL) -> NullSpaceBasis:
    """Base du noyau pour des noeuds uniformes (mise en cache)."""
    return null_space_basis(build_constraint_matrix(n_segments), sv_tol)


def polynomial_rows(knots: KnotVector, t: np.ndarray, derivative: int = 0,
                    segment: Optional[Union[int, np.ndarray]] = None) -> np.ndarray:
    """
    Lignes d'évaluation polynomiale Φ(t) de forme (len(t), 4n).

    Chaque ligne porte (1, t, t², t³) (ou sa dérivée) sur les quatre colonnes
    du segment actif et des zéros ailleurs.

    Args:
        knots: Noeuds de la spline
        t: Paramètres d'évaluation
        derivative: Ordre de dérivation (0, 1 ou 2)
        segment: Segment imposé (sinon celui qui contient t)
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if segment is None:
        segment = knots.segment_of(t)
    segment = np.broadcast_to(np.asarray(segment, dtype=int), t.shape)

    if derivative == 0:
        local = np.stack([np.ones_like(t), t, t ** 2, t ** 3], axis=-1)
    elif derivative == 1:
        local = np.stack([np.zeros_like(t), np.ones_like(t), 2 * t, 3 * t ** 2], axis=-1)
    elif derivative == 2:
        local = np.stack([np.zeros_like(t), np.zeros_like(t), 2 * np.ones_like(t), 6 * t], axis=-1)
    else:
        raise ArgumentError(f"Ordre de dérivation non pris en charge: {derivative}")

    rows = np.zeros((t.size, 4 * knots.n_segments))
    columns = 4 * segment[:, None] + np.arange(4)[None, :]
    rows[np.arange(t.size)[:, None], columns] = local
    return rows


def design_matrix(basis: NullSpaceBasis, t: np.ndarray, derivative: int = 0) -> np.ndarray:
    """
    Matrice Φ(t)·N de forme (len(t), k): S_d(t) = design_matrix(t) @ ω_d.

    S(0) = S(1) = 0 par construction; les lignes correspondantes sont
    annulées pour éliminer le résidu d'arrondi de N.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    design = polynomial_rows(basis.knots, t, derivative) @ basis.basis
    if derivative == 0:
        design[(t == 0.0) | (t == 1.0)] = 0.0
    return design


def _check_parameter(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > 1.0):
        raise ArgumentError(f"t doit appartenir à [0, 1] (reçu {t})")
    return t


def straight_line(a: np.ndarray, b: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Ligne droite l(t) = a + t (b - a), exacte aux extrémités et constante si a = b."""
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    return np.where(t == 1.0, b[None, :], a[None, :] + t * (b - a)[None, :])


def line_points(curve: GeodesicCurve, t: np.ndarray) -> np.ndarray:
    """Ligne droite l(t) entre les extrémités de la courbe."""
    return straight_line(curve.a, curve.b, t)


def curve_eval(curve: GeodesicCurve, t: Union[float, np.ndarray]) -> np.ndarray:
    """
    Évalue γ(t) = l(t) + S(t).

    Args:
        curve: Courbe à évaluer
        t: Scalaire ou tableau de paramètres dans [0, 1]

    Returns:
        Point latent (d,) pour un scalaire, tableau (len(t), d) sinon.

    Raises:
        ArgumentError: Si t sort de [0, 1].
    """
    t = _check_parameter(t)
    scalar = t.ndim == 0
    ts = np.atleast_1d(t)
    points = line_points(curve, ts) + design_matrix(curve.basis, ts) @ curve.omega.T
    return points[0] if scalar else points


def curve_velocity(curve: GeodesicCurve, t: Union[float, np.ndarray]) -> np.ndarray:
    """Dérivée γ'(t) = (b - a) + S'(t)."""
    t = _check_parameter(t)
    scalar = t.ndim == 0
    ts = np.atleast_1d(t)
    velocity = (curve.b - curve.a)[None, :] + design_matrix(curve.basis, ts, derivative=1) @ curve.omega.T
    return velocity[0] if scalar else velocity


def curve_param_jacobian(curve: GeodesicCurve, t: float) -> np.ndarray:
    """
    Sensibilité ∂γ_d(t)/∂ω_d, matrice d × k.

    La courbe est linéaire en ω: le résultat ne dépend pas de ω et vaut
    exactement zéro en t = 0 et t = 1.
    """
    t = _check_parameter(t)
    if t.ndim != 0:
        raise ArgumentError("curve_param_jacobian attend un scalaire t")
    row = design_matrix(curve.basis, t)[0]
    return np.tile(row, (curve.dim, 1))
