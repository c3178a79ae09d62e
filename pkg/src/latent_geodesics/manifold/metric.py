"""
Métrique tirée en arrière et mesures ponctuelles.

Avec la métrique euclidienne dans l'espace ambiant, la métrique induite
par un décodeur f au point z est G(z) = J(z)ᵀ J(z).
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, RankDeficiencyError, UnsupportedError
from .decoders import Decoder

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

DEFAULT_RANK_TOL = 1e-8
DEFAULT_FD_STEP = 1e-3


@dataclass(frozen=True)
class MetricTensor:
    """Matrice symétrique définie positive G en un point latent."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ArgumentError(f"G doit être carrée (reçu {matrix.shape})")
        scale = max(float(np.max(np.abs(matrix))), 1.0)
        if np.max(np.abs(matrix - matrix.T)) > 1e-12 * scale:
            raise ArgumentError("G doit être symétrique")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float).ravel()
        if v.shape != (self.dim,):
            raise ArgumentError(f"Vecteur tangent de dimension {v.size}, attendu {self.dim}")
        return v

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """Produit scalaire ⟨u, v⟩_G = uᵀ G v."""
        return float(self._check(u) @ self.matrix @ self._check(v))

    def smallest_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def pullback_metric(f: Decoder, z: np.ndarray, verify: bool = False,
                    rank_tol: float = DEFAULT_RANK_TOL) -> MetricTensor:
    """
    Construit la métrique tirée en arrière G(z) = J(z)ᵀ J(z).

    Args:
        f: Décodeur
        z: Point latent
        verify: Si True, vérifie le rang colonne plein de J
        rank_tol: Seuil sur la plus petite valeur propre de G

    Raises:
        RankDeficiencyError: En mode vérification, si la plus petite valeur propre <= rank_tol.
    """
    jac = f.jacobian(z)
    if jac.ndim != 2:
        raise ArgumentError("pullback_metric attend un point latent unique")
    gram = jac.T @ jac
    metric = MetricTensor(0.5 * (gram + gram.T))
    if verify:
        smallest = metric.smallest_eigenvalue()
        if smallest <= rank_tol:
            raise RankDeficiencyError(
                f"Jacobienne de rang colonne non plein en {np.asarray(z).tolist()} "
                f"(plus petite valeur propre de G: {smallest:.3e})"
            )
    return metric


def tangent_norm(metric: MetricTensor, v: np.ndarray) -> float:
    """Norme |v|_G = sqrt(vᵀ G v)."""
    return float(np.sqrt(max(metric.inner(v, v), 0.0)))


def tangent_angle(metric: MetricTensor, u: np.ndarray, v: np.ndarray) -> float:
    """
    Angle entre deux vecteurs tangents non nuls, dans [0, π].

    Raises:
        ArgumentError: Si l'un des vecteurs est nul.
    """
    norm_u = tangent_norm(metric, u)
    norm_v = tangent_norm(metric, v)
    if norm_u == 0.0 or norm_v == 0.0:
        raise ArgumentError("L'angle n'est pas défini pour un vecteur nul")
    cosine = metric.inner(u, v) / (norm_u * norm_v)
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


def tangent_volume(metric: MetricTensor) -> float:
    """Élément de volume riemannien sqrt(det G)."""
    return float(np.sqrt(max(np.linalg.det(metric.matrix), 0.0)))


def _metric_matrix(f: Decoder, z: np.ndarray) -> np.ndarray:
    jac = f.jacobian(z)
    return jac.T @ jac


def gaussian_curvature_2d(f: Decoder, z: np.ndarray, fd_step: float = DEFAULT_FD_STEP) -> float:
    """
    Courbure de Gauss de (Z, g^f) en z par la formule de Brioschi.

    Les dérivées premières et secondes des coefficients E, F, G de la
    première forme fondamentale sont obtenues par différences centrées.

    Raises:
        UnsupportedError: Si la dimension latente n'est pas 2.
    """
    if f.latent_dim != 2:
        raise UnsupportedError(
            f"La courbure de Gauss n'est définie qu'en dimension 2 (reçu {f.latent_dim})"
        )
    if fd_step <= 0:
        raise ArgumentError(f"fd_step doit être > 0 (reçu {fd_step})")
    z = np.asarray(z, dtype=float).ravel()
    h = fd_step
    e_u, e_v = np.array([h, 0.0]), np.array([0.0, h])

    g0 = _metric_matrix(f, z)
    g_pu, g_mu = _metric_matrix(f, z + e_u), _metric_matrix(f, z - e_u)
    g_pv, g_mv = _metric_matrix(f, z + e_v), _metric_matrix(f, z - e_v)
    g_pp = _metric_matrix(f, z + e_u + e_v)
    g_pm = _metric_matrix(f, z + e_u - e_v)
    g_mp = _metric_matrix(f, z - e_u + e_v)
    g_mm = _metric_matrix(f, z - e_u - e_v)

    d_u = (g_pu - g_mu) / (2 * h)
    d_v = (g_pv - g_mv) / (2 * h)
    d_uu = (g_pu - 2 * g0 + g_mu) / h ** 2
    d_vv = (g_pv - 2 * g0 + g_mv) / h ** 2
    d_uv = (g_pp - g_pm - g_mp + g_mm) / (4 * h ** 2)

    E, F, G = g0[0, 0], g0[0, 1], g0[1, 1]
    E_u, E_v = d_u[0, 0], d_v[0, 0]
    F_u, F_v = d_u[0, 1], d_v[0, 1]
    G_u, G_v = d_u[1, 1], d_v[1, 1]
    E_vv, F_uv, G_uu = d_vv[0, 0], d_uv[0, 1], d_uu[1, 1]

    first = np.array([
        [-0.5 * E_vv + F_uv - 0.5 * G_uu, 0.5 * E_u, F_u - 0.5 * E_v],
        [F_v - 0.5 * G_u, E, F],
        [0.5 * G_v, F, G],
    ])
    second = np.array([
        [0.0, 0.5 * E_v, 0.5 * G_u],
        [0.5 * E_v, E, F],
        [0.5 * G_u, F, G],
    ])
    denominator = (E * G - F ** 2) ** 2
    if denominator <= 0:
        raise RankDeficiencyError(f"Métrique dégénérée en {z.tolist()}")
    return float((np.linalg.det(first) - np.linalg.det(second)) / denominator)
