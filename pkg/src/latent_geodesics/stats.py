"""
Statistiques sur la variété et statistiques de stabilité des distances.

Variance de Fréchet et moyenne de Karcher pour la distance géodésique,
coefficient de variation et test t unilatéral de Student.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats as scipy_stats

from .errors import ArgumentError
from .manifold.decoders import Decoder
from .models import SolverConfig
from .solver import geodesic_distance
from .workers import parallel_map

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

KARCHER_STEP_FRACTION = 0.1
KARCHER_SHRINK = 0.5
KARCHER_MIN_STEP = 1e-3
KARCHER_MAX_EVALUATIONS = 200


@dataclass(frozen=True)
class KarcherResult:
    """Résultat de la recherche de moyenne de Karcher."""

    mean: np.ndarray
    value: float
    evaluations: int
    converged: bool


def _as_points(points: Sequence[Sequence[float]], dim: int) -> np.ndarray:
    array = np.asarray(points, dtype=float)
    if array.ndim != 2 or array.shape[0] == 0:
        raise ArgumentError("Le nuage de points doit être un tableau (N, d) non vide")
    if array.shape[1] != dim:
        raise ArgumentError(f"Points de dimension {array.shape[1]}, le décodeur attend {dim}")
    return array


def frechet_variance(f: Decoder, p: Sequence[float], points: Sequence[Sequence[float]],
                     cfg: Optional[SolverConfig] = None, threads: Optional[int] = None) -> float:
    """
    Variance de Fréchet Ψ(p) = Σ_i d_g(p, x_i)².

    Les résolutions géodésiques sont réparties sur le pool de workers; la
    graine de chaque résolution dérive de l'indice du point.

    Args:
        f: Décodeur
        p: Point candidat
        points: Nuage de points latents
        cfg: Configuration du solveur
        threads: Nombre de workers

    Raises:
        ArgumentError: Si le nuage est vide ou de mauvaise dimension.
    """
    cloud = _as_points(points, f.latent_dim)
    p = np.asarray(p, dtype=float).ravel()
    distances = parallel_map(
        lambda item: geodesic_distance(f, p, item[1], cfg, pair_index=item[0]),
        list(enumerate(cloud)),
        threads,
    )
    return float(np.sum(np.square(distances)))


def karcher_mean(f: Decoder, points: Sequence[Sequence[float]], cfg: Optional[SolverConfig] = None,
                 threads: Optional[int] = None,
                 max_evaluations: int = KARCHER_MAX_EVALUATIONS) -> KarcherResult:
    """
    Moyenne de Karcher par recherche par motifs le long des axes.

    Part de la moyenne arithmétique latente. À chaque itération, Ψ est évalué
    en x ± s·e_i pour chaque coordonnée i et le meilleur déplacement est
    retenu; sans amélioration, le pas s est divisé par deux. Le pas initial
    vaut 10 % de la diagonale de la boîte englobante du nuage.

    Returns:
        KarcherResult (converged=False si le budget d'évaluations est épuisé).
    """
    cloud = _as_points(points, f.latent_dim)
    current = cloud.mean(axis=0)
    diagonal = float(np.linalg.norm(cloud.max(axis=0) - cloud.min(axis=0)))
    if diagonal == 0.0:
        return KarcherResult(current, 0.0, 0, True)

    def psi(x: np.ndarray) -> float:
        return frechet_variance(f, x, cloud, cfg, threads)

    value = psi(current)
    evaluations = 1
    step = KARCHER_STEP_FRACTION * diagonal
    converged = False

    while evaluations < max_evaluations:
        if step < KARCHER_MIN_STEP:
            converged = True
            break
        best_value, best_point = value, current
        for axis in range(cloud.shape[1]):
            for sign in (1.0, -1.0):
                if evaluations >= max_evaluations:
                    break
                candidate = current.copy()
                candidate[axis] += sign * step
                candidate_value = psi(candidate)
                evaluations += 1
                if candidate_value < best_value:
                    best_value, best_point = candidate_value, candidate
        if best_value < value:
            value, current = best_value, best_point
        else:
            step *= KARCHER_SHRINK
        logger.debug(f"Karcher: Ψ = {value:.6g}, pas = {step:.3g}, évaluations = {evaluations}")

    if not converged:
        logger.warning(f"Moyenne de Karcher non convergée après {evaluations} évaluations de Ψ")
    return KarcherResult(current, float(value), evaluations, converged)


def coefficient_of_variation(samples: Sequence[float]) -> float:
    """
    Coefficient de variation s/μ avec écart-type corrigé de Bessel (n - 1).

    Raises:
        ArgumentError: Moins de deux échantillons, ou moyenne nulle.
    """
    values = np.asarray(samples, dtype=float).ravel()
    if values.size < 2:
        raise ArgumentError(f"Au moins deux échantillons sont requis (reçu {values.size})")
    mean = float(np.mean(values))
    if mean == 0.0:
        raise ArgumentError("Coefficient de variation non défini pour une moyenne nulle")
    return float(np.std(values, ddof=1) / mean)


def one_sided_t_test(cv_geodesic: Sequence[float], cv_euclidean: Sequence[float],
                     alternative: str = "less") -> Tuple[float, float]:
    """
    Test t de Student à deux échantillons (variances groupées), unilatéral.

    Args:
        cv_geodesic: CV par paire des distances géodésiques
        cv_euclidean: CV par paire des distances euclidiennes
        alternative: "less" pour H1: moyenne(cv_geodesic) < moyenne(cv_euclidean),
            "greater" pour l'orientation opposée

    Returns:
        (t, p); t < 0 quand les CV géodésiques sont plus petits

    Raises:
        ArgumentError: Moins de deux valeurs par liste, ou deux variances nulles.
    """
    geodesic = np.asarray(cv_geodesic, dtype=float).ravel()
    euclidean = np.asarray(cv_euclidean, dtype=float).ravel()
    if geodesic.size < 2 or euclidean.size < 2:
        raise ArgumentError("Chaque liste doit contenir au moins deux valeurs")
    if alternative not in ("less", "greater"):
        raise ArgumentError(f"Hypothèse alternative inconnue: {alternative}")
    if np.var(geodesic) == 0.0 and np.var(euclidean) == 0.0:
        raise ArgumentError("Variance dégénérée: les deux échantillons sont constants")
    result = scipy_stats.ttest_ind(geodesic, euclidean, equal_var=True, alternative=alternative)
    return float(result.statistic), float(result.pvalue)
