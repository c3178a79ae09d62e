"""
Outils géométriques pour le serveur MCP.

Ce module expose le calcul de géodésiques, de distances, de la métrique
tirée en arrière et de la courbure de Gauss. Les décodeurs sont fournis
sous forme de documents JSON (même schéma que les fichiers de décodeurs).
"""

import asyncio
import logging
from typing import Any, Dict, List, Optional

import numpy as np

from ..manifold.loader import load_decoder
from ..manifold.metric import gaussian_curvature_2d, pullback_metric, tangent_volume
from ..models import SolverConfig
from ..solver import solve_geodesic, time_grid
from ..spline import curve_eval

# Configurer le logger
logger = logging.getLogger("latent_geodesics")


def register_geometry_tools(mcp_server):
    """
    Enregistre les outils géométriques sur le serveur MCP.

    Args:
        mcp_server: L'instance du serveur MCP sur laquelle enregistrer les outils.
    """
    mcp_server.tool()(compute_geodesic)
    mcp_server.tool()(compute_geodesic_distance)
    mcp_server.tool()(compute_pullback_metric)
    mcp_server.tool()(compute_gaussian_curvature)


def _solver_config(solver: Optional[Dict[str, Any]]) -> SolverConfig:
    return SolverConfig.model_validate(solver or {})


def _geodesic_payload(decoder: Dict[str, Any], z1: List[float], z2: List[float],
                      solver: Optional[Dict[str, Any]], n_samples: int) -> Dict[str, Any]:
    f = load_decoder(decoder)
    solution = solve_geodesic(f, z1, z2, _solver_config(solver))
    latent = curve_eval(solution.curve, time_grid(n_samples))
    return {
        "length": solution.length,
        "energy": solution.energy,
        "steps": solution.steps_taken,
        "converged": solution.converged,
        "min_singular_value_seen": solution.min_singular_value_seen,
        "latent": latent.tolist(),
        "decoded": f.decode(latent).tolist(),
    }


async def compute_geodesic(decoder: Dict[str, Any], z1: List[float], z2: List[float],
                           solver: Optional[Dict[str, Any]] = None,
                           n_samples: int = 32) -> Dict[str, Any]:
    """
    Calcule la géodésique entre deux points latents.

    Args:
        decoder: Document JSON du décodeur (clé "kind" obligatoire)
        z1: Point de départ
        z2: Point d'arrivée
        solver: Configuration du solveur (valeurs par défaut si absente)
        n_samples: Nombre de points renvoyés le long de la courbe

    Returns:
        Dict avec:
            - success (bool): Indique si l'opération a réussi
            - message (str): Message de succès ou d'erreur
            - geodesic (Dict): Longueur, énergie, diagnostics et courbe échantillonnée
    """
    logger.info(f"Tool called: compute_geodesic with decoder kind: {decoder.get('kind')}")

    try:
        payload = await asyncio.to_thread(_geodesic_payload, decoder, z1, z2, solver, max(2, n_samples))
        return {
            "success": True,
            "message": f"Géodésique calculée (longueur {payload['length']:.6g})",
            "geodesic": payload,
        }
    except Exception as e:
        logger.error(f"Erreur lors du calcul de la géodésique: {e}")
        return {
            "success": False,
            "message": f"Erreur lors du calcul de la géodésique: {str(e)}",
        }


async def compute_geodesic_distance(decoder: Dict[str, Any], z1: List[float], z2: List[float],
                                    solver: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Calcule la distance géodésique entre deux points latents.

    Returns:
        Dict avec success, message, distance (float) et converged (bool)
    """
    logger.info("Tool called: compute_geodesic_distance")

    def run():
        solution = solve_geodesic(load_decoder(decoder), z1, z2, _solver_config(solver))
        return solution.length, solution.converged

    try:
        distance, converged = await asyncio.to_thread(run)
        return {
            "success": True,
            "message": f"Distance géodésique: {distance:.6g}",
            "distance": distance,
            "converged": converged,
        }
    except Exception as e:
        logger.error(f"Erreur lors du calcul de la distance: {e}")
        return {
            "success": False,
            "message": f"Erreur lors du calcul de la distance: {str(e)}",
        }


async def compute_pullback_metric(decoder: Dict[str, Any], z: List[float],
                                  verify: bool = False) -> Dict[str, Any]:
    """
    Calcule la métrique G(z) = J(z)ᵀ J(z) en un point latent.

    Returns:
        Dict avec success, message, metric (matrice d × d), volume (sqrt det G)
        et smallest_eigenvalue
    """
    logger.info(f"Tool called: compute_pullback_metric at z: {z}")

    try:
        metric = pullback_metric(load_decoder(decoder), np.asarray(z, dtype=float), verify=verify)
        return {
            "success": True,
            "message": f"Métrique calculée ({metric.dim} × {metric.dim})",
            "metric": metric.matrix.tolist(),
            "volume": tangent_volume(metric),
            "smallest_eigenvalue": metric.smallest_eigenvalue(),
        }
    except Exception as e:
        logger.error(f"Erreur lors du calcul de la métrique: {e}")
        return {
            "success": False,
            "message": f"Erreur lors du calcul de la métrique: {str(e)}",
        }


async def compute_gaussian_curvature(decoder: Dict[str, Any], z: List[float],
                                     fd_step: float = 1e-3) -> Dict[str, Any]:
    """
    Calcule la courbure de Gauss de l'espace latent (dimension 2 uniquement).

    Returns:
        Dict avec success, message et curvature (float)
    """
    logger.info(f"Tool called: compute_gaussian_curvature at z: {z}")

    try:
        curvature = gaussian_curvature_2d(load_decoder(decoder), np.asarray(z, dtype=float), fd_step)
        return {
            "success": True,
            "message": f"Courbure de Gauss: {curvature:.6g}",
            "curvature": curvature,
        }
    except Exception as e:
        logger.error(f"Erreur lors du calcul de la courbure: {e}")
        return {
            "success": False,
            "message": f"Erreur lors du calcul de la courbure: {str(e)}",
        }
