"""
Journalisation et serveur MCP de latent-geodesics.

Ce module configure le logging du package et construit le serveur MCP
qui expose les opérations géométriques comme outils.
"""

import logging
import os
import sys
from typing import Dict, Optional

from dotenv import load_dotenv
from fastmcp import FastMCP

from .tools import register_all_tools
from .version import __version__

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

# Paramètres MCP recopiés dans l'environnement du serveur
FORWARDED_PARAMETERS = ("LOG_LEVEL", "LATENT_GEODESICS_THREADS")


def init_logging(debug: bool = False):
    """
    Initialise la configuration de logging.

    Les logs vont sur la sortie d'erreur: la sortie standard porte les
    rapports JSON de la ligne de commande et le transport stdio.

    Args:
        debug: Si True, active le niveau de log DEBUG.
    """
    load_dotenv()

    level_name = os.environ.get("LOG_LEVEL", "INFO").upper()
    level = logging.DEBUG if debug else getattr(logging, level_name, logging.INFO)

    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    # Avertissements numpy (débordements, divisions) dans les logs
    logging.captureWarnings(True)

    for noisy in ("mcp", "fastmcp"):
        logging.getLogger(noisy).setLevel(logging.WARNING)


def _apply_parameters(parameters: Optional[Dict[str, str]]):
    if not parameters:
        return
    for key in FORWARDED_PARAMETERS:
        if key not in parameters:
            continue
        value = str(parameters[key])
        if key == "LATENT_GEODESICS_THREADS" and (not value.isdigit() or int(value) < 1):
            logger.warning(f"Paramètre {key} ignoré: entier positif attendu, reçu '{value}'")
            continue
        os.environ[key] = value


def get_mcp_instructions() -> str:
    """Instructions transmises aux clients MCP."""
    return """
Serveur de géométrie latente: distances géodésiques pour la métrique tirée
en arrière G(z) = J(z)ᵀ J(z) d'un décodeur.

Un décodeur est un document JSON avec un champ `kind` parmi linear, sphere,
paraboloid, mlp, reparametrized, et les champs `latent_dim`, `ambient_dim`.

- `compute_geodesic_distance(decoder, z1, z2)` → longueur de la géodésique
- `compute_geodesic(decoder, z1, z2)` → courbe échantillonnée (latent et décodée)
- `compute_pullback_metric(decoder, z)` → G(z) et élément de volume
- `compute_gaussian_curvature(decoder, z)` → courbure de Gauss (dimension 2)
- `run_experiment(config)` → expériences oracle, invariance, cv, geodesic, karcher
"""


def create_mcp_server(debug: bool = False, parameters: Optional[Dict[str, str]] = None) -> FastMCP:
    """
    Crée et configure une instance du serveur MCP.

    Args:
        debug: Si True, active le mode debug.
        parameters: Paramètres MCP fournis par le client; ils remplacent les
            valeurs du fichier .env pour LOG_LEVEL et LATENT_GEODESICS_THREADS.

    Returns:
        L'instance configurée du serveur MCP.
    """
    init_logging(debug)
    _apply_parameters(parameters)

    mcp = FastMCP(
        name="LatentGeodesics",
        instructions=get_mcp_instructions(),
        version=__version__
    )
    register_all_tools(mcp)

    logger.info(
        f"Serveur MCP latent-geodesics v{__version__} initialisé "
        f"(workers: {os.environ.get('LATENT_GEODESICS_THREADS', '1')})"
    )
    return mcp
