"""
Outils MCP de latent-geodesics.

Ce module regroupe les outils MCP disponibles, organisés par catégories
fonctionnelles.
"""

from .experiments import register_experiment_tools
from .geometry import register_geometry_tools


def register_all_tools(mcp_server):
    """
    Enregistre tous les outils MCP disponibles sur le serveur.

    Args:
        mcp_server: L'instance du serveur MCP sur laquelle enregistrer les outils.
    """
    # Géométrie ponctuelle et géodésiques
    register_geometry_tools(mcp_server)

    # Expériences
    register_experiment_tools(mcp_server)
