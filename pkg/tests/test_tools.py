"""
Tests des outils MCP.

Ce module vérifie le comportement des outils et leur conformité au format
de réponse MCP (champs `success` et `message`).
"""

import os
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from latent_geodesics.server import create_mcp_server
from latent_geodesics.tools import register_all_tools
from latent_geodesics.tools.experiments import run_experiment
from latent_geodesics.tools.geometry import (
    compute_gaussian_curvature,
    compute_geodesic,
    compute_geodesic_distance,
    compute_pullback_metric,
)

from .conftest import FAST_SOLVER, LINEAR_WEIGHTS


def _assert_mcp_format(result):
    assert isinstance(result, dict), "La réponse doit être un dictionnaire"
    assert "success" in result, "La réponse doit contenir un champ 'success'"
    assert isinstance(result["success"], bool), "Le champ 'success' doit être un booléen"
    assert "message" in result, "La réponse doit contenir un champ 'message'"
    assert isinstance(result["message"], str), "Le champ 'message' doit être une chaîne"


@pytest.mark.asyncio
async def test_compute_geodesic_distance(linear_document):
    """Vérifie la distance géodésique renvoyée pour un décodeur linéaire."""
    result = await compute_geodesic_distance(linear_document, [0.0, 0.0], [0.5, 0.5], FAST_SOLVER)
    _assert_mcp_format(result)
    assert result["success"]
    expected = np.linalg.norm(np.array(LINEAR_WEIGHTS) @ np.array([0.5, 0.5]))
    assert result["distance"] == pytest.approx(expected, rel=1e-9)
    assert result["converged"]


@pytest.mark.asyncio
async def test_compute_geodesic_samples(sphere_document):
    """Vérifie la courbe échantillonnée renvoyée par compute_geodesic."""
    result = await compute_geodesic(sphere_document, [1.0, -0.5], [2.0, 0.5], FAST_SOLVER, n_samples=10)
    _assert_mcp_format(result)
    geodesic = result["geodesic"]
    assert len(geodesic["latent"]) == 10
    assert geodesic["latent"][0] == [1.0, -0.5]
    assert len(geodesic["decoded"][0]) == 3


@pytest.mark.asyncio
async def test_compute_pullback_metric(sphere_document):
    """Vérifie la métrique sphérique renvoyée par l'outil."""
    result = await compute_pullback_metric(sphere_document, [np.pi / 2, 0.0])
    _assert_mcp_format(result)
    assert np.allclose(result["metric"], np.eye(2))
    assert result["volume"] == pytest.approx(1.0)


@pytest.mark.asyncio
async def test_compute_gaussian_curvature(sphere_document):
    """Vérifie la courbure de la sphère unité."""
    result = await compute_gaussian_curvature(sphere_document, [1.2, 0.1])
    _assert_mcp_format(result)
    assert result["curvature"] == pytest.approx(1.0, rel=1e-4)


@pytest.mark.asyncio
async def test_gaussian_curvature_error_format():
    """Vérifie le format d'erreur quand la courbure n'est pas définie."""
    document = {"kind": "paraboloid", "latent_dim": 3, "ambient_dim": 4, "coeffs": [1.0, 1.0, 1.0]}
    result = await compute_gaussian_curvature(document, [0.0, 0.0, 0.0])
    _assert_mcp_format(result)
    assert not result["success"]
    assert result["message"].startswith("Erreur")


@pytest.mark.asyncio
async def test_invalid_decoder_error_format(linear_document):
    """Vérifie le format d'erreur pour un document de décodeur invalide."""
    linear_document["weights"] = "not a matrix"
    result = await compute_geodesic_distance(linear_document, [0.0, 0.0], [1.0, 1.0])
    _assert_mcp_format(result)
    assert not result["success"]


@pytest.mark.asyncio
async def test_run_experiment_tool(experiment_config, tmp_path):
    """Vérifie l'exécution d'une expérience via l'outil MCP."""
    output = str(tmp_path / "report.json")
    result = await run_experiment(experiment_config(n_pairs=2), include_records=True, output=output)
    _assert_mcp_format(result)
    assert result["success"]
    assert result["passed"]
    assert len(result["records"]) == 2
    assert (tmp_path / "report.json").exists()


@pytest.mark.asyncio
async def test_run_experiment_tool_strict_error(experiment_config):
    """Vérifie qu'une clé inconnue est refusée en mode strict."""
    result = await run_experiment(experiment_config(bogus=1), strict=True)
    _assert_mcp_format(result)
    assert not result["success"]
    assert "bogus" in result["message"]


def test_register_all_tools():
    """Vérifie l'enregistrement de tous les outils sur le serveur."""
    server = MagicMock()
    register_all_tools(server)
    assert server.tool.call_count == 5


def test_create_mcp_server():
    """Vérifie la construction du serveur et l'application des paramètres MCP."""
    with patch("latent_geodesics.server.FastMCP") as fastmcp, \
            patch.dict("os.environ", {}, clear=False):
        create_mcp_server(parameters={"LATENT_GEODESICS_THREADS": "4"})
        assert os.environ["LATENT_GEODESICS_THREADS"] == "4"
    assert fastmcp.call_args.kwargs["name"] == "LatentGeodesics"
    assert fastmcp.return_value.tool.call_count == 5


def test_create_mcp_server_rejects_invalid_threads(monkeypatch):
    """Vérifie qu'un nombre de workers invalide n'est pas recopié dans l'environnement."""
    monkeypatch.delenv("LATENT_GEODESICS_THREADS", raising=False)
    with patch("latent_geodesics.server.FastMCP") as fastmcp:
        create_mcp_server(parameters={"LATENT_GEODESICS_THREADS": "zero"})
    assert "LATENT_GEODESICS_THREADS" not in os.environ
    assert "compute_geodesic" in fastmcp.call_args.kwargs["instructions"]
