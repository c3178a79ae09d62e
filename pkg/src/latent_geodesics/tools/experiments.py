"""
Outil MCP d'exécution d'expériences.
"""

import asyncio
import json
import logging
from typing import Any, Dict, Optional

from ..experiments import parse_config, run_experiment as run_configured_experiment
from ..reports import write_report

# Configurer le logger
logger = logging.getLogger("latent_geodesics")


def register_experiment_tools(mcp_server):
    """
    Enregistre les outils d'expérience sur le serveur MCP.

    Args:
        mcp_server: L'instance du serveur MCP sur laquelle enregistrer les outils.
    """
    mcp_server.tool()(run_experiment)


async def run_experiment(config: Dict[str, Any], strict: bool = True,
                         include_records: bool = False,
                         output: Optional[str] = None) -> Dict[str, Any]:
    """
    Exécute une expérience (oracle, invariance, cv, geodesic, karcher).

    Args:
        config: Document de configuration (même schéma que les fichiers JSON)
        strict: Refuse les clés inconnues si True
        include_records: Inclut toutes les mesures dans la réponse
        output: Chemin optionnel où écrire le rapport (format déduit de l'extension si absent de config)

    Returns:
        Dict avec:
            - success (bool): Indique si l'opération a réussi
            - message (str): Message de succès ou d'erreur
            - passed (bool): Verdict des vérifications de l'expérience
            - summary (Dict): Résumé statistique
            - provenance (Dict): Graines et versions
            - records (List): Mesures, si include_records
    """
    logger.info(f"Tool called: run_experiment with kind: {config.get('kind')}")

    def run():
        cfg = parse_config(json.dumps(config), strict=strict)
        report = run_configured_experiment(cfg)
        if output:
            write_report(report, output, cfg.format if "format" in config else None)
        return report

    try:
        report = await asyncio.to_thread(run)
        response = {
            "success": True,
            "message": f"Expérience {report.config['kind']} terminée "
                       f"({'succès' if report.summary.passed else 'échec des vérifications'})",
            "passed": report.summary.passed,
            "summary": report.summary.model_dump(mode="json"),
            "provenance": report.provenance.model_dump(mode="json"),
        }
        if include_records:
            response["records"] = [record.model_dump() for record in report.records]
        return response
    except Exception as e:
        logger.error(f"Erreur lors de l'exécution de l'expérience: {e}")
        return {
            "success": False,
            "message": f"Erreur lors de l'exécution de l'expérience: {str(e)}",
        }
