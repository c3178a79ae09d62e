"""
Point d'entrée principal de latent-geodesics.

Ce module contient la fonction main() qui analyse les arguments de la
ligne de commande et lance l'expérience demandée, ou le serveur MCP avec
le transport approprié.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from .experiments import EXPERIMENTS, load_config, run_experiment
from .reports import write_report
from .server import create_mcp_server, init_logging

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECKS_FAILED = 2


def _add_experiment_options(parser: argparse.ArgumentParser):
    parser.add_argument(
        '--config',
        required=True,
        help='Fichier de configuration JSON'
    )
    parser.add_argument(
        '--seed',
        type=int,
        default=None,
        help='Graine de l\'expérience (remplace celle du fichier)'
    )
    parser.add_argument(
        '--out',
        default=None,
        help='Chemin du rapport (sinon le rapport JSON est écrit sur la sortie standard)'
    )
    parser.add_argument(
        '--format',
        choices=['csv', 'json'],
        default=None,
        help='Format du rapport (default: celui du fichier, sinon csv)'
    )
    parser.add_argument(
        '--threads',
        type=int,
        default=None,
        help='Nombre de workers (default: LATENT_GEODESICS_THREADS ou 1)'
    )
    parser.add_argument(
        '--strict',
        action='store_true',
        help='Refuse les clés inconnues dans la configuration'
    )
    parser.add_argument(
        '--debug',
        action='store_true',
        help='Active le mode debug'
    )


def parse_args(argv: Optional[List[str]] = None):
    """
    Analyse les arguments de la ligne de commande.

    Returns:
        Les arguments analysés.
    """
    parser = argparse.ArgumentParser(
        description='Distances géodésiques identifiables dans l\'espace latent de décodeurs'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    for kind in EXPERIMENTS:
        _add_experiment_options(subparsers.add_parser(kind, help=f'Expérience {kind}'))

    serve = subparsers.add_parser('serve', help='Lance le serveur MCP')
    serve.add_argument(
        '--transport',
        choices=['stdio', 'streamable-http', 'sse'],
        default='stdio',
        help='Type de transport à utiliser (default: stdio)'
    )
    serve.add_argument(
        '--host',
        default='127.0.0.1',
        help='Hôte pour les transports HTTP (default: 127.0.0.1)'
    )
    serve.add_argument(
        '--port',
        type=int,
        default=8000,
        help='Port pour les transports HTTP (default: 8000)'
    )
    serve.add_argument(
        '--path',
        default='/mcp',
        help='Chemin pour streamable-http (default: /mcp)'
    )
    serve.add_argument(
        '--mount-path',
        default='/sse',
        help='Chemin pour SSE (default: /sse)'
    )
    serve.add_argument(
        '--debug',
        action='store_true',
        help='Active le mode debug'
    )

    return parser.parse_args(argv)


def run_command(args) -> int:
    """
    Exécute une expérience et écrit son rapport.

    Returns:
        0 si toutes les vérifications passent, 2 sinon.
    """
    init_logging(args.debug)
    threads = args.threads
    if threads is None and os.environ.get("LATENT_GEODESICS_THREADS"):
        threads = int(os.environ["LATENT_GEODESICS_THREADS"])
    overrides = {
        "kind": args.command,
        "seed": args.seed,
        "output": args.out,
        "format": args.format,
        "threads": threads,
    }
    cfg = load_config(args.config, strict=args.strict, overrides=overrides)
    report = run_experiment(cfg)

    if cfg.output:
        write_report(report, cfg.output, cfg.format)
    else:
        sys.stdout.write(report.model_dump_json(indent=2))
        sys.stdout.write("\n")

    if not report.summary.passed:
        failed = [name for name, ok in report.summary.checks.items() if not ok]
        logger.warning(f"Vérifications en échec: {', '.join(failed)}")
        return EXIT_CHECKS_FAILED
    return EXIT_OK


def serve_command(args) -> int:
    """Lance le serveur MCP avec le transport demandé."""
    parameters = {}
    if os.environ.get("MCP_PARAMETERS"):
        try:
            parameters = json.loads(os.environ.get("MCP_PARAMETERS", "{}"))
        except json.JSONDecodeError:
            logger.warning("Impossible de décoder les paramètres MCP")

    mcp = create_mcp_server(debug=args.debug, parameters=parameters)

    if args.transport != 'stdio' and args.host == '0.0.0.0':
        logger.warning(
            "AVERTISSEMENT DE SÉCURITÉ: Utilisation de host='0.0.0.0'. "
            "Cela expose le serveur à tous les réseaux. "
            "Utilisez '127.0.0.1' pour limiter l'accès au localhost."
        )

    if args.transport == 'stdio':
        logger.info("Démarrage du serveur MCP avec transport stdio")
        mcp.run()
    elif args.transport == 'streamable-http':
        logger.info(
            f"Démarrage du serveur MCP avec transport streamable-http "
            f"sur {args.host}:{args.port}{args.path}"
        )
        mcp.run(transport="streamable-http", host=args.host, port=args.port, path=args.path)
    else:
        logger.warning(
            "Le transport SSE est déprécié selon les dernières spécifications MCP. "
            "Envisagez d'utiliser streamable-http à la place."
        )
        logger.info(
            f"Démarrage du serveur MCP avec transport SSE (déprécié) "
            f"sur {args.host}:{args.port}{args.mount_path}"
        )
        mcp.run(transport="sse", host=args.host, port=args.port, mount_path=args.mount_path)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Fonction principale de la ligne de commande.

    Returns:
        Code de sortie : 0 en cas de succès, 2 si une vérification d'expérience
        échoue, 1 en cas d'erreur.
    """
    args = parse_args(argv)

    try:
        if args.command == 'serve':
            return serve_command(args)
        return run_command(args)
    except KeyboardInterrupt:
        logger.info("Arrêt demandé (interruption clavier)")
        return EXIT_OK
    except Exception as e:
        logger.error(f"Erreur lors de l'exécution de '{args.command}': {e}", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
