"""
Écriture et relecture des rapports d'expérience.

Format CSV: une ligne par (paire, modèle), colonnes fixes
pair_id, model_id, d_euclidean, d_geodesic, converged, steps, energy.
La configuration, le résumé et la provenance sont écrits à côté dans
`<sortie>.meta.json`. Format JSON: le rapport complet, versionné par
`schema_version`.
"""

import csv
import json
import logging
import os
from typing import List, Optional

from .errors import ArgumentError, ConfigError
from .models import CSV_COLUMNS, DistanceSample, ExperimentReport

# Configurer le logger
logger = logging.getLogger("latent_geodesics")


def meta_path(path: str) -> str:
    """Chemin du fichier de provenance associé à un rapport CSV."""
    return f"{path}.meta.json"


def _csv_row(sample: DistanceSample) -> dict:
    return {
        "pair_id": sample.pair_id,
        "model_id": sample.model_id,
        "d_euclidean": repr(float(sample.d_euclidean)),
        "d_geodesic": repr(float(sample.d_geodesic)),
        "converged": "true" if sample.converged else "false",
        "steps": sample.steps,
        "energy": repr(float(sample.energy)),
    }


def write_records_csv(records: List[DistanceSample], path: str) -> None:
    """Écrit les mesures au format CSV (flottants en représentation exacte)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for sample in records:
            writer.writerow(_csv_row(sample))


def read_records_csv(path: str) -> List[DistanceSample]:
    """
    Relit un fichier CSV écrit par write_records_csv.

    Raises:
        ConfigError: Si l'en-tête ne correspond pas aux colonnes attendues.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != CSV_COLUMNS:
            raise ConfigError(f"En-tête CSV inattendu: {reader.fieldnames} (attendu {CSV_COLUMNS})")
        return [
            DistanceSample(
                pair_id=int(row["pair_id"]),
                model_id=int(row["model_id"]),
                d_euclidean=float(row["d_euclidean"]),
                d_geodesic=float(row["d_geodesic"]),
                converged=row["converged"] == "true",
                steps=int(row["steps"]),
                energy=float(row["energy"]),
            )
            for row in reader
        ]


def report_metadata(report: ExperimentReport) -> dict:
    """Configuration, résumé et provenance d'un rapport, sans les mesures."""
    return {
        "schema_version": report.schema_version,
        "config": report.config,
        "summary": report.summary.model_dump(mode="json"),
        "provenance": report.provenance.model_dump(mode="json"),
        "csv_columns": CSV_COLUMNS,
    }


def write_report(report: ExperimentReport, path: str, format: Optional[str] = None) -> List[str]:
    """
    Écrit un rapport d'expérience.

    Args:
        report: Rapport à écrire
        path: Chemin de sortie
        format: "csv" ou "json" (déduit de l'extension si None)

    Returns:
        Liste des fichiers écrits

    Raises:
        ArgumentError: Si le format n'est pas reconnu.
    """
    if format is None:
        format = "json" if path.lower().endswith(".json") else "csv"
    if format not in ("csv", "json"):
        raise ArgumentError(f"Format de rapport inconnu: {format}")

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    if format == "json":
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(report.model_dump_json(indent=2))
            handle.write("\n")
        written = [path]
    else:
        write_records_csv(report.records, path)
        with open(meta_path(path), "w", encoding="utf-8") as handle:
            json.dump(report_metadata(report), handle, indent=2, sort_keys=True)
            handle.write("\n")
        written = [path, meta_path(path)]

    logger.info(f"Rapport écrit: {', '.join(written)} ({len(report.records)} mesures)")
    return written


def read_report_json(path: str) -> ExperimentReport:
    """Relit un rapport JSON."""
    with open(path, "r", encoding="utf-8") as handle:
        return ExperimentReport.model_validate_json(handle.read())
