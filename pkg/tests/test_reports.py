"""
Tests de l'écriture des rapports d'expérience.
"""

import json

import pytest

from latent_geodesics.errors import ArgumentError, ConfigError
from latent_geodesics.models import DistanceSample, ExperimentReport, Provenance, ReportSummary
from latent_geodesics.reports import meta_path, read_records_csv, read_report_json, write_report


@pytest.fixture
def report():
    """Petit rapport avec deux mesures."""
    return ExperimentReport(
        config={"kind": "oracle", "seed": 1},
        records=[
            DistanceSample(pair_id=0, model_id=0, d_euclidean=0.1, d_geodesic=1 / 3,
                           converged=True, steps=31, energy=0.05),
            DistanceSample(pair_id=1, model_id=0, d_euclidean=2.0, d_geodesic=2.5,
                           converged=False, steps=4096, energy=3.125),
        ],
        summary=ReportSummary(checks={"oracle_accuracy": True}, passed=True),
        provenance=Provenance(version="0.1.0", seed=1, solver_seed=0, numpy_version="x",
                              scipy_version="y", python_version="z"),
    )


def test_csv_report_layout(tmp_path, report):
    """Vérifie l'en-tête CSV, les booléens et le fichier de provenance associé."""
    path = str(tmp_path / "out.csv")
    written = write_report(report, path)
    assert written == [path, meta_path(path)]

    lines = (tmp_path / "out.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "pair_id,model_id,d_euclidean,d_geodesic,converged,steps,energy"
    assert lines[1].split(",")[4] == "true"
    assert lines[2].split(",")[4] == "false"

    with open(meta_path(path), encoding="utf-8") as handle:
        meta = json.load(handle)
    assert meta["config"] == {"kind": "oracle", "seed": 1}
    assert meta["provenance"]["seed"] == 1
    assert meta["summary"]["passed"] is True


def test_csv_floats_are_exact(tmp_path, report):
    """Vérifie que les flottants relus sont identiques à ceux écrits."""
    path = str(tmp_path / "out.csv")
    write_report(report, path, "csv")
    assert read_records_csv(path) == report.records


def test_json_report(tmp_path, report):
    """Vérifie l'écriture JSON versionnée, format déduit de l'extension."""
    path = str(tmp_path / "nested" / "out.json")
    assert write_report(report, path) == [path]
    loaded = read_report_json(path)
    assert loaded.schema_version == "1.0"
    assert loaded == report


def test_unknown_format(tmp_path, report):
    """Vérifie le rejet d'un format inconnu."""
    with pytest.raises(ArgumentError):
        write_report(report, str(tmp_path / "out.txt"), "parquet")


def test_bad_csv_header(tmp_path):
    """Vérifie le rejet d'un CSV dont l'en-tête ne correspond pas."""
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_records_csv(str(path))
