"""
Expériences pilotées par configuration.

Chaque expérience (oracle, invariance, cv, geodesic, karcher) lit un
ExperimentConfig validé, répartit les résolutions géodésiques
indépendantes sur un pool de workers et assemble un ExperimentReport après
un tri déterministe par (pair_id, model_id).
"""

import copy
import json
import logging
import os
import platform
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy
from pydantic import ValidationError

from .errors import ArgumentError, ConfigError, UnsupportedError
from .manifold.decoders import (
    Decoder,
    LinearDecoder,
    MLPDecoder,
    SphereChartDecoder,
    reparametrize,
)
from .manifold.diffeomorphisms import (
    AffineDiffeomorphism,
    CouplingDiffeomorphism,
    Diffeomorphism,
)
from .manifold.loader import DECODER_SPEC_ADAPTER, build_decoder, load_decoder_file
from .models import (
    DiffeoFamilyConfig,
    DistanceSample,
    ExperimentConfig,
    ExperimentReport,
    Provenance,
    ReportSummary,
    format_validation_error,
)
from .solver import solve_geodesic, time_grid
from .spline import curve_eval
from .stats import coefficient_of_variation, karcher_mean, one_sided_t_test
from .version import __version__
from .workers import parallel_map

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

DEFAULT_ORACLE_TOLERANCE = {"linear": 1e-3, "sphere": 1e-2}
PAIR_SAMPLING_RULE = (
    "uniforme dans la boîte déclarée du décodeur; rejet des paires séparées "
    "de moins de min_pair_separation × diagonale"
)
SURROGATE_LABELS = {
    "reparametrization": "reparametrization f∘A⁻¹ (exact isometry)",
    "perturbation": "weight-perturbation of an MLP decoder composed with f∘A⁻¹ (approximate)",
}
_MAX_AFFINE_ATTEMPTS = 100
_MAX_LENIENT_PASSES = 20


# Lecture de la configuration
def _drop_key(raw: Any, loc: Sequence[Any]) -> None:
    node = raw
    for part in loc[:-1]:
        if isinstance(node, dict) and part not in node and node.get("kind") == part:
            continue
        node = node[part]
    if isinstance(node, dict):
        node.pop(loc[-1], None)


def _validate_lenient(validate: Callable[[Any], Any], raw: Any, strict: bool, prefix: str = ""):
    """Valide raw; hors mode strict, les clés inconnues sont retirées avec un avertissement."""
    for _ in range(_MAX_LENIENT_PASSES):
        try:
            return validate(raw)
        except ValidationError as e:
            unknown = [err["loc"] for err in e.errors() if err["type"] == "extra_forbidden"]
            if strict or not unknown:
                raise format_validation_error(e, prefix) from e
            for loc in unknown:
                dotted = ".".join(str(p) for p in ((prefix,) if prefix else ()) + tuple(loc))
                logger.warning(f"Clé inconnue ignorée: {dotted}")
                _drop_key(raw, loc)
    raise ConfigError("Trop de clés inconnues dans la configuration")


def parse_config(text: str, strict: bool = True, base_dir: Optional[str] = None,
                 overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Analyse un document de configuration JSON.

    Args:
        text: Texte JSON (UTF-8)
        strict: Si True, toute clé inconnue est une erreur; sinon elle est ignorée
        base_dir: Répertoire de référence des chemins relatifs (décodeur)
        overrides: Valeurs de premier niveau prioritaires (options de la ligne de commande)

    Returns:
        ExperimentConfig validé

    Raises:
        ConfigError: Document invalide; `path` nomme le champ fautif et
            `unknown_keys` liste les clés inconnues.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration JSON invalide: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("La configuration doit être un objet JSON")
    raw = copy.deepcopy(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    decoder = raw.get("decoder")
    if isinstance(decoder, dict):
        raw["decoder"] = _validate_lenient(DECODER_SPEC_ADAPTER.validate_python, decoder, strict, "decoder")

    context = {"base_dir": base_dir or "."}
    return _validate_lenient(
        lambda document: ExperimentConfig.model_validate(document, context=context), raw, strict
    )


def load_config(path: str, strict: bool = True,
                overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Charge une configuration depuis un fichier; les chemins relatifs partent de son répertoire."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    return parse_config(text, strict=strict, base_dir=os.path.dirname(os.path.abspath(path)),
                        overrides=overrides)


def config_echo(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Configuration résolue, sérialisable en JSON."""
    return cfg.model_dump(mode="json")


def resolve_decoder(cfg: ExperimentConfig) -> Decoder:
    """Construit le décodeur de base de l'expérience."""
    if isinstance(cfg.decoder, str):
        return load_decoder_file(cfg.decoder)
    return build_decoder(cfg.decoder, "decoder")


# Échantillonnage
def sample_pairs(box: Optional[np.ndarray], n_pairs: int, rng: np.random.Generator,
                 min_separation: float = 0.05) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Tire des paires uniformes dans la boîte, en rejetant les paires trop proches.

    Raises:
        UnsupportedError: Décodeur sans boîte déclarée.
        ArgumentError: Si trop de tirages sont rejetés.
    """
    if box is None:
        raise UnsupportedError("Le décodeur ne déclare pas de boîte de domaine")
    low, high = box[:, 0], box[:, 1]
    threshold = min_separation * float(np.linalg.norm(high - low))
    pairs: List[Tuple[np.ndarray, np.ndarray]] = []
    attempts = 0
    while len(pairs) < n_pairs:
        attempts += 1
        if attempts > 1000 * n_pairs:
            raise ArgumentError("Échantillonnage des paires impossible: trop de rejets")
        z1, z2 = rng.uniform(low, high), rng.uniform(low, high)
        if np.linalg.norm(z1 - z2) >= threshold:
            pairs.append((z1, z2))
    return pairs


def draw_diffeomorphism(dim: int, family: DiffeoFamilyConfig, seed: int, model_index: int) -> Diffeomorphism:
    """
    Tire le difféomorphisme du modèle model_index.

    La famille "mixed" alterne affine (indices pairs) et couplage (indices
    impairs). Un tirage affine mal conditionné est retiré.
    """
    rng = np.random.default_rng([seed, model_index])
    kind = family.family
    if kind == "mixed":
        kind = "affine" if model_index % 2 == 0 else "coupling"
    if kind == "identity":
        return AffineDiffeomorphism.identity(dim)
    if kind == "coupling":
        if dim < 2:
            raise UnsupportedError("Un couplage demande une dimension latente >= 2")
        return CouplingDiffeomorphism.random(dim, split=min(family.coupling_split, dim - 1),
                                             hidden=family.coupling_hidden,
                                             seed=int(rng.integers(2 ** 31)),
                                             scale=family.coupling_scale)
    for attempt in range(_MAX_AFFINE_ATTEMPTS):
        matrix = np.eye(dim) + family.affine_scale * rng.standard_normal((dim, dim))
        offset = family.affine_offset_scale * rng.standard_normal(dim)
        try:
            return AffineDiffeomorphism(matrix, offset, max_condition=family.max_condition)
        except ArgumentError as e:
            logger.warning(f"Tirage affine rejeté pour le modèle {model_index} (essai {attempt + 1}): {e}")
    raise ArgumentError(f"Aucun difféomorphisme affine valide après {_MAX_AFFINE_ATTEMPTS} essais")


# Résolutions
@dataclass(frozen=True)
class _Job:
    pair_id: int
    model_id: int
    decoder: Decoder
    z1: np.ndarray
    z2: np.ndarray


def _solve_jobs(jobs: List[_Job], cfg: ExperimentConfig) -> List[DistanceSample]:
    def solve(job: _Job) -> DistanceSample:
        solution = solve_geodesic(job.decoder, job.z1, job.z2, cfg.solver, pair_index=job.pair_id)
        return DistanceSample(
            pair_id=job.pair_id,
            model_id=job.model_id,
            d_euclidean=float(np.linalg.norm(job.z2 - job.z1)),
            d_geodesic=solution.length,
            converged=solution.converged,
            steps=solution.steps_taken,
            energy=max(solution.energy, 0.0),
        )

    records = parallel_map(solve, jobs, cfg.threads)
    return sorted(records, key=lambda r: (r.pair_id, r.model_id))


def _unconverged_fraction(records: List[DistanceSample]) -> float:
    if not records:
        return 0.0
    return sum(not r.converged for r in records) / len(records)


def _by_pair(records: List[DistanceSample], attribute: str) -> Dict[int, np.ndarray]:
    grouped: Dict[int, List[float]] = {}
    for record in records:
        grouped.setdefault(record.pair_id, []).append(getattr(record, attribute))
    return {pair_id: np.array(values) for pair_id, values in grouped.items()}


def _relative_spread(values: np.ndarray) -> float:
    mean = float(np.mean(values))
    if mean == 0.0:
        return 0.0
    return float((np.max(values) - np.min(values)) / mean)


def _provenance(cfg: ExperimentConfig, decoder: Decoder, surrogate: Optional[str] = None,
                pair_sampling: Optional[str] = PAIR_SAMPLING_RULE) -> Provenance:
    return Provenance(
        version=__version__,
        seed=cfg.seed,
        solver_seed=cfg.solver.seed,
        numpy_version=np.__version__,
        scipy_version=scipy.__version__,
        python_version=platform.python_version(),
        surrogate=surrogate,
        pair_sampling=pair_sampling,
        injectivity_certified=decoder.injectivity_certified,
    )


def _finish(cfg: ExperimentConfig, decoder: Decoder, records: List[DistanceSample],
            summary: ReportSummary, **provenance) -> ExperimentReport:
    summary.unconverged_fraction = _unconverged_fraction(records)
    summary.checks["unconverged_fraction"] = summary.unconverged_fraction <= cfg.unconverged_threshold
    summary.passed = all(summary.checks.values())
    if not decoder.injectivity_certified:
        summary.details.setdefault("warnings", []).append("injectivity-unverified: injectivité du décodeur non certifiée")
    report = ExperimentReport(
        config=config_echo(cfg),
        records=records,
        summary=summary,
        provenance=_provenance(cfg, decoder, **provenance),
    )
    logger.info(
        f"Expérience {cfg.kind} terminée: {len(records)} mesures, "
        f"{'succès' if summary.passed else 'échec'} ({summary.checks})"
    )
    return report


# Expériences
def run_oracle_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """
    Compare les longueurs calculées aux formes closes (linéaire: ‖W Δz‖, sphère: grand cercle).

    Raises:
        UnsupportedError: Si le décodeur n'est ni linéaire ni sphérique.
    """
    decoder = resolve_decoder(cfg)
    if isinstance(decoder, LinearDecoder):
        kind = "linear"

        def oracle(z1, z2):
            return float(np.linalg.norm(decoder.weights @ (z2 - z1)))
    elif isinstance(decoder, SphereChartDecoder):
        kind = "sphere"

        def oracle(z1, z2):
            return decoder.great_circle_distance(z1, z2)
    else:
        raise UnsupportedError(f"Mode oracle non disponible pour un décodeur {decoder.kind}")

    logger.info(f"Expérience oracle: décodeur {kind}, {cfg.n_pairs} paires")
    rng = np.random.default_rng(cfg.seed)
    pairs = sample_pairs(decoder.box, cfg.n_pairs, rng, cfg.min_pair_separation)
    if cfg.inject_degenerate:
        pairs.append((pairs[0][0].copy(), pairs[0][0].copy()))

    jobs = [_Job(i, 0, decoder, z1, z2) for i, (z1, z2) in enumerate(pairs)]
    records = _solve_jobs(jobs, cfg)

    oracle_lengths, relative_errors, degenerate = [], [], []
    for record, (z1, z2) in zip(records, pairs):
        expected = oracle(z1, z2)
        oracle_lengths.append(expected)
        if expected == 0.0:
            degenerate.append(record.pair_id)
            relative_errors.append(None)
        else:
            relative_errors.append(abs(record.d_geodesic - expected) / expected)

    tolerance = cfg.oracle_tolerance or DEFAULT_ORACLE_TOLERANCE[kind]
    max_error = max((e for e in relative_errors if e is not None), default=0.0)
    degenerate_ok = all(records[i].d_geodesic == 0.0 for i in degenerate)
    summary = ReportSummary(
        checks={"oracle_accuracy": max_error <= tolerance, "degenerate_pairs": degenerate_ok},
        details={
            "oracle": kind,
            "tolerance": tolerance,
            "oracle_lengths": oracle_lengths,
            "relative_errors": relative_errors,
            "max_relative_error": max_error,
            "degenerate_pairs": degenerate,
        },
    )
    return _finish(cfg, decoder, records, summary)


def _reparametrized_models(cfg: ExperimentConfig, base: Decoder, count: int,
                           offset: int) -> List[Tuple[Decoder, Diffeomorphism]]:
    models = []
    for index in range(count):
        diffeo = draw_diffeomorphism(base.latent_dim, cfg.diffeo, cfg.seed, offset + index)
        models.append((reparametrize(base, diffeo), diffeo))
    return models


def run_invariance_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """
    Vérifie l'invariance des distances géodésiques par reparamétrisation.

    Le modèle 0 est le décodeur de base; les modèles 1..n_models sont
    f ∘ A_m⁻¹ avec les paires transportées par A_m.
    """
    decoder = resolve_decoder(cfg)
    logger.info(f"Expérience invariance: famille {cfg.diffeo.family}, {cfg.n_models} difféomorphismes, "
                f"{cfg.n_pairs} paires")
    rng = np.random.default_rng(cfg.seed)
    pairs = sample_pairs(decoder.box, cfg.n_pairs, rng, cfg.min_pair_separation)
    models = _reparametrized_models(cfg, decoder, cfg.n_models, offset=0)

    jobs = [_Job(i, 0, decoder, z1, z2) for i, (z1, z2) in enumerate(pairs)]
    for m, (model, diffeo) in enumerate(models, start=1):
        jobs.extend(_Job(i, m, model, diffeo.forward(z1), diffeo.forward(z2)) for i, (z1, z2) in enumerate(pairs))
    records = _solve_jobs(jobs, cfg)

    geodesic = _by_pair(records, "d_geodesic")
    euclidean = _by_pair(records, "d_euclidean")
    geodesic_spread = [_relative_spread(geodesic[i]) for i in sorted(geodesic)]
    euclidean_spread = [_relative_spread(euclidean[i]) for i in sorted(euclidean)]
    euclidean_changed = float(np.mean([s > cfg.euclidean_spread_threshold for s in euclidean_spread]))

    checks = {"geodesic_spread": max(geodesic_spread) <= cfg.spread_tolerance}
    if cfg.diffeo.family != "identity":
        checks["euclidean_spread"] = euclidean_changed >= cfg.euclidean_fraction
    summary = ReportSummary(
        checks=checks,
        details={
            "geodesic_relative_spread": geodesic_spread,
            "euclidean_relative_spread": euclidean_spread,
            "max_geodesic_relative_spread": max(geodesic_spread),
            "euclidean_changed_fraction": euclidean_changed,
            "diffeo_kinds": [diffeo.kind for _, diffeo in models],
        },
    )
    return _finish(cfg, decoder, records, summary, surrogate=SURROGATE_LABELS["reparametrization"])


def run_cv_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """
    Protocole du coefficient de variation sur n_models modèles et n_pairs paires.

    Raises:
        ArgumentError: Si n_models < 2 (CV non défini).
        UnsupportedError: Source "perturbation" avec un décodeur non MLP.
    """
    if cfg.n_models < 2:
        raise ArgumentError(f"L'expérience cv demande au moins deux modèles (reçu {cfg.n_models})")
    decoder = resolve_decoder(cfg)
    logger.info(f"Expérience cv: source {cfg.ensemble_source}, {cfg.n_models} modèles × {cfg.n_pairs} paires")
    rng = np.random.default_rng(cfg.seed)
    pairs = sample_pairs(decoder.box, cfg.n_pairs, rng, cfg.min_pair_separation)

    if cfg.ensemble_source == "perturbation":
        if not isinstance(decoder, MLPDecoder):
            raise UnsupportedError("La source 'perturbation' demande un décodeur mlp")
        models = []
        for m in range(cfg.n_models):
            perturbed = decoder.perturbed(cfg.perturbation_scale, np.random.default_rng([cfg.seed, m, 1]))
            diffeo = draw_diffeomorphism(decoder.latent_dim, cfg.diffeo, cfg.seed, m)
            models.append((reparametrize(perturbed, diffeo), diffeo))
    else:
        models = _reparametrized_models(cfg, decoder, cfg.n_models, offset=0)

    jobs = []
    for m, (model, diffeo) in enumerate(models):
        jobs.extend(_Job(i, m, model, diffeo.forward(z1), diffeo.forward(z2)) for i, (z1, z2) in enumerate(pairs))
    records = _solve_jobs(jobs, cfg)

    geodesic = _by_pair(records, "d_geodesic")
    euclidean = _by_pair(records, "d_euclidean")
    cv_geodesic = [coefficient_of_variation(geodesic[i]) for i in sorted(geodesic)]
    cv_euclidean = [coefficient_of_variation(euclidean[i]) for i in sorted(euclidean)]

    summary = ReportSummary(cv_geodesic=cv_geodesic, cv_euclidean=cv_euclidean)
    if len(cv_geodesic) >= 2:
        t_statistic, p_value = one_sided_t_test(cv_geodesic, cv_euclidean, alternative="less")
        summary.t_statistic = t_statistic
        summary.p_value = p_value
        summary.p_value_greater = one_sided_t_test(cv_geodesic, cv_euclidean, alternative="greater")[1]
        summary.checks["geodesic_more_stable"] = t_statistic < 0
        summary.checks["t_magnitude"] = abs(t_statistic) >= cfg.t_magnitude_threshold
    mean_cv_g, mean_cv_e = float(np.mean(cv_geodesic)), float(np.mean(cv_euclidean))
    # Image commune à tous les modèles seulement pour les reparamétrisations
    if cfg.ensemble_source == "reparametrization":
        summary.checks["cv_ratio"] = mean_cv_e > 0 and mean_cv_g < cfg.cv_ratio_threshold * mean_cv_e
    summary.details = {
        "mean_cv_geodesic": mean_cv_g,
        "mean_cv_euclidean": mean_cv_e,
        "cv_ratio": mean_cv_g / mean_cv_e if mean_cv_e > 0 else None,
        "ensemble_source": cfg.ensemble_source,
    }
    return _finish(cfg, decoder, records, summary, surrogate=SURROGATE_LABELS[cfg.ensemble_source])


def run_geodesic(cfg: ExperimentConfig) -> ExperimentReport:
    """
    Résout une seule géodésique entre cfg.z1 et cfg.z2.

    Le détail du rapport contient la courbe échantillonnée sur length_n_t
    points (coordonnées latentes et décodées) et la trace des énergies.
    """
    if cfg.z1 is None or cfg.z2 is None:
        raise ArgumentError("Le mode geodesic demande z1 et z2")
    decoder = resolve_decoder(cfg)
    z1, z2 = np.asarray(cfg.z1, dtype=float), np.asarray(cfg.z2, dtype=float)
    solution = solve_geodesic(decoder, z1, z2, cfg.solver)

    t = time_grid(cfg.solver.length_n_t)
    latent = curve_eval(solution.curve, t)
    record = DistanceSample(
        pair_id=0, model_id=0,
        d_euclidean=float(np.linalg.norm(z2 - z1)),
        d_geodesic=solution.length,
        converged=solution.converged,
        steps=solution.steps_taken,
        energy=max(solution.energy, 0.0),
    )
    summary = ReportSummary(details={
        "t": t.tolist(),
        "latent": latent.tolist(),
        "decoded": decoder.decode(latent).tolist(),
        "energy": solution.energy,
        "initial_energy": solution.initial_energy,
        "length": solution.length,
        "steps": solution.steps_taken,
        "converged": solution.converged,
        "min_singular_value_seen": solution.min_singular_value_seen,
        "energy_trace": solution.energy_trace.tolist(),
        "best_energy_trace": solution.best_energy_trace.tolist(),
    })
    return _finish(cfg, decoder, [record], summary, pair_sampling=None)


def run_karcher(cfg: ExperimentConfig) -> ExperimentReport:
    """Moyenne de Karcher d'un nuage de points (fourni ou tiré dans la boîte)."""
    decoder = resolve_decoder(cfg)
    if cfg.points is not None:
        points = np.asarray(cfg.points, dtype=float)
        sampling = None
    else:
        if decoder.box is None:
            raise UnsupportedError("Le décodeur ne déclare pas de boîte de domaine")
        rng = np.random.default_rng(cfg.seed)
        points = rng.uniform(decoder.box[:, 0], decoder.box[:, 1], size=(cfg.n_points, decoder.latent_dim))
        sampling = "uniforme dans la boîte déclarée du décodeur"
    logger.info(f"Expérience karcher: {len(points)} points")

    result = karcher_mean(decoder, points, cfg.solver, threads=cfg.threads)
    jobs = [_Job(i, 0, decoder, result.mean, point) for i, point in enumerate(points)]
    records = _solve_jobs(jobs, cfg)
    summary = ReportSummary(
        checks={"karcher_converged": result.converged},
        details={
            "mean": result.mean.tolist(),
            "frechet_variance": result.value,
            "evaluations": result.evaluations,
            "arithmetic_mean": points.mean(axis=0).tolist(),
            "points": points.tolist(),
        },
    )
    return _finish(cfg, decoder, records, summary, pair_sampling=sampling)


EXPERIMENTS: Dict[str, Callable[[ExperimentConfig], ExperimentReport]] = {
    "oracle": run_oracle_experiment,
    "invariance": run_invariance_experiment,
    "cv": run_cv_experiment,
    "geodesic": run_geodesic,
    "karcher": run_karcher,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Exécute l'expérience désignée par cfg.kind."""
    return EXPERIMENTS[cfg.kind](cfg)
