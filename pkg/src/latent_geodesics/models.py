"""
Modèles de données pour latent-geodesics.

Ce module définit les modèles Pydantic utilisés pour valider et
structurer les documents de décodeurs, la configuration du solveur et
des expériences, ainsi que les rapports produits par la ligne de commande.
"""

import os
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    ValidationInfo,
    field_validator,
    model_validator,
)

from .errors import ConfigError

REPORT_SCHEMA_VERSION = "1.0"


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# Modèles pour les documents de décodeurs
class LayerSpec(_StrictModel):
    """Couche dense d'un décodeur MLP."""
    weights: List[List[float]] = Field(..., description="Matrice de poids, weights[i][j] relie l'entrée j à la sortie i")
    bias: List[float] = Field(..., description="Vecteur de biais")
    activation: Literal["linear", "tanh", "elu"] = Field("linear", description="Fonction d'activation")


class AffineSpec(_StrictModel):
    """Difféomorphisme affine A(z) = M z + c."""
    kind: Literal["affine"] = "affine"
    matrix: List[List[float]] = Field(..., description="Matrice M inversible")
    offset: Optional[List[float]] = Field(None, description="Décalage c")


class CouplingSpec(_StrictModel):
    """Couplage additif; réseau explicite ou tiré avec une graine."""
    kind: Literal["coupling"] = "coupling"
    dim: int = Field(..., ge=2, description="Dimension latente")
    split: int = Field(1, ge=1, description="Nombre de coordonnées du premier bloc")
    hidden: int = Field(8, ge=1, description="Unités cachées du réseau de décalage")
    seed: int = Field(0, ge=0, description="Graine des poids du réseau de décalage")
    scale: float = Field(0.5, gt=0, description="Échelle des poids tirés")
    layers: Optional[List[LayerSpec]] = Field(None, description="Réseau de décalage explicite")


class CompositionSpec(_StrictModel):
    """Composition de difféomorphismes appliqués dans l'ordre."""
    kind: Literal["composition"] = "composition"
    parts: List["DiffeoSpec"] = Field(..., min_length=1, description="Difféomorphismes à composer")


DiffeoSpec = Annotated[Union[AffineSpec, CouplingSpec, CompositionSpec], Field(discriminator="kind")]


class _DecoderSpecBase(_StrictModel):
    latent_dim: int = Field(..., ge=1, description="Dimension de l'espace latent")
    ambient_dim: int = Field(..., ge=1, description="Dimension de l'espace des données")
    box: Optional[List[List[float]]] = Field(None, description="Boîte compacte [[min, max], ...] du domaine")


class LinearDecoderSpec(_DecoderSpecBase):
    """Décodeur linéaire f(z) = W z + b."""
    kind: Literal["linear"] = "linear"
    weights: List[List[float]] = Field(..., description="Matrice W (D × d)")
    bias: Optional[List[float]] = Field(None, description="Biais b")


class SphereDecoderSpec(_DecoderSpecBase):
    """Carte sphérique de rayon r."""
    kind: Literal["sphere"] = "sphere"
    latent_dim: int = 2
    ambient_dim: int = 3
    radius: float = Field(1.0, gt=0, description="Rayon de la sphère")


class ParaboloidDecoderSpec(_DecoderSpecBase):
    """Paraboloïde f(z) = (z, Σ c_i z_i²)."""
    kind: Literal["paraboloid"] = "paraboloid"
    coeffs: List[float] = Field(..., min_length=1, description="Coefficients c_i")


class MLPDecoderSpec(_DecoderSpecBase):
    """Décodeur perceptron multicouche."""
    kind: Literal["mlp"] = "mlp"
    layers: List[LayerSpec] = Field(..., min_length=1, description="Couches denses")


class ReparametrizedDecoderSpec(_DecoderSpecBase):
    """Décodeur f ∘ A⁻¹."""
    kind: Literal["reparametrized"] = "reparametrized"
    base: "DecoderSpec" = Field(..., description="Décodeur de base")
    diffeo: DiffeoSpec = Field(..., description="Difféomorphisme A")


DecoderSpec = Annotated[
    Union[LinearDecoderSpec, SphereDecoderSpec, ParaboloidDecoderSpec, MLPDecoderSpec,
          ReparametrizedDecoderSpec],
    Field(discriminator="kind"),
]

CompositionSpec.model_rebuild()
ReparametrizedDecoderSpec.model_rebuild()


# Configuration du solveur
class SolverConfig(_StrictModel):
    """Hyperparamètres du calcul de géodésiques (valeurs par défaut de référence)."""
    n_segments: int = Field(10, ge=1, description="Nombre de polynômes dans la spline")
    n_t: int = Field(256, ge=2, description="Discrétisation en temps (énergie)")
    max_steps: int = Field(4096, ge=1, description="Nombre maximal de pas d'Adam")
    learning_rate: float = Field(0.01, gt=0, description="Taux d'apprentissage")
    adam_beta1: float = Field(0.9, ge=0, lt=1, description="Décroissance du premier moment")
    adam_beta2: float = Field(0.999, ge=0, lt=1, description="Décroissance du second moment")
    adam_eps: float = Field(1e-8, gt=0, description="Stabilisation numérique d'Adam")
    patience_steps: int = Field(100, ge=1, description="Patience de l'arrêt anticipé (pas)")
    early_stop_delta: float = Field(1.0, ge=0, description="Amélioration absolue minimale sur la fenêtre de patience")
    length_n_t: int = Field(256, ge=2, description="Discrétisation en temps (longueur finale)")
    seed: int = Field(0, ge=0, description="Graine des tirages aléatoires du solveur")
    sv_tol: float = Field(1e-10, gt=0, description="Seuil relatif des valeurs singulières du noyau")
    restarts: int = Field(0, ge=0, description="Initialisations aléatoires supplémentaires")
    restart_scale: float = Field(0.1, gt=0, description="Écart-type des initialisations supplémentaires")
    ensemble_redraw: Literal["segment", "curve"] = Field(
        "segment", description="Retirage des décodeurs d'ensemble à chaque pas: par segment ou pour toute la courbe"
    )
    verify: bool = Field(False, description="Mode vérification (rang de J, sortie de boîte)")
    rank_tol: float = Field(1e-8, gt=0, description="Seuil de la plus petite valeur singulière de J")


# Configuration des expériences
class DiffeoFamilyConfig(_StrictModel):
    """Famille de difféomorphismes aléatoires simulant des réentraînements."""
    family: Literal["identity", "affine", "coupling", "mixed"] = Field("mixed", description="Famille tirée")
    affine_scale: float = Field(0.5, ge=0, description="Amplitude de la perturbation M = I + s·G")
    affine_offset_scale: float = Field(0.5, ge=0, description="Amplitude du décalage affine")
    coupling_hidden: int = Field(8, ge=1, description="Unités cachées des couplages")
    coupling_scale: float = Field(0.5, gt=0, description="Échelle des poids des couplages")
    coupling_split: int = Field(1, ge=1, description="Coupure des couplages")
    max_condition: float = Field(1e6, gt=1, description="Conditionnement maximal accepté pour un tirage affine")


ExperimentKind = Literal["oracle", "invariance", "cv", "geodesic", "karcher"]


class ExperimentConfig(_StrictModel):
    """Configuration complète d'une expérience."""
    kind: ExperimentKind = Field("oracle", description="Type d'expérience")
    decoder: Union[DecoderSpec, str] = Field(..., description="Document de décodeur ou chemin vers un fichier JSON")
    solver: SolverConfig = Field(default_factory=SolverConfig, description="Configuration du solveur")
    n_pairs: int = Field(100, ge=1, description="Nombre de paires de points")
    n_models: int = Field(30, ge=1, description="Nombre de modèles (réentraînements simulés)")
    diffeo: DiffeoFamilyConfig = Field(default_factory=DiffeoFamilyConfig, description="Famille de difféomorphismes")
    ensemble_source: Literal["reparametrization", "perturbation"] = Field(
        "reparametrization", description="Origine des modèles de l'expérience cv"
    )
    perturbation_scale: float = Field(0.05, ge=0, description="Amplitude relative des perturbations de poids")
    seed: int = Field(0, ge=0, description="Graine de l'expérience")
    output: Optional[str] = Field(None, description="Chemin du rapport")
    format: Literal["csv", "json"] = Field("csv", description="Format du rapport")
    threads: int = Field(1, ge=1, description="Nombre de workers")
    z1: Optional[List[float]] = Field(None, description="Premier point (mode geodesic)")
    z2: Optional[List[float]] = Field(None, description="Second point (mode geodesic)")
    points: Optional[List[List[float]]] = Field(None, description="Nuage de points (mode karcher)")
    n_points: int = Field(10, ge=1, description="Taille du nuage tiré si points est absent")
    inject_degenerate: bool = Field(False, description="Ajoute une paire dégénérée z1 = z2 (mode oracle)")
    min_pair_separation: float = Field(0.05, ge=0, description="Séparation minimale relative à la diagonale de la boîte")
    unconverged_threshold: float = Field(0.1, ge=0, le=1, description="Fraction maximale de résolutions non convergées")
    oracle_tolerance: Optional[float] = Field(None, gt=0, description="Erreur relative maximale (oracle)")
    spread_tolerance: float = Field(0.02, gt=0, description="Dispersion relative maximale des distances géodésiques")
    euclidean_spread_threshold: float = Field(0.10, ge=0, description="Dispersion euclidienne considérée significative")
    euclidean_fraction: float = Field(0.8, ge=0, le=1, description="Fraction de paires devant dépasser ce seuil")
    cv_ratio_threshold: float = Field(0.1, gt=0, description="Rapport maximal CV géodésique moyen / CV euclidien moyen (mode cv, reparamétrisations)")
    t_magnitude_threshold: float = Field(5.0, ge=0, description="Valeur absolue minimale de la statistique t (mode cv)")

    @field_validator("decoder")
    @classmethod
    def _decoder_file_exists(cls, value, info: ValidationInfo):
        if isinstance(value, str):
            base_dir = (info.context or {}).get("base_dir") or "."
            path = value if os.path.isabs(value) else os.path.join(base_dir, value)
            if not os.path.isfile(path):
                raise ValueError(f"fichier de décodeur introuvable: {path}")
            return os.path.abspath(path)
        return value

    @model_validator(mode="after")
    def _check_points(self):
        if (self.z1 is None) != (self.z2 is None):
            raise ValueError("z1 et z2 doivent être fournis ensemble")
        return self


# Modèles pour les rapports
class DistanceSample(_StrictModel):
    """Distances d'une paire pour un modèle donné."""
    pair_id: int = Field(..., ge=0, description="Identifiant de la paire")
    model_id: int = Field(..., ge=0, description="Identifiant du modèle")
    d_euclidean: float = Field(..., ge=0, description="Distance euclidienne latente")
    d_geodesic: float = Field(..., ge=0, description="Distance géodésique")
    converged: bool = Field(..., description="Arrêt anticipé atteint avant max_steps")
    steps: int = Field(0, ge=0, description="Pas d'optimisation effectués")
    energy: float = Field(0.0, ge=0, description="Énergie discrète finale")


CSV_COLUMNS = list(DistanceSample.model_fields)


class ReportSummary(BaseModel):
    """Résumé statistique et verdict d'une expérience."""
    cv_geodesic: List[float] = Field(default_factory=list, description="CV par paire des distances géodésiques")
    cv_euclidean: List[float] = Field(default_factory=list, description="CV par paire des distances euclidiennes")
    t_statistic: Optional[float] = Field(None, description="Statistique t de Student (variances groupées)")
    p_value: Optional[float] = Field(None, description="p pour H1: CV géodésique moyen < CV euclidien moyen")
    p_value_greater: Optional[float] = Field(None, description="p pour H1: CV géodésique moyen > CV euclidien moyen")
    std_convention: str = Field("bessel", description="Écart-type avec correction de Bessel (n - 1)")
    unconverged_fraction: float = Field(0.0, description="Fraction de résolutions non convergées")
    checks: Dict[str, bool] = Field(default_factory=dict, description="Vérifications de l'expérience")
    passed: bool = Field(True, description="Toutes les vérifications sont satisfaites")
    details: Dict[str, Any] = Field(default_factory=dict, description="Données propres à l'expérience")


class Provenance(BaseModel):
    """Informations de reproductibilité."""
    library: str = Field("latent-geodesics", description="Nom de la bibliothèque")
    version: str = Field(..., description="Version de la bibliothèque")
    seed: int = Field(..., description="Graine de l'expérience")
    solver_seed: int = Field(..., description="Graine du solveur")
    numpy_version: str = Field(..., description="Version de numpy")
    scipy_version: str = Field(..., description="Version de scipy")
    python_version: str = Field(..., description="Version de Python")
    surrogate: Optional[str] = Field(None, description="Substitut des modèles réentraînés")
    pair_sampling: Optional[str] = Field(None, description="Règle d'échantillonnage des paires")
    injectivity_certified: bool = Field(True, description="Injectivité du décodeur garantie par construction")


class ExperimentReport(BaseModel):
    """Rapport complet d'une expérience."""
    schema_version: str = Field(REPORT_SCHEMA_VERSION, description="Version du schéma JSON")
    config: Dict[str, Any] = Field(..., description="Configuration résolue")
    records: List[DistanceSample] = Field(default_factory=list, description="Mesures par paire et modèle")
    summary: ReportSummary = Field(default_factory=ReportSummary, description="Résumé")
    provenance: Provenance = Field(..., description="Provenance")


def format_validation_error(exc: ValidationError, prefix: str = "") -> ConfigError:
    """
    Convertit une ValidationError Pydantic en ConfigError.

    Le chemin de la première erreur est rendu sous forme pointée
    (par exemple `mlp.layers.0.activation`); les clés inconnues sont listées.
    """
    errors = exc.errors()
    unknown = [".".join(str(p) for p in err["loc"]) for err in errors if err["type"] == "extra_forbidden"]
    first = errors[0] if errors else {"loc": (), "msg": str(exc)}
    path = ".".join(str(p) for p in (prefix,) + tuple(first["loc"]) if str(p))
    if unknown:
        message = f"Clés inconnues: {', '.join(unknown)}"
    else:
        message = f"Champ invalide '{path}': {first['msg']}"
    return ConfigError(message, path=path or None, unknown_keys=unknown)
