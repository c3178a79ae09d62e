"""
Calcul de géodésiques par minimisation de l'énergie discrète.

La courbe γ_ω(t) = l(t) + S_ω(t) est échantillonnée sur une grille uniforme
t_i = i/(n_t - 1). L'énergie discrète vaut

    E(γ) = 1/(2Δt) Σ_i ‖f(γ(t_i)) - f(γ(t_{i-1}))‖²

et son gradient par rapport à ω est obtenu exactement par dérivation en
chaîne (la courbe est linéaire en ω). L'optimisation utilise Adam à partir
de la ligne droite ω = 0.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ArgumentError, NumericError, RankDeficiencyError
from .manifold.decoders import Decoder
from .models import SolverConfig
from .spline import GeodesicCurve, NullSpaceBasis, design_matrix, straight_line, uniform_spline_basis

# Configurer le logger
logger = logging.getLogger("latent_geodesics")


class Adam:
    """Optimiseur Adam sur un unique tableau de paramètres."""

    def __init__(self, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999,
                 epsilon: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: Optional[np.ndarray] = None
        self.v: Optional[np.ndarray] = None
        self.t = 0

    @classmethod
    def from_config(cls, cfg: SolverConfig) -> "Adam":
        return cls(cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Retourne les paramètres mis à jour (params n'est pas modifié)."""
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t

        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grad * grad)

        denom = np.sqrt(self.v / bc2) + self.epsilon
        return params - (self.lr / bc1) * self.m / denom


@dataclass(frozen=True)
class GeodesicSolution:
    """Courbe optimisée et diagnostics de convergence."""

    curve: GeodesicCurve
    energy: float
    length: float
    steps_taken: int
    converged: bool
    min_singular_value_seen: float
    initial_energy: float = 0.0
    energy_trace: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    member_lengths: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def best_energy_trace(self) -> np.ndarray:
        """Meilleure énergie rencontrée jusqu'à chaque pas (non croissante)."""
        if self.energy_trace.size == 0:
            return self.energy_trace
        return np.minimum.accumulate(self.energy_trace)

    @property
    def length_spread(self) -> Optional[float]:
        """Dispersion relative (max - min)/moyenne des longueurs par membre d'ensemble."""
        if self.member_lengths is None or self.member_lengths.size == 0:
            return None
        mean = float(np.mean(self.member_lengths))
        if mean == 0.0:
            return 0.0
        return float((np.max(self.member_lengths) - np.min(self.member_lengths)) / mean)


def time_grid(n_t: int) -> np.ndarray:
    """Grille uniforme t_i = i/(n_t - 1) sur [0, 1]."""
    if n_t < 2:
        raise ArgumentError(f"n_t doit être >= 2 (reçu {n_t})")
    return np.linspace(0.0, 1.0, n_t)


class _Discretization:
    """Grille en temps et matrice de conception Φ(t_i)·N précalculées pour une paire."""

    def __init__(self, a: np.ndarray, b: np.ndarray, basis: NullSpaceBasis, n_t: int):
        self.t = time_grid(n_t)
        self.dt = 1.0 / (n_t - 1)
        self.design = design_matrix(basis, self.t)
        self.line = straight_line(a, b, self.t)

    def points(self, omega: np.ndarray) -> np.ndarray:
        return self.line + self.design @ omega.T

    def check_finite(self, values: np.ndarray, what: str, step: Optional[int] = None):
        bad = ~np.all(np.isfinite(values.reshape(values.shape[0], -1)), axis=1)
        if np.any(bad):
            t_bad = float(self.t[np.argmax(bad)])
            suffix = f" au pas {step}" if step is not None else ""
            raise NumericError(f"{what} non finie en t = {t_bad:.6f}{suffix}", step=step, t=t_bad)


def _evaluate_members(members: Sequence[Decoder], points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Valeurs (K, n_t, D) et jacobiennes (K, n_t, D, d) de chaque membre."""
    results = [member.evaluate(points) for member in members]
    return np.stack([r[0] for r in results]), np.stack([r[1] for r in results])


def _paired_energy(values: np.ndarray, jac: Optional[np.ndarray], start: np.ndarray, end: np.ndarray,
                   design: np.ndarray, dt: float) -> Tuple[float, Optional[np.ndarray]]:
    """
    Énergie discrète et gradient quand le segment i utilise le membre start[i] en t_i
    et le membre end[i] en t_{i+1}.
    """
    segments = np.arange(values.shape[1] - 1)
    delta = values[end, segments + 1] - values[start, segments]
    energy = 0.5 * float(np.sum(delta * delta)) / dt
    if jac is None:
        return energy, None
    residual = delta / dt
    grad_points = np.zeros((values.shape[1], jac.shape[-1]))
    grad_points[1:] += np.einsum("nD,nDd->nd", residual, jac[end, segments + 1])
    grad_points[:-1] -= np.einsum("nD,nDd->nd", residual, jac[start, segments])
    return energy, grad_points.T @ design


def _single_pairing(n_t: int) -> Tuple[np.ndarray, np.ndarray]:
    zeros = np.zeros(n_t - 1, dtype=int)
    return zeros, zeros


def _draw_pairing(rng: np.random.Generator, n_members: int, n_t: int,
                  redraw: str = "segment") -> Tuple[np.ndarray, np.ndarray]:
    """Tire les membres d'ensemble utilisés aux deux extrémités de chaque segment."""
    if redraw == "curve":
        index = np.full(n_t - 1, rng.integers(n_members), dtype=int)
        return index, index
    drawn = rng.integers(n_members, size=(2, n_t - 1))
    return drawn[0], drawn[1]


def _check_curve(f_dim: int, curve: GeodesicCurve):
    if curve.dim != f_dim:
        raise ArgumentError(f"Courbe de dimension {curve.dim}, le décodeur attend {f_dim}")


def discrete_energy(f: Decoder, curve: GeodesicCurve, n_t: int) -> float:
    """
    Énergie discrète de la courbe décodée sur n_t points uniformes.

    Raises:
        NumericError: Si le décodeur produit une valeur non finie (t fautif dans `t`).
    """
    _check_curve(f.latent_dim, curve)
    grid = _Discretization(curve.a, curve.b, curve.basis, n_t)
    values = f.decode(grid.points(curve.omega))
    grid.check_finite(values, "Sortie du décodeur")
    return _paired_energy(values[None], None, *_single_pairing(n_t), grid.design, grid.dt)[0]


def energy_gradient(f: Decoder, curve: GeodesicCurve, n_t: int) -> np.ndarray:
    """
    Gradient exact de discrete_energy par rapport à ω, matrice d × k.

    Args:
        f: Décodeur
        curve: Courbe au point ω courant
        n_t: Nombre de points de discrétisation

    Returns:
        (1/Δt) Σ_i Δ_iᵀ (J_f(γ_i) ∂γ_i/∂ω - J_f(γ_{i-1}) ∂γ_{i-1}/∂ω)
    """
    _check_curve(f.latent_dim, curve)
    grid = _Discretization(curve.a, curve.b, curve.basis, n_t)
    values, jac = f.evaluate(grid.points(curve.omega))
    grid.check_finite(values, "Sortie du décodeur")
    grid.check_finite(jac, "Jacobienne")
    return _paired_energy(values[None], jac[None], *_single_pairing(n_t), grid.design, grid.dt)[1]


def curve_length(f: Decoder, curve: GeodesicCurve, n_t: int) -> float:
    """Longueur Σ_i ‖f(γ(t_i)) - f(γ(t_{i-1}))‖ sur n_t points uniformes."""
    _check_curve(f.latent_dim, curve)
    grid = _Discretization(curve.a, curve.b, curve.basis, n_t)
    values = f.decode(grid.points(curve.omega))
    grid.check_finite(values, "Sortie du décodeur")
    return float(np.sum(np.linalg.norm(np.diff(values, axis=0), axis=1)))


def _check_ensemble(ensemble: Sequence[Decoder]) -> Tuple[int, int]:
    if not ensemble:
        raise ArgumentError("L'ensemble de décodeurs est vide")
    latent = {member.latent_dim for member in ensemble}
    ambient = {member.ambient_dim for member in ensemble}
    if len(latent) != 1 or len(ambient) != 1:
        raise ArgumentError(
            f"Dimensions incohérentes dans l'ensemble: latentes {sorted(latent)}, ambiantes {sorted(ambient)}"
        )
    return latent.pop(), ambient.pop()


def ensemble_energy(ensemble: Sequence[Decoder], curve: GeodesicCurve, n_t: int,
                    rng: np.random.Generator, redraw: str = "segment") -> float:
    """
    Énergie discrète stochastique d'un ensemble de décodeurs.

    Pour chaque segment, les deux extrémités sont décodées par des membres
    tirés uniformément et indépendamment.

    Raises:
        ArgumentError: Ensemble vide ou dimensions hétérogènes.
    """
    latent_dim, _ = _check_ensemble(ensemble)
    _check_curve(latent_dim, curve)
    grid = _Discretization(curve.a, curve.b, curve.basis, n_t)
    points = grid.points(curve.omega)
    values = np.stack([member.decode(points) for member in ensemble])
    start, end = _draw_pairing(rng, len(ensemble), n_t, redraw)
    return _paired_energy(values, None, start, end, grid.design, grid.dt)[0]


Objective = Callable[[np.ndarray, int], Tuple[float, np.ndarray]]


def _optimize(objective: Objective, omega0: np.ndarray, cfg: SolverConfig):
    """Boucle Adam avec suivi du meilleur ω et arrêt anticipé sur la fenêtre de patience."""
    adam = Adam.from_config(cfg)
    omega = omega0.copy()
    best_energy, best_omega = np.inf, omega
    trace: List[float] = []
    best_history: List[float] = []
    converged = False
    step = 0

    for step in range(cfg.max_steps + 1):
        energy, grad = objective(omega, step)
        if not np.isfinite(energy) or not np.all(np.isfinite(grad)):
            raise NumericError(f"Énergie non finie au pas {step}", step=step)
        trace.append(energy)
        if energy < best_energy:
            best_energy, best_omega = energy, omega
        best_history.append(best_energy)

        if best_energy <= 0.0:
            converged = True
            break
        if step >= cfg.patience_steps and best_history[step - cfg.patience_steps] - best_energy < cfg.early_stop_delta:
            converged = True
            break
        if step == cfg.max_steps:
            break
        omega = adam.step(omega, grad)

    return best_omega, best_energy, step, converged, np.array(trace)


def _min_singular_value(jac: np.ndarray) -> float:
    return float(np.min(np.linalg.svd(jac, compute_uv=False)))


def _diagnose(members: Sequence[Decoder], points: np.ndarray, cfg: SolverConfig) -> float:
    """Plus petite valeur singulière de J sur la courbe; contrôles du mode vérification."""
    min_sv = min(_min_singular_value(member.jacobian(points)) for member in members)
    if cfg.verify:
        if min_sv < cfg.rank_tol:
            raise RankDeficiencyError(
                f"Jacobienne de rang colonne non plein sur la géodésique "
                f"(plus petite valeur singulière {min_sv:.3e} < {cfg.rank_tol:.1e})"
            )
        for member in members:
            box = member.box
            if box is not None and np.any((points < box[:, 0]) | (points > box[:, 1])):
                logger.warning(f"La géodésique sort de la boîte déclarée du décodeur {member.kind}")
                break
    return min_sv


def _prepare(latent_dim: int, z1, z2, cfg: SolverConfig) -> Tuple[np.ndarray, np.ndarray, NullSpaceBasis]:
    a = np.asarray(z1, dtype=float).ravel()
    b = np.asarray(z2, dtype=float).ravel()
    if a.shape != (latent_dim,) or b.shape != (latent_dim,):
        raise ArgumentError(
            f"Points de dimensions {a.size} et {b.size}, le décodeur attend {latent_dim}"
        )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ArgumentError("Les extrémités doivent être finies")
    return a, b, uniform_spline_basis(cfg.n_segments, cfg.sv_tol)


def _run_with_restarts(objective: Objective, shape: Tuple[int, int], cfg: SolverConfig,
                       seed_sequence: np.random.SeedSequence):
    """Départ en ligne droite puis `restarts` initialisations gaussiennes; garde la meilleure."""
    best = _optimize(objective, np.zeros(shape), cfg)
    initial_energy = float(best[4][0])
    if cfg.restarts and best[1] > 0.0:
        rng = np.random.default_rng(seed_sequence)
        for restart in range(cfg.restarts):
            omega0 = rng.normal(0.0, cfg.restart_scale, size=shape)
            candidate = _optimize(objective, omega0, cfg)
            logger.debug(f"Redémarrage {restart + 1}/{cfg.restarts}: énergie {candidate[1]:.6g}")
            if candidate[1] < best[1]:
                best = candidate
    return best, initial_energy


def solve_geodesic(f: Decoder, z1, z2, cfg: Optional[SolverConfig] = None,
                   pair_index: int = 0) -> GeodesicSolution:
    """
    Calcule la géodésique entre z1 et z2 par minimisation de l'énergie discrète.

    Args:
        f: Décodeur
        z1: Point de départ
        z2: Point d'arrivée (z1 = z2 autorisé)
        cfg: Configuration du solveur (valeurs par défaut si None)
        pair_index: Indice de la paire, pour dériver les graines des redémarrages

    Returns:
        GeodesicSolution avec la longueur recalculée sur length_n_t points

    Raises:
        NumericError: Si l'énergie devient non finie (pas fautif dans `step`).
        RankDeficiencyError: En mode vérification, si J perd son rang sur la courbe.
    """
    cfg = cfg or SolverConfig()
    a, b, basis = _prepare(f.latent_dim, z1, z2, cfg)
    grid = _Discretization(a, b, basis, cfg.n_t)
    start, end = _single_pairing(cfg.n_t)

    def objective(omega, step):
        values, jac = f.evaluate(grid.points(omega))
        return _paired_energy(values[None], jac[None], start, end, grid.design, grid.dt)

    seeds = np.random.SeedSequence([cfg.seed, pair_index])
    (omega, energy, steps, converged, trace), initial_energy = _run_with_restarts(
        objective, (a.size, basis.nullity), cfg, seeds
    )
    curve = GeodesicCurve(a, b, basis, omega)

    length_grid = _Discretization(a, b, basis, cfg.length_n_t)
    points = length_grid.points(omega)
    values = f.decode(points)
    length_grid.check_finite(values, "Sortie du décodeur")
    length = float(np.sum(np.linalg.norm(np.diff(values, axis=0), axis=1)))
    min_sv = _diagnose([f], points, cfg)

    if not converged:
        logger.warning(f"Géodésique non convergée après {steps} pas (énergie {energy:.6g})")
    logger.debug(f"Géodésique: {steps} pas, énergie {initial_energy:.6g} → {energy:.6g}, longueur {length:.6g}")
    return GeodesicSolution(curve, float(energy), length, int(steps), converged, min_sv,
                            initial_energy, trace)


def geodesic_distance(f: Decoder, z1, z2, cfg: Optional[SolverConfig] = None,
                      pair_index: int = 0) -> float:
    """Distance géodésique d(z1, z2): longueur de la géodésique calculée."""
    return solve_geodesic(f, z1, z2, cfg, pair_index).length


def solve_geodesic_ensemble(ensemble: Sequence[Decoder], z1, z2, cfg: Optional[SolverConfig] = None,
                            pair_index: int = 0) -> GeodesicSolution:
    """
    Géodésique pour un ensemble de décodeurs.

    Les membres utilisés pour chaque segment sont retirés à chaque pas
    (par segment ou pour toute la courbe selon cfg.ensemble_redraw). La
    longueur finale utilise un appariement fixe tiré une fois depuis la
    graine; les longueurs par membre sont fournies en diagnostic.

    Raises:
        ArgumentError: Ensemble vide ou dimensions hétérogènes.
    """
    cfg = cfg or SolverConfig()
    latent_dim, _ = _check_ensemble(ensemble)
    a, b, basis = _prepare(latent_dim, z1, z2, cfg)
    grid = _Discretization(a, b, basis, cfg.n_t)
    optimize_seeds, length_seeds, restart_seeds = np.random.SeedSequence([cfg.seed, pair_index]).spawn(3)
    rng = np.random.default_rng(optimize_seeds)

    def objective(omega, step):
        values, jac = _evaluate_members(ensemble, grid.points(omega))
        start, end = _draw_pairing(rng, len(ensemble), cfg.n_t, cfg.ensemble_redraw)
        return _paired_energy(values, jac, start, end, grid.design, grid.dt)

    (omega, energy, steps, converged, trace), initial_energy = _run_with_restarts(
        objective, (a.size, basis.nullity), cfg, restart_seeds
    )
    curve = GeodesicCurve(a, b, basis, omega)

    length_grid = _Discretization(a, b, basis, cfg.length_n_t)
    points = length_grid.points(omega)
    values = np.stack([member.decode(points) for member in ensemble])
    length_grid.check_finite(np.moveaxis(values, 0, 1), "Sortie du décodeur")
    start, end = _draw_pairing(np.random.default_rng(length_seeds), len(ensemble),
                               cfg.length_n_t, cfg.ensemble_redraw)
    segments = np.arange(cfg.length_n_t - 1)
    length = float(np.sum(np.linalg.norm(values[end, segments + 1] - values[start, segments], axis=1)))
    member_lengths = np.sum(np.linalg.norm(np.diff(values, axis=1), axis=2), axis=1)
    min_sv = _diagnose(ensemble, points, cfg)

    if not converged:
        logger.warning(f"Géodésique d'ensemble non convergée après {steps} pas (énergie {energy:.6g})")
    return GeodesicSolution(curve, float(energy), length, int(steps), converged, min_sv,
                            initial_energy, trace, member_lengths)
