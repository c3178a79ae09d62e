"""
Exceptions de latent-geodesics.

Toutes les erreurs héritent de ValueError afin que le code appelant
puisse continuer à intercepter `ValueError` comme point de capture unique.
"""

from typing import List, Optional


class GeodesicError(ValueError):
    """Erreur de base du package."""


class ArgumentError(GeodesicError):
    """Argument invalide (dimension, domaine, valeur dégénérée)."""


class NumericError(GeodesicError):
    """Valeur non finie rencontrée pendant un calcul."""

    def __init__(self, message: str, step: Optional[int] = None, t: Optional[float] = None):
        super().__init__(message)
        self.step = step
        self.t = t


class RankDeficiencyError(NumericError):
    """Jacobienne de rang colonne non plein en un point évalué."""


class NullSpaceError(GeodesicError):
    """Noyau du système de contraintes incohérent."""


class UnsupportedError(GeodesicError):
    """Opération non prise en charge pour cette configuration."""


class ConfigError(GeodesicError):
    """Document de configuration invalide."""

    def __init__(self, message: str, path: Optional[str] = None,
                 unknown_keys: Optional[List[str]] = None):
        super().__init__(message)
        self.path = path
        self.unknown_keys = unknown_keys or []
