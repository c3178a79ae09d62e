"""
latent-geodesics - Distances géodésiques identifiables dans l'espace latent.

Ce package calcule des géodésiques pour la métrique tirée en arrière par
un décodeur, en minimisant l'énergie de courbes splines contraintes, et
fournit les expériences qui vérifient l'invariance de ces distances par
reparamétrisation.
"""

from .version import __version__
from .main import main

__all__ = ["__version__", "main"]
