"""
Gestion de version pour latent-geodesics.
"""

__version__ = "0.1.0"
