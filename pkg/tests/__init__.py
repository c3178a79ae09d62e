"""
Tests pour le package latent-geodesics.
"""
