"""
Tests des courbes splines contraintes.
"""

import numpy as np
import pytest

from latent_geodesics import spline
from latent_geodesics.errors import ArgumentError, NullSpaceError
from latent_geodesics.spline import (
    GeodesicCurve,
    KnotVector,
    build_constraint_matrix,
    curve_eval,
    curve_param_jacobian,
    curve_velocity,
    null_space_basis,
    polynomial_rows,
    uniform_spline_basis,
)


@pytest.mark.parametrize("n_segments", [1, 2, 5, 10])
def test_constraint_matrix_shape_and_nullity(n_segments):
    """Vérifie la forme (3n - 1) × 4n de A et la nullité n + 1."""
    constraints = build_constraint_matrix(n_segments)
    assert constraints.matrix.shape == (3 * n_segments - 1, 4 * n_segments)
    basis = null_space_basis(constraints)
    assert basis.nullity == n_segments + 1
    assert basis.rank == 3 * n_segments - 1


def test_constraint_blocks():
    """Vérifie le découpage de A en blocs de bord et de continuité."""
    constraints = build_constraint_matrix(4)
    assert constraints.block("B").shape == (2, 16)
    for name in ("C0", "C1", "C2"):
        assert constraints.block(name).shape == (3, 16)
    with pytest.raises(ArgumentError):
        constraints.block("C3")


def test_null_space_is_orthonormal():
    """Vérifie que N est orthonormale et annule A."""
    constraints = build_constraint_matrix(10)
    basis = null_space_basis(constraints)
    assert np.allclose(constraints.matrix @ basis.basis, 0.0, atol=1e-12)
    assert np.allclose(basis.basis.T @ basis.basis, np.eye(basis.nullity), atol=1e-12)


def test_null_space_inconsistent_nullity(monkeypatch):
    """Vérifie qu'une nullité différente pour une même forme lève NullSpaceError."""
    constraints = build_constraint_matrix(3)
    monkeypatch.setitem(spline._nullity_by_shape, (constraints.matrix.shape, spline.DEFAULT_SV_TOL), 99)
    with pytest.raises(NullSpaceError):
        null_space_basis(constraints)


def test_failed_null_space_is_not_cached():
    """Vérifie qu'un seuil trop grand qui échoue ne perturbe pas les calculs suivants."""
    constraints = build_constraint_matrix(10)
    with pytest.raises(NullSpaceError):
        null_space_basis(constraints, sv_tol=2e-2)
    basis = null_space_basis(constraints)
    assert basis.nullity == 11
    assert null_space_basis(constraints, sv_tol=1e-9).nullity == 11


def test_null_space_rejects_bad_tolerance():
    """Vérifie le rejet d'un seuil de valeurs singulières non positif."""
    with pytest.raises(ArgumentError):
        null_space_basis(build_constraint_matrix(3), sv_tol=0.0)


def test_knot_vector_validation():
    """Vérifie les contrôles sur les noeuds."""
    assert KnotVector.uniform(4).values.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ArgumentError):
        KnotVector(np.array([0.0, 0.5, 0.5, 1.0]))
    with pytest.raises(ArgumentError):
        KnotVector(np.array([0.1, 1.0]))
    with pytest.raises(ArgumentError):
        build_constraint_matrix(0)
    with pytest.raises(ArgumentError):
        build_constraint_matrix(3, KnotVector.uniform(4))


def test_uniform_basis_is_cached():
    """Vérifie que la base uniforme est calculée une seule fois."""
    assert uniform_spline_basis(7) is uniform_spline_basis(7)


def _random_curve(seed=0, n_segments=5):
    basis = uniform_spline_basis(n_segments)
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=3), rng.normal(size=3)
    return GeodesicCurve(a, b, basis, rng.normal(size=(3, basis.nullity)))


def test_curve_endpoints_are_exact():
    """Vérifie γ(0) = a et γ(1) = b quel que soit ω."""
    curve = _random_curve()
    assert np.array_equal(curve_eval(curve, 0.0), curve.a)
    assert np.array_equal(curve_eval(curve, 1.0), curve.b)


def test_straight_curve_is_constant_for_equal_endpoints():
    """Vérifie que la courbe ω = 0 entre deux points égaux est constante."""
    a = np.array([0.3, -1.7])
    curve = GeodesicCurve.straight(a, a, uniform_spline_basis(4))
    points = curve_eval(curve, np.linspace(0.0, 1.0, 33))
    assert np.all(points == a)


def test_curve_is_twice_continuously_differentiable():
    """Vérifie la continuité de S, S' et S'' aux noeuds intérieurs."""
    curve = _random_curve(seed=1)
    knots = curve.basis.knots
    for i in range(1, knots.n_segments):
        h = knots.values[i]
        for derivative in (0, 1, 2):
            left = polynomial_rows(knots, h, derivative, segment=i - 1) @ curve.basis.basis @ curve.omega.T
            right = polynomial_rows(knots, h, derivative, segment=i) @ curve.basis.basis @ curve.omega.T
            assert np.allclose(left, right, atol=1e-10), f"Discontinuité d'ordre {derivative} en {h}"


def test_curve_velocity_matches_finite_differences():
    """Vérifie γ'(t) contre des différences centrées."""
    curve = _random_curve(seed=2)
    h = 1e-6
    for t in (0.1, 0.37, 0.8):
        expected = (curve_eval(curve, t + h) - curve_eval(curve, t - h)) / (2 * h)
        assert np.allclose(curve_velocity(curve, t), expected, atol=1e-6)


def test_curve_param_jacobian():
    """Vérifie ∂γ/∂ω: nulle aux extrémités et indépendante de ω."""
    curve = _random_curve(seed=3)
    assert np.all(curve_param_jacobian(curve, 0.0) == 0.0)
    assert np.all(curve_param_jacobian(curve, 1.0) == 0.0)
    other = curve.with_omega(np.zeros_like(curve.omega))
    assert np.array_equal(curve_param_jacobian(curve, 0.4), curve_param_jacobian(other, 0.4))
    assert curve_param_jacobian(curve, 0.4).shape == (curve.dim, curve.basis.nullity)


def test_curve_eval_rejects_parameter_outside_unit_interval():
    """Vérifie le rejet de t hors de [0, 1]."""
    curve = _random_curve()
    with pytest.raises(ArgumentError):
        curve_eval(curve, 1.5)
    with pytest.raises(ArgumentError):
        curve_eval(curve, np.array([0.2, -0.1]))


def test_curve_rejects_bad_omega_shape():
    """Vérifie le contrôle de forme de ω."""
    basis = uniform_spline_basis(4)
    with pytest.raises(ArgumentError):
        GeodesicCurve(np.zeros(2), np.ones(2), basis, np.zeros((2, basis.nullity + 1)))
    with pytest.raises(ArgumentError):
        GeodesicCurve(np.zeros(2), np.ones(3), basis, np.zeros((2, basis.nullity)))


def test_single_segment_matrix():
    """Vérifie la matrice exacte d'un seul segment: lignes de bord uniquement."""
    constraints = build_constraint_matrix(1)
    assert constraints.matrix.tolist() == [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0]]


def test_single_segment_null_vector():
    """Vérifie que ξ = (0, 1, -2, 1) est dans le noyau et décrit t(1 - t)²."""
    constraints = build_constraint_matrix(1)
    xi = np.array([0.0, 1.0, -2.0, 1.0])
    assert np.all(constraints.matrix @ xi == 0.0)
    t = np.linspace(0.0, 1.0, 21)
    values = polynomial_rows(constraints.knots, t) @ xi
    assert np.allclose(values, t * (1 - t) ** 2, atol=1e-14)


def test_continuity_rows_for_four_segments():
    """Vérifie le contenu et le décalage 4(i - 1) des lignes C⁰ pour n = 4."""
    constraints = build_constraint_matrix(4)
    c0 = constraints.block("C0")
    for i in range(1, 4):
        h = i / 4
        row = c0[i - 1]
        offset = 4 * (i - 1)
        assert np.allclose(row[offset:offset + 8], [1, h, h ** 2, h ** 3, -1, -h, -h ** 2, -h ** 3])
        assert np.count_nonzero(np.delete(row, np.arange(offset, offset + 8))) == 0


def test_constraint_rank_up_to_32_segments():
    """Vérifie rang(A) = 3n - 1 et nullité n + 1 pour tout n <= 32."""
    for n_segments in range(1, 33):
        basis = null_space_basis(build_constraint_matrix(n_segments))
        assert basis.rank == 3 * n_segments - 1, f"Rang incorrect pour n = {n_segments}"
        assert basis.nullity == n_segments + 1


def test_curve_is_linear_in_omega():
    """Vérifie que γ - l est linéaire en ω."""
    first, second = _random_curve(seed=4), _random_curve(seed=5)
    second = first.with_omega(second.omega)
    combined = first.with_omega(2.0 * first.omega - 0.7 * second.omega)
    t = np.linspace(0.0, 1.0, 41)
    line = spline.straight_line(first.a, first.b, t)
    expected = 2.0 * (curve_eval(first, t) - line) - 0.7 * (curve_eval(second, t) - line)
    assert np.allclose(curve_eval(combined, t) - line, expected, atol=1e-12)


def test_curve_param_jacobian_matches_finite_differences():
    """Vérifie ∂γ_d/∂ω_d contre des différences centrées sur chaque paramètre."""
    curve = _random_curve(seed=6)
    h = 1e-6
    for t in (0.15, 0.5, 0.83):
        jacobian = curve_param_jacobian(curve, t)
        for d in range(curve.dim):
            for j in range(curve.basis.nullity):
                step = np.zeros_like(curve.omega)
                step[d, j] = h
                plus = curve_eval(curve.with_omega(curve.omega + step), t)[d]
                minus = curve_eval(curve.with_omega(curve.omega - step), t)[d]
                assert abs((plus - minus) / (2 * h) - jacobian[d, j]) <= 1e-8
