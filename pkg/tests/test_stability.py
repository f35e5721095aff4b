import numpy as np
import pytest

from qlyap import (
    ControlSystem,
    adjoint_matrix,
    classify_fixed_point,
    enumerate_critical_points,
    linearization,
    restrict_to_tangent,
    stability_survey,
    to_bloch,
)
from qlyap.errors import (
    DimensionTooLargeError,
    LeakageIntoCartanError,
    NotFixedPointError,
    NotStationaryError,
)

from test_structure import _random_ideal_system


def _swap_index(perm, w):
    """Directions along which the overlap with the target decreases.

    Independent count of the stable-manifold dimension: a rotation in the
    (k, l) root pair trades the weights at k and l, changing Tr(rho rho_d)
    by -(w_k - w_l)(w_perm(k) - w_perm(l)); both pair directions behave the
    same way.
    """
    n = len(w)
    count = 0
    for k in range(n):
        for l in range(k + 1, n):
            if (w[k] - w[l]) * (w[perm[k]] - w[perm[l]]) > 0:
                count += 2
    return count


def test_enumerate_generic_qutrit():
    points = enumerate_critical_points([0.5, 1 / 3, 1 / 6])
    assert len(points) == 6
    assert points[0].permutation == (0, 1, 2)
    assert points[0].critical_value == pytest.approx(0.0, abs=1e-15)
    values = [p.critical_value for p in points]
    assert values[-1] == pytest.approx(max(values))
    # inversion value: sum w_k (w_k - w_rev(k))
    w = np.array([0.5, 1 / 3, 1 / 6])
    assert values[-1] == pytest.approx(float(np.sum(w * (w - w[::-1]))), abs=1e-15)


def test_enumerate_collapses_degenerate():
    points = enumerate_critical_points([0.25, 0.25, 0.5])
    assert len(points) == 3
    arrangements = {tuple(np.diag(p.rho0).real) for p in points}
    assert arrangements == {(0.25, 0.25, 0.5), (0.25, 0.5, 0.25), (0.5, 0.25, 0.25)}


def test_enumerate_validation():
    with pytest.raises(DimensionTooLargeError):
        enumerate_critical_points(np.full(7, 1 / 7))
    with pytest.raises(ValueError):
        enumerate_critical_points([0.5, 0.6])


def test_critical_values_match_direct_formula():
    w = np.array([0.4, 0.35, 0.15, 0.1])
    for p in enumerate_critical_points(w):
        direct = float(np.sum(w * w) - np.sum(w * np.diag(p.rho0).real))
        assert p.critical_value == pytest.approx(direct, abs=1e-12)


def test_linearization_at_mixed_state_is_drift_only(basis3, ideal_qutrit):
    zero = np.zeros(8)
    d = linearization(ideal_qutrit, zero, zero, basis3)
    assert np.abs(d - adjoint_matrix(ideal_qutrit.h0, basis3)).max() < 1e-14


def test_linearization_rejects_non_fixed_point(basis3, ideal_qutrit):
    rng = np.random.default_rng(40)
    rho_d = np.diag([0.5, 1 / 3, 1 / 6]).astype(complex)
    sd = to_bloch(rho_d, basis3)
    from conftest import random_density

    s_generic = to_bloch(random_density(rng, 3), basis3)
    with pytest.raises(NotFixedPointError):
        linearization(ideal_qutrit, s_generic, sd, basis3)


def test_linearization_cartan_block_vanishes(basis3, ideal_qutrit):
    rho_d = np.diag([0.5, 1 / 3, 1 / 6]).astype(complex)
    sd = to_bloch(rho_d, basis3)
    for p in enumerate_critical_points([0.5, 1 / 3, 1 / 6]):
        d = linearization(ideal_qutrit, to_bloch(p.rho0, basis3), sd, basis3)
        m = basis3.n_offdiag
        assert np.abs(d[m:, :]).max() < 1e-10
        assert np.abs(d[:, m:]).max() < 1e-10
        restrict_to_tangent(d, basis3)  # must not raise


def test_linearization_matches_finite_difference(basis3):
    # central-difference Jacobian of the full vector field at the fixed point
    rng = np.random.default_rng(41)
    h = 1e-5
    for _ in range(3):
        sys = _random_ideal_system(rng, 3)
        w = np.sort(rng.dirichlet(np.ones(3)))[::-1]
        rho_d = np.diag(w).astype(complex)
        sd = to_bloch(rho_d, basis3)
        a0 = adjoint_matrix(sys.h0, basis3)
        a1 = adjoint_matrix(sys.h1, basis3)

        def field(s):
            return (a0 + float(sd @ a1 @ s) * a1) @ s

        point = enumerate_critical_points(w)[2]
        s0 = to_bloch(point.rho0, basis3)
        d = linearization(sys, s0, sd, basis3)
        jac = np.empty_like(d)
        for i in range(8):
            e = np.zeros(8)
            e[i] = h
            jac[:, i] = (field(s0 + e) - field(s0 - e)) / (2 * h)
        assert np.abs(d - jac).max() < 1e-6


def test_restrict_to_tangent_leakage_detection(basis3):
    bad = np.zeros((8, 8))
    bad[7, 0] = 1e-3
    with pytest.raises(LeakageIntoCartanError):
        restrict_to_tangent(bad, basis3)


def test_b0_spectrum_and_determinant_identity(basis3, ideal_qutrit):
    rho_d = np.diag([0.5, 1 / 3, 1 / 6]).astype(complex)
    sd = to_bloch(rho_d, basis3)
    a0 = adjoint_matrix(ideal_qutrit.h0, basis3)
    b0 = a0[:6, :6]
    eigs = np.sort_complex(np.linalg.eigvals(b0))
    expected = np.sort_complex(
        np.array([1j * w for w in ideal_qutrit.omegas.values()] + [-1j * w for w in ideal_qutrit.omegas.values()])
    )
    assert np.abs(eigs - expected).max() < 1e-12
    for p in enumerate_critical_points([0.5, 1 / 3, 1 / 6]):
        d = linearization(ideal_qutrit, to_bloch(p.rho0, basis3), sd, basis3)
        b = restrict_to_tangent(d, basis3)
        assert np.linalg.det(b) == pytest.approx(np.linalg.det(b0), rel=1e-8)


def test_trace_identity(basis3, ideal_qutrit):
    # trace(B) = -u.v since trace(B0) = 0
    rho_d = np.diag([0.5, 1 / 3, 1 / 6]).astype(complex)
    sd = to_bloch(rho_d, basis3)
    a1 = adjoint_matrix(ideal_qutrit.h1, basis3)
    for p in enumerate_critical_points([0.5, 1 / 3, 1 / 6]):
        s0 = to_bloch(p.rho0, basis3)
        d = linearization(ideal_qutrit, s0, sd, basis3)
        b = restrict_to_tangent(d, basis3)
        u = (a1 @ s0)[:6]
        v = (a1 @ sd)[:6]
        assert abs(np.trace(b) + u @ v) < 1e-10


def test_classify_fixed_point_counts():
    b = np.diag([-1.0, -2.0, 3.0])
    frag = classify_fixed_point(b)
    assert (frag.n_negative, frag.n_positive, frag.n_imaginary) == (2, 1, 0)
    assert frag.classification == "saddle"
    rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert classify_fixed_point(rot).classification == "centre_bearing"
    assert classify_fixed_point(-np.eye(3)).classification == "sink"
    assert classify_fixed_point(np.eye(3)).classification == "source"


def test_survey_ideal_qutrit_census(ideal_qutrit):
    rho_d = np.diag([0.5, 1 / 3, 1 / 6]).astype(complex)
    reports = stability_survey(ideal_qutrit, rho_d)
    classes = [r.classification for r in reports]
    assert classes[0] == "sink"
    assert classes[-1] == "source"
    assert classes[1:-1] == ["saddle"] * 4
    for r in reports:
        assert r.n_imaginary == 0
        assert r.n_negative + r.n_positive == 6
        assert r.stable_manifold_dim == _swap_index(r.point.permutation, np.diag(rho_d).real)


def test_survey_two_level():
    sys = ControlSystem(np.diag([0.0, 1.0]), np.array([[0, 1], [1, 0]], dtype=complex))
    reports = stability_survey(sys, np.diag([0.7, 0.3]).astype(complex))
    assert [r.classification for r in reports] == ["sink", "source"]


def test_survey_rejects_nonstationary(ideal_qutrit):
    rho = np.array(
        [[0.4, 0.1, 0], [0.1, 0.35, 0], [0, 0, 0.25]], dtype=complex
    )
    with pytest.raises(NotStationaryError):
        stability_survey(ideal_qutrit, rho)


def test_survey_degenerate_target(ideal_qutrit):
    rho_d = np.diag([0.25, 0.25, 0.5]).astype(complex)
    reports = stability_survey(ideal_qutrit, rho_d)
    assert len(reports) == 3
    target = reports[0]
    assert target.classification == "sink"
    assert target.n_negative == 4  # contracting directions = manifold dimension
    assert target.isotropy_pairs == ((1, 2),)
    for r in reports[1:]:
        assert r.classification == "centre_bearing"
        assert r.n_positive > 0
        assert r.structural_imaginary_expected == 2
        # observed: one isotropy pair of this point plus one centre pair from
        # the target's degeneracy
        assert r.n_imaginary == 4


def test_hyperbolicity_over_random_ideal_systems():
    rng = np.random.default_rng(42)
    for _ in range(20):
        sys = _random_ideal_system(rng, 3)
        w = rng.dirichlet(np.ones(3))
        while np.abs(np.subtract.outer(w, w))[~np.eye(3, dtype=bool)].min() < 0.03:
            w = rng.dirichlet(np.ones(3))
        reports = stability_survey(sys, np.diag(w).astype(complex))
        for r in reports:
            assert r.n_imaginary == 0
            assert r.stable_manifold_dim == _swap_index(r.point.permutation, w)


def test_morse_index_oracle_random_systems():
    rng = np.random.default_rng(43)
    for _ in range(5):
        sys = _random_ideal_system(rng, 4)
        w = np.sort(rng.uniform(0.05, 1, 4))[::-1]
        w /= w.sum()
        reports = stability_survey(sys, np.diag(w).astype(complex))
        for r in reports:
            assert r.stable_manifold_dim == _swap_index(r.point.permutation, w)
