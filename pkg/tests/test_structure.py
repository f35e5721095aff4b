import numpy as np
import pytest

from qlyap import (
    ControlSystem,
    a_tilde_rank,
    ad_bracket_sequence,
    adjoint_matrix,
    analyze_structure,
    bracket_span,
    build_generator_basis,
    commutator,
    hs_inner,
    invariant_set_member,
    matrix_exponential,
    pseudo_pure_invariant_check,
    vandermonde_rank,
)
from qlyap.errors import NotHermitianError, NotPseudoPureError
from qlyap.presets import pseudo_pure_state

from conftest import random_density


def _random_ideal_system(rng, n):
    # moderate, well-separated gaps keep the frequency power matrix sane
    gaps = rng.uniform(0.6, 1.4, n - 1) + 0.15 * np.arange(n - 1)
    a = np.concatenate([[0.0], np.cumsum(gaps)])
    h1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h1 = 0.5 * (h1 + h1.conj().T)
    np.fill_diagonal(h1, 0.0)
    return ControlSystem(np.diag(a), h1)


# closed form of the bracket sequence, written directly from the generator
# commutation relations (independent of the iterative implementation)
def _closed_form_bracket(sys, m):
    n = sys.dim
    out = np.zeros((n, n), complex)
    for (k, l), omega in sys.omegas.items():
        b = sys.coupling(k, l)
        lam = np.zeros((n, n), complex)
        lam[k - 1, l - 1] = 1j
        lam[l - 1, k - 1] = 1j
        lam_bar = np.zeros((n, n), complex)
        lam_bar[k - 1, l - 1] = 1.0
        lam_bar[l - 1, k - 1] = -1.0
        if m % 2 == 1:
            half = (m + 1) // 2
            out += (-1.0) ** (half + 1) * omega**m * (b.real * lam_bar + b.imag * lam)
        else:
            half = m // 2
            out += (-1.0) ** half * omega**m * (-b.real * lam + b.imag * lam_bar)
    return out


def test_control_system_validation():
    with pytest.raises(ValueError):
        ControlSystem(np.array([[0, 0.5], [0.5, 1]]), np.array([[0, 1], [1, 0]], dtype=complex))
    with pytest.raises(ValueError):
        # diagonal level shifts in the control operator are out of scope
        ControlSystem(np.diag([0.0, 1.0]), np.array([[0.3, 1], [1, 0]], dtype=complex))
    with pytest.raises(NotHermitianError):
        ControlSystem(np.diag([0.0, 1.0]), np.array([[0, 1], [2, 0]], dtype=complex))


def test_analyze_structure_equal_spacing():
    sys = ControlSystem(
        np.diag([0.0, 1.0, 2.0]),
        np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=complex),
    )
    rep = analyze_structure(sys)
    assert not rep.strongly_regular
    assert ((1, 2), (2, 3)) in rep.colliding_pairs
    assert rep.fully_connected


def test_analyze_structure_missing_edge():
    sys = ControlSystem(
        np.diag([0.0, 1.0, 2.5]),
        np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex),
    )
    rep = analyze_structure(sys)
    assert rep.strongly_regular
    assert not rep.fully_connected
    assert rep.missing_edges == ((1, 3),)


def test_analyze_structure_generic():
    rng = np.random.default_rng(7)
    rep = analyze_structure(_random_ideal_system(rng, 4))
    assert rep.strongly_regular and rep.fully_connected


def test_bracket_sequence_basic_properties(ideal_qutrit):
    brackets = ad_bracket_sequence(ideal_qutrit, 6)
    assert len(brackets) == 7
    for b in brackets:
        assert abs(np.trace(b)) < 1e-12
        assert np.abs(b + b.conj().T).max() < 1e-12
        assert np.abs(np.diag(b)).max() < 1e-12


def test_bracket_sequence_matches_closed_form():
    rng = np.random.default_rng(8)
    for _ in range(5):
        sys = _random_ideal_system(rng, 3)
        brackets = ad_bracket_sequence(sys, 8)
        for m in range(1, 9):
            assert np.abs(brackets[m] - _closed_form_bracket(sys, m)).max() < 1e-9


def test_odd_even_bracket_orthogonality():
    rng = np.random.default_rng(9)
    sys = _random_ideal_system(rng, 3)
    brackets = ad_bracket_sequence(sys, 10)
    from qlyap import hs_norm

    for i in range(1, 11, 2):
        for j in range(2, 11, 2):
            scale = max(1.0, hs_norm(brackets[i]) * hs_norm(brackets[j]))
            assert abs(hs_inner(brackets[i], brackets[j])) < 1e-10 * scale


def test_span_ranks_ideal_and_nonideal(ideal_qutrit, basis3):
    span = bracket_span(ad_bracket_sequence(ideal_qutrit), basis3, sys=ideal_qutrit)
    assert span.rank == 6 and span.full
    assert span.spanned_pairs == ((1, 2), (1, 3), (2, 3))
    assert span.vandermonde_rank == 3

    morse = ControlSystem(
        np.diag([0.0, 1.0, 2.5]),
        np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex),
    )
    span_a = bracket_span(ad_bracket_sequence(morse), basis3, sys=morse)
    assert span_a.rank == 4
    assert span_a.spanned_pairs == ((1, 2), (2, 3))

    equal = ControlSystem(
        np.diag([0.0, 1.0, 2.0]),
        np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=complex),
    )
    span_b = bracket_span(ad_bracket_sequence(equal), basis3, sys=equal)
    assert span_b.vandermonde_rank == 2
    assert span_b.rank == 4
    assert vandermonde_rank(equal) == 2


def test_full_rank_for_random_ideal_systems():
    rng = np.random.default_rng(10)
    for n in (2, 3, 4):
        b = build_generator_basis(n)
        sys = _random_ideal_system(rng, n)
        span = bracket_span(ad_bracket_sequence(sys), b, sys=sys)
        assert span.rank == n * n - n and span.full


def test_invariant_member_trivial_and_exception(ideal_qutrit, basis3, exception_pair):
    span = bracket_span(ad_bracket_sequence(ideal_qutrit), basis3, sys=ideal_qutrit)
    rho_d = np.diag([0.5, 1 / 3, 1 / 6]).astype(complex)
    assert invariant_set_member(rho_d, rho_d, span, basis3)
    rho1, rho2 = exception_pair
    assert invariant_set_member(rho1, rho2, span, basis3)


def test_invariant_member_random_pair_false(ideal_qutrit, basis3):
    span = bracket_span(ad_bracket_sequence(ideal_qutrit), basis3, sys=ideal_qutrit)
    rng = np.random.default_rng(11)
    rho = random_density(rng, 3)
    u = matrix_exponential(-1j * 0.9 * ideal_qutrit.h1)
    rho_rot = u @ rho @ u.conj().T
    # isospectral, generic relative position: commutator has off-diagonal support
    assert not invariant_set_member(rho, rho_rot, span, basis3)


def test_invariant_membership_preserved_under_free_flow(ideal_qutrit, basis3, exception_pair):
    span = bracket_span(ad_bracket_sequence(ideal_qutrit), basis3, sys=ideal_qutrit)
    rho1, rho2 = exception_pair
    for t in (0.37, 1.9, 11.4):
        u = np.diag(np.exp(-1j * ideal_qutrit.h0_diag * t))
        a, b = u @ rho1 @ u.conj().T, u @ rho2 @ u.conj().T
        assert invariant_set_member(a, b, span, basis3)
        assert np.abs(commutator(a, b) - commutator(rho1, rho2)).max() < 1e-12


def test_a_tilde_rank_cases(basis3):
    rng = np.random.default_rng(12)
    # generic rotated state: full off-diagonal rank
    rho = random_density(rng, 3)
    assert a_tilde_rank(rho, basis3) == 6
    # diagonal generic state: kernel is exactly the n-1 diagonal directions
    rho_diag = np.diag([0.5, 1 / 3, 1 / 6]).astype(complex)
    assert a_tilde_rank(rho_diag, basis3) == 6
    a_full = adjoint_matrix(rho_diag, basis3)
    svals = np.linalg.svd(a_full, compute_uv=False)
    assert (svals < 1e-12).sum() == 2  # SVD oracle for the kernel dimension
    # completely mixed state: the adjoint action vanishes identically
    assert a_tilde_rank(np.eye(3, dtype=complex) / 3, basis3) == 0


def test_a_tilde_rank_diagonal_unitary_invariance(basis3):
    rng = np.random.default_rng(13)
    rho = random_density(rng, 3)
    d = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 3)))
    assert a_tilde_rank(d @ rho @ d.conj().T, basis3) == a_tilde_rank(rho, basis3)


def test_pseudo_pure_invariant_check():
    psi_exc = np.array([1.0, np.exp(0.7j), 0.0]) / np.sqrt(2)
    assert pseudo_pure_invariant_check(pseudo_pure_state(psi_exc, 0.9))
    psi_single = np.array([1.0, 0.0, 0.0])
    assert not pseudo_pure_invariant_check(pseudo_pure_state(psi_single, 0.9))
    psi_three = np.array([2.0, 1.0, 2.0]) / 3.0
    assert not pseudo_pure_invariant_check(pseudo_pure_state(psi_three, 0.9))
    with pytest.raises(NotPseudoPureError):
        pseudo_pure_invariant_check(np.diag([0.5, 1 / 3, 1 / 6]).astype(complex))
    with pytest.raises(NotPseudoPureError):
        pseudo_pure_invariant_check(np.eye(3, dtype=complex) / 3)


def test_pseudo_pure_two_level_equatorial_is_exceptional():
    # every two-level mixed state is pseudo-pure; equal-modulus amplitudes
    # are exactly the equatorial Bloch vectors
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    equatorial = 0.5 * (np.eye(2, dtype=complex) + 0.8 * sx)
    tilted = 0.5 * (np.eye(2, dtype=complex) + 0.5 * sx + 0.62 * sz)
    assert pseudo_pure_invariant_check(equatorial)
    assert not pseudo_pure_invariant_check(tilted)


def test_first_bracket_two_level_real_coupling():
    # real symmetric coupling: B_1 lies along the antisymmetric generator
    # with coefficient omega * b
    sys = ControlSystem(np.diag([0.0, 1.3]), np.array([[0, 0.7], [0.7, 0]], dtype=complex))
    b1 = ad_bracket_sequence(sys, 1)[1]
    lam_bar = np.array([[0, 1], [-1, 0]], dtype=complex)
    assert np.abs(b1 - 1.3 * 0.7 * lam_bar).max() < 1e-12
