"""Hamiltonian structure tests and invariant-set membership.

A control system is a pair (H0, H1) written in the eigenbasis of the drift,
so H0 is diagonal with real entries and H1 is Hermitian with zero diagonal.
This module checks strong regularity (all transition frequencies distinct)
and full connectivity (all couplings nonzero), generates the repeated-
commutator sequence B_m = ad_{-iH0}^m(-iH1), computes the subspace it spans,
and uses that span to decide membership of a state pair in the set where the
feedback field vanishes identically along the free flow.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, NotHermitianError, NotPseudoPureError
from .linalg import (
    GeneratorBasis,
    adjoint_matrix,
    commutator,
    spectrum,
    su_coordinates,
    validate_density,
)

FREQ_COLLISION_RTOL = 1e-9
NEAR_COLLISION_RTOL = 1e-6
RANK_RTOL = 1e-8
ISOSPECTRAL_ATOL = 1e-8


class ControlSystem:
    """Bilinear control pair (H0, H1) in the drift eigenbasis.

    Parameters
    ----------
    h0 : ndarray
        Diagonal Hermitian drift, real entries a_1..a_n.
    h1 : ndarray
        Hermitian control operator with zero diagonal (level shifts induced
        by the field are out of scope and rejected).
    tol : float
        Absolute tolerance for the structural checks above.

    Attributes
    ----------
    omegas : dict
        Transition frequencies ``omega[(k, l)] = a_l - a_k`` for 1-based
        level pairs k < l.
    """

    def __init__(self, h0: np.ndarray, h1: np.ndarray, tol: float = 1e-10):
        h0 = np.asarray(h0, dtype=np.complex128)
        h1 = np.asarray(h1, dtype=np.complex128)
        if h0.ndim == 1:
            h0 = np.diag(h0)
        if h0.shape != h1.shape or h0.ndim != 2 or h0.shape[0] != h0.shape[1]:
            raise DimensionMismatchError(f"H0 {h0.shape} and H1 {h1.shape} must be square and equal")
        n = h0.shape[0]
        if n < 2:
            raise DimensionMismatchError("system dimension must be >= 2")
        scale0 = max(1.0, float(np.abs(h0).max()))
        if np.abs(h0 - np.diag(np.diag(h0))).max() > tol * scale0:
            raise ValueError("H0 must be diagonal in its eigenbasis representation")
        if np.abs(np.diag(h0).imag).max() > tol * scale0:
            raise NotHermitianError("H0 diagonal must be real")
        scale1 = max(1.0, float(np.abs(h1).max()))
        if np.abs(h1 - h1.conj().T).max() > tol * scale1:
            raise NotHermitianError("H1 must be Hermitian")
        if np.abs(np.diag(h1)).max() > tol * scale1:
            raise ValueError("H1 must have zero diagonal")
        self.dim = n
        self.h0_diag = np.diag(h0).real.copy()
        self.h0 = np.diag(self.h0_diag).astype(np.complex128)
        self.h1 = h1.copy()
        self.omegas = {
            (k + 1, l + 1): float(self.h0_diag[l] - self.h0_diag[k])
            for k in range(n)
            for l in range(k + 1, n)
        }

    def coupling(self, k: int, l: int) -> complex:
        """Coupling coefficient b_kl of H1, 1-based levels."""
        return complex(self.h1[k - 1, l - 1])

    def __repr__(self):
        return f"ControlSystem(dim={self.dim})"


@dataclass(frozen=True)
class StructureReport:
    strongly_regular: bool
    colliding_pairs: tuple
    fully_connected: bool
    missing_edges: tuple


@dataclass(frozen=True)
class SpanReport:
    """Span of the commutator sequence inside the off-diagonal block.

    ``row_space`` holds an orthonormal basis (rows) of the spanned subspace
    in off-diagonal coordinates; ``spanned_pairs`` lists the level pairs
    whose full two-dimensional root space lies inside it.
    """

    spanned_pairs: tuple
    rank: int
    vandermonde_rank: int
    full: bool
    dim: int
    row_space: np.ndarray = field(repr=False, default=None)


def analyze_structure(sys: ControlSystem, tol: float | None = None) -> StructureReport:
    """Check strong regularity of H0 and full connectivity of H1.

    A frequency collision is ``| |omega_kl| - |omega_pq| | <= tol`` for
    distinct pairs (absolute values compare the two orientations at once);
    a vanishing gap is reported as a pair colliding with itself.  Near
    collisions within 1e-6 relative but outside ``tol`` raise a warning
    instead of being classified.
    """
    pairs = list(sys.omegas)
    omega_scale = max(abs(w) for w in sys.omegas.values())
    omega_scale = max(omega_scale, 1e-300)
    tol_freq = FREQ_COLLISION_RTOL * omega_scale if tol is None else tol
    near_tol = NEAR_COLLISION_RTOL * omega_scale
    colliding = []
    for i, p in enumerate(pairs):
        if abs(sys.omegas[p]) <= tol_freq:
            colliding.append((p, p))
        for q in pairs[i + 1 :]:
            gap = abs(abs(sys.omegas[p]) - abs(sys.omegas[q]))
            if gap <= tol_freq:
                colliding.append((p, q))
            elif gap <= near_tol:
                warnings.warn(
                    f"near frequency collision between {p} and {q}: gap {gap:.3e}",
                    stacklevel=2,
                )
    b_scale = max(1.0, float(np.abs(sys.h1).max()))
    tol_b = 1e-9 * b_scale if tol is None else tol
    missing = [p for p in pairs if abs(sys.coupling(*p)) <= tol_b]
    return StructureReport(
        strongly_regular=not colliding,
        colliding_pairs=tuple(colliding),
        fully_connected=not missing,
        missing_edges=tuple(missing),
    )


def ad_bracket_sequence(sys: ControlSystem, m_max: int | None = None) -> list:
    """Iterated commutators ``[B_0, ..., B_m_max]`` with B_0 = -iH1.

    ``B_m = [-iH0, B_{m-1}]``; every element is traceless anti-Hermitian and
    supported on the root spaces where H1 couples.  Default m_max is n^2 - n.
    """
    n = sys.dim
    if m_max is None:
        m_max = n * n - n
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    mih0 = -1j * sys.h0
    brackets = [-1j * sys.h1]
    for _ in range(m_max):
        brackets.append(commutator(mih0, brackets[-1]))
    return brackets


def bracket_span(
    brackets: list,
    basis: GeneratorBasis,
    tol: float | None = None,
    sys: ControlSystem | None = None,
) -> SpanReport:
    """Numerical span of the bracket sequence in the off-diagonal block.

    Rank is counted from singular values above ``tol`` (default 1e-8
    relative to the largest).  ``spanned_pairs`` are the level pairs whose
    full two-dimensional root space lies inside the span.  When ``sys`` is
    given the report also carries the rank of its squared-frequency power
    matrix (the count of distinct squared transition frequencies); without
    it that field is -1.
    """
    n = basis.dim
    m = basis.n_offdiag
    rows = []
    for b in brackets:
        coords = su_coordinates(b, basis)
        if np.abs(coords[m:]).max() > 1e-9 * max(1.0, np.abs(coords).max()):
            raise ValueError("bracket has support on the diagonal block")
        norm = np.linalg.norm(coords[:m])
        # normalize rows: bracket magnitudes grow like omega^m and would
        # otherwise swamp the small-frequency directions in the SVD
        rows.append(coords[:m] / norm if norm > 0 else coords[:m])
    rows = np.array(rows)
    svals = np.linalg.svd(rows, compute_uv=False)
    cutoff = (RANK_RTOL if tol is None else tol) * max(float(svals.max()), 1e-300)
    rank = int((svals > cutoff).sum())
    _, _, vh = np.linalg.svd(rows)
    row_space = vh[:rank]
    spanned = []
    for pair, (i, j) in sorted(basis.pair_index.items(), key=lambda kv: kv[1][0]):
        in_span = True
        for idx in (i, j):
            e = np.zeros(m)
            e[idx] = 1.0
            residual = e - row_space.T @ (row_space @ e)
            if np.linalg.norm(residual) > 1e-7:
                in_span = False
                break
        if in_span:
            spanned.append(pair)
    return SpanReport(
        spanned_pairs=tuple(spanned),
        rank=rank,
        vandermonde_rank=vandermonde_rank(sys, tol) if sys is not None else -1,
        full=rank == m,
        dim=n,
        row_space=row_space,
    )


def vandermonde_matrix(sys: ControlSystem) -> np.ndarray:
    """Power matrix of the squared transition frequencies.

    Row per level pair (k, l), columns ``(-omega_kl^2)^j`` for
    ``j = 0..n(n-1)/2 - 1``.  Full row rank is equivalent to all squared
    frequencies being distinct.
    """
    omegas = [sys.omegas[p] for p in sorted(sys.omegas)]
    s = len(omegas)
    powers = np.empty((s, s))
    for i, w in enumerate(omegas):
        powers[i] = np.power(-w * w, np.arange(s))
    return powers


def vandermonde_rank(sys: ControlSystem, tol: float | None = None) -> int:
    """Numerical rank of :func:`vandermonde_matrix`."""
    v = vandermonde_matrix(sys)
    svals = np.linalg.svd(v, compute_uv=False)
    cutoff = (RANK_RTOL if tol is None else tol) * max(svals.max(), 1e-300)
    return int((svals > cutoff).sum())


def invariant_set_member(
    rho1: np.ndarray,
    rho2: np.ndarray,
    span: SpanReport,
    basis: GeneratorBasis,
    tol: float = 1e-10,
) -> bool:
    """Membership test against the stationary-feedback set.

    True iff the off-diagonal coordinates of ``[rho1, rho2]`` are orthogonal
    to the subspace spanned by the bracket sequence (which contains -iH1).
    For a full span this reduces to the commutator being diagonal.  Pairs
    with differing spectra trigger a warning; the test still runs.
    """
    rho1 = validate_density(rho1)
    rho2 = validate_density(rho2)
    if rho1.shape != rho2.shape or rho1.shape[0] != basis.dim:
        raise DimensionMismatchError("state dimensions must match the basis")
    if np.abs(spectrum(rho1) - spectrum(rho2)).max() > ISOSPECTRAL_ATOL:
        warnings.warn("states are not isospectral; membership test may be vacuous", stacklevel=2)
    comm = commutator(rho1, rho2)
    coords = su_coordinates(comm, basis)
    off = coords[: basis.n_offdiag]
    atol = tol * max(1.0, float(np.abs(comm).max()))
    projection = span.row_space @ off
    return bool(np.abs(projection).max() <= atol) if projection.size else True


def a_tilde_rank(rho_d0: np.ndarray, basis: GeneratorBasis, tol: float | None = None) -> int:
    """Rank of the off-diagonal rows of the adjoint matrix of a state.

    The adjoint matrix represents ``rho -> [-i rho_d0, rho]`` in real
    coordinates; its first n^2 - n rows are the off-diagonal block.  Full
    rank (n^2 - n) means a diagonal commutator with rho_d0 forces a zero
    commutator.
    """
    rho_d0 = validate_density(rho_d0)
    a = adjoint_matrix(rho_d0, basis)
    a_tilde = a[: basis.n_offdiag, :]
    svals = np.linalg.svd(a_tilde, compute_uv=False)
    smax = float(svals.max())
    if smax == 0.0:
        return 0
    cutoff = (RANK_RTOL if tol is None else tol) * smax
    return int((svals > cutoff).sum())


def pseudo_pure_invariant_check(rho_d0: np.ndarray, tol: float = 1e-8) -> bool:
    """Detect the exceptional pseudo-pure targets that defeat phase locking.

    The state must be pseudo-pure: eigenvalues {w, u} with u of multiplicity
    n - 1 (for n = 2 every non-maximally-mixed state qualifies).  Returns
    True iff the rank-one eigenprojector has exactly two nonzero amplitudes
    of equal modulus in the drift eigenbasis; those targets admit a family
    of phase-shifted companions on which the feedback field stays zero.
    """
    rho_d0 = validate_density(rho_d0)
    n = rho_d0.shape[0]
    evals, evecs = np.linalg.eigh(rho_d0)
    groups: list[list[int]] = []
    for i, v in enumerate(evals):
        if groups and abs(v - evals[groups[-1][-1]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    if len(groups) != 2:
        raise NotPseudoPureError(
            f"state has {len(groups)} distinct eigenvalues, need exactly 2"
        )
    sizes = sorted((len(g) for g in groups))
    if sizes != [1, n - 1]:
        raise NotPseudoPureError(
            f"eigenvalue multiplicities {sizes} are not {{1, {n - 1}}}"
        )
    simple = groups[0] if len(groups[0]) == 1 else groups[1]
    psi = evecs[:, simple[0]]
    amps = np.abs(psi)
    support = np.where(amps > tol)[0]
    if len(support) != 2:
        return False
    return bool(abs(amps[support[0]] - amps[support[1]]) <= tol)
