"""Critical points of the distance function and their linearized stability.

For a stationary diagonal target the fixed points of the closed loop are the
diagonal rearrangements of the target's weights.  Near each one the real
Bloch-coordinate vector field linearizes to ``D = A0 + (A1 s0)(A1 sd)^T``
(gain 1), which vanishes on the diagonal (Cartan) block and restricts to the
off-diagonal block as ``B = B0 - u v^T`` with ``B0`` the block rotation
generator of the drift.  Eigenvalue real parts of B classify each point.

When the target spectrum is degenerate, level pairs whose weights coincide
at a given rearrangement are isotropy directions of that point, not state-
manifold directions; they decouple exactly and contribute structural ``+-i
omega`` pairs.  Classification is therefore taken on the complementary
(tangent) block, while the report keeps the full spectrum and the counts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionTooLargeError,
    LeakageIntoCartanError,
    NotFixedPointError,
    NotStationaryError,
)
from .linalg import GeneratorBasis, adjoint_matrix, build_generator_basis, to_bloch
from .structure import ControlSystem

TOL_RE_REL = 1e-7  # |Re| below this times the spectral radius counts as imaginary
TOL_CARTAN_LEAK = 1e-10
TOL_DEGENERACY = 1e-9

SINK = "sink"
SOURCE = "source"
SADDLE = "saddle"
CENTRE_BEARING = "centre_bearing"


@dataclass(frozen=True)
class CriticalPoint:
    """A diagonal rearrangement of the target weights.

    ``permutation[k]`` is the 0-based index into the target's diagonal whose
    weight sits at level k, so ``rho0 = diag(w[permutation])``.
    """

    permutation: tuple
    rho0: np.ndarray
    critical_value: float


@dataclass(frozen=True)
class SpectrumClassification:
    eigenvalues: np.ndarray
    n_negative: int
    n_positive: int
    n_imaginary: int
    classification: str


@dataclass(frozen=True)
class FixedPointReport:
    """Stability data for one critical point.

    ``eigenvalues`` and the three counts cover the full off-diagonal block;
    ``classification`` is decided on the tangent block, i.e. after removing
    the isotropy pairs (level pairs with equal weights at this point), which
    only differs from the full block for degenerate spectra.
    """

    point: CriticalPoint
    eigenvalues: np.ndarray
    n_negative: int
    n_positive: int
    n_imaginary: int
    classification: str
    stable_manifold_dim: int
    isotropy_pairs: tuple = ()
    structural_imaginary_expected: int = 0


def enumerate_critical_points(spectrum_d, max_n: int = 6) -> list:
    """All distinct diagonal rearrangements of the given weights.

    Duplicate arrangements from equal weights are collapsed; the identity
    arrangement (the target itself, critical value 0) comes first and the
    order reversal last.  ``spectrum_d`` is the target's diagonal in the
    drift eigenbasis and must sum to one.
    """
    w = np.asarray(spectrum_d, dtype=np.float64)
    n = w.size
    if n > max_n:
        raise DimensionTooLargeError(f"n = {n} exceeds the enumeration limit {max_n}")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {w.sum():.12g}")
    seen = {}
    for perm in itertools.permutations(range(n)):
        key = tuple(w[list(perm)])
        if key not in seen:
            seen[key] = perm
    identity_key = tuple(w)
    inversion_key = tuple(w[::-1])
    middle = [k for k in seen if k != identity_key and k != inversion_key]
    middle.sort()
    ordered = [identity_key] + middle
    if inversion_key != identity_key:
        ordered.append(inversion_key)
    points = []
    for key in ordered:
        perm = seen[key]
        arranged = w[list(perm)]
        value = float(np.sum(w * (w - arranged)))
        points.append(
            CriticalPoint(
                permutation=perm,
                rho0=np.diag(arranged).astype(np.complex128),
                critical_value=value,
            )
        )
    return points


def linearization(
    sys: ControlSystem,
    s0: np.ndarray,
    sd: np.ndarray,
    basis: GeneratorBasis,
    tol: float = 1e-9,
) -> np.ndarray:
    """Jacobian ``A0 + (A1 s0)(A1^T sd)^T`` of the closed loop at a fixed point.

    ``s0`` must actually be a fixed point (feedback value below ``tol``).
    For a diagonal stationary target the result vanishes identically on the
    Cartan block.
    """
    s0 = np.asarray(s0, dtype=np.float64)
    sd = np.asarray(sd, dtype=np.float64)
    a0 = adjoint_matrix(sys.h0, basis)
    a1 = adjoint_matrix(sys.h1, basis)
    f0 = float(sd @ (a1 @ s0))
    if abs(f0) > tol:
        raise NotFixedPointError(f"feedback value {f0:.3e} exceeds {tol:.1e} at s0")
    return a0 + np.outer(a1 @ s0, a1.T @ sd)


def restrict_to_tangent(dfull: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    """Leading off-diagonal block of the linearization.

    Raises :class:`LeakageIntoCartanError` if the coupling between the
    off-diagonal and Cartan blocks exceeds 1e-10 (relative).
    """
    m = basis.n_offdiag
    dfull = np.asarray(dfull, dtype=np.float64)
    scale = max(1.0, float(np.abs(dfull).max()))
    leak = 0.0
    if dfull.shape[0] > m:
        leak = max(float(np.abs(dfull[m:, :]).max()), float(np.abs(dfull[:, m:]).max()))
    if leak > TOL_CARTAN_LEAK * scale:
        raise LeakageIntoCartanError(f"Cartan coupling {leak:.3e} exceeds tolerance")
    return dfull[:m, :m].copy()


def classify_fixed_point(b: np.ndarray, tol_re: float | None = None) -> SpectrumClassification:
    """Eigenvalues of a real block with sign counts and classification.

    ``tol_re`` defaults to 1e-7 times the spectral radius; real parts within
    it count as purely imaginary.
    """
    b = np.asarray(b, dtype=np.float64)
    evals = np.linalg.eigvals(b)
    order = np.lexsort((evals.imag, evals.real))
    evals = evals[order]
    if tol_re is None:
        radius = float(np.abs(evals).max()) if evals.size else 0.0
        tol_re = TOL_RE_REL * max(radius, 1e-300)
    n_neg = int((evals.real < -tol_re).sum())
    n_pos = int((evals.real > tol_re).sum())
    n_imag = evals.size - n_neg - n_pos
    if n_imag > 0:
        cls = CENTRE_BEARING
    elif n_neg == evals.size:
        cls = SINK
    elif n_pos == evals.size:
        cls = SOURCE
    else:
        cls = SADDLE
    return SpectrumClassification(
        eigenvalues=evals,
        n_negative=n_neg,
        n_positive=n_pos,
        n_imaginary=n_imag,
        classification=cls,
    )


def _isotropy_pairs(arranged: np.ndarray, basis: GeneratorBasis) -> list:
    pairs = []
    for (k, l), _ in sorted(basis.pair_index.items(), key=lambda kv: kv[1][0]):
        if abs(arranged[k - 1] - arranged[l - 1]) <= TOL_DEGENERACY:
            pairs.append((k, l))
    return pairs


def _drop_pairs(b: np.ndarray, pairs: list, basis: GeneratorBasis) -> np.ndarray:
    drop = []
    for p in pairs:
        i, j = basis.pair_index[p]
        drop += [i, j]
    keep = [i for i in range(b.shape[0]) if i not in drop]
    return b[np.ix_(keep, keep)]


def expected_structural_imaginary(weights: np.ndarray) -> int:
    """Structurally imaginary eigenvalue pairs at a non-target rearrangement.

    Each group of n_l equal weights contributes C(n_l, 2) pairs through the
    point's own isotropy and the same count again through the target's, for
    ``2 sum_l C(n_l, 2)`` in total.
    """
    w = np.sort(np.asarray(weights, dtype=np.float64))
    count = 0
    run = 1
    for i in range(1, w.size + 1):
        if i < w.size and abs(w[i] - w[i - 1]) <= TOL_DEGENERACY:
            run += 1
        else:
            count += run * (run - 1) // 2
            run = 1
    return 2 * count


def stability_survey(
    sys: ControlSystem,
    rho_d: np.ndarray,
    basis: GeneratorBasis | None = None,
    max_n: int = 6,
) -> list:
    """Classify every critical point of a stationary diagonal target.

    Raises :class:`NotStationaryError` unless ``rho_d`` is diagonal in the
    drift eigenbasis.  For degenerate spectra each report classifies the
    tangent block (isotropy pairs removed) and records the expected count of
    structurally imaginary pairs.
    """
    rho_d = np.asarray(rho_d, dtype=np.complex128)
    if basis is None:
        basis = build_generator_basis(sys.dim)
    scale = max(1.0, float(np.abs(rho_d).max()))
    comm_norm = float(np.abs(sys.h0 @ rho_d - rho_d @ sys.h0).max())
    off_norm = float(np.abs(rho_d - np.diag(np.diag(rho_d))).max())
    if comm_norm > 1e-9 * scale or off_norm > 1e-9 * scale:
        raise NotStationaryError(
            f"target is not stationary/diagonal: |[H0, rho_d]| = {comm_norm:.3e}, "
            f"off-diagonal norm = {off_norm:.3e}"
        )
    w = np.diag(rho_d).real
    sd = to_bloch(rho_d, basis)
    points = enumerate_critical_points(w, max_n=max_n)
    n_bar = expected_structural_imaginary(w)
    reports = []
    for point in points:
        s0 = to_bloch(point.rho0, basis)
        dfull = linearization(sys, s0, sd, basis)
        b = restrict_to_tangent(dfull, basis)
        full = classify_fixed_point(b)
        iso = _isotropy_pairs(np.diag(point.rho0).real, basis)
        if iso:
            tangent = classify_fixed_point(_drop_pairs(b, iso, basis))
            cls = tangent.classification
        else:
            cls = full.classification
        is_target = point.critical_value == 0.0 and np.allclose(point.rho0, rho_d)
        reports.append(
            FixedPointReport(
                point=point,
                eigenvalues=full.eigenvalues,
                n_negative=full.n_negative,
                n_positive=full.n_positive,
                n_imaginary=full.n_imaginary,
                classification=cls,
                stable_manifold_dim=full.n_negative,
                isotropy_pairs=tuple(iso),
                structural_imaginary_expected=0 if is_target else n_bar,
            )
        )
    return reports
