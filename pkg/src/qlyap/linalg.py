"""Dense complex linear algebra for density-operator dynamics.

Provides commutators, Hilbert-Schmidt inner products, spectral matrix
exponentials, density-operator validation, orthonormal su(n) generator
bases, and the conversion between operators and their real coordinate
(Bloch/Stokes) representation.

Conventions
-----------
Generators are anti-Hermitian and orthonormal, ``Tr(s_a^† s_b) = delta_ab``.
The off-diagonal block is ordered lexicographically over level pairs
``(k, l)`` with ``k < l`` (levels numbered from 1); within each pair the
real-type generator ``(e_kl - e_lk)/sqrt(2)`` comes first and the imaginary
type ``i(e_kl + e_lk)/sqrt(2)`` second.  The diagonal block holds the n-1
traceless diagonal generators ``i(e_11 + ... + e_rr - r e_{r+1,r+1}) /
sqrt(r(r+1))``.  Bloch coordinates are taken against the Hermitian family
``xi_a = -i s_a``, so ``rho = I/n + sum_a coords[a] xi_a`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatchError,
    NotHermitianError,
    NotPositiveError,
    TraceNotOneError,
)

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-9
TOL_BASIS = 1e-10
TOL_UNITARY = 1e-10


def _as_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``a @ b - b @ a``."""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    _check_same_dim(a, b)
    return a @ b - b @ a


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``Tr(a^† b)``."""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    _check_same_dim(a, b)
    return complex(np.sum(a.conj() * b))


def hs_norm(a: np.ndarray) -> float:
    """Hilbert-Schmidt norm ``sqrt(Tr(a^† a))``."""
    a = np.asarray(a, dtype=np.complex128)
    return float(np.sqrt(np.sum(a.conj() * a).real))


def matrix_exponential(a: np.ndarray) -> np.ndarray:
    """Matrix exponential, spectrally exact for (anti-)Hermitian input.

    Hermitian and anti-Hermitian arguments are exponentiated through their
    eigendecomposition so that the result is exactly normal (unitary for
    anti-Hermitian input up to roundoff).  Anything else falls back to
    scaling-and-squaring.
    """
    a = _as_square(a, "a")
    n = a.shape[0]
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.conj().T).max() <= 1e-13 * scale:
        w, v = np.linalg.eigh(a)
        return (v * np.exp(w)) @ v.conj().T
    if np.abs(a + a.conj().T).max() <= 1e-13 * scale:
        # a = i h with h Hermitian
        w, v = np.linalg.eigh(-1j * a)
        return (v * np.exp(1j * w)) @ v.conj().T
    return scipy.linalg.expm(a)


def validate_density(m: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Validate a density operator and return it as a complex array.

    Checks Hermiticity (within ``tol`` or TOL_HERM), unit trace (TOL_TRACE)
    and positive semidefiniteness (eigenvalues >= -TOL_PSD).  Raises
    :class:`NotHermitianError`, :class:`TraceNotOneError` or
    :class:`NotPositiveError` naming the measured defect.
    """
    m = _as_square(m, "density matrix")
    tol_herm = TOL_HERM if tol is None else tol
    tol_trace = TOL_TRACE if tol is None else tol
    tol_psd = TOL_PSD if tol is None else tol
    herm_defect = float(np.abs(m - m.conj().T).max())
    if herm_defect > tol_herm:
        raise NotHermitianError(f"Hermiticity defect {herm_defect:.3e} > {tol_herm:.1e}")
    trace_defect = abs(complex(np.trace(m)) - 1.0)
    if trace_defect > tol_trace:
        raise TraceNotOneError(f"trace deviates from 1 by {trace_defect:.3e} > {tol_trace:.1e}")
    evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if evals.min() < -tol_psd:
        raise NotPositiveError(f"smallest eigenvalue {evals.min():.3e} < -{tol_psd:.1e}")
    return m


def spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted in non-increasing order."""
    rho = _as_square(rho, "rho")
    return np.sort(np.linalg.eigvalsh(rho))[::-1]


@dataclass(frozen=True)
class GeneratorBasis:
    """Orthonormal anti-Hermitian generator basis of su(n).

    Attributes
    ----------
    dim : int
        Hilbert-space dimension n.
    offdiag : ndarray, shape (n^2 - n, n, n)
        Root-space generators, lexicographic in (k, l), real type first.
    diag : ndarray, shape (n - 1, n, n)
        Traceless diagonal generators.
    pairs : tuple of (k, l)
        Level pairs, 1-based, in block order.
    pair_index : dict
        Maps a 1-based pair (k, l) to the positions of its two offdiag
        generators in the coordinate vector.
    """

    dim: int
    offdiag: np.ndarray
    diag: np.ndarray
    pairs: tuple
    pair_index: dict
    sigma: np.ndarray = field(repr=False, default=None)
    xi: np.ndarray = field(repr=False, default=None)

    @property
    def n_offdiag(self) -> int:
        return self.dim * self.dim - self.dim


def build_generator_basis(n: int) -> GeneratorBasis:
    """Construct the orthonormal su(n) generator basis for dimension n >= 2."""
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    offdiag = []
    pairs = []
    pair_index = {}
    pos = 0
    for k in range(n):
        for l in range(k + 1, n):
            real_type = np.zeros((n, n), dtype=np.complex128)
            real_type[k, l] = 1.0
            real_type[l, k] = -1.0
            imag_type = np.zeros((n, n), dtype=np.complex128)
            imag_type[k, l] = 1j
            imag_type[l, k] = 1j
            offdiag.append(real_type / np.sqrt(2.0))
            offdiag.append(imag_type / np.sqrt(2.0))
            pairs.append((k + 1, l + 1))
            pair_index[(k + 1, l + 1)] = (pos, pos + 1)
            pos += 2
    diag = []
    for r in range(1, n):
        d = np.zeros(n, dtype=np.complex128)
        d[:r] = 1.0
        d[r] = -r
        diag.append(1j * np.diag(d) / np.sqrt(r * (r + 1)))
    offdiag = np.array(offdiag)
    diag = np.array(diag)
    sigma = np.concatenate([offdiag, diag], axis=0)
    xi = -1j * sigma
    return GeneratorBasis(
        dim=n,
        offdiag=offdiag,
        diag=diag,
        pairs=tuple(pairs),
        pair_index=pair_index,
        sigma=sigma,
        xi=xi,
    )


def to_bloch(rho: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    """Real coordinates ``coords[a] = Tr(rho xi_a)`` of a Hermitian operator.

    The identity component of ``rho`` is dropped; ``from_bloch`` restores it.
    """
    rho = _as_square(rho, "rho")
    if rho.shape[0] != basis.dim:
        raise DimensionMismatchError(f"state dim {rho.shape[0]} != basis dim {basis.dim}")
    coords = np.einsum("aij,ji->a", basis.xi, rho)
    return coords.real.copy()


def from_bloch(coords: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    """Inverse of :func:`to_bloch`: ``I/n + sum_a coords[a] xi_a``.

    The result is Hermitian with unit trace; positivity is not guaranteed
    and must be checked by the caller when it matters.
    """
    coords = np.asarray(coords, dtype=np.float64)
    n = basis.dim
    if coords.shape != (n * n - 1,):
        raise DimensionMismatchError(
            f"coordinate vector must have length {n * n - 1}, got {coords.shape}"
        )
    return np.eye(n, dtype=np.complex128) / n + np.einsum("a,aij->ij", coords, basis.xi)


def su_coordinates(m: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    """Real coordinates of a traceless anti-Hermitian matrix in the sigma basis."""
    m = _as_square(m, "m")
    if m.shape[0] != basis.dim:
        raise DimensionMismatchError(f"operand dim {m.shape[0]} != basis dim {basis.dim}")
    coords = np.einsum("aji,ji->a", basis.sigma.conj(), m)
    if np.abs(coords.imag).max() > 1e-10 * max(1.0, np.abs(m).max()):
        raise ValueError("operand is not anti-Hermitian: su coordinates are complex")
    return coords.real.copy()


def adjoint_matrix(h: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    """Real matrix A of the adjoint action ``rho -> [-i h, rho]``.

    For Hermitian ``h`` the map preserves Hermitian traceless operators, and
    ``to_bloch([-i h, rho]) = A @ to_bloch(rho)`` for every ``rho``.  A is
    antisymmetric.  For a diagonal ``h`` the off-diagonal block of A is
    block-diagonal with a 2x2 rotation generator per level pair and the
    diagonal (Cartan) block vanishes.
    """
    h = _as_square(h, "h")
    if h.shape[0] != basis.dim:
        raise DimensionMismatchError(f"operator dim {h.shape[0]} != basis dim {basis.dim}")
    scale = max(1.0, float(np.abs(h).max()))
    defect = float(np.abs(h - h.conj().T).max())
    if defect > 1e-12 * scale:
        raise NotHermitianError(f"adjoint_matrix requires Hermitian h, defect {defect:.3e}")
    mih = -1j * h
    columns = np.einsum("ij,ajk->aik", mih, basis.xi) - np.einsum("aij,jk->aik", basis.xi, mih)
    a = np.einsum("bij,aji->ba", basis.xi, columns)
    return a.real.copy()
