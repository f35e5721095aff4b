"""Compiled inner loop for the feedback-controlled propagation.

Both states are advanced by conjugation with the exponential of the frozen
step generator, so their spectra are conserved to roundoff.  The exponential
is a Horner-evaluated Taylor polynomial with scaling-and-squaring; for the
step norms this integrator sees the truncation error sits far below double
precision, making the step operator the exact unitary at working precision.

A step whose committed update would raise the distance function by more than
``tol_rate * h`` is retried at half the substep size, up to ``max_halvings``
times within one grid step; monotonicity violations are pure discretization
artifacts, so the bisection always terminates in practice.
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_STEP_REJECTED = 1
STATUS_NOT_FINITE = 2

_TAYLOR_ORDER = 12
_SCALE_LIMIT = 0.25


@njit(cache=True, nogil=True)
def _matmul(a, b, out):
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            s = 0.0 + 0.0j
            for k in range(n):
                s += a[i, k] * b[k, j]
            out[i, j] = s


@njit(cache=True, nogil=True)
def _conjugate(u, rho, out, scratch):
    # out = u rho u^dagger
    _matmul(u, rho, scratch)
    n = u.shape[0]
    for i in range(n):
        for j in range(n):
            s = 0.0 + 0.0j
            for k in range(n):
                s += scratch[i, k] * np.conj(u[j, k])
            out[i, j] = s


@njit(cache=True, nogil=True)
def _expm_step(h, t, out, w1, w2):
    # out = exp(-1j*t*h) for Hermitian h
    n = h.shape[0]
    norm = 0.0
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += abs(h[i, j])
        if row > norm:
            norm = row
    squarings = 0
    scale = abs(t) * norm
    while scale > _SCALE_LIMIT:
        scale *= 0.5
        squarings += 1
    ts = t / 2.0**squarings
    for i in range(n):
        for j in range(n):
            w1[i, j] = -1j * ts * h[i, j]
            out[i, j] = 0.0
        out[i, i] = 1.0
    for k in range(_TAYLOR_ORDER, 0, -1):
        _matmul(w1, out, w2)
        inv = 1.0 / k
        for i in range(n):
            for j in range(n):
                out[i, j] = w2[i, j] * inv
            out[i, i] += 1.0
    for _ in range(squarings):
        _matmul(out, out, w2)
        for i in range(n):
            for j in range(n):
                out[i, j] = w2[i, j]


@njit(cache=True, nogil=True)
def _feedback(h1, rho, rhod, kappa):
    # kappa * Re Tr([-iH1, rho] rhod)
    n = rho.shape[0]
    f = 0.0
    for i in range(n):
        for j in range(n):
            s = 0.0 + 0.0j
            for k in range(n):
                s += h1[i, k] * rho[k, j] - rho[i, k] * h1[k, j]
            f += (-1j * s * rhod[j, i]).real
    return kappa * f


@njit(cache=True, nogil=True)
def _lyapunov(rho, rhod):
    # 0.5 * Tr((rho - rhod)^2), both Hermitian
    n = rho.shape[0]
    v = 0.0
    for i in range(n):
        for j in range(n):
            d = rho[i, j] - rhod[i, j]
            v += (d * np.conj(d)).real
    return 0.5 * v


@njit(cache=True, nogil=True)
def evolve(
    h0,
    h1,
    rho,
    rhod,
    dt,
    n_grid,
    stride,
    kappa,
    tol_rate,
    max_halvings,
    rec_t,
    rec_rho,
    rec_rhod,
    rec_f,
    rec_v,
):
    """Advance the coupled pair over ``n_grid`` steps of size ``dt``.

    Records into the ``rec_*`` arrays at every ``stride``-th grid step plus
    the endpoint.  Returns ``(status, n_recorded, max_violation)`` where
    ``max_violation`` is the largest committed increase of the distance
    function over a single substep (at most ``tol_rate`` per unit time).
    """
    n = rho.shape[0]
    u = np.empty((n, n), np.complex128)
    u0 = np.empty((n, n), np.complex128)
    w1 = np.empty((n, n), np.complex128)
    w2 = np.empty((n, n), np.complex128)
    hstep = np.empty((n, n), np.complex128)
    rho_try = np.empty((n, n), np.complex128)
    rhod_try = np.empty((n, n), np.complex128)

    n_rec = 0
    rec_t[n_rec] = 0.0
    rec_rho[n_rec] = rho
    rec_rhod[n_rec] = rhod
    rec_f[n_rec] = _feedback(h1, rho, rhod, kappa)
    rec_v[n_rec] = _lyapunov(rho, rhod)
    n_rec += 1

    u0_h = -1.0  # substep size for which u0 is valid
    max_violation = 0.0
    for step in range(n_grid):
        remaining = dt
        h = dt
        halvings = 0
        while remaining > 1e-15 * dt:
            hs = h if h < remaining else remaining
            f = _feedback(h1, rho, rhod, kappa)
            v0 = _lyapunov(rho, rhod)
            for i in range(n):
                for j in range(n):
                    hstep[i, j] = h0[i, j] + f * h1[i, j]
            _expm_step(hstep, hs, u, w1, w2)
            if hs != u0_h:
                _expm_step(h0, hs, u0, w1, w2)
                u0_h = hs
            _conjugate(u, rho, rho_try, w1)
            _conjugate(u0, rhod, rhod_try, w1)
            v1 = _lyapunov(rho_try, rhod_try)
            if not np.isfinite(v1):
                return STATUS_NOT_FINITE, n_rec, max_violation
            dv = v1 - v0
            if dv > tol_rate * hs:
                halvings += 1
                if halvings > max_halvings:
                    return STATUS_STEP_REJECTED, n_rec, max_violation
                h = hs * 0.5
                continue
            if dv > max_violation:
                max_violation = dv
            rho[:, :] = rho_try
            rhod[:, :] = rhod_try
            remaining -= hs
        if (step + 1) % stride == 0 or step + 1 == n_grid:
            rec_t[n_rec] = (step + 1) * dt
            rec_rho[n_rec] = rho
            rec_rhod[n_rec] = rhod
            rec_f[n_rec] = _feedback(h1, rho, rhod, kappa)
            rec_v[n_rec] = _lyapunov(rho, rhod)
            n_rec += 1
    return STATUS_OK, n_rec, max_violation
