"""Liouvillian superoperators in row-major vectorization.

With vec stacking rows, vec(A rho B) = (A kron B^T) vec(rho).
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import NumericalFailure

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e| with g = 0, e = 1
SZ = np.diag([-0.5, 0.5]).astype(complex)


def embed(op: np.ndarray, site: int, dims) -> np.ndarray:
    """Operator acting on one tensor factor, identity on the rest."""
    out = np.ones((1, 1), dtype=complex)
    for k, d in enumerate(dims):
        out = np.kron(out, op if k == site else np.eye(d, dtype=complex))
    return out


def hamiltonian_part(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    eye = np.eye(n)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def correlated_dissipator(rates: np.ndarray, ops) -> np.ndarray:
    """sum_ij rates[i, j] (L_j rho L_i^dag - 1/2 {L_i^dag L_j, rho})."""
    n = ops[0].shape[0]
    eye = np.eye(n)
    out = np.zeros((n * n, n * n), dtype=complex)
    for i, li in enumerate(ops):
        for j, lj in enumerate(ops):
            g = rates[i, j]
            if g == 0:
                continue
            m = li.conj().T @ lj
            out += g * (np.kron(lj, li.conj()) - 0.5 * (np.kron(m, eye) + np.kron(eye, m.T)))
    return out


def liouvillian(h: np.ndarray, c_ops=(), rates=None) -> np.ndarray:
    """Superoperator of -i[H, rho] + sum_k r_k D[L_k] rho."""
    out = hamiltonian_part(np.asarray(h, dtype=complex))
    if c_ops:
        r = np.ones(len(c_ops)) if rates is None else np.asarray(rates, dtype=float)
        out = out + correlated_dissipator(np.diag(r), list(c_ops))
    return out


def propagate(lv: np.ndarray, y0: np.ndarray, times, method: str = "rk", rtol=1e-10, atol=1e-12):
    """Evolve dy/dt = lv y from t = times[0].

    `y0` may be a single vector or a (n, k) block of vectors evolved together.
    Returns an array of shape (len(times), n) or (len(times), n, k).

    method "rk" uses an adaptive 8th-order Runge-Kutta integrator; "expm" uses
    exact propagators exp(lv dt) between consecutive grid points.
    """
    t = np.asarray(times, dtype=float)
    y0 = np.asarray(y0, dtype=complex)
    shape = y0.shape
    flat = y0.reshape(shape[0], -1)
    if len(t) == 0:
        raise NumericalFailure("empty time grid")
    if np.any(np.diff(t) <= 0):
        raise NumericalFailure("time grid must be strictly increasing")
    if method == "expm":
        out = np.empty((len(t),) + flat.shape, dtype=complex)
        y = flat.copy()
        out[0] = y
        cache = {}
        for i in range(1, len(t)):
            dt = t[i] - t[i - 1]
            key = round(dt, 15)
            if key not in cache:
                cache[key] = expm(lv * dt)
            y = cache[key] @ y
            out[i] = y
        return out.reshape((len(t),) + shape)
    if method != "rk":
        raise ValueError(f"unknown propagation method {method!r}")
    k = flat.shape[1]
    n = shape[0]

    def rhs(_, y):
        return (lv @ y.reshape(n, k)).ravel()

    if len(t) == 1:
        return flat.reshape((1,) + shape).copy()
    sol = solve_ivp(rhs, (t[0], t[-1]), flat.ravel(), method="DOP853", t_eval=t, rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericalFailure(f"integrator failed: {sol.message}")
    return sol.y.T.reshape((len(t),) + shape)
