"""Two two-level atoms coupled to a common vacuum reservoir.

Times are in units of 1/gamma and rates in units of gamma unless a
`CollectiveParams` carries a different gamma.  Dicke-basis matrices are
indexed (Psi1, Psi_s, Psi_a, Psi4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import events
from .errors import ContractViolation, NumericalFailure, PatternViolation
from .lindblad import SIGMA_MINUS, SZ, correlated_dissipator, embed, hamiltonian_part, propagate
from .measures import ConcurrenceBreakdown, concurrence
from .qstate import DensityMatrix, basis_matrix, basis_transform

MU_PERP = 0.0


@dataclass(frozen=True)
class CollectiveParams:
    """Free-space coupling record for two identical atoms."""

    gamma: float = 1.0
    gamma12: float = 0.0
    omega12: float = 0.0
    kr12: float = math.inf
    mu_dot_r: float = MU_PERP
    omega0: float = 0.0


def collective_params(kr12: float, mu_dot_r: float = MU_PERP, gamma: float = 1.0, omega0: float = 0.0) -> CollectiveParams:
    """Collective damping gamma12 and dipole-dipole shift Omega12 at separation kr12."""
    if not kr12 > 0:
        raise ContractViolation(f"kr12 must be positive, got {kr12}")
    if not 0.0 <= abs(mu_dot_r) <= 1.0:
        raise ContractViolation(f"|mu.r| must lie in [0, 1], got {mu_dot_r}")
    x = float(kr12)
    c2 = float(mu_dot_r) ** 2
    s, c = math.sin(x), math.cos(x)
    g12 = 1.5 * gamma * ((1 - c2) * s / x + (1 - 3 * c2) * (c / x**2 - s / x**3))
    o12 = 0.75 * gamma * (-(1 - c2) * c / x + (1 - 3 * c2) * (s / x**2 + c / x**3))
    return CollectiveParams(gamma, g12, o12, x, float(mu_dot_r), omega0)


def independent_params(gamma: float = 1.0) -> CollectiveParams:
    """Atoms far apart: no collective damping, no dipole-dipole shift."""
    return CollectiveParams(gamma, 0.0, 0.0, math.inf, MU_PERP)


def kr_from_separation(r12_over_lambda: float) -> float:
    return 2.0 * math.pi * r12_over_lambda


def small_kr_potential(kr12: float, mu_dot_r: float = MU_PERP, gamma: float = 1.0) -> float:
    """Quasistatic dipole-dipole potential V12, valid for 0 < kr12 < 0.3."""
    if not 0.0 < kr12 < 0.3:
        raise ContractViolation(f"small-kr form needs 0 < kr12 < 0.3, got {kr12}")
    return 0.75 * gamma / kr12**3 * (1.0 - 3.0 * mu_dot_r**2)


# --- master equation ----------------------------------------------------------


def _atom_ops():
    s1 = embed(SIGMA_MINUS, 0, (2, 2))
    s2 = embed(SIGMA_MINUS, 1, (2, 2))
    return s1, s2


def hamiltonian(p: CollectiveParams) -> np.ndarray:
    """omega0 (Sz1 + Sz2) + Omega12 (S1+ S2- + S2+ S1-), product basis."""
    s1, s2 = _atom_ops()
    h = p.omega0 * (embed(SZ, 0, (2, 2)) + embed(SZ, 1, (2, 2)))
    h = h + p.omega12 * (s1.conj().T @ s2 + s2.conj().T @ s1)
    return h


def liouvillian_product(p: CollectiveParams) -> np.ndarray:
    s1, s2 = _atom_ops()
    rates = np.array([[p.gamma, p.gamma12], [p.gamma12, p.gamma]])
    return hamiltonian_part(hamiltonian(p)) + correlated_dissipator(rates, [s1, s2])


def liouvillian_dicke(p: CollectiveParams) -> np.ndarray:
    """Master-equation generator acting on row-major vec of Dicke-basis matrices."""
    u = basis_matrix("dicke")
    # rho_d = U^dag rho_p U  =>  vec(rho_d) = (U^dag kron U^T) vec(rho_p)
    t = np.kron(u.conj().T, u.T)
    return t @ liouvillian_product(p) @ t.conj().T


@dataclass(frozen=True)
class DickeTrajectory:
    times: np.ndarray
    rho: list = field(repr=False)
    concurrence: np.ndarray = field(repr=False)

    def element(self, i: int, j: int) -> np.ndarray:
        return np.array([r.matrix[i, j] for r in self.rho])


def _dicke_matrix(rho0) -> np.ndarray:
    if isinstance(rho0, DensityMatrix):
        if rho0.basis == "dicke":
            return rho0.matrix
        return basis_transform(rho0, rho0.basis, "dicke").matrix
    m = np.asarray(rho0, dtype=complex)
    return DensityMatrix(m, "dicke").matrix


def _check_grid(grid) -> np.ndarray:
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or len(t) == 0 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ContractViolation("time grid must start at 0 and increase strictly")
    return t


TRACE_DRIFT_TOL = 1e-8


def _renormalized(m: np.ndarray) -> np.ndarray:
    # exp(L dt) with |Omega12| ~ 1e6 gamma drifts the trace by round-off
    m = 0.5 * (m + m.conj().T)
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_DRIFT_TOL:
        raise NumericalFailure(f"trace drifted to {tr:.12g}")
    return m / tr


def _trajectory(t, mats) -> DickeTrajectory:
    rhos = [DensityMatrix(_renormalized(m), "dicke") for m in mats]
    conc = np.array([concurrence(basis_transform(r, "dicke", "product")) for r in rhos])
    return DickeTrajectory(t, rhos, conc)


STIFF_OMEGA = 100.0


def _pick_method(method: str, p: CollectiveParams) -> str:
    if method != "auto":
        return method
    fast = max(abs(p.omega12), abs(p.omega0))
    return "expm" if fast > STIFF_OMEGA * p.gamma else "rk"


def evolve_master(rho0, p: CollectiveParams, grid, method: str = "auto") -> DickeTrajectory:
    """Numerically integrate the two-atom master equation.

    method "rk" is an adaptive 8th-order Runge-Kutta with rtol 1e-10 and
    atol 1e-12; "expm" uses exact exponentials of the generator.  "auto"
    picks "expm" once Omega12 or omega0 exceeds 100 gamma, where the
    Runge-Kutta step count explodes (kr12 << 1).
    """
    t = _check_grid(grid)
    m0 = _dicke_matrix(rho0)
    y = propagate(liouvillian_dicke(p), m0.ravel(), t, method=_pick_method(method, p))
    return _trajectory(t, [v.reshape(4, 4) for v in y])


def evolve_master_batch(rho0s, p: CollectiveParams, grid, method: str = "auto") -> list[np.ndarray]:
    """Evolve several initial Dicke matrices in one integration.

    Returns, for each initial state, an array of shape (len(grid), 4, 4).
    """
    t = _check_grid(grid)
    block = np.stack([_dicke_matrix(r).ravel() for r in rho0s], axis=1)
    y = propagate(liouvillian_dicke(p), block, t, method=_pick_method(method, p))
    return [y[:, :, k].reshape(len(t), 4, 4) for k in range(block.shape[1])]


# --- closed forms ---------------------------------------------------------------


def _phi(eps: float, t):
    """(exp(eps t) - 1)/eps, continuous at eps = 0."""
    t = np.asarray(t, dtype=float)
    if abs(eps) < 1e-12:
        return t + 0.5 * eps * t**2
    return np.expm1(eps * t) / eps


def analytic_matrix(rho0, p: CollectiveParams, t: float) -> np.ndarray:
    """Closed-form Dicke-basis density matrix at time t (no validation)."""
    r0 = _dicke_matrix(rho0)
    g, g12, o12, w0 = p.gamma, p.gamma12, p.omega12, p.omega0
    if t == 0:
        return r0.copy()
    G1 = 0.5 * (3 * g + g12) - 1j * (w0 - o12)
    G2 = 0.5 * (3 * g - g12) - 1j * (w0 + o12)
    G3 = 0.5 * (g + g12) - 1j * (w0 + o12)
    G4 = 0.5 * (g - g12) - 1j * (w0 - o12)
    e2 = math.exp(-2 * g * t)
    r44 = r0[3, 3].real * e2
    rss = r0[1, 1].real * math.exp(-(g + g12) * t) + r0[3, 3].real * (g + g12) * _phi(g - g12, t) * e2
    raa = r0[2, 2].real * math.exp(-(g - g12) * t) + r0[3, 3].real * (g - g12) * _phi(g + g12, t) * e2
    rsa = r0[1, 2] * np.exp(-(g + 2j * o12) * t)
    r14 = r0[0, 3] * np.exp(-(g - 2j * w0) * t)
    rs4 = r0[1, 3] * np.exp(-G1 * t)
    ra4 = r0[2, 3] * np.exp(-G2 * t)
    r1s = r0[0, 1] * np.exp(-G3 * t) + r0[1, 3] * (g + g12) / (g + 2j * o12) * (np.exp(-G3 * t) - np.exp(-G1 * t))
    r1a = r0[0, 2] * np.exp(-G4 * t) + r0[2, 3] * (g - g12) / (g - 2j * o12) * (np.exp(-G2 * t) - np.exp(-G4 * t))
    r11 = 1.0 - r44 - rss - raa
    m = np.array(
        [
            [r11, r1s, r1a, r14],
            [0, rss, rsa, rs4],
            [0, 0, raa, ra4],
            [0, 0, 0, r44],
        ],
        dtype=complex,
    )
    return np.triu(m, 1) + np.triu(m, 1).conj().T + np.diag(np.real(np.diag(m)))


def analytic_solution(rho0, p: CollectiveParams, t: float) -> DensityMatrix:
    """Closed-form solution of the two-atom master equation at time t."""
    if t == 0:
        r0 = rho0 if isinstance(rho0, DensityMatrix) and rho0.basis == "dicke" else DensityMatrix(_dicke_matrix(rho0), "dicke")
        return r0
    return DensityMatrix(analytic_matrix(rho0, p, t), "dicke")


def analytic_trajectory(rho0, p: CollectiveParams, grid) -> DickeTrajectory:
    t = _check_grid(grid)
    return _trajectory(t, [analytic_matrix(rho0, p, ti) for ti in t])


def concurrence_single_excitation(p: CollectiveParams, t):
    """Concurrence of the pair started in |e1 g2>."""
    t = np.asarray(t, dtype=float)
    return np.exp(-p.gamma * t) * np.sqrt(np.sinh(p.gamma12 * t) ** 2 + np.sin(2 * p.omega12 * t) ** 2)


def diagonal_states(rho_dicke):
    """Diagonalize the {Psi_s, Psi_a} block.

    Returns
    -------
    (rho_pp, rho_mm, psi_plus, psi_minus)
        Populations of the two diagonal states and their product-basis vectors.
        Each vector's largest component is made real and positive.
    """
    m = _dicke_matrix(rho_dicke)
    mask = np.eye(4, dtype=bool)
    mask[1, 2] = mask[2, 1] = True
    off = np.max(np.abs(m[~mask]))
    if off > 1e-10:
        raise PatternViolation(f"matrix has coherences outside the one-photon block ({off:.3e})")
    rss, raa, ras = m[1, 1].real, m[2, 2].real, m[2, 1]
    mean = 0.5 * (rss + raa)
    half = 0.5 * math.sqrt((raa - rss) ** 2 + 4 * abs(ras) ** 2)
    rpp, rmm = mean + half, mean - half
    blk = m[1:3, 1:3]
    w, v = np.linalg.eigh(0.5 * (blk + blk.conj().T))
    u = basis_matrix("dicke")
    vecs = []
    for k in (1, 0):
        c = v[:, k]
        j = int(np.argmax(np.abs(c)))
        c = c * (abs(c[j]) / c[j])
        vecs.append(u[:, 1] * c[0] + u[:, 2] * c[1])
    return rpp, max(rmm, 0.0), vecs[0], vecs[1]


def dicke_model_trajectory(rho0_diag, t, gamma: float = 1.0):
    """Populations and concurrence for gamma12 = gamma from a diagonal start.

    Parameters
    ----------
    rho0_diag : (rho11, rho_ss, rho44) initial populations.
    t : time or array of times.

    Returns
    -------
    (rho11, rho_ss, rho44), concurrence
    """
    p11, pss, p44 = (float(x) for x in rho0_diag)
    if abs(p11 + pss + p44 - 1.0) > 1e-10 or min(p11, pss, p44) < 0:
        raise ContractViolation("initial populations must be non-negative and sum to 1")
    t = np.asarray(t, dtype=float)
    e2 = np.exp(-2 * gamma * t)
    r44 = p44 * e2
    rss = pss * e2 + 2 * gamma * t * p44 * e2
    r11 = 1.0 - rss - r44
    c = np.maximum(0.0, rss - 2 * np.sqrt(np.clip(r11 * r44, 0.0, None)))
    return (r11, rss, r44), c


# --- sudden death, revival, birth -----------------------------------------------


def sudden_death_time(q: float, gamma: float = 1.0):
    """Collapse time of CorrelatedQ(q) for independent atoms, None when q <= 1/2."""
    if not 0.0 <= q <= 1.0:
        raise ContractViolation(f"q must lie in [0, 1], got {q}")
    if q <= 0.5:
        return None
    return math.log((q + math.sqrt(q * (1 - q))) / (2 * q - 1)) / gamma


def correlated_q_elements(q: float, p: CollectiveParams, t):
    """(rho11, rho_ss, rho_aa, rho44, |rho14|) for the CorrelatedQ(q) start."""
    t = np.asarray(t, dtype=float)
    g, g12 = p.gamma, p.gamma12
    e2 = np.exp(-2 * g * t)
    r44 = q * e2
    if g12 == 0.0:
        rss = q * (1 - np.exp(-g * t)) * np.exp(-g * t)
        raa = rss.copy()
    else:
        rss = q * (g + g12) * _phi(g - g12, t) * e2
        raa = q * (g - g12) * _phi(g + g12, t) * e2
    r14 = math.sqrt(q * (1 - q)) * np.exp(-g * t)
    r11 = 1.0 - r44 - rss - raa
    return r11, rss, raa, r44, r14


def correlated_q_criteria(q: float, p: CollectiveParams, t):
    r11, rss, raa, r44, r14 = correlated_q_elements(q, p, t)
    c1 = 2 * r14 - (rss + raa)
    c2 = np.abs(rss - raa) - 2 * np.sqrt(np.clip(r11 * r44, 0.0, None))
    return c1, c2


def concurrence_correlated_q(q: float, p: CollectiveParams, t) -> ConcurrenceBreakdown:
    """Concurrence breakdown of the evolved CorrelatedQ(q) state at a single time."""
    if not 0.0 <= q <= 1.0:
        raise ContractViolation(f"q must lie in [0, 1], got {q}")
    c1, c2 = correlated_q_criteria(q, p, float(t))
    c1, c2 = float(c1), float(c2)
    return ConcurrenceBreakdown(max(0.0, c1, c2), c1, c2)


def revival_times(q: float, gamma: float = 1.0):
    """The two roots of gamma t exp(-gamma t) = sqrt((1-q)/q), or None."""
    if not 0.0 < q <= 1.0:
        raise ContractViolation(f"q must lie in (0, 1], got {q}")
    rhs = math.sqrt((1 - q) / q)
    if rhs >= math.exp(-1.0):
        return None
    f = lambda x: x * math.exp(-x) - rhs
    x1 = brentq(f, 0.0, 1.0, xtol=1e-14, rtol=1e-15)
    hi = 2.0
    while f(hi) > 0:
        hi *= 2.0
    x2 = brentq(f, 1.0, hi, xtol=1e-14, rtol=1e-15)
    return x1 / gamma, x2 / gamma


def second_death_time(q: float, p: CollectiveParams) -> float:
    """Time of the second collapse; math.inf when gamma12 reaches gamma."""
    if not 0.5 < q <= 1.0:
        raise ContractViolation(f"second death needs q > 1/2, got {q}")
    g, g12 = p.gamma, p.gamma12
    if g - g12 <= 1e-12 * g:
        return math.inf
    return math.asinh(math.sqrt((1 - q) / q) * 2 * g / (g - g12)) / g


def sudden_birth_criterion(p: CollectiveParams, t):
    """|rho_ss - rho_aa| - 2 sqrt(rho11 rho44) for the doubly excited start."""
    t = np.asarray(t, dtype=float)
    g, g12 = p.gamma, p.gamma12
    e2 = np.exp(-2 * g * t)
    r44 = e2
    rss = (g + g12) * _phi(g - g12, t) * e2
    raa = (g - g12) * _phi(g + g12, t) * e2
    r11 = 1.0 - r44 - rss - raa
    return np.abs(rss - raa) - 2 * np.sqrt(np.clip(r11 * r44, 0.0, None))


def sudden_birth_trajectory(p: CollectiveParams, grid):
    """Concurrence series from |Psi4> and the first birth time (or None)."""
    t = _check_grid(grid)
    crit = sudden_birth_criterion(p, t)
    c = np.maximum(0.0, crit)
    ups = events.crossings(t, crit, f=lambda x: float(sudden_birth_criterion(p, x)), kind="up")
    return c, (ups[0][0] if ups else None)


def criteria_from_product(m: np.ndarray) -> tuple[float, float]:
    """C1 = 2(|rho14| - sqrt(rho22 rho33)), C2 = 2(|rho23| - sqrt(rho11 rho44))."""
    p = np.clip(np.real(np.diag(m)), 0.0, None)
    c1 = 2 * (abs(m[0, 3]) - math.sqrt(p[1] * p[2]))
    c2 = 2 * (abs(m[1, 2]) - math.sqrt(p[0] * p[3]))
    return c1, c2


CSV_COLUMNS = ("t", "rho11", "rho_ss", "rho_aa", "rho44", "re_rho_sa", "im_rho_sa", "abs_rho14", "C", "C1", "C2")


def trajectory_rows(traj: DickeTrajectory):
    """Rows for CSV export, one per snapshot."""
    u = basis_matrix("dicke")
    rows = []
    for t, r, c in zip(traj.times, traj.rho, traj.concurrence):
        m = r.matrix
        prod = u @ m @ u.conj().T
        c1, c2 = criteria_from_product(prod)
        rows.append(
            (t, m[0, 0].real, m[1, 1].real, m[2, 2].real, m[3, 3].real, m[1, 2].real, m[1, 2].imag, abs(m[0, 3]), c, c1, c2)
        )
    return rows


def with_omega0(p: CollectiveParams, omega0: float) -> CollectiveParams:
    return replace(p, omega0=omega0)
