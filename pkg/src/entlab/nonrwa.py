"""Two atoms in one damped standing-wave cavity mode, with and without the RWA.

The composite space is atoms (product basis, index 2 q1 + q2) tensor Fock
states 0..n_max, so index = 4-state atom index * (n_max + 1) + n.  Time is in
units of 1/omega with omega = omega_c by default.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ContractViolation, CutoffInsufficient, NumericalFailure
from .lindblad import SIGMA_MINUS, SZ
from .measures import concurrence
from .qstate import DensityMatrix

TOP_FOCK_TOL = 1e-6
PATTERN_TOL = 1e-8
MAX_STEP = 0.02


@dataclass(frozen=True)
class NonRwaParams:
    g0: float = 1.0
    d_over_lambda: float = 0.0
    n_half: float = 0.5
    omega_c: float = 1.0
    omega_0: float = 0.99
    kappa: float = 0.1
    n_max: int = 40

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ContractViolation(f"n_max must be an integer >= 2, got {self.n_max}")
        if self.kappa < 0:
            raise ContractViolation("kappa must be non-negative")

    @property
    def couplings(self) -> tuple[float, float]:
        x = self.d_over_lambda
        return (
            self.g0 * math.sin(math.pi * (self.n_half - x)),
            self.g0 * math.sin(math.pi * (self.n_half + x)),
        )

    @property
    def dim(self) -> int:
        return 4 * (self.n_max + 1)


@dataclass(frozen=True)
class Operators:
    a: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    number: np.ndarray
    excitation: np.ndarray


def operators(p: NonRwaParams) -> Operators:
    n = p.n_max + 1
    i2, i_n = np.eye(2), np.eye(n)
    ann = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    a = np.kron(np.eye(4), ann)
    s1 = np.kron(np.kron(SIGMA_MINUS, i2), i_n)
    s2 = np.kron(np.kron(i2, SIGMA_MINUS), i_n)
    num = a.conj().T @ a
    exc = num + s1.conj().T @ s1 + s2.conj().T @ s2
    return Operators(a, s1, s2, num, exc)


def build_hamiltonian(p: NonRwaParams, rwa: bool) -> np.ndarray:
    """Atoms + mode + dipole coupling; rwa keeps only S+ a and S- a^dag."""
    ops = operators(p)
    n = p.n_max + 1
    i2, i_n = np.eye(2), np.eye(n)
    sz = np.kron(np.kron(SZ, i2), i_n) + np.kron(np.kron(i2, SZ), i_n)
    h = p.omega_0 * sz + p.omega_c * ops.number
    ad = ops.a.conj().T
    for g, s in zip(p.couplings, (ops.s1, ops.s2)):
        sp = s.conj().T
        if rwa:
            h = h + g * (sp @ ops.a + s @ ad)
        else:
            h = h + g * (sp + s) @ (ops.a + ad)
    return h


def initial_state(atom_ket=None, p: NonRwaParams | None = None) -> np.ndarray:
    """Atoms in `atom_ket` (default the symmetric state) and the mode in vacuum."""
    p = p or NonRwaParams()
    if atom_ket is None:
        atom_ket = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)
    vac = np.zeros(p.n_max + 1, dtype=complex)
    vac[0] = 1
    psi = np.kron(np.asarray(atom_ket, dtype=complex), vac)
    return np.outer(psi, psi.conj())


def reduced_atomic(rho_s, p: NonRwaParams) -> DensityMatrix:
    r = np.asarray(getattr(rho_s, "matrix", rho_s))
    n = p.n_max + 1
    return DensityMatrix(np.einsum("injn->ij", r.reshape(4, n, 4, n)))


def fock_populations(rho_s, p: NonRwaParams) -> np.ndarray:
    r = np.asarray(getattr(rho_s, "matrix", rho_s))
    n = p.n_max + 1
    return np.real(np.einsum("anan->n", r.reshape(4, n, 4, n)))


@dataclass(frozen=True)
class C1Result:
    c: float
    c1: float
    fallback: bool


def off_pattern(rho_atoms) -> float:
    m = np.asarray(getattr(rho_atoms, "matrix", rho_atoms))
    mask = np.ones((4, 4), dtype=bool)
    for i, j in ((0, 0), (1, 1), (2, 2), (3, 3), (1, 2), (2, 1), (0, 3), (3, 0)):
        mask[i, j] = False
    return float(np.max(np.abs(m[mask])))


def concurrence_c1(rho_atoms, tol: float = PATTERN_TOL) -> C1Result:
    """C = max(0, 2(|rho23| - sqrt(rho11 rho44))), or Wootters if off-pattern."""
    m = np.asarray(getattr(rho_atoms, "matrix", rho_atoms))
    c1 = 2 * (abs(m[1, 2]) - math.sqrt(max(m[0, 0].real, 0.0) * max(m[3, 3].real, 0.0)))
    if off_pattern(m) > tol:
        warnings.warn("atomic state is off the X pattern; using the general concurrence", RuntimeWarning, stacklevel=2)
        rho = rho_atoms if isinstance(rho_atoms, DensityMatrix) else DensityMatrix(m)
        return C1Result(concurrence(rho), c1, True)
    return C1Result(max(0.0, c1), c1, False)


@dataclass(frozen=True)
class NonRwaTrajectory:
    times: np.ndarray
    rho_atoms: np.ndarray
    c: np.ndarray
    c1: np.ndarray
    rho44: np.ndarray
    top_fock_pop: np.ndarray
    energy: np.ndarray
    trace: np.ndarray
    fallback: bool


def evolve_nonrwa(rho0, p: NonRwaParams, rwa: bool, grid, check_cutoff: bool = True, rtol=1e-10, atol=1e-12) -> NonRwaTrajectory:
    """Integrate the cavity-damped master equation on the truncated space."""
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0):
        raise ContractViolation("grid must be a strictly increasing 1-D array")
    r0 = np.asarray(getattr(rho0, "matrix", rho0), dtype=complex)
    if r0.shape != (p.dim, p.dim):
        raise ContractViolation(f"rho0 must be {p.dim}x{p.dim} for n_max = {p.n_max}")
    h = build_hamiltonian(p, rwa)
    ops = operators(p)
    a, ad, num = ops.a, ops.a.conj().T, ops.number
    k, dim = p.kappa, p.dim

    def rhs(_, y):
        r = y.reshape(dim, dim)
        out = -1j * (h @ r - r @ h)
        if k:
            out += k * (a @ r @ ad - 0.5 * (num @ r + r @ num))
        return out.ravel()

    sol = solve_ivp(rhs, (t[0], t[-1]), r0.ravel(), method="DOP853", t_eval=t, rtol=rtol, atol=atol, max_step=MAX_STEP)
    if not sol.success:
        raise NumericalFailure(f"non-RWA integration failed: {sol.message}")
    rs = sol.y.T.reshape(len(t), dim, dim)

    n = p.n_max + 1
    blocks = rs.reshape(len(t), 4, n, 4, n)
    ra = np.einsum("tinjn->tij", blocks)
    fock = np.real(np.einsum("tanan->tn", blocks))
    trace = np.real(np.einsum("tii->t", rs))
    herm = np.max(np.abs(rs - np.conj(np.transpose(rs, (0, 2, 1)))), axis=(1, 2))
    if np.max(np.abs(trace - 1)) > 1e-8 or np.max(herm) > 1e-8:
        raise NumericalFailure("trajectory lost trace or Hermiticity")
    top = fock[:, -1]
    if check_cutoff and np.max(top) > TOP_FOCK_TOL:
        raise CutoffInsufficient(
            f"top Fock population {np.max(top):.3e} exceeds {TOP_FOCK_TOL:g} with n_max = {p.n_max}"
        )
    energy = np.real(np.einsum("ij,tji->t", h, rs))

    c, c1 = np.empty(len(t)), np.empty(len(t))
    fallback = False
    for i in range(len(t)):
        res = concurrence_c1(DensityMatrix(ra[i]))
        c[i], c1[i] = res.c, res.c1
        fallback |= res.fallback
    return NonRwaTrajectory(t, ra, c, c1, np.real(ra[:, 3, 3]), top, energy, trace, fallback)


CSV_COLUMNS = ("t", "C", "rho44", "top_fock_pop")


def trajectory_rows(traj: NonRwaTrajectory):
    for i, t in enumerate(traj.times):
        yield (t, traj.c[i], traj.rho44[i], traj.top_fock_pop[i])
