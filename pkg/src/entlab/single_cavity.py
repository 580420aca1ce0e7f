"""Two atoms coupled to one detuned standing-wave cavity mode.

The cavity is adiabatically eliminated, leaving the atoms with level shifts
delta_i, an exchange coupling Omega12 and cavity-induced damping gamma_ij,
plus independent spontaneous emission gamma_sp.  Product-basis ordering is
(|gg>, |ge>, |eg>, |ee>), so Psi2 has atom 2 excited and Psi3 atom 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ContractViolation, PatternViolation
from .lindblad import SIGMA_MINUS, correlated_dissipator, embed, hamiltonian_part
from .qstate import DensityMatrix, PRODUCT_KETS


@dataclass(frozen=True)
class CavityParams:
    """Couplings g1, g2, detuning delta, cavity decay kappa, spontaneous rate gamma_sp."""

    g1: float = 1.0
    g2: float = 1.0
    delta: float = 30.0
    kappa: float = 1.0
    gamma_sp: float = 0.0

    def __post_init__(self):
        if self.kappa**2 / 4 + self.delta**2 <= 0:
            raise ContractViolation("kappa^2/4 + delta^2 must be positive")

    @property
    def denom(self) -> float:
        return self.kappa**2 / 4 + self.delta**2

    @property
    def delta1(self) -> float:
        return self.g1**2 * self.delta / self.denom

    @property
    def delta2(self) -> float:
        return self.g2**2 * self.delta / self.denom

    @property
    def delta12(self) -> float:
        return self.delta1 - self.delta2

    @property
    def omega12(self) -> float:
        return self.g1 * self.g2 * self.delta / self.denom

    @property
    def gamma1(self) -> float:
        return self.g1**2 * self.kappa / self.denom

    @property
    def gamma2(self) -> float:
        return self.g2**2 * self.kappa / self.denom

    @property
    def gamma12(self) -> float:
        return self.g1 * self.g2 * self.kappa / self.denom

    @property
    def eta(self) -> float:
        return self.delta / self.kappa


def standing_wave_couplings(r12_over_lambda: float, g0: float = 1.0) -> tuple[float, float]:
    """Atom 1 at an antinode, atom 2 a distance r12 away."""
    if r12_over_lambda < 0:
        raise ContractViolation("r12 must be non-negative")
    return g0, g0 * math.cos(2 * math.pi * r12_over_lambda)


# --- master equation ----------------------------------------------------------


def hamiltonian(p: CavityParams) -> np.ndarray:
    """sum_i delta_i S_i+ S_i- + Omega12 (S1+ S2- + S2+ S1-)."""
    s1 = embed(SIGMA_MINUS, 0, (2, 2))
    s2 = embed(SIGMA_MINUS, 1, (2, 2))
    h = p.delta1 * s1.conj().T @ s1 + p.delta2 * s2.conj().T @ s2
    return h + p.omega12 * (s1.conj().T @ s2 + s2.conj().T @ s1)


def liouvillian(p: CavityParams) -> np.ndarray:
    """Generator on row-major vec of product-basis matrices."""
    s1 = embed(SIGMA_MINUS, 0, (2, 2))
    s2 = embed(SIGMA_MINUS, 1, (2, 2))
    rates = np.array(
        [[p.gamma1 + p.gamma_sp, p.gamma12], [p.gamma12, p.gamma2 + p.gamma_sp]]
    )
    return hamiltonian_part(hamiltonian(p)) + correlated_dissipator(rates, [s1, s2])


def evolve_density(rho0, p: CavityParams, t: float) -> DensityMatrix:
    m0 = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    y = expm(liouvillian(p) * t) @ m0.ravel()
    m = y.reshape(4, 4)
    return DensityMatrix(0.5 * (m + m.conj().T))


# --- good cavity: Bloch picture -----------------------------------------------


@dataclass(frozen=True)
class BlochState:
    """u = rho23 + rho32, v = i(rho23 - rho32), w = rho22 - rho33, s = rho22 + rho33."""

    u: float
    v: float
    w: float
    s: float = 1.0
    rho11: float = 0.0
    rho44: float = 0.0

    @property
    def norm2(self) -> float:
        return self.u**2 + self.v**2 + self.w**2

    @property
    def rho23(self) -> complex:
        return 0.5 * (self.u - 1j * self.v)

    def density(self) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = self.rho11
        m[1, 1] = 0.5 * (self.s + self.w)
        m[2, 2] = 0.5 * (self.s - self.w)
        m[3, 3] = self.rho44
        m[1, 2] = self.rho23
        m[2, 1] = np.conj(self.rho23)
        return m

    @classmethod
    def from_density(cls, m) -> "BlochState":
        m = m.matrix if isinstance(m, DensityMatrix) else np.asarray(m)
        r23 = m[1, 2]
        return cls(
            float(2 * r23.real),
            float(-2 * r23.imag),
            float((m[1, 1] - m[2, 2]).real),
            float((m[1, 1] + m[2, 2]).real),
            float(m[0, 0].real),
            float(m[3, 3].real),
        )


def bloch_evolve(b0: BlochState, omega12: float, delta12: float, gamma_sp: float, t: float) -> BlochState:
    """Closed-form Bloch vector and populations at time t.

    Solves du/dt = -g u + d v, dv/dt = -g v - d u - 2 W w, dw/dt = -g w + 2 W v
    with W = Omega12 and d = delta12, and the population flow from the
    doubly excited state at rate 2 gamma_sp.
    """
    W, d, g = omega12, delta12, gamma_sp
    u0, v0, w0 = b0.u, b0.v, b0.w
    alpha = math.sqrt(4 * W * W + d * d)
    decay = math.exp(-g * t)
    if alpha == 0.0:
        u, v, w = u0, v0, w0
    else:
        A = 2 * W * u0 - d * w0
        B = d * u0 + 2 * W * w0
        sa, ca = math.sin(alpha * t), math.cos(alpha * t)
        osc = v0 * alpha * sa + B * ca
        u = (2 * W * A + d * osc) / alpha**2
        v = (v0 * alpha * ca - B * sa) / alpha
        w = (-d * A + 2 * W * osc) / alpha**2
    r44 = b0.rho44 * math.exp(-2 * g * t)
    s = b0.s * decay + 2 * b0.rho44 * (decay - math.exp(-2 * g * t))
    return BlochState(u * decay, v * decay, w * decay, s, 1.0 - s - r44, r44)


def w_bar(b0: BlochState, omega12: float, delta12: float, t: float) -> float:
    """w(t) e^{gamma t}, the undamped inversion."""
    return bloch_evolve(b0, omega12, delta12, 0.0, t).w


def concurrence_good_cavity(b0: BlochState, omega12: float, delta12: float, gamma_sp: float, t: float) -> float:
    """sqrt(1 - wbar^2) e^{-gamma t} for a unit initial Bloch vector in the one-photon sector."""
    if abs(b0.rho44) > 1e-12:
        raise ContractViolation("good-cavity concurrence formula needs rho44 = 0")
    wb = w_bar(b0, omega12, delta12, t)
    return math.sqrt(max(0.0, b0.norm2 - wb * wb)) * math.exp(-gamma_sp * t)


def bloch_matrix(omega12: float, delta12: float, gamma_sp: float) -> np.ndarray:
    """Generator of (u, v, w)."""
    W, d, g = omega12, delta12, gamma_sp
    return np.array([[-g, d, 0.0], [-d, -g, -2 * W], [0.0, 2 * W, -g]])


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def diffraction_pattern(initial: str, r12_over_lambda: float, tau, Gamma: float = 0.0):
    """Concurrence versus atom position and scaled time tau = (2 g0^2/Delta) t.

    Gamma = (Delta/2 g0^2) gamma_sp.  With d = (1 + cos^2 kr) tau/2:

    Psi3: |cos kr| sqrt(sinc(d)^2 tau^2 + sinc(d/2)^4 (tau/2)^4 sin^4 kr) e^{-Gamma tau}
    PsiS: sqrt(1 - sinc(d/2)^4 (tau/2)^4 sin^4 kr cos^2 kr) e^{-Gamma tau}
    """
    kr = 2 * math.pi * r12_over_lambda
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0) or Gamma < 0:
        raise ContractViolation("tau and Gamma must be non-negative")
    s, c = math.sin(kr), math.cos(kr)
    d = (1 + c * c) * tau / 2
    quart = _sinc(d / 2) ** 4 * (tau / 2) ** 4 * s**4
    if initial == "Psi3":
        core = abs(c) * np.sqrt(_sinc(d) ** 2 * tau**2 + quart)
    elif initial == "PsiS":
        core = np.sqrt(np.clip(1 - quart * c * c, 0.0, None))
    else:
        raise ContractViolation(f"diffraction pattern defined for Psi3 or PsiS, not {initial!r}")
    return core * np.exp(-Gamma * tau)


def diffraction_pattern_as_printed(initial: str, r12_over_lambda: float, tau, Gamma: float = 0.0):
    """The same surfaces with tau^4 in place of (tau/2)^4 in the quartic term.

    Kept for comparison only: this variant disagrees with the Bloch solution
    and its PsiS radicand turns negative for tau of order 2.
    """
    kr = 2 * math.pi * r12_over_lambda
    tau = np.asarray(tau, dtype=float)
    s, c = math.sin(kr), math.cos(kr)
    d = (1 + c * c) * tau / 2
    quart = _sinc(d / 2) ** 4 * tau**4 * s**4
    if initial == "Psi3":
        rad = _sinc(d) ** 2 * tau**2 + quart
        return abs(c) * np.sqrt(rad) * np.exp(-Gamma * tau)
    rad = 1 - quart * c * c
    return np.sqrt(rad.astype(complex)) * np.exp(-Gamma * tau)


def scaled_bloch_rates(r12_over_lambda: float) -> tuple[float, float]:
    """(Omega12, delta12) per unit tau in the good-cavity limit kappa << Delta, g0 = 1."""
    _, g2 = standing_wave_couplings(r12_over_lambda)
    # per unit t: Omega12 = g1 g2/Delta, delta12 = (g1^2 - g2^2)/Delta; tau = 2 t/Delta
    return 0.5 * g2, 0.5 * (1 - g2 * g2)


# --- bad cavity -----------------------------------------------------------------


def bad_cavity_matrix(p: CavityParams) -> np.ndarray:
    """Generator of Y = (rho22, rho33, u, v) in the one-photon sector.

    With g = g1 + g2, W = Omega12 and d = delta1 - delta2:
        [-g2,    0,    -g12/2,  W ]
        [ 0,    -g1,   -g12/2, -W ]
        [-g12,  -g12,  -g/2,    d ]
        [-2W,    2W,   -d,     -g/2]
    """
    g1, g2, g12, W = p.gamma1, p.gamma2, p.gamma12, p.omega12
    d = p.delta12
    g = g1 + g2
    return np.array(
        [
            [-g2, 0.0, -0.5 * g12, W],
            [0.0, -g1, -0.5 * g12, -W],
            [-g12, -g12, -0.5 * g, d],
            [-2 * W, 2 * W, -d, -0.5 * g],
        ]
    )


def bad_cavity_matrix_from_master(p: CavityParams) -> np.ndarray:
    """The same generator read off the full master equation (no spontaneous emission)."""
    lv = liouvillian(CavityParams(p.g1, p.g2, p.delta, p.kappa, 0.0))
    # coordinates (rho22, rho33, u, v) as linear maps of vec(rho)
    idx = lambda i, j: 4 * i + j
    to_y = np.zeros((4, 16), dtype=complex)
    to_y[0, idx(1, 1)] = 1
    to_y[1, idx(2, 2)] = 1
    to_y[2, idx(1, 2)] = 1
    to_y[2, idx(2, 1)] = 1
    to_y[3, idx(1, 2)] = 1j
    to_y[3, idx(2, 1)] = -1j
    from_y = np.zeros((16, 4), dtype=complex)
    from_y[idx(1, 1), 0] = 1
    from_y[idx(2, 2), 1] = 1
    from_y[idx(1, 2), 2] = 0.5
    from_y[idx(2, 1), 2] = 0.5
    from_y[idx(1, 2), 3] = -0.5j
    from_y[idx(2, 1), 3] = 0.5j
    a = to_y @ lv @ from_y
    return a.real


def bad_cavity_evolve(y0, p: CavityParams, t: float) -> np.ndarray:
    """Y(t) = exp(A t) Y0 for Y = (rho22, rho33, u, v)."""
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (4,):
        raise ContractViolation("Y must have four components")
    if t == 0:
        return y0.copy()
    return expm(bad_cavity_matrix(p) * t) @ y0


def conserved_combination(y, p: CavityParams) -> float:
    """gamma1 rho22 + gamma2 rho33 - gamma12 u."""
    return p.gamma1 * y[0] + p.gamma2 * y[1] - p.gamma12 * y[2]


def concurrence_from_y(y) -> float:
    """2|rho23| for a one-photon-sector state (rho44 = 0)."""
    return float(math.hypot(y[2], y[3]))


def bad_cavity_concurrence_closed(initial: str, p: CavityParams, t):
    """Closed-form concurrence from Psi2 or Psi3 in the bad-cavity regime (gamma_sp = 0)."""
    g1s, g2s = p.g1**2, p.g2**2
    G = p.gamma1 + p.gamma2
    t = np.asarray(t, dtype=float)
    if initial == "Psi2":
        a, b = g1s, g2s
    elif initial == "Psi3":
        a, b = g2s, g1s
    else:
        raise ContractViolation(f"closed form defined for Psi2 or Psi3, not {initial!r}")
    # the bright-state phase winds at 2 Delta/kappa in units of G/2 with the
    # coefficients above, i.e. twice eta
    eta = 2 * p.eta
    z = (
        a
        - b * np.exp(-G * t)
        - a * np.exp(-0.5 * G * (1 - 1j * eta) * t)
        + b * np.exp(-0.5 * G * (1 + 1j * eta) * t)
    )
    return 2 * abs(p.g1 * p.g2) / (g1s + g2s) ** 2 * np.abs(z)


def trapping_state(gamma1: float, gamma2: float) -> np.ndarray:
    """Product-basis vector of the state the cavity cannot damp.

    The cavity collapse operator is proportional to sqrt(gamma1) S1- +
    sqrt(gamma2) S2-, which annihilates sqrt(gamma1)|Psi2> - sqrt(gamma2)|Psi3>.
    """
    if gamma1 < 0 or gamma2 < 0 or gamma1 + gamma2 <= 0:
        raise ContractViolation("need non-negative rates with a positive sum")
    s = gamma1 + gamma2
    return math.sqrt(gamma1 / s) * PRODUCT_KETS["Psi2"] - math.sqrt(gamma2 / s) * PRODUCT_KETS["Psi3"]


def trapping_feed_rate(gamma1: float, gamma2: float) -> float:
    """Rate at which the doubly excited state populates the trapping state."""
    return (gamma2 - gamma1) ** 2 / (gamma1 + gamma2)


def steady_concurrence(initial: str, g1: float, g2: float, kappa: float = 1.0, delta: float = 0.0) -> float:
    """Stationary concurrence left behind in the trapping state."""
    if initial == "Psi2":
        return 2 * g1**3 * g2 / (g1**2 + g2**2) ** 2
    if initial == "Psi3":
        return 2 * g1 * g2**3 / (g1**2 + g2**2) ** 2
    if initial == "Psi4":
        k = kappa / (kappa**2 / 4 + delta**2)
        a, b = g1 * g1 * k, g2 * g2 * k
        return 2 * math.sqrt(a * b) * (b - a) ** 2 / (a + b) ** 3
    raise ContractViolation(f"steady state defined for Psi2, Psi3, Psi4, not {initial!r}")


# --- eigensystem and triggered entanglement -----------------------------------


def one_photon_eigensystem(rho):
    """Eigenvalues and eigenvectors of a one-photon-sector density matrix.

    Returns (values, vectors) with values (lambda1, lambda2, lambda3, lambda4)
    = (rho11, (s + R)/2, (s - R)/2, 0), s = rho22 + rho33,
    R = sqrt((rho22 - rho33)^2 + 4|rho23|^2), and vectors as columns.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    mask = np.zeros((4, 4), dtype=bool)
    mask[0, 0] = mask[1, 1] = mask[2, 2] = mask[1, 2] = mask[2, 1] = True
    off = np.max(np.abs(m[~mask]))
    if off > 1e-10:
        raise PatternViolation(f"not a one-photon-sector matrix (off-pattern {off:.3e})")
    r11, r22, r33 = m[0, 0].real, m[1, 1].real, m[2, 2].real
    r23 = m[1, 2]
    R = math.sqrt((r22 - r33) ** 2 + 4 * abs(r23) ** 2)
    s = r22 + r33
    lam = np.array([r11, 0.5 * (s + R), 0.5 * (s - R), 0.0])
    vecs = np.zeros((4, 4), dtype=complex)
    vecs[0, 0] = 1
    vecs[3, 3] = 1
    for col, l in ((1, lam[1]), (2, lam[2])):
        v = np.array([0, r23, l - r22, 0], dtype=complex)
        if np.linalg.norm(v) < 1e-14:
            # rho23 = 0: eigenvectors are Psi2, Psi3 themselves
            v = np.array([0, 1, 0, 0], dtype=complex) if (col == 1) == (r22 >= r33) else np.array([0, 0, 1, 0], dtype=complex)
        vecs[:, col] = v / np.linalg.norm(v)
    return lam, vecs


def triggered_concurrence(delta12: float, omega12: float, gamma_sp: float, t):
    """Concurrence of Psi_s under a level mismatch delta12."""
    t = np.asarray(t, dtype=float)
    alpha = math.sqrt(4 * omega12**2 + delta12**2)
    if alpha == 0:
        return np.exp(-gamma_sp * t) * np.ones_like(t)
    z = 1 - 2 * delta12**2 / alpha**2 * np.sin(alpha * t / 2) ** 2 - 1j * (delta12 / alpha) * np.sin(alpha * t)
    return np.abs(z) * np.exp(-gamma_sp * t)
