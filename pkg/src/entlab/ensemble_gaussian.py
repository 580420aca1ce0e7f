"""Gaussian dynamics of collective atomic modes coupled to damped cavity modes.

Quadratures are q = (c + c^dag)/sqrt2, p = -i(c - c^dag)/sqrt2, ordered
(q1, p1, q2, p2, ...), so the vacuum covariance is I/2.  A cavity mode damped
at rate kappa has its amplitude decay as exp(-kappa t), which makes the drift
eigenvalues of a linear mixer -kappa/2 +/- sqrt(kappa^2/4 - beta^2).

Laser phases enter the coupling as exp(+i phi).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .errors import ContractViolation, NumericalFailure

GOLDEN = (1 + math.sqrt(5)) / 2
SYMMETRY_TOL = 1e-12
UNCERTAINTY_FLOOR = -1e-9
UNSTABLE_TOL = 1e-12
KINDS = ("bs", "tms", "sms", "num")


# --- modes and states -------------------------------------------------------------


@dataclass(frozen=True)
class ModeRegistry:
    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise ContractViolation(f"duplicate mode labels in {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def count(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ContractViolation(f"unknown mode label {label!r}") from None

    def quadrature_slice(self, label) -> slice:
        i = self.index(label)
        return slice(2 * i, 2 * i + 2)


def symplectic_form(n: int) -> np.ndarray:
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceState:
    registry: ModeRegistry
    mean: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = 2 * self.registry.count
        m = np.asarray(self.mean, dtype=float).reshape(n)
        s = np.asarray(self.sigma, dtype=float)
        if s.shape != (n, n):
            raise ContractViolation(f"sigma must be {n}x{n}")
        if np.max(np.abs(s - s.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(s))):
            raise ContractViolation("covariance matrix is not symmetric")
        s = 0.5 * (s + s.T)
        lo = uncertainty_margin(s)
        if lo < UNCERTAINTY_FLOOR:
            raise ContractViolation(f"uncertainty relation violated (min eigenvalue {lo:.3e})")
        m.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "sigma", s)

    def restrict(self, labels) -> "CovarianceState":
        idx = []
        for lab in labels:
            i = self.registry.index(lab)
            idx += [2 * i, 2 * i + 1]
        return CovarianceState(ModeRegistry(tuple(labels)), self.mean[idx], self.sigma[np.ix_(idx, idx)])

    def variance(self, g) -> float:
        g = np.asarray(g, dtype=float)
        return float(g @ self.sigma @ g)

    def to_dict(self) -> dict:
        return {"labels": list(self.registry.labels), "mean": self.mean.tolist(), "sigma": self.sigma.tolist()}


def uncertainty_margin(sigma: np.ndarray) -> float:
    """Smallest eigenvalue of sigma + i Omega / 2."""
    n = sigma.shape[0] // 2
    return float(np.min(np.linalg.eigvalsh(sigma + 0.5j * symplectic_form(n))))


def symplectic_eigenvalues(sigma: np.ndarray) -> np.ndarray:
    n = sigma.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ sigma))
    return np.sort(ev)[::2]


def vacuum(registry: ModeRegistry) -> CovarianceState:
    n = registry.count
    return CovarianceState(registry, np.zeros(2 * n), 0.5 * np.eye(2 * n))


# --- quadratic Hamiltonians --------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """coeff * op + h.c. with op = c_i^dag c_j (bs), c_i^dag c_j^dag (tms), c_i^dag^2 (sms).

    kind "num" is coeff * c_i^dag c_i with real coeff and no conjugate added.
    """

    i: str
    j: str | None
    coeff: complex
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown term kind {self.kind!r}")
        if self.kind == "num" and abs(complex(self.coeff).imag) > 0:
            raise ContractViolation("number terms need a real coefficient")


@dataclass(frozen=True)
class QuadraticHamiltonian:
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def quadrature_matrix(self, registry: ModeRegistry) -> np.ndarray:
        """Real symmetric M with H = x^T M x / 2 + const."""
        n = registry.count
        g = np.zeros((2 * n, 2 * n), dtype=complex)

        def ann(label):
            v = np.zeros(2 * n, dtype=complex)
            k = registry.index(label)
            v[2 * k], v[2 * k + 1] = 1 / math.sqrt(2), 1j / math.sqrt(2)
            return v

        for t in self.terms:
            ai = ann(t.i)
            if t.kind == "num":
                g += t.coeff * np.outer(ai.conj(), ai)
                continue
            if t.kind == "sms":
                u, w = ai.conj(), ai.conj()
            else:
                aj = ann(t.j)
                u, w = ai.conj(), (aj if t.kind == "bs" else aj.conj())
            op = t.coeff * np.outer(u, w)
            g += op + op.conj()
        m = g + g.T
        if np.max(np.abs(m.imag)) > 1e-12:
            raise NumericalFailure("quadratic form is not Hermitian")
        return m.real


def drift_and_diffusion(h: QuadraticHamiltonian, kappa: float, damped, registry: ModeRegistry):
    """A and D for d sigma/dt = A sigma + sigma A^T + D and d mean/dt = A mean."""
    n = registry.count
    a = symplectic_form(n) @ h.quadrature_matrix(registry)
    d = np.zeros((2 * n, 2 * n))
    for lab in damped:
        sl = registry.quadrature_slice(lab)
        a[sl, sl] -= kappa * np.eye(2)
        d[sl, sl] += kappa * np.eye(2)
    return a, d


@dataclass(frozen=True)
class Evolved:
    state: CovarianceState
    unstable: bool


def evolve_covariance(s0: CovarianceState, a: np.ndarray, d: np.ndarray, t: float) -> Evolved:
    """Exact Gaussian propagation through a block matrix exponential."""
    unstable = bool(np.max(np.linalg.eigvals(a).real) > UNSTABLE_TOL)
    if t == 0:
        return Evolved(s0, unstable)
    n = a.shape[0]
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n], big[:n, n:], big[n:, n:] = a, d, -a.T
    f = expm(big * t)
    e = f[:n, :n]
    sigma = e @ s0.sigma @ e.T + f[:n, n:] @ e.T
    return Evolved(CovarianceState(s0.registry, e @ s0.mean, 0.5 * (sigma + sigma.T)), unstable)


def steady_covariance(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    return solve_continuous_lyapunov(a, -d)


def mixer_eigenvalues(kappa: float, coupling: float) -> tuple[complex, complex]:
    """-kappa/2 +/- sqrt(kappa^2/4 - coupling^2)."""
    root = np.sqrt(complex(kappa**2 / 4 - coupling**2))
    return (-kappa / 2 + root, -kappa / 2 - root)


# --- squeezers and mixers ------------------------------------------------------------


@dataclass(frozen=True)
class SqueezeSpec:
    kind: str
    modes: tuple
    xi: float

    def __post_init__(self):
        if self.kind not in ("single", "two-mode", "chain4"):
            raise ContractViolation(f"unknown squeeze kind {self.kind!r}")
        need = {"single": 1, "two-mode": 2, "chain4": 4}[self.kind]
        if len(self.modes) != need:
            raise ContractViolation(f"{self.kind} squeezing needs {need} modes")
        if not math.isfinite(self.xi):
            raise ContractViolation("xi must be finite")
        object.__setattr__(self, "modes", tuple(self.modes))


def unitary_symplectic(generator: QuadraticHamiltonian, registry: ModeRegistry) -> np.ndarray:
    """S with sigma -> S sigma S^T for the unitary exp(-i K), K the given quadratic form."""
    n = registry.count
    return expm(symplectic_form(n) @ generator.quadrature_matrix(registry))


def squeeze_generator(spec: SqueezeSpec) -> QuadraticHamiltonian:
    m, xi = spec.modes, spec.xi
    if spec.kind == "single":
        # exp[xi/2 (c^2 - c^dag^2)] = exp(-iK), K = -(i xi/2) c^dag^2 + h.c.
        return QuadraticHamiltonian((Term(m[0], None, -0.5j * xi, "sms"),))
    if spec.kind == "two-mode":
        # exp[xi (c1 c2 - c1^dag c2^dag)]
        return QuadraticHamiltonian((Term(m[0], m[1], -1j * xi, "tms"),))
    # exp{-xi (sum over chain edges of c_i^dag c_j^dag - h.c.)}
    edges = ((m[0], m[1]), (m[1], m[2]), (m[2], m[3]))
    return QuadraticHamiltonian(tuple(Term(x, y, -1j * xi, "tms") for x, y in edges))


def symplectic_of_squeeze(spec: SqueezeSpec, registry: ModeRegistry | None = None) -> np.ndarray:
    registry = registry or ModeRegistry(spec.modes)
    return unitary_symplectic(squeeze_generator(spec), registry)


def _t1():
    s2, s10 = math.sqrt(2), math.sqrt(10)
    return np.array(
        [
            -np.array([1j, 1, 0, 0]) / s2,
            -np.array([1j, -1, -2j, -2]) / s10,
            -np.array([0, 0, 1, 1j]) / s2,
            -np.array([2, 2j, 1, -1j]) / s10,
        ]
    )


def _t2():
    s2, s10 = math.sqrt(2), math.sqrt(10)
    return np.array(
        [
            -np.array([1j, 1j, 2, 2]) / s10,
            -1j * np.array([1, -1, 0, 0]) / s2,
            -np.array([2, 2, 1j, 1j]) / s10,
            -1j * np.array([0, 0, 1, -1]) / s2,
        ]
    )


def _t3():
    return np.array(
        [
            math.sqrt(3) / 2 * np.array([1j, -1 / 3, -1 / 3, -1 / 3]),
            math.sqrt(6) / 3 * np.array([0, 1, -0.5, -0.5]),
            np.array([0, 0, 1, -1]) / math.sqrt(2),
            0.5 * np.array([1j, 1, 1, 1]),
        ]
    )


def _golden():
    lam = GOLDEN
    k = 1 / math.sqrt(1 + lam**2)
    # columns: C_2k(1), C_-2k(1), C_2k(2), C_-2k(2); rows: d+(1), d-(1), d+(2), d-(2)
    return k * np.array(
        [
            [1, 0, lam, 0],
            [0, -1, 0, lam],
            [lam, 0, -1, 0],
            [0, lam, 0, 1],
        ],
        dtype=complex,
    )


MIXERS = {"T1": _t1, "T2": _t2, "T3": _t3, "GoldenD": _golden}


def mode_mixer(transform_id: str, registry: ModeRegistry | None = None) -> np.ndarray:
    """Rows give the new annihilation operators as combinations of the old ones."""
    if transform_id not in MIXERS:
        raise ContractViolation(f"unknown transform {transform_id!r}")
    if registry is not None and registry.count != 4:
        raise ContractViolation("mode mixers act on exactly four collective modes")
    return MIXERS[transform_id]()


def passive_symplectic(u: np.ndarray) -> np.ndarray:
    """Quadrature map of c' = U c."""
    n = u.shape[0]
    out = np.zeros((2 * n, 2 * n))
    for a in range(n):
        for b in range(n):
            z = u[a, b]
            out[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] = [[z.real, -z.imag], [z.imag, z.real]]
    return out


# --- cluster targets and nullifiers ------------------------------------------------

CLUSTER_MODES = ("C1", "C2", "C3", "C4")
GRAPHS = {
    "linear": ((0, (1,)), (1, (0, 2)), (2, (1, 3)), (3, (2,))),
    "square": ((0, (2, 3)), (1, (2, 3)), (2, (0, 1)), (3, (0, 1))),
    "tshape": ((1, (0,)), (2, (0,)), (3, (0,)), (0, (1, 2, 3))),
}
CLUSTER_TRANSFORM = {"linear_13": ("T1", (1, 1, 1, 1)), "square_13": ("T2", (1, 1, 1, 1)), "tshape_13": ("T3", (-1, -1, -1, 1))}
SINGLE_MODES = ("C0k", "C2k", "Cm2k")
FOUR_MODES = ("C2k1", "Cm2k1", "C2k2", "Cm2k2")


def nullifier_vector(a: int, neighbours, n: int = 4) -> np.ndarray:
    g = np.zeros(2 * n)
    g[2 * a + 1] = 1.0
    for b in neighbours:
        g[2 * b] -= 1.0
    return g


def nullifier_name(a: int, neighbours) -> str:
    return f"V(p{a + 1}" + "".join(f"-q{b + 1}" for b in neighbours) + ")"


def cluster_variances(s: CovarianceState, graph: str) -> list[tuple[str, float]]:
    if graph not in GRAPHS:
        raise ContractViolation(f"unknown graph {graph!r}")
    sub = s.restrict(CLUSTER_MODES)
    return [(nullifier_name(a, nb), sub.variance(nullifier_vector(a, nb))) for a, nb in GRAPHS[graph]]


def cluster_target_values(graph: str, xi: float) -> list[float]:
    e = math.exp(-2 * xi)
    return {
        "linear": [e, 1.5 * e, 1.5 * e, e],
        "square": [1.5 * e] * 4,
        "tshape": [e, e, e, 2 * e],
    }[graph]


def target_state(protocol: str, xi: float) -> CovarianceState:
    """Ideal pure state of each protocol, squeezed in the mixed frame and mapped back."""
    if protocol in CLUSTER_TRANSFORM:
        tid, signs = CLUSTER_TRANSFORM[protocol]
        reg = ModeRegistry(CLUSTER_MODES)
        mixed = ModeRegistry(("m1", "m2", "m3", "m4"))
        sq = np.eye(8)
        for k, s in enumerate(signs):
            sq = symplectic_of_squeeze(SqueezeSpec("single", (mixed.labels[k],), s * xi), mixed) @ sq
        back = np.linalg.inv(passive_symplectic(mode_mixer(tid)))
        m = back @ sq
        return CovarianceState(reg, np.zeros(8), 0.5 * m @ m.T)
    if protocol == "single_ensemble_12":
        reg = ModeRegistry(SINGLE_MODES)
        s = symplectic_of_squeeze(SqueezeSpec("single", ("C0k",), xi), reg)
        s = symplectic_of_squeeze(SqueezeSpec("two-mode", ("C2k", "Cm2k"), xi), reg) @ s
        return CovarianceState(reg, np.zeros(6), 0.5 * s @ s.T)
    if protocol == "four_mode_12":
        reg = ModeRegistry(FOUR_MODES)
        s = symplectic_of_squeeze(SqueezeSpec("chain4", FOUR_MODES, xi), reg)
        return CovarianceState(reg, np.zeros(8), 0.5 * s @ s.T)
    raise ContractViolation(f"unknown protocol {protocol!r}")


def four_mode_target_via_golden(xi: float) -> CovarianceState:
    """Same state as target_state('four_mode_12') built from two two-mode squeezers."""
    reg = ModeRegistry(FOUR_MODES)
    mixed = ModeRegistry(("dp1", "dm1", "dp2", "dm2"))
    s = symplectic_of_squeeze(SqueezeSpec("two-mode", ("dp1", "dm2"), GOLDEN * xi), mixed)
    s = symplectic_of_squeeze(SqueezeSpec("two-mode", ("dp2", "dm1"), -xi / GOLDEN), mixed) @ s
    m = np.linalg.inv(passive_symplectic(mode_mixer("GoldenD"))) @ s
    return CovarianceState(reg, np.zeros(8), 0.5 * m @ m.T)


# --- effective model checks --------------------------------------------------------


def effective_coupling(n_atoms: float, rabi: float, g: float, delta: float) -> float:
    """beta = sqrt(N) Omega g / (2 Delta)."""
    if delta == 0:
        raise ContractViolation("detuning must be nonzero")
    return math.sqrt(n_atoms) * rabi * g / (2 * delta)


@dataclass(frozen=True)
class DispersiveConfig:
    n_atoms: float
    g_u: float
    g_s: float
    delta_u: float
    delta_s: float
    rabi_u: float
    rabi_s: float
    gamma_u: float = 0.0
    gamma_s: float = 0.0
    delta_c: float | None = None
    factor: float = 20.0


@dataclass(frozen=True)
class DispersiveReport:
    ok: bool
    violations: tuple


def validate_dispersive(cfg: DispersiveConfig) -> DispersiveReport:
    bad = []
    small = {
        "g_u": cfg.g_u,
        "g_s": cfg.g_s,
        "rabi_u": cfg.rabi_u,
        "rabi_s": cfg.rabi_s,
        "gamma_u": cfg.gamma_u,
        "gamma_s": cfg.gamma_s,
    }
    for dname, dval in (("delta_u", cfg.delta_u), ("delta_s", cfg.delta_s)):
        for name, val in small.items():
            if abs(dval) < cfg.factor * abs(val):
                bad.append(f"{dname} not >> {name} ({abs(dval):g} < {cfg.factor:g} x {abs(val):g})")
    shift_u = cfg.g_u**2 / cfg.delta_u
    shift_s = cfg.g_s**2 / cfg.delta_s
    if abs(shift_u - shift_s) > 1e-9 * max(abs(shift_u), abs(shift_s)):
        bad.append("Stark balance g_u^2/delta_u = g_s^2/delta_s fails")
    if cfg.delta_c is not None:
        res = cfg.delta_c + cfg.n_atoms * shift_u
        if abs(res) > 1e-9 * max(abs(cfg.delta_c), abs(cfg.n_atoms * shift_u)):
            bad.append("cavity shift delta_c + N g_u^2/delta_u = 0 fails")
    return DispersiveReport(not bad, tuple(bad))


# --- pulse schedules ---------------------------------------------------------------


@dataclass(frozen=True)
class PulseStep:
    """Rabi frequencies in units of Omega, one (u, s) pair per ensemble."""

    duration: float
    direction: str
    rabi: tuple
    phases: tuple
    r: float
    squeeze: float = 0.0

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise ContractViolation(f"squeeze ratio r must lie in (0, 1), got {self.r}")
        if self.direction not in ("clockwise", "anticlockwise"):
            raise ContractViolation(f"bad direction {self.direction!r}")


PROTOCOLS = ("single_ensemble_12", "four_mode_12", "linear_13", "square_13", "tshape_13")

_H, _P, _T = math.pi / 2, math.pi, 3 * math.pi / 2


def _cluster_table(protocol: str, variant: str):
    """(Omega_u per ensemble, Omega_s/r per ensemble, phi_u, phi_s) for the four steps."""
    s2, s3, s6, s10 = math.sqrt(2), math.sqrt(3), math.sqrt(6), math.sqrt(10)
    a, b = 2 / s10, 4 / s10
    if protocol == "linear_13":
        rows = [
            ((s2, s2, 0, 0), (s2, s2, 0, 0), (_T, _P, 0, 0), (_H, _P, 0, 0)),
            ((a, a, b, b), (a, a, b, b), (_T, 0, _H, 0), (_H, 0, _T, 0)),
            ((0, 0, s2, s2), (0, 0, s2, s2), (0, 0, _T, _P), (0, 0, _H, _P)),
            ((b, b, a, a), (b, b, a, a), (0, _H, 0, _T), (0, _T, 0, _H)),
        ]
        if variant == "corrected":
            rows[2] = ((0, 0, s2, s2), (0, 0, s2, s2), (0, 0, _H, _P), (0, 0, _H, 0))
        return rows, None
    if protocol == "square_13":
        rows = [
            ((a, a, b, b), (a, a, b, b), (_T, _T, _P, _P), (_H, _H, _P, _P)),
            ((s2, s2, 0, 0), (s2, s2, 0, 0), (_T, _H, 0, 0), (_H, _T, 0, 0)),
            ((b, b, a, a), (b, b, a, a), (_T, _T, _T, _T), (_P, _P, _H, _H)),
            ((0, 0, s2, s2), (0, 0, s2, s2), (0, 0, _T, _H), (0, 0, _H, _T)),
        ]
        # the tabulated entries leave r off ensembles 3, 4 in rows 1, 3, 4
        no_r = {0: (2, 3), 2: (2, 3), 3: (2, 3)}
        if variant == "corrected":
            rows[2] = ((b, b, a, a), (b, b, a, a), (_P, _P, _T, _T), (_P, _P, _H, _H))
            no_r = {}
        return rows, no_r
    if protocol == "tshape_13":
        rows = [
            ((s3, 1 / s3, 1 / s3, 1 / s3), (s3, 1 / s3, 1 / s3, 1 / s3), (_H, _P, _P, _P), (_T, _P, _P, _P)),
            ((0, 2 * s6 / 3, s6 / 3, s6 / 3), (0, 2 * s6 / 3, s6 / 3, s6 / 3), (0, 0, _P, _P), (0, 0, _P, _P)),
            ((0, 0, s2, s2), (0, 0, s2, s2), (0, 0, 0, _P), (0, 0, 0, _P)),
            ((1, 1, 1, 1), (1, 1, 1, 1), (_H, 0, 0, 0), (_T, 0, 0, 0)),
        ]
        no_r = {0: (0,), 1: (1,)}
        if variant == "corrected":
            # flip the s phases of the first three steps so h1..h3 squeeze the other quadrature
            flipped = []
            for k, (u, s, pu, ps) in enumerate(rows):
                if k < 3:
                    ps = tuple((x + _P) % (2 * _P) if u[i] else 0 for i, x in enumerate(ps))
                flipped.append((u, s, pu, ps))
            rows, no_r = flipped, {}
        return rows, no_r
    raise ContractViolation(f"unknown protocol {protocol!r}")


def pulse_schedule(protocol: str, r: float, tau: float = 4.0, variant: str = "corrected") -> list[PulseStep]:
    """Ordered pulse steps; tau is in units of 1/kappa.

    variant "printed" keeps the tabulated entries as they stand, "corrected"
    is the version whose every step prepares the intended mixed mode.
    """
    if variant not in ("corrected", "printed"):
        raise ContractViolation(f"unknown variant {variant!r}")
    if not 0 < r < 1:
        raise ContractViolation(f"squeeze ratio r must lie in (0, 1), got {r}")
    if protocol == "single_ensemble_12":
        xi = math.atanh(r)
        return [
            PulseStep(tau, "clockwise", ((1.0, r),), ((0.0, 0.0),), r, xi),
            PulseStep(tau, "anticlockwise", ((1.0, r),), ((0.0, 0.0),), r, xi),
        ]
    if protocol == "four_mode_12":
        lam = GOLDEN
        xi = math.atanh(r) / lam
        r2 = math.tanh(xi / lam)
        k = 1 / math.sqrt(1 + lam**2)
        return [
            PulseStep(tau, "clockwise", ((k, lam * k * r), (lam * k, k * r)), ((0, 0), (0, 0)), r, xi),
            PulseStep(tau, "anticlockwise", ((lam * k, k * r), (k, lam * k * r)), ((0, 0), (0, 0)), r, xi),
            PulseStep(tau, "clockwise", ((lam * k, k * r2), (k, lam * k * r2)), ((0, 0), (_P, _P)), r2, xi),
            PulseStep(tau, "anticlockwise", ((k, lam * k * r2), (lam * k, k * r2)), ((_P, _P), (0, 0)), r2, xi),
        ]
    rows, no_r = _cluster_table(protocol, variant)
    no_r = no_r or {}
    xi = math.atanh(r)
    steps = []
    for k, (u, s, pu, ps) in enumerate(rows):
        rabi = tuple((u[i], s[i] * (1.0 if i in no_r.get(k, ()) else r)) for i in range(4))
        steps.append(PulseStep(tau, "clockwise", rabi, tuple(zip(pu, ps)), r, xi))
    return steps


# --- protocol Hamiltonians and runs ------------------------------------------------


def protocol_registry(protocol: str) -> tuple[ModeRegistry, tuple, tuple]:
    """(registry, collective labels, damped cavity labels)."""
    if protocol in CLUSTER_TRANSFORM:
        return ModeRegistry(CLUSTER_MODES + ("a",)), CLUSTER_MODES, ("a",)
    if protocol == "single_ensemble_12":
        return ModeRegistry(SINGLE_MODES + ("a+", "a-")), SINGLE_MODES, ("a+", "a-")
    if protocol == "four_mode_12":
        labels = ("C0k1", "C0k2") + FOUR_MODES + ("a+", "a-")
        return ModeRegistry(labels), FOUR_MODES, ("a+", "a-")
    raise ContractViolation(f"unknown protocol {protocol!r}")


def _pair(cav, c, c_dag, bu, bs):
    out = []
    if bu:
        out.append(Term(cav, c, bu, "bs"))
    if bs:
        out.append(Term(cav, c_dag, bs, "tms"))
    return out


def step_hamiltonian(protocol: str, step: PulseStep, beta_unit: float) -> QuadraticHamiltonian:
    """Coupling Hamiltonian of one pulse step; beta_unit is the coupling per unit Rabi frequency."""
    terms = []
    for n, ((ou, os_), (pu, ps)) in enumerate(zip(step.rabi, step.phases)):
        bu = beta_unit * ou * np.exp(1j * pu)
        bs = beta_unit * os_ * np.exp(1j * ps)
        if protocol in CLUSTER_TRANSFORM:
            terms += _pair("a", CLUSTER_MODES[n], CLUSTER_MODES[n], bu, bs)
            continue
        if protocol == "single_ensemble_12":
            c0, cp, cm = "C0k", "C2k", "Cm2k"
        else:
            c0, cp, cm = f"C0k{n + 1}", f"C2k{n + 1}", f"Cm2k{n + 1}"
        if step.direction == "clockwise":
            terms += _pair("a+", c0, c0, bu, bs) + _pair("a-", cp, cm, bu, bs)
        else:
            terms += _pair("a-", c0, c0, bu, bs) + _pair("a+", cm, cp, bu, bs)
    return QuadraticHamiltonian(tuple(terms))


def step_mixer_coupling(protocol: str, step: PulseStep, beta_scale: float) -> float:
    """Effective linear-mixer strength beta sqrt(1 - r^2) of a step."""
    return beta_scale * math.sqrt(1 - step.r**2)


def beta_unit_for(protocol: str, beta_scale: float) -> float:
    # cluster steps couple with total amplitude 2 Omega; the others are normalized to 1
    return beta_scale / 2 if protocol in CLUSTER_TRANSFORM else beta_scale


@dataclass(frozen=True)
class StepReport:
    index: int
    eigenvalues: tuple
    expected: tuple
    max_eig_error: float
    min_uncertainty: float
    unstable: bool


@dataclass(frozen=True)
class ProtocolResult:
    protocol: str
    final: CovarianceState
    full: CovarianceState
    steps: tuple
    snapshots: tuple
    unstable: bool

    def report(self) -> dict:
        return {
            "protocol": self.protocol,
            "steps": [
                {
                    "index": s.index,
                    "max_eig_error": s.max_eig_error,
                    "min_uncertainty": s.min_uncertainty,
                    "unstable": s.unstable,
                }
                for s in self.steps
            ],
        }


def _match_error(eigs: np.ndarray, expected) -> float:
    return max(float(np.min(np.abs(eigs - e))) for e in expected)


def run_protocol(
    protocol: str,
    r: float,
    kappa: float = 1.0,
    beta_scale: float = 5.0,
    tau: float | None = None,
    snapshots_per_step: int = 20,
    variant: str = "corrected",
) -> ProtocolResult:
    """Start from vacuum and apply the pulse schedule with cavity damping."""
    tau = 4.0 / kappa if tau is None else tau
    if not stability_ok(r, kappa, beta_scale):
        warnings.warn(f"beta sqrt(1 - r^2) = {beta_scale * math.sqrt(1 - r * r):.3g} <= kappa/2: slow relaxation", RuntimeWarning, stacklevel=2)
    reg, collective, damped = protocol_registry(protocol)
    steps = pulse_schedule(protocol, r, tau, variant)
    unit = beta_unit_for(protocol, beta_scale)
    state = vacuum(reg)
    reports, snaps = [], [(0.0, state)]
    t_now, any_unstable = 0.0, False
    for k, step in enumerate(steps):
        h = step_hamiltonian(protocol, step, unit)
        a, d = drift_and_diffusion(h, kappa, damped, reg)
        eigs = np.linalg.eigvals(a)
        expected = mixer_eigenvalues(kappa, step_mixer_coupling(protocol, step, beta_scale))
        dt = step.duration / snapshots_per_step
        lo = math.inf
        unstable = False
        for _ in range(snapshots_per_step):
            ev = evolve_covariance(state, a, d, dt)
            state, unstable = ev.state, unstable or ev.unstable
            t_now += dt
            lo = min(lo, uncertainty_margin(state.sigma))
            snaps.append((t_now, state))
        any_unstable |= unstable
        reports.append(StepReport(k, tuple(eigs), expected, _match_error(eigs, expected), lo, unstable))
    return ProtocolResult(protocol, state.restrict(collective), state, tuple(reports), tuple(snaps), any_unstable)


def protocol_graph(protocol: str) -> str:
    return {"linear_13": "linear", "square_13": "square", "tshape_13": "tshape"}[protocol]


def stability_ok(r: float, kappa: float, beta_scale: float) -> bool:
    return beta_scale * math.sqrt(1 - r**2) > kappa / 2
