"""Two atom-cavity pairs with no mutual coupling.

Subsystems are atom A, atom B, cavity a, cavity b, each truncated to two
levels and ordered (A, B, a, b) in the 16-dim space.  Detunings follow
2 Delta_j = omega0 - omega_j.

One-excitation basis: xi1 = |e g 0 0>, xi2 = |g e 0 0>, xi3 = |g g 1 0>,
xi4 = |g g 0 1>.  Two-excitation basis: chi1 = |e e 0 0>, chi2 = |e g 0 1>,
chi3 = |g e 1 0>, chi4 = |g g 1 1>, plus the ground state chi0 = |g g 0 0>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ContractViolation
from .measures import concurrence
from .qstate import DensityMatrix, partial_trace

SUBSYSTEMS = {"A": 0, "B": 1, "a": 2, "b": 3}
PAIRS = ("AB", "ab", "Aa", "Ab", "Ba", "Bb")

ONE_INDEX = (0b1000, 0b0100, 0b0010, 0b0001)
TWO_INDEX = (0b1100, 0b1001, 0b0110, 0b0011)
GROUND_INDEX = 0


@dataclass(frozen=True)
class JCParams:
    g1: float = 1.0
    g2: float = 1.0
    delta1: float = 0.0
    delta2: float = 0.0

    def rabi(self, i: int) -> float:
        g, d = (self.g1, self.delta1) if i == 1 else (self.g2, self.delta2)
        om = math.hypot(g, d)
        if om <= 0:
            raise ContractViolation("Rabi frequency must be positive")
        return om


@dataclass(frozen=True)
class AmplitudeVector:
    """Amplitudes d1..d4 of one sector, plus d0 on the ground state for sector two."""

    sector: str
    d: np.ndarray = field(repr=False)
    d0: complex = 0.0

    def __post_init__(self):
        d = np.asarray(self.d, dtype=complex).reshape(4)
        if self.sector not in ("one", "two"):
            raise ContractViolation(f"sector must be 'one' or 'two', got {self.sector!r}")
        if self.sector == "one" and self.d0 != 0:
            raise ContractViolation("the one-excitation sector carries no ground amplitude")
        norm = float(np.sum(np.abs(d) ** 2) + abs(self.d0) ** 2)
        if abs(norm - 1.0) > 1e-10:
            raise ContractViolation(f"amplitudes not normalized (norm^2 = {norm:.12f})")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    def ket16(self) -> np.ndarray:
        v = np.zeros(16, dtype=complex)
        idx = ONE_INDEX if self.sector == "one" else TWO_INDEX
        for k, i in enumerate(idx):
            v[i] = self.d[k]
        v[GROUND_INDEX] += self.d0
        return v


@dataclass(frozen=True)
class PairConcurrences:
    c_AB: float
    c_ab: float
    c_Aa: float
    c_Ab: float
    c_Ba: float
    c_Bb: float

    def as_dict(self) -> dict:
        return {p: getattr(self, "c_" + p) for p in PAIRS}

    def values(self) -> np.ndarray:
        return np.array([getattr(self, "c_" + p) for p in PAIRS])


def amplitudes(sector: str, d, d0: complex = 0.0) -> AmplitudeVector:
    return AmplitudeVector(sector, np.asarray(d, dtype=complex), d0)


# --- one excitation -------------------------------------------------------------


def _one_pair(d_atom, d_field, g, delta, t):
    om = math.hypot(g, delta)
    if om == 0:
        return d_atom, d_field
    dl, be = delta / om, g / om
    ph = np.exp(1j * delta * t)
    c, s = np.cos(om * t), np.sin(om * t)
    da = ph * (d_atom * c - 1j * (dl * d_atom + be * d_field) * s)
    df = ph * (d_field * c + 1j * (dl * d_field - be * d_atom) * s)
    return da, df


def single_exc_evolve(d0: AmplitudeVector, p: JCParams, t: float) -> AmplitudeVector:
    """Closed-form one-excitation amplitudes at time t."""
    if d0.sector != "one":
        raise ContractViolation("single_exc_evolve needs a one-excitation vector")
    d1, d2, d3, d4 = d0.d
    n1, n3 = _one_pair(d1, d3, p.g1, p.delta1, t)
    n2, n4 = _one_pair(d2, d4, p.g2, p.delta2, t)
    return AmplitudeVector("one", np.array([n1, n2, n3, n4]))


def single_exc_generator(p: JCParams) -> np.ndarray:
    """H with i dd/dt = H d for (d1, d2, d3, d4)."""
    return np.array(
        [
            [0, 0, p.g1, 0],
            [0, 0, 0, p.g2],
            [p.g1, 0, -2 * p.delta1, 0],
            [0, p.g2, 0, -2 * p.delta2],
        ],
        dtype=complex,
    )


def pair_concurrences_single(d: AmplitudeVector) -> PairConcurrences:
    a = np.abs(d.d)
    return PairConcurrences(
        c_AB=2 * a[0] * a[1],
        c_ab=2 * a[2] * a[3],
        c_Aa=2 * a[0] * a[2],
        c_Ab=2 * a[0] * a[3],
        c_Ba=2 * a[1] * a[2],
        c_Bb=2 * a[1] * a[3],
    )


def resonant_equal_coupling_concurrences(delta_scaled: float, gt) -> PairConcurrences:
    """Pair concurrences from (xi1 + xi2)/sqrt2 with g1 = g2 = g and delta = Delta/g."""
    om = math.sqrt(1 + delta_scaled**2)
    gt = np.asarray(gt, dtype=float)
    s2 = np.sin(om * gt) ** 2
    cab = np.cos(om * gt) ** 2 + (delta_scaled / om) ** 2 * s2
    cff = s2 / om**2
    cross = np.abs(np.sin(om * gt)) / om * np.sqrt(cab)
    return PairConcurrences(cab, cff, cross, cross, cross, cross)


# --- two excitations ------------------------------------------------------------


def double_exc_matrix(p: JCParams) -> np.ndarray:
    """M with dd/dt = -i M d in the rotating frame."""
    s, m = p.delta1 + p.delta2, p.delta1 - p.delta2
    g1, g2 = p.g1, p.g2
    return np.array(
        [
            [s, g2, g1, 0],
            [g2, m, 0, g1],
            [g1, 0, -m, g2],
            [0, g1, g2, -s],
        ],
        dtype=complex,
    )


def double_exc_evolve(d0: AmplitudeVector, p: JCParams, t: float) -> AmplitudeVector:
    """exp(-i M t) on the two-excitation amplitudes; d0 stays put."""
    if d0.sector != "two":
        raise ContractViolation("double_exc_evolve needs a two-excitation vector")
    if t == 0:
        return d0
    d = expm(-1j * double_exc_matrix(p) * t) @ d0.d
    return AmplitudeVector("two", d, d0.d0)


def pair_concurrences_double(d: AmplitudeVector) -> PairConcurrences:
    d1, d2, d3, d4 = d.d
    a1, a2, a3, a4 = np.abs(d.d)
    a0 = abs(d.d0)
    return PairConcurrences(
        c_AB=2 * max(0.0, a1 * a0 - a2 * a3),
        c_ab=2 * max(0.0, a4 * a0 - a2 * a3),
        c_Aa=2 * abs(d1 * np.conj(d3) + d2 * np.conj(d4)),
        c_Ab=2 * max(0.0, a2 * a0 - a1 * a4),
        c_Ba=2 * max(0.0, a3 * a0 - a1 * a4),
        c_Bb=2 * abs(d1 * np.conj(d2) + d3 * np.conj(d4)),
    )


def pair_concurrences_general(d: AmplitudeVector) -> PairConcurrences:
    """Wootters concurrence of every reduced two-qubit state of the 16-dim pure state."""
    v = d.ket16()
    rho = DensityMatrix(np.outer(v, v.conj()))
    out = {}
    for pair in PAIRS:
        keep = [SUBSYSTEMS[pair[0]], SUBSYSTEMS[pair[1]]]
        out["c_" + pair] = concurrence(partial_trace(rho, [2, 2, 2, 2], keep))
    return PairConcurrences(**out)


# --- steered transfer and frozen states -----------------------------------------


def steered_transfer(ratio: float, g1t) -> PairConcurrences:
    """Pair concurrences from (xi1 + xi2)/sqrt2 at resonance with g2 = ratio g1.

    Time is measured as g1 t.
    """
    x = np.asarray(g1t, dtype=float)
    y = ratio * x
    c1, s1 = np.abs(np.cos(x)), np.abs(np.sin(x))
    c2, s2 = np.abs(np.cos(y)), np.abs(np.sin(y))
    return PairConcurrences(c_AB=c1 * c2, c_ab=s1 * s2, c_Aa=c1 * s1, c_Ab=c1 * s2, c_Ba=c2 * s1, c_Bb=s2 * c2)


def _near_int(x: float, tol: float = 1e-9):
    n = round(x)
    return int(n) if n >= 1 and abs(x - n) <= tol else None


def transfer_destination(ratio: float) -> str | None:
    """Pair that receives the full atomic entanglement, or None.

    Even integer ratios send it to Ba, odd ones to ab.  A ratio 1/n behaves
    like n with the atoms (and cavities) relabeled, so Ba becomes Ab.
    """
    if ratio <= 0:
        raise ContractViolation("coupling ratio must be positive")
    n = _near_int(ratio)
    if n is not None:
        return "Ba" if n % 2 == 0 else "ab"
    m = _near_int(1.0 / ratio)
    if m is not None:
        return "Ab" if m % 2 == 0 else "ab"
    return None


def pair_supremum(ratio: float, pair: str, t_max: float = 100.0, n: int = 200001) -> float:
    """Sup over g1 t in [0, t_max] of one pair, from a dense grid refined locally."""
    from scipy.optimize import minimize_scalar

    x = np.linspace(0.0, t_max, n)
    vals = getattr(steered_transfer(ratio, x), "c_" + pair)
    i = int(np.argmax(vals))
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, n - 1)]
    res = minimize_scalar(
        lambda s: -float(getattr(steered_transfer(ratio, s), "c_" + pair)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(float(vals[i]), -float(res.fun))


def frozen_state(theta: float, phi: float, sign: int = 1) -> AmplitudeVector:
    """(xi1 + e^{i theta} xi2 +/- (xi3 - e^{i phi} xi4))/2."""
    s = 1 if sign >= 0 else -1
    d = 0.5 * np.array([1, np.exp(1j * theta), s, -s * np.exp(1j * phi)], dtype=complex)
    return AmplitudeVector("one", d)


def frozen_state_scan(theta: float, phi: float, delta: float, t, g1: float = 1.0, g2: float | None = None, sign: int = 1):
    """Pair concurrences of the uniform superposition evolved with Delta1 = Delta2 = delta.

    Returns a PairConcurrences for scalar t, or a list for an array of times.
    """
    g2 = g1 if g2 is None else g2
    p = JCParams(g1, g2, delta, delta)
    d0 = frozen_state(theta, phi, sign)
    if np.ndim(t) == 0:
        return pair_concurrences_single(single_exc_evolve(d0, p, float(t)))
    return [pair_concurrences_single(single_exc_evolve(d0, p, float(ti))) for ti in np.asarray(t)]


def chi_sd(alpha: float, beta: float = 0.0) -> AmplitudeVector:
    """cos(alpha) chi1 + e^{i beta} sin(alpha) chi0."""
    return AmplitudeVector("two", np.array([math.cos(alpha), 0, 0, 0], dtype=complex), np.exp(1j * beta) * math.sin(alpha))


CSV_COLUMNS = ("t",) + tuple("c_" + p for p in PAIRS)
