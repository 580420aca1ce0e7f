"""Two-qubit entanglement measures.

All matrices are in the product basis (|gg>, |ge>, |eg>, |ee>) unless the
function says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, NumericalFailure, PatternViolation
from .qstate import DensityMatrix, as_matrix, partial_trace

PATTERN_TOL = 1e-10
CLAMP_TOL = 1e-9
FAIL_TOL = 1e-6

_SYSY = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex
)  # sigma_y (x) sigma_y

_X_MASK = np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]], dtype=bool
)
_BLOCK_MASK = np.array(
    [[1, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 1]], dtype=bool
)
# Dicke basis (1, s, a, 4): populations plus the s-a coherence
_TWO_ENT_MASK = _BLOCK_MASK


@dataclass(frozen=True)
class ConcurrenceBreakdown:
    """Concurrence with its two-photon (c1) and one-photon (c2) criteria."""

    c: float
    c1: float
    c2: float


def _mat4(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    if m.shape != (4, 4):
        raise ContractViolation(f"two-qubit measure needs a 4x4 matrix, got {m.shape}")
    return m


def _check_pattern(m: np.ndarray, mask: np.ndarray, name: str) -> None:
    off = np.max(np.abs(m[~mask]))
    if off > PATTERN_TOL:
        raise PatternViolation(f"matrix is not of {name} form (off-pattern entry {off:.3e})")


def spin_flip_roots(rho) -> np.ndarray:
    """Descending square roots of the eigenvalues of R = rho (sy sy) rho* (sy sy).

    With rho = A A^dag these are the singular values of A^T (sy sy) A, which
    avoids taking square roots of eigenvalues that are zero up to round-off.
    """
    m = _mat4(rho)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if w[0] < -FAIL_TOL:
        raise NumericalFailure(f"state has eigenvalue {w[0]:.3e} < -{FAIL_TOL}")
    a = v * np.sqrt(np.clip(w, 0.0, None))
    return np.linalg.svd(a.T @ _SYSY @ a, compute_uv=False)


def spin_flip_eigenvalues(rho) -> np.ndarray:
    """Descending eigenvalues of R, clamped at zero."""
    return spin_flip_roots(rho) ** 2


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state."""
    r = spin_flip_roots(rho)
    return float(max(0.0, r[0] - r[1] - r[2] - r[3]))


def concurrence_x_state(rho) -> ConcurrenceBreakdown:
    """Closed-form concurrence of an X-shaped matrix."""
    m = _mat4(rho)
    _check_pattern(m, _X_MASK, "X-state")
    p = np.clip(np.real(np.diag(m)), 0.0, None)
    c1 = 2.0 * (abs(m[0, 3]) - np.sqrt(p[1] * p[2]))
    c2 = 2.0 * (abs(m[1, 2]) - np.sqrt(p[0] * p[3]))
    return ConcurrenceBreakdown(float(max(0.0, c1, c2)), float(c1), float(c2))


def concurrence_block(rho) -> float:
    """Concurrence when the only coherence is rho_23."""
    m = _mat4(rho)
    _check_pattern(m, _BLOCK_MASK, "block")
    p = np.clip(np.real(np.diag(m)), 0.0, None)
    return float(2.0 * max(0.0, abs(m[1, 2]) - np.sqrt(p[0] * p[3])))


def concurrence_two_entangled(rho_dicke) -> float:
    """Concurrence from Dicke-basis elements when only rho_sa is coherent.

    The input is indexed (1, s, a, 4).
    """
    m = _mat4(rho_dicke)
    if isinstance(rho_dicke, DensityMatrix) and rho_dicke.basis != "dicke":
        raise ContractViolation("concurrence_two_entangled expects a Dicke-basis matrix")
    _check_pattern(m, _TWO_ENT_MASK, "two-entangled-state")
    r11, rss, raa, r44 = np.clip(np.real(np.diag(m)), 0.0, None)
    dsa = m[1, 2] - m[2, 1]
    # (rho_sa - rho_as) is purely imaginary for a Hermitian matrix
    rad = (rss - raa) ** 2 - np.real(dsa * dsa)
    if rad < 0:
        if rad < -PATTERN_TOL:
            raise NumericalFailure(f"negative radicand {rad:.3e}")
        rad = 0.0
    return float(max(0.0, np.sqrt(rad) - 2.0 * np.sqrt(r11 * r44)))


def binary_entropy(x: float) -> float:
    x = float(np.clip(x, 0.0, 1.0))
    out = 0.0
    for p in (x, 1.0 - x):
        if p > 0:
            out -= p * np.log2(p)
    return out


def von_neumann_entropy(rho) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def entropy_of_entanglement(pure_state) -> float:
    """Von Neumann entropy (base 2) of one qubit's marginal of a pure state."""
    m = _mat4(pure_state)
    purity = np.real(np.trace(m @ m))
    if purity < 1 - 1e-8:
        raise ContractViolation(f"state is mixed (purity {purity:.10f})")
    red = partial_trace(DensityMatrix(m), [2, 2], [0])
    return float(min(1.0, max(0.0, von_neumann_entropy(red))))


def eof_from_concurrence(c: float) -> float:
    c = float(np.clip(c, 0.0, 1.0))
    return binary_entropy(0.5 + 0.5 * np.sqrt(1.0 - c * c))


def entanglement_of_formation(rho) -> float:
    """Entanglement of formation through the concurrence closed form."""
    return eof_from_concurrence(concurrence(rho))
