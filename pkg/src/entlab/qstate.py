"""Density matrices, two-qubit bases, partial traces and named states.

Ordering of the product basis is (|gg>, |ge>, |eg>, |ee>), i.e. the index of
|q1 q2> is 2*q1 + q2 with g = 0 and e = 1.  Every other module expresses
two-qubit matrices in this layout unless it says otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_FLOOR = -1e-9
# eigenvalues in [POSITIVITY_FLOOR, -CLAMP_DEADBAND) get clamped to zero;
# anything closer to zero is left alone so exact inputs stay bit-identical
CLAMP_DEADBAND = 1e-12

BASES = ("product", "dicke", "bell")

_S2 = 1.0 / np.sqrt(2.0)

# columns are the basis states written in product coordinates
_BASIS_COLUMNS = {
    "product": np.eye(4, dtype=complex),
    # Psi1, Psi_s, Psi_a, Psi4
    "dicke": np.array(
        [
            [1, 0, 0, 0],
            [0, _S2, -_S2, 0],
            [0, _S2, _S2, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    ),
    # Psi_s, Psi_a, Phi_s, Phi_a
    "bell": np.array(
        [
            [0, 0, _S2, _S2],
            [_S2, -_S2, 0, 0],
            [_S2, _S2, 0, 0],
            [0, 0, _S2, -_S2],
        ],
        dtype=complex,
    ),
}


def basis_matrix(basis: str) -> np.ndarray:
    """Unitary whose columns are the states of `basis` in product coordinates."""
    if basis not in _BASIS_COLUMNS:
        raise ContractViolation(f"unknown basis {basis!r}; expected one of {BASES}")
    return _BASIS_COLUMNS[basis].copy()


def as_matrix(m, square: bool = True) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ContractViolation(f"expected a 2-D matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {a.shape}")
    return a


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    (values, vectors)
        Real eigenvalues in descending order and the matching eigenvectors as
        columns.
    """
    a = as_matrix(m)
    if a.size and np.max(np.abs(a - a.conj().T)) > 1e-9:
        raise ContractViolation("eig_hermitian needs a Hermitian matrix")
    h = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix.

    Hermiticity and unit trace are checked to 1e-10 and positivity down to a
    floor of -1e-9.  Slightly negative eigenvalues above the floor are clamped
    to zero.
    """

    matrix: np.ndarray
    basis: str = "product"

    def __post_init__(self):
        a = as_matrix(self.matrix).copy()
        herm = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
        if herm > HERMITIAN_TOL:
            raise ContractViolation(f"density matrix not Hermitian (deviation {herm:.3e})")
        tr = np.trace(a)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ContractViolation(f"density matrix trace is {tr.real:.12g}, expected 1")
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
        if w[0] < POSITIVITY_FLOOR:
            raise ContractViolation(f"density matrix not positive (eigenvalue {w[0]:.3e})")
        if w[0] < -CLAMP_DEADBAND:
            w = np.clip(w, 0.0, None)
            a = (v * w) @ v.conj().T
            a /= np.trace(a).real
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, idx):
        return self.matrix[idx]

    def eigenvalues(self) -> np.ndarray:
        return eig_hermitian(self.matrix)[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "basis": self.basis,
                "re": self.matrix.real.tolist(),
                "im": self.matrix.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        obj = json.loads(text)
        try:
            m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
            dim = int(obj["dim"])
            basis = obj.get("basis", "product")
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractViolation(f"malformed density-matrix JSON: {exc}") from exc
        if m.shape != (dim, dim):
            raise ContractViolation(f"JSON dim {dim} disagrees with matrix shape {m.shape}")
        return cls(m, basis)


def pure(psi, basis: str = "product") -> DensityMatrix:
    v = np.asarray(psi, dtype=complex).ravel()
    n = np.linalg.norm(v)
    if n == 0:
        raise ContractViolation("zero state vector")
    v = v / n
    return DensityMatrix(np.outer(v, v.conj()), basis)


def basis_transform(rho: DensityMatrix, frm: str, to: str) -> DensityMatrix:
    """Re-express a two-qubit density matrix from basis `frm` in basis `to`.

    Uses rho' = C^dag rho C where the columns of C are the `to` states
    expanded in the `frm` basis.
    """
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho, frm)
    if rho.dim != 4:
        raise ContractViolation(f"basis transforms need a 4x4 matrix, got dim {rho.dim}")
    if rho.basis != frm:
        raise ContractViolation(f"matrix is tagged {rho.basis!r}, not {frm!r}")
    if frm == to:
        return rho
    c = basis_matrix(frm).conj().T @ basis_matrix(to)
    return DensityMatrix(c.conj().T @ rho.matrix @ c, to)


def partial_trace(rho, dims: Sequence[int], keep) -> DensityMatrix:
    """Trace out every subsystem not listed in `keep`.

    Subsystems are ordered as in `dims`, the first one being the most
    significant index of the tensor product.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != m.shape[0]:
        raise ContractViolation(f"subsystem dims {dims} do not multiply to {m.shape[0]}")
    keep = sorted({int(k) for k in np.atleast_1d(keep)})
    if not keep:
        raise ContractViolation("keep set is empty")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise ContractViolation(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # einsum with repeated labels on traced subsystems
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(n)]
    col = [letters[i] if i in traced else letters[n + i].upper() for i in range(n)]
    out = [row[i] for i in keep] + [col[i] for i in keep]
    red = np.einsum("".join(row + col) + "->" + "".join(out), t)
    d = int(np.prod([dims[i] for i in keep]))
    red = red.reshape(d, d)
    basis = rho.basis if isinstance(rho, DensityMatrix) and len(keep) == n else "product"
    return DensityMatrix(red, basis)


# --- named states -----------------------------------------------------------

PRODUCT_KETS = {
    "Psi1": np.array([1, 0, 0, 0], dtype=complex),
    "Psi2": np.array([0, 1, 0, 0], dtype=complex),
    "Psi3": np.array([0, 0, 1, 0], dtype=complex),
    "Psi4": np.array([0, 0, 0, 1], dtype=complex),
    "PsiS": np.array([0, _S2, _S2, 0], dtype=complex),
    "PsiA": np.array([0, -_S2, _S2, 0], dtype=complex),
    "PhiS": np.array([_S2, 0, 0, _S2], dtype=complex),
    "PhiA": np.array([_S2, 0, 0, -_S2], dtype=complex),
}


@dataclass(frozen=True)
class NamedState:
    """Tag for a named state, plus its parameters when it has any.

    Tags: Psi1..Psi4, PsiS, PsiA, PhiS, PhiA, CorrelatedQ (q),
    AlphaPure (alpha), ChiSD (alpha, beta).
    """

    tag: str
    q: float | None = None
    alpha: complex | None = None
    beta: float | None = None


def named_ket(state: NamedState | str) -> np.ndarray:
    """State vector for a named state.

    ChiSD lives in the 16-dim space atom A, atom B, cavity a, cavity b (each
    truncated to two levels), ordered A, B, a, b.
    """
    if isinstance(state, str):
        state = NamedState(state)
    tag = state.tag
    if tag in PRODUCT_KETS:
        return PRODUCT_KETS[tag].copy()
    if tag == "CorrelatedQ":
        q = state.q
        if q is None or not (0.0 <= q <= 1.0):
            raise ContractViolation(f"CorrelatedQ needs 0 <= q <= 1, got {q}")
        return np.array([np.sqrt(1 - q), 0, 0, np.sqrt(q)], dtype=complex)
    if tag == "AlphaPure":
        a = complex(0 if state.alpha is None else state.alpha)
        if not np.isfinite(a):
            raise ContractViolation("AlphaPure needs a finite alpha")
        return np.array([0, a, 1, 0], dtype=complex) / np.sqrt(1 + abs(a) ** 2)
    if tag == "ChiSD":
        a, b = state.alpha, 0.0 if state.beta is None else state.beta
        if a is None or np.iscomplexobj(a) and np.imag(a) != 0 or not np.isfinite(np.real(a)):
            raise ContractViolation(f"ChiSD needs a real alpha, got {a}")
        a = float(np.real(a))
        v = np.zeros(16, dtype=complex)
        v[0b1100] = np.cos(a)  # |e e 0 0>
        v[0b0000] = np.exp(1j * b) * np.sin(a)  # |g g 0 0>
        return v
    raise ContractViolation(f"unknown named state {tag!r}")


def build_named_state(state: NamedState | str) -> DensityMatrix:
    """Pure-state density matrix of a named state in the product basis."""
    v = named_ket(state)
    return DensityMatrix(np.outer(v, v.conj()), "product")


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random density matrix from a Ginibre draw of the given rank."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)
