"""
Exact statevector simulation for nearest-neighbour Heisenberg circuits.

Bit convention: qubit ``q`` is bit ``q`` of the amplitude index, i.e. qubit 0
is the least significant bit. With a C-ordered reshape of the amplitude vector
to ``(2**(n-q-1), 2, 2**q)`` the middle axis is qubit ``q``.

Two layers live here:

* per-state operations on :class:`StateVector` (mutate in place and return the
  same object), used for single circuits, sampling and validation;
* ``*_batch`` kernels acting on a ``(batch, 2**n)`` amplitude array, where each
  row carries its own coupling angle. These are what the PQF transformer uses
  to push a whole dataset through the feature map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import CapacityError, ValidationError

MAX_QUBITS = 30
UNITARY_ATOL = 1e-10

Axis = Literal["X", "Y", "Z"]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_DAG = np.array([[1, 0], [0, -1j]], dtype=complex)


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.num_qubits,):
            raise ValidationError(
                f"expected {2**self.num_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class SingleQubitGate:
    qubit: int
    matrix: np.ndarray


@dataclass(frozen=True)
class HeisenbergCoupling:
    """exp(-i*theta*(XX+YY+ZZ)) on the pair (qubit_index, qubit_index + 1)."""

    qubit_index: int
    theta: float


def check_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValidationError(f"single-qubit unitary must be 2x2, got {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(2), atol=atol, rtol=0):
        raise ValidationError("matrix is not unitary")
    return u


def _check_qubit(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n} qubits")


def heisenberg_block(theta: float | np.ndarray):
    """Return (diag_phase, a, b) of exp(-i theta (XX+YY+ZZ)).

    |00>, |11> pick up ``diag_phase``; on span{|01>, |10>} the gate is
    ``[[a, b], [b, a]]``. XX+YY+ZZ = 2*SWAP - I has triplet eigenvalue +1 and
    singlet eigenvalue -3.
    """
    triplet = np.exp(-1j * np.asarray(theta))
    singlet = np.exp(3j * np.asarray(theta))
    return triplet, 0.5 * (triplet + singlet), 0.5 * (triplet - singlet)


def heisenberg_matrix(theta: float) -> np.ndarray:
    """Dense 4x4 gate in the two-qubit basis |b_j b_{j+1}> (symmetric under swap)."""
    d, a, b = heisenberg_block(theta)
    g = np.zeros((4, 4), dtype=complex)
    g[0, 0] = g[3, 3] = d
    g[1, 1] = g[2, 2] = a
    g[1, 2] = g[2, 1] = b
    return g


# --------------------------------------------------------------------------
# single-state operations


def new_zero_state(n: int) -> StateVector:
    if not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"exact backend supports 1..{MAX_QUBITS} qubits, got {n}")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def apply_single_qubit(state: StateVector, u: np.ndarray, q: int) -> StateVector:
    u = check_unitary(u)
    _check_qubit(q, state.num_qubits)
    n = state.num_qubits
    psi = state.amplitudes.reshape(2 ** (n - q - 1), 2, 2**q)
    state.amplitudes = np.einsum("ij,ajb->aib", u, psi).reshape(-1)
    return state


def apply_heisenberg(state: StateVector, coupling: HeisenbergCoupling) -> StateVector:
    n = state.num_qubits
    j = coupling.qubit_index
    if not 0 <= j <= n - 2:
        raise IndexError(f"coupling index {j} has no right neighbour in {n} qubits")
    # axis 1 is qubit j+1, axis 2 is qubit j
    psi = state.amplitudes.reshape(2 ** (n - j - 2), 2, 2, 2**j)
    d, a, b = heisenberg_block(coupling.theta)
    psi[:, 0, 0, :] *= d
    psi[:, 1, 1, :] *= d
    v01 = psi[:, 0, 1, :].copy()
    v10 = psi[:, 1, 0, :]
    psi[:, 0, 1, :] = a * v01 + b * v10
    psi[:, 1, 0, :] = b * v01 + a * v10
    return state


def apply_gate(state: StateVector, gate) -> StateVector:
    if isinstance(gate, HeisenbergCoupling):
        return apply_heisenberg(state, gate)
    return apply_single_qubit(state, gate.matrix, gate.qubit)


def reduced_density_matrix(state: StateVector, q: int) -> np.ndarray:
    _check_qubit(q, state.num_qubits)
    n = state.num_qubits
    psi = state.amplitudes.reshape(2 ** (n - q - 1), 2, 2**q)
    return np.einsum("aib,ajb->ij", psi, psi.conj())


def bloch_from_rdm(rho: np.ndarray) -> np.ndarray:
    """(bx, by, bz) from rho = (I + bx X + by Y + bz Z) / 2; works on stacked (..., 2, 2)."""
    rho01 = rho[..., 0, 1]
    return np.stack(
        [2.0 * rho01.real, -2.0 * rho01.imag, (rho[..., 0, 0] - rho[..., 1, 1]).real],
        axis=-1,
    )


def pauli_expectation(state: StateVector, axis: Axis, q: int) -> float:
    if axis not in ("X", "Y", "Z"):
        raise ValidationError(f"unknown Pauli axis {axis!r}")
    bloch = bloch_from_rdm(reduced_density_matrix(state, q))
    return float(bloch["XYZ".index(axis)])


def sample_bitstrings(state: StateVector, shots: int, seed) -> np.ndarray:
    """Draw ``shots`` basis-state indices i.i.d. from |amplitude|^2.

    Bit ``q`` of each returned integer is the outcome of qubit ``q``.
    """
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    p = state.probabilities()
    p = p / p.sum()
    # inverse-CDF sampling; rng.choice is slow for 2**n categories
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(shots), side="right").astype(np.int64)


def outcome_bits(outcomes: np.ndarray, n: int) -> np.ndarray:
    """Unpack integer outcomes into an (shots, n) 0/1 array, column q = qubit q."""
    return ((np.asarray(outcomes)[:, None] >> np.arange(n)) & 1).astype(np.int8)


# --------------------------------------------------------------------------
# batched kernels: amplitudes of shape (batch, 2**n)


def zero_states_batch(batch: int, n: int) -> np.ndarray:
    if not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"exact backend supports 1..{MAX_QUBITS} qubits, got {n}")
    amps = np.zeros((batch, 2**n), dtype=complex)
    amps[:, 0] = 1.0
    return amps


def apply_single_qubit_batch(amps: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    psi = amps.reshape(amps.shape[0], 2 ** (n - q - 1), 2, 2**q)
    return np.einsum("ij,bajc->baic", u, psi).reshape(amps.shape)


def apply_heisenberg_batch(amps: np.ndarray, thetas: np.ndarray, j: int, n: int) -> np.ndarray:
    """In-place coupling on pair (j, j+1) with one angle per batch row."""
    psi = amps.reshape(amps.shape[0], 2 ** (n - j - 2), 2, 2, 2**j)
    d, a, b = heisenberg_block(np.asarray(thetas, dtype=float))
    d = d[:, None, None]
    a = a[:, None, None]
    b = b[:, None, None]
    psi[:, :, 0, 0, :] *= d
    psi[:, :, 1, 1, :] *= d
    v01 = psi[:, :, 0, 1, :].copy()
    v10 = psi[:, :, 1, 0, :].copy()
    psi[:, :, 0, 1, :] = a * v01 + b * v10
    psi[:, :, 1, 0, :] = b * v01 + a * v10
    return amps


def bloch_batch(amps: np.ndarray, n: int) -> np.ndarray:
    """Per-qubit Bloch vectors, shape (batch, n, 3)."""
    out = np.empty((amps.shape[0], n, 3))
    for q in range(n):
        psi = amps.reshape(amps.shape[0], 2 ** (n - q - 1), 2, 2**q)
        p0 = psi[:, :, 0, :]
        p1 = psi[:, :, 1, :]
        rho01 = np.einsum("bac,bac->b", p0, p1.conj())
        out[:, q, 0] = 2.0 * rho01.real
        out[:, q, 1] = -2.0 * rho01.imag
        out[:, q, 2] = (np.abs(p0) ** 2).sum(axis=(1, 2)) - (np.abs(p1) ** 2).sum(axis=(1, 2))
    return out
