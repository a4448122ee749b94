"""
Matrix-product-state backend for the same gate set as :mod:`pqfcredit.simulator`.

Site tensors have index order (left bond, physical, right bond). Site ``q``
holds qubit ``q``. Two-qubit couplings are applied TEBD-style: contract the
pair, apply the 4x4 gate, split with an SVD and truncate.

An orthogonality centre is tracked so that discarding singular values and
rescaling the kept ones leaves the whole state at unit norm. Expectation
values do not rely on it: they contract full left/right environments, so they
stay correct for any tensors a caller may hand in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ValidationError
from .simulator import (
    HeisenbergCoupling,
    StateVector,
    bloch_from_rdm,
    check_unitary,
    heisenberg_matrix,
)

MAX_DENSE_QUBITS = 20
DEFAULT_CHI_MAX = 64
DEFAULT_TRUNC_TOL = 1e-10


@dataclass
class MpsState:
    site_tensors: list
    chi_max: int = DEFAULT_CHI_MAX
    trunc_tol: float = DEFAULT_TRUNC_TOL
    center: int | None = 0
    discarded_weight: float = field(default=0.0)

    @property
    def num_qubits(self) -> int:
        return len(self.site_tensors)

    def bond_dimensions(self) -> list[int]:
        return [t.shape[2] for t in self.site_tensors[:-1]]

    def max_bond(self) -> int:
        return max(self.bond_dimensions(), default=1)

    def check_bonds(self) -> None:
        ts = self.site_tensors
        assert ts[0].shape[0] == 1 and ts[-1].shape[2] == 1, "boundary bonds must be 1"
        for a, b in zip(ts[:-1], ts[1:]):
            assert a.shape[2] == b.shape[0], "adjacent bond dimensions disagree"
        assert self.max_bond() <= self.chi_max, "bond dimension exceeds chi_max"


def _check_site(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise IndexError(f"site {q} out of range for {n} qubits")


def mps_zero_state(n: int, chi_max: int = DEFAULT_CHI_MAX, trunc_tol: float = DEFAULT_TRUNC_TOL) -> MpsState:
    if n < 1:
        raise ValidationError("need at least one qubit")
    if chi_max < 1 or trunc_tol < 0:
        raise ValidationError("chi_max must be >= 1 and trunc_tol >= 0")
    tensors = []
    for _ in range(n):
        t = np.zeros((1, 2, 1), dtype=complex)
        t[0, 0, 0] = 1.0
        tensors.append(t)
    return MpsState(tensors, chi_max=chi_max, trunc_tol=trunc_tol, center=0)


def mps_apply_single_qubit(state: MpsState, u: np.ndarray, q: int) -> MpsState:
    u = check_unitary(u)
    _check_site(q, state.num_qubits)
    # a unitary on the physical leg keeps left/right orthonormality intact
    state.site_tensors[q] = np.einsum("ij,ljr->lir", u, state.site_tensors[q])
    return state


def _move_center(state: MpsState, target: int) -> None:
    ts = state.site_tensors
    if state.center is None:
        # unknown gauge: sweep from the left end to establish one
        state.center = 0
        _move_center(state, len(ts) - 1)
    c = state.center
    while c < target:
        l, d, r = ts[c].shape
        q, rmat = np.linalg.qr(ts[c].reshape(l * d, r))
        ts[c] = q.reshape(l, d, q.shape[1])
        ts[c + 1] = np.einsum("ab,bsr->asr", rmat, ts[c + 1])
        c += 1
    while c > target:
        l, d, r = ts[c].shape
        q, rmat = np.linalg.qr(ts[c].reshape(l, d * r).T)
        ts[c] = q.T.reshape(q.shape[1], d, r)
        ts[c - 1] = np.einsum("lsa,ab->lsb", ts[c - 1], rmat.T)
        c -= 1
    state.center = c


def mps_apply_heisenberg(state: MpsState, coupling: HeisenbergCoupling) -> MpsState:
    n = state.num_qubits
    j = coupling.qubit_index
    if not 0 <= j <= n - 2:
        raise IndexError(f"coupling index {j} has no right neighbour in {n} qubits")
    _move_center(state, j)
    a, b = state.site_tensors[j], state.site_tensors[j + 1]
    l, r = a.shape[0], b.shape[2]
    theta = np.einsum("lsm,mtr->lstr", a, b)
    gate = heisenberg_matrix(coupling.theta).reshape(2, 2, 2, 2)
    theta = np.einsum("uvst,lstr->luvr", gate, theta).reshape(l * 2, 2 * r)

    u, s, vh = np.linalg.svd(theta, full_matrices=False)
    keep = int(np.count_nonzero(s >= state.trunc_tol * s[0])) if s[0] > 0 else 1
    keep = max(1, min(keep, state.chi_max))
    total = float(np.sum(s**2))
    kept = s[:keep]
    kept_norm = float(np.sqrt(np.sum(kept**2)))
    state.discarded_weight += (total - kept_norm**2) / total if total > 0 else 0.0
    kept = kept / kept_norm

    state.site_tensors[j] = u[:, :keep].reshape(l, 2, keep)
    state.site_tensors[j + 1] = (kept[:, None] * vh[:keep]).reshape(keep, 2, r)
    state.center = j + 1
    state.check_bonds()
    return state


def mps_apply_gate(state: MpsState, gate) -> MpsState:
    if isinstance(gate, HeisenbergCoupling):
        return mps_apply_heisenberg(state, gate)
    return mps_apply_single_qubit(state, gate.matrix, gate.qubit)


def _environments(ts: list):
    n = len(ts)
    left = [np.ones((1, 1), dtype=complex)]
    for t in ts:
        left.append(np.einsum("ab,asr,bsq->rq", left[-1], t, t.conj()))
    right = [np.ones((1, 1), dtype=complex)]
    for t in reversed(ts):
        right.append(np.einsum("asr,bsq,rq->ab", t, t.conj(), right[-1]))
    right.reverse()
    assert len(left) == len(right) == n + 1
    return left, right


def mps_reduced_density_matrices(state: MpsState) -> np.ndarray:
    """All single-site reduced density matrices, shape (n, 2, 2), trace-normalised."""
    ts = state.site_tensors
    left, right = _environments(ts)
    norm = left[-1][0, 0].real
    rdms = np.empty((len(ts), 2, 2), dtype=complex)
    for q, t in enumerate(ts):
        rdms[q] = np.einsum("ab,asr,btq,rq->st", left[q], t, t.conj(), right[q + 1]) / norm
    return rdms


def mps_bloch_vectors(state: MpsState) -> np.ndarray:
    return bloch_from_rdm(mps_reduced_density_matrices(state))


def mps_pauli_expectation(state: MpsState, axis: str, q: int) -> float:
    if axis not in ("X", "Y", "Z"):
        raise ValidationError(f"unknown Pauli axis {axis!r}")
    _check_site(q, state.num_qubits)
    ts = state.site_tensors
    left, right = _environments(ts)
    rho = np.einsum("ab,asr,btq,rq->st", left[q], ts[q], ts[q].conj(), right[q + 1])
    rho = rho / left[-1][0, 0].real
    return float(bloch_from_rdm(rho)["XYZ".index(axis)])


def mps_norm_sq(state: MpsState) -> float:
    left, _ = _environments(state.site_tensors)
    return float(left[-1][0, 0].real)


def mps_to_statevector(state: MpsState) -> StateVector:
    n = state.num_qubits
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense conversion limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    psi = state.site_tensors[0].reshape(2, -1)
    for t in state.site_tensors[1:]:
        psi = np.einsum("dl,lsr->dsr", psi, t).reshape(-1, t.shape[2])
    # contraction order makes site 0 the most significant bit; flip to LSB convention
    psi = psi.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1))).reshape(-1)
    return StateVector(n, psi)
