"""
Projected quantum features (PQF) and the Gaussian projected quantum kernel.

A state on n qubits is projected to the 3n-vector of single-qubit Pauli
expectations, ordered qubit-major: (<X_0>, <Y_0>, <Z_0>, <X_1>, ...). Each
triple is the Bloch vector of that qubit's reduced density matrix
rho_k = (I + bx X + by Y + bz Z) / 2.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .featuremap import FeatureMapSpec, execute, execute_batch
from .mps import DEFAULT_CHI_MAX, DEFAULT_TRUNC_TOL, MpsState, mps_bloch_vectors
from .simulator import StateVector, bloch_batch, bloch_from_rdm, reduced_density_matrix


class BlochVector(NamedTuple):
    bx: float
    by: float
    bz: float


def pqf_columns(num_qubits: int) -> list[str]:
    return [f"{a}_{k}" for k in range(num_qubits) for a in "XYZ"]


def project(state) -> np.ndarray:
    if isinstance(state, MpsState):
        return mps_bloch_vectors(state).reshape(-1)
    if isinstance(state, StateVector):
        rdms = np.stack([reduced_density_matrix(state, q) for q in range(state.num_qubits)])
        return bloch_from_rdm(rdms).reshape(-1)
    raise ValidationError(f"cannot project object of type {type(state).__name__}")


def bloch_vectors(pqf: np.ndarray) -> list[BlochVector]:
    return [BlochVector(*map(float, row)) for row in np.asarray(pqf).reshape(-1, 3)]


def pqk_distance_sq(a, b) -> float:
    """sum_k ||rho_k(a) - rho_k(b)||_F^2.

    For a traceless difference (dX X + dY Y + dZ Z)/2 the squared Frobenius norm
    is |d|^2 / 2, hence half the squared Euclidean distance of the PQF vectors.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"PQF length mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return 0.5 * float(d @ d)


def pqk_kernel(a, b, gamma: float) -> float:
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    return float(np.exp(-gamma * pqk_distance_sq(a, b)))


def gram_matrix(vectors, gamma: float) -> np.ndarray:
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.shape[0] == 0:
        raise ValidationError("need at least one vector")
    sq = np.sum(V**2, axis=1)
    d2 = 0.5 * np.maximum(sq[:, None] + sq[None, :] - 2.0 * V @ V.T, 0.0)
    K = np.exp(-gamma * d2)
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return K


class ProjectedQuantumFeatures:
    """Dataset-level PQF transformer: one circuit execution per row.

    ``backend`` is ``"exact"``, ``"mps"`` or ``"shots"`` (exact state, sampled
    and TREX-mitigated readout under ``noise_model``). ``executions`` counts
    circuit runs so callers can check the linear-cost property.
    """

    def __init__(
        self,
        spec: FeatureMapSpec,
        backend: str = "exact",
        chi_max: int = DEFAULT_CHI_MAX,
        trunc_tol: float = DEFAULT_TRUNC_TOL,
        noise_model=None,
        trex_config=None,
        batch_size: int = 512,
    ):
        if backend not in ("exact", "mps", "shots"):
            raise ValidationError(f"unknown backend {backend!r}")
        self.spec = spec
        self.backend = backend
        self.chi_max = chi_max
        self.trunc_tol = trunc_tol
        self.noise_model = noise_model
        self.trex_config = trex_config
        self.batch_size = batch_size
        self.executions = 0

    @property
    def columns(self) -> list[str]:
        return pqf_columns(self.spec.num_qubits)

    def transform(self, X: np.ndarray, row_offset: int = 0) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if np.isnan(X).any():
            raise ValidationError("PQF input contains missing values; impute first")
        m = X.shape[0]
        n = self.spec.num_qubits
        out = np.empty((m, 3 * n))
        if self.backend == "exact":
            for start in range(0, m, self.batch_size):
                block = X[start : start + self.batch_size]
                amps = execute_batch(self.spec, block)
                out[start : start + len(block)] = bloch_batch(amps, n).reshape(len(block), -1)
                self.executions += len(block)
        elif self.backend == "mps":
            for i, x in enumerate(X):
                state = execute(self.spec, x, "mps", self.chi_max, self.trunc_tol)
                out[i] = project(state)
                self.executions += 1
        else:
            from .noise import ReadoutNoiseModel, TrexConfig, pqf_with_shots

            model = self.noise_model or ReadoutNoiseModel.noiseless(n)
            config = self.trex_config or TrexConfig()
            for i, x in enumerate(X):
                out[i] = pqf_with_shots(self.spec, x, model, config, task_id=row_offset + i)
                self.executions += 1
        return out
