"""
Heisenberg feature map.

A data vector ``x`` is embedded as::

    |x> = ( prod_{odd j} U_j(x)  prod_{even j} U_j(x) )^R  (x)_j |psi_j>

with ``U_j = exp(-i * alpha * x_f * (X_j X_{j+1} + Y_j Y_{j+1} + Z_j Z_{j+1}))``
and ``|psi_j>`` fixed Haar-random single-qubit states. Operator products act
right to left, so each repetition applies the even-``j`` sublayer first and
the odd-``j`` sublayer second. ``alpha`` plays the role of evolution time
divided by the number of Trotter steps.

Which feature drives coupling ``j`` in repetition ``r`` is set by a
:class:`FeatureLayout`; the default cycles through the features in slot order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import ValidationError
from .mps import DEFAULT_CHI_MAX, DEFAULT_TRUNC_TOL, mps_apply_gate, mps_zero_state
from .simulator import (
    HeisenbergCoupling,
    SingleQubitGate,
    apply_gate,
    apply_heisenberg_batch,
    apply_single_qubit_batch,
    new_zero_state,
    zero_states_batch,
)

Backend = Literal["exact", "mps"]


def sample_haar_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 2x2 unitary (QR of a complex Ginibre matrix, phase-fixed)."""
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class FeatureLayout:
    """assignment[r, j] = index of the feature driving coupling j in repetition r."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 2:
            raise ValidationError("layout must be a (repetitions, n-1) array")
        object.__setattr__(self, "assignment", a)

    def __eq__(self, other):
        return isinstance(other, FeatureLayout) and np.array_equal(self.assignment, other.assignment)

    def __hash__(self):
        return hash(self.assignment.tobytes())

    def validate(self, num_features: int, num_qubits: int, repetitions: int) -> None:
        if self.assignment.shape != (repetitions, num_qubits - 1):
            raise ValidationError(
                f"layout shape {self.assignment.shape} != ({repetitions}, {num_qubits - 1})"
            )
        if self.assignment.min() < 0 or self.assignment.max() >= num_features:
            raise ValidationError("layout refers to a feature index out of range")

    def to_list(self) -> list:
        return self.assignment.tolist()


def default_layout(num_features: int, num_qubits: int, repetitions: int) -> FeatureLayout:
    """Cyclic layout: slot s = r*(n-1) + j carries feature s mod F."""
    slots = repetitions * (num_qubits - 1)
    if slots < num_features:
        warnings.warn(
            f"{num_features} features but only {slots} coupling slots; "
            f"features {slots}..{num_features - 1} are not encoded",
            stacklevel=2,
        )
    s = np.arange(slots).reshape(repetitions, num_qubits - 1)
    return FeatureLayout(s % num_features)


@dataclass(frozen=True)
class FeatureMapSpec:
    num_qubits: int
    alpha: float
    repetitions: int = 1
    haar_seed: int = 0
    num_features: int | None = None
    layout: FeatureLayout | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.num_qubits < 2:
            raise ValidationError("the feature map needs at least two qubits")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        if self.num_features is None:
            object.__setattr__(self, "num_features", self.num_qubits - 1)
        if self.num_features < 1:
            raise ValidationError("num_features must be >= 1")
        if self.layout is None:
            object.__setattr__(
                self, "layout", default_layout(self.num_features, self.num_qubits, self.repetitions)
            )
        self.layout.validate(self.num_features, self.num_qubits, self.repetitions)

    @cached_property
    def haar_unitaries(self) -> tuple:
        rng = np.random.default_rng(self.haar_seed)
        return tuple(sample_haar_unitary(rng) for _ in range(self.num_qubits))

    def with_alpha(self, alpha: float) -> "FeatureMapSpec":
        return FeatureMapSpec(
            self.num_qubits, alpha, self.repetitions, self.haar_seed, self.num_features, self.layout
        )

    def coupling_schedule(self) -> list[tuple[int, int]]:
        """(repetition, j) pairs in application order."""
        n = self.num_qubits
        order = []
        for r in range(self.repetitions):
            order += [(r, j) for j in range(0, n - 1, 2)]
            order += [(r, j) for j in range(1, n - 1, 2)]
        return order

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "alpha": self.alpha,
            "repetitions": self.repetitions,
            "haar_seed": self.haar_seed,
            "num_features": self.num_features,
            "layout": self.layout.to_list(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureMapSpec":
        layout = d.get("layout")
        return cls(
            num_qubits=d["num_qubits"],
            alpha=d["alpha"],
            repetitions=d.get("repetitions", 1),
            haar_seed=d.get("haar_seed", 0),
            num_features=d.get("num_features"),
            layout=FeatureLayout(np.array(layout)) if layout is not None else None,
        )


def _check_x(spec: FeatureMapSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.num_features:
        raise ValidationError(f"expected {spec.num_features} features, got {x.shape[-1]}")
    return x


def build_circuit(spec: FeatureMapSpec, x) -> list:
    x = _check_x(spec, x)
    if x.ndim != 1:
        raise ValidationError("build_circuit takes a single feature vector")
    gates: list = [SingleQubitGate(q, u) for q, u in enumerate(spec.haar_unitaries)]
    for r, j in spec.coupling_schedule():
        gates.append(HeisenbergCoupling(j, spec.alpha * x[spec.layout.assignment[r, j]]))
    return gates


def execute(
    spec: FeatureMapSpec,
    x,
    backend: Backend = "exact",
    chi_max: int = DEFAULT_CHI_MAX,
    trunc_tol: float = DEFAULT_TRUNC_TOL,
):
    """Run the feature map on |0^n> and return the backend-native state."""
    gates = build_circuit(spec, x)
    if backend == "exact":
        state = new_zero_state(spec.num_qubits)
        for g in gates:
            apply_gate(state, g)
        return state
    if backend == "mps":
        state = mps_zero_state(spec.num_qubits, chi_max=chi_max, trunc_tol=trunc_tol)
        for g in gates:
            mps_apply_gate(state, g)
        return state
    raise ValidationError(f"unknown backend {backend!r}")


def execute_batch(spec: FeatureMapSpec, X: np.ndarray) -> np.ndarray:
    """Exact-backend amplitudes for every row of X, shape (m, 2**n).

    Same gate sequence as :func:`build_circuit`, vectorised over rows.
    """
    X = _check_x(spec, np.atleast_2d(X))
    n = spec.num_qubits
    # the Haar layer is data independent: build the product state once
    product = np.array([1.0 + 0j])
    for u in reversed(spec.haar_unitaries):
        product = np.kron(product, u[:, 0])
    amps = np.repeat(product[None, :], X.shape[0], axis=0)
    for r, j in spec.coupling_schedule():
        apply_heisenberg_batch(amps, spec.alpha * X[:, spec.layout.assignment[r, j]], j, n)
    return amps


def execute_batch_gatewise(spec: FeatureMapSpec, X: np.ndarray) -> np.ndarray:
    """Reference for :func:`execute_batch` that applies the Haar layer gate by gate."""
    X = _check_x(spec, np.atleast_2d(X))
    n = spec.num_qubits
    amps = zero_states_batch(X.shape[0], n)
    for q, u in enumerate(spec.haar_unitaries):
        amps = apply_single_qubit_batch(amps, u, q, n)
    for r, j in spec.coupling_schedule():
        apply_heisenberg_batch(amps, spec.alpha * X[:, spec.layout.assignment[r, j]], j, n)
    return amps
