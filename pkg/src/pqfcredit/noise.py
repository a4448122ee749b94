"""
Shot-based Pauli estimation under readout error, with TREX mitigation.

Readout model: each qubit k independently reports 1 for a true 0 with
probability ``p10[k]`` and 0 for a true 1 with probability ``p01[k]``.

Twirled readout: before every shot each qubit is X-flipped with probability
1/2, the flip is recorded and undone in post-processing (XOR). Averaged over
flips the asymmetric confusion matrix becomes symmetric, so the measured
<Z_k> is the ideal one scaled by ``lambda_k = 1 - p10[k] - p01[k]``.
``lambda_k`` is estimated from the twirled |0...0> calibration circuit and
divided out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MitigationError, ValidationError
from .featuremap import FeatureMapSpec, execute
from .simulator import (
    HADAMARD,
    S_DAG,
    StateVector,
    apply_single_qubit,
    new_zero_state,
    outcome_bits,
    sample_bitstrings,
)

MIN_ATTENUATION = 0.1

# basis change U with U^dag Z U = P for P in {X, Y}; Z needs none
_BASIS_CHANGE = {"X": HADAMARD, "Y": HADAMARD @ S_DAG}


@dataclass(frozen=True)
class ReadoutNoiseModel:
    p10: tuple
    p01: tuple

    def __post_init__(self):
        p10 = tuple(float(p) for p in np.atleast_1d(self.p10))
        p01 = tuple(float(p) for p in np.atleast_1d(self.p01))
        if len(p10) != len(p01):
            raise ValidationError("p10 and p01 must have one entry per qubit")
        for p in p10 + p01:
            if not 0.0 <= p < 0.5:
                raise ValidationError(f"readout error probability {p} outside [0, 0.5)")
        object.__setattr__(self, "p10", p10)
        object.__setattr__(self, "p01", p01)

    @property
    def num_qubits(self) -> int:
        return len(self.p10)

    @classmethod
    def noiseless(cls, n: int) -> "ReadoutNoiseModel":
        return cls((0.0,) * n, (0.0,) * n)

    @classmethod
    def uniform(cls, n: int, p10: float, p01: float | None = None) -> "ReadoutNoiseModel":
        return cls((p10,) * n, ((p10 if p01 is None else p01),) * n)

    def attenuation(self) -> np.ndarray:
        """Analytic twirled attenuation 1 - p10 - p01 per qubit."""
        return 1.0 - np.asarray(self.p10) - np.asarray(self.p01)

    def to_dict(self) -> dict:
        return {"p10": list(self.p10), "p01": list(self.p01)}


@dataclass(frozen=True)
class TrexConfig:
    shots_per_circuit: int = 4096
    calibration_shots: int = 4096
    twirl_seed: int = 0
    # 1 = an independent twirl per shot
    shots_per_twirl: int = 1

    def __post_init__(self):
        if self.shots_per_circuit < 1 or self.calibration_shots < 1 or self.shots_per_twirl < 1:
            raise ValidationError("shot counts must be >= 1")


def _seq(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def _check_model(model: ReadoutNoiseModel, n: int) -> None:
    if model.num_qubits != n:
        raise ValidationError(f"noise model covers {model.num_qubits} qubits, state has {n}")


def apply_readout_noise(bits: np.ndarray, model: ReadoutNoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Flip an (shots, n) 0/1 array according to the asymmetric per-qubit model."""
    p10 = np.asarray(model.p10)[None, :]
    p01 = np.asarray(model.p01)[None, :]
    flip_p = np.where(bits == 0, p10, p01)
    return bits ^ (rng.random(bits.shape) < flip_p).astype(bits.dtype)


def noisy_sample_z(state: StateVector, q: int, model: ReadoutNoiseModel, shots: int, seed) -> float:
    """Unmitigated <Z_q> from ``shots`` noisy readouts."""
    n = state.num_qubits
    _check_model(model, n)
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n} qubits")
    sample_seed, noise_seed = _seq(seed).spawn(2)
    bits = outcome_bits(sample_bitstrings(state, shots, sample_seed), n)
    noisy = apply_readout_noise(bits, model, np.random.default_rng(noise_seed))
    return float(np.mean(1 - 2 * noisy[:, q].astype(float)))


def twirled_z_means(state: StateVector, model: ReadoutNoiseModel, shots: int, shots_per_twirl: int, seed) -> np.ndarray:
    """Sign-corrected twirled <Z_k> for every qubit, from one batch of ``shots``."""
    n = state.num_qubits
    _check_model(model, n)
    sample_seed, twirl_seed, noise_seed = _seq(seed).spawn(3)
    bits = outcome_bits(sample_bitstrings(state, shots, sample_seed), n)
    n_twirls = -(-shots // shots_per_twirl)
    masks = np.random.default_rng(twirl_seed).integers(0, 2, size=(n_twirls, n), dtype=np.int8)
    masks = np.repeat(masks, shots_per_twirl, axis=0)[:shots]
    physical = bits ^ masks
    measured = apply_readout_noise(physical, model, np.random.default_rng(noise_seed))
    corrected = measured ^ masks
    return 1.0 - 2.0 * corrected.mean(axis=0)


def _rotated(state: StateVector, axis: str, qubits) -> StateVector:
    if axis == "Z":
        return state
    if axis not in _BASIS_CHANGE:
        raise ValidationError(f"unknown Pauli axis {axis!r}")
    rotated = state.copy()
    for q in qubits:
        apply_single_qubit(rotated, _BASIS_CHANGE[axis], q)
    return rotated


def calibrate(model: ReadoutNoiseModel, config: TrexConfig, seed=None) -> np.ndarray:
    """Twirled attenuation per qubit, measured on the empty circuit."""
    seed = config.twirl_seed if seed is None else seed
    zero = new_zero_state(model.num_qubits)
    return twirled_z_means(zero, model, config.calibration_shots, config.shots_per_twirl, seed)


def _mitigate(raw: np.ndarray, lam: np.ndarray) -> np.ndarray:
    if np.any(lam < MIN_ATTENUATION):
        bad = np.flatnonzero(lam < MIN_ATTENUATION).tolist()
        raise MitigationError(f"calibrated attenuation below {MIN_ATTENUATION} on qubits {bad}")
    return np.clip(raw / lam, -1.0, 1.0)


def trex_estimate(state: StateVector, axis: str, q: int, model: ReadoutNoiseModel, config: TrexConfig) -> float:
    n = state.num_qubits
    _check_model(model, n)
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n} qubits")
    cal_seed, target_seed = np.random.SeedSequence(config.twirl_seed).spawn(2)
    lam = calibrate(model, config, cal_seed)
    target = _rotated(state, axis, [q])
    raw = twirled_z_means(target, model, config.shots_per_circuit, config.shots_per_twirl, target_seed)
    return float(_mitigate(raw[q : q + 1], lam[q : q + 1])[0])


def pqf_with_shots(
    spec: FeatureMapSpec,
    x,
    model: ReadoutNoiseModel,
    config: TrexConfig,
    task_id: int = 0,
) -> np.ndarray:
    """Mitigated 3n-vector of Pauli expectations for one data row.

    One calibration run plus three measurement settings (all qubits rotated to
    X, Y or Z together). Streams derive from (twirl_seed, task_id).
    """
    n = spec.num_qubits
    _check_model(model, n)
    state = execute(spec, x, "exact")
    cal_seed, *axis_seeds = np.random.SeedSequence([config.twirl_seed, task_id]).spawn(4)
    lam = calibrate(model, config, cal_seed)
    out = np.empty((n, 3))
    for a, (axis, s) in enumerate(zip("XYZ", axis_seeds)):
        target = _rotated(state, axis, range(n))
        raw = twirled_z_means(target, model, config.shots_per_circuit, config.shots_per_twirl, s)
        out[:, a] = _mitigate(raw, lam)
    return out.reshape(-1)
