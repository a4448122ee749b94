import warnings

import numpy as np
import pytest

import oracles
from pqfcredit.errors import ValidationError
from pqfcredit.featuremap import (
    FeatureLayout,
    FeatureMapSpec,
    build_circuit,
    default_layout,
    execute,
    execute_batch,
    execute_batch_gatewise,
    sample_haar_unitary,
)
from pqfcredit.pqf import project
from pqfcredit.simulator import HeisenbergCoupling, SingleQubitGate, apply_gate, apply_heisenberg, new_zero_state


def test_haar_unitary_is_unitary_and_seeded():
    u = sample_haar_unitary(np.random.default_rng(5))
    np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
    np.testing.assert_array_equal(u, sample_haar_unitary(np.random.default_rng(5)))


def test_haar_first_moment():
    rng = np.random.default_rng(0)
    vals = np.array([abs(sample_haar_unitary(rng)[0, 0]) ** 2 for _ in range(100_000)])
    assert 0.495 <= vals.mean() <= 0.505


def test_haar_second_moment():
    # for Haar U(2), |U00|^2 is uniform on [0, 1]: E[|U00|^4] = 1/3
    rng = np.random.default_rng(1)
    vals = np.array([abs(sample_haar_unitary(rng)[0, 0]) ** 4 for _ in range(50_000)])
    assert vals.mean() == pytest.approx(1 / 3, abs=0.005)


def test_default_layout_examples():
    np.testing.assert_array_equal(default_layout(6, 7, 1).assignment, [[0, 1, 2, 3, 4, 5]])
    np.testing.assert_array_equal(default_layout(4, 3, 2).assignment, [[0, 1], [2, 3]])
    np.testing.assert_array_equal(default_layout(3, 4, 1).assignment, [[0, 1, 2]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        default_layout(9, 10, 1)


def test_default_layout_warns_when_features_unused():
    with pytest.warns(UserWarning):
        lay = default_layout(10, 4, 1)
    np.testing.assert_array_equal(lay.assignment, [[0, 1, 2]])


def test_layout_validation():
    with pytest.raises(ValidationError):
        FeatureMapSpec(4, 1.0, num_features=3, layout=FeatureLayout(np.array([[0, 1, 3]])))
    with pytest.raises(ValidationError):
        FeatureMapSpec(1, 1.0)


def test_circuit_order_fig1_case():
    spec = FeatureMapSpec(7, alpha=0.5, repetitions=1, haar_seed=0, num_features=6)
    x = np.arange(1, 7) / 10
    gates = build_circuit(spec, x)
    assert all(isinstance(g, SingleQubitGate) for g in gates[:7])
    assert [g.qubit for g in gates[:7]] == list(range(7))
    couplings = gates[7:]
    assert [c.qubit_index for c in couplings] == [0, 2, 4, 1, 3, 5]
    for c in couplings:
        assert c.theta == 0.5 * x[c.qubit_index]


def test_circuit_order_r2():
    spec = FeatureMapSpec(4, alpha=1.0, repetitions=2, num_features=3)
    js = [g.qubit_index for g in build_circuit(spec, np.ones(3)) if isinstance(g, HeisenbergCoupling)]
    assert js == [0, 2, 1, 0, 2, 1]


def test_build_circuit_length_mismatch():
    with pytest.raises(ValidationError):
        build_circuit(FeatureMapSpec(4, 1.0), np.ones(5))


def test_build_circuit_deterministic():
    spec = FeatureMapSpec(6, 0.8, 2, haar_seed=3)
    x = np.linspace(0.3, 0.8, 5)
    a, b = build_circuit(spec, x), build_circuit(FeatureMapSpec(6, 0.8, 2, haar_seed=3), x)
    for g, h in zip(a, b):
        if isinstance(g, SingleQubitGate):
            np.testing.assert_array_equal(g.matrix, h.matrix)
        else:
            assert g == h


def test_zero_data_gives_haar_product():
    spec = FeatureMapSpec(5, 1.0, haar_seed=11)
    pqf = project(execute(spec, np.zeros(4)))
    for k, u in enumerate(spec.haar_unitaries):
        psi = u[:, 0]
        expected = [oracles.expectation(psi, oracles.PAULIS[a]) for a in "XYZ"]
        np.testing.assert_allclose(pqf[3 * k : 3 * k + 3], expected, atol=1e-12)


def test_execute_matches_dense_oracle():
    rng = np.random.default_rng(2)
    spec = FeatureMapSpec(5, 0.7, repetitions=2, haar_seed=4, num_features=6)
    x = rng.uniform(0.3, 0.8, 6)
    couplings = [(j, spec.alpha * x[spec.layout.assignment[r, j]]) for r, j in spec.coupling_schedule()]
    psi = oracles.dense_feature_map(spec.haar_unitaries, couplings, 5)
    np.testing.assert_allclose(execute(spec, x).amplitudes, psi, atol=1e-12)


def test_exact_vs_mps_n10():
    rng = np.random.default_rng(3)
    spec = FeatureMapSpec(10, 1.0, haar_seed=5)
    x = rng.uniform(0.3, 0.8, 9)
    np.testing.assert_allclose(
        project(execute(spec, x, "mps", chi_max=1024, trunc_tol=0.0)), project(execute(spec, x)), atol=1e-8
    )


def test_angle_bilinearity():
    rng = np.random.default_rng(4)
    x = rng.uniform(0.3, 0.8, 7)
    spec = FeatureMapSpec(8, 0.6, haar_seed=2)
    # power-of-two factors make alpha*(c*x) and (c*alpha)*x the same float
    for c in (2.0, 0.5, 4.0):
        a = execute(spec, c * x).amplitudes
        b = execute(spec.with_alpha(c * spec.alpha), x).amplitudes
        np.testing.assert_array_equal(a, b)
    for c in (1.7, -0.3):
        a = execute(spec, c * x).amplitudes
        b = execute(spec.with_alpha(c * spec.alpha), x).amplitudes
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_sublayer_order_irrelevant():
    rng = np.random.default_rng(5)
    spec = FeatureMapSpec(7, 0.9, haar_seed=1)
    x = rng.uniform(0.3, 0.8, 6)
    gates = build_circuit(spec, x)
    ref = execute(spec, x).amplitudes
    haar, even, odd = gates[:7], gates[7:10], gates[10:]
    s = new_zero_state(7)
    for g in haar:
        apply_gate(s, g)
    for g in list(reversed(even)) + list(reversed(odd)):
        apply_heisenberg(s, g)
    np.testing.assert_allclose(s.amplitudes, ref, atol=1e-12)


def test_batch_paths_agree():
    rng = np.random.default_rng(6)
    spec = FeatureMapSpec(6, 0.8, repetitions=2, haar_seed=8)
    X = rng.uniform(0.3, 0.8, (7, 5))
    fast = execute_batch(spec, X)
    slow = execute_batch_gatewise(spec, X)
    np.testing.assert_allclose(fast, slow, atol=1e-13)
    for i in range(len(X)):
        np.testing.assert_allclose(fast[i], execute(spec, X[i]).amplitudes, atol=1e-13)


def test_spec_round_trip():
    spec = FeatureMapSpec(5, 0.25, repetitions=2, haar_seed=9, num_features=6)
    again = FeatureMapSpec.from_dict(spec.to_dict())
    assert again == spec
    np.testing.assert_array_equal(again.layout.assignment, spec.layout.assignment)
    np.testing.assert_array_equal(again.haar_unitaries[0], spec.haar_unitaries[0])
