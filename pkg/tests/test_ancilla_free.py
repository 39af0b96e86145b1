import numpy as np
import pytest

from qlbm.ancilla_free import (
    build_collision,
    build_streaming,
    build_summation,
    collision_angles,
    encode_initial,
    layout_for,
    run_exact,
    run_loop_exact,
    run_sampled,
)
from qlbm.lattice import (
    DirectionWeights,
    MacroField,
    ModelSpec,
    classical_run,
    effective_weights,
    uniform_field,
)
from qlbm.statevector import QState, apply_circuit


def d1_weights(w_hat):
    return DirectionWeights(w_hat=tuple(w_hat), e=((0,), (1,), (-1,)))


def random_d1_weights(rng):
    w = rng.random(3)
    return d1_weights(w / w.sum())


def random_d2_weights(rng):
    w = rng.random(5)
    w = w / w.sum()
    return DirectionWeights(w_hat=tuple(w),
                            e=((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)))


# ------------------------------------------------------------------ angles

def test_angles_equal_weights():
    a = collision_angles(d1_weights((1 / 3, 1 / 3, 1 / 3))).angles
    assert np.isclose(a[0], 2 * np.arccos(1 / np.sqrt(3)))
    assert np.isclose(a[1], np.pi / 2)


def test_angles_rest_only():
    a = collision_angles(d1_weights((1.0, 0.0, 0.0))).angles
    assert a == (0.0, 0.0)


def test_angles_default_benchmark_weights():
    # w_hat = (1/3, 0.4, 4/15), ||w_hat|| = sqrt(77)/15; frozen from a direct
    # evaluation of 2*acos(w0/||w||) and 2*acos(w1/hypot(w1, w2))
    a1, a2 = collision_angles(d1_weights((1 / 3, 0.4, 4 / 15))).angles
    assert np.isclose(a1, 1.9290607157591335, atol=1e-12)
    assert np.isclose(a2, 1.1760052070951350, atol=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_angles_reproduce_defining_ratios(seed):
    rng = np.random.default_rng(seed)
    w = np.asarray(random_d1_weights(rng).w_hat)
    a1, a2 = collision_angles(d1_weights(w)).angles
    assert 0.0 <= a1 <= 2 * np.pi and 0.0 <= a2 <= 2 * np.pi
    assert np.isclose(np.cos(a1 / 2), w[0] / np.linalg.norm(w), atol=1e-12)
    assert np.isclose(np.cos(a2 / 2), w[1] / np.hypot(w[1], w[2]), atol=1e-12)


# --------------------------------------------------------------- collision

def collision_output(weights, layout):
    amps = np.zeros(layout.dim, dtype=complex)
    amps[0] = 1.0
    out = apply_circuit(QState(amps, layout), build_collision(weights, layout))
    q_dim = 1 << layout.q_qubits
    return out.amplitudes.reshape(q_dim, -1)[:, 0]


def test_collision_equal_weights():
    layout = layout_for(ModelSpec(scheme="D1Q3", M=4))
    q = collision_output(d1_weights((1 / 3, 1 / 3, 1 / 3)), layout)
    assert np.allclose(q, np.array([1, 0, 1, 1]) / np.sqrt(3), atol=1e-12)


def test_collision_rest_only():
    layout = layout_for(ModelSpec(scheme="D1Q3", M=4))
    q = collision_output(d1_weights((1.0, 0.0, 0.0)), layout)
    assert np.allclose(q, [1, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("seed", range(8))
def test_collision_d1q3_matches_weight_vector(seed):
    rng = np.random.default_rng(seed)
    weights = random_d1_weights(rng)
    w = np.asarray(weights.w_hat)
    layout = layout_for(ModelSpec(scheme="D1Q3", M=4))
    q = collision_output(weights, layout)
    expected = np.array([w[0], 0.0, w[1], w[2]]) / np.linalg.norm(w)
    assert np.allclose(q, expected, atol=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_collision_d2q5_matches_weight_vector(seed):
    rng = np.random.default_rng(100 + seed)
    weights = random_d2_weights(rng)
    w = np.asarray(weights.w_hat)
    layout = layout_for(ModelSpec(scheme="D2Q5", M=4))
    q = collision_output(weights, layout)
    expected = np.zeros(8)
    expected[0] = w[0]
    expected[4:8] = w[1:5]
    assert np.allclose(q, expected / np.linalg.norm(w), atol=1e-12)


# --------------------------------------------------------------- streaming

def basis_state(layout, q, d):
    amps = np.zeros(layout.dim, dtype=complex)
    amps[(q << layout.d_qubits) | d] = 1.0
    return QState(amps, layout)


def test_streaming_d1q3_moves_forward_phase():
    layout = layout_for(ModelSpec(scheme="D1Q3", M=8))
    circ = build_streaming("D1Q3", layout)
    for k in range(8):
        out = apply_circuit(basis_state(layout, 0b10, k), circ)
        hit = int(np.flatnonzero(np.abs(out.amplitudes) > 0.5)[0])
        assert hit == (0b10 << 3) | ((k + 1) % 8)


def test_streaming_d1q3_rest_phase_unchanged():
    layout = layout_for(ModelSpec(scheme="D1Q3", M=8))
    circ = build_streaming("D1Q3", layout)
    out = apply_circuit(basis_state(layout, 0b00, 5), circ)
    assert np.isclose(abs(out.amplitudes[5]), 1.0)


def test_streaming_d2q5_enumeration():
    m = 4
    layout = layout_for(ModelSpec(scheme="D2Q5", M=m))
    circ = build_streaming("D2Q5", layout)
    moves = {
        0b000: (0, 0), 0b100: (1, 0), 0b101: (-1, 0),
        0b110: (0, 1), 0b111: (0, -1),
        0b001: (0, 0), 0b010: (0, 0), 0b011: (0, 0),  # unused phases idle
    }
    for q, (dx, dy) in moves.items():
        for x in range(m):
            for y in range(m):
                out = apply_circuit(basis_state(layout, q, x * m + y), circ)
                hit = int(np.flatnonzero(np.abs(out.amplitudes) > 0.5)[0])
                expected_d = ((x + dx) % m) * m + ((y + dy) % m)
                assert hit == (q << layout.d_qubits) | expected_d


# --------------------------------------------------------------- summation

def test_summation_spreads_q_register():
    layout = layout_for(ModelSpec(scheme="D1Q3", M=4))
    rng = np.random.default_rng(0)
    d = rng.random(4)
    d = d / np.linalg.norm(d)
    amps = np.zeros(layout.dim, dtype=complex)
    amps[:4] = d
    out = apply_circuit(QState(amps, layout), build_summation(layout))
    for q in range(4):
        assert np.allclose(out.amplitudes[q * 4:(q + 1) * 4], d / 2, atol=1e-12)


def test_summation_zero_block_sums_directions():
    # q = |00> amplitude block after the Hadamards is sum_a f_a / (2 ||w||)
    spec = ModelSpec(scheme="D1Q3", M=8, u=0.2)
    layout = layout_for(spec)
    weights = effective_weights(spec)
    rng = np.random.default_rng(1)
    phi = rng.random(8)
    ls = encode_initial(MacroField(phi, (8,)))
    state = apply_circuit(ls.state, build_collision(weights, layout))
    state = apply_circuit(state, build_streaming("D1Q3", layout))
    before = state.amplitudes.reshape(4, 8)
    out = apply_circuit(state, build_summation(layout))
    assert np.allclose(out.amplitudes[:8], before.sum(axis=0) / 2, atol=1e-12)


def test_summation_d2q5_normalization_factor():
    spec = ModelSpec(scheme="D2Q5", M=4, u=0.1, v=0.05)
    layout = layout_for(spec)
    rng = np.random.default_rng(2)
    phi = rng.random(16)
    ls = encode_initial(MacroField(phi, (4, 4)))
    state = apply_circuit(ls.state, build_collision(effective_weights(spec), layout))
    state = apply_circuit(state, build_streaming("D2Q5", layout))
    before = state.amplitudes.reshape(8, 16)
    out = apply_circuit(state, build_summation(layout))
    assert np.allclose(out.amplitudes[:16], before.sum(axis=0) / (2 * np.sqrt(2)),
                       atol=1e-12)


# ------------------------------------------------------------------- loops

def postselected_field(ls):
    d = ls.state.d_block().real
    return d / d.sum()


def test_single_loop_matches_oracle():
    spec = ModelSpec(scheme="D1Q3", M=64, u=0.2)
    phi = np.full(64, 0.1)
    phi[11] = 0.2
    field = MacroField(phi, (64,))
    ls = run_loop_exact(encode_initial(field), spec)
    ref = classical_run(field, spec, 1)
    assert np.max(np.abs(postselected_field(ls) * ref.phi.sum() - ref.phi)) < 1e-10


def test_uniform_field_stays_uniform():
    spec = ModelSpec(scheme="D1Q3", M=16, u=0.2)
    ls = run_exact(uniform_field((16,), 0.5), spec, 4)
    d = ls.state.d_block()
    assert np.allclose(d, d[0], atol=1e-12)


@pytest.mark.parametrize("scheme,m,loops", [("D1Q3", 16, 6), ("D2Q5", 8, 5)])
def test_multi_loop_exactness_random_fields(scheme, m, loops):
    rng = np.random.default_rng(7)
    geometry = (m,) if scheme == "D1Q3" else (m, m)
    spec = ModelSpec(scheme=scheme, M=m, u=0.15, v=0.1 if scheme == "D2Q5" else 0.0)
    for _ in range(3):
        field = MacroField(rng.random(int(np.prod(geometry))), geometry)
        ls = run_exact(field, spec, loops)
        ref = classical_run(field, spec, loops)
        got = postselected_field(ls) * ref.phi.sum()
        assert np.max(np.abs(got - ref.phi)) < 1e-10


def test_exactness_with_random_weights():
    rng = np.random.default_rng(12)
    for seed in range(4):
        w = rng.random(3)
        w = w / w.sum()
        # u=0 keeps the override symmetric, so these ARE the effective weights
        spec = ModelSpec(scheme="D1Q3", M=8, u=0.0,
                         weights=(w[0], (w[1] + w[2]) / 2, (w[1] + w[2]) / 2))
        field = MacroField(rng.random(8) + 0.05, (8,))
        ls = run_exact(field, spec, 10)
        ref = classical_run(field, spec, 10)
        got = postselected_field(ls) * ref.phi.sum()
        assert np.max(np.abs(got - ref.phi)) < 1e-10


def test_cumulative_probability_is_product():
    spec = ModelSpec(scheme="D1Q3", M=16, u=0.2)
    rng = np.random.default_rng(3)
    ls = run_exact(MacroField(rng.random(16), (16,)), spec, 5)
    assert np.isclose(ls.cumulative_postselect_prob, np.prod(ls.loop_probs))
    assert 0.0 < ls.cumulative_postselect_prob <= 1.0


def test_omega_must_be_one():
    spec = ModelSpec(scheme="D1Q3", M=8, omega=1.5)
    with pytest.raises(ValueError, match="omega = 1"):
        run_loop_exact(encode_initial(uniform_field((8,), 1.0)), spec)


def test_loop_needs_no_field_reconstruction():
    # chaining consumes only the state and scalars
    spec = ModelSpec(scheme="D1Q3", M=8, u=0.1)
    ls = encode_initial(MacroField(np.arange(1.0, 9.0), (8,)))
    for _ in range(3):
        ls = run_loop_exact(ls, spec)
    assert ls.loop_index == 3
    assert len(ls.loop_probs) == 3


# ---------------------------------------------------------------- encoding

def test_encode_initial_difference_mode():
    phi = np.full(64, 0.1)
    phi[11] = 0.2
    ls = encode_initial(MacroField(phi, (64,)), difference_mode=True)
    assert ls.baseline == 0.1
    assert np.isclose(ls.initial_l1, 0.1)
    d = ls.state.d_block()
    assert np.isclose(abs(d[11]), 1.0)


def test_encode_initial_direct_mode():
    phi = np.full(64, 0.1)
    phi[11] = 0.2
    ls = encode_initial(MacroField(phi, (64,)))
    assert ls.baseline is None
    assert np.isclose(ls.initial_l1, 6.5)


def test_encode_initial_constant_field():
    with pytest.raises(ValueError, match="nonuniform"):
        encode_initial(uniform_field((8,), 0.3), difference_mode=True)
    ls = encode_initial(uniform_field((8,), 0.3))
    assert np.allclose(np.abs(ls.state.d_block()), 1 / np.sqrt(8))


# ---------------------------------------------------------------- sampling

def test_run_sampled_deterministic():
    spec = ModelSpec(scheme="D1Q3", M=16, u=0.2)
    phi = np.full(16, 0.1)
    phi[3] = 0.4
    field = MacroField(phi, (16,))
    h1 = run_sampled(field, spec, 5, 20000, seed=13)
    h2 = run_sampled(field, spec, 5, 20000, seed=13)
    assert h1 == h2


def test_run_sampled_frequencies_converge():
    spec = ModelSpec(scheme="D1Q3", M=8, u=0.2)
    phi = np.zeros(8)
    phi[2] = 1.0
    field = MacroField(phi, (8,))
    shots = 10**6
    hist = run_sampled(field, spec, 1, shots, seed=5)
    ref = classical_run(field, spec, 1).phi
    expected = ref**2 / np.sum(ref**2)
    for i, p in enumerate(expected):
        freq = hist.counts.get(format(i, "03b"), 0) / shots
        assert abs(freq - p) < 4 * np.sqrt(max(p, 1e-9) * (1 - p) / shots) + 1e-6


def test_run_sampled_rejection_mode_thins_shots():
    spec = ModelSpec(scheme="D1Q3", M=16, u=0.2)
    phi = np.zeros(16)
    phi[5] = 1.0
    field = MacroField(phi, (16,))
    shots = 10**5
    hist = run_sampled(field, spec, 2, shots, seed=2, postselect="rejection")
    cum = run_exact(field, spec, 2).cumulative_postselect_prob
    assert hist.shots < shots
    assert abs(hist.shots - shots * cum) < 5 * np.sqrt(shots * cum * (1 - cum))
    assert sum(hist.counts.values()) == hist.shots


def test_d2q5_probabilities_within_bounds():
    rng = np.random.default_rng(9)
    spec = ModelSpec(scheme="D2Q5", M=4, u=0.1, v=-0.05)
    for _ in range(25):
        field = MacroField(rng.random(16), (4, 4))
        ls = run_loop_exact(encode_initial(field), spec)
        assert 0.125 - 1e-12 <= ls.loop_probs[0] <= 0.625 + 1e-12
