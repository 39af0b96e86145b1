"""Quantum pipeline without a collision ancilla.

One loop = collision rotations on the direction register, cyclic shifts on
the position register controlled by the direction phases, a Hadamard on
every direction qubit to sum the per-direction distributions point-wise,
and post-selection of the direction register on all zeros.  The collapsed
position-register amplitudes are then proportional to one classical
collide-stream cycle of the field, so loops chain without any classical
readout in between.

Direction encoding on the q register (most significant qubits first):
rest |0..0>, then +x |10>/|100>, -x |11>/|101>, +y |110>, -y |111>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .lattice import (
    D1Q3,
    D2Q5,
    DirectionWeights,
    MacroField,
    ModelSpec,
    effective_weights,
)
from .statevector import (
    Circuit,
    GateOp,
    QState,
    QubitLayout,
    ShotHistogram,
    apply_circuit,
    encode_amplitudes,
    project,
)


@dataclass(frozen=True)
class CollisionAngles:
    """Ry angles realizing the direction-register superposition."""

    angles: tuple[float, ...]


@dataclass
class LoopState:
    """State threaded through successive loops."""

    state: QState
    loop_index: int
    initial_l1: float
    cumulative_postselect_prob: float = 1.0
    baseline: float | None = None
    loop_probs: list[float] = dc_field(default_factory=list)


def layout_for(spec: ModelSpec) -> QubitLayout:
    n = int(math.log2(spec.M))
    if spec.scheme == D1Q3:
        return QubitLayout(q_qubits=2, axis_qubits=(n,))
    return QubitLayout(q_qubits=3, axis_qubits=(n, n))


def _half_angle(numer: float, denom: float) -> float:
    # zero denominator means the remaining branch carries no amplitude;
    # any angle works there, 0 keeps the circuit minimal
    if denom < 1e-300:
        return 0.0
    return 2.0 * math.acos(min(max(numer / denom, 0.0), 1.0))


def collision_angles(weights: DirectionWeights) -> CollisionAngles:
    """Rotation angles from the effective weights.

    Each angle is 2*arccos of the ratio between one weight and the 2-norm
    of the weights still to be distributed, so cos(angle/2) reproduces that
    ratio exactly.
    """
    w = np.asarray(weights.w_hat, dtype=float)
    if np.any(w < 0):
        raise ValueError("effective weights must be nonnegative")
    if not np.any(w > 0):
        raise ValueError("all-zero weight set")
    if len(w) == 3:
        rest = math.hypot(w[1], w[2])
        a1 = _half_angle(w[0], math.sqrt(w[0] ** 2 + rest**2))
        a2 = _half_angle(w[1], rest)
        return CollisionAngles((a1, a2))
    if len(w) == 5:
        sx = math.hypot(w[1], w[2])
        sy = math.hypot(w[3], w[4])
        moving = math.sqrt(sx**2 + sy**2)
        a1 = _half_angle(w[0], math.sqrt(w[0] ** 2 + moving**2))
        a2 = _half_angle(sx, moving)
        a3 = _half_angle(w[1], sx)
        a4 = _half_angle(w[3], sy)
        return CollisionAngles((a1, a2, a3, a4))
    raise ValueError("weight sets must have 3 (D1Q3) or 5 (D2Q5) entries")


def build_collision(weights: DirectionWeights, layout: QubitLayout) -> Circuit:
    """Rotation tree taking q = |0..0> to the weight superposition.

    Three directions: w0|00> + w1|10> + w2|11>, normalized.  Five:
    w0|000> + w1|100> + w2|101> + w3|110> + w4|111>, normalized.
    """
    a = collision_angles(weights).angles
    if len(a) == 2:
        ops = [
            GateOp(kind="ry", target=0, angle=a[0]),
            GateOp(kind="ry", target=1, angle=a[1], controls=((0, 1),)),
        ]
    else:
        ops = [
            GateOp(kind="ry", target=0, angle=a[0]),
            GateOp(kind="ry", target=1, angle=a[1], controls=((0, 1),)),
            GateOp(kind="ry", target=2, angle=a[2], controls=((0, 1), (1, 0))),
            GateOp(kind="ry", target=2, angle=a[3], controls=((0, 1), (1, 1))),
        ]
    return Circuit(layout, ops)


def build_streaming(scheme: str, layout: QubitLayout) -> Circuit:
    """Cyclic shifts on the position blocks, one per moving direction,
    controlled by that direction's q-register phase."""
    if scheme == D1Q3:
        block = layout.axis_block(0)
        ops = [
            GateOp(kind="shift", block=block, direction=+1, controls=((0, 1), (1, 0))),
            GateOp(kind="shift", block=block, direction=-1, controls=((0, 1), (1, 1))),
        ]
    elif scheme == D2Q5:
        x_block = layout.axis_block(0)
        y_block = layout.axis_block(1)
        ops = [
            GateOp(kind="shift", block=x_block, direction=+1,
                   controls=((0, 1), (1, 0), (2, 0))),
            GateOp(kind="shift", block=x_block, direction=-1,
                   controls=((0, 1), (1, 0), (2, 1))),
            GateOp(kind="shift", block=y_block, direction=+1,
                   controls=((0, 1), (1, 1), (2, 0))),
            GateOp(kind="shift", block=y_block, direction=-1,
                   controls=((0, 1), (1, 1), (2, 1))),
        ]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return Circuit(layout, ops)


def build_summation(layout: QubitLayout) -> Circuit:
    """Hadamard on every direction qubit: point-wise sum over directions."""
    ops = [GateOp(kind="h", target=q) for q in range(layout.q_qubits)]
    return Circuit(layout, ops)


_circuit_cache: dict = {}


def _circuits_for(spec: ModelSpec) -> tuple[Circuit, Circuit, Circuit]:
    weights = effective_weights(spec)
    key = (spec.scheme, spec.M, weights.w_hat)
    if key not in _circuit_cache:
        layout = layout_for(spec)
        _circuit_cache[key] = (
            build_collision(weights, layout),
            build_streaming(spec.scheme, layout),
            build_summation(layout),
        )
    return _circuit_cache[key]


def _require_unit_omega(spec: ModelSpec):
    if spec.omega != 1.0:
        raise ValueError(
            "quantum pipeline requires omega = 1: the rotation-tree collision "
            "replaces distributions by their equilibrium, which is exact only "
            f"at omega = 1 (got omega = {spec.omega})"
        )


def encode_initial(field: MacroField, difference_mode: bool = False) -> LoopState:
    """Amplitude-encode a field, optionally as its offset from the minimum.

    Difference mode subtracts the uniform minimum before encoding; the
    uniform part is a fixed point of the dynamics and is added back at
    readout.  The encoded vector's 1-norm is recorded for the readout.
    """
    geometry = field.geometry
    layout = (
        QubitLayout(2, (int(math.log2(geometry[0])),))
        if len(geometry) == 1
        else QubitLayout(3, tuple(int(math.log2(m)) for m in geometry))
    )
    for m in geometry:
        if m < 2 or m & (m - 1):
            raise ValueError("lattice sizes must be powers of two")
    values = field.phi
    baseline = None
    if difference_mode:
        baseline = float(values.min())
        values = values - baseline
        if not np.any(values > 0):
            raise ValueError("difference mode needs nonuniform field")
    encoded = encode_amplitudes(values, layout)
    return LoopState(
        state=encoded.state,
        loop_index=0,
        initial_l1=encoded.l1_norm,
        baseline=baseline,
    )


def run_loop_exact(loop_state: LoopState, spec: ModelSpec) -> LoopState:
    """One collision-streaming-summation-postselection loop.

    The returned position-register amplitudes are proportional to the
    classical field advanced by loop_index + 1 cycles.
    """
    _require_unit_omega(spec)
    collision, streaming, summation = _circuits_for(spec)
    state = apply_circuit(loop_state.state, collision)
    state = apply_circuit(state, streaming)
    state = apply_circuit(state, summation)
    prob, state = project(state)
    return LoopState(
        state=state,
        loop_index=loop_state.loop_index + 1,
        initial_l1=loop_state.initial_l1,
        cumulative_postselect_prob=loop_state.cumulative_postselect_prob * prob,
        baseline=loop_state.baseline,
        loop_probs=loop_state.loop_probs + [prob],
    )


def sample_readout(loop_state: LoopState, shots: int, seed: int,
                   postselect: str = "exact") -> ShotHistogram:
    """Measure the position register of a post-selected loop state.

    Histogram keys are position-register bitstrings.  With
    ``postselect="rejection"`` the shot count is treated as a budget of
    whole-trajectory attempts instead: the number of surviving shots is
    binomial in the cumulative post-selection probability, mirroring a
    hardware run that discards trajectories whose mid-circuit direction
    measurement is not all zeros.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if postselect not in ("exact", "rejection"):
        raise ValueError("postselect must be 'exact' or 'rejection'")
    d = loop_state.state.d_block()
    probs = np.abs(d) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    n_meas = shots
    if postselect == "rejection":
        n_meas = int(rng.binomial(shots, loop_state.cumulative_postselect_prob))
        if n_meas == 0:
            raise ValueError("rejection sampling kept zero trajectories")
    draws = rng.multinomial(n_meas, probs)
    n_bits = loop_state.state.layout.d_qubits
    counts = {format(i, f"0{n_bits}b"): int(c) for i, c in enumerate(draws) if c > 0}
    return ShotHistogram(counts=counts, shots=n_meas, seed=seed)


def run_sampled(initial: MacroField, spec: ModelSpec, loops: int, shots: int,
                seed: int, difference_mode: bool = False,
                postselect: str = "exact") -> ShotHistogram:
    """Run ``loops`` post-selected loops, then measure the position register.

    The post-selected branch is tracked exactly and only the final readout
    is sampled (see sample_readout for the rejection variant).
    """
    if loops < 1:
        raise ValueError("loops must be >= 1")
    ls = encode_initial(initial, difference_mode)
    for _ in range(loops):
        ls = run_loop_exact(ls, spec)
    return sample_readout(ls, shots, seed, postselect)


def run_exact(initial: MacroField, spec: ModelSpec, loops: int,
              difference_mode: bool = False) -> LoopState:
    """Convenience wrapper: encode and advance ``loops`` exact loops."""
    ls = encode_initial(initial, difference_mode)
    for _ in range(loops):
        ls = run_loop_exact(ls, spec)
    return ls
