"""Dense statevector simulator for the solver's small register layouts.

Bit ordering convention (used everywhere, including histogram bitstrings):
qubit 0 is the most significant bit of a basis index.  The direction
register q occupies the top ``q_qubits`` qubits, the position register d
sits below it.  For two-dimensional lattices the d register splits into an
x-axis block (more significant) followed by a y-axis block, so the flat
d index of cell (x, y) is ``x * My + y`` -- identical to row-major order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class PostSelectionError(RuntimeError):
    """Raised when a projection has (numerically) zero success probability."""


@dataclass(frozen=True)
class QubitLayout:
    """Register layout: q (direction) qubits on top of per-axis d blocks."""

    q_qubits: int
    axis_qubits: tuple[int, ...]

    def __post_init__(self):
        if self.q_qubits < 0:
            raise ValueError("q_qubits must be >= 0")
        if any(a < 1 for a in self.axis_qubits):
            raise ValueError("axis blocks need at least one qubit")

    @property
    def d_qubits(self) -> int:
        return sum(self.axis_qubits)

    @property
    def n_qubits(self) -> int:
        return self.q_qubits + self.d_qubits

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def axis_block(self, axis: int) -> tuple[int, int]:
        """(first qubit index, size) of one position-axis block."""
        offset = self.q_qubits + sum(self.axis_qubits[:axis])
        return offset, self.axis_qubits[axis]

    def bitstring(self, index: int) -> str:
        return format(index, f"0{self.n_qubits}b")

    def d_index(self, index: int) -> int:
        return index & ((1 << self.d_qubits) - 1)

    def q_index(self, index: int) -> int:
        return index >> self.d_qubits


@dataclass
class QState:
    """Normalized complex amplitude vector over a fixed QubitLayout."""

    amplitudes: np.ndarray
    layout: QubitLayout

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.layout.dim,):
            raise ValueError(
                f"amplitude vector has length {self.amplitudes.shape}, "
                f"layout needs {self.layout.dim}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "QState":
        return QState(self.amplitudes.copy(), self.layout)

    def d_block(self) -> np.ndarray:
        """Amplitudes of the q = |0..0> block, ordered by d index."""
        return self.amplitudes[: 1 << self.layout.d_qubits].copy()


@dataclass(frozen=True)
class GateOp:
    """One abstract gate: Ry/H/X on a single qubit, or a cyclic shift on an
    axis block.  ``controls`` is a tuple of (qubit, polarity) pairs; polarity
    0 means the gate fires when that qubit is |0>."""

    kind: str  # "ry" | "h" | "x" | "shift"
    target: int | None = None
    angle: float | None = None
    block: tuple[int, int] | None = None  # (first qubit, size) for shifts
    direction: int = 0  # +1 / -1 for shifts
    controls: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.kind not in ("ry", "h", "x", "shift"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "shift":
            if self.block is None or self.direction not in (+1, -1):
                raise ValueError("shift needs a block and direction +1/-1")
        elif self.target is None:
            raise ValueError(f"{self.kind} gate needs a target qubit")
        if self.kind == "ry" and self.angle is None:
            raise ValueError("ry gate needs an angle")


@dataclass
class Circuit:
    layout: QubitLayout
    ops: list[GateOp] = field(default_factory=list)

    def extend(self, ops) -> "Circuit":
        self.ops.extend(ops)
        return self


class ShotHistogram(NamedTuple):
    """Measured bitstring counts from a finite-shot run."""

    counts: dict[str, int]
    shots: int
    seed: int


class EncodedState(NamedTuple):
    state: QState
    l2_norm: float
    l1_norm: float


_SQRT1_2 = 1.0 / np.sqrt(2.0)


def _control_mask(n: int, controls, exclude_bits: int = 0) -> np.ndarray:
    """Boolean mask over basis indices where all controls match."""
    idx = np.arange(1 << n)
    ok = np.ones(idx.shape, dtype=bool)
    for qubit, polarity in controls:
        if not 0 <= qubit < n:
            raise IndexError(f"control qubit {qubit} out of range for {n} qubits")
        if polarity not in (0, 1):
            raise ValueError("control polarity must be 0 or 1")
        bit = 1 << (n - 1 - qubit)
        if bit & exclude_bits:
            raise ValueError("control overlaps gate target")
        ok &= ((idx & bit) != 0) == bool(polarity)
    return ok


def _apply_1q(amps: np.ndarray, u: np.ndarray, target: int, n: int, controls) -> np.ndarray:
    if not 0 <= target < n:
        raise IndexError(f"target qubit {target} out of range for {n} qubits")
    tbit = 1 << (n - 1 - target)
    ok = _control_mask(n, controls, exclude_bits=tbit)
    idx = np.arange(1 << n)
    i0 = idx[ok & ((idx & tbit) == 0)]
    i1 = i0 | tbit
    a0 = amps[i0]
    a1 = amps[i1]
    out = amps.copy()
    out[i0] = u[0, 0] * a0 + u[0, 1] * a1
    out[i1] = u[1, 0] * a0 + u[1, 1] * a1
    return out


def _apply_shift(amps: np.ndarray, block: tuple[int, int], direction: int,
                 n: int, controls) -> np.ndarray:
    offset, size = block
    if offset < 0 or offset + size > n:
        raise IndexError(f"shift block {block} out of range for {n} qubits")
    low = n - offset - size  # bit position of the block's LSB
    block_mask = ((1 << size) - 1) << low
    ok = _control_mask(n, controls, exclude_bits=block_mask)
    idx = np.arange(1 << n)
    k = (idx & block_mask) >> low
    k_new = (k + direction) % (1 << size)
    dest = (idx & ~block_mask) | (k_new << low)
    out = amps.copy()
    out[dest[ok]] = amps[idx[ok]]
    return out


def apply(state: QState, op: GateOp) -> QState:
    """Apply one GateOp; returns a new state (norm preserved)."""
    n = state.layout.n_qubits
    amps = state.amplitudes
    if op.kind == "shift":
        new = _apply_shift(amps, op.block, op.direction, n, op.controls)
    else:
        if op.kind == "h":
            u = np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)
        elif op.kind == "x":
            u = np.array([[0, 1], [1, 0]], dtype=complex)
        else:  # ry
            c, s = np.cos(op.angle / 2), np.sin(op.angle / 2)
            u = np.array([[c, -s], [s, c]], dtype=complex)
        new = _apply_1q(amps, u, op.target, n, op.controls)
    return QState(new, state.layout)


def apply_circuit(state: QState, circuit: Circuit) -> QState:
    for op in circuit.ops:
        state = apply(state, op)
    return state


def encode_amplitudes(values: np.ndarray, layout: QubitLayout) -> EncodedState:
    """Amplitude-encode a nonnegative vector into the d register.

    The q register is left in |0..0>.  Both the 2-norm (used for the
    encoding itself) and the 1-norm (needed later to turn measurement
    statistics back into physical values) are returned alongside the state.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (1 << layout.d_qubits,):
        raise ValueError(
            f"need {1 << layout.d_qubits} values for {layout.d_qubits} d qubits, "
            f"got {values.shape}"
        )
    if np.any(values < 0):
        raise ValueError("non-encodable field: negative entries")
    l2 = float(np.linalg.norm(values))
    if l2 == 0.0:
        raise ValueError("empty field: all entries are zero")
    amps = np.zeros(layout.dim, dtype=complex)
    amps[: values.size] = values / l2
    return EncodedState(QState(amps, layout), l2, float(values.sum()))


def project(state: QState, bitstring: str | None = None) -> tuple[float, QState]:
    """Post-select the q register on a basis bitstring (default all zeros).

    Returns the success probability and the renormalized collapsed state.
    """
    layout = state.layout
    if bitstring is None:
        bitstring = "0" * layout.q_qubits
    if len(bitstring) != layout.q_qubits:
        raise ValueError("bitstring length must equal q_qubits")
    q_value = int(bitstring, 2) if bitstring else 0
    d_dim = 1 << layout.d_qubits
    block = slice(q_value * d_dim, (q_value + 1) * d_dim)
    sub = state.amplitudes[block]
    prob = float(np.sum(np.abs(sub) ** 2))
    if prob < 1e-14:
        raise PostSelectionError(
            f"post-selection impossible: q={bitstring!r} has probability {prob:.3e}"
        )
    amps = np.zeros(layout.dim, dtype=complex)
    amps[block] = sub / np.sqrt(prob)
    return prob, QState(amps, layout)


def sample(state: QState, shots: int, seed: int) -> ShotHistogram:
    """Multinomial sampling of the full register; deterministic per seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    counts = {
        state.layout.bitstring(i): int(c) for i, c in enumerate(draws) if c > 0
    }
    return ShotHistogram(counts=counts, shots=shots, seed=seed)


def shift_unitary_check(n_qubits: int, direction: int) -> bool:
    """True iff the multi-controlled-NOT cascade for a cyclic shift acts as
    |k> -> |(k + direction) mod 2^n> on every basis state."""
    if not 1 <= n_qubits <= 8:
        raise ValueError("n_qubits must be in [1, 8]")
    from .analysis import shift_gate_ops  # local import: analysis builds on this module

    layout = QubitLayout(q_qubits=0, axis_qubits=(n_qubits,))
    ops = shift_gate_ops(n_qubits, direction, block_offset=0, controls=())
    dim = 1 << n_qubits
    for k in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[k] = 1.0
        st = QState(amps, layout)
        for op in ops:
            st = apply(st, op)
        expected = (k + direction) % dim
        hit = np.flatnonzero(np.abs(st.amplitudes) > 0.5)
        if hit.size != 1 or hit[0] != expected:
            return False
    return True
