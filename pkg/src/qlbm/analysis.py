"""Gate-resource accounting and post-selection probability analysis.

Cyclic shifts are executed as permutations in the simulator, but counted
here through their ripple-carry multi-controlled-NOT cascade: one MCX per
block qubit, control counts extra, extra+1, ..., extra+n-1.  An n-controlled
NOT costs max(2n-3, 0) Toffoli gates (n=2 is one Toffoli, n<=1 is free).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import D1Q3, D2Q5
from .statevector import Circuit, GateOp, QState


def toffolis_per_mcx(n_controls: int) -> int:
    return max(2 * n_controls - 3, 0)


@dataclass
class GateInventory:
    """Multi-controlled-NOT census plus a tally of the remaining gates."""

    mcx: dict[int, int] = field(default_factory=dict)  # controls -> count
    other: dict[str, int] = field(default_factory=dict)

    def add_mcx(self, n_controls: int, count: int = 1):
        self.mcx[n_controls] = self.mcx.get(n_controls, 0) + count

    def add_other(self, name: str, count: int = 1):
        self.other[name] = self.other.get(name, 0) + count

    def merge(self, inv: "GateInventory") -> "GateInventory":
        for n, c in inv.mcx.items():
            self.add_mcx(n, c)
        for name, c in inv.other.items():
            self.add_other(name, c)
        return self

    def toffoli_total(self) -> int:
        return sum(c * toffolis_per_mcx(n) for n, c in self.mcx.items())

    def to_dict(self) -> dict:
        return {
            "mcx": {str(n): c for n, c in sorted(self.mcx.items())},
            "other": dict(sorted(self.other.items())),
            "toffoli_total": self.toffoli_total(),
        }


def decompose_shift(n_qubits: int, direction: int, extra_controls: int) -> GateInventory:
    """MCX census of one cyclic shift on an n-qubit block.

    Both directions use the same gates (the decrement is the increment
    cascade reversed), so the census is direction independent.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")
    inv = GateInventory()
    for j in range(n_qubits):
        inv.add_mcx(extra_controls + n_qubits - 1 - j)
    return inv


def shift_gate_ops(n_qubits: int, direction: int, block_offset: int,
                   controls: tuple[tuple[int, int], ...]) -> list[GateOp]:
    """Explicit MCX gate list realizing a controlled cyclic shift.

    Negative external controls are canonicalized to positive ones wrapped
    in X pairs, matching how the census treats them (X gates are free in
    the Toffoli metric).
    """
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")
    pre: list[GateOp] = []
    pos_controls = []
    for qubit, polarity in controls:
        if polarity == 0:
            pre.append(GateOp(kind="x", target=qubit))
        pos_controls.append((qubit, 1))
    cascade = []
    for j in range(n_qubits):
        target = block_offset + j
        internal = tuple((block_offset + k, 1) for k in range(j + 1, n_qubits))
        cascade.append(GateOp(kind="x", target=target,
                              controls=internal + tuple(pos_controls)))
    if direction == -1:
        cascade.reverse()
    return pre + cascade + list(reversed(pre))


def circuit_inventory(circuit: Circuit) -> GateInventory:
    """Canonicalized gate census of an emitted circuit.

    Shifts expand to their MCX cascade; every negative control becomes the
    positive-control gate plus an X pair.
    """
    inv = GateInventory()
    for op in circuit.ops:
        negatives = sum(1 for _, pol in op.controls if pol == 0)
        if op.kind == "shift":
            _, size = op.block
            inv.merge(decompose_shift(size, op.direction, len(op.controls)))
            inv.add_other("x", 2 * negatives)
        elif op.kind == "x":
            if op.controls:
                inv.add_mcx(len(op.controls))
                inv.add_other("x", 2 * negatives)
            else:
                inv.add_other("x")
        else:
            name = op.kind if not op.controls else f"{op.kind}[{len(op.controls)}c]"
            inv.add_other(name)
            inv.add_other("x", 2 * negatives)
    return inv


def toffoli_count(scheme: str, M: int) -> int:
    """Toffoli cost of one loop's streaming stage.

    D2Q5: four shift directions, each controlled by the 3 direction qubits,
    totalling 4 log2(M)^2 + 8 log2(M).  D1Q3: two directions with 2 control
    qubits, totalling 2 log2(M)^2.
    """
    if M < 2 or M & (M - 1):
        raise ValueError("M must be a power of two >= 2")
    n = int(np.log2(M))
    if scheme == D2Q5:
        dirs, extra = 4, 3
    elif scheme == D1Q3:
        dirs, extra = 2, 2
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    total = GateInventory()
    for k in range(dirs):
        total.merge(decompose_shift(n, +1 if k % 2 == 0 else -1, extra))
    return total.toffoli_total()


def prior_method_toffoli_count(M: int) -> int:
    """Toffoli cost per loop of the earlier ancilla-based construction."""
    n = int(np.log2(M))
    return 4 * n * n + 16 * n


def postselect_probability(state_before_summation: QState) -> float:
    """Probability that the q register reads all zeros after the Hadamard
    summation stage, computed from the pre-Hadamard amplitudes.

    Writing the state as sum_j |j>_q (x) g_j, the q = 0 block afterwards is
    2^(-q/2) sum_j g_j, so the probability is |sum_j g_j|^2 / 2^q.
    """
    layout = state_before_summation.layout
    q_dim = 1 << layout.q_qubits
    d_dim = 1 << layout.d_qubits
    blocks = state_before_summation.amplitudes.reshape(q_dim, d_dim)
    merged = blocks.sum(axis=0)
    return float(np.sum(np.abs(merged) ** 2) / q_dim)


def probability_bounds(scheme: str) -> tuple[float, float]:
    """Post-selection probability interval for nonnegative fields.

    With m directions read out through q Hadamards, Cauchy's inequality
    bounds |sum f_a|^2 between sum |f_a|^2 and m * sum |f_a|^2, giving
    [1/2^q, m/2^q].
    """
    if scheme == D1Q3:
        m, q = 3, 2
    elif scheme == D2Q5:
        m, q = 5, 3
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return 1.0 / (1 << q), m / (1 << q)
