"""Turn measurement statistics or exact amplitudes back into fields.

The finite-shot path estimates each cell amplitude as sqrt(S_i / S),
normalizes the estimates to unit 1-norm and distributes the recorded
initial 1-norm over the cells, so the output always sums to exactly that
1-norm.  Cells never observed get zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import MacroField
from .statevector import QState, ShotHistogram


@dataclass
class ReadoutReport:
    """What one run produced, ready for JSON serialization."""

    field: MacroField
    method: str  # "exact" | "sampled"
    shots: int | None = None
    seed: int | None = None
    l2_error: float | None = None
    linf_error: float | None = None
    postselect_probs: list[float] | None = None
    baseline: float | None = None
    initial_l1: float | None = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "geometry": list(self.field.geometry),
            "phi": [float(v) for v in self.field.phi],
            "shots": self.shots,
            "seed": self.seed,
            "l2_error": self.l2_error,
            "linf_error": self.linf_error,
            "postselect_probs": self.postselect_probs,
            "baseline": self.baseline,
            "initial_l1": self.initial_l1,
        }


def macroscopic_from_counts(hist: ShotHistogram, l1: float,
                            geometry: tuple[int, ...] | None = None) -> MacroField:
    """Finite-shot field reconstruction from position-register counts."""
    if hist.shots <= 0 or not hist.counts:
        raise ValueError("zero total shots")
    if l1 <= 0:
        raise ValueError("recorded 1-norm must be positive")
    n_bits = len(next(iter(hist.counts)))
    cells = 1 << n_bits
    if geometry is None:
        geometry = (cells,)
    if int(np.prod(geometry)) != cells:
        raise ValueError("geometry does not match bitstring length")
    amp_est = np.zeros(cells)
    for bits, count in hist.counts.items():
        if len(bits) != n_bits:
            raise ValueError("inconsistent bitstring lengths in histogram")
        amp_est[int(bits, 2)] = np.sqrt(count / hist.shots)
    total = amp_est.sum()
    return MacroField(amp_est / total * l1, geometry)


def macroscopic_exact(state: QState, l1: float,
                      geometry: tuple[int, ...] | None = None) -> MacroField:
    """Infinite-shot limit: distribute l1 by the position amplitudes.

    Valid only while the post-selected amplitudes stay nonnegative, which
    is checked here rather than assumed.
    """
    d = state.d_block()
    if np.max(np.abs(d.imag)) > 1e-9 or np.min(d.real) < -1e-9:
        raise ValueError("position amplitudes are not nonnegative real")
    mags = np.abs(d)
    if geometry is None:
        geometry = (mags.size,)
    return MacroField(mags / mags.sum() * l1, geometry)


def difference_reconstruct(delta_field: MacroField, baseline: float) -> MacroField:
    """Add the uniform baseline back after a difference-mode run; exact
    because the uniform part is a fixed point of the (linear) dynamics."""
    if baseline < 0:
        raise ValueError("baseline must be >= 0")
    return MacroField(delta_field.phi + baseline, delta_field.geometry)


def error_metrics(field: MacroField, reference: MacroField) -> tuple[float, float]:
    """(relative L2 error, absolute Linf error) against a reference."""
    if field.geometry != reference.geometry:
        raise ValueError("geometry mismatch")
    diff = field.phi - reference.phi
    l2 = float(np.linalg.norm(diff) / np.linalg.norm(reference.phi))
    linf = float(np.max(np.abs(diff)))
    return l2, linf
