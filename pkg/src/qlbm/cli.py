"""Command-line front end: configure, run, compare, and export results.

Experiments are described by a JSON config (they carry too many knobs for
flags, and the config is archived next to the outputs).  Every output
embeds the resolved config; identical config + seed gives byte-identical
CSV/JSON files, so timings go to stderr instead of the report.

Exit codes: 0 success, 2 config error, 3 post-selection failure,
4 internal assertion (regression tripwire).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import (
    circuit_inventory,
    prior_method_toffoli_count,
    probability_bounds,
    toffoli_count,
)
from .ancilla_based import LegacySpec, run_legacy_step
from .ancilla_free import (
    encode_initial,
    layout_for,
    run_exact,
    run_loop_exact,
    sample_readout,
)
from .lattice import (
    D1Q3,
    D2Q5,
    MacroField,
    ModelSpec,
    classical_run,
    classical_step,
    uniform_field,
    weighted_stream_sum,
)
from .readout import (
    ReadoutReport,
    difference_reconstruct,
    error_metrics,
    macroscopic_exact,
    macroscopic_from_counts,
)
from .statevector import PostSelectionError

D1Q2 = "D1Q2"
MODES = ("classical", "quantum-exact", "quantum-sampled", "legacy")
WORKERS_ENV = "QLBM_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scheme: str
    M: int
    mode: str
    loops: int
    u: float = 0.0
    v: float = 0.0
    omega: float = 1.0
    weights: tuple[float, ...] | None = None
    c_s2: float | None = None
    w_hat: tuple[float, float] | None = None  # two-direction legacy model only
    uniform: float = 0.0
    overrides: tuple = ()
    difference_mode: bool = False
    shots: int = 10000
    seed: int = 0
    snapshots: tuple[int, ...] = ()

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {
            "scheme", "M", "mode", "loops", "u", "v", "omega", "weights",
            "c_s2", "w_hat", "initial", "difference_mode", "shots", "seed",
            "snapshots",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            initial = raw.get("initial", {})
            cfg = cls(
                scheme=raw["scheme"],
                M=int(raw["M"]),
                mode=raw["mode"],
                loops=int(raw.get("loops", 1)),
                u=float(raw.get("u", 0.0)),
                v=float(raw.get("v", 0.0)),
                omega=float(raw.get("omega", 1.0)),
                weights=tuple(raw["weights"]) if raw.get("weights") else None,
                c_s2=raw.get("c_s2"),
                w_hat=tuple(raw["w_hat"]) if raw.get("w_hat") else None,
                uniform=float(initial.get("uniform", 0.0)),
                overrides=tuple(tuple(o) for o in initial.get("overrides", ())),
                difference_mode=bool(raw.get("difference_mode", False)),
                shots=int(raw.get("shots", 10000)),
                seed=int(raw.get("seed", 0)),
                snapshots=tuple(int(t) for t in raw.get("snapshots", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.scheme not in (D1Q3, D2Q5, D1Q2):
            raise ConfigError("scheme must be D1Q3, D2Q5 or D1Q2")
        if self.M < 2 or self.M & (self.M - 1):
            raise ConfigError("M must be a power of two >= 2")
        if self.loops < 0:
            raise ConfigError("loops must be >= 0")
        if self.scheme == D1Q2:
            if self.mode not in ("legacy", "classical"):
                raise ConfigError("scheme D1Q2 supports modes legacy and classical only")
            if self.w_hat is None:
                raise ConfigError("scheme D1Q2 needs explicit w_hat = [w1, w2]")
            if abs(sum(self.w_hat) - 1.0) > 1e-12:
                raise ConfigError("w_hat must sum to 1")
        elif self.mode == "legacy":
            raise ConfigError("mode legacy needs scheme D1Q2")
        if self.mode == "legacy" and self.loops != 1:
            raise ConfigError("mode legacy runs exactly one loop")
        if self.mode == "quantum-sampled":
            if self.shots < 1:
                raise ConfigError("shots must be >= 1")
            if self.loops < 1:
                raise ConfigError("quantum-sampled needs loops >= 1")
        if self.uniform < 0 or any(v < 0 for _, v in self.overrides):
            raise ConfigError("field values must be nonnegative")
        for cell, _ in self.overrides:
            idx = (cell,) if isinstance(cell, int) else tuple(cell)
            if len(idx) != self.ndim or any(not 0 <= c < self.M for c in idx):
                raise ConfigError(f"override cell {cell} outside the lattice")
        # the quantum builders insist on omega = 1; fail early with context
        if self.mode.startswith("quantum") and self.omega != 1.0:
            raise ConfigError("quantum modes require omega = 1")
        if self.snapshots:
            if self.mode not in ("classical", "quantum-exact"):
                raise ConfigError("snapshots need mode classical or quantum-exact")
            if any(not 1 <= t <= self.loops for t in self.snapshots):
                raise ConfigError("snapshot times must lie in [1, loops]")

    @property
    def ndim(self) -> int:
        return 2 if self.scheme == D2Q5 else 1

    @property
    def geometry(self) -> tuple[int, ...]:
        return (self.M,) * self.ndim

    def initial_field(self) -> MacroField:
        field = uniform_field(self.geometry, self.uniform)
        grid = field.grid()
        for cell, value in self.overrides:
            idx = (cell,) if isinstance(cell, int) else tuple(cell)
            grid[idx] = value
        return MacroField(grid.ravel(), self.geometry)

    def model_spec(self) -> ModelSpec:
        try:
            return ModelSpec(scheme=self.scheme, M=self.M, u=self.u, v=self.v,
                             omega=self.omega, weights=self.weights, c_s2=self.c_s2)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def resolved(self) -> dict:
        out = {
            "scheme": self.scheme,
            "M": self.M,
            "mode": self.mode,
            "loops": self.loops,
            "u": self.u,
            "v": self.v,
            "omega": self.omega,
            "weights": list(self.weights) if self.weights else None,
            "c_s2": self.c_s2,
            "w_hat": list(self.w_hat) if self.w_hat else None,
            "initial": {
                "uniform": self.uniform,
                "overrides": [[list(c) if not isinstance(c, int) else c, v]
                              for c, v in self.overrides],
            },
            "difference_mode": self.difference_mode,
            "shots": self.shots,
            "seed": self.seed,
            "snapshots": list(self.snapshots),
        }
        return out


def execute(cfg: RunConfig, seed: int | None = None) -> ReadoutReport:
    """Run one configured experiment and return its report."""
    seed = cfg.seed if seed is None else seed
    field0 = cfg.initial_field()
    if cfg.mode == "classical":
        if cfg.scheme == D1Q2:
            out = field0
            e = ((1,), (-1,))
            for _ in range(cfg.loops):
                out = weighted_stream_sum(out, cfg.w_hat, e)
        else:
            out = classical_run(field0, cfg.model_spec(), cfg.loops)
        return ReadoutReport(field=out, method="classical")

    if cfg.mode == "legacy":
        spec = LegacySpec(M=cfg.M, w_hat1=cfg.w_hat[0], w_hat2=cfg.w_hat[1],
                          phi0=field0.phi)
        result = run_legacy_step(spec)
        return ReadoutReport(field=result.field, method="legacy",
                             postselect_probs=[result.probability])

    spec = cfg.model_spec()
    ls = run_exact(field0, spec, cfg.loops, cfg.difference_mode)
    if cfg.mode == "quantum-exact":
        delta = macroscopic_exact(ls.state, ls.initial_l1, cfg.geometry)
        out = (difference_reconstruct(delta, ls.baseline)
               if cfg.difference_mode else delta)
        return ReadoutReport(field=out, method="exact",
                             postselect_probs=list(ls.loop_probs),
                             baseline=ls.baseline, initial_l1=ls.initial_l1)

    hist = sample_readout(ls, cfg.shots, seed)
    delta = macroscopic_from_counts(hist, ls.initial_l1, cfg.geometry)
    out = (difference_reconstruct(delta, ls.baseline)
           if cfg.difference_mode else delta)
    return ReadoutReport(field=out, method="sampled", shots=hist.shots,
                         seed=seed, postselect_probs=list(ls.loop_probs),
                         baseline=ls.baseline, initial_l1=ls.initial_l1)


def snapshot_fields(cfg: RunConfig) -> list[tuple[int, MacroField]]:
    """Fields at the requested intermediate times, one pass over the loops."""
    wanted = set(cfg.snapshots)
    taken: list[tuple[int, MacroField]] = []
    if not wanted:
        return taken
    if cfg.mode == "classical":
        cur = cfg.initial_field()
        spec = cfg.model_spec() if cfg.scheme != D1Q2 else None
        e = ((1,), (-1,))
        for t in range(1, cfg.loops + 1):
            cur = (weighted_stream_sum(cur, cfg.w_hat, e) if spec is None
                   else classical_step(cur, spec))
            if t in wanted:
                taken.append((t, cur.copy()))
        return taken

    spec = cfg.model_spec()
    ls = encode_initial(cfg.initial_field(), cfg.difference_mode)
    for t in range(1, cfg.loops + 1):
        ls = run_loop_exact(ls, spec)
        if t in wanted:
            delta = macroscopic_exact(ls.state, ls.initial_l1, cfg.geometry)
            taken.append((t, difference_reconstruct(delta, ls.baseline)
                          if cfg.difference_mode else delta))
    return taken


def _csv_num(x: float) -> str:
    return f"{x:.17g}"


def field_csv(field: MacroField) -> str:
    lines = []
    if len(field.geometry) == 1:
        lines.append("cell,phi")
        for i, v in enumerate(field.phi):
            lines.append(f"{i},{_csv_num(v)}")
    else:
        lines.append("x,y,phi")
        mx, my = field.geometry
        grid = field.grid()
        for x in range(mx):
            for y in range(my):
                lines.append(f"{x},{y},{_csv_num(grid[x, y])}")
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_run(cfg: RunConfig, out_dir: Path) -> int:
    t0 = time.perf_counter()
    report = execute(cfg)
    _write(out_dir / "field.csv", field_csv(report.field))
    _write(out_dir / "report.json",
           _dump_json({"config": cfg.resolved(), "report": report.to_dict()}))
    for t, snap in snapshot_fields(cfg):
        _write(out_dir / f"field_t{t}.csv", field_csv(snap))
    print(f"[qlbm] {cfg.mode} run finished in {time.perf_counter() - t0:.3f}s",
          file=sys.stderr)
    return 0


def _sweep_seeds(master_seed: int, n: int) -> list[int]:
    return [int(s) for s in
            np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)]


def _workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def cmd_compare(cfg_a: RunConfig, cfg_b: RunConfig, out_dir: Path,
                sweep: int | None) -> int:
    if cfg_a.geometry != cfg_b.geometry:
        raise ConfigError("compared configs must share the lattice geometry")
    t0 = time.perf_counter()
    report_a = execute(cfg_a)
    report_b = execute(cfg_b)
    l2, linf = error_metrics(report_a.field, report_b.field)

    lines = []
    if len(cfg_a.geometry) == 1:
        lines.append("cell,phi_a,phi_b")
        for i, (a, b) in enumerate(zip(report_a.field.phi, report_b.field.phi)):
            lines.append(f"{i},{_csv_num(a)},{_csv_num(b)}")
    else:
        lines.append("x,y,phi_a,phi_b")
        mx, my = cfg_a.geometry
        ga, gb = report_a.field.grid(), report_b.field.grid()
        for x in range(mx):
            for y in range(my):
                lines.append(f"{x},{y},{_csv_num(ga[x, y])},{_csv_num(gb[x, y])}")
    _write(out_dir / "compare.csv", "\n".join(lines) + "\n")

    summary = {
        "config_a": cfg_a.resolved(),
        "config_b": cfg_b.resolved(),
        "l2_error": l2,
        "linf_error": linf,
    }
    if sweep:
        seeds = _sweep_seeds(cfg_a.seed, sweep)

        def one(seed: int) -> tuple[float, float]:
            fa = execute(cfg_a, seed=seed).field
            fb = execute(cfg_b, seed=seed).field
            return error_metrics(fa, fb)

        with ThreadPoolExecutor(max_workers=_workers()) as pool:
            metrics = list(pool.map(one, seeds))
        summary["sweep"] = {
            "seeds": seeds,
            "l2_errors": [m[0] for m in metrics],
            "linf_errors": [m[1] for m in metrics],
            "median_l2": float(np.median([m[0] for m in metrics])),
            "median_linf": float(np.median([m[1] for m in metrics])),
        }
    _write(out_dir / "summary.json", _dump_json(summary))
    print(f"[qlbm] compare finished in {time.perf_counter() - t0:.3f}s",
          file=sys.stderr)
    return 0


def cmd_gatecount(scheme: str, m_list: list[int], out_dir: Path) -> int:
    from .ancilla_free import build_streaming  # deferred: avoids cycle at import time

    lines = ["M,afqlbm_toffoli,prior_toffoli,saving"]
    inventories = {}
    for m in m_list:
        if m < 2 or m & (m - 1):
            raise ConfigError(f"M = {m} is not a power of two >= 2")
        formula = toffoli_count(scheme, m)
        spec = ModelSpec(scheme=scheme, M=m)
        emitted = circuit_inventory(build_streaming(scheme, layout_for(spec)))
        if emitted.toffoli_total() != formula:
            raise AssertionError(
                f"emitted streaming circuit for {scheme}, M={m} counts "
                f"{emitted.toffoli_total()} Toffolis, formula says {formula}"
            )
        prior = prior_method_toffoli_count(m)
        lines.append(f"{m},{formula},{prior},{prior - formula}")
        inventories[str(m)] = emitted.to_dict()
    _write(out_dir / "gatecount.csv", "\n".join(lines) + "\n")
    _write(out_dir / "gatecount.json",
           _dump_json({"scheme": scheme, "inventories": inventories}))
    return 0


def cmd_probe(cfg: RunConfig, out_dir: Path) -> int:
    if cfg.mode != "quantum-exact":
        raise ConfigError("probe needs mode quantum-exact")
    spec = cfg.model_spec()
    ls = run_exact(cfg.initial_field(), spec, cfg.loops, cfg.difference_mode)
    low, high = probability_bounds(cfg.scheme)
    lines = ["loop,probability"]
    for i, p in enumerate(ls.loop_probs, start=1):
        lines.append(f"{i},{_csv_num(p)}")
    _write(out_dir / "probe.csv", "\n".join(lines) + "\n")
    eps = 1e-12
    verdict = {
        "config": cfg.resolved(),
        "bounds": [low, high],
        "min_probability": min(ls.loop_probs) if ls.loop_probs else None,
        "max_probability": max(ls.loop_probs) if ls.loop_probs else None,
        "within_bounds": all(low - eps <= p <= high + eps for p in ls.loop_probs),
    }
    _write(out_dir / "verdict.json", _dump_json(verdict))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlbm",
                                     description="quantum lattice Boltzmann toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one configured experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=".")
    run.add_argument("--seed", type=int, default=None)

    comp = sub.add_parser("compare", help="run two configs and compare fields")
    comp.add_argument("--config", required=True, nargs=2,
                      metavar=("CONFIG_A", "CONFIG_B"))
    comp.add_argument("--out", default=".")
    comp.add_argument("--seed", type=int, default=None)
    comp.add_argument("--seeds", type=int, default=None,
                      help="sweep this many derived seeds and report medians")

    gates = sub.add_parser("gatecount", help="Toffoli cost table per lattice size")
    gates.add_argument("--scheme", default=D2Q5, choices=(D1Q3, D2Q5))
    gates.add_argument("--m-list", default="2,4,8,16,32,64",
                       help="comma-separated lattice sizes")
    gates.add_argument("--out", default=".")

    probe = sub.add_parser("probe", help="per-loop post-selection probability trace")
    probe.add_argument("--config", required=True)
    probe.add_argument("--out", default=".")
    probe.add_argument("--seed", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        out_dir = Path(args.out)
        if args.command == "run":
            cfg = RunConfig.from_json(args.config)
            if args.seed is not None:
                cfg.seed = args.seed
            return cmd_run(cfg, out_dir)
        if args.command == "compare":
            cfg_a = RunConfig.from_json(args.config[0])
            cfg_b = RunConfig.from_json(args.config[1])
            if args.seed is not None:
                cfg_a.seed = args.seed
                cfg_b.seed = args.seed
            return cmd_compare(cfg_a, cfg_b, out_dir, args.seeds)
        if args.command == "gatecount":
            m_list = [int(m) for m in args.m_list.split(",") if m]
            return cmd_gatecount(args.scheme, m_list, out_dir)
        cfg = RunConfig.from_json(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        return cmd_probe(cfg, out_dir)
    except PostSelectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except AssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return 4
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
