"""Command-line interface: ``vortexpair {solve,evolve,stability,diagnose}``.

Exit codes: 0 success, 2 bad configuration, 3 non-convergence, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import io
from .diagnostics import DEFAULT_RADII, bound_report, cc_classify
from .euler import EvolutionState, evolve, stability_experiment
from .grid import Domain, Field, xp_norm
from .optimizer import BisectionError, SolverConfig, solve
from .profiles import BUILTINS, builtin

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_IO = 0, 2, 3, 4

logger = logging.getLogger("vortexpair")


class ConfigError(ValueError):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass
class RunConfig:
    command: str
    nx: int = 64
    ny: int = 32
    half_width: float = 4.0
    strip_height: float = 2.0
    profile: str = "builtin:patch"
    p: float = 3.0
    impulse: float | None = None
    tol_energy: float = 1e-8
    max_iter: int = 500
    dt: float = 0.01
    T: float = 2.0
    record_every: int = 10
    deltas: list = field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3])
    radii: list = field(default_factory=lambda: list(DEFAULT_RADII))
    inputs: str | None = None
    out: str | None = None
    report: str | None = None
    trace: str | None = None
    seed: int = 0

    def domain(self) -> Domain:
        return Domain(self.half_width, self.strip_height, self.nx, self.ny)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vortexpair", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--grid", default="64,32", help="nx,ny")
        sp.add_argument("--domain", default="4,2", help="L,Z: strip [-L,L] x (0,Z)")
        sp.add_argument("--p", default="3")
        sp.add_argument("--report", help="key=value report path (default: stdout)")
        sp.add_argument("--seed", default="0")

    s = sub.add_parser("solve", help="maximize energy at fixed impulse")
    common(s)
    s.add_argument("--profile", default="builtin:patch", help="builtin:NAME or VPF path")
    s.add_argument("--impulse")
    s.add_argument("--tol", default="1e-8", help="relative energy tolerance")
    s.add_argument("--max-iter", default="500")
    s.add_argument("--out", help="VPF path for the maximizer")
    s.add_argument("--trace", help="per-iteration trace path")

    e = sub.add_parser("evolve", help="evolve vorticity under the Euler equations")
    common(e)
    e.add_argument("--profile", default="builtin:patch")
    e.add_argument("--dt", default="0.01")
    e.add_argument("--T", default="2")
    e.add_argument("--record-every", default="10")
    e.add_argument("--out", help="directory for snapshots and index.txt")

    st = sub.add_parser("stability", help="perturb a maximizer and track orbit distance")
    common(st)
    st.add_argument("--profile", default="builtin:patch",
                    help="maximizer VPF, or builtin:NAME solved first at --impulse")
    st.add_argument("--impulse")
    st.add_argument("--deltas", default="0.01,0.005,0.0025")
    st.add_argument("--dt", default="0.01")
    st.add_argument("--T", default="2")
    st.add_argument("--record-every", default="10")

    dg = sub.add_parser("diagnose", help="concentration and bound diagnostics")
    common(dg)
    dg.add_argument("--input", required=False, help="VPF file or directory of VPF snapshots")
    dg.add_argument("--radii", default=",".join(str(r) for r in DEFAULT_RADII))
    return ap


def _floats(text: str, n: int | None = None) -> list[float]:
    vals = [float(t) for t in text.split(",") if t.strip()]
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} values")
    return vals


def parse_config(argv) -> RunConfig:
    """Parse and validate ``argv``; raise :class:`ConfigError` listing every bad flag."""
    ns = _parser().parse_args(argv)
    cfg = RunConfig(command=ns.command)
    bad = []

    def take(flag, fn):
        try:
            return fn()
        except (ValueError, TypeError) as exc:
            bad.append(f"--{flag}: {exc}")
            return None

    g = take("grid", lambda: [int(x) for x in ns.grid.split(",")])
    if g is not None:
        if len(g) != 2 or min(g) < 2:
            bad.append("--grid: need nx,ny with both >= 2")
        else:
            cfg.nx, cfg.ny = g
    dm = take("domain", lambda: _floats(ns.domain, 2))
    if dm is not None:
        if not all(np.isfinite(dm)) or min(dm) <= 0:
            bad.append("--domain: L and Z must be positive")
        else:
            cfg.half_width, cfg.strip_height = dm
    p = take("p", lambda: float(ns.p))
    if p is not None:
        if not p > 2 or not np.isfinite(p):
            bad.append(f"--p: must satisfy 2 < p < inf, got {ns.p}")
        else:
            cfg.p = p
    seed = take("seed", lambda: int(ns.seed))
    if seed is not None:
        cfg.seed = seed
    cfg.report = ns.report

    if hasattr(ns, "profile"):
        cfg.profile = ns.profile
        if ns.profile.startswith("builtin:"):
            name = ns.profile.split(":", 1)[1]
            if name not in BUILTINS:
                bad.append(f"--profile: unknown builtin {name!r} (choose from {sorted(BUILTINS)})")
        elif not ns.profile:
            bad.append("--profile: empty path")

    if ns.command in ("solve", "stability"):
        from_file = ns.command == "stability" and not ns.profile.startswith("builtin:")
        if ns.impulse is None:
            if not from_file:
                bad.append("--impulse: required")
        else:
            i0 = take("impulse", lambda: float(ns.impulse))
            if i0 is not None:
                if not i0 > 0 or not np.isfinite(i0):
                    bad.append("--impulse: must be positive")
                else:
                    cfg.impulse = i0
    if ns.command == "solve":
        tol = take("tol", lambda: float(ns.tol))
        if tol is not None:
            if not tol > 0:
                bad.append("--tol: must be positive")
            else:
                cfg.tol_energy = tol
        mi = take("max-iter", lambda: int(ns.max_iter))
        if mi is not None:
            if mi < 1:
                bad.append("--max-iter: must be >= 1")
            else:
                cfg.max_iter = mi
        cfg.out, cfg.trace = ns.out, ns.trace
    if ns.command in ("evolve", "stability"):
        for flag, attr in (("dt", "dt"), ("T", "T")):
            v = take(flag, lambda: float(getattr(ns, attr)))
            if v is not None:
                if not v > 0 or not np.isfinite(v):
                    bad.append(f"--{flag}: must be positive")
                else:
                    setattr(cfg, attr, v)
        re_ = take("record-every", lambda: int(ns.record_every))
        if re_ is not None:
            if re_ < 1:
                bad.append("--record-every: must be >= 1")
            else:
                cfg.record_every = re_
    if ns.command == "evolve":
        if not ns.out:
            bad.append("--out: required (snapshot directory)")
        cfg.out = ns.out
    if ns.command == "stability":
        ds = take("deltas", lambda: _floats(ns.deltas))
        if ds is not None:
            if not ds or min(ds) < 0:
                bad.append("--deltas: need a nonempty list of nonnegative values")
            else:
                cfg.deltas = ds
    if ns.command == "diagnose":
        if not ns.input:
            bad.append("--input: required")
        cfg.inputs = ns.input
        rs = take("radii", lambda: _floats(ns.radii))
        if rs is not None:
            if not rs or min(rs) <= 0:
                bad.append("--radii: need positive radii")
            else:
                cfg.radii = rs
    if bad:
        raise ConfigError(bad)
    return cfg


def load_profile(cfg: RunConfig) -> Field:
    if cfg.profile.startswith("builtin:"):
        return builtin(cfg.profile.split(":", 1)[1], cfg.domain())
    return io.read_vpf(cfg.profile)


def _emit(cfg: RunConfig, record: dict) -> None:
    if cfg.report:
        io.write_report(cfg.report, record)
    else:
        sys.stdout.write("".join(f"{k}={io._format_value(v)}\n" for k, v in record.items()))


def run_solve(cfg: RunConfig) -> int:
    z0 = load_profile(cfg)
    sc = SolverConfig(impulse=cfg.impulse, p=cfg.p, tol_energy=cfg.tol_energy, max_iter=cfg.max_iter)
    try:
        res = solve(z0, sc)
    except BisectionError as exc:
        logger.error("%s", exc)
        return EXIT_NONCONVERGED
    s = res.state
    if cfg.out:
        io.write_vpf(cfg.out, s.zeta)
    if cfg.trace:
        io.write_trace(cfg.trace, res.trace)
    _emit(cfg, {
        "lambda": s.lam,
        "energy": s.energy,
        "impulse": s.impulse,
        "iterations": s.iteration,
        "converged": res.converged,
        "fv_residual": res.fit.residual,
        "virial_gap": res.fit.virial_gap,
        "vanishes_outside": res.fit.vanishes_outside,
        "full_rearrangement": res.is_full_rearrangement,
        "support_cells": res.fit.support_cells,
        "runtime": res.runtime,
        "seed": cfg.seed,
    })
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def run_evolve(cfg: RunConfig) -> int:
    om = load_profile(cfg)
    os.makedirs(cfg.out, exist_ok=True)
    traj = evolve(EvolutionState.start(om, cfg.dt), cfg.T, cfg.record_every, cfg.p)
    lines = []
    for k, (snap, rec) in enumerate(zip(traj.snapshots, traj.series)):
        name = f"snap_{k:05d}.vpf"
        io.write_vpf(os.path.join(cfg.out, name), snap)
        lines.append(f"{rec['t']!r} {name} {rec['energy']!r} {rec['impulse']!r} {rec['mass']!r}\n")
    with open(os.path.join(cfg.out, "index.txt"), "w") as fh:
        fh.writelines(lines)
    st = traj.state
    _emit(cfg, {
        "t_final": st.t,
        "steps": st.steps,
        "energy_drift": traj.max_drift("energy"),
        "impulse_drift": traj.max_drift("impulse"),
        "mass_drift": traj.max_drift("mass"),
        "clamped_mass": st.clamped_mass,
        "outflow_mass": st.outflow_mass,
        "cfl_warning": st.cfl_warning,
        "snapshots": len(traj.snapshots),
    })
    return EXIT_OK


def run_stability(cfg: RunConfig) -> int:
    if cfg.profile.startswith("builtin:"):
        try:
            res = solve(load_profile(cfg), SolverConfig(impulse=cfg.impulse, p=cfg.p))
        except BisectionError as exc:
            logger.error("%s", exc)
            return EXIT_NONCONVERGED
        if not res.converged:
            return EXIT_NONCONVERGED
        rep = res.state.zeta
    else:
        rep = load_profile(cfg)
    out = {"rep_norm": xp_norm(rep, cfg.p)}
    cfl = False
    for d in cfg.deltas:
        r = stability_experiment(rep, d, cfg.T, cfg.dt, cfg.p, cfg.record_every)
        tag = format(d, "g")
        out[f"max_distance_delta_{tag}"] = r.max_distance
        out[f"energy_drift_delta_{tag}"] = r.energy_drift
        cfl = cfl or r.cfl_warning
    out["cfl_warning"] = cfl
    _emit(cfg, out)
    return EXIT_OK


def run_diagnose(cfg: RunConfig) -> int:
    paths = io.list_vpf(cfg.inputs) if os.path.isdir(cfg.inputs) else [cfg.inputs]
    if not paths:
        raise FileNotFoundError(f"no .vpf files in {cfg.inputs}")
    seq = [io.read_vpf(p) for p in paths]
    out = {"inputs": len(seq)}
    out.update(cc_classify(seq, cfg.radii).as_dict())
    out.update(bound_report(seq[-1], cfg.p).as_dict())
    _emit(cfg, out)
    return EXIT_OK


RUNNERS = {"solve": run_solve, "evolve": run_evolve, "stability": run_stability, "diagnose": run_diagnose}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        for msg in exc.problems:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING)
    try:
        return RUNNERS[cfg.command](cfg)
    except (OSError, io.VPFError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
