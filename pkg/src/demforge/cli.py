"""Command line entry points: ``run``, ``bench`` and ``verify``.

Exit codes: 0 success, 2 configuration error, 3 runtime abort, 4 verify
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import simt, verify
from .config import parse_config
from .errors import ConfigError, DemError, KernelError
from .io import MetricsWriter, snapshot_name, write_snapshot
from .pipeline import KERNELS
from .scene import build_simulation

log = logging.getLogger("demforge")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4


def configure_threads():
    """Apply ``DEMFORGE_THREADS`` (0 or unset = all cores) to the kernels."""
    raw = os.environ.get("DEMFORGE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}", key="DEMFORGE_THREADS") from None
    if n < 0:
        raise ConfigError("must be >= 0", key="DEMFORGE_THREADS")
    if n:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def run(cfg, out_dir, wall_time=False):
    """Warm up, then step and write snapshots plus per-step metrics."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sim = build_simulation(cfg)
    for _ in range(cfg.warmup_steps):
        sim.step()
    sim.step_index = 0
    write_snapshot(out_dir / snapshot_name(0), sim.particles)
    with MetricsWriter(out_dir / "metrics.csv", KERNELS, wall_time=wall_time) as mw:
        for s in range(1, cfg.steps + 1):
            m = sim.step()
            mw.write(m)
            if s == cfg.steps or (cfg.snapshot_every and s % cfg.snapshot_every == 0):
                write_snapshot(out_dir / snapshot_name(s), sim.particles)
    return sim


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _summarize(metrics, n):
    walls = {}
    for m in metrics:
        for k, v in m.wall_ns.items():
            walls.setdefault(k, []).append(v)
    cb = float(sum(m.cycles_baseline for m in metrics))
    ct = float(sum(m.cycles_two_phase for m in metrics))
    contacts = [m.contacts for m in metrics]
    return {
        "steps": len(metrics),
        "wall_ns_mean": {k: float(np.mean(v)) for k, v in walls.items()},
        "model_cycles_baseline": cb,
        "model_cycles_two_phase": ct,
        "modeled_speedup": cb / ct if ct else 1.0,
        "two_phase_fraction": ct / cb if cb else 1.0,
        "utilization_baseline": float(np.mean([m.utilization_baseline for m in metrics])),
        "utilization_two_phase": float(np.mean([m.utilization_two_phase for m in metrics])),
        "mean_contacts": float(np.mean(contacts)),
        "coordination_number": 2.0 * float(np.mean(contacts)) / n if n else 0.0,
        "max_contacts_per_particle": int(max(m.max_contacts_per_particle for m in metrics)),
    }


def bench_simulation(sim, warmup_steps, steps):
    """Sparse comparison first, then warm up and compare on the dense state.

    Every measured step runs both Collide variants on identical inputs and
    aborts unless their outputs agree bit for bit.
    """
    sparse = _summarize([sim.step(compare=True)], sim.n)
    for _ in range(warmup_steps):
        sim.step()
    dense = _summarize(sim.run(steps, compare=True), sim.n)
    return {"particles": sim.n, "warmup_steps": warmup_steps, "dense": dense, "sparse": sparse}


def _print_bench(report, out=None):
    out = out or sys.stdout
    print(f"particles: {report['particles']}  warm-up steps: {report['warmup_steps']}", file=out)
    for label in ("sparse", "dense"):
        r = report[label]
        print(f"\n[{label}] {r['steps']} measured step(s), coordination number "
              f"{r['coordination_number']:.2f}", file=out)
        print(f"  modeled Collide cycles  baseline {r['model_cycles_baseline']:.0f}  "
              f"two-phase {r['model_cycles_two_phase']:.0f}", file=out)
        print(f"  modeled speedup {r['modeled_speedup']:.3f}  "
              f"(two-phase = {100 * r['two_phase_fraction']:.1f}% of baseline)", file=out)
        print(f"  warp utilization  baseline {r['utilization_baseline']:.3f}  "
              f"two-phase {r['utilization_two_phase']:.3f}", file=out)
        print("  mean wall time per kernel (us):", file=out)
        for k, v in r["wall_ns_mean"].items():
            print(f"    {k:<26s} {v / 1e3:12.1f}", file=out)


def bench(cfg, out_dir=None):
    sim = build_simulation(cfg)
    report = bench_simulation(sim, cfg.warmup_steps, cfg.steps)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "bench.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def verify_config(cfg, momentum_steps=1000, dissipation_trials=20):
    """Run the oracle and property suite; returns a list of CheckResult."""
    results = []
    sim = build_simulation(cfg)
    ratios = [sim.initial_metrics.friction_ratio]
    for _ in range(cfg.warmup_steps):
        ratios.append(sim.step().friction_ratio)
    for _ in range(cfg.steps):
        ratios.append(sim.step(compare=True).friction_ratio)
    results.append(verify.check_variants(sim))
    results.extend(verify.check_oracle(sim))
    results.append(verify.check_friction(ratios))

    pb = cfg.particles
    free = replace(cfg, gravity=(0.0, 0.0, 0.0), rects={}, lines={})
    msim = build_simulation(free)
    speed = 1e-3 * pb.radius / cfg.dt
    msim.particles.vel[:] = verify.random_velocities(msim.n, speed, cfg.seed + 1)[msim.particles.ids]
    msim.prime()
    results.append(verify.check_momentum(msim, steps=momentum_steps))

    mat = cfg.materials[pb.material]
    results.append(verify.check_dissipation(
        mat, pb.radius, pb.mass, cfg.dt, speed, trials=dissipation_trials, seed=cfg.seed
    ))
    return results


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _parser():
    ap = argparse.ArgumentParser(prog="demforge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "simulate and write snapshots + metrics"),
                        ("bench", "compare both Collide variants on sparse and dense states"),
                        ("verify", "oracle and physical property checks")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path)
        p.add_argument("--out-dir", type=Path, default=None)
        p.add_argument("--steps", type=int, default=None, help="override run.steps")
        p.add_argument("--variant", choices=simt.VARIANTS, default=None)
        p.add_argument("--seed", type=int, default=None)
        if name == "run":
            p.add_argument("--wall-time", action="store_true",
                           help="record kernel wall times (output no longer reproducible)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        configure_threads()
        cfg = parse_config(args.config).with_overrides(args.steps, args.variant, args.seed)
        if cfg.cell_size is not None and cfg.cell_size < 2.0 * cfg.particles.radius:
            log.warning("grid.cell_size %g is below 2*radius; contacts can be missed", cfg.cell_size)
        if args.command == "run":
            run(cfg, args.out_dir or Path("out"), wall_time=args.wall_time)
            return EXIT_OK
        if args.command == "bench":
            _print_bench(bench(cfg, args.out_dir))
            return EXIT_OK
        results = verify_config(cfg)
        for r in results:
            print(r.line())
        return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KernelError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except DemError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
