"""Snapshot and metrics CSV files."""

from __future__ import annotations

import csv

import numpy as np

SNAPSHOT_HEADER = ("id", "x", "y", "z", "vx", "vy", "vz", "wx", "wy", "wz", "r")
METRICS_HEADER = (
    "step", "kernel", "wall_ns", "model_cycles_baseline", "model_cycles_two_phase",
    "utilization_baseline", "utilization_two_phase", "contacts",
    "max_contacts_per_particle", "clamps",
)


def snapshot_name(step):
    return f"snapshot_{step:08d}.csv"


def write_snapshot(path, particles):
    """One row per particle in ID order; floats use shortest round-trip repr."""
    order = np.argsort(particles.ids, kind="stable")
    cols = np.concatenate(
        [particles.pos, particles.vel, particles.omega, particles.radius[:, None]], axis=1
    )[order]
    ids = particles.ids[order]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SNAPSHOT_HEADER) + "\n")
        for pid, row in zip(ids.tolist(), cols.tolist()):
            fh.write(f"{pid}," + ",".join(repr(v) for v in row) + "\n")


def read_snapshot(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != SNAPSHOT_HEADER:
            raise ValueError(f"{path}: unexpected snapshot header {header}")
        rows = [r for r in reader if r]
    for r in rows:
        if len(r) != len(SNAPSHOT_HEADER):
            raise ValueError(f"{path}: row with {len(r)} fields")
    data = np.array([[float(v) for v in r[1:]] for r in rows]).reshape(len(rows), 10)
    return {
        "id": np.array([int(r[0]) for r in rows], dtype=np.int64),
        "pos": data[:, 0:3],
        "vel": data[:, 3:6],
        "omega": data[:, 6:9],
        "r": data[:, 9],
    }


class MetricsWriter:
    """Per-step, per-kernel rows.

    Modeled cycles, utilizations and contact counts belong to the Collide
    row, the clamp count to CalcHash; other cells are zero.  ``wall_ns`` is
    written as 0 unless ``wall_time`` is set, which keeps runs byte-for-byte
    reproducible by default.
    """

    def __init__(self, path, kernels, wall_time=False):
        self.fh = open(path, "w", newline="")
        self.kernels = kernels
        self.wall_time = wall_time
        self.fh.write(",".join(METRICS_HEADER) + "\n")

    def write(self, m):
        for k in self.kernels:
            ns = m.wall_ns.get(k, 0) if self.wall_time else 0
            if k == "Collide":
                row = (m.step, k, ns, repr(m.cycles_baseline), repr(m.cycles_two_phase),
                       repr(m.utilization_baseline), repr(m.utilization_two_phase),
                       m.contacts, m.max_contacts_per_particle, 0)
            else:
                row = (m.step, k, ns, 0, 0, 0, 0, 0, 0, m.clamps if k == "CalcHash" else 0)
            self.fh.write(",".join(str(v) for v in row) + "\n")

    def close(self):
        self.fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
