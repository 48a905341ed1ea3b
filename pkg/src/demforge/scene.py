"""Initial particle states and config-to-simulation assembly."""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .materials import MaterialTable
from .particles import ParticleSet
from .pipeline import Simulation
from .rng import XorShift64Star
from .walls import Rectangle, Segment


def lattice_positions(count, radius, spacing, lo, hi, jitter, seed):
    """Jittered cubic lattice filling the box from ``lo`` upward.

    Sites sit ``spacing`` apart starting half a spacing inside ``lo``; x
    varies fastest, then y, then z.  Each coordinate is offset by a uniform
    draw in ``[-a, a]`` with ``a = jitter * (spacing - 2 * radius)``, drawn
    x, y, z per particle in ID order.
    """
    lo = np.asarray(lo, float)
    ext = np.asarray(hi, float) - lo
    nx, ny, nz_cap = (int(math.floor(e / spacing)) for e in ext)
    if count == 0:
        return np.zeros((0, 3))
    if nx < 1 or ny < 1 or nz_cap < 1:
        raise ConfigError("domain too small for one lattice site", key="particles.lattice_spacing")
    layer = nx * ny
    if math.ceil(count / layer) > nz_cap:
        raise ConfigError(
            f"{count} particles need {math.ceil(count / layer)} layers, box holds {nz_cap}",
            key="particles.count",
        )
    idx = np.arange(count)
    sites = np.stack([idx % nx, (idx // nx) % ny, idx // layer], axis=1).astype(np.float64)
    pos = lo + (sites + 0.5) * spacing
    amp = jitter * (spacing - 2.0 * radius)
    if amp > 0.0:
        u = XorShift64Star(seed).uniforms(3 * count).reshape(count, 3)
        pos = pos + (2.0 * u - 1.0) * amp
    return pos


def material_table(cfg):
    names = cfg.material_names()
    return MaterialTable([cfg.materials[n] for n in names], names, cfg.restitution_pairs)


def walls_from_config(cfg, table):
    rects = [
        Rectangle(r.corner, r.edge_u, r.edge_v, table.index(r.material))
        for _, r in sorted(cfg.rects.items())
    ]
    segs = [Segment(s.a, s.b, table.index(s.material)) for _, s in sorted(cfg.lines.items())]
    return rects, segs


def initial_particles(cfg):
    from .io import read_snapshot

    pb = cfg.particles
    mat = material_names_index(cfg, pb.material)
    if pb.init == "snapshot":
        path = pb.snapshot
        if cfg.base_dir is not None:
            path = cfg.base_dir / path
        snap = read_snapshot(path)
        n = len(snap["id"])
        return ParticleSet(
            pos=snap["pos"], vel=snap["vel"], omega=snap["omega"], radius=snap["r"],
            mass=np.full(n, pb.mass), material=np.full(n, mat, dtype=np.int64),
            ids=snap["id"],
        )
    pos = lattice_positions(pb.count, pb.radius, pb.spacing, cfg.domain_min,
                            cfg.domain_max, pb.jitter, cfg.seed)
    return ParticleSet.uniform(pos, pb.radius, pb.mass, mat)


def material_names_index(cfg, name):
    return cfg.material_names().index(name)


def build_simulation(cfg, require_separated=True, **overrides):
    """Assemble a primed :class:`Simulation` from a config.

    With ``require_separated`` a lattice start that already has contacts is
    rejected, since the seeding protocol promises separated particles.
    """
    table = material_table(cfg)
    rects, segs = walls_from_config(cfg, table)
    kwargs = dict(
        gravity=cfg.gravity, rectangles=rects, segments=segs,
        cell_size=cfg.cell_size, capacity=cfg.capacity,
        variant=cfg.collide_variant, warp=cfg.warp,
    )
    kwargs.update(overrides)
    sim = Simulation(initial_particles(cfg), table, cfg.dt, (cfg.domain_min, cfg.domain_max), **kwargs)
    if require_separated and cfg.particles.init == "lattice":
        m = sim.initial_metrics
        if m.contacts or m.wall_contacts:
            raise ConfigError(
                f"initial lattice has {m.contacts} particle and {m.wall_contacts} wall contacts",
                key="particles.jitter",
            )
    return sim
