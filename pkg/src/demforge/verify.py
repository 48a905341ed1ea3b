"""Independent checks: all-pairs contact oracle and physical property suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from . import simt
from .contacts import initialize_contact_ids
from .materials import MaterialTable
from .particles import ParticleSet
from .physics import MaterialParams
from .pipeline import Simulation, _pair_apply, _separation, force_gravity
from .rng import XorShift64Star
from .walls import box_walls

FRICTION_SLACK = 1e-9
MOMENTUM_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _all_pairs(pos, vel, omg, rad, mass, mat, bt, bn, alpha, mu, partner, disp,
               touched, force, torque, h, hits, nhits, err):
    n = pos.shape[0]
    for i in prange(n):
        acc = np.zeros(7)
        for k in range(3):
            acc[k] = force[i, k]
            acc[3 + k] = torque[i, k]
        c = 0
        for j in range(n):
            if j == i:
                continue
            dx, dy, dz, dist = _separation(pos, i, j)
            if dist < rad[i] + rad[j]:
                if c < hits.shape[1]:
                    hits[i, c] = j
                c += 1
                code = _pair_apply(i, j, dx, dy, dz, dist, pos, vel, omg, rad, mass, mat,
                                   bt, bn, alpha, mu, partner, disp, touched, h, acc)
                if code != 0:
                    err[i] = code
                    break
        nhits[i] = c
        for k in range(3):
            force[i, k] = acc[k]
            torque[i, k] = acc[3 + k]


def collide_inputs(sim):
    """Sort the live state and return fresh pre-Collide accumulators and table.

    The accumulators hold gravity only and the table copy has been swept,
    exactly what the Collide kernel sees inside a step.
    """
    sim.sort_and_reorder()
    force = np.zeros((sim.n, 3))
    torque = np.zeros((sim.n, 3))
    force_gravity(sim.particles, force, torque, sim.gravity)
    table = initialize_contact_ids(sim.table.copy())
    return force, torque, table


def run_variant(sim, variant, inputs):
    force, torque, table = (x.copy() for x in inputs)
    result = sim.collide(variant, force, torque, table)
    return force, torque, table, result


def brute_force_collide(sim, inputs):
    """Particle-particle forces from an O(N^2) scan over ascending partner index.

    Cell traversal visits candidates in ascending sorted index too, so the
    per-particle accumulation order matches the grid kernels exactly.
    Returns ``(force, torque, table, pairs)``.
    """
    force, torque, table = (x.copy() for x in inputs)
    p, m = sim.particles, sim.materials
    n = sim.n
    cap = max(table.capacity, 64)
    hits = np.full((n, cap), -1, dtype=np.int64)
    nhits = np.zeros(n, dtype=np.int64)
    err = np.zeros(n, dtype=np.int64)
    _all_pairs(p.pos, p.vel, p.omega, p.radius, p.mass, p.material,
               m.bracket_t, m.bracket_n, m.alpha, m.mu, table.partner, table.disp,
               table.touched, force, torque, sim.dt, hits, nhits, err)
    sim._check(err, "Collide[oracle]")
    pairs = {(i, int(j)) for i in range(n) for j in hits[i, : min(nhits[i], cap)]}
    return force, torque, table, pairs


def trace_pairs(trace):
    pairs = set()
    owners = np.repeat(np.arange(len(trace)), trace.lengths)
    for i, j in zip(owners[trace.contacts], trace.candidates[trace.contacts]):
        pairs.add((int(i), int(j)))
    return pairs


def same_bits(a, b):
    return a.shape == b.shape and a.tobytes() == b.tobytes()


def check_oracle(sim):
    """Contact completeness and bitwise force agreement with the all-pairs scan."""
    r_max = float(sim.particles.radius.max())
    inputs = collide_inputs(sim)
    gf, gt, gtab, res = run_variant(sim, sim.variant, inputs)
    of, ot, otab, opairs = brute_force_collide(sim, inputs)
    gpairs = trace_pairs(res.trace)
    results = []
    missing = opairs - gpairs
    why = []
    if sim.cell_size < 2.0 * r_max:
        why.append(
            f"cell size {sim.cell_size:g} < 2*r_max = {2 * r_max:g}, so the 27-cell "
            "neighborhood cannot reach every possible contact"
        )
    if missing:
        why.append(f"{len(missing)} of {len(opairs)} contacts missed by the cell search")
    if gpairs - opairs:
        why.append(f"{len(gpairs - opairs)} spurious contacts")
    results.append(CheckResult(
        "contact completeness", not why,
        "; ".join(why) if why else f"{len(opairs)} directed contacts match the O(N^2) oracle",
    ))
    agree = same_bits(gf, of) and same_bits(gt, ot) and gtab.equals(otab)
    results.append(CheckResult(
        "oracle force equivalence", agree,
        "forces, torques and slip table bitwise equal" if agree else
        f"max |dF| = {np.abs(gf - of).max():.3e}",
    ))
    return results


def check_variants(sim):
    inputs = collide_inputs(sim)
    a = run_variant(sim, simt.BASELINE, inputs)
    b = run_variant(sim, simt.TWO_PHASE, inputs)
    ok = (same_bits(a[0], b[0]) and same_bits(a[1], b[1]) and a[2].equals(b[2])
          and a[3].trace.equals(b[3].trace))
    return CheckResult("variant equivalence", ok,
                       "two-phase output bitwise equal to baseline" if ok else "outputs differ")


# ---------------------------------------------------------------------------
# physical properties
# ---------------------------------------------------------------------------


def random_velocities(n, speed, seed, drift=(1.0, 0.0, 0.0)):
    u = XorShift64Star(seed).uniforms(3 * n).reshape(n, 3)
    return speed * (np.asarray(drift) + (2.0 * u - 1.0))


DENSE_MATERIAL = MaterialParams(0.3, 25000.0 / 2.6, 25000.0, 0.3, 0.3)


def dense_state(n, seed, material=DENSE_MATERIAL, spacing=1.9, jitter=0.05,
                dt=1e-3, speed=0.5, steps=2, walls=True):
    """A seeded, compressed packing with live slip history.

    Particles (r = m = 1) sit on a jittered cubic lattice closer than one
    diameter, so most lattice neighbors overlap.  Random translational and
    angular velocities plus a few steps under gravity populate the contact
    table before the state is handed back.
    """
    side = max(1, round(n ** (1.0 / 3.0)))
    ext = spacing * np.array([side, side, math.ceil(n / side**2)]) + 0.2
    rng = XorShift64Star(seed)
    idx = np.arange(n)
    sites = np.stack([idx % side, (idx // side) % side, idx // side**2], axis=1)
    u = rng.uniforms(9 * n).reshape(n, 9)
    pos = 0.1 + (sites + 0.5) * spacing + jitter * spacing * (2.0 * u[:, :3] - 1.0)
    vel = speed * (2.0 * u[:, 3:6] - 1.0)
    omg = speed * (2.0 * u[:, 6:9] - 1.0)
    ps = ParticleSet.uniform(pos, 1.0, 1.0, 0, vel=vel, omega=omg)
    lo, hi = np.zeros(3), ext
    sim = Simulation(ps, MaterialTable([material]), dt, (lo, hi), gravity=(0.0, 0.0, -9.81),
                     rectangles=box_walls(lo, hi) if walls else ())
    for _ in range(steps):
        sim.step()
    return sim


def check_momentum(sim, steps=1000, tol=MOMENTUM_TOL):
    """Linear momentum drift of a gravity-free, wall-free run."""
    p0 = sim.particles.momentum()
    ref = float(np.linalg.norm(p0))
    worst = 0.0
    contacts = 0
    for _ in range(steps):
        m = sim.step()
        contacts = max(contacts, m.contacts)
        worst = max(worst, float(np.linalg.norm(sim.particles.momentum() - p0)))
    rel = worst / ref if ref > 0 else worst
    return CheckResult(
        "momentum conservation", rel <= tol,
        f"max drift {rel:.3e} relative over {steps} steps (peak {contacts} contacts)",
    )


def collision_window(material, radius, mass, dt, rel_speed, offset, spin1, spin2,
                     max_steps=200000):
    """Kinetic energy before and after one isolated two-body collision.

    Particle 2 approaches along -x with lateral ``offset``; energy is sampled
    once the pair has separated again.
    """
    gap = 0.05 * radius
    x2 = 2.0 * radius + gap
    pos = np.array([[0.0, 0.0, 0.0], [x2, offset, 0.0]])
    vel = np.array([[0.0, 0.0, 0.0], [-rel_speed, 0.0, 0.0]])
    omg = np.array([spin1, spin2], dtype=np.float64)
    ps = ParticleSet.uniform(pos, radius, mass, 0, vel=vel, omega=omg)
    span = 8.0 * radius
    sim = Simulation(ps, MaterialTable([material]), dt,
                     ((-span, -span, -span), (span, span, span)), gravity=(0.0, 0.0, 0.0))
    e0 = sim.particles.kinetic_energy()
    touched = False
    for _ in range(max_steps):
        m = sim.step()
        if m.contacts:
            touched = True
        elif touched:
            return e0, sim.particles.kinetic_energy(), True
    return e0, sim.particles.kinetic_energy(), touched


def check_dissipation(material, radius, mass, dt, speed, trials=20, seed=0):
    """Oblique spinning impacts never gain kinetic energy when restitution < 1."""
    rng = XorShift64Star(seed)
    worst = -math.inf
    hits = 0
    for _ in range(trials):
        b = rng.uniform() * 1.6 * radius
        spins = [(2.0 * rng.uniform() - 1.0) * speed / radius for _ in range(6)]
        e0, e1, hit = collision_window(material, radius, mass, dt, speed, b, spins[:3], spins[3:])
        if hit:
            hits += 1
            worst = max(worst, (e1 - e0) / e0)
    ok = hits > 0 and worst <= 1e-12
    return CheckResult(
        "dissipation", ok,
        f"{hits}/{trials} collisions, worst relative energy change {worst:.3e}",
    )


def check_friction(ratios, slack=FRICTION_SLACK):
    worst = max(ratios, default=0.0)
    return CheckResult(
        "friction bound", worst <= 1.0 + slack,
        f"max |F_t| / (mu_D |F_n|) = {worst:.12f} over {len(ratios)} steps",
    )
